use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Module(String),
}

impl CliError {
    /// 2 for configuration or I/O trouble, 1 for failures inside a computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Module(_) => 1,
        }
    }
}

macro_rules! module_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Module(e.to_string())
            }
        })*
    };
}

module_error!(
    quartic_core::ortho::OrthoError,
    quartic_core::freud::FreudError,
    quartic_core::semiclassics::SemiError,
    quartic_core::asympt::AsymptError,
    quartic_core::kernels::KernelError,
    quartic_core::laxpair::LaxError,
    quartic_core::numerics::NumericsError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
