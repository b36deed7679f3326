//! Exact orthogonal-polynomial data for the quartic weight: weight evaluation,
//! Stieltjes recurrence tables, polynomial and wavefunction evaluation, and
//! R₁ from the parabolic cylinder function.

mod eval;
mod params;
mod r1;
mod table;

pub use eval::{
    deriv_coefficients, eval_pn, eval_pn_complex, eval_psi, eval_psi_complex, eval_psi_deriv,
    eval_psi_deriv_complex, gram_deviation, psi_deriv_from_values, psi_values, psi_values_complex,
};
pub use params::{weight, WeightParams};
pub use r1::{parabolic_cylinder_half, parabolic_cylinder_half_cosine, r1_closed_form};
pub use table::{build_table, cache_key, truncation_radius, BuildInfo, RecurrenceTable, TableCache};

use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrthoError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("index {n} outside table (max degree {max})")]
    IndexOutOfRange { n: usize, max: usize },
    #[error("precision exhausted at degree {n}; raise bits")]
    PrecisionExhausted { n: usize },
    #[error("table invariant violated: {0}")]
    InvariantViolation(String),
    #[error("invalid table data: {0}")]
    InvalidTable(String),
    #[error(transparent)]
    Quadrature(#[from] NumericsError),
}
