use clap::{Args, Parser, Subcommand};
use quartic_cli::{cache_dir, cmd_compare, cmd_psi0_probe, cmd_table, CliError, CliManifest, ProbePoint, Regime, RunConfig, TableStore};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "quartic", version, about = "Orthogonal polynomials with a quartic double-well weight")]
struct Cli {
    /// Table cache directory (overrides QUARTIC_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load the recurrence tables.
    Table(Common),
    /// Compare exact data with an asymptotic formula or run the identity suite.
    Compare {
        #[arg(long, value_enum)]
        regime: Regime,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the semiclassical solution at given points.
    #[command(name = "psi0-probe")]
    Psi0Probe {
        /// Points as x, x+yi or x-yi, optionally with @up, @down, @inner, @outer, @inside, @outside.
        #[arg(long = "z", value_delimiter = ';', required = true, allow_hyphen_values = true)]
        points: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Comma-separated list of N.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<u32>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    ellipse: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Common {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.experiment {
            c.experiment = v;
        }
        if let Some(v) = self.t {
            c.t = v;
        }
        if let Some(v) = self.g {
            c.g = v;
        }
        if let Some(v) = self.scales {
            c.scales = v;
        }
        if self.n.is_some() {
            c.n = self.n;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if self.m.is_some() {
            c.m = self.m;
        }
        if let Some(v) = self.bits {
            c.bits = v;
        }
        if let Some(v) = self.delta {
            c.delta = v;
        }
        if let Some(v) = self.ellipse {
            c.ellipse = v;
        }
        if self.z0.is_some() {
            c.z0 = self.z0;
        }
        if let Some(v) = self.output {
            c.output = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<CliManifest, CliError> {
    let store = || TableStore::new(cache_dir(cli.cache_dir.as_deref()));
    match cli.command {
        Command::Table(common) => {
            let cfg = common.resolve()?;
            cmd_table(&cfg, &store()?)
        }
        Command::Compare { regime, common } => {
            let cfg = common.resolve()?;
            cmd_compare(&cfg, &store()?, regime)
        }
        Command::Psi0Probe { points, common } => {
            let cfg = common.resolve()?;
            let pts = points.iter().map(|s| s.parse::<ProbePoint>()).collect::<Result<Vec<_>, _>>()?;
            cmd_psi0_probe(&cfg, &pts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(m) => {
            for c in &m.checks {
                println!("{} {}: {} (tolerance {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
            }
            if m.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
