use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;

use irmgl_cli::run::{exit_code, EXIT_CONFIG, EXIT_OK};
use irmgl_cli::{run, Settings};

/// Graph-Laplacian regularized reconstruction experiments.
///
/// Settings come from the defaults, then `--config`, then the flags below.
/// `--psi` and `--delta-rel` take comma-separated lists; each combination
/// runs into its own subdirectory of `--out` and appends to `report.csv`.
#[derive(Debug, Parser)]
#[command(name = "irmgl", version)]
struct Cli {
    /// key=value file, e.g. a `meta.txt` from an earlier run.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// ct | deblur | laplacian_demo
    #[arg(long)]
    problem: Option<String>,
    /// Image side length E.
    #[arg(long)]
    size: Option<String>,
    /// Number of projection angles (ct).
    #[arg(long)]
    angles: Option<String>,
    /// Blur width (deblur).
    #[arg(long)]
    rho: Option<String>,
    /// adjoint | fbp | tikhonov | tv, comma-separated.
    #[arg(long)]
    psi: Option<String>,
    /// Relative noise levels, comma-separated.
    #[arg(long = "delta-rel")]
    delta_rel: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    eta0: Option<String>,
    #[arg(long)]
    eta1: Option<String>,
    #[arg(long)]
    nu0: Option<String>,
    #[arg(long)]
    nu1: Option<String>,
    #[arg(long)]
    nu2: Option<String>,
    /// Ball radius entering the constant C; defaults to ||u_0||.
    #[arg(long)]
    wp: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// chebyshev | manhattan
    #[arg(long)]
    metric: Option<String>,
    #[arg(long = "graph-period")]
    graph_period: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    /// Tikhonov weight.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "tv-weight")]
    tv_weight: Option<String>,
    /// Four comma-separated pixel values for the 2x2 demo.
    #[arg(long = "demo-values")]
    demo_values: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs = [
            ("problem", &self.problem),
            ("size", &self.size),
            ("angles", &self.angles),
            ("rho", &self.rho),
            ("psi", &self.psi),
            ("delta-rel", &self.delta_rel),
            ("seed", &self.seed),
            ("tau", &self.tau),
            ("eta0", &self.eta0),
            ("eta1", &self.eta1),
            ("nu0", &self.nu0),
            ("nu1", &self.nu1),
            ("nu2", &self.nu2),
            ("wp", &self.wp),
            ("radius", &self.radius),
            ("sigma", &self.sigma),
            ("metric", &self.metric),
            ("graph-period", &self.graph_period),
            ("max-iter", &self.max_iter),
            ("lambda", &self.lambda),
            ("tv-weight", &self.tv_weight),
            ("demo-values", &self.demo_values),
            ("out", &self.out),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }
}

fn settings(cli: &Cli) -> irmgl_core::Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    for (k, v) in cli.overrides() {
        s.set(k, v)?;
    }
    Ok(s)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let runs = match settings(&cli).and_then(|s| s.experiments()) {
        Ok(r) => r,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    for cfg in &runs {
        if let Err(e) = run(cfg) {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    }
    ExitCode::from(EXIT_OK as u8)
}
