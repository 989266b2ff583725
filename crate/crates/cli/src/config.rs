//! Experiment configuration: defaults, `key=value` files and overrides.
//!
//! Keys are the long flag names without the leading dashes (`delta-rel=0.05`);
//! underscores are accepted in place of dashes. Lines starting with `#`
//! are ignored, which is how `meta.txt` carries non-replayable results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use irmgl_core::{
    DistanceMetric, Error, GraphConfig, NoiseSpec, ReconstructorKind, ReconstructorSpec, Result,
    SolverParams,
};

/// Pixel values of the 2x2 demo image, row-major.
pub const DEMO_VALUES: [f64; 4] = [0.2, 0.3, 0.5, 0.1];
pub const DEMO_GRAPH: GraphConfig = GraphConfig { radius: 1.0, sigma: 0.01, metric: DistanceMetric::Manhattan };

pub const DEFAULT_SIZE: usize = 64;
pub const DEFAULT_ANGLES: usize = 30;
pub const DEFAULT_RHO: f64 = 1.5;
pub const DEFAULT_DELTA_REL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Problem {
    #[default]
    Ct,
    Deblur,
    LaplacianDemo,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Ct => "ct",
            Problem::Deblur => "deblur",
            Problem::LaplacianDemo => "laplacian_demo",
        }
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ct" => Ok(Problem::Ct),
            "deblur" => Ok(Problem::Deblur),
            "laplacian_demo" | "laplacian-demo" => Ok(Problem::LaplacianDemo),
            other => Err(invalid(format!("unknown problem {other:?}"))),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

/// One run: a single initializer and noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub size: usize,
    pub num_angles: usize,
    pub rho: f64,
    pub psi: ReconstructorSpec,
    pub noise: NoiseSpec,
    pub solver: SolverParams,
    pub demo_values: [f64; 4],
    pub output_dir: PathBuf,
    /// Where the report row is appended. Usually `output_dir/report.csv`.
    pub report_path: PathBuf,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, output_dir: impl Into<PathBuf>) -> Self {
        let output_dir = output_dir.into();
        let mut solver = SolverParams::default();
        if problem == Problem::LaplacianDemo {
            solver.graph = DEMO_GRAPH;
        }
        Self {
            problem,
            size: DEFAULT_SIZE,
            num_angles: DEFAULT_ANGLES,
            rho: DEFAULT_RHO,
            psi: ReconstructorSpec::default(),
            noise: NoiseSpec { delta_rel: DEFAULT_DELTA_REL, seed: 0 },
            solver,
            demo_values: DEMO_VALUES,
            report_path: output_dir.join("report.csv"),
            output_dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.psi.validate()?;
        if !(self.noise.delta_rel >= 0.0 && self.noise.delta_rel.is_finite()) {
            return Err(invalid(format!("delta-rel must be nonnegative, got {}", self.noise.delta_rel)));
        }
        match self.problem {
            Problem::Ct | Problem::Deblur if self.size < 16 => {
                Err(invalid(format!("size must be at least 16, got {}", self.size)))
            }
            Problem::Ct if self.num_angles == 0 => Err(invalid("angles must be positive")),
            Problem::Deblur if !(self.rho >= 0.0 && self.rho.is_finite()) => {
                Err(invalid(format!("rho must be nonnegative, got {}", self.rho)))
            }
            Problem::Deblur if self.psi.kind == ReconstructorKind::Fbp => {
                Err(invalid("fbp initializer needs the ct problem"))
            }
            _ => Ok(()),
        }
    }

    /// Replayable `key=value` listing of every parameter.
    pub fn to_key_values(&self) -> String {
        let s = &self.solver;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("problem", self.problem.as_str().into());
        put("size", self.size.to_string());
        put("angles", self.num_angles.to_string());
        put("rho", self.rho.to_string());
        put("psi", self.psi.kind.as_str().into());
        put("delta-rel", self.noise.delta_rel.to_string());
        put("seed", self.noise.seed.to_string());
        put("tau", s.tau.to_string());
        put("eta0", s.eta0.to_string());
        put("eta1", s.eta1.to_string());
        put("nu0", s.nu0.to_string());
        put("nu1", s.nu1.to_string());
        put("nu2", s.nu2.to_string());
        put("radius", s.graph.radius.to_string());
        put("sigma", s.graph.sigma.to_string());
        put("metric", s.graph.metric.as_str().into());
        put("graph-period", s.graph_update_period.to_string());
        put("max-iter", s.max_iter.to_string());
        if let Some(wp) = s.wp {
            put("wp", wp.to_string());
        }
        put("lambda", self.psi.lambda.to_string());
        put("tv-weight", self.psi.tv_weight.to_string());
        let demo: Vec<String> = self.demo_values.iter().map(f64::to_string).collect();
        put("demo-values", demo.join(","));
        out
    }
}

/// Parsed settings before expansion into runs. `psi` and `delta-rel`
/// accept comma-separated lists; every combination becomes one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub problem: Problem,
    pub size: usize,
    pub num_angles: usize,
    pub rho: f64,
    pub psi: Vec<ReconstructorKind>,
    pub delta_rel: Vec<f64>,
    pub seed: u64,
    pub lambda: f64,
    pub tv_weight: f64,
    pub solver: SolverParams,
    radius: Option<f64>,
    sigma: Option<f64>,
    metric: Option<DistanceMetric>,
    pub demo_values: [f64; 4],
    pub out: PathBuf,
}

impl Default for Settings {
    fn default() -> Self {
        let spec = ReconstructorSpec::default();
        Self {
            problem: Problem::Ct,
            size: DEFAULT_SIZE,
            num_angles: DEFAULT_ANGLES,
            rho: DEFAULT_RHO,
            psi: vec![spec.kind],
            delta_rel: vec![DEFAULT_DELTA_REL],
            seed: 0,
            lambda: spec.lambda,
            tv_weight: spec.tv_weight,
            solver: SolverParams::default(),
            radius: None,
            sigma: None,
            metric: None,
            demo_values: DEMO_VALUES,
            out: PathBuf::from("irmgl-out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| invalid(format!("bad value {value:?} for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value.split(',').map(|v| parse(key, v)).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(invalid(format!("{key} needs at least one value")));
    }
    Ok(items)
}

impl Settings {
    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        let s = &mut self.solver;
        match key.as_str() {
            "problem" => self.problem = v.parse()?,
            "size" => self.size = parse(&key, v)?,
            "angles" => self.num_angles = parse(&key, v)?,
            "rho" => self.rho = parse(&key, v)?,
            "psi" => self.psi = v.split(',').map(|p| p.trim().parse()).collect::<Result<_>>()?,
            "delta-rel" => self.delta_rel = parse_list(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "tau" => s.tau = parse(&key, v)?,
            "eta0" => s.eta0 = parse(&key, v)?,
            "eta1" => s.eta1 = parse(&key, v)?,
            "nu0" => s.nu0 = parse(&key, v)?,
            "nu1" => s.nu1 = parse(&key, v)?,
            "nu2" => s.nu2 = parse(&key, v)?,
            "wp" => s.wp = Some(parse(&key, v)?),
            "graph-period" => s.graph_update_period = parse(&key, v)?,
            "max-iter" => s.max_iter = parse(&key, v)?,
            "radius" => self.radius = Some(parse(&key, v)?),
            "sigma" => self.sigma = Some(parse(&key, v)?),
            "metric" => self.metric = Some(v.parse()?),
            "lambda" => self.lambda = parse(&key, v)?,
            "tv-weight" => self.tv_weight = parse(&key, v)?,
            "demo-values" => {
                let vals: Vec<f64> = parse_list(&key, v)?;
                self.demo_values = vals
                    .try_into()
                    .map_err(|_| invalid("demo-values needs exactly four numbers"))?;
            }
            "out" => self.out = PathBuf::from(v),
            other => return Err(invalid(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    fn graph(&self) -> GraphConfig {
        let base = if self.problem == Problem::LaplacianDemo { DEMO_GRAPH } else { GraphConfig::default() };
        GraphConfig {
            radius: self.radius.unwrap_or(base.radius),
            sigma: self.sigma.unwrap_or(base.sigma),
            metric: self.metric.unwrap_or(base.metric),
        }
    }

    /// One validated config per `(psi, delta-rel)` pair. With more than one
    /// pair, each run gets its own subdirectory and all rows go to the
    /// shared `out/report.csv`.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>> {
        let mut solver = self.solver;
        solver.graph = self.graph();
        let pairs: Vec<(ReconstructorKind, f64)> = if self.problem == Problem::LaplacianDemo {
            vec![(self.psi[0], self.delta_rel[0])]
        } else {
            self.psi.iter().flat_map(|&p| self.delta_rel.iter().map(move |&d| (p, d))).collect()
        };
        let sweep = pairs.len() > 1;
        pairs
            .into_iter()
            .map(|(kind, delta_rel)| {
                let dir = if sweep { self.out.join(format!("{kind}_{delta_rel}")) } else { self.out.clone() };
                let cfg = ExperimentConfig {
                    problem: self.problem,
                    size: self.size,
                    num_angles: self.num_angles,
                    rho: self.rho,
                    psi: ReconstructorSpec { kind, lambda: self.lambda, tv_weight: self.tv_weight, ..Default::default() },
                    noise: NoiseSpec { delta_rel, seed: self.seed },
                    solver,
                    demo_values: self.demo_values,
                    output_dir: dir,
                    report_path: self.out.join("report.csv"),
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_desk_scale() {
        let runs = Settings::default().experiments().unwrap();
        assert_eq!(runs.len(), 1);
        let c = &runs[0];
        assert_eq!((c.size, c.num_angles), (64, 30));
        assert_eq!(c.solver.graph, GraphConfig::default());
        assert_eq!(c.report_path, c.output_dir.join("report.csv"));
    }

    #[test]
    fn later_values_override_earlier() {
        let mut s = Settings::default();
        s.apply_text("size=32\n# comment\n\ntau = 3\n").unwrap();
        s.set("size", "128").unwrap();
        assert_eq!(s.size, 128);
        assert_eq!(s.solver.tau, 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = Settings::default();
        assert!(s.set("bogus", "1").is_err());
        assert!(s.set("size", "abc").is_err());
        assert!(s.apply_text("size 3").is_err());
        assert!(s.set("demo-values", "1,2,3").is_err());
        s.set("tau", "1").unwrap();
        assert!(matches!(s.experiments(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn demo_uses_example_graph_unless_overridden() {
        let mut s = Settings::default();
        s.set("problem", "laplacian_demo").unwrap();
        assert_eq!(s.experiments().unwrap()[0].solver.graph, DEMO_GRAPH);
        s.set("sigma", "1").unwrap();
        let g = s.experiments().unwrap()[0].solver.graph;
        assert_eq!((g.radius, g.sigma), (1.0, 1.0));
    }

    #[test]
    fn sweeps_expand_into_subdirectories() {
        let mut s = Settings::default();
        s.set("psi", "adjoint,tv").unwrap();
        s.set("delta_rel", "0.1,0.01").unwrap();
        let runs = s.experiments().unwrap();
        assert_eq!(runs.len(), 4);
        assert!(runs.iter().all(|r| r.report_path == s.out.join("report.csv")));
        assert_eq!(runs[1].output_dir, s.out.join("adjoint_0.01"));
    }

    #[test]
    fn key_values_round_trip() {
        let mut s = Settings::default();
        s.apply_text("problem=deblur\nrho=2.5\nseed=7\nwp=3.25\nmetric=manhattan\nsigma=0.1\n").unwrap();
        let cfg = s.experiments().unwrap().remove(0);
        let mut again = Settings::default();
        again.apply_text(&cfg.to_key_values()).unwrap();
        assert_eq!(again.experiments().unwrap().remove(0), cfg);
    }
}
