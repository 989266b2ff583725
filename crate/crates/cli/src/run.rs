//! Experiment runners and their output files.

use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::Path;

use log::info;

use irmgl_core::io::{write_csv, write_pgm};
use irmgl_core::solver::write_trace_csv;
use irmgl_core::{
    add_noise, build_laplacian, quality_report, shepp_logan, solve, BlurKernel, Error, GaussianBlur,
    ImageGrid, LinearOperator, QualityReport, RadonGeometry, RadonTransform, Result, SolveResult,
    SparseLaplacian,
};

use crate::config::{invalid, ExperimentConfig, Problem};

pub const REPORT_HEADER: &str =
    "psi,delta_rel,iterations,residual,re,psnr_standard,psnr_paper,ssim,constant_C,eta_floor,stop_reason";

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::Parse(_) => EXIT_CONFIG,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Clone)]
pub enum RunOutcome {
    Solved { result: Box<SolveResult>, quality: QualityReport },
    Demo { laplacian: SparseLaplacian },
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    match config.problem {
        Problem::Ct => run_ct(config),
        Problem::Deblur => run_deblur(config),
        Problem::LaplacianDemo => run_laplacian_demo(config),
    }
}

pub fn run_ct(config: &ExperimentConfig) -> Result<RunOutcome> {
    expect_problem(config, Problem::Ct)?;
    let geom = RadonGeometry::new(config.size, config.num_angles)?;
    let op = RadonTransform::new(geom);
    let extra = format!("# detectors={}\n", geom.num_detectors());
    run_inverse_problem(config, &op, &extra)
}

pub fn run_deblur(config: &ExperimentConfig) -> Result<RunOutcome> {
    expect_problem(config, Problem::Deblur)?;
    let kernel = BlurKernel::new(config.rho)?;
    let extra = format!("# kernel_radius={}\n", kernel.radius());
    let op = GaussianBlur::new(kernel, config.size, config.size);
    run_inverse_problem(config, &op, &extra)
}

/// Builds the graph of the 2x2 demo image and writes `weights.csv`
/// (`i,j,w` for every stored edge) and `degrees.csv`.
pub fn run_laplacian_demo(config: &ExperimentConfig) -> Result<RunOutcome> {
    expect_problem(config, Problem::LaplacianDemo)?;
    config.solver.graph.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let image = ImageGrid::new(2, 2, config.demo_values.to_vec())?;
    let laplacian = build_laplacian(&image, &config.solver.graph)?;
    let dir = &config.output_dir;
    laplacian.write_debug_dump(dir.join("weights.csv"), dir.join("degrees.csv"))?;
    fs::write(dir.join("meta.txt"), config.to_key_values())?;
    Ok(RunOutcome::Demo { laplacian })
}

fn expect_problem(config: &ExperimentConfig, problem: Problem) -> Result<()> {
    if config.problem != problem {
        return Err(invalid(format!(
            "runner for {} called with problem {}",
            problem.as_str(),
            config.problem.as_str()
        )));
    }
    config.validate()
}

fn run_inverse_problem<A: LinearOperator>(
    config: &ExperimentConfig,
    op: &A,
    extra_meta: &str,
) -> Result<RunOutcome> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let meta_path = dir.join("meta.txt");
    fs::write(&meta_path, format!("{}{extra_meta}", config.to_key_values()))?;

    let truth = shepp_logan(config.size)?;
    let exact = op.apply(&truth)?;
    let (data, delta) = add_noise(&exact, &config.noise)?;
    info!(
        "{} E={} psi={} delta_rel={} delta={delta}",
        config.problem.as_str(),
        config.size,
        config.psi.kind,
        config.noise.delta_rel
    );

    let result = match solve(op, &data, delta, &config.psi, &config.solver, Some(&truth)) {
        Ok(r) => r,
        Err(err) => {
            if let Error::Divergence { iteration, trace } = &err {
                write_trace_csv(trace, dir.join("trace.csv"))?;
                append(&meta_path, &format!("# diverged_at={iteration}\n"))?;
            }
            return Err(err);
        }
    };

    write_trace_csv(&result.trace, dir.join("trace.csv"))?;
    write_pgm(&result.final_iterate, dir.join("recon.pgm"))?;
    write_csv(&result.final_iterate, dir.join("recon.csv"))?;
    let quality = quality_report(&result.final_iterate, &truth)?;
    append_report_row(&config.report_path, &report_row(config, &result, &quality))?;
    append(
        &meta_path,
        &format!(
            "# delta={delta}\n# operator_norm={}\n# operator_norm_iterations={}\n# wp={}\n# stop_index={}\n# stop_reason={}\n",
            result.operator_norm.value,
            result.operator_norm.iterations,
            result.wp,
            result.stop_index,
            result.stop_reason
        ),
    )?;
    Ok(RunOutcome::Solved { result: Box::new(result), quality })
}

pub fn report_row(config: &ExperimentConfig, result: &SolveResult, q: &QualityReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        config.psi.kind,
        config.noise.delta_rel,
        result.stop_index,
        result.final_residual(),
        q.re,
        q.psnr_standard,
        q.psnr_norm,
        q.ssim,
        result.constant_c,
        result.eta_floor,
        result.stop_reason
    )
}

/// Appends `row`, writing the header first when the file is new or empty.
pub fn append_report_row(path: &Path, row: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{REPORT_HEADER}")?;
    }
    writeln!(f, "{row}")?;
    Ok(())
}

fn append(path: &Path, text: &str) -> Result<()> {
    let mut f = OpenOptions::new().append(true).open(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
