//! The graph-Laplacian assisted Landweber iteration.
//!
//! ```text
//! u_0     = psi(v)
//! u_{k+1} = u_k - alpha_k A*(A u_k - v) - beta_k L(u_k) u_k
//! ```
//!
//! `L(u_k)` is the Laplacian of the graph induced by the current iterate
//! (refreshed every `graph_update_period` steps). The step sizes adapt to
//! the residual:
//!
//! ```text
//! alpha_k = min(eta0 ||r||^2 / ||A* r||^2, eta1)
//! beta_k  = min(nu0 ||r||^2 / ||L u||, nu1 / ||L u||, nu2)    (0 if L u = 0)
//! ```
//!
//! The discrepancy `||r_k|| <= tau * delta` is tested before each update,
//! so the returned stopping index may be zero.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, GraphConfig, SparseLaplacian};
use crate::grid::{Field, ImageGrid};
use crate::operators::{estimate_operator_norm, LinearOperator, NormEstimate};
use crate::recon::{reconstruct, ReconstructorSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub eta0: f64,
    pub eta1: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Discrepancy factor, must exceed 1.
    pub tau: f64,
    /// Radius of the ball around `u_0` assumed to contain the solution.
    /// Only enters the constant `C`. Defaults to `||u_0||`.
    pub wp: Option<f64>,
    pub max_iter: usize,
    /// Rebuild the graph when `k % graph_update_period == 0`.
    pub graph_update_period: usize,
    pub graph: GraphConfig,
    pub norm_iterations: usize,
    pub norm_tol: f64,
    pub norm_seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eta0: 0.2,
            eta1: 0.5,
            nu0: 0.05,
            nu1: 0.05,
            nu2: 1.0,
            tau: 2.0,
            wp: None,
            max_iter: 2000,
            graph_update_period: 1,
            graph: GraphConfig::default(),
            norm_iterations: 500,
            norm_tol: 1e-9,
            norm_seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("eta0", self.eta0), ("eta1", self.eta1), ("nu2", self.nu2)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("nu0", self.nu0), ("nu1", self.nu1)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(self.tau > 1.0 && self.tau.is_finite()) {
            return Err(Error::config(format!("tau must exceed 1, got {}", self.tau)));
        }
        if let Some(wp) = self.wp {
            if !(wp > 0.0) {
                return Err(Error::config(format!("ball radius must be positive, got {wp}")));
            }
        }
        if self.graph_update_period == 0 {
            return Err(Error::config("graph update period must be at least 1"));
        }
        self.graph.validate()
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    /// `||A u_k - v||`.
    pub residual: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `||L(u_k) u_k||`.
    pub laplacian_term_norm: f64,
    /// `||u_k - truth||`, when a ground truth was supplied.
    pub error_to_truth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    DiscrepancyMet,
    MaxIterReached,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::DiscrepancyMet => "discrepancy_met",
            StopReason::MaxIterReached => "max_iter_reached",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub final_iterate: ImageGrid,
    pub stop_index: usize,
    pub stop_reason: StopReason,
    /// Records for `k = 0..=stop_index`.
    pub trace: Vec<IterateRecord>,
    pub constant_c: f64,
    /// Guaranteed lower bound on every `alpha_k`.
    pub eta_floor: f64,
    pub operator_norm: NormEstimate,
    /// Ball radius used for `constant_c`.
    pub wp: f64,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.residual)
    }
}

fn alpha_from_norms(residual_norm: f64, gradient_norm: f64, params: &SolverParams) -> f64 {
    if gradient_norm > 0.0 {
        let ratio = params.eta0 * residual_norm * residual_norm / (gradient_norm * gradient_norm);
        ratio.min(params.eta1)
    } else {
        params.eta1
    }
}

/// Step size for the data term at `u`.
pub fn step_alpha<A: LinearOperator + ?Sized>(
    op: &A,
    u: &ImageGrid,
    v: &A::Range,
    params: &SolverParams,
) -> Result<f64> {
    let r = op.apply(u)?.sub(v)?;
    let g = op.adjoint(&r)?;
    Ok(alpha_from_norms(r.norm(), g.norm(), params))
}

/// Weight of the Laplacian term given `laplacian_term = L(u) u`.
pub fn step_beta(laplacian_term: &ImageGrid, residual_norm: f64, params: &SolverParams) -> f64 {
    let q = laplacian_term.norm();
    if q == 0.0 {
        return 0.0;
    }
    (params.nu0 * residual_norm * residual_norm / q)
        .min(params.nu1 / q)
        .min(params.nu2)
}

/// `C = eta - eta1 / tau - nu0 (wp + nu1) - eta0 eta1`.
///
/// Monotone error decay is guaranteed when `C > 0`.
pub fn constant_c(params: &SolverParams, eta_floor: f64, wp: f64) -> f64 {
    eta_floor - params.eta1 / params.tau - params.nu0 * (wp + params.nu1) - params.eta0 * params.eta1
}

/// `min(eta0 / ||A||^2, eta1)` with the safety-inflated norm estimate.
pub fn eta_floor(params: &SolverParams, norm: &NormEstimate) -> f64 {
    let upper = norm.upper();
    if upper == 0.0 {
        params.eta1
    } else {
        (params.eta0 / (upper * upper)).min(params.eta1)
    }
}

/// Runs the iteration from `psi(v)` until `||A u_k - v|| <= tau * delta`
/// or `max_iter` updates have been made.
///
/// With `delta == 0` the iteration runs to `max_iter` unless the residual
/// vanishes exactly.
pub fn solve<A: LinearOperator + ?Sized>(
    op: &A,
    v: &A::Range,
    delta: f64,
    psi: &ReconstructorSpec,
    params: &SolverParams,
    truth: Option<&ImageGrid>,
) -> Result<SolveResult> {
    params.validate()?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::config(format!("noise level must be nonnegative, got {delta}")));
    }
    op.check_range(v)?;
    if let Some(t) = truth {
        op.check_domain(t)?;
    }

    let mut u = reconstruct(op, v, psi)?;
    if !u.is_finite() {
        return Err(Error::Divergence { iteration: 0, trace: Box::default() });
    }

    let norm = estimate_operator_norm(op, params.norm_iterations, params.norm_tol, params.norm_seed)?;
    if !norm.converged {
        warn!("operator norm estimate did not converge after {} steps", norm.iterations);
    }
    let eta = eta_floor(params, &norm);
    let wp = params.wp.unwrap_or_else(|| {
        let r = u.norm();
        warn!("ball radius not given, using ||u_0|| = {r}");
        r
    });
    let c = constant_c(params, eta, wp);
    if c <= 0.0 {
        warn!("constant C = {c} is not positive; monotone error decay is not guaranteed");
    }
    info!("||A|| ~ {}, eta floor {eta}, C = {c}", norm.value);

    let threshold = params.tau * delta;
    let mut lap: Option<SparseLaplacian> = None;
    let mut trace = Vec::new();

    for k in 0..=params.max_iter {
        let r = op.apply(&u)?.sub(v)?;
        let rn = r.norm();
        let g = op.adjoint(&r)?;
        let alpha = alpha_from_norms(rn, g.norm(), params);

        match lap.as_mut() {
            None => lap = Some(build_laplacian(&u, &params.graph)?),
            Some(l) if k % params.graph_update_period == 0 => l.reweight(&u)?,
            Some(_) => {}
        }
        let lterm = lap.as_ref().expect("built above").apply(&u)?;
        let beta = step_beta(&lterm, rn, params);

        trace.push(IterateRecord {
            k,
            residual: rn,
            alpha,
            beta,
            laplacian_term_norm: lterm.norm(),
            error_to_truth: truth.map(|t| u.sub(t).map(|d| d.norm())).transpose()?,
        });

        let stop = if rn <= threshold {
            Some(StopReason::DiscrepancyMet)
        } else if k == params.max_iter {
            Some(StopReason::MaxIterReached)
        } else {
            None
        };
        if let Some(stop_reason) = stop {
            return Ok(SolveResult {
                final_iterate: u,
                stop_index: k,
                stop_reason,
                trace,
                constant_c: c,
                eta_floor: eta,
                operator_norm: norm,
                wp,
            });
        }

        u.axpy_in_place(-alpha, &g)?;
        u.axpy_in_place(-beta, &lterm)?;
        if !u.is_finite() {
            return Err(Error::Divergence { iteration: k + 1, trace: Box::new(trace) });
        }
    }
    unreachable!("loop returns at k == max_iter")
}

pub const TRACE_HEADER: &str = "k,residual,alpha,beta,laplacian_term_norm,error_to_truth";

/// Trace as CSV with [`TRACE_HEADER`]; the last column is empty when no
/// ground truth was given.
pub fn trace_csv(trace: &[IterateRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        write!(out, "{},{},{},{},{},", r.k, r.residual, r.alpha, r.beta, r.laplacian_term_norm).unwrap();
        if let Some(e) = r.error_to_truth {
            write!(out, "{e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_trace_csv(trace: &[IterateRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, trace_csv(trace))?;
    Ok(())
}
