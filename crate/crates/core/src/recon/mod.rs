//! Initial reconstructors mapping data to an image.
//!
//! The iteration starts from `u_0 = psi(v)`. Four choices are provided:
//! the adjoint `A* v`, filtered back projection, Tikhonov regularization
//! and a TV denoiser applied to the filtered back projection.

mod fbp;
mod tikhonov;
mod tv;

pub use fbp::{psi_fbp, ramp_hann_response};
pub use tikhonov::{conjugate_gradient, psi_tikhonov, CgOutcome};
pub use tv::{chambolle_tv, psi_tv, total_variation};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::operators::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReconstructorKind {
    #[default]
    Adjoint,
    Fbp,
    Tikhonov,
    Tv,
}

impl ReconstructorKind {
    pub const ALL: [ReconstructorKind; 4] = [
        ReconstructorKind::Adjoint,
        ReconstructorKind::Fbp,
        ReconstructorKind::Tikhonov,
        ReconstructorKind::Tv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReconstructorKind::Adjoint => "adjoint",
            ReconstructorKind::Fbp => "fbp",
            ReconstructorKind::Tikhonov => "tikhonov",
            ReconstructorKind::Tv => "tv",
        }
    }
}

impl std::fmt::Display for ReconstructorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ReconstructorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjoint" => Ok(ReconstructorKind::Adjoint),
            "fbp" => Ok(ReconstructorKind::Fbp),
            "tikhonov" => Ok(ReconstructorKind::Tikhonov),
            "tv" => Ok(ReconstructorKind::Tv),
            other => Err(Error::config(format!("unknown reconstructor {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructorSpec {
    pub kind: ReconstructorKind,
    /// Tikhonov weight.
    pub lambda: f64,
    /// TV weight.
    pub tv_weight: f64,
    pub tv_iterations: usize,
    pub tv_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for ReconstructorSpec {
    fn default() -> Self {
        Self {
            kind: ReconstructorKind::Adjoint,
            lambda: 50.0,
            tv_weight: 0.1,
            tv_iterations: 200,
            tv_tol: 1e-5,
            cg_tol: 1e-8,
            cg_max_iter: 500,
        }
    }
}

impl ReconstructorSpec {
    pub fn new(kind: ReconstructorKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ReconstructorKind::Tikhonov if !(self.lambda > 0.0) => {
                Err(Error::config("tikhonov weight must be positive"))
            }
            ReconstructorKind::Tv if !(self.tv_weight > 0.0) => {
                Err(Error::config("tv weight must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// `A* v`.
pub fn psi_adjoint<A: LinearOperator + ?Sized>(op: &A, v: &A::Range) -> Result<ImageGrid> {
    op.adjoint(v)
}

/// Dispatches on `spec.kind`.
pub fn reconstruct<A: LinearOperator + ?Sized>(
    op: &A,
    v: &A::Range,
    spec: &ReconstructorSpec,
) -> Result<ImageGrid> {
    spec.validate()?;
    match spec.kind {
        ReconstructorKind::Adjoint => psi_adjoint(op, v),
        ReconstructorKind::Fbp => op.filtered_backprojection(v),
        ReconstructorKind::Tikhonov => {
            psi_tikhonov(op, v, spec.lambda, spec.cg_tol, spec.cg_max_iter)
        }
        ReconstructorKind::Tv => psi_tv(op, v, spec),
    }
}
