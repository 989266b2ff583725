//! Forward operators and their adjoints.

mod blur;
mod radon;

pub use blur::{BlurKernel, GaussianBlur};
pub use radon::{RadonGeometry, RadonTransform};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, Shape};
use crate::grid::{Field, ImageGrid};

/// Factor applied to a power-iteration norm estimate before it is used as
/// an upper bound. Power iteration approaches `||A||` from below.
pub const NORM_SAFETY_FACTOR: f64 = 1.01;

/// A bounded linear map from images to `Range`, with its exact adjoint.
pub trait LinearOperator: Sync {
    type Range: Field + Send + Sync;

    fn domain_shape(&self) -> (usize, usize);
    fn range_shape(&self) -> (usize, usize);
    fn apply(&self, u: &ImageGrid) -> Result<Self::Range>;
    fn adjoint(&self, v: &Self::Range) -> Result<ImageGrid>;

    /// Filtered back projection, for operators that have one.
    fn filtered_backprojection(&self, _v: &Self::Range) -> Result<ImageGrid> {
        Err(Error::Unsupported("filtered back projection needs a tomographic operator"))
    }

    fn check_domain(&self, u: &ImageGrid) -> Result<()> {
        check_shape(self.domain_shape(), u.shape())
    }

    fn check_range(&self, v: &Self::Range) -> Result<()> {
        check_shape(self.range_shape(), v.shape())
    }
}

pub(crate) fn check_shape(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            expected: Shape(expected.0, expected.1),
            found: Shape(found.0, found.1),
        });
    }
    Ok(())
}

/// `scale * I` on images of a fixed shape.
#[derive(Debug, Clone, Copy)]
pub struct Identity {
    shape: (usize, usize),
    scale: f64,
}

impl Identity {
    pub fn new(height: usize, width: usize) -> Self {
        Self { shape: (height, width), scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

impl LinearOperator for Identity {
    type Range = ImageGrid;

    fn domain_shape(&self) -> (usize, usize) {
        self.shape
    }

    fn range_shape(&self) -> (usize, usize) {
        self.shape
    }

    fn apply(&self, u: &ImageGrid) -> Result<ImageGrid> {
        self.check_domain(u)?;
        Ok(if self.scale == 1.0 { u.clone() } else { u.scale(self.scale) })
    }

    fn adjoint(&self, v: &ImageGrid) -> Result<ImageGrid> {
        self.apply(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    /// `sqrt` of the last Rayleigh quotient of `A*A`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NormEstimate {
    /// The estimate inflated by [`NORM_SAFETY_FACTOR`].
    pub fn upper(&self) -> f64 {
        self.value * NORM_SAFETY_FACTOR
    }
}

/// Estimates `||A||` by power iteration on `A*A` from a seeded random start.
///
/// Stops when the Rayleigh quotient changes by less than `tol` relative, or
/// after `iterations` steps with `converged == false`.
pub fn estimate_operator_norm<A: LinearOperator + ?Sized>(
    op: &A,
    iterations: usize,
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    if iterations == 0 {
        return Err(Error::config("power iteration needs at least one step"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = op.domain_shape();
    let mut x = ImageGrid::from_fn(h, w, |_, _| rng.gen::<f64>() + 0.5);
    let n0 = x.norm();
    x = x.scale(1.0 / n0);

    let mut rayleigh = 0.0;
    for it in 1..=iterations {
        let y = op.adjoint(&op.apply(&x)?)?;
        let next = x.dot(&y)?;
        let ny = y.norm();
        if ny == 0.0 {
            return Ok(NormEstimate { value: 0.0, iterations: it, converged: true });
        }
        x = y.scale(1.0 / ny);
        if it > 1 && (next - rayleigh).abs() <= tol * next.abs() {
            return Ok(NormEstimate { value: next.max(0.0).sqrt(), iterations: it, converged: true });
        }
        rayleigh = next;
    }
    Ok(NormEstimate { value: rayleigh.max(0.0).sqrt(), iterations, converged: false })
}

/// Dense row-major matrix of `op`, assembled column by column from unit
/// images. Intended for small verification problems.
pub fn assemble_dense<A: LinearOperator + ?Sized>(op: &A) -> Result<Vec<Vec<f64>>> {
    let (h, w) = op.domain_shape();
    let (rh, rw) = op.range_shape();
    let n = h * w;
    let mut rows = vec![vec![0.0; n]; rh * rw];
    let mut e = ImageGrid::filled(h, w, 0.0);
    for p in 0..n {
        e.values_mut()[p] = 1.0;
        let col = op.apply(&e)?;
        for (r, v) in col.values().iter().enumerate() {
            rows[r][p] = *v;
        }
        e.values_mut()[p] = 0.0;
    }
    Ok(rows)
}

/// Dense row-major matrix of `op.adjoint`, assembled from unit range vectors.
pub fn assemble_dense_adjoint<A: LinearOperator + ?Sized>(op: &A) -> Result<Vec<Vec<f64>>> {
    let (h, w) = op.domain_shape();
    let (rh, rw) = op.range_shape();
    let m = rh * rw;
    let mut rows = vec![vec![0.0; m]; h * w];
    let mut e = A::Range::zeros((rh, rw));
    for r in 0..m {
        e.values_mut()[r] = 1.0;
        let col = op.adjoint(&e)?;
        for (p, v) in col.values().iter().enumerate() {
            rows[p][r] = *v;
        }
        e.values_mut()[r] = 0.0;
    }
    Ok(rows)
}
