//! Tikhonov reconstruction via conjugate gradients on the normal equations.

use crate::error::{Error, Result};
use crate::grid::{Field, ImageGrid};
use crate::operators::LinearOperator;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: ImageGrid,
    pub iterations: usize,
    /// `||b - M x|| / ||b||` at exit.
    pub relative_residual: f64,
}

/// Solves `M x = b` for symmetric positive definite `M` from `x = 0`.
///
/// Fails with [`Error::CgNotConverged`] if the relative residual is still
/// above `tol` after `max_iter` steps.
pub fn conjugate_gradient(
    apply_m: impl Fn(&ImageGrid) -> Result<ImageGrid>,
    b: &ImageGrid,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let b_norm = b.norm();
    let mut x = ImageGrid::filled(b.height(), b.width(), 0.0);
    if b_norm == 0.0 {
        return Ok(CgOutcome { solution: x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r)?;
    for it in 0..max_iter {
        let rel = rr.sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgOutcome { solution: x, iterations: it, relative_residual: rel });
        }
        let mp = apply_m(&p)?;
        let alpha = rr / p.dot(&mp)?;
        x.axpy_in_place(alpha, &p)?;
        r.axpy_in_place(-alpha, &mp)?;
        let rr_next = r.dot(&r)?;
        p = r.axpy(rr_next / rr, &p)?;
        rr = rr_next;
    }
    let rel = rr.sqrt() / b_norm;
    if rel <= tol {
        return Ok(CgOutcome { solution: x, iterations: max_iter, relative_residual: rel });
    }
    Err(Error::CgNotConverged { iterations: max_iter, residual: rel })
}

/// `(A*A + lambda I)^{-1} A* v`.
pub fn psi_tikhonov<A: LinearOperator + ?Sized>(
    op: &A,
    v: &A::Range,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ImageGrid> {
    if !(lambda > 0.0) {
        return Err(Error::config("tikhonov weight must be positive"));
    }
    op.check_range(v)?;
    let rhs = op.adjoint(v)?;
    let normal = |x: &ImageGrid| -> Result<ImageGrid> {
        let mut out = op.adjoint(&op.apply(x)?)?;
        out.axpy_in_place(lambda, x)?;
        Ok(out)
    };
    Ok(conjugate_gradient(normal, &rhs, tol, max_iter)?.solution)
}
