//! Total-variation denoising by Chambolle's dual projection iteration.
//!
//! Computes `argmin_u 1/2 ||u - b||^2 + lambda TV(u)` with isotropic TV
//! built on forward differences (zero across the last row and column).

use crate::error::Result;
use crate::grid::{Field, ImageGrid};
use crate::operators::LinearOperator;

use super::ReconstructorSpec;

/// Dual step size; `1/4` is the stability limit in 2D.
const DUAL_STEP: f64 = 0.25;

fn gradient(u: &[f64], h: usize, w: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            if j + 1 < w {
                gx[k] = u[k + 1] - u[k];
            }
            if i + 1 < h {
                gy[k] = u[k + w] - u[k];
            }
        }
    }
    (gx, gy)
}

/// Negative adjoint of [`gradient`].
fn divergence(px: &[f64], py: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            let dx = if w == 1 {
                0.0
            } else if j == 0 {
                px[k]
            } else if j + 1 == w {
                -px[k - 1]
            } else {
                px[k] - px[k - 1]
            };
            let dy = if h == 1 {
                0.0
            } else if i == 0 {
                py[k]
            } else if i + 1 == h {
                -py[k - w]
            } else {
                py[k] - py[k - w]
            };
            out[k] = dx + dy;
        }
    }
    out
}

/// Isotropic total variation `sum sqrt(gx^2 + gy^2)`.
pub fn total_variation(u: &ImageGrid) -> f64 {
    let (gx, gy) = gradient(u.values(), u.height(), u.width());
    gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b).sqrt()).sum()
}

/// Proximal map of `weight * TV` at `b`.
///
/// Stops when the largest dual update falls below `tol`, or after
/// `max_iter` sweeps.
pub fn chambolle_tv(b: &ImageGrid, weight: f64, max_iter: usize, tol: f64) -> ImageGrid {
    let (h, w) = b.shape();
    let n = h * w;
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut div = vec![0.0; n];
    let bv = b.values();
    for _ in 0..max_iter {
        let arg: Vec<f64> = div.iter().zip(bv).map(|(d, x)| d - x / weight).collect();
        let (gx, gy) = gradient(&arg, h, w);
        let mut change = 0.0f64;
        for k in 0..n {
            let denom = 1.0 + DUAL_STEP * (gx[k] * gx[k] + gy[k] * gy[k]).sqrt();
            let nx = (px[k] + DUAL_STEP * gx[k]) / denom;
            let ny = (py[k] + DUAL_STEP * gy[k]) / denom;
            change = change.max((nx - px[k]).abs()).max((ny - py[k]).abs());
            px[k] = nx;
            py[k] = ny;
        }
        div = divergence(&px, &py, h, w);
        if change < tol {
            break;
        }
    }
    let out = bv.iter().zip(&div).map(|(x, d)| x - weight * d).collect();
    ImageGrid::new(h, w, out).expect("shape preserved")
}

/// TV denoising of the filtered back projection of `v`.
pub fn psi_tv<A: LinearOperator + ?Sized>(
    op: &A,
    v: &A::Range,
    spec: &ReconstructorSpec,
) -> Result<ImageGrid> {
    let b = op.filtered_backprojection(v)?;
    Ok(chambolle_tv(&b, spec.tv_weight, spec.tv_iterations, spec.tv_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn divergence_is_negative_adjoint_of_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (h, w) in [(5, 7), (1, 6), (6, 1), (2, 2)] {
            let u: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let px: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let py: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (gx, gy) = gradient(&u, h, w);
            let lhs: f64 = (0..h * w).map(|k| gx[k] * px[k] + gy[k] * py[k]).sum();
            let div = divergence(&px, &py, h, w);
            let rhs: f64 = -(0..h * w).map(|k| u[k] * div[k]).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-12, "{h}x{w}");
        }
    }

    #[test]
    fn constant_is_fixed_point() {
        let b = ImageGrid::filled(12, 9, 0.37);
        let out = chambolle_tv(&b, 0.1, 200, 1e-5);
        assert!(out.sub(&b).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn objective_beats_the_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let b = ImageGrid::from_fn(16, 16, |i, j| {
                (if (i / 4 + j / 4) % 2 == 0 { 0.8 } else { 0.2 }) + 0.1 * rng.gen_range(-1.0..1.0)
            });
            let lam = 0.1;
            let u = chambolle_tv(&b, lam, 200, 1e-5);
            let lhs = 0.5 * u.sub(&b).unwrap().norm().powi(2) + lam * total_variation(&u);
            assert!(lhs <= lam * total_variation(&b));
        }
    }

    #[test]
    fn nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let b1 = ImageGrid::from_fn(12, 12, |_, _| rng.gen::<f64>());
            let b2 = ImageGrid::from_fn(12, 12, |_, _| rng.gen::<f64>());
            let d_out = chambolle_tv(&b1, 0.1, 200, 1e-5).sub(&chambolle_tv(&b2, 0.1, 200, 1e-5)).unwrap().norm();
            assert!(d_out <= b1.sub(&b2).unwrap().norm() * (1.0 + 1e-8));
        }
    }
}
