//! Reconstruction quality: relative error, PSNR and SSIM.

use crate::error::{Error, Result};
use crate::grid::{Field, ImageGrid};

/// Side length of the uniform SSIM window.
pub const SSIM_WINDOW: usize = 7;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub re: f64,
    /// `20 log10(1 / ||u - truth||)`.
    pub psnr_norm: f64,
    /// `20 log10(sqrt(n) / ||u - truth||)`, i.e. RMSE based with peak 1.
    pub psnr_standard: f64,
    pub ssim: f64,
}

/// `||u - truth|| / ||truth||`.
pub fn relative_error(u: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    let tn = truth.norm();
    if tn == 0.0 {
        return Err(Error::ZeroNorm("relative error against a zero image"));
    }
    Ok(u.sub(truth)?.norm() / tn)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    pub norm: f64,
    pub standard: f64,
    /// Set when `u == truth`; both values are then `+inf`.
    pub exact: bool,
}

pub fn psnr(u: &ImageGrid, truth: &ImageGrid) -> Result<Psnr> {
    let diff = u.sub(truth)?.norm();
    if diff == 0.0 {
        return Ok(Psnr { norm: f64::INFINITY, standard: f64::INFINITY, exact: true });
    }
    let n = u.len() as f64;
    Ok(Psnr {
        norm: 20.0 * (1.0 / diff).log10(),
        standard: 20.0 * (n.sqrt() / diff).log10(),
        exact: false,
    })
}

/// Mean SSIM over all 7x7 windows lying fully inside the image, after
/// clamping both inputs to `[0, 1]`.
pub fn ssim(u: &ImageGrid, truth: &ImageGrid) -> Result<f64> {
    ssim_with_window(u, truth, SSIM_WINDOW)
}

/// Local statistics use the unbiased (sample) variance, dynamic range 1.
pub fn ssim_with_window(u: &ImageGrid, truth: &ImageGrid, win: usize) -> Result<f64> {
    u.check_same_shape(truth)?;
    let (h, w) = u.shape();
    if win < 2 || h < win || w < win {
        return Err(Error::config(format!("SSIM needs at least a {win}x{win} image, got {h}x{w}")));
    }
    let x = u.clamped(0.0, 1.0);
    let y = truth.clamped(0.0, 1.0);
    let np = (win * win) as f64;
    let cov_norm = np / (np - 1.0);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;

    let mut total = 0.0;
    let mut count = 0usize;
    for i0 in 0..=h - win {
        for j0 in 0..=w - win {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in i0..i0 + win {
                for j in j0..j0 + win {
                    let (a, b) = (x.get(i, j), y.get(i, j));
                    sx += a;
                    sy += b;
                    sxx += a * a;
                    syy += b * b;
                    sxy += a * b;
                }
            }
            let (ux, uy) = (sx / np, sy / np);
            let vx = cov_norm * (sxx / np - ux * ux);
            let vy = cov_norm * (syy / np - uy * uy);
            let vxy = cov_norm * (sxy / np - ux * uy);
            let num = (2.0 * ux * uy + c1) * (2.0 * vxy + c2);
            let den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

pub fn quality_report(u: &ImageGrid, truth: &ImageGrid) -> Result<QualityReport> {
    let p = psnr(u, truth)?;
    Ok(QualityReport {
        re: relative_error(u, truth)?,
        psnr_norm: p.norm,
        psnr_standard: p.standard,
        ssim: ssim(u, truth)?,
    })
}
