//! Gaussian blur with zero boundary.

use super::LinearOperator;
use crate::error::{Error, Result};
use crate::grid::{Field, ImageGrid};

/// Truncated, normalized Gaussian point spread function.
///
/// The 2D kernel is the outer product of the 1D taps, supported on the
/// square `[-r, r]^2` with `r = ceil(4 rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    rho: f64,
    radius: usize,
    taps: Vec<f64>,
}

impl BlurKernel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::config(format!("blur width must be nonnegative, got {rho}")));
        }
        let radius = (4.0 * rho).ceil() as usize;
        let raw: Vec<f64> = (0..=2 * radius)
            .map(|k| {
                let x = (k as f64 - radius as f64).abs();
                if radius == 0 {
                    1.0
                } else {
                    (-(x * x) / (2.0 * rho * rho)).exp()
                }
            })
            .collect();
        // Normalize from the center outwards so mirrored taps stay identical.
        let mut sum = raw[radius];
        for k in 1..=radius {
            sum += 2.0 * raw[radius + k];
        }
        let taps = raw.iter().map(|t| t / sum).collect();
        Ok(Self { rho, radius, taps })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// 1D taps for offsets `-radius..=radius`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Full 2D kernel, row-major over `(-r..=r) x (-r..=r)`.
    pub fn taps_2d(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.taps.len() * self.taps.len());
        for a in &self.taps {
            for b in &self.taps {
                out.push(a * b);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GaussianBlur {
    kernel: BlurKernel,
    height: usize,
    width: usize,
}

impl GaussianBlur {
    pub fn new(kernel: BlurKernel, height: usize, width: usize) -> Self {
        Self { kernel, height, width }
    }

    pub fn kernel(&self) -> &BlurKernel {
        &self.kernel
    }

    /// `mirror == false`: `out[i] = sum_k g(i - k) x[k]` (convolution);
    /// `mirror == true`: `out[k] = sum_i g(i - k) x[i]` (correlation).
    fn pass(&self, src: &[f64], along_rows: bool, mirror: bool) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let r = self.kernel.radius as i64;
        let taps = &self.kernel.taps;
        let mut out = vec![0.0; h * w];
        let len = if along_rows { w } else { h } as i64;
        for i in 0..h {
            for j in 0..w {
                let pos = if along_rows { j } else { i } as i64;
                let mut acc = 0.0;
                for off in -r..=r {
                    let q = pos - off;
                    if q < 0 || q >= len {
                        continue;
                    }
                    let tap = if mirror { taps[(r - off) as usize] } else { taps[(r + off) as usize] };
                    let idx = if along_rows { i * w + q as usize } else { q as usize * w + j };
                    acc += tap * src[idx];
                }
                out[i * w + j] = acc;
            }
        }
        out
    }
}

impl LinearOperator for GaussianBlur {
    type Range = ImageGrid;

    fn domain_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn range_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn apply(&self, u: &ImageGrid) -> Result<ImageGrid> {
        self.check_domain(u)?;
        let tmp = self.pass(u.values(), true, false);
        ImageGrid::new(self.height, self.width, self.pass(&tmp, false, false))
    }

    fn adjoint(&self, v: &ImageGrid) -> Result<ImageGrid> {
        self.check_range(v)?;
        let tmp = self.pass(v.values(), false, true);
        ImageGrid::new(self.height, self.width, self.pass(&tmp, true, true))
    }
}
