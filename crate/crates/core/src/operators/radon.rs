//! Parallel-beam Radon transform by bilinear ray sampling.
//!
//! Angles are `theta_t = 2 pi t / m` for `t in 0..m`. Detector `k` sits at
//! signed offset `s_k = k - (d - 1) / 2` from the grid center, and its ray
//! is sampled at unit steps `t_j = j - (d - 1) / 2`, `j in 0..d`:
//!
//! ```text
//! x = c + s cos(theta) - t sin(theta)     (column)
//! y = c + s sin(theta) + t cos(theta)     (row)
//! ```
//!
//! with `c = (E - 1) / 2`. Each sample bilinearly interpolates the image;
//! corners outside the grid contribute nothing. The adjoint scatters the
//! same interpolation weights back, so it is the exact matrix transpose.

use rayon::prelude::*;

use super::{check_shape, LinearOperator};
use crate::error::{Error, Result};
use crate::grid::{Field, ImageGrid, Sinogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadonGeometry {
    image_size: usize,
    num_angles: usize,
    num_detectors: usize,
}

impl RadonGeometry {
    /// Square `image_size` grid, `num_angles` angles on `[0, 2 pi)` and
    /// `ceil(sqrt(2) * image_size)` unit-spaced detectors.
    pub fn new(image_size: usize, num_angles: usize) -> Result<Self> {
        if image_size == 0 || num_angles == 0 {
            return Err(Error::config("radon geometry needs a positive size and angle count"));
        }
        let num_detectors = (std::f64::consts::SQRT_2 * image_size as f64).ceil() as usize;
        Ok(Self { image_size, num_angles, num_detectors })
    }

    pub fn image_size(&self) -> usize {
        self.image_size
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn angle(&self, t: usize) -> f64 {
        2.0 * std::f64::consts::PI * t as f64 / self.num_angles as f64
    }
}

#[derive(Debug, Clone)]
pub struct RadonTransform {
    geom: RadonGeometry,
    trig: Vec<(f64, f64)>,
}

impl RadonTransform {
    pub fn new(geom: RadonGeometry) -> Self {
        let trig = (0..geom.num_angles)
            .map(|t| {
                let th = geom.angle(t);
                (th.cos(), th.sin())
            })
            .collect();
        Self { geom, trig }
    }

    pub fn geometry(&self) -> &RadonGeometry {
        &self.geom
    }

    /// Visits `(pixel, weight)` for every interpolation weight of ray
    /// `(angle, detector)`, in a fixed order.
    #[inline]
    fn for_each_weight(&self, angle: usize, detector: usize, mut f: impl FnMut(usize, f64)) {
        let e = self.geom.image_size;
        let d = self.geom.num_detectors;
        let half = (d as f64 - 1.0) / 2.0;
        let c = (e as f64 - 1.0) / 2.0;
        let (cos, sin) = self.trig[angle];
        let s = detector as f64 - half;
        let x0 = c + s * cos;
        let y0 = c + s * sin;
        let ef = e as f64;
        for j in 0..d {
            let t = j as f64 - half;
            let x = x0 - t * sin;
            let y = y0 + t * cos;
            if x <= -1.0 || y <= -1.0 || x >= ef || y >= ef {
                continue;
            }
            let jf = x.floor();
            let i_f = y.floor();
            let fx = x - jf;
            let fy = y - i_f;
            let (j0, i0) = (jf as i64, i_f as i64);
            let corners = [
                (i0, j0, (1.0 - fy) * (1.0 - fx)),
                (i0, j0 + 1, (1.0 - fy) * fx),
                (i0 + 1, j0, fy * (1.0 - fx)),
                (i0 + 1, j0 + 1, fy * fx),
            ];
            for (ci, cj, w) in corners {
                if ci >= 0 && cj >= 0 && (ci as usize) < e && (cj as usize) < e && w != 0.0 {
                    f(ci as usize * e + cj as usize, w);
                }
            }
        }
    }
}

impl LinearOperator for RadonTransform {
    type Range = Sinogram;

    fn domain_shape(&self) -> (usize, usize) {
        (self.geom.image_size, self.geom.image_size)
    }

    fn range_shape(&self) -> (usize, usize) {
        (self.geom.num_angles, self.geom.num_detectors)
    }

    fn apply(&self, u: &ImageGrid) -> Result<Sinogram> {
        self.check_domain(u)?;
        let d = self.geom.num_detectors;
        let x = u.values();
        let mut out = vec![0.0; self.geom.num_angles * d];
        out.par_chunks_mut(d).enumerate().for_each(|(t, row)| {
            for (k, o) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                self.for_each_weight(t, k, |p, w| acc += w * x[p]);
                *o = acc;
            }
        });
        Sinogram::new(self.geom.num_angles, d, out)
    }

    fn adjoint(&self, v: &Sinogram) -> Result<ImageGrid> {
        check_shape(self.range_shape(), v.shape())?;
        let e = self.geom.image_size;
        let d = self.geom.num_detectors;
        // One partial image per angle, summed in angle order for determinism.
        let partials: Vec<Vec<f64>> = (0..self.geom.num_angles)
            .into_par_iter()
            .map(|t| {
                let mut img = vec![0.0; e * e];
                let row = v.row(t);
                for k in 0..d {
                    let s = row[k];
                    if s != 0.0 {
                        self.for_each_weight(t, k, |p, w| img[p] += w * s);
                    }
                }
                img
            })
            .collect();
        let mut out = vec![0.0; e * e];
        for part in &partials {
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
        ImageGrid::new(e, e, out)
    }

    fn filtered_backprojection(&self, v: &Sinogram) -> Result<ImageGrid> {
        crate::recon::psi_fbp(self, v)
    }
}
