//! Test images and the relative noise model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, ImageGrid};

/// An ellipse on `[-1, 1]^2` (x to the right, y up) adding `intensity`
/// inside itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
    /// Counter-clockwise rotation in degrees.
    pub angle_deg: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let dx = x - self.center.0;
        let dy = y - self.center.1;
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        (xr / self.semi_axes.0).powi(2) + (yr / self.semi_axes.1).powi(2) <= 1.0
    }
}

const fn ellipse(intensity: f64, cx: f64, cy: f64, a: f64, b: f64, angle_deg: f64) -> Ellipse {
    Ellipse { intensity, center: (cx, cy), semi_axes: (a, b), angle_deg }
}

/// Shepp-Logan ellipse geometry with the high-contrast intensity table,
/// giving values in `[0, 1]`.
pub const SHEPP_LOGAN_ELLIPSES: [Ellipse; 10] = [
    ellipse(1.0, 0.0, 0.0, 0.69, 0.92, 0.0),
    ellipse(-0.8, 0.0, -0.0184, 0.6624, 0.874, 0.0),
    ellipse(-0.2, 0.22, 0.0, 0.11, 0.31, -18.0),
    ellipse(-0.2, -0.22, 0.0, 0.16, 0.41, 18.0),
    ellipse(0.1, 0.0, 0.35, 0.21, 0.25, 0.0),
    ellipse(0.1, 0.0, 0.1, 0.046, 0.046, 0.0),
    ellipse(0.1, 0.0, -0.1, 0.046, 0.046, 0.0),
    ellipse(0.1, -0.08, -0.605, 0.046, 0.023, 0.0),
    ellipse(0.1, 0.0, -0.606, 0.023, 0.023, 0.0),
    ellipse(0.1, 0.06, -0.605, 0.023, 0.046, 0.0),
];

/// Rasterizes `ellipses` on a `size x size` grid. Each pixel value is the
/// mean over a `SUPERSAMPLE x SUPERSAMPLE` lattice of membership tests at
/// sub-pixel centers, clamped to `[0, 1]`.
pub fn rasterize_ellipses(size: usize, ellipses: &[Ellipse]) -> ImageGrid {
    rasterize_ellipses_sampled(size, ellipses, SUPERSAMPLE)
}

/// Sub-pixel samples per axis used by [`shepp_logan`].
pub const SUPERSAMPLE: usize = 4;

/// [`rasterize_ellipses`] with an explicit sampling factor; `1` tests only
/// the pixel center.
pub fn rasterize_ellipses_sampled(size: usize, ellipses: &[Ellipse], samples: usize) -> ImageGrid {
    let fine = (size * samples) as f64;
    let norm = (samples * samples) as f64;
    ImageGrid::from_fn(size, size, |i, j| {
        let mut acc = 0.0;
        for si in 0..samples {
            for sj in 0..samples {
                let x = (2.0 * (j * samples + sj) as f64 + 1.0) / fine - 1.0;
                let y = 1.0 - (2.0 * (i * samples + si) as f64 + 1.0) / fine;
                let v: f64 = ellipses
                    .iter()
                    .filter(|el| el.contains(x, y))
                    .map(|el| el.intensity)
                    .sum();
                acc += v.clamp(0.0, 1.0);
            }
        }
        acc / norm
    })
}

pub fn shepp_logan(size: usize) -> Result<ImageGrid> {
    if size < 16 {
        return Err(Error::config(format!("phantom size must be at least 16, got {size}")));
    }
    Ok(rasterize_ellipses(size, &SHEPP_LOGAN_ELLIPSES))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Relative noise level `||noise|| / ||v||`.
    pub delta_rel: f64,
    pub seed: u64,
}

/// Standard normal draws by Box-Muller on the ChaCha20 stream seeded
/// with `seed`. Uniforms are mapped into `(0, 1]` to keep `ln` finite.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(n);
    out
}

/// `v + delta_rel ||v|| xi / ||xi||` with `xi` standard normal.
///
/// Returns the noisy data and `delta = delta_rel ||v||`. The direction
/// `xi / ||xi||` depends only on the seed and the length of `v`.
pub fn add_noise<F: Field>(v: &F, spec: &NoiseSpec) -> Result<(F, f64)> {
    if !(spec.delta_rel >= 0.0) || !spec.delta_rel.is_finite() {
        return Err(Error::config(format!("noise level must be nonnegative, got {}", spec.delta_rel)));
    }
    if spec.delta_rel == 0.0 {
        return Ok((v.clone(), 0.0));
    }
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::ZeroNorm("cannot scale relative noise to zero data"));
    }
    let xi = F::from_vec(v.shape(), standard_normals(v.len(), spec.seed))?;
    let delta = spec.delta_rel * vn;
    let noisy = v.axpy(delta / xi.norm(), &xi)?;
    Ok((noisy, delta))
}
