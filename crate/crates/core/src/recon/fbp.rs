//! Filtered back projection with a Hann-windowed ramp filter.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::grid::{Field, ImageGrid, Sinogram};
use crate::operators::{LinearOperator, RadonTransform};

/// Frequency response of the filter on a length-`len` transform.
///
/// The ramp is the transform of the band-limited spatial ramp kernel
/// (`1/4` at the origin, `-1/(pi n)^2` at odd `n`), which approximates
/// `|f|` while keeping the correct zero-frequency value. It is multiplied
/// by the Hann window `(1 + cos(pi f / f_max)) / 2` with `f_max = 1/2`.
pub fn ramp_hann_response(len: usize) -> Vec<f64> {
    let mut kernel = vec![Complex::new(0.0, 0.0); len];
    kernel[0].re = 0.25;
    for n in (1..len / 2).step_by(2) {
        let v = -1.0 / (std::f64::consts::PI * n as f64).powi(2);
        kernel[n].re = v;
        kernel[len - n].re = v;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut kernel);
    kernel
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let f = k.min(len - k) as f64 / len as f64;
            let hann = 0.5 * (1.0 + (std::f64::consts::PI * f / 0.5).cos());
            c.re * hann
        })
        .collect()
}

/// Filters each detector row, back projects with the exact adjoint and
/// scales by `pi / m` for `m` angles spread over the full circle.
pub fn psi_fbp(op: &RadonTransform, v: &Sinogram) -> Result<ImageGrid> {
    op.check_range(v)?;
    let geom = op.geometry();
    let d = geom.num_detectors();
    let len = (2 * d).next_power_of_two();
    let response = ramp_hann_response(len);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut filtered = v.clone();
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for t in 0..geom.num_angles() {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (b, &x) in buf.iter_mut().zip(v.row(t)) {
            b.re = x;
        }
        fwd.process(&mut buf);
        for (b, h) in buf.iter_mut().zip(&response) {
            *b *= *h;
        }
        inv.process(&mut buf);
        for (o, b) in filtered.row_mut(t).iter_mut().zip(&buf) {
            *o = b.re / len as f64;
        }
    }
    let back = op.adjoint(&filtered)?;
    Ok(back.scale(std::f64::consts::PI / geom.num_angles() as f64))
}
