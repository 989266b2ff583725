//! Dense 2D storage for images and sinograms.
//!
//! Both types are row-major: pixel `(i, j)` lives at index `i * width + j`.
//! Reductions run left to right over the flat array so that results are
//! bit-reproducible.

use crate::error::{Error, Result, Shape};

/// A dense, row-major 2D array of `f64` with vector-space arithmetic.
///
/// Implemented by [`ImageGrid`] and [`Sinogram`]; the solver and the
/// operators are generic over it.
pub trait Field: Clone + Sized {
    /// `(rows, cols)`.
    fn shape(&self) -> (usize, usize);
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    /// Wraps a flat buffer. Fails if the length does not match the shape.
    fn from_vec(shape: (usize, usize), values: Vec<f64>) -> Result<Self>;

    fn zeros(shape: (usize, usize)) -> Self {
        Self::from_vec(shape, vec![0.0; shape.0 * shape.1]).expect("length matches shape")
    }

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                expected: Shape(self.shape().0, self.shape().1),
                found: Shape(other.shape().0, other.shape().1),
            });
        }
        Ok(())
    }

    fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(dot_slices(self.values(), other.values()))
    }

    fn norm(&self) -> f64 {
        dot_slices(self.values(), self.values()).sqrt()
    }

    /// `y + alpha * x` with `y = self`.
    fn axpy(&self, alpha: f64, x: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy_in_place(alpha, x)?;
        Ok(out)
    }

    fn axpy_in_place(&mut self, alpha: f64, x: &Self) -> Result<()> {
        self.check_same_shape(x)?;
        for (y, &xv) in self.values_mut().iter_mut().zip(x.values()) {
            *y += alpha * xv;
        }
        Ok(())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a - b)
            .collect();
        Self::from_vec(self.shape(), values)
    }

    fn scale(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values_mut().iter_mut().for_each(|v| *v *= alpha);
        out
    }

    fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Sum of `a[i] * b[i]` accumulated in index order.
pub fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// A grayscale image or image-shaped iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ImageGrid {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::config("image dimensions must be positive"));
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: Shape(height, width),
                found: Shape(values.len(), 1),
            });
        }
        Ok(Self { height, width, values })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self { height, width, values: vec![value; height * width] }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                values.push(f(i, j));
            }
        }
        Self { height, width, values }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.width + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.width + j] = v;
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Elementwise clamp to `[lo, hi]`.
    pub fn clamped(&self, lo: f64, hi: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        out
    }
}

impl Field for ImageGrid {
    fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn from_vec(shape: (usize, usize), values: Vec<f64>) -> Result<Self> {
        Self::new(shape.0, shape.1, values)
    }
}

/// Line-integral data, one row per projection angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    num_angles: usize,
    num_detectors: usize,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn new(num_angles: usize, num_detectors: usize, values: Vec<f64>) -> Result<Self> {
        if num_angles == 0 || num_detectors == 0 {
            return Err(Error::config("sinogram dimensions must be positive"));
        }
        if values.len() != num_angles * num_detectors {
            return Err(Error::DimensionMismatch {
                expected: Shape(num_angles, num_detectors),
                found: Shape(values.len(), 1),
            });
        }
        Ok(Self { num_angles, num_detectors, values })
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    /// Detector readings for angle `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.num_detectors..(t + 1) * self.num_detectors]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.values[t * self.num_detectors..(t + 1) * self.num_detectors]
    }
}

impl Field for Sinogram {
    fn shape(&self) -> (usize, usize) {
        (self.num_angles, self.num_detectors)
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn from_vec(shape: (usize, usize), values: Vec<f64>) -> Result<Self> {
        Self::new(shape.0, shape.1, values)
    }
}
