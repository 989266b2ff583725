//! Pixel graphs and their Laplacians.
//!
//! Every pixel is a node. Two distinct pixels `a`, `b` are joined when their
//! grid distance is at most `R`, with weight
//!
//! ```text
//! w(a, b) = exp(-|u(a) - u(b)|^2 / sigma)
//! ```
//!
//! The Laplacian acts as `(L x)(a) = sum_b w(a, b) (x(a) - x(b))`, i.e.
//! `L = D - W` with `D` the diagonal of row sums of `W`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result, Shape};
use crate::grid::{Field, ImageGrid};

/// Grid distance used by the geometric indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    /// `|di| + |dj|`
    Manhattan,
    /// `max(|di|, |dj|)`
    #[default]
    Chebyshev,
}

impl DistanceMetric {
    pub fn distance(self, di: i64, dj: i64) -> i64 {
        match self {
            DistanceMetric::Manhattan => di.abs() + dj.abs(),
            DistanceMetric::Chebyshev => di.abs().max(dj.abs()),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Manhattan => "manhattan",
            DistanceMetric::Chebyshev => "chebyshev",
        }
    }
}

impl std::str::FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "manhattan" => Ok(DistanceMetric::Manhattan),
            "chebyshev" => Ok(DistanceMetric::Chebyshev),
            other => Err(Error::config(format!("unknown distance metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    /// Neighborhood radius in pixels.
    pub radius: f64,
    /// Bandwidth of the intensity kernel.
    pub sigma: f64,
    pub metric: DistanceMetric,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { radius: 6.0, sigma: 0.05, metric: DistanceMetric::Chebyshev }
    }
}

impl GraphConfig {
    pub fn new(radius: f64, sigma: f64, metric: DistanceMetric) -> Result<Self> {
        let cfg = Self { radius, sigma, metric };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::config(format!("graph radius must be positive, got {}", self.radius)));
        }
        if !(self.sigma > 0.0) || self.sigma.is_nan() {
            return Err(Error::config(format!("graph sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Upper bound on the number of neighbors of any node, independent of
    /// the image size.
    pub fn neighbor_bound(&self) -> usize {
        let r = self.radius.floor() as usize;
        match self.metric {
            DistanceMetric::Chebyshev => (2 * r + 1) * (2 * r + 1) - 1,
            DistanceMetric::Manhattan => 2 * r * (r + 1),
        }
    }

    /// Grid offsets `(di, dj)` with `0 < dist <= R`, in lexicographic order.
    fn offsets(&self) -> Vec<(i64, i64)> {
        let r = self.radius.floor() as i64;
        let mut out = Vec::with_capacity(self.neighbor_bound());
        for di in -r..=r {
            for dj in -r..=r {
                let d = self.metric.distance(di, dj);
                if d > 0 && (d as f64) <= self.radius {
                    out.push((di, dj));
                }
            }
        }
        out
    }

    #[inline]
    pub fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        (-(d * d) / self.sigma).exp()
    }
}

/// `L = D - W` in compressed row form.
///
/// Column indices within a row are strictly increasing and never equal to
/// the row index. The sparsity pattern depends only on the grid shape and
/// the [`GraphConfig`], not on pixel intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLaplacian {
    height: usize,
    width: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    cfg: GraphConfig,
}

/// Builds the Laplacian of the graph induced by `u`.
pub fn build_laplacian(u: &ImageGrid, cfg: &GraphConfig) -> Result<SparseLaplacian> {
    cfg.validate()?;
    let (height, width) = u.shape();
    let offsets = cfg.offsets();

    let per_row: Vec<(Vec<usize>, Vec<u32>)> = (0..height)
        .into_par_iter()
        .map(|i| {
            let mut counts = Vec::with_capacity(width);
            let mut cols = Vec::with_capacity(width * offsets.len());
            for j in 0..width {
                let before = cols.len();
                for &(di, dj) in &offsets {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni >= 0 && nj >= 0 && (ni as usize) < height && (nj as usize) < width {
                        cols.push((ni as usize * width + nj as usize) as u32);
                    }
                }
                counts.push(cols.len() - before);
            }
            (counts, cols)
        })
        .collect();

    let n = height * width;
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let nnz: usize = per_row.iter().map(|(_, c)| c.len()).sum();
    let mut cols = Vec::with_capacity(nnz);
    for (counts, row_cols) in per_row {
        for c in counts {
            row_ptr.push(row_ptr.last().unwrap() + c);
        }
        cols.extend(row_cols);
    }

    let mut lap = SparseLaplacian {
        height,
        width,
        row_ptr,
        cols,
        weights: vec![0.0; nnz],
        degrees: vec![0.0; n],
        cfg: *cfg,
    };
    lap.reweight(u)?;
    Ok(lap)
}

impl SparseLaplacian {
    /// Recomputes all weights and degrees from `u`, keeping the pattern.
    ///
    /// Gives the same result as a fresh [`build_laplacian`] call.
    pub fn reweight(&mut self, u: &ImageGrid) -> Result<()> {
        self.check_shape(u)?;
        let x = u.values();
        let cfg = self.cfg;
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        // Split weights into one mutable slice per node.
        let mut slices: Vec<(&mut [f64], &mut f64)> = Vec::with_capacity(self.degrees.len());
        let mut rest = self.weights.as_mut_slice();
        for (a, deg) in self.degrees.iter_mut().enumerate() {
            let (head, tail) = rest.split_at_mut(row_ptr[a + 1] - row_ptr[a]);
            slices.push((head, deg));
            rest = tail;
        }
        slices.into_par_iter().enumerate().for_each(|(a, (w, deg))| {
            let xa = x[a];
            let mut sum = 0.0;
            for (wk, &b) in w.iter_mut().zip(&cols[row_ptr[a]..row_ptr[a + 1]]) {
                *wk = cfg.kernel(xa, x[b as usize]);
                sum += *wk;
            }
            *deg = sum;
        });
        Ok(())
    }

    fn check_shape(&self, x: &ImageGrid) -> Result<()> {
        if x.shape() != (self.height, self.width) {
            return Err(Error::DimensionMismatch {
                expected: Shape(self.height, self.width),
                found: Shape(x.height(), x.width()),
            });
        }
        Ok(())
    }

    /// `(L x)(a) = sum_b w(a, b) (x(a) - x(b))`.
    pub fn apply(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.check_shape(x)?;
        let xv = x.values();
        let mut out = vec![0.0; xv.len()];
        out.par_iter_mut().enumerate().for_each(|(a, o)| {
            let range = self.row_ptr[a]..self.row_ptr[a + 1];
            let xa = xv[a];
            let mut acc = 0.0;
            for (&w, &b) in self.weights[range.clone()].iter().zip(&self.cols[range]) {
                acc += w * (xa - xv[b as usize]);
            }
            *o = acc;
        });
        ImageGrid::new(self.height, self.width, out)
    }

    pub fn num_nodes(&self) -> usize {
        self.degrees.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn config(&self) -> &GraphConfig {
        &self.cfg
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Stored off-diagonal entries; each undirected edge appears twice.
    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn neighbor_count(&self, a: usize) -> usize {
        self.row_ptr[a + 1] - self.row_ptr[a]
    }

    /// Neighbors of node `a` with their weights, in increasing column order.
    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[a]..self.row_ptr[a + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&b, &w)| (b as usize, w))
    }

    /// All `(i, j, w)` entries of `W`, sorted by `(i, j)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_nodes()).flat_map(move |a| self.row(a).map(move |(b, w)| (a, b, w)))
    }

    /// `W(a, b)`, zero when `a` and `b` are not adjacent.
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        let range = self.row_ptr[a]..self.row_ptr[a + 1];
        match self.cols[range.clone()].binary_search(&(b as u32)) {
            Ok(k) => self.weights[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// `||W_self - W_other||_F` for two Laplacians on the same pattern.
    pub fn weight_distance_frobenius(&self, other: &SparseLaplacian) -> Result<f64> {
        self.check_pattern(other)?;
        let sq: f64 = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(sq.sqrt())
    }

    /// `max_a |d_self(a) - d_other(a)|`.
    pub fn max_degree_difference(&self, other: &SparseLaplacian) -> Result<f64> {
        self.check_pattern(other)?;
        Ok(self
            .degrees
            .iter()
            .zip(&other.degrees)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_pattern(&self, other: &SparseLaplacian) -> Result<()> {
        if self.row_ptr != other.row_ptr || self.cols != other.cols {
            return Err(Error::config("Laplacians do not share a sparsity pattern"));
        }
        Ok(())
    }

    /// `i,j,w` lines sorted by `(i, j)`, with a header.
    pub fn triplets_csv(&self) -> String {
        let mut out = String::from("i,j,w\n");
        for (i, j, w) in self.triplets() {
            writeln!(out, "{i},{j},{w}").unwrap();
        }
        out
    }

    /// `i,degree` lines, with a header.
    pub fn degrees_csv(&self) -> String {
        let mut out = String::from("i,degree\n");
        for (i, d) in self.degrees.iter().enumerate() {
            writeln!(out, "{i},{d}").unwrap();
        }
        out
    }

    pub fn write_debug_dump(&self, weights_path: impl AsRef<Path>, degrees_path: impl AsRef<Path>) -> Result<()> {
        fs::write(weights_path, self.triplets_csv())?;
        fs::write(degrees_path, self.degrees_csv())?;
        Ok(())
    }
}

/// Lipschitz constant of `t -> exp(-t^2 / sigma)`: `sqrt(2 / sigma) * e^{-1/2}`.
pub fn kernel_lipschitz(sigma: f64) -> f64 {
    (2.0 / sigma).sqrt() * (-0.5f64).exp()
}

/// Constant `H` with `||L_{u'} u - L_u u|| <= H ||u|| ||u' - u||` for all
/// images `u`, `u'` of the given size.
///
/// `H = 2 L_h (sqrt(N) + 1)`, where `L_h` is [`kernel_lipschitz`] and `N`
/// bounds the node degree. `N` is capped at `height * width - 1`.
pub fn lipschitz_constant(cfg: &GraphConfig, height: usize, width: usize) -> f64 {
    let n = cfg.neighbor_bound().min((height * width).saturating_sub(1));
    2.0 * kernel_lipschitz(cfg.sigma) * ((n as f64).sqrt() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example_image() -> ImageGrid {
        ImageGrid::new(2, 2, vec![0.2, 0.3, 0.5, 0.1]).unwrap()
    }

    fn example_cfg() -> GraphConfig {
        GraphConfig::new(1.0, 0.01, DistanceMetric::Manhattan).unwrap()
    }

    fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> ImageGrid {
        ImageGrid::from_fn(h, w, |_, _| rng.gen::<f64>())
    }

    #[test]
    fn two_by_two_example_weights_and_degrees() {
        let lap = build_laplacian(&example_image(), &example_cfg()).unwrap();
        let expect_w = [(0, 1, 0.3679), (0, 2, 0.0001), (1, 3, 0.0183), (2, 3, 0.0000)];
        for (a, b, w) in expect_w {
            assert!((lap.weight(a, b) - w).abs() <= 5e-5, "w({a},{b}) = {}", lap.weight(a, b));
            assert_eq!(lap.weight(a, b), lap.weight(b, a));
        }
        assert_eq!(lap.weight(0, 3), 0.0);
        assert_eq!(lap.weight(1, 2), 0.0);
        // (0.1 - 0.5)^2 / 0.01 = 16
        assert!((lap.weight(2, 3) - (-16f64).exp()).abs() < 1e-20);
        // Closed forms: squared differences over sigma are 1, 9, 4 and 16.
        let e = |t: f64| (-t).exp();
        let exact = [e(1.0) + e(9.0), e(1.0) + e(4.0), e(9.0) + e(16.0), e(4.0) + e(16.0)];
        for (d, x) in lap.degrees().iter().zip(exact) {
            assert!((d - x).abs() <= 1e-15);
        }
        // Four-decimal values; the second one is truncated (0.38620 -> 0.3861).
        for (d, p) in lap.degrees().iter().zip([0.3680, 0.3861, 0.0001, 0.0183]) {
            assert!((d - p).abs() <= 1e-4, "degree {d} vs {p}");
        }
    }

    #[test]
    fn example_action_matches_rounded_matrices() {
        // (D - W) x with the rounded matrices of the 2x2 example.
        let w = [
            [0.0, 0.3679, 0.0001, 0.0],
            [0.3679, 0.0, 0.0, 0.0183],
            [0.0001, 0.0, 0.0, 0.0],
            [0.0, 0.0183, 0.0, 0.0],
        ];
        let d = [0.3680, 0.3861, 0.0001, 0.0183];
        let x = [0.2, 0.3, 0.5, 0.1];
        let expected: Vec<f64> = (0..4)
            .map(|i| d[i] * x[i] - (0..4).map(|j| w[i][j] * x[j]).sum::<f64>())
            .collect();
        let lap = build_laplacian(&example_image(), &example_cfg()).unwrap();
        let got = lap.apply(&example_image()).unwrap();
        for (g, e) in got.values().iter().zip(&expected) {
            assert!((g - e).abs() < 5e-5, "{g} vs {e}");
        }
    }

    #[test]
    fn constant_image_has_unit_weights() {
        let u = ImageGrid::filled(5, 7, 0.42);
        for metric in [DistanceMetric::Manhattan, DistanceMetric::Chebyshev] {
            let cfg = GraphConfig::new(2.0, 0.05, metric).unwrap();
            let lap = build_laplacian(&u, &cfg).unwrap();
            assert!(lap.triplets().all(|(_, _, w)| w == 1.0));
            for a in 0..lap.num_nodes() {
                assert_eq!(lap.degrees()[a], lap.neighbor_count(a) as f64);
            }
            // interior node sees the full stencil
            assert_eq!(lap.neighbor_count(2 * 7 + 3), cfg.neighbor_bound());
            assert!(lap.apply(&u).unwrap().values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_pixel_has_no_edges() {
        let lap = build_laplacian(&ImageGrid::filled(1, 1, 0.3), &GraphConfig::default()).unwrap();
        assert_eq!(lap.nnz(), 0);
        assert_eq!(lap.degrees(), &[0.0]);
    }

    #[test]
    fn neighbor_bounds() {
        let c = |r, m| GraphConfig::new(r, 1.0, m).unwrap().neighbor_bound();
        assert_eq!(c(1.0, DistanceMetric::Manhattan), 4);
        assert_eq!(c(1.0, DistanceMetric::Chebyshev), 8);
        assert_eq!(c(6.0, DistanceMetric::Chebyshev), 168);
        assert_eq!(c(6.0, DistanceMetric::Manhattan), 84);
        assert_eq!(c(2.5, DistanceMetric::Manhattan), 12);
        for m in [DistanceMetric::Manhattan, DistanceMetric::Chebyshev] {
            for r in [1.0, 1.5, 2.0, 3.0, 6.0] {
                let cfg = GraphConfig::new(r, 1.0, m).unwrap();
                assert_eq!(cfg.offsets().len(), cfg.neighbor_bound());
            }
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        assert!(GraphConfig::new(0.0, 1.0, DistanceMetric::Manhattan).is_err());
        assert!(GraphConfig::new(1.0, 0.0, DistanceMetric::Manhattan).is_err());
        assert!(GraphConfig::new(1.0, f64::NAN, DistanceMetric::Manhattan).is_err());
        assert!("taxicab".parse::<DistanceMetric>().is_err());
    }

    #[test]
    fn apply_rejects_wrong_shape() {
        let lap = build_laplacian(&ImageGrid::filled(3, 3, 0.0), &GraphConfig::default()).unwrap();
        assert!(lap.apply(&ImageGrid::filled(3, 4, 0.0)).is_err());
    }

    #[test]
    fn structure_is_symmetric_and_loop_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_image(&mut rng, 9, 11);
        let lap = build_laplacian(&u, &GraphConfig::new(2.0, 0.05, DistanceMetric::Chebyshev).unwrap()).unwrap();
        for (i, j, w) in lap.triplets() {
            assert_ne!(i, j);
            assert!((0.0..=1.0).contains(&w));
            assert_eq!(lap.weight(j, i).to_bits(), w.to_bits());
        }
        for a in 0..lap.num_nodes() {
            let cols: Vec<usize> = lap.row(a).map(|(b, _)| b).collect();
            assert!(cols.windows(2).all(|p| p[0] < p[1]));
            let sum: f64 = lap.row(a).map(|(_, w)| w).sum();
            assert!((sum - lap.degrees()[a]).abs() <= 1e-12 * sum.max(1e-300));
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_image(&mut rng, 8, 8);
        let lap = build_laplacian(&u, &GraphConfig::new(1.0, 0.05, DistanceMetric::Manhattan).unwrap()).unwrap();
        for _ in 0..100 {
            let x = ImageGrid::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
            let q = x.dot(&lap.apply(&x).unwrap()).unwrap();
            let mut brute = 0.0;
            for (a, b, w) in lap.triplets() {
                brute += 0.5 * w * (x.values()[a] - x.values()[b]).powi(2);
            }
            assert!(q >= -1e-14);
            assert!((q - brute).abs() <= 1e-10 * brute.abs().max(1e-300));
        }
    }

    #[test]
    fn reweight_matches_fresh_build() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GraphConfig::new(3.0, 0.05, DistanceMetric::Chebyshev).unwrap();
        let u1 = random_image(&mut rng, 10, 10);
        let u2 = random_image(&mut rng, 10, 10);
        let mut lap = build_laplacian(&u1, &cfg).unwrap();
        lap.reweight(&u2).unwrap();
        assert_eq!(lap, build_laplacian(&u2, &cfg).unwrap());
        assert_eq!(build_laplacian(&u2, &cfg).unwrap(), build_laplacian(&u2, &cfg).unwrap());
    }

    #[test]
    fn kernel_lipschitz_matches_numerical_maximum() {
        for sigma in [0.005f64, 0.01, 0.05, 1.0] {
            let steps = 200_000;
            let t_max = 5.0 * sigma.sqrt();
            let max_slope = (0..=steps)
                .map(|k| {
                    let t = t_max * k as f64 / steps as f64;
                    (2.0 * t / sigma * (-t * t / sigma).exp()).abs()
                })
                .fold(0.0, f64::max);
            let lh = kernel_lipschitz(sigma);
            assert!((max_slope - lh).abs() <= 1e-6 * lh, "sigma {sigma}: {max_slope} vs {lh}");
        }
    }

    #[test]
    fn lipschitz_constant_closed_form() {
        let h = lipschitz_constant(&example_cfg(), 16, 16);
        let expected = 6.0 * 200f64.sqrt() * (-0.5f64).exp();
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 51.46).abs() < 1e-2);
        let flat = GraphConfig::new(1.0, 1e300, DistanceMetric::Manhattan).unwrap();
        assert!(lipschitz_constant(&flat, 16, 16) < 1e-140);
    }

    #[test]
    fn lipschitz_intermediate_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = GraphConfig::new(2.0, 0.05, DistanceMetric::Chebyshev).unwrap();
        let lh = kernel_lipschitz(cfg.sigma);
        let n = cfg.neighbor_bound() as f64;
        for _ in 0..50 {
            let u = random_image(&mut rng, 12, 12);
            let mut v = u.clone();
            let scale = rng.gen_range(1e-3..1.0);
            v.values_mut().iter_mut().for_each(|x| *x += scale * rng.gen_range(-1.0..1.0));
            let lu = build_laplacian(&u, &cfg).unwrap();
            let lv = build_laplacian(&v, &cfg).unwrap();
            let du = v.sub(&u).unwrap().norm();
            assert!(lu.weight_distance_frobenius(&lv).unwrap() <= 2.0 * lh * n.sqrt() * du);
            assert!(lu.max_degree_difference(&lv).unwrap() <= 2.0 * lh * du);
        }
    }

    #[test]
    fn debug_dump_format() {
        let lap = build_laplacian(&example_image(), &example_cfg()).unwrap();
        let csv = lap.triplets_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i,j,w");
        assert_eq!(lines.len(), 1 + 8);
        assert!(lines[1].starts_with("0,1,"));
        assert!(lap.degrees_csv().starts_with("i,degree\n0,"));
    }
}
