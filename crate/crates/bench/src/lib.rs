//! Shared inputs for the benchmarks.

use irmgl_core::{
    add_noise, shepp_logan, GraphConfig, ImageGrid, LinearOperator, NoiseSpec, RadonGeometry, RadonTransform,
    Sinogram,
};

pub struct CtFixture {
    pub op: RadonTransform,
    pub truth: ImageGrid,
    pub data: Sinogram,
    pub delta: f64,
}

/// Shepp-Logan CT problem with 5% noise.
pub fn ct_fixture(size: usize, angles: usize) -> CtFixture {
    let op = RadonTransform::new(RadonGeometry::new(size, angles).expect("valid geometry"));
    let truth = shepp_logan(size).expect("phantom size");
    let exact = op.apply(&truth).expect("shapes match");
    let (data, delta) = add_noise(&exact, &NoiseSpec { delta_rel: 0.05, seed: 0 }).expect("nonzero data");
    CtFixture { op, truth, data, delta }
}

pub fn graph_configs() -> [(&'static str, GraphConfig); 2] {
    [("r1", GraphConfig { radius: 1.0, ..GraphConfig::default() }), ("r6", GraphConfig::default())]
}
