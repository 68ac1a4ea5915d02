//! Benchmark fixtures; the benchmarks themselves live in `benches/`.

use meanfield::{build_lattice, HartreeOrbital, LatticeModel, Shape, C64};

/// Cosine interaction of unit strength on `d` sites with unit lattice spacing.
pub fn cosine_model(d: usize) -> LatticeModel {
    let v = Shape::Cosine {
        amplitude: 1.0,
        harmonic: 1,
        offset: 0.0,
    };
    build_lattice(d, d as f64, &Shape::Zero, &v).expect("valid model")
}

/// Normalized Gaussian wavepacket with momentum 0.9 per site.
pub fn packet(d: usize) -> Vec<C64> {
    let raw: Vec<C64> = (0..d)
        .map(|p| {
            let x = p as f64 - d as f64 / 3.0;
            C64::from_polar((-x * x / 3.0).exp(), 0.9 * p as f64)
        })
        .collect();
    let n = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|c| c / n).collect()
}

pub fn packet_orbital(d: usize) -> HartreeOrbital {
    HartreeOrbital::new(packet(d)).expect("normalized")
}
