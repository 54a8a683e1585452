//! Shared fixtures for the criterion benchmarks.

use holo_core::pulse::{inverse_engineer, GateAngles, PulseKind};
use holo_core::Waveforms;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn waveforms(kind: PulseKind) -> Waveforms {
    inverse_engineer(&kind.params(), &GateAngles::x()).expect("table rows are valid")
}

/// `n` random points with `m` objectives in the unit box.
pub fn random_points(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect()
}

/// `n` mutually non-dominated points on the simplex `sum x = 1`.
pub fn simplex_front(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    random_points(n, m, seed)
        .into_iter()
        .map(|p| {
            let s: f64 = p.iter().sum();
            p.into_iter().map(|x| x / s).collect()
        })
        .collect()
}
