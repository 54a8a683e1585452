//! Randomized property checks shared by the integration tests and the
//! acceptance runner. Each returns a one-line summary or the first failure.

#![allow(dead_code)]

use holo_core::cost::CostModel;
use holo_core::dynamics::{self, ConstantHamiltonian, DensityMatrix, LindbladChannels};
use holo_core::ewm::{self, IndicatorMatrix};
use holo_core::linalg::{self, c, CMatrix, CVector};
use holo_core::moo::{dominates_values, non_dominated_sort, SearchSpace};
use holo_core::pulse::{self, GateAngles, PulseKind, PulseParams};
use holo_core::{units, ErrorPoint, Hamiltonian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RK4 steps keeping `max |H| dt` near 0.02.
fn adaptive_steps(p: &PulseParams) -> usize {
    let w = pulse::inverse_engineer(p, &GateAngles::x()).unwrap();
    let peak = w
        .sampled(4001)
        .iter()
        .map(|s| s.omega.max(s.delta.abs()))
        .fold(0.0, f64::max);
    ((peak * p.tau / 0.02).ceil() as usize).max(4000)
}

/// Evolves `|b>` under the engineered drive of random genomes and compares
/// with the analytic dark path at 101 times, and the final phase with the
/// quadrature geometric phase.
pub fn dark_path_oracle(genomes: usize, seed: u64) -> Check {
    let space = SearchSpace::pulse();
    let angles = GateAngles::x();
    let mut r = rng(seed);
    let mut worst_overlap: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    for k in 0..genomes {
        let p = space.sample(&mut r).to_params(1.0).map_err(|e| e.to_string())?;
        let w = pulse::inverse_engineer(&p, &angles).map_err(|e| e.to_string())?;
        let h = pulse::single_qubit_hamiltonian(&w, 0.0, 0.0);
        let steps = adaptive_steps(&p);
        let stride = steps / 100;
        let mut states = CMatrix::from_column_slice(3, 1, angles.bright_state().amplitudes.as_slice());
        let mut n = 0usize;
        let mut err = None;
        dynamics::propagate_pure(&h, &mut states, 0.0, p.tau, steps, |t, s| {
            if n.is_multiple_of(stride) || n == steps {
                let mu = pulse::dark_path_state(&p, &angles, t.min(p.tau)).unwrap().amplitudes;
                let psi: CVector = s.column(0).into_owned();
                let d = 1.0 - mu.dotc(&psi).norm();
                worst_overlap = worst_overlap.max(d);
                if d > 1e-6 && err.is_none() {
                    err = Some(format!("genome {k} {p:?}: 1 - |<mu|psi>| = {d:e} at t = {t}"));
                }
            }
            n += 1;
        })
        .map_err(|e| e.to_string())?;
        if let Some(e) = err {
            return Err(e);
        }
        let b = angles.bright_state().amplitudes;
        let phase = b.dotc(&states.column(0).into_owned()).arg();
        let gamma = pulse::geometric_phase_unwrapped(&p, 20_001);
        let d = linalg::angle_distance(phase, gamma);
        worst_phase = worst_phase.max(d);
        if d > 1e-5 {
            return Err(format!("genome {k} {p:?}: phase {phase} vs geometric {gamma}"));
        }
    }
    Ok(format!("{genomes} genomes, max 1-|overlap| {worst_overlap:.2e}, max phase error {worst_phase:.2e}"))
}

/// `|<mu2|H|mu2>|` at 1000 interior times for every table row and `extra`
/// random genomes.
pub fn parallel_transport(extra: usize, seed: u64) -> Check {
    let angles = GateAngles::x();
    let mut r = rng(seed);
    let space = SearchSpace::pulse();
    let mut params: Vec<PulseParams> = PulseKind::ALL.iter().map(|k| k.params()).collect();
    params.extend((0..extra).map(|_| space.sample(&mut r).to_params(1.0).unwrap()));
    let mut worst: f64 = 0.0;
    for p in &params {
        let w = pulse::inverse_engineer(p, &angles).map_err(|e| e.to_string())?;
        let h = pulse::single_qubit_hamiltonian(&w, 0.0, 0.0);
        for k in 0..1000 {
            let t = (k as f64 + 0.5) / 1000.0 * p.tau;
            let mu = pulse::dark_path_state(p, &angles, t).map_err(|e| e.to_string())?.amplitudes;
            let e = mu.dotc(&(h.at(t) * &mu)).norm();
            worst = worst.max(e);
            if e >= 1e-9 {
                return Err(format!("{p:?}: residual {e:e} at t = {t}"));
            }
        }
    }
    Ok(format!("{} parameter sets x 1000 times, max residual {worst:.2e}", params.len()))
}

fn random_matrix<R: Rng>(dim: usize, scale: f64, r: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)) * scale)
}

fn random_hermitian<R: Rng>(dim: usize, scale: f64, r: &mut R) -> CMatrix {
    let a = random_matrix(dim, scale, r);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

fn random_density<R: Rng>(dim: usize, r: &mut R) -> CMatrix {
    let a = random_matrix(dim, 1.0, r);
    let m = &a * a.adjoint();
    let tr = m.trace();
    m / tr
}

/// Trace, Hermiticity and positivity of Lindblad evolution from random
/// states under random Hamiltonians and jump operators, dims 3 and 9.
/// With Hermitian jump operators the purity must not increase.
pub fn lindblad_physicality(trials: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut worst_trace: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    for k in 0..trials {
        let dim = if k % 2 == 0 { 3 } else { 9 };
        let unital = k % 4 < 2;
        let h = ConstantHamiltonian::new(random_hermitian(dim, 5.0, &mut r), "random");
        let ops: Vec<CMatrix> = (0..2)
            .map(|_| if unital { random_hermitian(dim, 0.5, &mut r) } else { random_matrix(dim, 0.5, &mut r) })
            .collect();
        let channels = LindbladChannels::new(ops);
        let mut rho = random_density(dim, &mut r);
        let mut purity = f64::INFINITY;
        let mut err = None;
        let mut n = 0;
        dynamics::propagate_master(&h, &channels, &mut rho, 0.0, 1.0, 2000, |t, m| {
            n += 1;
            if n % 100 != 1 {
                return;
            }
            let d = DensityMatrix::new_unchecked(m.clone());
            worst_trace = worst_trace.max((d.trace() - 1.0).abs());
            let eig = d.min_eigenvalue();
            worst_eig = worst_eig.min(eig);
            let p = d.purity();
            if err.is_none() {
                if (d.trace() - 1.0).abs() > 1e-9 || d.hermiticity_defect() > 1e-12 || eig < -1e-9 {
                    err = Some(format!("trial {k} (dim {dim}) t = {t}: trace {} herm {:e} min eig {eig:e}", d.trace(), d.hermiticity_defect()));
                } else if unital && p > purity + 1e-12 {
                    err = Some(format!("trial {k} (dim {dim}) t = {t}: purity rose {purity} -> {p}"));
                }
            }
            purity = p;
        })
        .map_err(|e| e.to_string())?;
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(format!("{trials} trials, max trace error {worst_trace:.2e}, min eigenvalue {worst_eig:.2e}"))
}

/// Front index of each point by repeated removal of the non-dominated set.
pub fn brute_force_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let mut rank = vec![usize::MAX; points.len()];
    let mut level = 0;
    while rank.iter().any(|&r| r == usize::MAX) {
        let left: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == usize::MAX).collect();
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| j != i && dominates_values(&points[j], &points[i])))
            .collect();
        for i in front {
            rank[i] = level;
        }
        level += 1;
    }
    rank
}

pub fn sort_matches_brute_force(sets: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for s in 0..sets {
        let n = r.random_range(1..60);
        let m = r.random_range(2..=3);
        // small integer lattice produces ties and duplicates
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| r.random_range(0..6) as f64).collect()).collect();
        let fronts = non_dominated_sort(&pts).map_err(|e| e.to_string())?;
        let mut got = vec![usize::MAX; n];
        for (k, f) in fronts.iter().enumerate() {
            for &i in f {
                got[i] = k;
            }
        }
        if got != brute_force_ranks(&pts) {
            return Err(format!("set {s}: ranks differ for {pts:?}"));
        }
    }
    Ok(format!("{sets} random point sets agree"))
}

/// Affine invariance per column and selection of a planted dominant row.
pub fn ewm_properties(cases: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for case in 0..cases {
        let n = r.random_range(2..15);
        let k = r.random_range(2..=3);
        let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| r.random_range(0.0..1.0)).collect()).collect();
        let base = ewm::select(&IndicatorMatrix::unnamed(rows.clone()).unwrap()).map_err(|e| e.to_string())?;
        let scale: f64 = r.random_range(0.01..100.0);
        let shift: f64 = r.random_range(-10.0..10.0);
        let col = r.random_range(0..k);
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().enumerate().map(|(j, &x)| if j == col { scale * x + shift } else { x }).collect())
            .collect();
        let again = ewm::select(&IndicatorMatrix::unnamed(moved).unwrap()).map_err(|e| e.to_string())?;
        let drift = base.scores.iter().zip(&again.scores).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if drift > 1e-9 {
            return Err(format!("case {case}: scores moved by {drift:e} under affine rescaling"));
        }
        let best: Vec<f64> = (0..k).map(|j| rows.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min) - 0.5).collect();
        let at = r.random_range(0..=n);
        rows.insert(at, best);
        let sel = ewm::select(&IndicatorMatrix::unnamed(rows).unwrap()).map_err(|e| e.to_string())?;
        if sel.selected != at {
            return Err(format!("case {case}: planted row {at}, selected {}", sel.selected));
        }
    }
    Ok(format!("{cases} matrices: affine invariant, planted row always selected"))
}

/// Fidelity change under step halving, coherent and Lindblad routes.
pub fn dt_halving() -> Check {
    let point = ErrorPoint::new(0.1, -0.1, units::khz(3.0)).unwrap();
    let mut worst: f64 = 0.0;
    for kind in [PulseKind::To, PulseKind::Sr] {
        let p = kind.params();
        let f = |steps: usize| -> Result<(f64, f64), String> {
            let m = CostModel::default().with_steps(steps);
            let pp = m.prepare(&p).map_err(|e| e.to_string())?;
            Ok((pp.coherent_fidelity(0.1, -0.1), m.gate_fidelity_prepared(&pp, point).map_err(|e| e.to_string())?))
        };
        let (a, b, c) = (f(2000)?, f(4000)?, f(8000)?);
        for (coarse, mid, fine) in [(a.0, b.0, c.0), (a.1, b.1, c.1)] {
            let d = (mid - fine).abs();
            worst = worst.max(d);
            if d >= 1e-8 {
                return Err(format!("{kind}: 4000 vs 8000 steps differ by {d:e}"));
            }
            // fourth order: each halving shrinks the change roughly 16x,
            // until round-off (~1e-11) takes over
            if (coarse - mid).abs() > 1e-9 && (coarse - mid).abs() < 4.0 * d {
                return Err(format!("{kind}: no convergence, {} then {d}", (coarse - mid).abs()));
            }
        }
    }
    Ok(format!("max change 4000 -> 8000 steps {worst:.2e}"))
}
