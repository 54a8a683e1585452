//! Values pinned from the reference implementation at default resolution
//! (4000 RK4 steps, 20-point error sweeps).

use holo_core::cnot::{self, TwoQubitConfig};
use holo_core::pulse::{self, GateAngles, PulseKind};
use holo_core::{units, CostModel, ErrorPoint};

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs(), "got {got:.12e}, want {want:.12e}");
}

// (J_ar, J_dr, J_dcr, gamma)
const GOLDEN: [(PulseKind, [f64; 4]); 5] = [
    (PulseKind::To, [2.814794710790e-2, 1.166986847895e-2, 2.869053272915e-1, 3.141467642954]),
    (PulseKind::Ar, [2.504108824061e-3, 1.932300363564e-3, 5.173478115534e-1, 3.141590029596]),
    (PulseKind::Dr, [3.521540802606e-2, 9.696472510401e-5, 6.822909121626e-1, -3.141519265017]),
    (PulseKind::Adr, [1.319450569670e-5, 3.668398752857e-4, 5.030436628833e-1, -3.139783195025]),
    (PulseKind::Sr, [6.835749892596e-4, 1.154638483306e-3, 2.781588655604e-1, 3.140963885166]),
];

#[test]
fn table_rows_objectives() {
    let m = CostModel::default();
    for (kind, [ar, dr, dcr, gamma]) in GOLDEN {
        let p = kind.params();
        close(m.j_ar(&p).unwrap(), ar, 1e-7);
        close(m.j_dr(&p).unwrap(), dr, 1e-7);
        close(m.j_dcr(&p).unwrap(), dcr, 1e-7);
        close(pulse::geometric_phase(&p), gamma, 1e-9);
        assert!(m.j_to(&p).unwrap() < 1e-6, "{kind}");
    }
}

#[test]
fn adr_cap_penalty() {
    close(CostModel::default().amplitude_cap_penalty(&PulseKind::Adr.params()).unwrap(), 1.951379e-2, 1e-5);
}

#[test]
fn lindblad_fidelities() {
    let m = CostModel::default();
    let k3 = ErrorPoint::new(0.0, 0.0, units::khz(3.0)).unwrap();
    close(m.gate_fidelity(&PulseKind::Sr.params(), k3).unwrap(), 0.996557054377, 1e-9);
    close(m.gate_fidelity(&PulseKind::Adr.params(), k3).unwrap(), 0.994316780525, 1e-9);
    let corner = ErrorPoint::new(0.2, 0.2, units::khz(5.0)).unwrap();
    let to = PulseKind::To.params();
    close(m.gate_fidelity(&to, corner).unwrap(), 0.989302647867, 1e-9);
    close(m.error_budget_fidelity(&to, corner).unwrap(), 0.877276126610, 1e-9);
}

#[test]
fn cnot_center_value() {
    let w = pulse::inverse_engineer(&PulseKind::Sr.params(), &GateAngles::x()).unwrap();
    let cfg = TwoQubitConfig::default().with_kappa(units::khz(3.0));
    let f = cnot::cnot_fidelity(&cfg, &w, 0.0, 0.0).unwrap();
    close(f, 0.995126718974, 1e-9);
    assert!((0.990..=0.999).contains(&f));
}

#[test]
fn cnot_negative_quadrant_beats_positive_corner() {
    let w = pulse::inverse_engineer(&PulseKind::Sr.params(), &GateAngles::x()).unwrap();
    let cfg = TwoQubitConfig::default().with_kappa(units::khz(3.0));
    let neg = cnot::cnot_fidelity(&cfg, &w, -0.05, -0.05).unwrap();
    let pos = cnot::cnot_fidelity(&cfg, &w, 0.2, 0.2).unwrap();
    assert!(neg >= pos, "{neg} < {pos}");
}

#[test]
fn cnot_ideal_branches() {
    let w = pulse::inverse_engineer(&PulseKind::Sr.params(), &GateAngles::x()).unwrap();
    let f = cnot::cnot_input_fidelities(&TwoQubitConfig::default(), &w, 0.0, 0.0).unwrap();
    // blocked branches carry finite-blockade leakage, open branches are exact
    for q in [0, 1] {
        close(f[q], 0.995144649026, 1e-9);
    }
    for q in [2, 3] {
        assert!(f[q] > 1.0 - 1e-6, "{f:?}");
    }
}
