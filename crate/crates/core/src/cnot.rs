//! pi-gap-pi CNOT on two blockaded atoms.
//!
//! Basis index `3c + t` for control level `c` and target level `t`
//! (`0, 1, r`). The protocol is
//! (i) a resonant pi pulse `|0>_c -> |r>_c`,
//! (ii) the holonomic X pulse on the target, and
//! (iii) the same pi pulse returning the control. With the control in
//! `|r>`, the blockade shift `V|rr><rr|` detunes the target out of
//! resonance, so the target flips only for control `|1>`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DensityMatrix, Hamiltonian, LindbladChannels, QubitEmbedding, LEVEL_0, LEVEL_R};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::pulse::{self, DriveTable, GateAngles, SingleQubitHamiltonian, Waveforms};

/// Index of `|rr>`.
pub const RR: usize = 8;

/// `2pi x 1416 GHz um^6` in rad/us um^6.
pub const DEFAULT_C6: f64 = 2.0 * PI * 1.416e6;
/// Interatomic distance (um).
pub const DEFAULT_R: f64 = 4.0;

fn default_steps() -> usize {
    8000
}

/// Two-atom protocol settings; rates in rad/us, times in us.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitConfig {
    /// Control pi-pulse Rabi frequency.
    pub omega_c: f64,
    /// Control pi-pulse duration.
    pub tau_c: f64,
    /// Blockade shift of `|rr>`.
    pub v: f64,
    /// Decoherence rate applied to both atoms.
    #[serde(default)]
    pub kappa: f64,
    /// RK4 steps per protocol segment.
    #[serde(default = "default_steps")]
    pub steps: usize,
}

impl Default for TwoQubitConfig {
    fn default() -> Self {
        Self { omega_c: 2.0 * PI * 10.0, tau_c: 0.05, v: 2.0 * PI * 346.0, kappa: 0.0, steps: default_steps() }
    }
}

impl TwoQubitConfig {
    /// Blockade from the van der Waals coefficient, `V = C6 / R^6`.
    pub fn from_c6(c6: f64, r: f64) -> Result<Self> {
        if !(c6 > 0.0 && r > 0.0) {
            return Err(Error::InvalidParams(format!("C6 = {c6}, R = {r} must be positive")));
        }
        Ok(Self { v: c6 / r.powi(6), ..Self::default() })
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Pulse area of each control pi pulse.
    pub fn pulse_area(&self) -> f64 {
        self.omega_c * self.tau_c
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.omega_c, self.tau_c, self.v, self.kappa].iter().all(|x| x.is_finite())
            && self.tau_c > 0.0
            && self.kappa >= 0.0
            && self.steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid two-qubit config {self:?}")))
        }
    }
}

/// Segment of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    I,
    Ii,
    Iii,
}

/// Total two-atom Hamiltonian of one segment.
pub struct CnotHamiltonian<'a> {
    pub step: Step,
    pub omega_c: f64,
    pub v: f64,
    pub target: SingleQubitHamiltonian<'a>,
}

impl Hamiltonian for CnotHamiltonian<'_> {
    fn dim(&self) -> usize {
        9
    }

    fn fill(&self, t: f64, out: &mut CMatrix) {
        out.fill(ZERO);
        out[(RR, RR)] = c(self.v, 0.0);
        match self.step {
            Step::I | Step::Iii => {
                let half = c(self.omega_c / 2.0, 0.0);
                for tgt in 0..3 {
                    let g = 3 * LEVEL_0 + tgt;
                    let r = 3 * LEVEL_R + tgt;
                    out[(r, g)] += half;
                    out[(g, r)] += half;
                }
            }
            Step::Ii => {
                for ctl in 0..3 {
                    self.target.fill_block(t, out, 3 * ctl, 1);
                }
            }
        }
    }

    fn tag(&self) -> String {
        format!("two-atom step {:?}", self.step)
    }
}

/// Hamiltonian of `step`; in step ii the target waveform runs over
/// `[tau_c, tau_c + tau]`.
pub fn build_total_hamiltonian<'a>(
    step: Step,
    cfg: &TwoQubitConfig,
    w: &Waveforms,
    epsilon: f64,
    eta: f64,
) -> CnotHamiltonian<'a> {
    CnotHamiltonian {
        step,
        omega_c: cfg.omega_c,
        v: cfg.v,
        target: pulse::single_qubit_hamiltonian(w, epsilon, eta).with_offset(cfg.tau_c),
    }
}

/// Single-atom channels on each atom, `L (x) 1` and `1 (x) L`.
pub fn two_atom_channels(kappa: f64) -> LindbladChannels {
    let single = LindbladChannels::rydberg(kappa);
    let id = CMatrix::identity(3, 3);
    let mut ops = Vec::with_capacity(2 * single.len());
    for l in single.operators() {
        ops.push(linalg::kron(l, &id));
        ops.push(linalg::kron(&id, l));
    }
    LindbladChannels::new(ops)
}

/// `|0><0| (x) 1 + |1><1| (x) X` on `|00>, |01>, |10>, |11>`.
pub fn cnot_target() -> CMatrix {
    let x = pulse::ideal_unitary(&GateAngles::x());
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = ONE;
    u[(1, 1)] = ONE;
    u.view_mut((2, 2), (2, 2)).copy_from(&x);
    u
}

/// Full-space index of a two-qubit basis input `q = 2c + t`.
pub fn input_index(q: usize) -> usize {
    QubitEmbedding::two_atom().levels[q]
}

/// Runs the three segments from the basis input `q` (`|00>, |01>, |10>,
/// |11>` for `q = 0..4`) and returns the final density matrix.
pub fn cnot_evolve(cfg: &TwoQubitConfig, w: &Waveforms, epsilon: f64, eta: f64, q: usize) -> Result<DensityMatrix> {
    let table = DriveTable::new(w, cfg.steps);
    evolve_with_table(cfg, &table, epsilon, eta, q, |_, _| {})
}

/// As [`cnot_evolve`], calling `observe` on every grid point of the three
/// segments.
pub fn evolve_with_table<O>(
    cfg: &TwoQubitConfig,
    table: &DriveTable,
    epsilon: f64,
    eta: f64,
    q: usize,
    mut observe: O,
) -> Result<DensityMatrix>
where
    O: FnMut(f64, &CMatrix),
{
    cfg.validate()?;
    if q >= 4 {
        return Err(Error::InvalidParams(format!("two-qubit input {q} outside 0..4")));
    }
    let tau = table.waveforms.tau();
    let channels = two_atom_channels(cfg.kappa);
    let target = SingleQubitHamiltonian::tabulated(table, epsilon, eta).with_offset(cfg.tau_c);
    let mut rho = DensityMatrix::basis(9, input_index(q)).into_inner();
    let t1 = cfg.tau_c;
    let t2 = t1 + tau;
    let t3 = t2 + cfg.tau_c;
    let segments = [(Step::I, 0.0, t1), (Step::Ii, t1, t2), (Step::Iii, t2, t3)];
    for (k, (step, a, b)) in segments.into_iter().enumerate() {
        let h = CnotHamiltonian { step, omega_c: cfg.omega_c, v: cfg.v, target };
        dynamics::propagate_master(&h, &channels, &mut rho, a, b, cfg.steps, |t, r| {
            // segment starts repeat the previous end point
            if k == 0 || t > a {
                observe(t, r)
            }
        })?;
    }
    Ok(DensityMatrix::new_unchecked(rho))
}

/// Fidelity of each basis input against `cnot_target`.
pub fn cnot_input_fidelities(cfg: &TwoQubitConfig, w: &Waveforms, epsilon: f64, eta: f64) -> Result<[f64; 4]> {
    let table = DriveTable::new(w, cfg.steps);
    let u = cnot_target();
    let emb = QubitEmbedding::two_atom();
    let out: Vec<Result<f64>> = (0..4)
        .into_par_iter()
        .map(|q| {
            let rho = evolve_with_table(cfg, &table, epsilon, eta, q, |_, _| {})?;
            let ideal = emb.embed(&u.column(q).into_owned());
            Ok(dynamics::pure_state_fidelity(&rho, &ideal))
        })
        .collect();
    let mut f = [0.0; 4];
    for (slot, v) in f.iter_mut().zip(out) {
        *slot = v?;
    }
    Ok(f)
}

/// Mean fidelity over the four basis inputs.
pub fn cnot_fidelity(cfg: &TwoQubitConfig, w: &Waveforms, epsilon: f64, eta: f64) -> Result<f64> {
    let f = cnot_input_fidelities(cfg, w, epsilon, eta)?;
    Ok(f.iter().sum::<f64>() / 4.0)
}
