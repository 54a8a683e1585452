//! Robustness costs of a pulse parameter set.
//!
//! `j_to`, `j_ar`, `j_dr` and `j_dcr` are coherent (Schrodinger) quantities;
//! decoherence enters optimization only through `j_dcr`, the time spent in
//! `|r>`. [`CostModel::gate_fidelity`] runs the full Lindblad dynamics for
//! scans and reports.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DensityMatrix, LindbladChannels, QubitEmbedding};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ZERO};
use crate::pulse::{self, DriveTable, GateAngles, PulseParams, SingleQubitHamiltonian, Waveforms};

/// Default RK4 steps per gate.
pub const DEFAULT_STEPS: usize = 4000;
/// Per-leg Rabi frequency cap, 2pi x 10 MHz.
pub const DEFAULT_CAP: f64 = 2.0 * PI * 10.0;
/// Samples used to locate the waveform maximum.
pub const CAP_SAMPLES: usize = 8001;

/// Deviation from the ideal drive: amplitude `epsilon`, detuning `eta`, and
/// decoherence rate `kappa` (rad/us, dephasing `kappa`, decay `kappa/10`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorPoint {
    pub epsilon: f64,
    pub eta: f64,
    #[serde(default)]
    pub kappa: f64,
}

impl ErrorPoint {
    pub fn new(epsilon: f64, eta: f64, kappa: f64) -> Result<Self> {
        let p = Self { epsilon, eta, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.eta.is_finite() && self.kappa.is_finite()) {
            return Err(Error::InvalidParams("non-finite error point".into()));
        }
        if self.epsilon.abs() > 0.5 || self.eta.abs() > 0.5 {
            return Err(Error::InvalidParams(format!(
                "deviation ({}, {}) beyond the 0.5 sanity bound",
                self.epsilon, self.eta
            )));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParams(format!("negative kappa {}", self.kappa)));
        }
        Ok(())
    }
}

/// Sample points of the amplitude and detuning sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorGrid {
    pub epsilons: Vec<f64>,
    pub etas: Vec<f64>,
}

/// `n` evenly spaced points on `[-half_width, half_width]`, endpoints
/// included.
pub fn symmetric_linspace(n: usize, half_width: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl ErrorGrid {
    pub fn uniform(n: usize, half_width: f64) -> Self {
        let pts = symmetric_linspace(n, half_width);
        Self { epsilons: pts.clone(), etas: pts }
    }

    /// Both sweeps reduced to the single point 0.
    pub fn collapsed() -> Self {
        Self::uniform(1, 0.0)
    }
}

impl Default for ErrorGrid {
    fn default() -> Self {
        Self::uniform(20, 0.2)
    }
}

/// Named objective families used for multiobjective search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSet {
    /// `(J_ar, J_dr)`
    Adr,
    /// `(J_ar, J_dr, J_dcr)`
    Sr,
}

impl ObjectiveSet {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            ObjectiveSet::Adr => &["J_ar", "J_dr"],
            ObjectiveSet::Sr => &["J_ar", "J_dr", "J_dcr"],
        }
    }

    pub fn len(self) -> usize {
        self.names().len()
    }
}

impl FromStr for ObjectiveSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adr" => Ok(ObjectiveSet::Adr),
            "sr" => Ok(ObjectiveSet::Sr),
            _ => Err(Error::InvalidParams(format!("unknown objective set `{s}`"))),
        }
    }
}

/// Scalar costs for single-objective search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleObjective {
    To,
    Ar,
    Dr,
}

impl SingleObjective {
    pub fn name(self) -> &'static str {
        match self {
            SingleObjective::To => "J_to",
            SingleObjective::Ar => "J_ar",
            SingleObjective::Dr => "J_dr",
        }
    }
}

impl FromStr for SingleObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "to" => Ok(SingleObjective::To),
            "ar" => Ok(SingleObjective::Ar),
            "dr" => Ok(SingleObjective::Dr),
            _ => Err(Error::InvalidParams(format!("unknown objective `{s}`"))),
        }
    }
}

impl fmt::Display for SingleObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Named cost values in a fixed order; minimized componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl ObjectiveVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::ObjectiveMismatch(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            )));
        }
        Ok(Self { names, values })
    }

    pub fn from_set(set: ObjectiveSet, values: Vec<f64>) -> Result<Self> {
        Self::new(set.names().iter().map(|s| s.to_string()).collect(), values)
    }

    /// Unnamed vector, components labelled `f0, f1, ...`.
    pub fn unnamed(values: Vec<f64>) -> Self {
        let names = (0..values.len()).map(|k| format!("f{k}")).collect();
        Self { names, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|k| self.values[k])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_layout(&self, other: &ObjectiveVector) -> bool {
        self.names == other.names
    }
}

/// `10 (m / cap - 1)` for a peak single-leg amplitude `m` above `cap`, else 0.
pub fn cap_penalty(peak: f64, cap: f64) -> f64 {
    if peak <= cap {
        0.0
    } else {
        10.0 * (peak / cap - 1.0)
    }
}

/// Feasibility penalty of a waveform against the per-leg amplitude cap.
pub fn amplitude_cap_penalty(w: &Waveforms, cap: f64) -> f64 {
    cap_penalty(w.max_leg_amplitude(CAP_SAMPLES), cap)
}

type Ket = [C64; 3];

/// Single-atom RK4 on the half-step drive lattice for several inputs at
/// once. Returns the final states; `observe(n, states)` sees step 0..=steps.
fn propagate_kets<const K: usize>(
    table: &DriveTable,
    epsilon: f64,
    eta: f64,
    mut states: [Ket; K],
    mut observe: impl FnMut(usize, &[Ket; K]),
) -> [Ket; K] {
    let steps = table.steps();
    let dt = table.waveforms.tau() / steps as f64;
    let amp = 1.0 + epsilon;
    let det = 1.0 + eta;
    let coeffs = |k: usize| {
        let (g0, g1, d) = table.node(k);
        (g0 * amp, g1 * amp, d * det)
    };
    // -i H psi with H = [[0,0,a0],[0,0,a1],[a0*,a1*,d]]
    let rhs = |(a0, a1, d): (C64, C64, f64), s: &Ket| -> Ket {
        [
            -I * (a0 * s[2]),
            -I * (a1 * s[2]),
            -I * (a0.conj() * s[0] + a1.conj() * s[1] + s[2] * d),
        ]
    };
    let add = |s: &Ket, k: &Ket, h: f64| -> Ket { [s[0] + k[0] * h, s[1] + k[1] * h, s[2] + k[2] * h] };
    observe(0, &states);
    let mut c_start = coeffs(0);
    for n in 0..steps {
        let c_mid = coeffs(2 * n + 1);
        let c_end = coeffs(2 * n + 2);
        for s in states.iter_mut() {
            let k1 = rhs(c_start, s);
            let k2 = rhs(c_mid, &add(s, &k1, dt / 2.0));
            let k3 = rhs(c_mid, &add(s, &k2, dt / 2.0));
            let k4 = rhs(c_end, &add(s, &k3, dt));
            for j in 0..3 {
                s[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0);
            }
        }
        c_start = c_end;
        observe(n + 1, &states);
    }
    states
}

/// Evaluator of all pulse costs for a target gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// RK4 steps per gate duration.
    pub steps: usize,
    /// Per-leg amplitude cap (rad/us).
    pub cap: f64,
    pub grid: ErrorGrid,
    pub angles: GateAngles,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            cap: DEFAULT_CAP,
            grid: ErrorGrid::default(),
            angles: GateAngles::x(),
        }
    }
}

/// A pulse prepared for repeated cost evaluation.
pub struct PreparedPulse {
    pub waveforms: Waveforms,
    pub table: DriveTable,
    targets: [Ket; 2],
}

impl PreparedPulse {
    fn inputs() -> [Ket; 2] {
        let one = C64::new(1.0, 0.0);
        [[one, ZERO, ZERO], [ZERO, one, ZERO]]
    }

    /// Coherent average fidelity `1/2 sum_q |<U q|psi_q(tau)>|`.
    pub fn coherent_fidelity(&self, epsilon: f64, eta: f64) -> f64 {
        let out = propagate_kets(&self.table, epsilon, eta, Self::inputs(), |_, _| {});
        let mut f = 0.0;
        for (psi, tgt) in out.iter().zip(&self.targets) {
            let ov: C64 = (0..3).map(|j| tgt[j].conj() * psi[j]).sum();
            f += ov.norm();
        }
        (f / 2.0).min(1.0)
    }

    /// `sum_q int |<r|psi_q>|^2 dt` at the ideal drive, trapezoid rule.
    pub fn rydberg_time(&self) -> f64 {
        let steps = self.table.steps();
        let dt = self.waveforms.tau() / steps as f64;
        let mut acc = 0.0;
        propagate_kets(&self.table, 0.0, 0.0, Self::inputs(), |n, states| {
            let pop: f64 = states.iter().map(|s| s[2].norm_sqr()).sum();
            let weight = if n == 0 || n == steps { 0.5 } else { 1.0 };
            acc += weight * pop;
        });
        acc * dt
    }

    pub fn leg_peak(&self) -> f64 {
        self.waveforms.max_leg_amplitude(CAP_SAMPLES)
    }
}

impl CostModel {
    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_grid(mut self, grid: ErrorGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn target(&self) -> CMatrix {
        pulse::ideal_unitary(&self.angles)
    }

    pub fn prepare(&self, p: &PulseParams) -> Result<PreparedPulse> {
        if self.steps == 0 {
            return Err(Error::InvalidTimeStep(0.0));
        }
        let waveforms = pulse::inverse_engineer(p, &self.angles)?;
        let table = DriveTable::new(&waveforms, self.steps);
        let u = self.target();
        let targets = [0, 1].map(|q| [u[(0, q)], u[(1, q)], ZERO]);
        Ok(PreparedPulse { waveforms, table, targets })
    }

    /// Infidelity with no deviation and no decoherence.
    pub fn j_to(&self, p: &PulseParams) -> Result<f64> {
        Ok(1.0 - self.prepare(p)?.coherent_fidelity(0.0, 0.0))
    }

    /// Mean infidelity over the amplitude sweep.
    pub fn j_ar(&self, p: &PulseParams) -> Result<f64> {
        let pp = self.prepare(p)?;
        Ok(self.j_ar_prepared(&pp))
    }

    /// Mean infidelity over the detuning sweep.
    pub fn j_dr(&self, p: &PulseParams) -> Result<f64> {
        let pp = self.prepare(p)?;
        Ok(self.j_dr_prepared(&pp))
    }

    /// Time in `|r>` (us), summed over both inputs.
    pub fn j_dcr(&self, p: &PulseParams) -> Result<f64> {
        Ok(self.prepare(p)?.rydberg_time())
    }

    fn j_ar_prepared(&self, pp: &PreparedPulse) -> f64 {
        sweep_infidelity(&self.grid.epsilons, |e| pp.coherent_fidelity(e, 0.0))
    }

    fn j_dr_prepared(&self, pp: &PreparedPulse) -> f64 {
        sweep_infidelity(&self.grid.etas, |h| pp.coherent_fidelity(0.0, h))
    }

    /// Unpenalized objective vector in the fixed order of `set`.
    pub fn objective_vector(&self, p: &PulseParams, set: ObjectiveSet) -> Result<ObjectiveVector> {
        let pp = self.prepare(p)?;
        let mut values = vec![self.j_ar_prepared(&pp), self.j_dr_prepared(&pp)];
        if set == ObjectiveSet::Sr {
            values.push(pp.rydberg_time());
        }
        ObjectiveVector::from_set(set, values)
    }

    /// Objective vector with the amplitude-cap penalty added to every
    /// component; this is what the optimizer minimizes.
    pub fn penalized_vector(&self, p: &PulseParams, set: ObjectiveSet) -> Result<ObjectiveVector> {
        let pp = self.prepare(p)?;
        let pen = cap_penalty(pp.leg_peak(), self.cap);
        let mut values = vec![self.j_ar_prepared(&pp), self.j_dr_prepared(&pp)];
        if set == ObjectiveSet::Sr {
            values.push(pp.rydberg_time());
        }
        values.iter_mut().for_each(|v| *v += pen);
        ObjectiveVector::from_set(set, values)
    }

    /// Scalar objective with the amplitude-cap penalty added.
    pub fn penalized_scalar(&self, p: &PulseParams, which: SingleObjective) -> Result<f64> {
        let pp = self.prepare(p)?;
        let pen = cap_penalty(pp.leg_peak(), self.cap);
        let raw = match which {
            SingleObjective::To => 1.0 - pp.coherent_fidelity(0.0, 0.0),
            SingleObjective::Ar => self.j_ar_prepared(&pp),
            SingleObjective::Dr => self.j_dr_prepared(&pp),
        };
        Ok(raw + pen)
    }

    pub fn amplitude_cap_penalty(&self, p: &PulseParams) -> Result<f64> {
        Ok(cap_penalty(self.prepare(p)?.leg_peak(), self.cap))
    }

    /// Average gate fidelity from the Lindblad equation at one error point.
    pub fn gate_fidelity(&self, p: &PulseParams, point: ErrorPoint) -> Result<f64> {
        point.validate()?;
        let pp = self.prepare(p)?;
        self.gate_fidelity_prepared(&pp, point)
    }

    pub fn gate_fidelity_prepared(&self, pp: &PreparedPulse, point: ErrorPoint) -> Result<f64> {
        let h = SingleQubitHamiltonian::tabulated(&pp.table, point.epsilon, point.eta);
        let channels = LindbladChannels::rydberg(point.kappa);
        let tau = pp.waveforms.tau();
        let steps = pp.table.steps();
        dynamics::average_gate_fidelity(&self.target(), &QubitEmbedding::single_atom(), &[0, 1], |q| {
            let mut rho = DensityMatrix::basis(3, q).into_inner();
            dynamics::propagate_master(&h, &channels, &mut rho, 0.0, tau, steps, |_, _| {})?;
            Ok(DensityMatrix::new_unchecked(rho))
        })
    }

    /// Fidelity at one error point: coherent kernel when `kappa = 0`,
    /// Lindblad otherwise.
    pub fn fidelity_prepared(&self, pp: &PreparedPulse, point: ErrorPoint) -> Result<f64> {
        if point.kappa == 0.0 {
            Ok(pp.coherent_fidelity(point.epsilon, point.eta))
        } else {
            self.gate_fidelity_prepared(pp, point)
        }
    }

    /// `1 - (worst amplitude-only + worst detuning-only + decoherence-only
    /// infidelity)`, each at the magnitudes of `point` with the worse sign.
    /// A conservative additive budget; compare [`CostModel::gate_fidelity`]
    /// for the simultaneous value.
    pub fn error_budget_fidelity(&self, p: &PulseParams, point: ErrorPoint) -> Result<f64> {
        point.validate()?;
        let pp = self.prepare(p)?;
        let e = point.epsilon.abs();
        let h = point.eta.abs();
        let amp = [e, -e].map(|x| 1.0 - pp.coherent_fidelity(x, 0.0));
        let det = [h, -h].map(|x| 1.0 - pp.coherent_fidelity(0.0, x));
        let deco = 1.0 - self.gate_fidelity_prepared(&pp, ErrorPoint { epsilon: 0.0, eta: 0.0, kappa: point.kappa })?;
        Ok(1.0 - (amp[0].max(amp[1]) + det[0].max(det[1]) + deco))
    }
}

fn sweep_infidelity(points: &[f64], mut fid: impl FnMut(f64) -> f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let total: f64 = points.iter().map(|&x| fid(x)).sum();
    1.0 - total / points.len() as f64
}
