//! Dark-path ansatz, inverse engineering of the control fields, geometric
//! phase and ideal holonomies.
//!
//! The path angles are
//! `alpha(t) = a_alpha sin^c_alpha(b_alpha pi t / tau)` and
//! `beta(t) = a_beta sin^c_beta(b_beta pi t / tau)`. Given the path, the
//! drive follows in closed form:
//!
//! ```text
//! Delta = -beta'(1 + cos alpha)
//! Phi0  = beta + atan2(alpha', beta' sin alpha)
//! Omega = sqrt(alpha'^2 + beta'^2 sin^2 alpha)
//! ```
//!
//! and the bright state `|b> = sin(theta/2)|0> + cos(theta/2)e^{-i Phi}|1>`
//! is carried along `|mu2> = cos(alpha/2)|b> + sin(alpha/2)e^{i beta}|r>`
//! by the Hamiltonian
//!
//! ```text
//! H = (1+eps)/2 [Omega0 e^{-i Phi0}|0><r| + Omega1 e^{-i Phi1}|1><r| + h.c.]
//!     + (1+eta) Delta |r><r|
//! ```
//!
//! with `Omega0 = Omega sin(theta/2)`, `Omega1 = Omega cos(theta/2)` and
//! `Phi1 = Phi0 + Phi`. The sign of the detuning term is the one for which
//! `|mu2>` is an exact solution of `i psi' = H psi`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Hamiltonian, QuantumState, LEVEL_0, LEVEL_1, LEVEL_R};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMatrix, CVector, C64, ZERO};

/// Bound on `|a_alpha|` and `|a_beta|`.
pub const AMPLITUDE_BOUND: f64 = 30.0;
/// Inclusive range of the integer coefficients.
pub const INTEGER_RANGE: (u32, u32) = (1, 5);
/// Default Simpson node count for the geometric phase.
pub const PHASE_NODES: usize = 4001;

fn default_tau() -> f64 {
    1.0
}

/// Ansatz coefficients and gate time (us).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseParams {
    pub a_alpha: f64,
    pub b_alpha: u32,
    pub c_alpha: u32,
    pub a_beta: f64,
    pub b_beta: f64,
    pub c_beta: u32,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

/// Rows of the published parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PulseKind {
    To,
    Ar,
    Dr,
    Adr,
    Sr,
}

impl PulseKind {
    pub const ALL: [PulseKind; 5] =
        [PulseKind::To, PulseKind::Ar, PulseKind::Dr, PulseKind::Adr, PulseKind::Sr];

    pub fn name(self) -> &'static str {
        match self {
            PulseKind::To => "TO",
            PulseKind::Ar => "AR",
            PulseKind::Dr => "DR",
            PulseKind::Adr => "ADR",
            PulseKind::Sr => "SR",
        }
    }

    pub fn params(self) -> PulseParams {
        let (a_alpha, b_alpha, c_alpha, a_beta, b_beta, c_beta) = match self {
            PulseKind::To => (2.4630, 1, 4, 17.2074, 0.2154, 1),
            PulseKind::Ar => (-3.3049, 4, 2, -5.9809, 0.5187, 2),
            PulseKind::Dr => (-3.4016, 1, 1, 3.3443, 0.5746, 5),
            PulseKind::Adr => (-3.1678, 1, 2, 29.3233, 0.9620, 2),
            PulseKind::Sr => (-2.6166, 1, 5, -20.0805, 0.9556, 5),
        };
        PulseParams { a_alpha, b_alpha, c_alpha, a_beta, b_beta, c_beta, tau: 1.0 }
    }
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PulseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PulseKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown pulse row `{s}`")))
    }
}

/// `alpha, beta` and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
}

/// `a sin^c(k t)` and its derivative.
fn sine_power(a: f64, k: f64, c: u32, t: f64) -> (f64, f64) {
    let (s, co) = (k * t).sin_cos();
    let value = a * s.powi(c as i32);
    let deriv = a * c as f64 * s.powi(c as i32 - 1) * co * k;
    (value, deriv)
}

impl PulseParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = INTEGER_RANGE;
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, a) in [("a_alpha", self.a_alpha), ("a_beta", self.a_beta)] {
            if !a.is_finite() || a.abs() > AMPLITUDE_BOUND {
                return bad(format!("{name} = {a} outside [-30, 30]"));
            }
        }
        for (name, k) in [("b_alpha", self.b_alpha), ("c_alpha", self.c_alpha), ("c_beta", self.c_beta)] {
            if !(lo..=hi).contains(&k) {
                return bad(format!("{name} = {k} outside {{1..5}}"));
            }
        }
        if !(self.b_beta > 0.0 && self.b_beta < 1.0) {
            return bad(format!("b_beta = {} outside (0, 1)", self.b_beta));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau = {} must be positive", self.tau));
        }
        Ok(())
    }

    /// Evaluates the path angles without the range check; `t` is clamped to
    /// `[0, tau]`.
    pub fn alpha_beta(&self, t: f64) -> AlphaBeta {
        let t = t.clamp(0.0, self.tau);
        let ka = self.b_alpha as f64 * PI / self.tau;
        let kb = self.b_beta * PI / self.tau;
        let (alpha, alpha_dot) = sine_power(self.a_alpha, ka, self.c_alpha, t);
        let (beta, beta_dot) = sine_power(self.a_beta, kb, self.c_beta, t);
        AlphaBeta { alpha, beta, alpha_dot, beta_dot }
    }
}

/// `(alpha, beta, alpha', beta')` at `t`, derivatives by the chain rule.
pub fn eval_alpha_beta(p: &PulseParams, t: f64) -> Result<AlphaBeta> {
    let slack = 1e-12 * p.tau;
    if !(t >= -slack && t <= p.tau + slack) {
        return Err(Error::TimeOutOfRange { t, tau: p.tau });
    }
    Ok(p.alpha_beta(t))
}

/// Holonomy parameters `(theta, Phi, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateAngles {
    pub theta: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    pub gamma: f64,
}

impl GateAngles {
    pub const fn new(theta: f64, phi: f64, gamma: f64) -> Self {
        Self { theta, phi, gamma }
    }

    pub const fn x() -> Self {
        Self::new(PI / 2.0, PI, PI)
    }

    pub const fn hadamard() -> Self {
        Self::new(PI / 4.0, PI, PI)
    }

    pub const fn t() -> Self {
        Self::new(0.0, PI, PI / 4.0)
    }

    pub const fn s() -> Self {
        Self::new(0.0, PI, PI / 2.0)
    }

    /// `(<0|b>, <1|b>)`.
    pub fn bright(&self) -> (C64, C64) {
        let (s, co) = (self.theta / 2.0).sin_cos();
        (c(s, 0.0), cis(-self.phi) * co)
    }

    /// `(<0|d>, <1|d>)`.
    pub fn dark(&self) -> (C64, C64) {
        let (s, co) = (self.theta / 2.0).sin_cos();
        (cis(self.phi) * co, c(-s, 0.0))
    }

    pub fn bright_state(&self) -> QuantumState {
        let (b0, b1) = self.bright();
        embed_qubit(b0, b1)
    }

    pub fn dark_state(&self) -> QuantumState {
        let (d0, d1) = self.dark();
        embed_qubit(d0, d1)
    }
}

fn embed_qubit(a0: C64, a1: C64) -> QuantumState {
    let mut s = QuantumState::single_atom(LEVEL_0);
    s.amplitudes[LEVEL_0] = a0;
    s.amplitudes[LEVEL_1] = a1;
    s
}

/// `U = |d><d| + e^{i gamma}|b><b|` in the `{|0>, |1>}` basis.
pub fn ideal_unitary(angles: &GateAngles) -> CMatrix {
    let (b0, b1) = angles.bright();
    let (d0, d1) = angles.dark();
    let b = CVector::from_vec(vec![b0, b1]);
    let d = CVector::from_vec(vec![d0, d1]);
    &d * d.adjoint() + (&b * b.adjoint()) * cis(angles.gamma)
}

/// Drive fields at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSample {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
    pub omega: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub delta: f64,
}

/// Control fields realizing the dark path of a parameter set for fixed
/// `theta, Phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveforms {
    pub params: PulseParams,
    pub theta: f64,
    pub phi: f64,
}

/// Builds the drive for `p` and the mixing angles of `angles`. The geometric
/// phase is whatever `p` accumulates; `angles.gamma` is not used.
pub fn inverse_engineer(p: &PulseParams, angles: &GateAngles) -> Result<Waveforms> {
    p.validate()?;
    Ok(Waveforms { params: *p, theta: angles.theta, phi: angles.phi })
}

impl Waveforms {
    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    /// Closed-form drive at `t` (clamped to `[0, tau]`).
    pub fn sample(&self, t: f64) -> WaveformSample {
        let ab = self.params.alpha_beta(t);
        let (sa, ca) = ab.alpha.sin_cos();
        let y = ab.beta_dot * sa;
        let omega = ab.alpha_dot.hypot(y);
        let phi0 = ab.beta + ab.alpha_dot.atan2(y);
        WaveformSample {
            t,
            alpha: ab.alpha,
            beta: ab.beta,
            alpha_dot: ab.alpha_dot,
            beta_dot: ab.beta_dot,
            omega,
            phi0,
            phi1: phi0 + self.phi,
            delta: -ab.beta_dot * (1.0 + ca),
        }
    }

    pub fn at(&self, t: f64) -> Result<WaveformSample> {
        eval_alpha_beta(&self.params, t)?;
        Ok(self.sample(t))
    }

    /// Rabi frequencies of the two legs, `(Omega0, Omega1)`.
    pub fn legs(&self, omega: f64) -> (f64, f64) {
        let (s, co) = (self.theta / 2.0).sin_cos();
        (omega * s, omega * co)
    }

    /// Couplings `Omega_j e^{-i Phi_j} / 2` and the detuning at `t`.
    pub fn drive(&self, t: f64) -> (C64, C64, f64) {
        let w = self.sample(t);
        let (o0, o1) = self.legs(w.omega);
        (cis(-w.phi0) * (o0 / 2.0), cis(-w.phi1) * (o1 / 2.0), w.delta)
    }

    /// Direct evaluation of the printed inverse relations,
    /// `Phi0 = beta - arctan(alpha' cot alpha / (Delta + beta'))` and
    /// `Omega = alpha' / sin(Phi0 - beta)`, with `Phi0` from the closed form
    /// for the second. Returns `None` where a denominator is below `1e-9`.
    /// The arctangent is single-branch, so `Phi0` is only defined modulo pi.
    pub fn direct_form(&self, t: f64) -> Option<(f64, f64)> {
        let w = self.sample(t);
        let (sa, ca) = w.alpha.sin_cos();
        let den = w.delta + w.beta_dot;
        if sa.abs() < 1e-9 || den.abs() < 1e-9 {
            return None;
        }
        let phi0 = w.beta - (w.alpha_dot * ca / sa / den).atan();
        let s = (w.phi0 - w.beta).sin();
        if s.abs() < 1e-9 {
            return None;
        }
        Some((w.alpha_dot / s, phi0))
    }

    /// `n >= 2` samples on `[0, tau]` with `Phi0`, `Phi1` unwrapped.
    pub fn sampled(&self, n: usize) -> Vec<WaveformSample> {
        let n = n.max(2);
        let tau = self.tau();
        let mut out: Vec<WaveformSample> =
            (0..n).map(|k| self.sample(tau * k as f64 / (n - 1) as f64)).collect();
        let mut shift = 0.0;
        for k in 1..n {
            let raw = out[k].phi0 + shift;
            let jump = raw - out[k - 1].phi0;
            if jump > PI {
                shift -= 2.0 * PI * (jump / (2.0 * PI)).round();
            } else if jump < -PI {
                shift += 2.0 * PI * (-jump / (2.0 * PI)).round();
            }
            out[k].phi0 += shift;
            out[k].phi1 += shift;
        }
        out
    }

    /// Largest `Omega(t)` over `n` uniform samples.
    pub fn max_omega(&self, n: usize) -> f64 {
        let tau = self.tau();
        (0..n.max(2))
            .map(|k| self.sample(tau * k as f64 / (n.max(2) - 1) as f64).omega)
            .fold(0.0, f64::max)
    }

    /// Largest single-leg Rabi frequency `max(Omega0, Omega1)` over `n`
    /// uniform samples.
    pub fn max_leg_amplitude(&self, n: usize) -> f64 {
        let (s, co) = (self.theta / 2.0).sin_cos();
        self.max_omega(n) * s.abs().max(co.abs())
    }
}

/// Path state `|mu2(t)> = cos(alpha/2)|b> + sin(alpha/2)e^{i beta}|r>`.
pub fn dark_path_state(p: &PulseParams, angles: &GateAngles, t: f64) -> Result<QuantumState> {
    let ab = eval_alpha_beta(p, t)?;
    Ok(dark_path_from(angles, ab.alpha, ab.beta))
}

fn dark_path_from(angles: &GateAngles, alpha: f64, beta: f64) -> QuantumState {
    let (b0, b1) = angles.bright();
    let (s, co) = (alpha / 2.0).sin_cos();
    let mut st = embed_qubit(b0 * co, b1 * co);
    st.amplitudes[LEVEL_R] = cis(beta) * s;
    st
}

/// Phase acquired along the dark path, `i int <mu2|mu2'> dt
/// = -1/2 int beta'(1 - cos alpha) dt`, by composite Simpson on `nodes`
/// points (rounded up to odd). Not wrapped.
pub fn geometric_phase_unwrapped(p: &PulseParams, nodes: usize) -> f64 {
    let nodes = if nodes.is_multiple_of(2) { nodes + 1 } else { nodes.max(3) };
    let intervals = nodes - 1;
    let h = p.tau / intervals as f64;
    let f = |k: usize| {
        let ab = p.alpha_beta(k as f64 * h);
        ab.beta_dot * (1.0 - ab.alpha.cos())
    };
    let mut sum = f(0) + f(intervals);
    for k in 1..intervals {
        sum += if k % 2 == 1 { 4.0 * f(k) } else { 2.0 * f(k) };
    }
    -0.5 * sum * h / 3.0
}

/// Geometric phase on [`PHASE_NODES`] nodes, wrapped into `(-pi, pi]`.
pub fn geometric_phase(p: &PulseParams) -> f64 {
    linalg::wrap_angle(geometric_phase_unwrapped(p, PHASE_NODES))
}

/// Drive couplings sampled on the half-step lattice of an RK4 grid with
/// `steps` steps over `[0, tau]`.
#[derive(Debug, Clone)]
pub struct DriveTable {
    pub waveforms: Waveforms,
    steps: usize,
    half_step: f64,
    couplings: Vec<(C64, C64, f64)>,
}

impl DriveTable {
    pub fn new(w: &Waveforms, steps: usize) -> Self {
        let steps = steps.max(1);
        let half_step = w.tau() / (2 * steps) as f64;
        let couplings = (0..=2 * steps).map(|k| w.drive(k as f64 * half_step)).collect();
        Self { waveforms: *w, steps, half_step, couplings }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Node `k` of the lattice, at `t = k tau / (2 steps)`.
    pub fn node(&self, k: usize) -> (C64, C64, f64) {
        self.couplings[k]
    }

    /// Largest single-leg Rabi frequency over the lattice.
    pub fn max_leg_amplitude(&self) -> f64 {
        self.couplings.iter().map(|(g0, g1, _)| 2.0 * g0.norm().max(g1.norm())).fold(0.0, f64::max)
    }

    fn lookup(&self, local_t: f64) -> (C64, C64, f64) {
        let x = local_t / self.half_step;
        let k = x.round();
        if (x - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < self.couplings.len() {
            self.couplings[k as usize]
        } else {
            self.waveforms.drive(local_t)
        }
    }
}

/// Source of the drive for [`SingleQubitHamiltonian`].
#[derive(Debug, Clone, Copy)]
pub enum Drive<'a> {
    Analytic(Waveforms),
    Table(&'a DriveTable),
}

impl Drive<'_> {
    fn at(&self, local_t: f64) -> (C64, C64, f64) {
        match self {
            Drive::Analytic(w) => w.drive(local_t),
            Drive::Table(tab) => tab.lookup(local_t),
        }
    }
}

/// Error-augmented single-atom Hamiltonian. The waveform runs over
/// `[offset, offset + tau]` of the simulation clock.
#[derive(Debug, Clone, Copy)]
pub struct SingleQubitHamiltonian<'a> {
    pub drive: Drive<'a>,
    pub epsilon: f64,
    pub eta: f64,
    pub offset: f64,
}

impl<'a> SingleQubitHamiltonian<'a> {
    pub fn tabulated(table: &'a DriveTable, epsilon: f64, eta: f64) -> Self {
        Self { drive: Drive::Table(table), epsilon, eta, offset: 0.0 }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Writes the 3x3 block of `H(t)` into `out` at rows/cols
    /// `base + {0, 1, 2}` with unit stride `stride`.
    pub(crate) fn fill_block(&self, t: f64, out: &mut CMatrix, base: usize, stride: usize) {
        let (g0, g1, delta) = self.drive.at(t - self.offset);
        let amp = 1.0 + self.epsilon;
        let (i0, i1, ir) = (base + LEVEL_0 * stride, base + LEVEL_1 * stride, base + LEVEL_R * stride);
        let a0 = g0 * amp;
        let a1 = g1 * amp;
        out[(i0, ir)] += a0;
        out[(ir, i0)] += a0.conj();
        out[(i1, ir)] += a1;
        out[(ir, i1)] += a1.conj();
        out[(ir, ir)] += c((1.0 + self.eta) * delta, 0.0);
    }
}

impl Hamiltonian for SingleQubitHamiltonian<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn fill(&self, t: f64, out: &mut CMatrix) {
        out.fill(ZERO);
        self.fill_block(t, out, 0, 1);
    }

    fn tag(&self) -> String {
        format!("single-qubit drive eps={} eta={}", self.epsilon, self.eta)
    }
}

/// `H(t)` of the single atom with amplitude deviation `epsilon` on both legs
/// and detuning deviation `eta`.
pub fn single_qubit_hamiltonian(w: &Waveforms, epsilon: f64, eta: f64) -> SingleQubitHamiltonian<'static> {
    SingleQubitHamiltonian { drive: Drive::Analytic(*w), epsilon, eta, offset: 0.0 }
}
