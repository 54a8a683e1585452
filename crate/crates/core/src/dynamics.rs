//! Time-dependent Schrodinger and Lindblad propagation plus fidelity
//! measures.
//!
//! All propagation is classic fixed-step fourth-order Runge-Kutta. The
//! Hamiltonian is sampled at `t`, `t + dt/2` and `t + dt` of every step, so a
//! Hamiltonian that caches its samples on that half-step lattice (see
//! [`crate::pulse::DriveTable`]) is evaluated exactly where it was tabulated.

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, CMatrix, CVector, C64, I, ONE, ZERO};

/// Index of `|0>` in the single-atom basis.
pub const LEVEL_0: usize = 0;
/// Index of `|1>` in the single-atom basis.
pub const LEVEL_1: usize = 1;
/// Index of the Rydberg level `|r>` in the single-atom basis.
pub const LEVEL_R: usize = 2;

/// Trace drift beyond which a master-equation run is rejected.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;
/// Tolerance used when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-8;

/// A time-dependent Hermitian generator in rad/us.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    /// Writes `H(t)` into `out`, which is `dim x dim`.
    fn fill(&self, t: f64, out: &mut CMatrix);

    fn tag(&self) -> String {
        String::from("hamiltonian")
    }

    fn at(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        self.fill(t, &mut m);
        m
    }
}

/// Hamiltonian backed by a closure.
pub struct FnHamiltonian<F> {
    dim: usize,
    tag: String,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> CMatrix + Sync,
{
    pub fn new(dim: usize, tag: impl Into<String>, f: F) -> Self {
        Self { dim, tag: tag.into(), f }
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64) -> CMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn fill(&self, t: f64, out: &mut CMatrix) {
        out.copy_from(&(self.f)(t));
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }
}

/// Time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct ConstantHamiltonian {
    pub matrix: CMatrix,
    pub tag: String,
}

impl ConstantHamiltonian {
    pub fn new(matrix: CMatrix, tag: impl Into<String>) -> Self {
        Self { matrix, tag: tag.into() }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(CMatrix::zeros(dim, dim), "zero")
    }
}

impl Hamiltonian for ConstantHamiltonian {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn fill(&self, _t: f64, out: &mut CMatrix) {
        out.copy_from(&self.matrix);
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }
}

pub fn single_atom_labels() -> Vec<String> {
    ["0", "1", "r"].iter().map(|s| s.to_string()).collect()
}

/// Labels of `|c> (x) |t>`, control atom first.
pub fn two_atom_labels() -> Vec<String> {
    let single = single_atom_labels();
    let mut out = Vec::with_capacity(9);
    for c in &single {
        for t in &single {
            out.push(format!("{c}{t}"));
        }
    }
    out
}

/// Pure state with labelled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: CVector,
    pub labels: Vec<String>,
}

impl QuantumState {
    pub fn new(amplitudes: CVector, labels: Vec<String>) -> Result<Self> {
        if amplitudes.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, labels })
    }

    /// Computational basis state `index` with generic labels.
    pub fn basis(dim: usize, index: usize) -> Self {
        let labels = match dim {
            3 => single_atom_labels(),
            9 => two_atom_labels(),
            _ => (0..dim).map(|i| i.to_string()).collect(),
        };
        Self { amplitudes: linalg::basis_vector(dim, index), labels }
    }

    pub fn single_atom(level: usize) -> Self {
        Self::basis(3, level)
    }

    pub fn two_atom(control: usize, target: usize) -> Self {
        Self::basis(9, 3 * control + target)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_vector(&self.amplitudes)
    }
}

/// Density operator. Construction through [`DensityMatrix::new`] validates
/// Hermiticity, unit trace and positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let rho = Self { entries };
        rho.validate(DENSITY_TOL)?;
        Ok(rho)
    }

    /// Wraps a matrix without validation; used on integrator output.
    pub fn new_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn from_vector(psi: &CVector) -> Self {
        Self { entries: psi * psi.adjoint() }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self { entries: linalg::ket_bra(dim, index, index) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_inner(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.entries[(index, index)].re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.entries)[0]
    }

    /// `<psi|rho|psi>`, real part.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        psi.dotc(&(&self.entries * psi)).re
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.entries.nrows();
        if self.entries.ncols() != n {
            return Err(Error::InvalidDensityMatrix(format!(
                "not square: {}x{}",
                n,
                self.entries.ncols()
            )));
        }
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        let herm = self.hermiticity_defect();
        if herm > tol {
            return Err(Error::InvalidDensityMatrix(format!("Hermiticity defect {herm:e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidDensityMatrix(format!("min eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Dissipators of a Lindblad master equation. Rates are folded into the
/// operators.
#[derive(Debug, Clone, Default)]
pub struct LindbladChannels {
    operators: Vec<CMatrix>,
}

impl LindbladChannels {
    pub fn new(operators: Vec<CMatrix>) -> Self {
        Self { operators }
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Single-atom decay `sqrt(gamma_r/2)|j><r|` (j = 0, 1) and dephasing
    /// `sqrt(gamma_z)(|0><0| + |1><1| - |r><r|)`.
    pub fn rydberg_with_rates(gamma_r: f64, gamma_z: f64) -> Self {
        let mut ops = Vec::with_capacity(3);
        if gamma_r > 0.0 {
            let a = (gamma_r / 2.0).sqrt();
            for j in [LEVEL_0, LEVEL_1] {
                ops.push(linalg::ket_bra(3, j, LEVEL_R).scale(a));
            }
        }
        if gamma_z > 0.0 {
            let mut lz = CMatrix::zeros(3, 3);
            lz[(LEVEL_0, LEVEL_0)] = ONE;
            lz[(LEVEL_1, LEVEL_1)] = ONE;
            lz[(LEVEL_R, LEVEL_R)] = -ONE;
            ops.push(lz.scale(gamma_z.sqrt()));
        }
        Self { operators: ops }
    }

    /// Channels of a single atom from one decoherence rate:
    /// `gamma_z = kappa`, `gamma_r = kappa / 10`.
    pub fn rydberg(kappa: f64) -> Self {
        Self::rydberg_with_rates(kappa / 10.0, kappa)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    fn prepare(&self, dim: usize) -> Result<PreparedChannels> {
        let mut half_k = CMatrix::zeros(dim, dim);
        let mut jumps = Vec::with_capacity(self.operators.len());
        for l in &self.operators {
            if l.nrows() != dim || l.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: l.nrows() });
            }
            half_k += l.adjoint() * l;
            let mut nz = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    let a = l[(i, j)];
                    if a != ZERO {
                        nz.push((i, j, a));
                    }
                }
            }
            jumps.push(nz);
        }
        half_k.scale_mut(0.5);
        Ok(PreparedChannels { half_k, jumps })
    }
}

struct PreparedChannels {
    /// `1/2 sum_k L_k^dagger L_k`
    half_k: CMatrix,
    /// Nonzero entries of each `L_k`.
    jumps: Vec<Vec<(usize, usize, C64)>>,
}

/// Number of fixed steps covering `[t0, t1]` with step at most `dt`.
pub fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let span = t1 - t0;
    if !span.is_finite() || span < 0.0 {
        return Err(Error::InvalidTimeStep(span));
    }
    Ok(((span / dt) - 1e-9).ceil().max(0.0) as usize)
}

fn check_finite(h: &CMatrix, t: f64) -> Result<()> {
    if h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteHamiltonian { t })
    }
}

/// Propagates the columns of `states` (each a pure state) from `t0` to `t1`
/// in `steps` RK4 steps. `observe` is called at `t0` and after every step.
pub fn propagate_pure<H, O>(
    h: &H,
    states: &mut CMatrix,
    t0: f64,
    t1: f64,
    steps: usize,
    mut observe: O,
) -> Result<()>
where
    H: Hamiltonian + ?Sized,
    O: FnMut(f64, &CMatrix),
{
    let dim = h.dim();
    if states.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: states.nrows() });
    }
    observe(t0, states);
    if steps == 0 {
        return Ok(());
    }
    let dt = (t1 - t0) / steps as f64;
    let k = states.ncols();
    let mut h_start = CMatrix::zeros(dim, dim);
    let mut h_mid = CMatrix::zeros(dim, dim);
    let mut h_end = CMatrix::zeros(dim, dim);
    let mut k1 = CMatrix::zeros(dim, k);
    let mut k2 = CMatrix::zeros(dim, k);
    let mut k3 = CMatrix::zeros(dim, k);
    let mut k4 = CMatrix::zeros(dim, k);
    let mut tmp = CMatrix::zeros(dim, k);
    let minus_i = -I;
    let half = C64::new(dt / 2.0, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let third = C64::new(dt / 3.0, 0.0);

    h.fill(t0, &mut h_start);
    check_finite(&h_start, t0)?;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let t_mid = t + 0.5 * dt;
        let t_end = t0 + (n + 1) as f64 * dt;
        h.fill(t_mid, &mut h_mid);
        check_finite(&h_mid, t_mid)?;
        h.fill(t_end, &mut h_end);
        check_finite(&h_end, t_end)?;

        k1.gemm(minus_i, &h_start, states, ZERO);
        tmp.copy_from(states);
        axpy(&mut tmp, half, &k1);
        k2.gemm(minus_i, &h_mid, &tmp, ZERO);
        tmp.copy_from(states);
        axpy(&mut tmp, half, &k2);
        k3.gemm(minus_i, &h_mid, &tmp, ZERO);
        tmp.copy_from(states);
        axpy(&mut tmp, full, &k3);
        k4.gemm(minus_i, &h_end, &tmp, ZERO);

        axpy(states, sixth, &k1);
        axpy(states, third, &k2);
        axpy(states, third, &k3);
        axpy(states, sixth, &k4);

        std::mem::swap(&mut h_start, &mut h_end);
        observe(t_end, states);
    }
    Ok(())
}

/// Integrates `i d/dt psi = H psi` over `[t0, t1]` and returns the state at
/// every grid time, starting with `t0`.
pub fn evolve_schrodinger<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<(f64, QuantumState)>> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    let steps = step_count(t0, t1, dt)?;
    let mut states = CMatrix::from_column_slice(psi0.dim(), 1, psi0.amplitudes.as_slice());
    let mut out = Vec::with_capacity(steps + 1);
    propagate_pure(h, &mut states, t0, t1, steps, |t, s| {
        out.push((
            t,
            QuantumState {
                amplitudes: s.column(0).into_owned(),
                labels: psi0.labels.clone(),
            },
        ));
    })?;
    Ok(out)
}

/// Writes the Lindblad right-hand side for `rho` into `out`.
fn lindblad_rhs(
    h: &CMatrix,
    ch: &PreparedChannels,
    rho: &CMatrix,
    heff: &mut CMatrix,
    a: &mut CMatrix,
    out: &mut CMatrix,
) {
    let n = rho.nrows();
    // H_eff = H - (i/2) sum L^dagger L; -i(H_eff rho - rho H_eff^dagger)
    // equals -i(A - A^dagger) with A = H_eff rho because rho is Hermitian.
    heff.copy_from(h);
    axpy(heff, -I, &ch.half_k);
    a.gemm(ONE, heff, rho, ZERO);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = -I * (a[(i, j)] - a[(j, i)].conj());
        }
    }
    for nz in &ch.jumps {
        for &(i, j, x) in nz {
            for &(k, l, y) in nz {
                out[(i, k)] += x * rho[(j, l)] * y.conj();
            }
        }
    }
}

fn symmetrize(rho: &mut CMatrix) {
    let n = rho.nrows();
    for i in 0..n {
        rho[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
}

/// Propagates `rho` under the Lindblad equation in `steps` RK4 steps,
/// symmetrizing after every step. `observe` sees `t0` and every step.
pub fn propagate_master<H, O>(
    h: &H,
    channels: &LindbladChannels,
    rho: &mut CMatrix,
    t0: f64,
    t1: f64,
    steps: usize,
    mut observe: O,
) -> Result<()>
where
    H: Hamiltonian + ?Sized,
    O: FnMut(f64, &CMatrix),
{
    let dim = h.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.nrows() });
    }
    let ch = channels.prepare(dim)?;
    observe(t0, rho);
    if steps == 0 {
        return Ok(());
    }
    let dt = (t1 - t0) / steps as f64;
    let trace0: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    let z = || CMatrix::zeros(dim, dim);
    let (mut h_start, mut h_mid, mut h_end) = (z(), z(), z());
    let (mut k1, mut k2, mut k3, mut k4) = (z(), z(), z(), z());
    let (mut tmp, mut heff, mut a) = (z(), z(), z());
    let half = C64::new(dt / 2.0, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let third = C64::new(dt / 3.0, 0.0);

    h.fill(t0, &mut h_start);
    check_finite(&h_start, t0)?;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let t_mid = t + 0.5 * dt;
        let t_end = t0 + (n + 1) as f64 * dt;
        h.fill(t_mid, &mut h_mid);
        check_finite(&h_mid, t_mid)?;
        h.fill(t_end, &mut h_end);
        check_finite(&h_end, t_end)?;

        lindblad_rhs(&h_start, &ch, rho, &mut heff, &mut a, &mut k1);
        tmp.copy_from(rho);
        axpy(&mut tmp, half, &k1);
        lindblad_rhs(&h_mid, &ch, &tmp, &mut heff, &mut a, &mut k2);
        tmp.copy_from(rho);
        axpy(&mut tmp, half, &k2);
        lindblad_rhs(&h_mid, &ch, &tmp, &mut heff, &mut a, &mut k3);
        tmp.copy_from(rho);
        axpy(&mut tmp, full, &k3);
        lindblad_rhs(&h_end, &ch, &tmp, &mut heff, &mut a, &mut k4);

        axpy(rho, sixth, &k1);
        axpy(rho, third, &k2);
        axpy(rho, third, &k3);
        axpy(rho, sixth, &k4);
        symmetrize(rho);

        let trace: f64 = rho.diagonal().iter().map(|z| z.re).sum();
        let drift = (trace - trace0).abs();
        if !(drift <= MAX_TRACE_DRIFT) {
            return Err(Error::IntegrationAccuracy { drift, t: t_end });
        }
        std::mem::swap(&mut h_start, &mut h_end);
        observe(t_end, rho);
    }
    Ok(())
}

/// Integrates the Lindblad master equation over `[t0, t1]` and returns the
/// final density matrix.
pub fn evolve_master<H: Hamiltonian + ?Sized>(
    h: &H,
    channels: &LindbladChannels,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if rho0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.dim() });
    }
    let steps = step_count(t0, t1, dt)?;
    let mut rho = rho0.entries.clone();
    propagate_master(h, channels, &mut rho, t0, t1, steps, |_, _| {})?;
    Ok(DensityMatrix::new_unchecked(rho))
}

/// As [`evolve_master`], keeping every grid point.
pub fn evolve_master_trajectory<H: Hamiltonian + ?Sized>(
    h: &H,
    channels: &LindbladChannels,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<(f64, DensityMatrix)>> {
    if rho0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.dim() });
    }
    let steps = step_count(t0, t1, dt)?;
    let mut rho = rho0.entries.clone();
    let mut out = Vec::with_capacity(steps + 1);
    propagate_master(h, channels, &mut rho, t0, t1, steps, |t, r| {
        out.push((t, DensityMatrix::new_unchecked(r.clone())));
    })?;
    Ok(out)
}

/// Uhlmann fidelity `Tr sqrt(sqrt(sigma) rho sqrt(sigma))`, in `[0, 1]`.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    rho.validate(DENSITY_TOL)?;
    sigma.validate(DENSITY_TOL)?;
    let s = linalg::psd_sqrt(sigma.entries());
    let m = &s * rho.entries() * &s;
    let f: f64 = linalg::hermitian_eigenvalues(&m).iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Fidelity against a pure target, `sqrt(<psi|rho|psi>)`.
pub fn pure_state_fidelity(rho: &DensityMatrix, psi: &CVector) -> f64 {
    rho.expectation(psi).max(0.0).sqrt().min(1.0)
}

/// Placement of a register of qubits inside the full atomic Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitEmbedding {
    pub full_dim: usize,
    /// Full-space index of each computational basis state, in register order.
    pub levels: Vec<usize>,
}

impl QubitEmbedding {
    /// One atom: qubit levels `|0>, |1>` of `{|0>, |1>, |r>}`.
    pub fn single_atom() -> Self {
        Self { full_dim: 3, levels: vec![LEVEL_0, LEVEL_1] }
    }

    /// Two atoms, control first: `|00>, |01>, |10>, |11>`.
    pub fn two_atom() -> Self {
        Self { full_dim: 9, levels: vec![0, 1, 3, 4] }
    }

    pub fn qubit_dim(&self) -> usize {
        self.levels.len()
    }

    /// Embeds a register vector, zero amplitude on every Rydberg component.
    pub fn embed(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.full_dim);
        for (k, &lvl) in self.levels.iter().enumerate() {
            out[lvl] = v[k];
        }
        out
    }
}

/// Mean Uhlmann fidelity of the realized output states against
/// `U|q><q|U^dagger` over the given computational-basis inputs.
pub fn average_gate_fidelity<F>(
    target: &CMatrix,
    embedding: &QubitEmbedding,
    inputs: &[usize],
    mut realized: F,
) -> Result<f64>
where
    F: FnMut(usize) -> Result<DensityMatrix>,
{
    let n = embedding.qubit_dim();
    if target.nrows() != n || target.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: target.nrows() });
    }
    if inputs.is_empty() {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for &q in inputs {
        let ideal = embedding.embed(&target.column(q).into_owned());
        let sigma = DensityMatrix::from_vector(&ideal);
        let rho = realized(q)?;
        total += state_fidelity(&rho, &sigma)?;
    }
    Ok(total / inputs.len() as f64)
}
