//! Inverse-engineered nonadiabatic holonomic gates on a three-level Rydberg
//! atom, their robustness costs, and the multiobjective machinery used to
//! trade those costs off.
//!
//! Units throughout: time in microseconds, every rate and frequency in
//! angular units (rad/us). Use [`units::mhz`] / [`units::khz`] to convert
//! from the usual "X/2pi" laboratory quotes.
//!
//! Module map:
//! - [`dynamics`]: Schrodinger and Lindblad propagation (fixed-step RK4) and
//!   fidelity measures.
//! - [`pulse`]: dark-path ansatz, inverse engineering of the control
//!   waveforms, geometric phase and ideal holonomies.
//! - [`cost`]: scalar and vector objectives over pulse parameters.
//! - [`moo`]: mixed-integer genetic search, NSGA-II and Pareto fronts.
//! - [`ewm`]: entropy-weight selection of an operating point from a front.
//! - [`search`]: pulse optimization and front selection in one call.
//! - [`cnot`]: pi-gap-pi CNOT on two blockaded atoms.
//! - [`io`]: file schemas shared with the command-line front-end.

pub mod cnot;
pub mod cost;
pub mod dynamics;
pub mod ewm;
pub mod io;
mod error;
pub mod moo;
pub mod linalg;
pub mod pulse;
pub mod search;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};

pub use cnot::TwoQubitConfig;
pub use cost::{CostModel, ErrorGrid, ErrorPoint, ObjectiveSet, ObjectiveVector, SingleObjective};
pub use dynamics::{DensityMatrix, Hamiltonian, LindbladChannels, QuantumState};
pub use ewm::{EwmResult, IndicatorMatrix};
pub use moo::{GaConfig, Genome, ParetoFront, ParetoPoint};
pub use pulse::{GateAngles, PulseKind, PulseParams, Waveforms};

/// Conversions from laboratory "frequency over 2pi" quotes to angular units.
pub mod units {
    use std::f64::consts::PI;

    /// `f` given as X/2pi in MHz, returned in rad/us.
    pub fn mhz(f: f64) -> f64 {
        2.0 * PI * f
    }

    /// `f` given as X/2pi in kHz, returned in rad/us.
    pub fn khz(f: f64) -> f64 {
        2.0 * PI * f * 1e-3
    }

    /// Angular rate in rad/us back to X/2pi in MHz.
    pub fn to_mhz(omega: f64) -> f64 {
        omega / (2.0 * PI)
    }

    /// Angular rate in rad/us back to X/2pi in kHz.
    pub fn to_khz(omega: f64) -> f64 {
        omega / (2.0 * PI) * 1e3
    }
}
