//! Run configuration: one JSON file, every field optional.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use holo_core::cnot::{DEFAULT_C6, DEFAULT_R};
use holo_core::cost::{ErrorGrid, SingleObjective};
use holo_core::pulse::{GateAngles, PulseKind};
use holo_core::{units, CostModel, GaConfig, ObjectiveSet, TwoQubitConfig};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Gate {
    #[default]
    X,
    #[serde(rename = "CNOT")]
    Cnot,
}

/// Where the pulse parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseSource {
    Table(PulseKind),
    File(PathBuf),
    Optimize,
}

impl Default for PulseSource {
    fn default() -> Self {
        PulseSource::Table(PulseKind::To)
    }
}

impl FromStr for PulseSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "optimize" {
            return Ok(PulseSource::Optimize);
        }
        match s.split_once(':') {
            Some(("table1", row)) => row.parse().map(PulseSource::Table).map_err(|e: holo_core::Error| e.to_string()),
            Some(("file", path)) if !path.is_empty() => Ok(PulseSource::File(path.into())),
            _ => Err(format!("pulse source {s:?}: expected table1:<row>, file:<path> or optimize")),
        }
    }
}

impl fmt::Display for PulseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseSource::Table(k) => write!(f, "table1:{k}"),
            PulseSource::File(p) => write!(f, "file:{}", p.display()),
            PulseSource::Optimize => f.write_str("optimize"),
        }
    }
}

impl Serialize for PulseSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PulseSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Error sweep used inside the robustness costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 20, half_width: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxes {
    Epsilon,
    Eta,
    #[default]
    EpsilonEta,
    Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    pub axes: ScanAxes,
    /// Points per axis.
    pub points: usize,
    pub half_width: f64,
    /// Decoherence presets; the `kappa` axis spans `[0, max]`.
    pub kappa_over_2pi_khz: Vec<f64>,
    /// Fixed deviations for axes that do not sweep them.
    pub epsilon: f64,
    pub eta: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            axes: ScanAxes::default(),
            points: 41,
            half_width: 0.2,
            kappa_over_2pi_khz: vec![0.0, 3.0, 5.0],
            epsilon: 0.0,
            eta: 0.0,
        }
    }
}

/// Two-atom settings in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CnotSpec {
    pub omega_c_over_2pi_mhz: f64,
    pub tau_c: f64,
    /// Blockade shift; computed from `c6` and `r_um` when absent.
    pub v_over_2pi_mhz: Option<f64>,
    pub c6_over_2pi_mhz_um6: f64,
    pub r_um: f64,
    pub steps: usize,
}

impl Default for CnotSpec {
    fn default() -> Self {
        let d = TwoQubitConfig::default();
        Self {
            omega_c_over_2pi_mhz: units::to_mhz(d.omega_c),
            tau_c: d.tau_c,
            v_over_2pi_mhz: Some(units::to_mhz(d.v)),
            c6_over_2pi_mhz_um6: units::to_mhz(DEFAULT_C6),
            r_um: DEFAULT_R,
            steps: d.steps,
        }
    }
}

impl CnotSpec {
    pub fn to_config(&self, kappa: f64) -> Result<TwoQubitConfig> {
        let v = match self.v_over_2pi_mhz {
            Some(v) => units::mhz(v),
            None => TwoQubitConfig::from_c6(units::mhz(self.c6_over_2pi_mhz_um6), self.r_um)?.v,
        };
        let cfg = TwoQubitConfig { omega_c: units::mhz(self.omega_c_over_2pi_mhz), tau_c: self.tau_c, v, kappa, steps: self.steps };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything a run depends on. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub gate: Gate,
    pub pulse_source: PulseSource,
    /// Scalar objective of `optimize-single` (and of `pulse_source:
    /// optimize`).
    pub objective: SingleObjective,
    /// Objective set of `optimize-multi`.
    pub objectives: ObjectiveSet,
    pub grid: GridSpec,
    /// RK4 steps over the single-qubit pulse.
    pub steps: usize,
    pub cap_over_2pi_mhz: f64,
    pub tau: f64,
    pub ga: GaConfig,
    pub seed: u64,
    pub scan: ScanSpec,
    pub cnot: CnotSpec,
    /// Front file consumed by `select`.
    pub front: Option<PathBuf>,
    pub waveform_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: holo_core::io::SCHEMA_VERSION,
            gate: Gate::X,
            pulse_source: PulseSource::default(),
            objective: SingleObjective::To,
            objectives: ObjectiveSet::Adr,
            grid: GridSpec::default(),
            steps: holo_core::cost::DEFAULT_STEPS,
            cap_over_2pi_mhz: 10.0,
            tau: 1.0,
            ga: GaConfig::default(),
            seed: 0,
            scan: ScanSpec::default(),
            cnot: CnotSpec::default(),
            front: None,
            waveform_samples: 1001,
        }
    }
}

impl RunConfig {
    /// Reads `path`; relative file references resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let PulseSource::File(p) = &cfg.pulse_source {
            if p.is_relative() {
                cfg.pulse_source = PulseSource::File(base.join(p));
            }
        }
        if let Some(f) = &cfg.front {
            if f.is_relative() {
                cfg.front = Some(base.join(f));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != holo_core::io::SCHEMA_VERSION {
            bail!("config schema_version {} is not supported", self.schema_version);
        }
        if self.steps == 0 || self.waveform_samples < 2 {
            bail!("steps and waveform_samples must be positive");
        }
        if !(self.tau > 0.0 && self.cap_over_2pi_mhz > 0.0) {
            bail!("tau and cap_over_2pi_mhz must be positive");
        }
        if self.grid.points == 0 || !(self.grid.half_width >= 0.0 && self.grid.half_width <= 0.5) {
            bail!("grid needs points >= 1 and 0 <= half_width <= 0.5");
        }
        let s = &self.scan;
        if s.points == 0 || !(s.half_width >= 0.0 && s.half_width <= 0.5) {
            bail!("scan needs points >= 1 and 0 <= half_width <= 0.5");
        }
        if s.kappa_over_2pi_khz.is_empty() || s.kappa_over_2pi_khz.iter().any(|k| !(*k >= 0.0)) {
            bail!("scan.kappa_over_2pi_khz needs non-negative entries");
        }
        self.ga.validate()?;
        Ok(())
    }

    pub fn angles(&self) -> GateAngles {
        GateAngles::x()
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel {
            steps: self.steps,
            cap: units::mhz(self.cap_over_2pi_mhz),
            grid: ErrorGrid::uniform(self.grid.points, self.grid.half_width),
            angles: self.angles(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.cost_model(), CostModel::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"ga": {"pop": 1}}"#).is_err());
    }

    #[test]
    fn pulse_sources_parse() {
        assert_eq!("table1:sr".parse::<PulseSource>().unwrap(), PulseSource::Table(PulseKind::Sr));
        assert_eq!("file:a/b.json".parse::<PulseSource>().unwrap(), PulseSource::File("a/b.json".into()));
        assert_eq!("optimize".parse::<PulseSource>().unwrap(), PulseSource::Optimize);
        assert!("table1:xx".parse::<PulseSource>().is_err());
        assert!("somewhere".parse::<PulseSource>().is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"pulse_source": "table1:ADR", "gate": "CNOT"}"#).unwrap();
        assert_eq!(cfg.pulse_source.to_string(), "table1:ADR");
        assert_eq!(cfg.gate, Gate::Cnot);
    }

    #[test]
    fn cnot_from_c6_when_v_absent() {
        let spec = CnotSpec { v_over_2pi_mhz: None, ..CnotSpec::default() };
        let v = units::to_mhz(spec.to_config(0.0).unwrap().v);
        assert!((v - 345.7).abs() < 0.1, "{v}");
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = |s: &str| serde_json::from_str::<RunConfig>(s).unwrap().validate().is_err();
        assert!(bad(r#"{"steps": 0}"#));
        assert!(bad(r#"{"scan": {"half_width": 0.9}}"#));
        assert!(bad(r#"{"ga": {"population": 1}}"#));
        assert!(bad(r#"{"schema_version": 2}"#));
    }
}
