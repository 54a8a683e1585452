//! The five workflows. Each computes all of its outputs in memory first;
//! [`write_outputs`] then replaces the files atomically, so a failed run
//! leaves nothing behind.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use holo_core::cnot;
use holo_core::cost::{symmetric_linspace, CAP_SAMPLES};
use holo_core::io::{self, fmt_sig, FrontFile, PulseFile, ScanRow, SelectionFile, SCHEMA_VERSION};
use holo_core::pulse::{self, PulseParams, PHASE_NODES};
use holo_core::search;
use holo_core::{units, ErrorPoint, ObjectiveSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Gate, PulseSource, RunConfig, ScanAxes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    OptimizeSingle,
    OptimizeMulti,
    Select,
    Scan,
    Evaluate,
}

/// Files to write (name relative to the output directory, contents) and
/// lines for stdout.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub summary: Vec<String>,
}

impl Outputs {
    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn say(&mut self, line: String) {
        self.summary.push(line);
    }
}

/// Report of `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub schema_version: u32,
    pub source: String,
    pub pulse: PulseFile,
    pub j_to: f64,
    pub j_ar: f64,
    pub j_dr: f64,
    pub j_dcr: f64,
    pub gamma_mod_2pi: f64,
    #[serde(rename = "max_Omega_over_2pi_MHz")]
    pub max_omega_over_2pi_mhz: f64,
    /// Peak of `max(Omega0, Omega1)`, the quantity held under the cap.
    #[serde(rename = "max_leg_over_2pi_MHz")]
    pub max_leg_over_2pi_mhz: f64,
    pub cap_penalty: f64,
    /// Two-qubit fidelity at zero error without decoherence; present for
    /// the CNOT gate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cnot_fidelity: Option<f64>,
    pub waveform_csv: String,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outputs> {
    cfg.validate()?;
    let mut out = match cmd {
        Command::OptimizeSingle => optimize_single(cfg)?,
        Command::OptimizeMulti => optimize_multi(cfg)?,
        Command::Select => select(cfg)?,
        Command::Scan => scan(cfg)?,
        Command::Evaluate => evaluate(cfg)?,
    };
    out.file("config.json", io::to_json(cfg)?);
    Ok(out)
}

pub fn write_outputs(dir: &Path, out: &Outputs) -> Result<()> {
    for (name, contents) in &out.files {
        let path = dir.join(name);
        io::write_atomic(&path, contents.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Pulse named by the config, with a label for reports.
pub fn resolve_pulse(cfg: &RunConfig) -> Result<(PulseParams, String)> {
    match &cfg.pulse_source {
        PulseSource::Table(kind) => Ok((PulseParams { tau: cfg.tau, ..kind.params() }, kind.to_string())),
        PulseSource::File(path) => {
            let f = PulseFile::read(path).with_context(|| format!("reading pulse file {}", path.display()))?;
            Ok((f.params(), f.label.unwrap_or_else(|| path.display().to_string())))
        }
        PulseSource::Optimize => {
            let r = search::optimize_pulse_single(&cfg.cost_model(), cfg.objective, &cfg.ga, cfg.seed, cfg.tau)?;
            Ok((r.best.to_params(cfg.tau)?, format!("optimized {}", cfg.objective)))
        }
    }
}

fn optimize_single(cfg: &RunConfig) -> Result<Outputs> {
    let model = cfg.cost_model();
    let r = search::optimize_pulse_single(&model, cfg.objective, &cfg.ga, cfg.seed, cfg.tau)?;
    let p = r.best.to_params(cfg.tau)?;
    let mut file = PulseFile::new(&p, &cfg.angles());
    file.label = Some(format!("optimized {}", cfg.objective));
    file.objective = Some(cfg.objective.name().to_string());
    file.objective_value = Some(r.best_value);
    let mut out = Outputs::default();
    out.say(format!("{} = {} after {} generations", cfg.objective, fmt_sig(r.best_value), cfg.ga.generations));
    out.file("pulse.json", io::to_json(&file)?);
    out.file("history.csv", io::single_history_csv(&r.history)?);
    Ok(out)
}

fn optimize_multi(cfg: &RunConfig) -> Result<Outputs> {
    let model = cfg.cost_model();
    let set = cfg.objectives;
    let r = search::optimize_pulse_multi(&model, set, &cfg.ga, cfg.seed, cfg.tau)?;
    let names: Vec<String> = set.names().iter().map(|s| s.to_string()).collect();
    let front = FrontFile::new(names.clone(), cfg.tau, r.reference.clone(), &r.front);
    let mut out = Outputs::default();
    let hv = r.history.last().map_or(0.0, |h| h.hypervolume);
    out.say(format!("front: {} points, archive hypervolume {}", r.front.len(), fmt_sig(hv)));
    out.file("front.json", io::to_json(&front)?);
    out.file("history.csv", io::multi_history_csv(&names, &r.history)?);
    Ok(out)
}

fn objective_set_for(names: &[String]) -> Option<ObjectiveSet> {
    [ObjectiveSet::Adr, ObjectiveSet::Sr].into_iter().find(|s| s.names().iter().eq(names.iter()))
}

fn select(cfg: &RunConfig) -> Result<Outputs> {
    let path = cfg.front.as_ref().ok_or_else(|| anyhow!("select needs a front file (config `front` or --front)"))?;
    let front = FrontFile::read(path).with_context(|| format!("reading front {}", path.display()))?;
    let ewm = search::select_from_front(&front.front())?;
    let point = &front.points[ewm.selected];
    let params = point.genome.to_params(front.tau).ok();
    let reevaluated = match (params, objective_set_for(&front.objectives)) {
        (Some(p), Some(set)) => Some(cfg.cost_model().objective_vector(&p, set)?),
        _ => None,
    };
    let report = SelectionFile {
        schema_version: SCHEMA_VERSION,
        indicators: ewm.names.clone(),
        entropies: ewm.entropies.clone(),
        weights: ewm.weights.clone(),
        scores: ewm.scores.clone(),
        selected: ewm.selected,
        selected_genome: point.genome.clone(),
        selected_params: params,
        selected_objectives: point.objectives.clone(),
        reevaluated_objectives: reevaluated,
    };
    let mut out = Outputs::default();
    for (name, w) in ewm.names.iter().zip(&ewm.weights) {
        out.say(format!("weight {name} = {}", fmt_sig(*w)));
    }
    out.say(format!("weights sum = {:.12}", ewm.weights.iter().sum::<f64>()));
    out.say(format!("selected point {} of {}", ewm.selected, front.points.len()));
    out.file("selection.json", io::to_json(&report)?);
    Ok(out)
}

/// `(epsilon, eta, kappa)` points of the configured scan, in output order.
pub fn scan_points(cfg: &RunConfig) -> Vec<(f64, f64, f64)> {
    let s = &cfg.scan;
    let axis = symmetric_linspace(s.points, s.half_width);
    let kappas: Vec<f64> = s.kappa_over_2pi_khz.iter().map(|&k| units::khz(k)).collect();
    let mut pts = Vec::new();
    match s.axes {
        ScanAxes::Kappa => {
            let top = kappas.iter().copied().fold(0.0, f64::max);
            let n = s.points.max(2);
            pts.extend((0..n).map(|k| (s.epsilon, s.eta, top * k as f64 / (n - 1) as f64)));
        }
        axes => {
            for &kappa in &kappas {
                match axes {
                    ScanAxes::Epsilon => pts.extend(axis.iter().map(|&e| (e, s.eta, kappa))),
                    ScanAxes::Eta => pts.extend(axis.iter().map(|&h| (s.epsilon, h, kappa))),
                    _ => pts.extend(axis.iter().flat_map(|&e| axis.iter().map(move |&h| (e, h, kappa)))),
                }
            }
        }
    }
    pts
}

fn scan(cfg: &RunConfig) -> Result<Outputs> {
    let (p, label) = resolve_pulse(cfg)?;
    let points = scan_points(cfg);
    let fid: Vec<f64> = match cfg.gate {
        Gate::X => {
            let model = cfg.cost_model();
            let pp = model.prepare(&p)?;
            points
                .par_iter()
                .map(|&(epsilon, eta, kappa)| model.fidelity_prepared(&pp, ErrorPoint::new(epsilon, eta, kappa)?))
                .collect::<holo_core::Result<_>>()?
        }
        Gate::Cnot => {
            let w = pulse::inverse_engineer(&p, &cfg.angles())?;
            let configs = points.iter().map(|&(_, _, kappa)| cfg.cnot.to_config(kappa)).collect::<Result<Vec<_>>>()?;
            points
                .par_iter()
                .zip(&configs)
                .map(|(&(epsilon, eta, kappa), two)| {
                    ErrorPoint::new(epsilon, eta, kappa)?;
                    cnot::cnot_fidelity(two, &w, epsilon, eta)
                })
                .collect::<holo_core::Result<_>>()?
        }
    };
    let rows: Vec<ScanRow> = points
        .iter()
        .zip(&fid)
        .map(|(&(epsilon, eta, kappa), &fidelity)| ScanRow { epsilon, eta, kappa, fidelity })
        .collect();
    let worst = rows.iter().min_by(|a, b| a.fidelity.total_cmp(&b.fidelity)).ok_or_else(|| anyhow!("empty scan"))?;
    let mut out = Outputs::default();
    out.say(format!(
        "{label}: {} points, min fidelity {} at epsilon {}, eta {}, kappa/2pi {} kHz",
        rows.len(),
        fmt_sig(worst.fidelity),
        fmt_sig(worst.epsilon),
        fmt_sig(worst.eta),
        fmt_sig(units::to_khz(worst.kappa))
    ));
    out.file("scan.csv", io::scan_csv(&rows)?);
    Ok(out)
}

fn evaluate(cfg: &RunConfig) -> Result<Outputs> {
    let (p, label) = resolve_pulse(cfg)?;
    let model = cfg.cost_model();
    let w = pulse::inverse_engineer(&p, &cfg.angles())?;
    let pp = model.prepare(&p)?;
    let gamma = pulse::geometric_phase_unwrapped(&p, PHASE_NODES).rem_euclid(2.0 * PI);
    let cnot_fidelity = match cfg.gate {
        Gate::X => None,
        Gate::Cnot => Some(cnot::cnot_fidelity(&cfg.cnot.to_config(0.0)?, &w, 0.0, 0.0)?),
    };
    if !(pp.leg_peak().is_finite()) {
        bail!("pulse drive is not finite");
    }
    let mut pulse = PulseFile::new(&p, &cfg.angles());
    pulse.label = Some(label.clone());
    let report = EvaluateReport {
        schema_version: SCHEMA_VERSION,
        source: cfg.pulse_source.to_string(),
        pulse,
        j_to: model.j_to(&p)?,
        j_ar: model.j_ar(&p)?,
        j_dr: model.j_dr(&p)?,
        j_dcr: model.j_dcr(&p)?,
        gamma_mod_2pi: gamma,
        max_omega_over_2pi_mhz: units::to_mhz(w.max_omega(CAP_SAMPLES)),
        max_leg_over_2pi_mhz: units::to_mhz(pp.leg_peak()),
        cap_penalty: model.amplitude_cap_penalty(&p)?,
        cnot_fidelity,
        waveform_csv: "waveform.csv".into(),
    };
    let mut out = Outputs::default();
    out.say(format!(
        "{label}: J_to {} J_ar {} J_dr {} J_dcr {} us, gamma {}",
        fmt_sig(report.j_to),
        fmt_sig(report.j_ar),
        fmt_sig(report.j_dr),
        fmt_sig(report.j_dcr),
        fmt_sig(report.gamma_mod_2pi)
    ));
    out.file("report.json", io::to_json(&report)?);
    out.file("waveform.csv", io::waveform_csv(&w, cfg.waveform_samples)?);
    Ok(out)
}
