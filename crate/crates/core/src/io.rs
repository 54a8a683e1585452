//! File formats: pulse parameters, Pareto fronts, selection reports and CSV
//! tables.
//!
//! Every file carries `schema_version`. Floats are written with at most 12
//! significant digits and files are replaced atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cost::ObjectiveVector;
use crate::error::{Error, Result};
use crate::moo::{Genome, MultiGenerationStats, ParetoFront, ParetoPoint, SingleGenerationStats};
use crate::pulse::{GateAngles, PulseParams, Waveforms};
use crate::units;

pub const SCHEMA_VERSION: u32 = 1;
pub const SIG_DIGITS: usize = 12;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Rounds to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text of `round_sig(x)`; `inf`, `-inf`, `nan` for non-finite.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:?}", round_sig(x))
    }
}

/// Serde adapter for floats that may be infinite.
pub mod float_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::fmt_sig(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn check_schema(found: u32, what: &str) -> Result<()> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Format(format!("{what}: schema_version {found}, expected {SCHEMA_VERSION}")))
    }
}

/// CSV text: a `# schema_version: N` line, the header, then the rows.
pub fn csv_string<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Format(format!("row of {} fields under a {}-column header", r.len(), header.len())));
        }
        w.write_record(&r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut out = format!("# schema_version: {SCHEMA_VERSION}\n");
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Format(e.to_string()))?);
    Ok(out)
}

/// Parsed CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self> {
        let version = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# schema_version:"))
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::Format("CSV lacks a schema_version line".into()))?;
        check_schema(version, "CSV")?;
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Column `name` parsed as floats.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .map(|r| r[k].parse::<f64>().map_err(|e| Error::Format(format!("{name}: {e}"))))
            .collect()
    }
}

/// Pulse parameters with the gate they implement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub a_alpha: f64,
    pub b_alpha: u32,
    pub c_alpha: u32,
    pub a_beta: f64,
    pub b_beta: f64,
    pub c_beta: u32,
    pub tau: f64,
    pub gate_angles: GateAngles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_value: Option<f64>,
}

impl PulseFile {
    pub fn new(p: &PulseParams, angles: &GateAngles) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            a_alpha: p.a_alpha,
            b_alpha: p.b_alpha,
            c_alpha: p.c_alpha,
            a_beta: p.a_beta,
            b_beta: p.b_beta,
            c_beta: p.c_beta,
            tau: p.tau,
            gate_angles: *angles,
            label: None,
            objective: None,
            objective_value: None,
        }
    }

    pub fn params(&self) -> PulseParams {
        PulseParams {
            a_alpha: self.a_alpha,
            b_alpha: self.b_alpha,
            c_alpha: self.c_alpha,
            a_beta: self.a_beta,
            b_beta: self.b_beta,
            c_beta: self.c_beta,
            tau: self.tau,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f: Self = read_json(path)?;
        check_schema(f.schema_version, "pulse file")?;
        f.params().validate()?;
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Serialized Pareto front of a pulse optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontFile {
    pub schema_version: u32,
    pub objectives: Vec<String>,
    /// Gate time of every genome.
    pub tau: f64,
    /// Hypervolume reference point, if known.
    #[serde(default)]
    pub reference: Vec<f64>,
    pub points: Vec<ParetoPoint>,
}

impl FrontFile {
    pub fn new(objectives: Vec<String>, tau: f64, reference: Vec<f64>, front: &ParetoFront) -> Self {
        Self { schema_version: SCHEMA_VERSION, objectives, tau, reference, points: front.points.clone() }
    }

    pub fn front(&self) -> ParetoFront {
        ParetoFront { points: self.points.clone() }
    }

    /// Schema, arity and name consistency of every point.
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version, "front file")?;
        if self.points.is_empty() {
            return Err(Error::Format("front file has no points".into()));
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.objectives.names != self.objectives || p.objectives.values.len() != self.objectives.len() {
                return Err(Error::Format(format!("point {i}: objectives do not match {:?}", self.objectives)));
            }
            if !p.objectives.is_finite() {
                return Err(Error::Format(format!("point {i}: non-finite objective")));
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f: Self = read_json(path)?;
        f.validate()?;
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Entropy-weight selection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionFile {
    pub schema_version: u32,
    pub indicators: Vec<String>,
    pub entropies: Vec<f64>,
    pub weights: Vec<f64>,
    pub scores: Vec<f64>,
    pub selected: usize,
    pub selected_genome: Genome,
    pub selected_params: Option<PulseParams>,
    /// Objectives as stored in the front.
    pub selected_objectives: ObjectiveVector,
    /// Objectives recomputed from the selected genome.
    pub reevaluated_objectives: Option<ObjectiveVector>,
}

pub const SCAN_HEADER: [&str; 4] = ["epsilon", "eta", "kappa_over_2pi_kHz", "fidelity"];

/// One point of a robustness scan; `kappa` in rad/us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub epsilon: f64,
    pub eta: f64,
    pub kappa: f64,
    pub fidelity: f64,
}

pub fn scan_csv(rows: &[ScanRow]) -> Result<String> {
    csv_string(
        &SCAN_HEADER,
        rows.iter().map(|r| vec![fmt_sig(r.epsilon), fmt_sig(r.eta), fmt_sig(units::to_khz(r.kappa)), fmt_sig(r.fidelity)]),
    )
}

pub const WAVEFORM_HEADER: [&str; 4] = ["t_us", "Omega_over_2pi_MHz", "Phi0_rad", "Delta_over_2pi_MHz"];

/// `n` uniform samples of the drive over `[0, tau]`, phase unwrapped.
pub fn waveform_csv(w: &Waveforms, n: usize) -> Result<String> {
    csv_string(
        &WAVEFORM_HEADER,
        w.sampled(n)
            .into_iter()
            .map(|s| vec![fmt_sig(s.t), fmt_sig(units::to_mhz(s.omega)), fmt_sig(s.phi0), fmt_sig(units::to_mhz(s.delta))]),
    )
}

pub fn single_history_csv(history: &[SingleGenerationStats]) -> Result<String> {
    csv_string(
        &["gen", "best", "mean", "evaluations"],
        history.iter().map(|h| vec![h.generation.to_string(), fmt_sig(h.best), fmt_sig(h.mean), h.evaluations.to_string()]),
    )
}

pub fn multi_history_csv(names: &[String], history: &[MultiGenerationStats]) -> Result<String> {
    let mut header = vec!["gen".to_string()];
    header.extend(names.iter().map(|n| format!("best_{n}")));
    header.extend(["hypervolume", "archive_size", "evaluations"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_string(
        &header,
        history.iter().map(|h| {
            let mut r = vec![h.generation.to_string()];
            r.extend(h.best.iter().map(|&x| fmt_sig(x)));
            r.extend([fmt_sig(h.hypervolume), h.archive_size.to_string(), h.evaluations.to_string()]);
            r
        }),
    )
}
