//! Trajectory CSV/JSON and spectrum JSON, plus atomic file output.
//!
//! CSV floats are written as `{:.16e}` (17 significant digits) and JSON
//! floats in shortest round-trip form, so re-reading a file reproduces every
//! value bit for bit. JSON has no NaN, so undefined coordinates (coordinate
//! time after a horizon crossing) are written as `null`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ksgeo_core::integrator::TurningEvent;
use ksgeo_core::oscillator::{SpectrumLevel, SpectrumResult};
use ksgeo_core::{
    ConstantsOfMotion, IntegrationConfig, OscillatorParams, Sample, SpacetimeParams, Termination,
    Trajectory,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_HEADER: &str = "tau,t,r,theta,phi,tdot,rdot,thetadot,phidot,residual";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0}")]
    Schema(u32),
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `json` for a `.json` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One trajectory sample as written to disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub tau: f64,
    #[serde(with = "nan_as_null")]
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    #[serde(with = "nan_as_null")]
    pub phi: f64,
    #[serde(with = "nan_as_null")]
    pub tdot: f64,
    pub rdot: f64,
    pub thetadot: f64,
    #[serde(with = "nan_as_null")]
    pub phidot: f64,
    pub residual: f64,
}

impl TrajectoryRow {
    pub fn values(&self) -> [f64; 10] {
        [
            self.tau,
            self.t,
            self.r,
            self.theta,
            self.phi,
            self.tdot,
            self.rdot,
            self.thetadot,
            self.phidot,
            self.residual,
        ]
    }

    fn from_values(v: [f64; 10]) -> Self {
        Self {
            tau: v[0],
            t: v[1],
            r: v[2],
            theta: v[3],
            phi: v[4],
            tdot: v[5],
            rdot: v[6],
            thetadot: v[7],
            phidot: v[8],
            residual: v[9],
        }
    }

    /// Bitwise equality, treating every NaN payload as equal.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.values()
            .iter()
            .zip(other.values().iter())
            .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()))
    }
}

impl From<&Sample> for TrajectoryRow {
    fn from(s: &Sample) -> Self {
        let st = &s.state;
        Self {
            tau: st.tau,
            t: st.t,
            r: st.r,
            theta: st.theta,
            phi: st.phi,
            tdot: st.tdot,
            rdot: st.rdot,
            thetadot: st.thetadot,
            phidot: st.phidot,
            residual: s.residual,
        }
    }
}

pub fn rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    traj.samples.iter().map(TrajectoryRow::from).collect()
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 240);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for row in rows {
        for (i, v) in row.values().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == TRAJECTORY_HEADER => {}
        Some((_, header)) => {
            return Err(FormatError::Csv {
                line: 1,
                reason: format!("unexpected header {header:?}"),
            })
        }
        None => {
            return Err(FormatError::Csv {
                line: 1,
                reason: "empty input".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut values = [0.0; 10];
        let mut count = 0;
        for field in line.split(',') {
            if count == 10 {
                count += 1;
                break;
            }
            values[count] = field.trim().parse().map_err(|_| FormatError::Csv {
                line: idx + 1,
                reason: format!("bad number {field:?}"),
            })?;
            count += 1;
        }
        if count != 10 {
            return Err(FormatError::Csv {
                line: idx + 1,
                reason: format!("expected 10 fields, found {count}"),
            });
        }
        rows.push(TrajectoryRow::from_values(values));
    }
    Ok(rows)
}

/// Run information stored next to the samples in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub params: SpacetimeParams,
    pub constants: ConstantsOfMotion,
    pub config: IntegrationConfig,
    pub termination: Termination,
    pub max_normalization_drift: f64,
    /// Radii where `ṙ = 0` on the shell.
    pub turning_points: Vec<f64>,
    pub turning_events: Vec<TurningEvent>,
    pub horizon_crossing_tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub schema_version: u32,
    pub metadata: TrajectoryMetadata,
    pub samples: Vec<TrajectoryRow>,
}

impl TrajectoryFile {
    pub fn new(traj: &Trajectory, config: &IntegrationConfig, turning_points: Vec<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            metadata: TrajectoryMetadata {
                params: traj.params,
                constants: traj.constants,
                config: *config,
                termination: traj.termination,
                max_normalization_drift: traj.max_normalization_drift,
                turning_points,
                turning_events: traj.turning_events.clone(),
                horizon_crossing_tau: traj.horizon_crossing_tau,
            },
            samples: rows(traj),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

pub fn parse_trajectory_json(text: &str) -> Result<TrajectoryFile, FormatError> {
    let file: TrajectoryFile = serde_json::from_str(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(FormatError::Schema(file.schema_version));
    }
    Ok(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub half_width: f64,
    pub points: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub schema_version: u32,
    pub levels: Vec<SpectrumLevel>,
    /// Numeric ground energy minus the claimed `(n + 1)` value at `n = 0`.
    pub claim_comparison: f64,
    pub claimed_ground_energy: f64,
    pub grid: GridRecord,
    pub params: OscillatorParams,
    pub levels_1d: Vec<f64>,
}

impl From<&SpectrumResult> for SpectrumFile {
    fn from(res: &SpectrumResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            levels: res.levels.clone(),
            claim_comparison: res.claim_comparison,
            claimed_ground_energy: 1.0,
            grid: GridRecord {
                half_width: res.grid.half_width(),
                points: res.grid.points(),
                spacing: res.grid.spacing(),
            },
            params: res.params,
            levels_1d: res.levels_1d.clone(),
        }
    }
}

/// Writes `contents` to a temporary file beside `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
