//! JSON and CSV artifacts.
//!
//! Fields are stored as `{"n": .., "samples": [..]}` (complex samples as
//! `[re, im]` pairs), curves as `{"n": .., "x": [..], "y": [..]}`. Every
//! float is written with 17 significant digits, so re-parsing is bit-exact.

use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::calculus::{ComplexField, PeriodicGrid, RealField};
use crate::eca::curve::EcaCurve;
use crate::error::{Error, Result};
use crate::euclid::curve::EucCurve;
use crate::flow::{FlowSpec, FlowState, InvariantReport, TrajectoryRecord};

/// Version stamp written into manifests and expected in configs.
pub const SCHEMA_VERSION: u32 = 1;

/// Pretty-printing formatter that writes floats as `{:.16e}`.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serialize with two-space indentation and 17 significant digits.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn from_json_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })
}

pub(crate) fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json_string(value);
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&read_text(path)?, &path.display().to_string())
}

fn check_len(n: usize, got: usize) -> Result<()> {
    if n != got {
        return Err(Error::LengthMismatch { expected: n, got });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldData {
    pub n: usize,
    pub samples: Vec<f64>,
}

impl From<&RealField> for FieldData {
    fn from(f: &RealField) -> Self {
        FieldData {
            n: f.n_points(),
            samples: f.samples().to_vec(),
        }
    }
}

impl FieldData {
    pub fn into_field(self) -> Result<RealField> {
        check_len(self.n, self.samples.len())?;
        RealField::new(&PeriodicGrid::new(self.n)?, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFieldData {
    pub n: usize,
    pub samples: Vec<[f64; 2]>,
}

impl From<&ComplexField> for ComplexFieldData {
    fn from(f: &ComplexField) -> Self {
        ComplexFieldData {
            n: f.n_points(),
            samples: f.samples().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexFieldData {
    pub fn into_field(self) -> Result<ComplexField> {
        check_len(self.n, self.samples.len())?;
        let samples = self.samples.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexField::new(&PeriodicGrid::new(self.n)?, samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveData {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CurveData {
    fn from_parts(x: &RealField, y: &RealField) -> Self {
        CurveData {
            n: x.n_points(),
            x: x.samples().to_vec(),
            y: y.samples().to_vec(),
        }
    }

    fn into_parts(self) -> Result<(RealField, RealField)> {
        check_len(self.n, self.x.len())?;
        check_len(self.n, self.y.len())?;
        let grid = PeriodicGrid::new(self.n)?;
        Ok((RealField::new(&grid, self.x)?, RealField::new(&grid, self.y)?))
    }

    pub fn into_eca(self) -> Result<EcaCurve> {
        let (x, y) = self.into_parts()?;
        EcaCurve::new(x, y)
    }

    pub fn into_euc(self) -> Result<EucCurve> {
        let (x, y) = self.into_parts()?;
        EucCurve::new(x, y)
    }
}

impl From<&EcaCurve> for CurveData {
    fn from(g: &EcaCurve) -> Self {
        CurveData::from_parts(g.x(), g.y())
    }
}

impl From<&EucCurve> for CurveData {
    fn from(g: &EucCurve) -> Self {
        CurveData::from_parts(g.x(), g.y())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Curvature,
    ComplexCurvature,
    EcaCurve,
    EuclideanCurve,
}

impl StateKind {
    pub fn of(state: &FlowState) -> Self {
        match state {
            FlowState::Curvature(_) => StateKind::Curvature,
            FlowState::ComplexCurvature(_) => StateKind::ComplexCurvature,
            FlowState::Eca(_) => StateKind::EcaCurve,
            FlowState::Euc(_) => StateKind::EuclideanCurve,
        }
    }
}

pub fn write_state(path: &Path, state: &FlowState) -> Result<()> {
    match state {
        FlowState::Curvature(k) => write_json(path, &FieldData::from(k)),
        FlowState::ComplexCurvature(k) => write_json(path, &ComplexFieldData::from(k)),
        FlowState::Eca(g) => write_json(path, &CurveData::from(g)),
        FlowState::Euc(g) => write_json(path, &CurveData::from(g)),
    }
}

pub fn read_state(path: &Path, kind: StateKind) -> Result<FlowState> {
    Ok(match kind {
        StateKind::Curvature => FlowState::Curvature(read_json::<FieldData>(path)?.into_field()?),
        StateKind::ComplexCurvature => FlowState::ComplexCurvature(read_json::<ComplexFieldData>(path)?.into_field()?),
        StateKind::EcaCurve => FlowState::Eca(read_json::<CurveData>(path)?.into_eca()?),
        StateKind::EuclideanCurve => FlowState::Euc(read_json::<CurveData>(path)?.into_euc()?),
    })
}

/// `manifest.json` of a trajectory directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryManifest {
    pub schema_version: u32,
    pub state_kind: StateKind,
    pub n_points: usize,
    pub spec: FlowSpec,
    pub times: Vec<f64>,
    /// Snapshot file names, relative to the manifest.
    pub snapshots: Vec<String>,
    pub spectral_radius: f64,
    pub max_stable_dt: f64,
    pub invariants: InvariantReport,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const INVARIANTS_CSV: &str = "invariants.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Write `manifest.json`, `invariants.csv` and `snapshots/snap_NNNNN.json`
/// under `dir`.
pub fn write_trajectory(dir: &Path, rec: &TrajectoryRecord) -> Result<()> {
    let first = rec.states.first().expect("a trajectory always holds the initial state");
    let mut snapshots = Vec::with_capacity(rec.states.len());
    for (j, state) in rec.states.iter().enumerate() {
        let name = format!("{SNAPSHOT_DIR}/snap_{j:05}.json");
        write_state(&dir.join(&name), state)?;
        snapshots.push(name);
    }
    let manifest = TrajectoryManifest {
        schema_version: SCHEMA_VERSION,
        state_kind: StateKind::of(first),
        n_points: first.n_points(),
        spec: rec.spec.clone(),
        times: rec.times.clone(),
        snapshots,
        spectral_radius: rec.spectral_radius,
        max_stable_dt: rec.max_stable_dt,
        invariants: rec.invariants.clone(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    write_text(&dir.join(INVARIANTS_CSV), &rec.invariants.to_csv())
}

pub fn read_trajectory(dir: &Path) -> Result<TrajectoryRecord> {
    let manifest: TrajectoryManifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse {
            path: dir.join(MANIFEST_FILE).display().to_string(),
            message: format!("unsupported schema_version {}", manifest.schema_version),
        });
    }
    let states = manifest
        .snapshots
        .iter()
        .map(|name| read_state(&dir.join(name), manifest.state_kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryRecord {
        spec: manifest.spec,
        times: manifest.times,
        states,
        invariants: manifest.invariants,
        spectral_radius: manifest.spectral_radius,
        max_stable_dt: manifest.max_stable_dt,
    })
}
