//! Dataset loading, cohort validation, and time-delay embedding.
//!
//! The on-disk format is wide CSV: one row per series with columns
//! `subject_id,group,state,variable,v1..vL`. Ragged lengths are allowed;
//! trailing cells may be empty.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error (row {row}): {msg}")]
    Parse { row: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(
        "series too short: need at least {needed} samples for (d={dim}, tau={tau}), got {got}"
    )]
    TooShort {
        needed: usize,
        got: usize,
        dim: usize,
        tau: usize,
    },
}

/// Cohort group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    CO,
    IPD,
    VaP,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::CO, Group::IPD, Group::VaP];

    pub fn as_str(&self) -> &'static str {
        match self {
            Group::CO => "CO",
            Group::IPD => "IPD",
            Group::VaP => "VaP",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CO" => Ok(Group::CO),
            "IPD" => Ok(Group::IPD),
            "VAP" => Ok(Group::VaP),
            other => Err(format!(
                "unknown group '{other}' (expected CO, IPD, or VaP)"
            )),
        }
    }
}

/// Medication state of a recording. Controls always carry `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum State {
    Off,
    On,
    None,
}

impl State {
    pub fn as_str(&self) -> &'static str {
        match self {
            State::Off => "Off",
            State::On => "On",
            State::None => "None",
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for State {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(State::Off),
            "on" => Ok(State::On),
            "none" => Ok(State::None),
            other => Err(format!(
                "unknown state '{other}' (expected Off, On, or None)"
            )),
        }
    }
}

/// The six foot-clearance variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variable {
    LiftOffAngle,
    MaxHC,
    MaxTESW,
    MinTC,
    MaxTLSW,
    StrikeAngle,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::LiftOffAngle,
        Variable::MaxHC,
        Variable::MaxTESW,
        Variable::MinTC,
        Variable::MaxTLSW,
        Variable::StrikeAngle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variable::LiftOffAngle => "LiftOffAngle",
            Variable::MaxHC => "MaxHC",
            Variable::MaxTESW => "MaxTESW",
            Variable::MinTC => "MinTC",
            Variable::MaxTLSW => "MaxTLSW",
            Variable::StrikeAngle => "StrikeAngle",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "liftoffangle" => Ok(Variable::LiftOffAngle),
            "maxhc" => Ok(Variable::MaxHC),
            "maxtesw" => Ok(Variable::MaxTESW),
            "mintc" => Ok(Variable::MinTC),
            "maxtlsw" => Ok(Variable::MaxTLSW),
            "strikeangle" => Ok(Variable::StrikeAngle),
            other => Err(format!(
                "unknown variable '{other}' (expected one of LiftOffAngle, MaxHC, MaxTESW, MinTC, MaxTLSW, StrikeAngle)"
            )),
        }
    }
}

/// One recorded series: a subject's samples of one variable in one state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitSeries {
    pub subject_id: String,
    pub group: Group,
    pub state: State,
    pub variable: Variable,
    pub values: Vec<f64>,
}

impl GaitSeries {
    /// Delay-embed this series' values into a point cloud.
    pub fn embed(&self, dim: usize, tau: usize) -> Result<PointCloud, IngestError> {
        takens_embed(&self.values, dim, tau)
    }
}

/// A validated collection of series with a consistent subject -> group index.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitDataset {
    series: Vec<GaitSeries>,
    subjects: BTreeMap<String, Group>,
}

/// Minimum samples per series; guarantees the default (d=2, tau=1)
/// embedding yields at least three points.
pub const MIN_SERIES_LEN: usize = 4;

impl GaitDataset {
    pub fn from_series(series: Vec<GaitSeries>) -> Result<Self, IngestError> {
        let mut subjects: BTreeMap<String, Group> = BTreeMap::new();
        let mut seen: std::collections::HashSet<(String, Variable, State)> =
            std::collections::HashSet::new();

        for s in &series {
            if s.values.len() < MIN_SERIES_LEN {
                return Err(IngestError::Validation(format!(
                    "series ({}, {}, {}) has {} samples, minimum is {MIN_SERIES_LEN}",
                    s.subject_id,
                    s.variable,
                    s.state,
                    s.values.len()
                )));
            }
            if let Some(bad) = s.values.iter().find(|v| !v.is_finite()) {
                return Err(IngestError::Validation(format!(
                    "series ({}, {}, {}) contains a non-finite sample {bad}",
                    s.subject_id, s.variable, s.state
                )));
            }
            let none_state = s.state == State::None;
            let control = s.group == Group::CO;
            if none_state != control {
                return Err(IngestError::Validation(format!(
                    "subject {} has group {} with state {}; state must be None exactly for controls",
                    s.subject_id, s.group, s.state
                )));
            }
            if !seen.insert((s.subject_id.clone(), s.variable, s.state)) {
                return Err(IngestError::Validation(format!(
                    "duplicate series for ({}, {}, {})",
                    s.subject_id, s.variable, s.state
                )));
            }
            match subjects.get(&s.subject_id) {
                Some(&g) if g != s.group => {
                    return Err(IngestError::Validation(format!(
                        "subject {} listed under both {} and {}",
                        s.subject_id, g, s.group
                    )));
                }
                Some(_) => {}
                None => {
                    subjects.insert(s.subject_id.clone(), s.group);
                }
            }
        }

        Ok(GaitDataset { series, subjects })
    }

    pub fn series(&self) -> &[GaitSeries] {
        &self.series
    }

    /// Subject -> group index, ordered by subject id.
    pub fn subjects(&self) -> &BTreeMap<String, Group> {
        &self.subjects
    }

    /// Subject ids of one group, in id order.
    pub fn subjects_in(&self, group: Group) -> Vec<&str> {
        self.subjects
            .iter()
            .filter(|(_, &g)| g == group)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn group_counts(&self) -> BTreeMap<Group, usize> {
        let mut counts = BTreeMap::new();
        for &g in self.subjects.values() {
            *counts.entry(g).or_insert(0) += 1;
        }
        counts
    }

    pub fn find(&self, subject_id: &str, variable: Variable, state: State) -> Option<&GaitSeries> {
        self.series
            .iter()
            .find(|s| s.subject_id == subject_id && s.variable == variable && s.state == state)
    }
}

/// Delay-embedded point cloud: `len` points of dimension `dim`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn from_points(points: &[Vec<f64>]) -> Self {
        let dim = points.first().map_or(0, |p| p.len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            assert_eq!(p.len(), dim, "inconsistent point dimension");
            coords.extend_from_slice(p);
        }
        PointCloud { coords, dim }
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// New cloud with every coordinate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> PointCloud {
        PointCloud {
            coords: self.coords.iter().map(|x| x * c).collect(),
            dim: self.dim,
        }
    }
}

/// Time-delay embedding: point i = (x_i, x_{i+tau}, ..., x_{i+(d-1)tau}).
///
/// Yields L - (d-1)*tau points for a series of length L.
pub fn takens_embed(values: &[f64], dim: usize, tau: usize) -> Result<PointCloud, IngestError> {
    if dim == 0 || tau == 0 {
        return Err(IngestError::Validation(format!(
            "embedding parameters must be positive, got (d={dim}, tau={tau})"
        )));
    }
    let span = (dim - 1) * tau;
    let needed = span + 2;
    if values.len() < needed {
        return Err(IngestError::TooShort {
            needed,
            got: values.len(),
            dim,
            tau,
        });
    }
    let count = values.len() - span;
    let mut coords = Vec::with_capacity(count * dim);
    for i in 0..count {
        for j in 0..dim {
            coords.push(values[i + j * tau]);
        }
    }
    Ok(PointCloud { coords, dim })
}

/// Per-series z-scoring, the optional pre-embedding rescaling toggle.
/// A constant series comes back as zeros.
pub fn standardize(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

const HEADER_FIXED: [&str; 4] = ["subject_id", "group", "state", "variable"];

/// Read a dataset from wide CSV.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<GaitDataset, IngestError> {
    let file = std::fs::File::open(path)?;
    read_dataset(file)
}

pub fn read_dataset<R: io::Read>(reader: R) -> Result<GaitDataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Parse {
            row: 1,
            msg: e.to_string(),
        })?
        .clone();
    if headers.len() < HEADER_FIXED.len() {
        return Err(IngestError::Parse {
            row: 1,
            msg: format!("header must start with {}", HEADER_FIXED.join(",")),
        });
    }
    for (i, expected) in HEADER_FIXED.iter().enumerate() {
        if !headers[i].trim().eq_ignore_ascii_case(expected) {
            return Err(IngestError::Parse {
                row: 1,
                msg: format!(
                    "header column {} is '{}', expected '{expected}'",
                    i + 1,
                    &headers[i]
                ),
            });
        }
    }

    let mut series = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2; // 1-based, after header
        let record = record.map_err(|e| IngestError::Parse {
            row,
            msg: e.to_string(),
        })?;
        if record.len() < HEADER_FIXED.len() + 1 {
            return Err(IngestError::Parse {
                row,
                msg: "row needs subject_id, group, state, variable, and at least one value".into(),
            });
        }
        let subject_id = record[0].trim().to_string();
        if subject_id.is_empty() {
            return Err(IngestError::Parse {
                row,
                msg: "empty subject_id".into(),
            });
        }
        let group: Group = record[1]
            .parse()
            .map_err(|msg| IngestError::Parse { row, msg })?;
        let state: State = record[2]
            .parse()
            .map_err(|msg| IngestError::Parse { row, msg })?;
        let variable: Variable = record[3]
            .parse()
            .map_err(|msg| IngestError::Parse { row, msg })?;

        // Values run until the first empty cell; everything after must be empty.
        let mut values = Vec::new();
        let mut in_padding = false;
        for (ci, cell) in record.iter().enumerate().skip(HEADER_FIXED.len()) {
            let cell = cell.trim();
            if cell.is_empty() {
                in_padding = true;
                continue;
            }
            if in_padding {
                return Err(IngestError::Parse {
                    row,
                    msg: format!("non-empty cell in column {} after empty padding", ci + 1),
                });
            }
            let v: f64 = cell.parse().map_err(|_| IngestError::Parse {
                row,
                msg: format!("'{cell}' is not a number"),
            })?;
            values.push(v);
        }
        if values.is_empty() {
            return Err(IngestError::Parse {
                row,
                msg: "row has no sample values".into(),
            });
        }
        series.push(GaitSeries {
            subject_id,
            group,
            state,
            variable,
            values,
        });
    }
    if series.is_empty() {
        return Err(IngestError::Parse {
            row: 1,
            msg: "dataset contains no series".into(),
        });
    }
    GaitDataset::from_series(series)
}

/// Write a dataset in the same wide CSV format `load_dataset` reads.
pub fn save_dataset(dataset: &GaitDataset, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let file = std::fs::File::create(path)?;
    write_dataset(dataset, file)
}

pub fn write_dataset<W: io::Write>(dataset: &GaitDataset, writer: W) -> Result<(), IngestError> {
    let max_len = dataset
        .series
        .iter()
        .map(|s| s.values.len())
        .max()
        .unwrap_or(0);
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(writer);

    let mut header: Vec<String> = HEADER_FIXED.iter().map(|s| s.to_string()).collect();
    for i in 1..=max_len {
        header.push(format!("v{i}"));
    }
    wtr.write_record(&header).map_err(csv_io)?;

    for s in &dataset.series {
        let mut record: Vec<String> = vec![
            s.subject_id.clone(),
            s.group.to_string(),
            s.state.to_string(),
            s.variable.to_string(),
        ];
        record.extend(s.values.iter().map(|v| v.to_string()));
        record.extend(std::iter::repeat_n(String::new(), max_len - s.values.len()));
        wtr.write_record(&record).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> IngestError {
    IngestError::Parse {
        row: 0,
        msg: e.to_string(),
    }
}
