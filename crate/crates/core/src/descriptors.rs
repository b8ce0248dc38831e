//! Fixed-length feature vectors from persistence diagrams.
//!
//! All three descriptors sample a shared grid of `nbins` evenly spaced
//! filtration values per homology degree and concatenate the H0 block with
//! the H1 block, so the default (nbins = 25, degrees 0 and 1) yields 50
//! values per descriptor.
//!
//! Aliveness conventions: Betti curves count pairs with b <= t < d (strict
//! at death); landscape tents are the closed piecewise-linear hat over
//! [b, d]. Diagrams must be capped before vectorization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::{PersistenceDiagram, PersistencePair};
use crate::ingest::{State, Variable};

#[derive(Error, Debug)]
pub enum DescriptorError {
    #[error("nbins must be positive")]
    ZeroBins,
    #[error("descriptor degree {0} unsupported, only 0 and 1 are vectorized")]
    Degree(usize),
    #[error("grid fitted for degree {grid} applied as the degree-{expected} block")]
    GridMismatch { grid: usize, expected: usize },
    #[error("cannot concatenate {0} with {1} descriptors")]
    KindMismatch(DescriptorKind, DescriptorKind),
    #[error("cannot concatenate descriptors of subjects '{0}' and '{1}'")]
    SubjectMismatch(String, String),
    #[error("nothing to concatenate")]
    EmptyConcat,
}

/// Descriptor family: Betti curve, persistence landscape, silhouette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DescriptorKind {
    BC,
    PL,
    SL,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 3] =
        [DescriptorKind::BC, DescriptorKind::PL, DescriptorKind::SL];

    pub fn as_str(&self) -> &'static str {
        match self {
            DescriptorKind::BC => "BC",
            DescriptorKind::PL => "PL",
            DescriptorKind::SL => "SL",
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DescriptorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BC" => Ok(DescriptorKind::BC),
            "PL" => Ok(DescriptorKind::PL),
            "SL" => Ok(DescriptorKind::SL),
            other => Err(format!(
                "unknown descriptor '{other}' (expected BC, PL, or SL)"
            )),
        }
    }
}

/// Tunables for the non-counting descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorParams {
    pub landscape_layer: usize,
    pub silhouette_p: f64,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        DescriptorParams {
            landscape_layer: 1,
            silhouette_p: 1.0,
        }
    }
}

/// `nbins` evenly spaced sample points from t_min to t_max inclusive, tied
/// to one homology degree. A degenerate grid ([0, 0]) stands in when no
/// diagram has pairs at that degree; every descriptor then reads zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    t_min: f64,
    t_max: f64,
    nbins: usize,
    degree: usize,
}

impl SamplingGrid {
    pub fn degenerate(degree: usize, nbins: usize) -> Self {
        SamplingGrid {
            t_min: 0.0,
            t_max: 0.0,
            nbins,
            degree,
        }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn nbins(&self) -> usize {
        self.nbins
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.nbins <= 1 {
            self.t_min
        } else {
            self.t_min + (self.t_max - self.t_min) * i as f64 / (self.nbins - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nbins).map(|i| self.point(i)).collect()
    }
}

/// Fit a grid over the pairs of one degree across a fold's diagrams:
/// t_min = minimum birth, t_max = maximum (capped) death. No pairs at the
/// degree anywhere yields the degenerate [0, 0] grid.
pub fn fit_grid<'a>(
    diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>,
    degree: usize,
    nbins: usize,
) -> Result<SamplingGrid, DescriptorError> {
    if nbins == 0 {
        return Err(DescriptorError::ZeroBins);
    }
    if degree > 1 {
        return Err(DescriptorError::Degree(degree));
    }
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for dgm in diagrams {
        debug_assert!(dgm.is_capped(), "fit_grid expects capped diagrams");
        for p in dgm.degree(degree) {
            t_min = t_min.min(p.birth);
            t_max = t_max.max(p.death);
        }
    }
    if t_min > t_max {
        return Ok(SamplingGrid::degenerate(degree, nbins));
    }
    Ok(SamplingGrid {
        t_min,
        t_max,
        nbins,
        degree,
    })
}

/// The tent over one pair: rises from the birth, peaks at (d-b)/2 over the
/// midpoint, falls to zero at the death.
fn tent(p: &PersistencePair, t: f64) -> f64 {
    if t < p.birth || t > p.death {
        return 0.0;
    }
    let mid = 0.5 * (p.birth + p.death);
    if t <= mid {
        t - p.birth
    } else {
        p.death - t
    }
}

/// Betti curve block: the number of pairs alive (b <= t < d) at each grid
/// point, counted by binary search over sorted births and deaths.
pub fn betti_curve(dgm: &PersistenceDiagram, grid: &SamplingGrid) -> Vec<f64> {
    let pairs = dgm.degree(grid.degree);
    let mut births: Vec<f64> = pairs.iter().map(|p| p.birth).collect();
    let mut deaths: Vec<f64> = pairs.iter().map(|p| p.death).collect();
    births.sort_by(f64::total_cmp);
    deaths.sort_by(f64::total_cmp);
    (0..grid.nbins)
        .map(|i| {
            let t = grid.point(i);
            let born = births.partition_point(|&b| b <= t);
            let dead = deaths.partition_point(|&d| d <= t);
            (born - dead) as f64
        })
        .collect()
}

/// Landscape block: the `layer`-th largest tent value at each grid point
/// (zero when fewer than `layer` pairs exist).
pub fn landscape(dgm: &PersistenceDiagram, grid: &SamplingGrid, layer: usize) -> Vec<f64> {
    debug_assert!(layer >= 1, "landscape layers are 1-based");
    let pairs = dgm.degree(grid.degree);
    (0..grid.nbins)
        .map(|i| {
            let t = grid.point(i);
            let mut values: Vec<f64> = pairs.iter().map(|p| tent(p, t)).collect();
            values.sort_by(|a, b| b.total_cmp(a));
            values.get(layer - 1).copied().unwrap_or(0.0)
        })
        .collect()
}

/// Power-weighted silhouette block: the persistence-weighted average of
/// tents, weights |d - b|^p. Weights are normalized by the maximum
/// persistence before exponentiation so large p cannot overflow; the
/// quotient is unchanged.
pub fn silhouette(dgm: &PersistenceDiagram, grid: &SamplingGrid, p: f64) -> Vec<f64> {
    debug_assert!(p > 0.0, "silhouette power must be positive");
    let pairs = dgm.degree(grid.degree);
    let max_pers = pairs
        .iter()
        .map(|pr| pr.persistence())
        .fold(0.0_f64, f64::max);
    if max_pers <= 0.0 {
        return vec![0.0; grid.nbins];
    }
    let weights: Vec<f64> = pairs
        .iter()
        .map(|pr| (pr.persistence() / max_pers).powf(p))
        .collect();
    let total: f64 = weights.iter().sum();
    (0..grid.nbins)
        .map(|i| {
            let t = grid.point(i);
            let acc: f64 = pairs
                .iter()
                .zip(&weights)
                .map(|(pr, w)| w * tent(pr, t))
                .sum();
            acc / total
        })
        .collect()
}

/// Where a feature vector came from: one subject, the variables and states
/// whose series fed it, in concatenation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub subject_id: String,
    pub variables: Vec<Variable>,
    pub states: Vec<State>,
}

/// A fixed-length feature vector: H0 block then H1 block per variable/state.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector {
    pub kind: DescriptorKind,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl DescriptorVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Vectorize one capped diagram on per-degree grids: H0 block followed by
/// H1 block, nbins values each.
pub fn vectorize(
    dgm: &PersistenceDiagram,
    grids: &[SamplingGrid],
    kind: DescriptorKind,
    params: &DescriptorParams,
    provenance: Provenance,
) -> Result<DescriptorVector, DescriptorError> {
    let mut values = Vec::with_capacity(grids.iter().map(|g| g.nbins).sum());
    for (expected, grid) in grids.iter().enumerate() {
        if grid.degree != expected {
            return Err(DescriptorError::GridMismatch {
                grid: grid.degree,
                expected,
            });
        }
        let block = match kind {
            DescriptorKind::BC => betti_curve(dgm, grid),
            DescriptorKind::PL => landscape(dgm, grid, params.landscape_layer),
            DescriptorKind::SL => silhouette(dgm, grid, params.silhouette_p),
        };
        values.extend(block);
    }
    Ok(DescriptorVector {
        kind,
        values,
        provenance,
    })
}

/// Concatenate per-variable (or per-state) vectors of one subject into a
/// single feature vector. All inputs must share kind and subject.
pub fn concat_variables(vectors: &[DescriptorVector]) -> Result<DescriptorVector, DescriptorError> {
    let first = vectors.first().ok_or(DescriptorError::EmptyConcat)?;
    let mut values = Vec::with_capacity(vectors.iter().map(|v| v.len()).sum());
    let mut variables = Vec::new();
    let mut states = Vec::new();
    for v in vectors {
        if v.kind != first.kind {
            return Err(DescriptorError::KindMismatch(first.kind, v.kind));
        }
        if v.provenance.subject_id != first.provenance.subject_id {
            return Err(DescriptorError::SubjectMismatch(
                first.provenance.subject_id.clone(),
                v.provenance.subject_id.clone(),
            ));
        }
        values.extend_from_slice(&v.values);
        for &var in &v.provenance.variables {
            if !variables.contains(&var) {
                variables.push(var);
            }
        }
        for &st in &v.provenance.states {
            if !states.contains(&st) {
                states.push(st);
            }
        }
    }
    Ok(DescriptorVector {
        kind: first.kind,
        values,
        provenance: Provenance {
            subject_id: first.provenance.subject_id.clone(),
            variables,
            states,
        },
    })
}
