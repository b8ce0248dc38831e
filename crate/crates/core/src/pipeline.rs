//! End-to-end task evaluation: dataset -> delay embedding -> persistence
//! diagrams -> fold-fitted descriptor vectors -> seeded forest under
//! subject-wise LOOCV.
//!
//! Diagrams are computed once per (subject, variable, state); only the
//! sampling grids are re-fitted per fold, on the training subjects alone
//! (the `GridFit::All` variant exists for leakage comparison and fits on
//! the whole cohort).

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    loocv, ClassifyError, Cohort, CohortSubject, EvaluationReport, FoldFeatures, FoldFeaturizer,
    ForestParams,
};
use crate::descriptors::{
    concat_variables, fit_grid, vectorize, DescriptorError, DescriptorKind, DescriptorParams,
    Provenance, SamplingGrid,
};
use crate::homology::{
    cap_infinite, pairwise_distances, rips_persistence, HomologyError, PersistenceDiagram,
};
use crate::ingest::{standardize, takens_embed, GaitDataset, Group, IngestError, State, Variable};

#[derive(Error, Debug)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("config error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
}

macro_rules! fmt_as_str {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

macro_rules! serde_via_string {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// The two groups of a classification task, first-named first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskPair {
    CoVsIpd,
    CoVsVap,
    IpdVsVap,
}

impl TaskPair {
    pub const ALL: [TaskPair; 3] = [TaskPair::CoVsIpd, TaskPair::CoVsVap, TaskPair::IpdVsVap];

    pub fn groups(&self) -> (Group, Group) {
        match self {
            TaskPair::CoVsIpd => (Group::CO, Group::IPD),
            TaskPair::CoVsVap => (Group::CO, Group::VaP),
            TaskPair::IpdVsVap => (Group::IPD, Group::VaP),
        }
    }

    /// The scored class: the disease group against controls, otherwise the
    /// first-named group.
    pub fn positive(&self) -> Group {
        match self {
            TaskPair::CoVsIpd => Group::IPD,
            TaskPair::CoVsVap => Group::VaP,
            TaskPair::IpdVsVap => Group::IPD,
        }
    }

    pub fn negative(&self) -> Group {
        let (a, b) = self.groups();
        if self.positive() == a {
            b
        } else {
            a
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskPair::CoVsIpd => "CO-vs-IPD",
            TaskPair::CoVsVap => "CO-vs-VaP",
            TaskPair::IpdVsVap => "IPD-vs-VaP",
        }
    }
}

fmt_as_str!(TaskPair);

impl FromStr for TaskPair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "co-vs-ipd" => Ok(TaskPair::CoVsIpd),
            "co-vs-vap" => Ok(TaskPair::CoVsVap),
            "ipd-vs-vap" => Ok(TaskPair::IpdVsVap),
            other => Err(format!(
                "unknown task '{other}' (expected CO-vs-IPD, CO-vs-VaP, or IPD-vs-VaP)"
            )),
        }
    }
}

serde_via_string!(TaskPair);

/// Which medication states feed the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatePolicy {
    Off,
    On,
    OffOn,
}

impl StatePolicy {
    /// The state slots concatenated per subject, in order.
    pub fn slots(&self) -> &'static [State] {
        match self {
            StatePolicy::Off => &[State::Off],
            StatePolicy::On => &[State::On],
            StatePolicy::OffOn => &[State::Off, State::On],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StatePolicy::Off => "Off",
            StatePolicy::On => "On",
            StatePolicy::OffOn => "Off+On",
        }
    }
}

fmt_as_str!(StatePolicy);

impl FromStr for StatePolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(StatePolicy::Off),
            "on" => Ok(StatePolicy::On),
            "off+on" | "offon" => Ok(StatePolicy::OffOn),
            other => Err(format!(
                "unknown state policy '{other}' (expected Off, On, or Off+On)"
            )),
        }
    }
}

serde_via_string!(StatePolicy);

/// Grid-fitting scope within each LOOCV fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFit {
    /// Fit on the training subjects only (leakage-free default).
    Fold,
    /// Fit on the whole cohort once; kept for comparison runs.
    All,
}

impl GridFit {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridFit::Fold => "fold",
            GridFit::All => "all",
        }
    }
}

fmt_as_str!(GridFit);

impl FromStr for GridFit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fold" => Ok(GridFit::Fold),
            "all" => Ok(GridFit::All),
            other => Err(format!(
                "unknown grid-fit scope '{other}' (expected fold or all)"
            )),
        }
    }
}

serde_via_string!(GridFit);

/// What to classify: group pair, state policy, variables, descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub pair: TaskPair,
    pub policy: StatePolicy,
    pub variables: Vec<Variable>,
    pub descriptor: DescriptorKind,
}

impl TaskSpec {
    fn validate(&self) -> Result<(), PipelineError> {
        if self.variables.is_empty() {
            return Err(PipelineError::Config("no variables selected".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v) {
                return Err(PipelineError::Config(format!("variable {v} listed twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub tau: usize,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams { dim: 2, tau: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub embedding: EmbeddingParams,
    pub nbins: usize,
    pub descriptor: DescriptorParams,
    pub forest: ForestParams,
    pub grid_fit: GridFit,
    /// Optional per-series z-scoring before embedding (off by default; the
    /// source pipeline does not state any rescaling).
    pub standardize: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            embedding: EmbeddingParams::default(),
            nbins: 25,
            descriptor: DescriptorParams::default(),
            forest: ForestParams::default(),
            grid_fit: GridFit::Fold,
            standardize: false,
        }
    }
}

/// One concatenation slot: a variable in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub variable: Variable,
    pub slot: State,
}

/// Which series a subject contributes to a block: controls always their
/// single None-state recording, patients the slot's state.
fn series_state(group: Group, slot: State) -> State {
    if group == Group::CO {
        State::None
    } else {
        slot
    }
}

#[derive(Debug, Clone)]
pub struct SubjectInfo {
    pub id: String,
    pub group: Group,
}

/// Precomputed diagrams for one task cohort plus the fold-scoped grid
/// fitting and vectorization that [`loocv`] drives.
pub struct TopoFeaturizer {
    subjects: Vec<SubjectInfo>,
    blocks: Vec<Block>,
    /// diagrams[subject][block], capped.
    diagrams: Vec<Vec<PersistenceDiagram>>,
    nbins: usize,
    kind: DescriptorKind,
    dparams: DescriptorParams,
    grid_fit: GridFit,
}

impl TopoFeaturizer {
    pub fn build(
        dataset: &GaitDataset,
        spec: &TaskSpec,
        params: &PipelineParams,
    ) -> Result<Self, PipelineError> {
        spec.validate()?;
        if params.nbins == 0 {
            return Err(PipelineError::Config("nbins must be positive".into()));
        }

        // Positive group first, ids sorted within each group, so evaluation
        // order is independent of file row order.
        let mut subjects = Vec::new();
        for group in [spec.pair.positive(), spec.pair.negative()] {
            let ids = dataset.subjects_in(group);
            if ids.len() < 2 {
                return Err(PipelineError::Validation(format!(
                    "task {} needs at least two {group} subjects, dataset has {}",
                    spec.pair,
                    ids.len()
                )));
            }
            for id in ids {
                subjects.push(SubjectInfo {
                    id: id.to_string(),
                    group,
                });
            }
        }

        // State-major block order: all variables in the first slot, then all
        // variables in the next (the Off vector then the On vector).
        let blocks: Vec<Block> = spec
            .policy
            .slots()
            .iter()
            .flat_map(|&slot| {
                spec.variables
                    .iter()
                    .map(move |&variable| Block { variable, slot })
            })
            .collect();

        let diagrams = subjects
            .par_iter()
            .map(
                |subject| -> Result<Vec<PersistenceDiagram>, PipelineError> {
                    blocks
                        .iter()
                        .map(|block| {
                            let state = series_state(subject.group, block.slot);
                            let series = dataset
                                .find(&subject.id, block.variable, state)
                                .ok_or_else(|| {
                                    PipelineError::Validation(format!(
                                        "subject {} is missing the ({}, {}) series",
                                        subject.id, block.variable, state
                                    ))
                                })?;
                            let values = if params.standardize {
                                std::borrow::Cow::Owned(standardize(&series.values))
                            } else {
                                std::borrow::Cow::Borrowed(&series.values[..])
                            };
                            let cloud =
                                takens_embed(&values, params.embedding.dim, params.embedding.tau)?;
                            let dm = pairwise_distances(&cloud)?;
                            Ok(cap_infinite(&rips_persistence(&dm, 1)?))
                        })
                        .collect()
                },
            )
            .collect::<Result<Vec<_>, _>>()?;

        Ok(TopoFeaturizer {
            subjects,
            blocks,
            diagrams,
            nbins: params.nbins,
            kind: spec.descriptor,
            dparams: params.descriptor,
            grid_fit: params.grid_fit,
        })
    }

    pub fn subjects(&self) -> &[SubjectInfo] {
        &self.subjects
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Capped diagrams of one subject, one per block.
    pub fn subject_diagrams(&self, subject: usize) -> &[PersistenceDiagram] {
        &self.diagrams[subject]
    }

    /// Per-block [H0, H1] grids fitted over the given subjects' diagrams.
    pub fn fit_block_grids(
        &self,
        subject_indices: &[usize],
    ) -> Result<Vec<[SamplingGrid; 2]>, DescriptorError> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(b, _)| {
                let dgms = subject_indices.iter().map(|&s| &self.diagrams[s][b]);
                Ok([
                    fit_grid(dgms.clone(), 0, self.nbins)?,
                    fit_grid(dgms, 1, self.nbins)?,
                ])
            })
            .collect()
    }

    /// One subject's feature vector on the given grids: per-block
    /// vectorization concatenated in block order.
    pub fn subject_vector(
        &self,
        subject: usize,
        grids: &[[SamplingGrid; 2]],
    ) -> Result<Vec<f64>, DescriptorError> {
        let info = &self.subjects[subject];
        let parts: Vec<_> = self
            .blocks
            .iter()
            .zip(grids)
            .enumerate()
            .map(|(b, (block, block_grids))| {
                vectorize(
                    &self.diagrams[subject][b],
                    block_grids,
                    self.kind,
                    &self.dparams,
                    Provenance {
                        subject_id: info.id.clone(),
                        variables: vec![block.variable],
                        states: vec![series_state(info.group, block.slot)],
                    },
                )
            })
            .collect::<Result<_, _>>()?;
        Ok(concat_variables(&parts)?.values)
    }

    pub fn feature_length(&self) -> usize {
        self.blocks.len() * self.nbins * 2
    }

    /// Column names for the feature-matrix dump: `BC_H0_00 .. BC_H1_24`
    /// for a single block, prefixed with `variable_state_` when several
    /// blocks are concatenated.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.feature_length());
        for block in &self.blocks {
            for degree in 0..2 {
                for bin in 0..self.nbins {
                    let base = format!("{}_H{degree}_{bin:02}", self.kind);
                    if self.blocks.len() == 1 {
                        names.push(base);
                    } else {
                        names.push(format!("{}_{}_{base}", block.variable, block.slot));
                    }
                }
            }
        }
        names
    }

    fn all_indices(&self) -> Vec<usize> {
        (0..self.subjects.len()).collect()
    }

    /// Whole-cohort feature matrix on grids fitted over everyone; the dump
    /// view, not the fold view.
    pub fn featurize_all(&self) -> Result<Vec<Vec<f64>>, DescriptorError> {
        let grids = self.fit_block_grids(&self.all_indices())?;
        (0..self.subjects.len())
            .map(|s| self.subject_vector(s, &grids))
            .collect()
    }
}

impl FoldFeaturizer for TopoFeaturizer {
    fn featurize(&self, train: &[usize], test: usize) -> Result<FoldFeatures, ClassifyError> {
        // Structural no-leakage assertion for grid fitting: the held-out
        // subject must not be among the subjects grids are fitted on.
        if train.contains(&test) {
            return Err(ClassifyError::Leakage(self.subjects[test].id.clone()));
        }
        let fit_on: Vec<usize> = match self.grid_fit {
            GridFit::Fold => train.to_vec(),
            GridFit::All => self.all_indices(),
        };
        if self.grid_fit == GridFit::Fold && fit_on.contains(&test) {
            return Err(ClassifyError::Leakage(self.subjects[test].id.clone()));
        }
        let to_classify = |e: DescriptorError| ClassifyError::Featurize(e.to_string());
        let grids = self.fit_block_grids(&fit_on).map_err(to_classify)?;
        let train_rows = train
            .iter()
            .map(|&s| self.subject_vector(s, &grids))
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_classify)?;
        let test_row = self.subject_vector(test, &grids).map_err(to_classify)?;
        Ok(FoldFeatures {
            train: train_rows,
            test: test_row,
        })
    }
}

/// Everything one experiment produced: the task description plus the LOOCV
/// evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: String,
    pub state: String,
    pub variables: Vec<Variable>,
    pub descriptor: DescriptorKind,
    pub feature_length: usize,
    pub eval: EvaluationReport,
}

/// Run one classification task end to end.
pub fn evaluate_task(
    dataset: &GaitDataset,
    spec: &TaskSpec,
    params: &PipelineParams,
) -> Result<TaskReport, PipelineError> {
    let featurizer = TopoFeaturizer::build(dataset, spec, params)?;
    let cohort = Cohort {
        subjects: featurizer
            .subjects()
            .iter()
            .map(|s| CohortSubject {
                id: s.id.clone(),
                positive: s.group == spec.pair.positive(),
            })
            .collect(),
        positive_label: spec.pair.positive().to_string(),
        negative_label: spec.pair.negative().to_string(),
    };
    let eval = loocv(&cohort, &featurizer, &params.forest)?;
    Ok(TaskReport {
        task: spec.pair.to_string(),
        state: spec.policy.to_string(),
        variables: spec.variables.clone(),
        descriptor: spec.descriptor,
        feature_length: featurizer.feature_length(),
        eval,
    })
}

/// Variable-subset and state sweep over one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Subset sizes drawn from the pool (e.g. [2] for all pairs).
    pub sizes: Vec<usize>,
    /// Variables to draw subsets from.
    pub pool: Vec<Variable>,
    pub states: Vec<StatePolicy>,
}

/// One sweep cell: the combination tried and its outcome. Failed cells keep
/// the error message so a grid run survives individual failures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub variables: Vec<Variable>,
    pub state: StatePolicy,
    pub outcome: Result<TaskReport, String>,
}

/// Evaluate every (subset, state) combination, continuing past failures.
pub fn run_grid(
    dataset: &GaitDataset,
    pair: TaskPair,
    descriptor: DescriptorKind,
    sweep: &SweepSpec,
    params: &PipelineParams,
) -> Result<Vec<GridCell>, PipelineError> {
    if sweep.sizes.is_empty() || sweep.pool.is_empty() || sweep.states.is_empty() {
        return Err(PipelineError::Config("empty sweep specification".into()));
    }
    for &k in &sweep.sizes {
        if k == 0 || k > sweep.pool.len() {
            return Err(PipelineError::Config(format!(
                "subset size {k} outside 1..={}",
                sweep.pool.len()
            )));
        }
    }

    let mut cells: Vec<(Vec<Variable>, StatePolicy)> = Vec::new();
    for &k in &sweep.sizes {
        for combo in sweep.pool.iter().copied().combinations(k) {
            for &state in &sweep.states {
                cells.push((combo.clone(), state));
            }
        }
    }

    Ok(cells
        .into_par_iter()
        .map(|(variables, state)| {
            let spec = TaskSpec {
                pair,
                policy: state,
                variables: variables.clone(),
                descriptor,
            };
            let outcome = evaluate_task(dataset, &spec, params).map_err(|e| e.to_string());
            GridCell {
                variables,
                state,
                outcome,
            }
        })
        .collect())
}

/// Successful cells ranked best-first by (AUC, accuracy, name); the order
/// used in the grid summary.
pub fn rank_cells(cells: &[GridCell]) -> Vec<&GridCell> {
    let mut ok: Vec<&GridCell> = cells.iter().filter(|c| c.outcome.is_ok()).collect();
    ok.sort_by(|a, b| {
        let (ra, rb) = (a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
        let auc = |r: &TaskReport| r.eval.metrics.auc.unwrap_or(f64::NEG_INFINITY);
        auc(rb)
            .total_cmp(&auc(ra))
            .then(
                rb.eval
                    .metrics
                    .accuracy
                    .total_cmp(&ra.eval.metrics.accuracy),
            )
            .then_with(|| {
                let name = |c: &GridCell| {
                    (
                        c.variables
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join("+"),
                        c.state.to_string(),
                    )
                };
                name(a).cmp(&name(b))
            })
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_pair_positive_class() {
        assert_eq!(TaskPair::IpdVsVap.positive(), Group::IPD);
        assert_eq!(TaskPair::IpdVsVap.negative(), Group::VaP);
        assert_eq!(TaskPair::CoVsIpd.positive(), Group::IPD);
        assert_eq!(TaskPair::CoVsIpd.negative(), Group::CO);
        assert_eq!(TaskPair::CoVsVap.positive(), Group::VaP);
    }

    #[test]
    fn parsing_round_trips() {
        for pair in TaskPair::ALL {
            assert_eq!(pair.as_str().parse::<TaskPair>().unwrap(), pair);
        }
        for policy in [StatePolicy::Off, StatePolicy::On, StatePolicy::OffOn] {
            assert_eq!(policy.as_str().parse::<StatePolicy>().unwrap(), policy);
        }
        assert_eq!("fold".parse::<GridFit>().unwrap(), GridFit::Fold);
        assert!("both".parse::<GridFit>().is_err());
    }

    #[test]
    fn state_major_block_order() {
        let spec = TaskSpec {
            pair: TaskPair::IpdVsVap,
            policy: StatePolicy::OffOn,
            variables: vec![Variable::MinTC, Variable::MaxTLSW],
            descriptor: DescriptorKind::BC,
        };
        let blocks: Vec<Block> = spec
            .policy
            .slots()
            .iter()
            .flat_map(|&slot| {
                spec.variables
                    .iter()
                    .map(move |&variable| Block { variable, slot })
            })
            .collect();
        assert_eq!(
            blocks,
            vec![
                Block {
                    variable: Variable::MinTC,
                    slot: State::Off
                },
                Block {
                    variable: Variable::MaxTLSW,
                    slot: State::Off
                },
                Block {
                    variable: Variable::MinTC,
                    slot: State::On
                },
                Block {
                    variable: Variable::MaxTLSW,
                    slot: State::On
                },
            ]
        );
    }

    #[test]
    fn duplicate_variables_rejected() {
        let spec = TaskSpec {
            pair: TaskPair::IpdVsVap,
            policy: StatePolicy::Off,
            variables: vec![Variable::MinTC, Variable::MinTC],
            descriptor: DescriptorKind::BC,
        };
        assert!(spec.validate().is_err());
    }
}
