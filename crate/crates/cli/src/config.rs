//! Run configuration: a TOML (or JSON) file merged under command-line
//! overrides. The resolved config is echoed verbatim into every report so a
//! run can be reproduced from the report alone. Execution knobs that cannot
//! change results (worker count, output directory) are deliberately not
//! part of it.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use topogait::classify::{ForestParams, MaxFeatures};
use topogait::descriptors::{DescriptorKind, DescriptorParams};
use topogait::ingest::Variable;
use topogait::pipeline::{
    EmbeddingParams, GridFit, PipelineParams, StatePolicy, TaskPair, TaskSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        let d = ForestParams::default();
        ForestConfig {
            n_trees: d.n_trees,
            max_features: d.max_features,
            min_samples_leaf: d.min_samples_leaf,
            max_depth: d.max_depth,
        }
    }
}

/// The fully resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: String,
    pub task: TaskPair,
    pub state: StatePolicy,
    pub variables: Vec<Variable>,
    pub descriptor: DescriptorKind,
    pub nbins: usize,
    pub dim: usize,
    pub tau: usize,
    pub sil_p: f64,
    pub landscape_layer: usize,
    pub grid_fit: GridFit,
    pub standardize: bool,
    pub seed: u64,
    pub forest: ForestConfig,
}

impl RunConfig {
    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec {
            pair: self.task,
            policy: self.state,
            variables: self.variables.clone(),
            descriptor: self.descriptor,
        }
    }

    pub fn pipeline_params(&self) -> PipelineParams {
        PipelineParams {
            embedding: EmbeddingParams {
                dim: self.dim,
                tau: self.tau,
            },
            nbins: self.nbins,
            descriptor: DescriptorParams {
                landscape_layer: self.landscape_layer,
                silhouette_p: self.sil_p,
            },
            forest: ForestParams {
                n_trees: self.forest.n_trees,
                max_features: self.forest.max_features,
                min_samples_leaf: self.forest.min_samples_leaf,
                max_depth: self.forest.max_depth,
                seed: self.seed,
            },
            grid_fit: self.grid_fit,
            standardize: self.standardize,
        }
    }
}

/// Partially specified config, as read from a file. Every field is optional;
/// command-line flags fill or override the rest.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub dataset: Option<String>,
    pub task: Option<TaskPair>,
    pub state: Option<StatePolicy>,
    pub variables: Option<Vec<Variable>>,
    pub descriptor: Option<DescriptorKind>,
    pub nbins: Option<usize>,
    pub dim: Option<usize>,
    pub tau: Option<usize>,
    pub sil_p: Option<f64>,
    pub landscape_layer: Option<usize>,
    pub grid_fit: Option<GridFit>,
    pub standardize: Option<bool>,
    pub seed: Option<u64>,
    pub forest: Option<PartialForestConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialForestConfig {
    pub n_trees: Option<usize>,
    pub max_features: Option<MaxFeatures>,
    pub min_samples_leaf: Option<usize>,
    pub max_depth: Option<usize>,
}

impl From<RunConfig> for PartialConfig {
    fn from(c: RunConfig) -> Self {
        PartialConfig {
            dataset: Some(c.dataset),
            task: Some(c.task),
            state: Some(c.state),
            variables: Some(c.variables),
            descriptor: Some(c.descriptor),
            nbins: Some(c.nbins),
            dim: Some(c.dim),
            tau: Some(c.tau),
            sil_p: Some(c.sil_p),
            landscape_layer: Some(c.landscape_layer),
            grid_fit: Some(c.grid_fit),
            standardize: Some(c.standardize),
            seed: Some(c.seed),
            forest: Some(PartialForestConfig {
                n_trees: Some(c.forest.n_trees),
                max_features: Some(c.forest.max_features),
                min_samples_leaf: Some(c.forest.min_samples_leaf),
                max_depth: c.forest.max_depth,
            }),
        }
    }
}

/// Load a config file. Accepts a TOML config, a JSON config, or a previous
/// report file (its `config` echo is reused, which makes any report
/// re-runnable as-is).
pub fn load_config_file(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
        let config_value = value.get("config").cloned().unwrap_or(value);
        let full: RunConfig = serde_json::from_value(config_value)
            .with_context(|| format!("parsing JSON config {}", path.display()))?;
        return Ok(full.into());
    }
    toml::from_str(&text).with_context(|| format!("parsing TOML config {}", path.display()))
}

/// Flag overrides as captured by clap; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<String>,
    pub task: Option<TaskPair>,
    pub state: Option<StatePolicy>,
    pub variables: Option<Vec<Variable>>,
    pub descriptor: Option<DescriptorKind>,
    pub nbins: Option<usize>,
    pub dim: Option<usize>,
    pub tau: Option<usize>,
    pub sil_p: Option<f64>,
    pub landscape_layer: Option<usize>,
    pub grid_fit: Option<GridFit>,
    pub standardize: Option<bool>,
    pub seed: Option<u64>,
    pub trees: Option<usize>,
    pub max_features: Option<MaxFeatures>,
    pub min_leaf: Option<usize>,
    pub max_depth: Option<usize>,
}

/// Resolve precedence: flags, then config file, then defaults. The pinned
/// defaults are (d=2, tau=1, nbins=25); every remaining tunable (silhouette
/// p, landscape layer, forest shape, seed) resolves to an explicit value so
/// it lands in the echoed config.
pub fn resolve(overrides: Overrides, file: PartialConfig) -> Result<RunConfig> {
    let forest_file = file.forest.unwrap_or_default();
    let forest_defaults = ForestConfig::default();
    let dataset = overrides
        .dataset
        .or(file.dataset)
        .context("no dataset given (use --dataset or a config file)")?;
    let task = overrides
        .task
        .or(file.task)
        .context("no task given (use --task or a config file)")?;
    Ok(RunConfig {
        dataset,
        task,
        state: overrides.state.or(file.state).unwrap_or(StatePolicy::Off),
        variables: overrides
            .variables
            .or(file.variables)
            .unwrap_or_else(|| vec![Variable::MinTC]),
        descriptor: overrides
            .descriptor
            .or(file.descriptor)
            .unwrap_or(DescriptorKind::BC),
        nbins: overrides.nbins.or(file.nbins).unwrap_or(25),
        dim: overrides.dim.or(file.dim).unwrap_or(2),
        tau: overrides.tau.or(file.tau).unwrap_or(1),
        sil_p: overrides.sil_p.or(file.sil_p).unwrap_or(1.0),
        landscape_layer: overrides
            .landscape_layer
            .or(file.landscape_layer)
            .unwrap_or(1),
        grid_fit: overrides
            .grid_fit
            .or(file.grid_fit)
            .unwrap_or(GridFit::Fold),
        standardize: overrides.standardize.or(file.standardize).unwrap_or(false),
        seed: overrides.seed.or(file.seed).unwrap_or(42),
        forest: ForestConfig {
            n_trees: overrides
                .trees
                .or(forest_file.n_trees)
                .unwrap_or(forest_defaults.n_trees),
            max_features: overrides
                .max_features
                .or(forest_file.max_features)
                .unwrap_or(forest_defaults.max_features),
            min_samples_leaf: overrides
                .min_leaf
                .or(forest_file.min_samples_leaf)
                .unwrap_or(forest_defaults.min_samples_leaf),
            max_depth: overrides.max_depth.or(forest_file.max_depth),
        },
    })
}
