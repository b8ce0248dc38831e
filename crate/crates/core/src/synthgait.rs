//! Synthetic gait-like cohorts with controllable topological separation.
//!
//! Each class is a quasi-periodic signal family: one sinusoid, an optional
//! second harmonic, a linear trend, and Gaussian noise. The delay embedding
//! of the clean signal traces an ellipse, so class separation is driven by
//! the dominant H1 bar; noise degrades that loop. Patients are emitted in
//! both Off and On states with a medication gain that shrinks noise in the
//! On state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::ingest::{GaitDataset, GaitSeries, Group, State, Variable};

#[derive(Error, Debug)]
pub enum SynthError {
    #[error("config error: {0}")]
    Config(String),
}

/// Signal family of one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRecipe {
    pub amplitude: f64,
    /// Samples per cycle. Non-integer periods spread the embedded points
    /// densely around the loop instead of revisiting the same few spots.
    pub period: f64,
    pub harmonic: f64,
    pub noise: f64,
    pub trend: f64,
}

impl ClassRecipe {
    /// Pure sinusoid of the given amplitude: a clean limit cycle.
    pub fn clean(amplitude: f64) -> Self {
        ClassRecipe {
            amplitude,
            period: 5.2,
            harmonic: 0.0,
            noise: 0.0,
            trend: 0.0,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub subjects_per_class: Vec<usize>,
    pub series_length: usize,
    pub recipes: Vec<ClassRecipe>,
    /// Multiplies patient noise in the On state (levodopa direction: < 1
    /// steadies the gait).
    pub medication_gain: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Two-class cohort shaped like the IPD/VaP arm: a clean high-amplitude
    /// class versus a noisier low-amplitude one.
    pub fn two_class(n_a: usize, n_b: usize, seed: u64) -> Self {
        SynthConfig {
            subjects_per_class: vec![n_a, n_b],
            series_length: 36,
            recipes: vec![
                ClassRecipe::clean(1.0),
                ClassRecipe::clean(0.6).with_noise(0.15),
            ],
            medication_gain: 0.5,
            seed,
        }
    }

    /// Three-class cohort shaped like the full study: controls plus two
    /// patient classes with an intermediate recipe.
    pub fn three_class(n_co: usize, n_ipd: usize, n_vap: usize, seed: u64) -> Self {
        SynthConfig {
            subjects_per_class: vec![n_co, n_ipd, n_vap],
            series_length: 36,
            recipes: vec![
                ClassRecipe::clean(1.4).with_noise(0.05),
                ClassRecipe::clean(1.0).with_noise(0.15),
                ClassRecipe::clean(0.6).with_noise(0.3),
            ],
            medication_gain: 0.5,
            seed,
        }
    }

    fn groups(&self) -> Result<&'static [Group], SynthError> {
        match self.subjects_per_class.len() {
            2 => Ok(&[Group::IPD, Group::VaP]),
            3 => Ok(&[Group::CO, Group::IPD, Group::VaP]),
            other => Err(SynthError::Config(format!(
                "expected 2 or 3 classes, got {other}"
            ))),
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.recipes.len() != self.subjects_per_class.len() {
            return Err(SynthError::Config(format!(
                "{} recipes for {} classes",
                self.recipes.len(),
                self.subjects_per_class.len()
            )));
        }
        if self.series_length < 8 {
            return Err(SynthError::Config(format!(
                "series_length must be >= 8, got {}",
                self.series_length
            )));
        }
        if self.subjects_per_class.contains(&0) {
            return Err(SynthError::Config("every class needs subjects".into()));
        }
        if self.medication_gain < 0.0 {
            return Err(SynthError::Config("medication_gain must be >= 0".into()));
        }
        for (i, r) in self.recipes.iter().enumerate() {
            if r.noise < 0.0 {
                return Err(SynthError::Config(format!("class {i} noise must be >= 0")));
            }
            if r.amplitude <= 0.0 || r.period <= 1.0 {
                return Err(SynthError::Config(format!(
                    "class {i} needs amplitude > 0 and period > 1"
                )));
            }
        }
        Ok(())
    }
}

fn synth_series(
    recipe: &ClassRecipe,
    phase: f64,
    sigma: f64,
    len: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    (0..len)
        .map(|t| {
            let theta = std::f64::consts::TAU * t as f64 / recipe.period + phase;
            let mut v = recipe.amplitude * theta.sin() + recipe.harmonic * (2.0 * theta).sin();
            v += recipe.trend * (t as f64 - len as f64 / 2.0) / len as f64;
            if sigma > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                v += sigma * z;
            }
            v
        })
        .collect()
}

/// Deterministic synthetic dataset in the same shape the loader produces:
/// all six variables per subject, controls in state None, patients in Off
/// and On.
pub fn generate_cohort(cfg: &SynthConfig) -> Result<GaitDataset, SynthError> {
    cfg.validate()?;
    let groups = cfg.groups()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut series = Vec::new();

    for (class, (&count, recipe)) in cfg.subjects_per_class.iter().zip(&cfg.recipes).enumerate() {
        let group = groups[class];
        for s in 0..count {
            let subject_id = format!("{}{:02}", group.as_str().to_ascii_uppercase(), s + 1);
            for variable in Variable::ALL {
                // One walking pattern per (subject, variable); the On state
                // re-measures it with steadier noise.
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let states: &[State] = if group == Group::CO {
                    &[State::None]
                } else {
                    &[State::Off, State::On]
                };
                for &state in states {
                    let sigma = recipe.noise
                        * if state == State::On {
                            cfg.medication_gain
                        } else {
                            1.0
                        };
                    series.push(GaitSeries {
                        subject_id: subject_id.clone(),
                        group,
                        state,
                        variable,
                        values: synth_series(recipe, phase, sigma, cfg.series_length, &mut rng),
                    });
                }
            }
        }
    }
    GaitDataset::from_series(series).map_err(|e| SynthError::Config(e.to_string()))
}
