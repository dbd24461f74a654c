//! Runtime and accuracy scaling sweeps over one hyperparameter.

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cv::PredictorSpec;
use super::metrics::f1_scores;
use super::stats::{summarize, Summary};
use crate::data::{sample_gaussian_mixture, GaussianMixtureSpec};
use crate::error::{Error, Result};
use crate::model::argmax;
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NSamples,
    Dim,
    NTrees,
    MaxDepth,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_samples" | "n" => Ok(SweepAxis::NSamples),
            "dim" => Ok(SweepAxis::Dim),
            "n_trees" | "trees" => Ok(SweepAxis::NTrees),
            "max_depth" | "depth" => Ok(SweepAxis::MaxDepth),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub grid: Vec<usize>,
    pub trials: usize,
    /// Data for trial `i` uses `data.seed + i`.
    pub data: GaussianMixtureSpec,
    pub n_samples: usize,
    pub predictor: PredictorSpec,
    pub jobs: Option<usize>,
}

impl SweepConfig {
    pub fn new(axis: SweepAxis, grid: Vec<usize>, predictor: PredictorSpec) -> Self {
        Self {
            axis,
            grid,
            trials: 20,
            data: GaussianMixtureSpec::default(),
            n_samples: 1000,
            predictor,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    /// Fit wall-clock seconds.
    pub runtime: Summary,
    pub micro_f1: Summary,
    pub runtimes: Vec<f64>,
}

/// Trains on a seeded 80/20 split for every grid value and trial. Trials
/// run one at a time so that timings do not contend with each other.
pub fn scaling_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.grid.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    if config.trials == 0 {
        return Err(Error::Config("sweep needs at least one trial".into()));
    }
    let mut rows = Vec::with_capacity(config.grid.len());
    for &value in &config.grid {
        let mut data_spec = config.data;
        let mut n = config.n_samples;
        let mut predictor = config.predictor.clone();
        match config.axis {
            SweepAxis::NSamples => n = value,
            SweepAxis::Dim => data_spec.dim = value,
            SweepAxis::NTrees => predictor.forest.n_trees = value,
            SweepAxis::MaxDepth => predictor.forest.tree.max_depth = value,
        }
        predictor.forest.tree.validate()?;
        if n < 5 {
            return Err(Error::Config(format!("n_samples = {n} is too small to split")));
        }
        let mut runtimes = Vec::with_capacity(config.trials);
        let mut scores = Vec::with_capacity(config.trials);
        for trial in 0..config.trials {
            let seed = config.data.seed.wrapping_add(trial as u64);
            let spec = GaussianMixtureSpec { seed, ..data_spec };
            let data = sample_gaussian_mixture(&spec, n)?;
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut stream(seed, Domain::SweepTrial, value as u64));
            let cut = n * 4 / 5;
            let train = data.subset(&perm[..cut]);
            let test = data.subset(&perm[cut..]);
            let predictor = predictor.seeded(seed);

            let start = Instant::now();
            let model = predictor.fit(&train, config.jobs)?;
            runtimes.push(start.elapsed().as_secs_f64());

            let proba = predictor.predict_proba(&model, &test)?;
            let pred: Vec<usize> = proba.iter().map(|p| argmax(p)).collect();
            let truth = test.class_ids().expect("classification targets");
            scores.push(f1_scores(truth, &pred)?.micro);
        }
        rows.push(SweepRow {
            value,
            runtime: summarize(&runtimes),
            micro_f1: summarize(&scores),
            runtimes,
        });
    }
    Ok(rows)
}
