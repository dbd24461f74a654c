//! Bootstrap ensembles of trees, trained in parallel.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::geometry::ManifoldSpec;
use crate::model::{argmax, Predictor, FORMAT_VERSION};
use crate::rng::{stream, Domain};
use crate::tree::{check_forest_input, fit_indices, FeatureTable, TreeConfig, TreeModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub tree: TreeConfig,
    pub bootstrap: bool,
    /// Average one-hot votes instead of leaf distributions.
    pub hard_vote: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 12,
            tree: TreeConfig::default(),
            bootstrap: true,
            hard_vote: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub config: ForestConfig,
    pub trees: Vec<TreeModel>,
}

impl ForestModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        let Some(first) = model.trees.first() else {
            return Err(Error::Config("forest has no trees".into()));
        };
        if model
            .trees
            .iter()
            .any(|t| t.manifold != first.manifold || t.classes != first.classes)
        {
            return Err(Error::Config(
                "forest trees disagree on manifold or classes".into(),
            ));
        }
        Ok(model)
    }
}

/// Runs `f` on a pool with `jobs` workers, or on the global pool for `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Trains `n_trees` trees, tree `i` on a bootstrap drawn from stream
/// `(seed, i)`. The result does not depend on the worker count.
pub fn fit_forest(data: &Dataset, config: &ForestConfig) -> Result<ForestModel> {
    fit_forest_with_jobs(data, config, None)
}

pub fn fit_forest_with_jobs(
    data: &Dataset,
    config: &ForestConfig,
    jobs: Option<usize>,
) -> Result<ForestModel> {
    if config.n_trees < 1 {
        return Err(Error::Config("n_trees must be >= 1".into()));
    }
    check_forest_input(data, &config.tree)?;
    let features = FeatureTable::new(data);
    let n = data.len();
    let trees = with_jobs(jobs, || {
        (0..config.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(config.seed, Domain::ForestTree, i as u64);
                let idx: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_indices(data, &features, idx, &config.tree, &mut rng)
            })
            .collect::<Vec<_>>()
    })?;
    Ok(ForestModel {
        format_version: FORMAT_VERSION,
        config: *config,
        trees,
    })
}

impl Predictor for ForestModel {
    fn manifold(&self) -> &ManifoldSpec {
        &self.trees[0].manifold
    }

    fn task(&self) -> Task {
        self.config.tree.task
    }

    fn classes(&self) -> &[i64] {
        &self.trees[0].classes
    }

    fn proba_row(&self, x: &[f64]) -> Vec<f64> {
        let k = self.classes().len();
        let mut acc = vec![0.0; k];
        for tree in &self.trees {
            let p = tree.proba_row(x);
            if self.config.hard_vote {
                acc[argmax(&p)] += 1.0;
            } else {
                for (a, v) in acc.iter_mut().zip(&p) {
                    *a += v;
                }
            }
        }
        let m = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= m);
        acc
    }

    fn value_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.value_row(x)).sum::<f64>() / self.trees.len() as f64
    }
}
