//! Seeded k-fold cross-validation over one or more predictor specs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{average_precision, f1_scores};
use super::stats::{paired_t_test, summarize, Summary, TTestOutcome};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::forest::{fit_forest_with_jobs, ForestConfig};
use crate::geometry::GeometryKind;
use crate::model::AnyModel;
use crate::rng::{stream, Domain};
use crate::tree::{fit, MaxFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tree,
    Forest,
}

/// What to train: model family, geometry and hyperparameters.
///
/// Parsed from `key=value` lists such as
/// `name=hdt,model=tree,geometry=hyperboloid,max_depth=3`. A leading bare
/// word selects a preset: `hyperdt`, `hyperrf`, `dt` or `rf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub name: String,
    pub model: ModelKind,
    pub geometry: GeometryKind,
    /// Forest settings; `tree` is also the config of a single tree.
    pub forest: ForestConfig,
}

impl PredictorSpec {
    pub fn preset(name: &str) -> Result<Self> {
        let (model, geometry) = match name {
            "hyperdt" => (ModelKind::Tree, GeometryKind::Hyperboloid),
            "hyperrf" => (ModelKind::Forest, GeometryKind::Hyperboloid),
            "dt" => (ModelKind::Tree, GeometryKind::Euclidean),
            "rf" => (ModelKind::Forest, GeometryKind::Euclidean),
            other => return Err(Error::Config(format!("unknown predictor preset {other:?}"))),
        };
        Ok(Self {
            name: name.to_string(),
            model,
            geometry,
            forest: ForestConfig::default(),
        })
    }

    /// Same spec with every seed replaced by `seed`.
    pub fn seeded(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.forest.seed = seed;
        s.forest.tree.seed = seed;
        s
    }

    fn view(&self, data: &Dataset) -> Result<Dataset> {
        match (self.geometry, data.manifold.kind) {
            (GeometryKind::Euclidean, GeometryKind::Hyperboloid) => Ok(data.as_euclidean()),
            (a, b) if a == b => Ok(data.clone()),
            _ => Err(Error::Config(format!(
                "predictor {} needs hyperboloid data",
                self.name
            ))),
        }
    }

    /// Fits on `train`, viewing hyperboloid data as raw coordinates for
    /// euclidean predictors.
    pub fn fit(&self, train: &Dataset, jobs: Option<usize>) -> Result<AnyModel> {
        let data = self.view(train)?;
        Ok(match self.model {
            ModelKind::Tree => fit(&data, &self.forest.tree)?.into(),
            ModelKind::Forest => fit_forest_with_jobs(&data, &self.forest, jobs)?.into(),
        })
    }

    pub fn predict_proba(&self, model: &AnyModel, test: &Dataset) -> Result<Vec<Vec<f64>>> {
        model.as_predictor().predict_proba(&self.view(test)?.points)
    }
}

impl std::str::FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(',').map(str::trim).filter(|p| !p.is_empty()).peekable();
        let mut spec = match parts.peek() {
            Some(first) if !first.contains('=') => {
                let preset = Self::preset(first)?;
                parts.next();
                preset
            }
            _ => Self::preset("hyperdt")?,
        };
        let mut named = false;
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {part:?}")))?;
            let bad = |what: &str| Error::Config(format!("invalid {what} {value:?}"));
            let tree = &mut spec.forest.tree;
            match key {
                "name" => {
                    spec.name = value.to_string();
                    named = true;
                }
                "model" => {
                    spec.model = match value {
                        "tree" => ModelKind::Tree,
                        "forest" => ModelKind::Forest,
                        _ => return Err(bad("model")),
                    }
                }
                "geometry" => spec.geometry = value.parse()?,
                "max_depth" => tree.max_depth = value.parse().map_err(|_| bad("max_depth"))?,
                "min_samples_leaf" => {
                    tree.min_samples_leaf = value.parse().map_err(|_| bad("min_samples_leaf"))?
                }
                "min_samples_split" => {
                    tree.min_samples_split = value.parse().map_err(|_| bad("min_samples_split"))?
                }
                "impurity" => tree.impurity = value.parse()?,
                "midpoint" => tree.midpoint_mode = value.parse()?,
                "max_features" => tree.max_features = value.parse::<MaxFeatures>()?,
                "trees" => spec.forest.n_trees = value.parse().map_err(|_| bad("trees"))?,
                "bootstrap" => spec.forest.bootstrap = value.parse().map_err(|_| bad("bootstrap"))?,
                "hard_vote" => spec.forest.hard_vote = value.parse().map_err(|_| bad("hard_vote"))?,
                other => return Err(Error::Config(format!("unknown predictor key {other:?}"))),
            }
        }
        if !named && s.contains('=') {
            spec.name = s.to_string();
        }
        spec.forest.tree.validate()?;
        Ok(spec)
    }
}

/// `k` near-equal folds of a seeded shuffle of `0..n`; each fold is sorted.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config("cross-validation needs k >= 2".into()));
    }
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds n = {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, Domain::CrossValidation, 0));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = perm[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRecord {
    pub predictor: String,
    pub seed: u64,
    pub fold: usize,
    pub micro_f1: f64,
    pub macro_f1: f64,
    /// Binary tasks only.
    pub aupr: Option<f64>,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    pub seeds: Vec<u64>,
    pub jobs: Option<usize>,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            k: 5,
            seeds: (0..10).collect(),
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub options: CvOptions,
    pub predictors: Vec<String>,
    /// Ordered by (seed, fold, predictor position).
    pub records: Vec<CvRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSummary {
    pub micro_f1: Summary,
    pub macro_f1: Summary,
    pub fit_seconds: Summary,
    pub predict_seconds: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub a: String,
    pub b: String,
    pub micro_f1: TTestOutcome,
    pub macro_f1: TTestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub jobs: Option<usize>,
    pub predictors: BTreeMap<String, PredictorSummary>,
    pub t_tests: Vec<PairedComparison>,
}

impl CvResult {
    fn column(&self, predictor: &str, f: impl Fn(&CvRecord) -> f64) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.predictor == predictor)
            .map(f)
            .collect()
    }

    /// Micro-F1 per (seed, fold) for one predictor.
    pub fn micro_scores(&self, predictor: &str) -> Vec<f64> {
        self.column(predictor, |r| r.micro_f1)
    }

    pub fn macro_scores(&self, predictor: &str) -> Vec<f64> {
        self.column(predictor, |r| r.macro_f1)
    }

    pub fn summary(&self) -> Result<CvSummary> {
        let mut predictors = BTreeMap::new();
        for p in &self.predictors {
            predictors.insert(
                p.clone(),
                PredictorSummary {
                    micro_f1: summarize(&self.micro_scores(p)),
                    macro_f1: summarize(&self.macro_scores(p)),
                    fit_seconds: summarize(&self.column(p, |r| r.fit_seconds)),
                    predict_seconds: summarize(&self.column(p, |r| r.predict_seconds)),
                },
            );
        }
        let mut t_tests = Vec::new();
        for (i, a) in self.predictors.iter().enumerate() {
            for b in &self.predictors[i + 1..] {
                t_tests.push(PairedComparison {
                    a: a.clone(),
                    b: b.clone(),
                    micro_f1: paired_t_test(&self.micro_scores(a), &self.micro_scores(b))?,
                    macro_f1: paired_t_test(&self.macro_scores(a), &self.macro_scores(b))?,
                });
            }
        }
        Ok(CvSummary {
            jobs: self.options.jobs,
            predictors,
            t_tests,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let to_err = |e: csv::Error| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(to_err)?;
        for r in &self.records {
            w.serialize(r).map_err(to_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Runs every predictor on identical folds for each seed. Timing wraps fit
/// and predict separately with a monotonic clock.
pub fn cross_validate(data: &Dataset, specs: &[PredictorSpec], opts: &CvOptions) -> Result<CvResult> {
    if data.targets.task() != Task::Classification {
        return Err(Error::Task("cross-validation scores classifiers only".into()));
    }
    if specs.is_empty() {
        return Err(Error::Empty("no predictors to evaluate"));
    }
    let names: Vec<String> = specs.iter().map(|s| s.name.clone()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Config(format!("duplicate predictor name {n:?}")));
        }
    }
    let ids = data.class_ids().expect("classification targets");
    let binary = data.n_classes() == 2;
    let mut records = Vec::new();
    for &seed in &opts.seeds {
        let folds = fold_indices(data.len(), opts.k, seed)?;
        for (f, test_idx) in folds.iter().enumerate() {
            let mut in_test = vec![false; data.len()];
            test_idx.iter().for_each(|&i| in_test[i] = true);
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_test[i]).collect();
            let train = data.subset(&train_idx);
            let test = data.subset(test_idx);
            let truth: Vec<usize> = test_idx.iter().map(|&i| ids[i]).collect();
            for spec in specs {
                let spec = spec.seeded(seed);
                let t0 = Instant::now();
                let model = spec.fit(&train, opts.jobs)?;
                let fit_seconds = t0.elapsed().as_secs_f64();
                let t1 = Instant::now();
                let proba = spec.predict_proba(&model, &test)?;
                let predict_seconds = t1.elapsed().as_secs_f64();
                let pred: Vec<usize> = proba.iter().map(|p| crate::model::argmax(p)).collect();
                let f1 = f1_scores(&truth, &pred)?;
                let aupr = if binary && truth.contains(&1) {
                    let positive: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
                    let scores: Vec<f64> = proba.iter().map(|p| p[1]).collect();
                    Some(average_precision(&positive, &scores)?)
                } else {
                    None
                };
                records.push(CvRecord {
                    predictor: spec.name.clone(),
                    seed,
                    fold: f,
                    micro_f1: f1.micro,
                    macro_f1: f1.macro_,
                    aupr,
                    fit_seconds,
                    predict_seconds,
                });
            }
        }
    }
    Ok(CvResult {
        options: opts.clone(),
        predictors: names,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_indices() {
        for (n, k) in [(10, 10), (17, 5), (800, 5)] {
            let folds = fold_indices(n, k, 3).unwrap();
            assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
        assert!(fold_indices(3, 5, 0).is_err());
        assert_eq!(fold_indices(50, 5, 9).unwrap(), fold_indices(50, 5, 9).unwrap());
        assert_ne!(fold_indices(50, 5, 9).unwrap(), fold_indices(50, 5, 10).unwrap());
    }

    #[test]
    fn parse_predictor_specs() {
        let s: PredictorSpec = "hyperrf,trees=5,max_depth=4".parse().unwrap();
        assert_eq!(s.model, ModelKind::Forest);
        assert_eq!(s.forest.n_trees, 5);
        assert_eq!(s.forest.tree.max_depth, 4);
        let s: PredictorSpec = "name=x,model=tree,geometry=euclidean,midpoint=naive".parse().unwrap();
        assert_eq!(s.name, "x");
        assert_eq!(s.geometry, GeometryKind::Euclidean);
        assert!("hyperdt,impurity=bogus".parse::<PredictorSpec>().is_err());
        assert!("nope".parse::<PredictorSpec>().is_err());
        assert!("hyperdt,max_depth=0".parse::<PredictorSpec>().is_err());
    }
}
