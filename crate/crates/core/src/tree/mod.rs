//! CART over homogeneous-hyperplane splits (hyperboloid) or axis-parallel
//! thresholds (euclidean).

mod impurity;
mod split;

pub use impurity::{
    class_counts, class_impurity, gain_from_counts, impurity_from_counts, information_gain,
    value_impurity, value_information_gain, Impurity,
};
pub use split::{
    best_split, candidate_splits, split_decide, split_decide_checked, split_dims, split_key,
    MidpointMode, SplitRule, GAIN_TIE_TOLERANCE,
};

pub(crate) use split::FeatureTable;

use rand::seq::index::sample;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Targets, Task};
use crate::error::{Error, Result};
use crate::geometry::ManifoldSpec;
use crate::model::{Predictor, FORMAT_VERSION};
use crate::rng::{stream, Domain};

/// How many split dimensions each node considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    #[default]
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, available: usize) -> usize {
        match self {
            MaxFeatures::All => available,
            MaxFeatures::Sqrt => ((available as f64).sqrt().round() as usize).clamp(1, available),
            MaxFeatures::Count(n) => n.clamp(1, available),
        }
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            n => n
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .map(MaxFeatures::Count)
                .ok_or_else(|| Error::Config(format!("invalid max-features {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub impurity: Impurity,
    pub task: Task,
    pub midpoint_mode: MidpointMode,
    pub max_features: MaxFeatures,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 3,
            min_samples_leaf: 1,
            min_samples_split: 2,
            impurity: Impurity::Gini,
            task: Task::Classification,
            midpoint_mode: MidpointMode::Geodesic,
            max_features: MaxFeatures::All,
            seed: 0,
        }
    }
}

impl TreeConfig {
    pub fn regression() -> Self {
        Self {
            impurity: Impurity::Mse,
            task: Task::Regression,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Config("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Config("min_samples_leaf must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be >= 2".into()));
        }
        match (self.task, self.impurity) {
            (Task::Regression, Impurity::Mse) => Ok(()),
            (Task::Regression, other) => Err(Error::Config(format!(
                "{other:?} impurity is not defined for regression"
            ))),
            (Task::Classification, Impurity::Mse) => Err(Error::Config(
                "mse impurity requires the regression task".into(),
            )),
            (Task::Classification, _) => Ok(()),
        }
    }
}

/// A fitted node. Internal nodes send `S(x) = 0` left and `S(x) = 1` right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        dim: usize,
        param: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        probs: Vec<f64>,
        n_train: usize,
    },
    Value {
        value: f64,
        n_train: usize,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            _ => 0,
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
            _ => 1,
        }
    }

    pub fn rule(&self) -> Option<SplitRule> {
        match self {
            TreeNode::Split { dim, param, .. } => Some(SplitRule {
                dim: *dim,
                param: *param,
            }),
            _ => None,
        }
    }
}

/// A fitted decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub format_version: u32,
    pub manifold: ManifoldSpec,
    pub config: TreeConfig,
    pub classes: Vec<i64>,
    pub nodes: TreeNode,
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        self.nodes.depth()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.n_leaves()
    }

    /// Leaf reached by `x`. `O(depth)` with constant work per node.
    #[inline]
    pub fn leaf(&self, x: &[f64]) -> &TreeNode {
        let kind = self.manifold.kind;
        let mut node = &self.nodes;
        while let TreeNode::Split {
            dim,
            param,
            left,
            right,
        } = node
        {
            let rule = SplitRule {
                dim: *dim,
                param: *param,
            };
            node = if split_decide(x, &rule, kind) { right } else { left };
        }
        node
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        model.manifold.validate()?;
        Ok(model)
    }
}

impl Predictor for TreeModel {
    fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    fn task(&self) -> Task {
        self.config.task
    }

    fn classes(&self) -> &[i64] {
        &self.classes
    }

    fn proba_row(&self, x: &[f64]) -> Vec<f64> {
        match self.leaf(x) {
            TreeNode::Leaf { probs, .. } => probs.clone(),
            _ => Vec::new(),
        }
    }

    fn value_row(&self, x: &[f64]) -> f64 {
        match self.leaf(x) {
            TreeNode::Value { value, .. } => *value,
            _ => f64::NAN,
        }
    }
}

fn check_fit_input(data: &Dataset, config: &TreeConfig) -> Result<()> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("cannot fit on an empty dataset"));
    }
    for (i, row) in data.points.rows().enumerate() {
        if row.iter().any(|v| v.is_nan()) {
            return Err(Error::NanCoordinate(i));
        }
    }
    if data.targets.task() != config.task {
        return Err(Error::Task(format!(
            "dataset targets are for {:?} but the config asks for {:?}",
            data.targets.task(),
            config.task
        )));
    }
    Ok(())
}

/// Grows a tree greedily on the whole dataset.
pub fn fit(data: &Dataset, config: &TreeConfig) -> Result<TreeModel> {
    check_fit_input(data, config)?;
    let features = FeatureTable::new(data);
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut rng = stream(config.seed, Domain::Tree, 0);
    Ok(fit_indices(data, &features, idx, config, &mut rng))
}

/// Grows a tree on the rows `idx` (which may repeat) using precomputed keys.
pub(crate) fn fit_indices(
    data: &Dataset,
    features: &FeatureTable,
    idx: Vec<usize>,
    config: &TreeConfig,
    rng: &mut ChaCha20Rng,
) -> TreeModel {
    let mut builder = Builder {
        data,
        features,
        config,
        rng,
    };
    let nodes = builder.grow(idx, 0);
    let classes = match &data.targets {
        Targets::Classes { vocabulary, .. } => vocabulary.clone(),
        Targets::Values(_) => Vec::new(),
    };
    TreeModel {
        format_version: FORMAT_VERSION,
        manifold: data.manifold,
        config: *config,
        classes,
        nodes,
    }
}

pub(crate) fn check_forest_input(data: &Dataset, config: &TreeConfig) -> Result<()> {
    check_fit_input(data, config)
}

struct Builder<'a> {
    data: &'a Dataset,
    features: &'a FeatureTable,
    config: &'a TreeConfig,
    rng: &'a mut ChaCha20Rng,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[usize]) -> TreeNode {
        match &self.data.targets {
            Targets::Classes { ids, vocabulary } => {
                let counts = class_counts(&idx.iter().map(|&i| ids[i]).collect::<Vec<_>>(), vocabulary.len());
                let n = idx.len() as f64;
                TreeNode::Leaf {
                    probs: counts.iter().map(|&c| c as f64 / n).collect(),
                    n_train: idx.len(),
                }
            }
            Targets::Values(v) => TreeNode::Value {
                value: idx.iter().map(|&i| v[i]).sum::<f64>() / idx.len() as f64,
                n_train: idx.len(),
            },
        }
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        match &self.data.targets {
            Targets::Classes { ids, .. } => idx.iter().all(|&i| ids[i] == ids[idx[0]]),
            Targets::Values(v) => idx.iter().all(|&i| v[i] == v[idx[0]]),
        }
    }

    fn dim_positions(&mut self) -> Vec<usize> {
        let available = self.features.dims.len();
        let k = self.config.max_features.resolve(available);
        if k == available {
            return (0..available).collect();
        }
        let mut chosen = sample(self.rng, available, k).into_vec();
        chosen.sort_unstable();
        chosen
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> TreeNode {
        if depth >= self.config.max_depth
            || idx.len() < self.config.min_samples_split
            || self.is_pure(&idx)
        {
            return self.leaf(&idx);
        }
        let positions = self.dim_positions();
        let Some(best) = split::best_split_for_node(
            self.features,
            &self.data.targets,
            &idx,
            &positions,
            self.config,
        ) else {
            return self.leaf(&idx);
        };
        let kind = self.data.manifold.kind;
        let (right, left): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| split_decide(self.data.points.row(i), &best.rule, kind));
        if left.is_empty() || right.is_empty() {
            return self.leaf(&idx);
        }
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        TreeNode::Split {
            dim: best.rule.dim,
            param: best.rule.param,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_gaussian_mixture, GaussianMixtureSpec, PointMatrix};
    use crate::geometry::from_poincare;

    fn disk_dataset(points: &[[f64; 2]], labels: &[i64]) -> Dataset {
        let m = ManifoldSpec::hyperboloid(2, 1.0).unwrap();
        let rows: Vec<Vec<f64>> = points.iter().map(|p| from_poincare(p, &m).unwrap()).collect();
        Dataset::new(m, PointMatrix::from_rows(&rows).unwrap(), Targets::from_labels(labels)).unwrap()
    }

    #[test]
    fn stump_separates_two_clusters() {
        let ds = disk_dataset(
            &[[-0.5, 0.1], [-0.4, -0.2], [-0.6, 0.0], [0.5, 0.1], [0.4, -0.1], [0.6, 0.2]],
            &[0, 0, 0, 1, 1, 1],
        );
        let cfg = TreeConfig {
            max_depth: 1,
            ..Default::default()
        };
        let model = fit(&ds, &cfg).unwrap();
        assert_eq!(model.depth(), 1);
        let pred = model.predict_class_ids(&ds.points).unwrap();
        assert_eq!(pred, ds.class_ids().unwrap());
    }

    #[test]
    fn depth_three_has_at_most_eight_leaves() {
        let ds = sample_gaussian_mixture(
            &GaussianMixtureSpec {
                n_classes: 5,
                seed: 4,
                ..Default::default()
            },
            400,
        )
        .unwrap();
        let model = fit(&ds, &TreeConfig::default()).unwrap();
        assert!(model.depth() <= 3);
        assert!(model.n_leaves() <= 8);
    }

    #[test]
    fn fully_grown_tree_memorizes() {
        let ds = sample_gaussian_mixture(
            &GaussianMixtureSpec {
                n_classes: 3,
                seed: 8,
                ..Default::default()
            },
            300,
        )
        .unwrap();
        let cfg = TreeConfig {
            max_depth: 64,
            ..Default::default()
        };
        let model = fit(&ds, &cfg).unwrap();
        assert_eq!(model.predict_class_ids(&ds.points).unwrap(), ds.class_ids().unwrap());
        for row in model.predict_proba(&ds.points).unwrap() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        let m = ManifoldSpec::hyperboloid(2, 1.0).unwrap();
        let empty = Dataset::new(m, PointMatrix::new(3), Targets::from_labels(&[])).unwrap();
        assert!(matches!(fit(&empty, &TreeConfig::default()), Err(Error::Empty(_))));
        let nan = Dataset::new(
            m,
            PointMatrix::from_rows(&[[1.0, f64::NAN, 0.0]]).unwrap(),
            Targets::from_labels(&[0]),
        )
        .unwrap();
        assert!(matches!(fit(&nan, &TreeConfig::default()), Err(Error::NanCoordinate(0))));
        let bad = TreeConfig {
            max_depth: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TreeConfig {
            impurity: Impurity::Mse,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn hyperbolic_splits_avoid_timelike_axis() {
        let ds = sample_gaussian_mixture(
            &GaussianMixtureSpec {
                n_classes: 4,
                dim: 4,
                seed: 1,
                ..Default::default()
            },
            300,
        )
        .unwrap();
        let model = fit(&ds, &TreeConfig { max_depth: 6, ..Default::default() }).unwrap();
        fn walk(n: &TreeNode) {
            if let TreeNode::Split { dim, param, left, right } = n {
                assert!(*dim >= 1);
                assert!(*param > std::f64::consts::FRAC_PI_4 && *param < 3.0 * std::f64::consts::FRAC_PI_4);
                walk(left);
                walk(right);
            }
        }
        walk(&model.nodes);
    }

    #[test]
    fn regression_tree_fits_step() {
        let m = ManifoldSpec::hyperboloid(1, 1.0).unwrap();
        let ts = [-1.0f64, -0.5, -0.2, 0.3, 0.6, 1.1];
        let rows: Vec<[f64; 2]> = ts.iter().map(|t| [t.cosh(), t.sinh()]).collect();
        let values: Vec<f64> = ts.iter().map(|&t| if t < 0.0 { 1.0 } else { 5.0 }).collect();
        let ds = Dataset::new(m, PointMatrix::from_rows(&rows).unwrap(), Targets::Values(values.clone())).unwrap();
        let model = fit(&ds, &TreeConfig::regression()).unwrap();
        assert_eq!(model.depth(), 1);
        assert_eq!(model.predict_values(&ds.points).unwrap(), values);
    }

    #[test]
    fn max_features_subsampling_is_seeded() {
        let ds = sample_gaussian_mixture(
            &GaussianMixtureSpec {
                n_classes: 3,
                dim: 6,
                seed: 2,
                ..Default::default()
            },
            200,
        )
        .unwrap();
        let cfg = TreeConfig {
            max_features: MaxFeatures::Count(2),
            seed: 17,
            ..Default::default()
        };
        assert_eq!(fit(&ds, &cfg).unwrap(), fit(&ds, &cfg).unwrap());
        assert_eq!("sqrt".parse::<MaxFeatures>().unwrap(), MaxFeatures::Sqrt);
        assert_eq!("3".parse::<MaxFeatures>().unwrap(), MaxFeatures::Count(3));
        assert!("0".parse::<MaxFeatures>().is_err());
    }
}
