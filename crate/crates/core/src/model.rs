//! Prediction interface shared by trees and forests, plus model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{PointMatrix, Task};
use crate::error::{Error, Result};
use crate::forest::ForestModel;
use crate::geometry::{ManifoldSpec, Strictness};
use crate::tree::TreeModel;

pub const FORMAT_VERSION: u32 = 1;

/// Argmax with ties going to the smallest class id.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

pub trait Predictor {
    fn manifold(&self) -> &ManifoldSpec;
    fn task(&self) -> Task;
    fn classes(&self) -> &[i64];
    /// Class distribution for one point; empty for regression models.
    fn proba_row(&self, x: &[f64]) -> Vec<f64>;
    /// Regression output for one point; NaN for classifiers.
    fn value_row(&self, x: &[f64]) -> f64;

    /// Errors on dimension mismatch. Off-manifold rows are an error in strict
    /// mode and a logged warning otherwise.
    fn check_points(&self, points: &PointMatrix, strictness: Strictness) -> Result<()> {
        let m = self.manifold();
        if points.cols() != m.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ambient_dim(),
                actual: points.cols(),
            });
        }
        let mut off = 0usize;
        for (i, row) in points.rows().enumerate() {
            match m.check_point(row, strictness) {
                Ok(()) => {}
                Err(e @ Error::OffManifold { .. }) => {
                    if strictness == Strictness::Strict {
                        return Err(e.at_row(i));
                    }
                    off += 1;
                }
                Err(Error::NanCoordinate(_)) => return Err(Error::NanCoordinate(i)),
                Err(e) => return Err(e),
            }
        }
        if off > 0 {
            log::warn!("{off} of {} points are off the manifold", points.len());
        }
        Ok(())
    }

    fn require(&self, task: Task) -> Result<()> {
        if self.task() == task {
            Ok(())
        } else {
            Err(Error::Task(format!("model was fitted for {:?}", self.task())))
        }
    }

    fn predict_proba(&self, points: &PointMatrix) -> Result<Vec<Vec<f64>>> {
        self.require(Task::Classification)?;
        self.check_points(points, Strictness::Lenient)?;
        Ok(points.rows().map(|x| self.proba_row(x)).collect())
    }

    fn predict_class_ids(&self, points: &PointMatrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba(points)?.iter().map(|p| argmax(p)).collect())
    }

    /// Predicted labels in the original label vocabulary.
    fn predict_labels(&self, points: &PointMatrix) -> Result<Vec<i64>> {
        let classes = self.classes();
        Ok(self
            .predict_class_ids(points)?
            .into_iter()
            .map(|c| classes[c])
            .collect())
    }

    fn predict_values(&self, points: &PointMatrix) -> Result<Vec<f64>> {
        self.require(Task::Regression)?;
        self.check_points(points, Strictness::Lenient)?;
        Ok(points.rows().map(|x| self.value_row(x)).collect())
    }
}

/// A model file holding either a tree or a forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyModel {
    Forest(ForestModel),
    Tree(TreeModel),
}

impl AnyModel {
    pub fn as_predictor(&self) -> &dyn Predictor {
        match self {
            AnyModel::Forest(f) => f,
            AnyModel::Tree(t) => t,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        let version = match &model {
            AnyModel::Forest(f) => f.format_version,
            AnyModel::Tree(t) => t.format_version,
        };
        if version != FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported model format_version {version}")));
        }
        model.as_predictor().manifold().validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&s)
    }
}

impl From<TreeModel> for AnyModel {
    fn from(t: TreeModel) -> Self {
        AnyModel::Tree(t)
    }
}

impl From<ForestModel> for AnyModel {
    fn from(f: ForestModel) -> Self {
        AnyModel::Forest(f)
    }
}
