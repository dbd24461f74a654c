//! Labeled point sets, the wrapped-Gaussian mixture generator and CSV I/O.

mod io;
mod mixture;

pub use io::{load_dataset, load_points, save_dataset, save_dataset_as, CoordSystem, LoadOptions};
pub use mixture::{sample_gaussian_mixture, GaussianMixtureSpec, MixtureParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, Strictness};

/// Dense row-major matrix of points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMatrix {
    data: Vec<f64>,
    cols: usize,
}

impl PointMatrix {
    pub fn new(cols: usize) -> Self {
        Self {
            data: Vec::new(),
            cols,
        }
    }

    pub fn from_flat(data: Vec<f64>, cols: usize) -> Result<Self> {
        if cols == 0 || !data.len().is_multiple_of(cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                actual: data.len(),
            });
        }
        Ok(Self { data, cols })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut m = Self::new(cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.cols).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            cols: self.cols,
        }
    }

    /// Every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * factor).collect(),
            cols: self.cols,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Classification,
    Regression,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(Task::Classification),
            "regression" => Ok(Task::Regression),
            other => Err(Error::Config(format!("unknown task {other:?}"))),
        }
    }
}

/// Supervision targets. Class ids are contiguous `0..C`; `vocabulary[id]`
/// is the label as it appeared in the input.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Classes { ids: Vec<usize>, vocabulary: Vec<i64> },
    Values(Vec<f64>),
}

impl Targets {
    /// Remaps raw integer labels onto `0..C` in ascending label order.
    pub fn from_labels(labels: &[i64]) -> Self {
        let mut vocabulary = labels.to_vec();
        vocabulary.sort_unstable();
        vocabulary.dedup();
        let ids = labels
            .iter()
            .map(|l| vocabulary.binary_search(l).expect("label in vocabulary"))
            .collect();
        Targets::Classes { ids, vocabulary }
    }

    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { ids, .. } => ids.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Targets::Classes { .. } => Task::Classification,
            Targets::Values(_) => Task::Regression,
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        match self {
            Targets::Classes { ids, vocabulary } => Targets::Classes {
                ids: indices.iter().map(|&i| ids[i]).collect(),
                vocabulary: vocabulary.clone(),
            },
            Targets::Values(v) => Targets::Values(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Points on a manifold with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifold: ManifoldSpec,
    pub points: PointMatrix,
    pub targets: Targets,
}

impl Dataset {
    pub fn new(manifold: ManifoldSpec, points: PointMatrix, targets: Targets) -> Result<Self> {
        manifold.validate()?;
        if points.cols() != manifold.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: manifold.ambient_dim(),
                actual: points.cols(),
            });
        }
        if points.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                actual: targets.len(),
            });
        }
        Ok(Self {
            manifold,
            points,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        match &self.targets {
            Targets::Classes { vocabulary, .. } => vocabulary.len(),
            Targets::Values(_) => 0,
        }
    }

    pub fn class_ids(&self) -> Option<&[usize]> {
        match &self.targets {
            Targets::Classes { ids, .. } => Some(ids),
            Targets::Values(_) => None,
        }
    }

    /// Validates every row, reporting the first offending row index.
    pub fn validate(&self, strictness: Strictness) -> Result<()> {
        for (i, row) in self.points.rows().enumerate() {
            if row.iter().any(|v| v.is_nan()) {
                return Err(Error::NanCoordinate(i));
            }
            self.manifold
                .check_point(row, strictness)
                .map_err(|e| e.at_row(i))?;
        }
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            manifold: self.manifold,
            points: self.points.select(indices),
            targets: self.targets.select(indices),
        }
    }

    /// The same rows reinterpreted as raw Euclidean coordinates.
    pub fn as_euclidean(&self) -> Self {
        Self {
            manifold: ManifoldSpec::euclidean(self.points.cols()).expect("cols >= 1"),
            points: self.points.clone(),
            targets: self.targets.clone(),
        }
    }

    /// Moves a hyperboloid dataset to curvature `new_k` via `x -> x sqrt(K/K')`.
    pub fn rescale_curvature(&self, new_k: f64) -> Result<Self> {
        let manifold = ManifoldSpec::hyperboloid(self.manifold.dim, new_k)?;
        let factor = (self.manifold.curvature / new_k).sqrt();
        Ok(Self {
            manifold,
            points: self.points.scaled(factor),
            targets: self.targets.clone(),
        })
    }
}
