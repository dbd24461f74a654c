use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Impurity {
    #[default]
    Gini,
    Entropy,
    Mse,
}

impl std::str::FromStr for Impurity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(Impurity::Gini),
            "entropy" => Ok(Impurity::Entropy),
            "mse" => Ok(Impurity::Mse),
            other => Err(Error::Config(format!("unknown impurity {other:?}"))),
        }
    }
}

/// Impurity of a class histogram with `total` members.
#[inline]
pub fn impurity_from_counts(counts: &[usize], total: usize, kind: Impurity) -> f64 {
    let n = total as f64;
    match kind {
        Impurity::Gini => {
            let sq: f64 = counts
                .iter()
                .map(|&c| {
                    let p = c as f64 / n;
                    p * p
                })
                .sum();
            1.0 - sq
        }
        Impurity::Entropy => counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum(),
        // Class ids have no meaningful spread; treat mse on classes as gini.
        Impurity::Mse => impurity_from_counts(counts, total, Impurity::Gini),
    }
}

/// `C(parent) - f_left C(left) - f_right C(right)` from class histograms.
#[inline]
pub fn gain_from_counts(
    parent_impurity: f64,
    left: &[usize],
    n_left: usize,
    right: &[usize],
    n_right: usize,
    kind: Impurity,
) -> f64 {
    let n = (n_left + n_right) as f64;
    parent_impurity
        - (n_left as f64 / n) * impurity_from_counts(left, n_left, kind)
        - (n_right as f64 / n) * impurity_from_counts(right, n_right, kind)
}

pub fn class_counts(labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

fn n_classes_of(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// Impurity of a set of class ids.
pub fn class_impurity(labels: &[usize], kind: Impurity) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Empty("impurity of an empty set"));
    }
    let counts = class_counts(labels, n_classes_of(labels));
    Ok(impurity_from_counts(&counts, labels.len(), kind))
}

/// Mean squared deviation from the mean.
pub fn value_impurity(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("impurity of an empty set"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
}

/// Information gain of splitting `parent` into `left` and `right`.
pub fn information_gain(
    parent: &[usize],
    left: &[usize],
    right: &[usize],
    kind: Impurity,
) -> Result<f64> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::Empty("split child"));
    }
    if left.len() + right.len() != parent.len() {
        return Err(Error::DimensionMismatch {
            expected: parent.len(),
            actual: left.len() + right.len(),
        });
    }
    let k = n_classes_of(parent);
    let pc = class_counts(parent, k);
    let parent_impurity = impurity_from_counts(&pc, parent.len(), kind);
    Ok(gain_from_counts(
        parent_impurity,
        &class_counts(left, k),
        left.len(),
        &class_counts(right, k),
        right.len(),
        kind,
    ))
}

/// Variance reduction for regression targets.
pub fn value_information_gain(parent: &[f64], left: &[f64], right: &[f64]) -> Result<f64> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::Empty("split child"));
    }
    let n = parent.len() as f64;
    Ok(value_impurity(parent)?
        - (left.len() as f64 / n) * value_impurity(left)?
        - (right.len() as f64 / n) * value_impurity(right)?)
}
