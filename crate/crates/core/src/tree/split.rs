//! Split rules, candidate generation and the sorted class-count sweep.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::impurity::{gain_from_counts, impurity_from_counts};
use super::TreeConfig;
use crate::data::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::geometry::{midpoint_angle, naive_midpoint_angle, point_angle, GeometryKind, ManifoldSpec};

/// Gains closer than this are treated as ties.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

/// Either a rotation angle of the plane `x0 = 0` about axis `dim`
/// (hyperboloid) or an axis-parallel threshold (euclidean).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub dim: usize,
    pub param: f64,
}

impl SplitRule {
    pub fn validate(&self, m: &ManifoldSpec) -> Result<()> {
        let ok = match m.kind {
            GeometryKind::Hyperboloid => {
                (1..=m.dim).contains(&self.dim)
                    && self.param > std::f64::consts::FRAC_PI_4
                    && self.param < 3.0 * std::f64::consts::FRAC_PI_4
            }
            GeometryKind::Euclidean => self.dim < m.dim && self.param.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSplitDim {
                dim: self.dim,
                kind: m.kind.as_str(),
                manifold_dim: m.dim,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MidpointMode {
    #[default]
    Geodesic,
    Naive,
}

impl std::str::FromStr for MidpointMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(MidpointMode::Geodesic),
            "naive" => Ok(MidpointMode::Naive),
            other => Err(Error::Config(format!("unknown midpoint mode {other:?}"))),
        }
    }
}

/// `S(x)`: `true` sends `x` right (decision value 1).
///
/// Hyperboloid: `sin(theta) x_d - cos(theta) x0 > 0`, two multiplies and no
/// dense dot product. Euclidean: `x_d > threshold`. A value of exactly zero
/// goes left.
#[inline]
pub fn split_decide(x: &[f64], rule: &SplitRule, kind: GeometryKind) -> bool {
    match kind {
        GeometryKind::Hyperboloid => rule.param.sin() * x[rule.dim] - rule.param.cos() * x[0] > 0.0,
        GeometryKind::Euclidean => x[rule.dim] > rule.param,
    }
}

/// Bounds-checked [`split_decide`].
pub fn split_decide_checked(x: &[f64], rule: &SplitRule, m: &ManifoldSpec) -> Result<bool> {
    rule.validate(m)?;
    if x.len() != m.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: m.ambient_dim(),
            actual: x.len(),
        });
    }
    Ok(split_decide(x, rule, m.kind))
}

/// Dimensions a split may use: spacelike axes `1..=D` on the hyperboloid,
/// every axis in euclidean space.
pub fn split_dims(m: &ManifoldSpec) -> std::ops::Range<usize> {
    match m.kind {
        GeometryKind::Hyperboloid => 1..m.dim + 1,
        GeometryKind::Euclidean => 0..m.dim,
    }
}

/// Sort key of a point along `d`: its plane angle or its coordinate.
#[inline]
pub fn split_key(x: &[f64], d: usize, kind: GeometryKind) -> f64 {
    match kind {
        GeometryKind::Hyperboloid => point_angle(x, d),
        GeometryKind::Euclidean => x[d],
    }
}

/// Boundary between consecutive distinct keys `lo < hi`, or `None` when it
/// cannot be placed strictly between them in floating point.
pub(crate) fn boundary_between(lo: f64, hi: f64, mode: MidpointMode, kind: GeometryKind) -> Option<f64> {
    match kind {
        GeometryKind::Hyperboloid => {
            let mid = match mode {
                MidpointMode::Geodesic => {
                    midpoint_angle(lo, hi).unwrap_or_else(|_| naive_midpoint_angle(lo, hi))
                }
                MidpointMode::Naive => naive_midpoint_angle(lo, hi),
            };
            (lo < mid && mid < hi).then_some(mid)
        }
        GeometryKind::Euclidean => {
            let mid = lo + 0.5 * (hi - lo);
            (lo <= mid && mid < hi).then_some(mid)
        }
    }
}

/// Candidate rules along `d`: one boundary between each pair of consecutive
/// distinct keys, in ascending order.
pub fn candidate_splits(data: &Dataset, d: usize, config: &TreeConfig) -> Vec<SplitRule> {
    let kind = data.manifold.kind;
    if !split_dims(&data.manifold).contains(&d) {
        return Vec::new();
    }
    let mut keys: Vec<f64> = data.points.rows().map(|x| split_key(x, d, kind)).collect();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    keys.windows(2)
        .filter_map(|w| boundary_between(w[0], w[1], config.midpoint_mode, kind))
        .map(|param| SplitRule { dim: d, param })
        .collect()
}

/// Precomputed split keys, one column per candidate dimension.
pub(crate) struct FeatureTable {
    pub kind: GeometryKind,
    pub dims: Vec<usize>,
    pub keys: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(data: &Dataset) -> Self {
        let kind = data.manifold.kind;
        let dims: Vec<usize> = split_dims(&data.manifold).collect();
        let keys = dims
            .iter()
            .map(|&d| data.points.rows().map(|x| split_key(x, d, kind)).collect())
            .collect();
        Self { kind, dims, keys }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Best {
    pub rule: SplitRule,
    pub gain: f64,
}

/// Keeps the first candidate unless a later one beats it by more than the
/// tie tolerance. Callers visit dimensions and parameters in ascending order.
#[inline]
pub(crate) fn offer(best: &mut Option<Best>, rule: SplitRule, gain: f64) {
    let better = match best {
        None => gain > GAIN_TIE_TOLERANCE,
        Some(b) => gain > b.gain + GAIN_TIE_TOLERANCE,
    };
    if better {
        *best = Some(Best { rule, gain });
    }
}

/// Best split over `dims` (positions into `features.dims`) for the node
/// holding `idx`.
pub(crate) fn best_split_for_node(
    features: &FeatureTable,
    targets: &Targets,
    idx: &[usize],
    dim_positions: &[usize],
    config: &TreeConfig,
) -> Option<Best> {
    let mut best = None;
    let mut order: Vec<usize> = Vec::with_capacity(idx.len());
    match targets {
        Targets::Classes { ids, vocabulary } => {
            let k = vocabulary.len();
            let mut parent = vec![0usize; k];
            for &i in idx {
                parent[ids[i]] += 1;
            }
            let parent_impurity = impurity_from_counts(&parent, idx.len(), config.impurity);
            let mut low = vec![0usize; k];
            let mut high = vec![0usize; k];
            for &p in dim_positions {
                let keys = &features.keys[p];
                order.clear();
                order.extend_from_slice(idx);
                order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
                sweep_classes(
                    features.kind,
                    features.dims[p],
                    keys,
                    ids,
                    &order,
                    &parent,
                    parent_impurity,
                    (&mut low, &mut high),
                    config,
                    &mut best,
                );
            }
        }
        Targets::Values(values) => {
            for &p in dim_positions {
                let keys = &features.keys[p];
                order.clear();
                order.extend_from_slice(idx);
                order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
                sweep_values(features.kind, features.dims[p], keys, values, &order, config, &mut best);
            }
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn sweep_classes(
    kind: GeometryKind,
    dim: usize,
    keys: &[f64],
    ids: &[usize],
    order: &[usize],
    parent: &[usize],
    parent_impurity: f64,
    (low, high): (&mut Vec<usize>, &mut Vec<usize>),
    config: &TreeConfig,
    best: &mut Option<Best>,
) {
    let n = order.len();
    low.iter_mut().for_each(|c| *c = 0);
    high.copy_from_slice(parent);
    for j in 1..n {
        let moved = ids[order[j - 1]];
        low[moved] += 1;
        high[moved] -= 1;
        let (a, b) = (keys[order[j - 1]], keys[order[j]]);
        if a.total_cmp(&b) != Ordering::Less {
            continue;
        }
        let (n_low, n_high) = (j, n - j);
        if n_low < config.min_samples_leaf || n_high < config.min_samples_leaf {
            continue;
        }
        let Some(param) = boundary_between(a, b, config.midpoint_mode, kind) else {
            continue;
        };
        // Small angles fall on the positive side of a hyperbolic plane.
        let gain = match kind {
            GeometryKind::Hyperboloid => {
                gain_from_counts(parent_impurity, high, n_high, low, n_low, config.impurity)
            }
            GeometryKind::Euclidean => {
                gain_from_counts(parent_impurity, low, n_low, high, n_high, config.impurity)
            }
        };
        offer(best, SplitRule { dim, param }, gain);
    }
}

fn sweep_values(
    kind: GeometryKind,
    dim: usize,
    keys: &[f64],
    values: &[f64],
    order: &[usize],
    config: &TreeConfig,
    best: &mut Option<Best>,
) {
    let n = order.len();
    let (total, total_sq) = order.iter().fold((0.0, 0.0), |(s, q), &i| {
        (s + values[i], q + values[i] * values[i])
    });
    let mse = |s: f64, q: f64, c: usize| {
        let c = c as f64;
        (q / c - (s / c) * (s / c)).max(0.0)
    };
    let parent_impurity = mse(total, total_sq, n);
    let (mut s_low, mut q_low) = (0.0, 0.0);
    for j in 1..n {
        let v = values[order[j - 1]];
        s_low += v;
        q_low += v * v;
        let (a, b) = (keys[order[j - 1]], keys[order[j]]);
        if a.total_cmp(&b) != Ordering::Less {
            continue;
        }
        let (n_low, n_high) = (j, n - j);
        if n_low < config.min_samples_leaf || n_high < config.min_samples_leaf {
            continue;
        }
        let Some(param) = boundary_between(a, b, config.midpoint_mode, kind) else {
            continue;
        };
        let nf = n as f64;
        let gain = parent_impurity
            - (n_low as f64 / nf) * mse(s_low, q_low, n_low)
            - (n_high as f64 / nf) * mse(total - s_low, total_sq - q_low, n_high);
        offer(best, SplitRule { dim, param }, gain);
    }
}

/// Highest-gain split of the whole dataset, or `None` when no candidate
/// improves impurity or every candidate violates `min_samples_leaf`.
pub fn best_split(data: &Dataset, config: &TreeConfig) -> Option<(SplitRule, f64)> {
    if data.len() < config.min_samples_split.max(2) {
        return None;
    }
    let features = FeatureTable::new(data);
    let idx: Vec<usize> = (0..data.len()).collect();
    let positions: Vec<usize> = (0..features.dims.len()).collect();
    best_split_for_node(&features, &data.targets, &idx, &positions, config).map(|b| (b.rule, b.gain))
}
