//! Decision-boundary export for two-dimensional hyperboloid trees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{from_poincare, geodesic_point, to_poincare, GeometryKind, ManifoldSpec};
use crate::model::{argmax, Predictor};
use crate::tree::{split_decide, SplitRule, TreeModel, TreeNode};

pub const DEFAULT_RESOLUTION: usize = 512;
/// Samples along each boundary geodesic.
pub const GEODESIC_SAMPLES: usize = 1000;
const T_RANGE: f64 = 10.0;

/// One internal node's boundary, clipped to the region that reaches it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicBoundary {
    pub dim: usize,
    pub angle: f64,
    pub depth: usize,
    /// Root-to-node path, one `L` or `R` per ancestor.
    pub region: String,
    /// Poincare-disk vertices in order of increasing geodesic parameter.
    pub polyline: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGrid {
    pub resolution: usize,
    /// Row-major class ids; `-1` outside the disk.
    pub classes: Vec<i64>,
    /// Label of each class id.
    pub labels: Vec<i64>,
}

impl ClassGrid {
    /// Disk coordinate of the center of cell `i` along either axis.
    pub fn center(resolution: usize, i: usize) -> f64 {
        -1.0 + (i as f64 + 0.5) * 2.0 / resolution as f64
    }

    /// Cell holding disk point `(u, v)`, as (row, col).
    pub fn cell(&self, u: f64, v: f64) -> (usize, usize) {
        let idx = |a: f64| {
            let i = ((a + 1.0) * self.resolution as f64 / 2.0).floor();
            (i.max(0.0) as usize).min(self.resolution - 1)
        };
        (idx(v), idx(u))
    }

    pub fn at(&self, row: usize, col: usize) -> i64 {
        self.classes[row * self.resolution + col]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryExport {
    pub boundaries: Vec<GeodesicBoundary>,
    pub grid: ClassGrid,
}

/// Evenly spaced bin midpoints of `(-10, 10)`.
fn t_samples() -> impl Iterator<Item = f64> {
    let step = 2.0 * T_RANGE / GEODESIC_SAMPLES as f64;
    (0..GEODESIC_SAMPLES).map(move |i| -T_RANGE + (i as f64 + 0.5) * step)
}

fn check_model(model: &TreeModel) -> Result<ManifoldSpec> {
    let m = model.manifold;
    if m.kind != GeometryKind::Hyperboloid {
        return Err(Error::Config("boundary export needs a hyperboloid model".into()));
    }
    if m.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: m.dim,
        });
    }
    Ok(m)
}

pub fn export_boundaries(model: &TreeModel, resolution: usize) -> Result<BoundaryExport> {
    let m = check_model(model)?;
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be positive".into()));
    }
    let mut boundaries = Vec::new();
    let mut path = Vec::new();
    collect(&model.nodes, &m, &mut path, &mut boundaries)?;
    Ok(BoundaryExport {
        boundaries,
        grid: class_grid(model, resolution)?,
    })
}

fn collect(
    node: &TreeNode,
    m: &ManifoldSpec,
    path: &mut Vec<(SplitRule, bool)>,
    out: &mut Vec<GeodesicBoundary>,
) -> Result<()> {
    let TreeNode::Split {
        dim,
        param,
        left,
        right,
    } = node
    else {
        return Ok(());
    };
    let mut polyline = Vec::new();
    for t in t_samples() {
        let x = geodesic_point(*param, *dim, &[t], m)?;
        let inside = path
            .iter()
            .all(|(rule, right)| split_decide(&x, rule, GeometryKind::Hyperboloid) == *right);
        if inside {
            let p = to_poincare(&x, m)?;
            polyline.push([p[0], p[1]]);
        }
    }
    out.push(GeodesicBoundary {
        dim: *dim,
        angle: *param,
        depth: path.len(),
        region: path.iter().map(|(_, r)| if *r { 'R' } else { 'L' }).collect(),
        polyline,
    });
    let rule = SplitRule {
        dim: *dim,
        param: *param,
    };
    path.push((rule, false));
    collect(left, m, path, out)?;
    path.last_mut().expect("pushed above").1 = true;
    collect(right, m, path, out)?;
    path.pop();
    Ok(())
}

fn class_grid(model: &TreeModel, resolution: usize) -> Result<ClassGrid> {
    let m = model.manifold;
    let mut classes = Vec::with_capacity(resolution * resolution);
    for r in 0..resolution {
        let v = ClassGrid::center(resolution, r);
        for c in 0..resolution {
            let u = ClassGrid::center(resolution, c);
            if u * u + v * v >= 1.0 {
                classes.push(-1);
                continue;
            }
            let x = from_poincare(&[u, v], &m)?;
            classes.push(argmax(&model.proba_row(&x)) as i64);
        }
    }
    Ok(ClassGrid {
        resolution,
        classes,
        labels: model.classes.clone(),
    })
}
