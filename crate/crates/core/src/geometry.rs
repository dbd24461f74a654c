//! Minkowski algebra on the hyperboloid model `H^{D,K}`.
//!
//! Points are stored as ambient `(D+1)`-vectors with index 0 the timelike
//! coordinate. The hyperboloid of curvature `-K` is the upper sheet of
//! `<x,x>_L = -1/K`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const THREE_PI_4: f64 = 3.0 * FRAC_PI_4;

/// Relative tolerance on `|K<x,x>_L + 1|` used for lenient validation.
pub const LENIENT_TOLERANCE: f64 = 1e-6;
/// Relative tolerance used in strict mode.
pub const STRICT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Hyperboloid,
    Euclidean,
}

impl GeometryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::Hyperboloid => "hyperboloid",
            GeometryKind::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for GeometryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperboloid" | "hyperbolic" => Ok(GeometryKind::Hyperboloid),
            "euclidean" => Ok(GeometryKind::Euclidean),
            other => Err(Error::Config(format!("unknown geometry {other:?}"))),
        }
    }
}

/// Validation strictness for on-manifold checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    #[default]
    Lenient,
    Strict,
}

impl Strictness {
    pub fn tolerance(self) -> f64 {
        match self {
            Strictness::Lenient => LENIENT_TOLERANCE,
            Strictness::Strict => STRICT_TOLERANCE,
        }
    }
}

/// Identifies either `H^{D,K}` or Euclidean `R^D`.
///
/// For euclidean geometry `dim` is the number of coordinates and the
/// curvature is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: GeometryKind,
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "K")]
    pub curvature: f64,
}

impl ManifoldSpec {
    pub fn hyperboloid(dim: usize, curvature: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Config("manifold dimension must be >= 1".into()));
        }
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::Config(format!(
                "curvature must be positive and finite, got {curvature}"
            )));
        }
        Ok(Self {
            kind: GeometryKind::Hyperboloid,
            dim,
            curvature,
        })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Config("manifold dimension must be >= 1".into()));
        }
        Ok(Self {
            kind: GeometryKind::Euclidean,
            dim,
            curvature: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GeometryKind::Hyperboloid => Self::hyperboloid(self.dim, self.curvature).map(|_| ()),
            GeometryKind::Euclidean => Self::euclidean(self.dim).map(|_| ()),
        }
    }

    pub fn is_hyperboloid(&self) -> bool {
        self.kind == GeometryKind::Hyperboloid
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            GeometryKind::Hyperboloid => self.dim + 1,
            GeometryKind::Euclidean => self.dim,
        }
    }

    pub fn sqrt_k(&self) -> f64 {
        self.curvature.sqrt()
    }

    /// The hyperboloid apex `(1/sqrt(K), 0, ..., 0)`.
    pub fn origin(&self) -> Vec<f64> {
        let mut o = vec![0.0; self.dim + 1];
        o[0] = 1.0 / self.sqrt_k();
        o
    }

    /// Residual `|K<x,x>_L + 1|` divided by `max(1, K x0^2)`, the size of
    /// the terms that cancel, so far-out points are judged at working
    /// precision.
    pub fn manifold_residual(&self, x: &[f64]) -> f64 {
        let norm = minkowski_inner_unchecked(x, x);
        let scale = (self.curvature * x[0] * x[0]).max(1.0);
        (self.curvature * norm + 1.0).abs() / scale
    }

    /// Checks length, the hyperboloid constraint and the upper-sheet condition.
    pub fn check_point(&self, x: &[f64], strictness: Strictness) -> Result<()> {
        let expected = self.ambient_dim();
        if x.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::NanCoordinate(0));
        }
        if self.kind == GeometryKind::Euclidean {
            return Ok(());
        }
        let residual = self.manifold_residual(x);
        if residual > strictness.tolerance() || !(x[0] > 0.0) {
            return Err(Error::OffManifold {
                residual,
                row: None,
            });
        }
        Ok(())
    }
}

/// Sparse normal `n(d, theta) = (-cos theta, 0, .., sin theta at d, .., 0)` of a
/// homogeneous split plane, never materialized densely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalVector {
    pub dim: usize,
    pub angle: f64,
}

impl NormalVector {
    pub fn new(dim: usize, angle: f64) -> Result<Self> {
        check_angle(angle)?;
        if dim == 0 {
            return Err(Error::InvalidSplitDim {
                dim,
                kind: "hyperboloid",
                manifold_dim: 0,
            });
        }
        Ok(Self { dim, angle })
    }

    /// Euclidean dot product with `x`.
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.angle.sin() * x[self.dim] - self.angle.cos() * x[0]
    }

    /// Minkowski product with `x`, i.e. the dot product with the timelike
    /// sign flipped.
    #[inline]
    pub fn minkowski_dot(&self, x: &[f64]) -> f64 {
        self.angle.sin() * x[self.dim] + self.angle.cos() * x[0]
    }

    /// Dense copy, for tests and debugging.
    pub fn to_dense(&self, ambient_dim: usize) -> Vec<f64> {
        let mut n = vec![0.0; ambient_dim];
        n[0] = -self.angle.cos();
        n[self.dim] = self.angle.sin();
        n
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta > FRAC_PI_4 && theta < THREE_PI_4 {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta))
    }
}

#[inline]
fn minkowski_inner_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let spatial: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum();
    spatial - x[0] * y[0]
}

/// `<x,y>_L = -x0 y0 + sum_i x_i y_i`.
pub fn minkowski_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: x.len(),
        });
    }
    Ok(minkowski_inner_unchecked(x, y))
}

/// Geodesic distance `acosh(-K<x,y>_L) / sqrt(K)`.
pub fn hyperbolic_distance(x: &[f64], y: &[f64], m: &ManifoldSpec) -> Result<f64> {
    m.check_point(x, Strictness::Lenient)?;
    m.check_point(y, Strictness::Lenient)?;
    let arg = -m.curvature * minkowski_inner_unchecked(x, y);
    if arg < 1.0 - 1e-6 {
        return Err(Error::DistanceDomain(arg));
    }
    // acosh loses half the digits near 1; the chordal form does not.
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let chord = minkowski_inner_unchecked(&diff, &diff);
    let sk = m.sqrt_k();
    Ok(2.0 * (sk * chord.max(0.0).sqrt() / 2.0).asinh() / sk)
}

/// Stereographic projection from `(-1/sqrt K, 0, ..)` onto the unit disk,
/// `p_i = x_i / (1/sqrt K + x0)`.
pub fn to_poincare(x: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    m.check_point(x, Strictness::Lenient)?;
    let denom = 1.0 / m.sqrt_k() + x[0];
    Ok(x[1..].iter().map(|v| v / denom).collect())
}

pub fn from_poincare(p: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    if p.len() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            actual: p.len(),
        });
    }
    let sq: f64 = p.iter().map(|v| v * v).sum();
    let norm = sq.sqrt();
    if !(norm < 1.0 - 1e-12) {
        return Err(Error::OutsideDisk { norm, row: None });
    }
    let r = 1.0 / m.sqrt_k();
    let denom = 1.0 - sq;
    let mut x = Vec::with_capacity(p.len() + 1);
    x.push(r * (1.0 + sq) / denom);
    x.extend(p.iter().map(|v| r * 2.0 * v / denom));
    Ok(x)
}

/// Central projection onto the Klein disk, `k_i = x_i / x0`.
pub fn to_klein(x: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    m.check_point(x, Strictness::Lenient)?;
    Ok(x[1..].iter().map(|v| v / x[0]).collect())
}

pub fn from_klein(k: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    if k.len() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            actual: k.len(),
        });
    }
    let sq: f64 = k.iter().map(|v| v * v).sum();
    let norm = sq.sqrt();
    if !(norm < 1.0 - 1e-12) {
        return Err(Error::OutsideDisk { norm, row: None });
    }
    let x0 = 1.0 / (m.sqrt_k() * (1.0 - sq).sqrt());
    let mut x = Vec::with_capacity(k.len() + 1);
    x.push(x0);
    x.extend(k.iter().map(|v| v * x0));
    Ok(x)
}

/// Scale factor placing `alpha * (sin theta, cos theta)` on `H^{1,K}`:
/// `sqrt(-sec 2theta) / sqrt(K)`.
pub fn compute_alpha(theta: f64, m: &ManifoldSpec) -> Result<f64> {
    check_angle(theta)?;
    let c = (2.0 * theta).cos();
    if c >= 0.0 {
        return Err(Error::AngleOutOfRange(theta));
    }
    Ok((-1.0 / c).sqrt() / m.sqrt_k())
}

/// Angle of the homogeneous plane through `x` that is rotated about axis `d`.
///
/// Uses `atan2(x0, x_d)`, so `x_d = 0` gives exactly `pi/2`.
#[inline]
pub fn point_angle(x: &[f64], d: usize) -> f64 {
    x[0].atan2(x[d])
}

/// Angle of the plane hyperbolically equidistant from the planes at
/// `theta1` and `theta2` on the `(x0, x_d)` slice. Independent of `K`.
pub fn midpoint_angle(theta1: f64, theta2: f64) -> Result<f64> {
    check_angle(theta1)?;
    check_angle(theta2)?;
    let (lo, hi) = if theta1 <= theta2 {
        (theta1, theta2)
    } else {
        (theta2, theta1)
    };
    if lo == hi {
        return Ok(lo);
    }
    if lo + hi == PI {
        return Ok(FRAC_PI_2);
    }
    // cot(theta_m) is the root in [-1, 1] of c^2 - 2Vc + 1 = 0 with
    // V = cos(hi - lo) / sin(lo + hi). Rationalized, the root is
    // sin(lo + hi) / (cos(hi - lo) + sqrt(V^2 - 1) |sin(lo + hi)|), and
    // (V^2 - 1) sin^2(lo + hi) = cos(2 lo) cos(2 hi).
    let mut disc = (2.0 * lo).cos() * (2.0 * hi).cos();
    if disc < 0.0 {
        if disc >= -1e-12 {
            disc = 0.0;
        } else {
            return Err(Error::NegativeDiscriminant(disc));
        }
    }
    let cot = (lo + hi).sin() / ((hi - lo).cos() + disc.sqrt());
    let theta = 1.0_f64.atan2(cot);
    Ok(theta.clamp(lo, hi))
}

/// Arithmetic mean of two angles.
pub fn naive_midpoint_angle(theta1: f64, theta2: f64) -> f64 {
    0.5 * (theta1 + theta2)
}

fn check_tangent_at_origin(v: &[f64], m: &ManifoldSpec) -> Result<()> {
    if v.len() != m.dim + 1 {
        return Err(Error::DimensionMismatch {
            expected: m.dim + 1,
            actual: v.len(),
        });
    }
    if v[0] != 0.0 {
        return Err(Error::NotTangentAtOrigin(v[0]));
    }
    Ok(())
}

/// Exponential map at the apex for a tangent vector with `v0 = 0`.
pub fn exp_map_origin(v: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    check_tangent_at_origin(v, m)?;
    let sk = m.sqrt_k();
    let norm = v[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut out = m.origin();
    if norm == 0.0 {
        return Ok(out);
    }
    let r = sk * norm;
    out[0] = r.cosh() / sk;
    let s = r.sinh() / r;
    for (o, vi) in out[1..].iter_mut().zip(&v[1..]) {
        *o = s * vi;
    }
    Ok(out)
}

/// Transports a tangent vector at the apex along the geodesic to `mu`:
/// `v + <mu,v>_L / (1/K - <o,mu>_L) (o + mu)`.
pub fn parallel_transport_from_origin(v: &[f64], mu: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    check_tangent_at_origin(v, m)?;
    m.check_point(mu, Strictness::Lenient)?;
    let o = m.origin();
    let coeff = minkowski_inner_unchecked(mu, v)
        / (1.0 / m.curvature - minkowski_inner_unchecked(&o, mu));
    let out: Vec<f64> = v
        .iter()
        .zip(o.iter().zip(mu))
        .map(|(vi, (oi, mi))| vi + coeff * (oi + mi))
        .collect();
    debug_assert!({
        let tangency = minkowski_inner_unchecked(&out, mu);
        let scale = 1.0 + mu[0].abs() * out.iter().map(|a| a.abs()).fold(0.0, f64::max);
        tangency.abs() <= 1e-9 * scale
    });
    Ok(out)
}

/// Exponential map at `mu` for `u` tangent at `mu`.
pub fn exp_map(mu: &[f64], u: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    m.check_point(mu, Strictness::Lenient)?;
    if u.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            actual: u.len(),
        });
    }
    let tangency = minkowski_inner_unchecked(u, mu);
    let scale = 1.0
        + mu.iter().map(|a| a.abs()).fold(0.0, f64::max)
            * u.iter().map(|a| a.abs()).fold(0.0, f64::max);
    if tangency.abs() > 1e-8 * scale {
        return Err(Error::NotTangent(tangency));
    }
    let norm = minkowski_inner_unchecked(u, u).max(0.0).sqrt();
    if norm == 0.0 {
        return Ok(mu.to_vec());
    }
    let lambda = m.sqrt_k() * norm;
    let (c, s) = (lambda.cosh(), lambda.sinh() / lambda);
    Ok(mu.iter().zip(u).map(|(mi, ui)| c * mi + s * ui).collect())
}

/// A point on the geodesic submanifold cut out of `H^{D,K}` by the plane
/// `x0 cos theta - x_d sin theta = 0`.
///
/// Starts from the plane's point nearest the apex and folds in one
/// hyperbolic rotation per remaining spacelike axis, in ascending order,
/// using `t_params[j]` for the j-th such axis.
pub fn geodesic_point(theta: f64, d: usize, t_params: &[f64], m: &ManifoldSpec) -> Result<Vec<f64>> {
    let alpha = compute_alpha(theta, m)?;
    if d == 0 || d > m.dim {
        return Err(Error::InvalidSplitDim {
            dim: d,
            kind: "hyperboloid",
            manifold_dim: m.dim,
        });
    }
    if t_params.len() != m.dim - 1 {
        return Err(Error::DimensionMismatch {
            expected: m.dim - 1,
            actual: t_params.len(),
        });
    }
    let mut v = vec![0.0; m.dim + 1];
    v[0] = alpha * theta.sin();
    v[d] = alpha * theta.cos();
    let inv_sk = 1.0 / m.sqrt_k();
    let axes = (1..=m.dim).filter(|&a| a != d);
    for (axis, &t) in axes.zip(t_params) {
        let (c, s) = (t.cosh(), t.sinh());
        for vi in v.iter_mut() {
            *vi *= c;
        }
        v[axis] = s * inv_sk;
    }
    Ok(v)
}

/// Recomputes `x0` from the spatial coordinates so that `x` sits on the sheet
/// to working precision.
pub fn project_to_sheet(x: &mut [f64], m: &ManifoldSpec) {
    let spatial: f64 = x[1..].iter().map(|a| a * a).sum();
    x[0] = (1.0 / m.curvature + spatial).sqrt();
}

/// Signed residual of the plane equation `x0 cos theta - x_d sin theta`.
pub fn plane_residual(x: &[f64], theta: f64, d: usize) -> f64 {
    x[0] * theta.cos() - x[d] * theta.sin()
}
