use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided normal quantile for a 95% interval.
const Z_95: f64 = 1.959963984540054;

/// Outcome of a two-tailed paired t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TTestOutcome {
    /// Every paired difference is zero.
    Identical,
    /// All differences equal a nonzero constant: `t = ±inf`, `p = 0`.
    ZeroVariance { mean_diff: f64 },
    Test { t: f64, p: f64, df: usize },
}

impl TTestOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            TTestOutcome::Identical => None,
            TTestOutcome::ZeroVariance { .. } => Some(0.0),
            TTestOutcome::Test { p, .. } => Some(*p),
        }
    }
}

/// Paired t-test on `a - b`, with p from Student-t on `n - 1` degrees of
/// freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestOutcome> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::Config("paired t-test needs at least 2 pairs".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(TTestOutcome::Identical);
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 || var.sqrt() <= 1e-15 * mean.abs() {
        return Ok(TTestOutcome::ZeroVariance { mean_diff: mean });
    }
    let t = mean / (var / n).sqrt();
    let df = diffs.len() - 1;
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    let p = 2.0 * dist.cdf(-t.abs());
    Ok(TTestOutcome::Test { t, p, df })
}

/// Mean, sample standard deviation and a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            std: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            n,
        };
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let std = if n > 1 {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let half = Z_95 * std / nf.sqrt();
    Summary {
        mean,
        std,
        ci_low: mean - half,
        ci_high: mean + half,
        n,
    }
}

/// Least-squares line `y = slope x + intercept` and its R².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Config("linear fit needs at least 2 points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("linear fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
