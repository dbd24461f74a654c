use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Dataset, PointMatrix, Targets};
use crate::error::{Error, Result};
use crate::geometry::{
    exp_map, exp_map_origin, parallel_transport_from_origin, project_to_sheet, ManifoldSpec,
};
use crate::rng::{stream, Domain};

/// Parameters of a wrapped-Gaussian mixture on `H^{D,K}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub n_classes: usize,
    pub dim: usize,
    pub curvature: f64,
    /// Covariance scale `a` in `Sigma = a C C^T / D`.
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for GaussianMixtureSpec {
    fn default() -> Self {
        Self {
            n_classes: 2,
            dim: 2,
            curvature: 1.0,
            noise_scale: 1.0,
            seed: 0,
        }
    }
}

/// Per-class parameters derived from a [`GaussianMixtureSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    pub means: Vec<Vec<f64>>,
    /// `sqrt(a/D) C_k`, row-major `D x D`; `Sigma_k = L L^T`.
    pub cov_factors: Vec<Vec<f64>>,
    pub class_probs: Vec<f64>,
}

impl MixtureParams {
    pub fn covariance(&self, class: usize, dim: usize) -> Vec<f64> {
        let l = &self.cov_factors[class];
        let mut sigma = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                sigma[i * dim + j] = (0..dim).map(|k| l[i * dim + k] * l[j * dim + k]).sum();
            }
        }
        sigma
    }
}

impl GaussianMixtureSpec {
    pub fn manifold(&self) -> Result<ManifoldSpec> {
        ManifoldSpec::hyperboloid(self.dim, self.curvature)
    }

    fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Config("mixture needs at least 2 classes".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config(format!(
                "noise scale must be a finite nonnegative number, got {}",
                self.noise_scale
            )));
        }
        self.manifold().map(|_| ())
    }

    pub fn params(&self) -> Result<MixtureParams> {
        self.validate()?;
        let m = self.manifold()?;
        let d = self.dim;
        let factor_scale = (self.noise_scale / d as f64).sqrt();
        let mut means = Vec::with_capacity(self.n_classes);
        let mut cov_factors = Vec::with_capacity(self.n_classes);
        for k in 0..self.n_classes {
            let mut rng = stream(self.seed, Domain::MixtureClass, k as u64);
            let mut tangent = vec![0.0; d + 1];
            for t in tangent[1..].iter_mut() {
                *t = rng.sample(StandardNormal);
            }
            let mut mu = exp_map_origin(&tangent, &m)?;
            project_to_sheet(&mut mu, &m);
            means.push(mu);
            let c: Vec<f64> = (0..d * d)
                .map(|_| factor_scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            cov_factors.push(c);
        }
        let mut rng = stream(self.seed, Domain::MixtureWeights, 0);
        let raw: Vec<f64> = (0..self.n_classes).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let class_probs = raw.iter().map(|w| w / total).collect();
        Ok(MixtureParams {
            means,
            cov_factors,
            class_probs,
        })
    }
}

fn draw_class(u: f64, probs: &[f64]) -> usize {
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// Draws `n_samples` labeled points from the wrapped-Gaussian mixture.
///
/// Each sample draws a class, a tangent vector `v ~ N(0, Sigma_k)` at the
/// apex, transports it to `mu_k` and maps it onto the manifold. Sample `i`
/// uses its own stream, so the output is independent of thread count.
pub fn sample_gaussian_mixture(spec: &GaussianMixtureSpec, n_samples: usize) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::Empty("n_samples must be >= 1"));
    }
    let params = spec.params()?;
    let m = spec.manifold()?;
    let d = spec.dim;
    let samples: Vec<(usize, Vec<f64>)> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(usize, Vec<f64>)> {
            let mut rng = stream(spec.seed, Domain::MixtureSample, i as u64);
            let class = draw_class(rng.random::<f64>(), &params.class_probs);
            let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let l = &params.cov_factors[class];
            let mut v = vec![0.0; d + 1];
            for r in 0..d {
                v[r + 1] = (0..d).map(|c| l[r * d + c] * z[c]).sum();
            }
            let mu = &params.means[class];
            let moved = parallel_transport_from_origin(&v, mu, &m)?;
            let mut x = exp_map(mu, &moved, &m)?;
            project_to_sheet(&mut x, &m);
            Ok((class, x))
        })
        .collect::<Result<_>>()?;
    let mut points = PointMatrix::new(d + 1);
    let mut labels = Vec::with_capacity(n_samples);
    for (class, x) in samples {
        points.push_row(&x)?;
        labels.push(class);
    }
    Dataset::new(
        m,
        points,
        Targets::Classes {
            ids: labels,
            vocabulary: (0..spec.n_classes as i64).collect(),
        },
    )
}
