use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GpError, KernelSpec};

/// One noisy measurement of the modelled function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Vec<f64>>,
    pub value: f64,
}

impl Observation {
    pub fn new(point: Vec<f64>, value: f64) -> Self {
        Self { point, context: None, value }
    }

    pub fn with_context(point: Vec<f64>, context: Vec<f64>, value: f64) -> Self {
        Self { point, context: Some(context), value }
    }

    /// Flat kernel input `[p, z]`.
    pub fn input(&self) -> Vec<f64> {
        join_input(&self.point, self.context.as_deref())
    }
}

/// Concatenates a parameter vector and an optional context vector.
pub fn join_input(point: &[f64], context: Option<&[f64]>) -> Vec<f64> {
    let mut v = Vec::with_capacity(point.len() + context.map_or(0, <[f64]>::len));
    v.extend_from_slice(point);
    if let Some(z) = context {
        v.extend_from_slice(z);
    }
    v
}

/// Posterior mean and variance at one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

impl Posterior {
    pub fn std(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Exact GP regressor with fixed hyperparameters.
///
/// Keeps the lower Cholesky factor `L` of `K_n + σ²I` and the whitened,
/// prior-centered targets `w = L⁻¹(y − K)`. Appending an observation adds one
/// row to `L` and one entry to `w`.
#[derive(Debug, Clone)]
pub struct GpModel {
    spec: KernelSpec,
    inputs: Vec<Vec<f64>>,
    observations: Vec<Observation>,
    // row i holds L[i][0..=i]
    chol: Vec<Vec<f64>>,
    whitened: Vec<f64>,
}

/// Pending Cholesky row for one extra input.
struct Extension {
    row: Vec<f64>,
    pivot: f64,
}

impl GpModel {
    pub fn new(spec: KernelSpec) -> Result<Self, GpError> {
        spec.validate()?;
        Ok(Self {
            spec,
            inputs: Vec::new(),
            observations: Vec::new(),
            chol: Vec::new(),
            whitened: Vec::new(),
        })
    }

    /// Builds a model with a single batch factorization of the Gram matrix.
    pub fn from_observations(spec: KernelSpec, observations: &[Observation]) -> Result<Self, GpError> {
        let mut model = Self::new(spec)?;
        for obs in observations {
            model.check_observation(obs)?;
        }
        let inputs: Vec<Vec<f64>> = observations.iter().map(Observation::input).collect();
        let n = inputs.len();
        if n == 0 {
            return Ok(model);
        }
        let noise = model.spec.noise_variance();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            model.spec.covariance(&inputs[i], &inputs[j]) + if i == j { noise } else { 0.0 }
        });
        let factor = gram
            .cholesky()
            .ok_or(GpError::Singular { index: n - 1, pivot: f64::NAN })?;
        let l = factor.l();
        model.chol = (0..n).map(|i| (0..=i).map(|j| l[(i, j)]).collect()).collect();
        let centered: Vec<f64> = observations
            .iter()
            .map(|o| o.value - model.spec.prior_mean)
            .collect();
        model.whitened = forward_solve(&model.chol, &centered);
        model.inputs = inputs;
        model.observations = observations.to_vec();
        Ok(model)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Replaces the prior mean and re-whitens the targets.
    pub fn set_prior_mean(&mut self, prior_mean: f64) {
        self.spec.prior_mean = prior_mean;
        let centered: Vec<f64> = self.observations.iter().map(|o| o.value - prior_mean).collect();
        self.whitened = forward_solve(&self.chol, &centered);
    }

    fn check_observation(&self, obs: &Observation) -> Result<(), GpError> {
        if obs.point.len() != self.spec.param_dim() {
            return Err(GpError::DimensionMismatch {
                expected: self.spec.param_dim(),
                got: obs.point.len(),
            });
        }
        match (&obs.context, self.spec.context_dim()) {
            (None, 0) => {}
            (Some(z), d) if z.len() == d => {}
            (Some(z), d) => {
                return Err(GpError::DimensionMismatch { expected: d, got: z.len() })
            }
            (None, d) => return Err(GpError::MissingContext { expected: d }),
        }
        if !obs.value.is_finite() {
            return Err(GpError::NonFinite("observation value"));
        }
        if obs.point.iter().chain(obs.context.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(GpError::NonFinite("observation coordinate"));
        }
        Ok(())
    }

    fn extension(&self, x: &[f64]) -> Result<Extension, GpError> {
        let k: Vec<f64> = self.inputs.iter().map(|xi| self.spec.covariance(xi, x)).collect();
        let row = forward_solve(&self.chol, &k);
        let d = self.spec.covariance(x, x) + self.spec.noise_variance() - dot(&row, &row);
        if d.is_nan() || d <= 0.0 {
            return Err(GpError::Singular { index: self.inputs.len(), pivot: d });
        }
        Ok(Extension { row, pivot: d.sqrt() })
    }

    /// Appends one observation with a rank-one extension of the factor.
    pub fn add_observation(&mut self, obs: Observation) -> Result<(), GpError> {
        self.check_observation(&obs)?;
        let x = obs.input();
        let ext = self.extension(&x)?;
        let w = (obs.value - self.spec.prior_mean - dot(&ext.row, &self.whitened)) / ext.pivot;
        let mut row = ext.row;
        row.push(ext.pivot);
        self.chol.push(row);
        self.whitened.push(w);
        self.inputs.push(x);
        self.observations.push(obs);
        Ok(())
    }

    /// Non-mutating variant of [`GpModel::add_observation`].
    pub fn with_observation(&self, obs: Observation) -> Result<Self, GpError> {
        let mut next = self.clone();
        next.add_observation(obs)?;
        Ok(next)
    }

    /// `L⁻¹ k_n(x)` for one flat input.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self.inputs.iter().map(|xi| self.spec.covariance(xi, x)).collect();
        forward_solve(&self.chol, &k)
    }

    fn posterior_unchecked(&self, x: &[f64]) -> Posterior {
        let v = self.project(x);
        Posterior {
            mean: self.spec.prior_mean + dot(&v, &self.whitened),
            variance: (self.spec.covariance(x, x) - dot(&v, &v)).max(0.0),
        }
    }

    /// Posterior at flat query inputs `[p, z]`.
    pub fn posterior(&self, queries: &[Vec<f64>]) -> Result<Vec<Posterior>, GpError> {
        for q in queries {
            self.spec.check_input(q)?;
        }
        Ok(queries.par_iter().map(|q| self.posterior_unchecked(q)).collect())
    }

    pub fn posterior_at(&self, query: &[f64]) -> Result<Posterior, GpError> {
        self.spec.check_input(query)?;
        Ok(self.posterior_unchecked(query))
    }

    /// Posterior the model would have after adding `artificial`, without
    /// mutating the model.
    pub fn hypothetical_posterior(
        &self,
        artificial: &Observation,
        queries: &[Vec<f64>],
    ) -> Result<Vec<Posterior>, GpError> {
        self.check_observation(artificial)?;
        for q in queries {
            self.spec.check_input(q)?;
        }
        let xa = artificial.input();
        let ext = self.extension(&xa)?;
        let wa = (artificial.value - self.spec.prior_mean - dot(&ext.row, &self.whitened)) / ext.pivot;
        Ok(queries
            .par_iter()
            .map(|q| {
                let v = self.project(q);
                let extra = (self.spec.covariance(q, &xa) - dot(&ext.row, &v)) / ext.pivot;
                Posterior {
                    mean: self.spec.prior_mean + dot(&v, &self.whitened) + extra * wa,
                    variance: (self.spec.covariance(q, q) - dot(&v, &v) - extra * extra).max(0.0),
                }
            })
            .collect())
    }

    /// Posterior over a fixed query set, retaining the projections needed for
    /// posterior cross-covariances.
    pub fn batch_posterior<'a>(&'a self, queries: &'a [Vec<f64>]) -> Result<BatchPosterior<'a>, GpError> {
        for q in queries {
            self.spec.check_input(q)?;
        }
        let rows: Vec<(Vec<f64>, Posterior)> = queries
            .par_iter()
            .map(|q| {
                let v = self.project(q);
                let p = Posterior {
                    mean: self.spec.prior_mean + dot(&v, &self.whitened),
                    variance: (self.spec.covariance(q, q) - dot(&v, &v)).max(0.0),
                };
                (v, p)
            })
            .collect();
        let (projections, posteriors) = rows.into_iter().unzip();
        Ok(BatchPosterior {
            spec: &self.spec,
            queries,
            projections,
            posteriors,
        })
    }
}

/// Posterior over a fixed set of queries.
#[derive(Debug, Clone)]
pub struct BatchPosterior<'a> {
    spec: &'a KernelSpec,
    queries: &'a [Vec<f64>],
    projections: Vec<Vec<f64>>,
    posteriors: Vec<Posterior>,
}

impl BatchPosterior<'_> {
    pub fn len(&self) -> usize {
        self.posteriors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posteriors.is_empty()
    }

    pub fn posteriors(&self) -> &[Posterior] {
        &self.posteriors
    }

    pub fn get(&self, i: usize) -> Posterior {
        self.posteriors[i]
    }

    /// Posterior covariance between queries `i` and `j`.
    #[inline]
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.spec.covariance(&self.queries[i], &self.queries[j])
            - dot(&self.projections[i], &self.projections[j])
    }

    /// Posterior at query `j` after a hypothetical measurement `value` at
    /// query `i`, with the kernel's noise variance.
    #[inline]
    pub fn conditioned(&self, i: usize, value: f64, j: usize) -> Posterior {
        let pi = self.posteriors[i];
        let pj = self.posteriors[j];
        let s = pi.variance + self.spec.noise_variance();
        let c = self.covariance(i, j);
        Posterior {
            mean: pj.mean + c * (value - pi.mean) / s,
            variance: (pj.variance - c * c / s).max(0.0),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn forward_solve(chol: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rhs.len());
    for (i, row) in chol.iter().enumerate() {
        let s = rhs[i] - dot(&row[..i], &out);
        out.push(s / row[i]);
    }
    out
}
