//! Intensity model without covariates.
//!
//! One rate `λ` per cell of the sample. The loss is the Poisson negative
//! log-likelihood plus two similarity penalties weighted by observation
//! counts: one between intervals of the same time group, one between
//! neighbouring zones in the same interval. Cells without observations carry
//! no likelihood term and are pinned to `ε`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{AggregatedSample, Dims};
use crate::optimizer::{minimize, CalibrationResult, OptimizerConfig, OptimizerError, Problem};

/// Default feasibility floor.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoRegError {
    #[error("intensity at cell {0} is not positive")]
    NonPositiveIntensity(usize),
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

/// A time group: intervals sharing one penalty weight `W_G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGroup {
    pub intervals: Vec<usize>,
    pub weight: f64,
}

/// Weighted neighbour pair `w_ij` between zones `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceWeight {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct NoRegModel {
    dims: Dims,
    n: Vec<f64>,
    m: Vec<f64>,
    durations: Vec<f64>,
    groups: Vec<TimeGroup>,
    space: Vec<SpaceWeight>,
    epsilon: f64,
}

impl NoRegModel {
    pub fn new(
        sample: &AggregatedSample,
        groups: Vec<TimeGroup>,
        space: Vec<SpaceWeight>,
        epsilon: f64,
    ) -> Result<Self, NoRegError> {
        let dims = sample.dims();
        if !(epsilon > 0.0) {
            return Err(NoRegError::InvalidSpec(format!("epsilon {epsilon} must be positive")));
        }
        let mut seen = vec![false; dims.intervals];
        for g in &groups {
            if !(g.weight >= 0.0 && g.weight.is_finite()) {
                return Err(NoRegError::InvalidSpec(format!("group weight {} must be non-negative", g.weight)));
            }
            for &t in &g.intervals {
                if t >= dims.intervals || std::mem::replace(&mut seen[t], true) {
                    return Err(NoRegError::InvalidSpec(format!("interval {t} is out of range or in two groups")));
                }
            }
        }
        for w in &space {
            if w.i >= dims.zones || w.j >= dims.zones || w.i == w.j {
                return Err(NoRegError::InvalidSpec(format!("bad zone pair ({}, {})", w.i, w.j)));
            }
            if !(w.weight >= 0.0 && w.weight.is_finite()) {
                return Err(NoRegError::InvalidSpec(format!("space weight {} must be non-negative", w.weight)));
            }
        }
        Ok(NoRegModel {
            dims,
            n: sample.n_tensor().into_iter().map(f64::from).collect(),
            m: sample.m_tensor().into_iter().map(|v| v as f64).collect(),
            durations: sample.durations().to_vec(),
            groups,
            space,
            epsilon,
        })
    }

    /// Sets every group and pair weight to `w_time` and `w_space`.
    pub fn with_weights(mut self, w_time: f64, w_space: f64) -> Self {
        for g in &mut self.groups {
            g.weight = w_time;
        }
        for s in &mut self.space {
            s.weight = w_space;
        }
        self
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn duration(&self, k: usize) -> f64 {
        self.durations[k % self.dims.intervals]
    }

    fn check(&self, lambda: &[f64]) -> Result<(), NoRegError> {
        match (0..lambda.len()).find(|&k| self.n[k] > 0.0 && !(lambda[k] > 0.0)) {
            Some(k) => Err(NoRegError::NonPositiveIntensity(k)),
            None => Ok(()),
        }
    }

    /// `Σ N λ 𝒟 − M log λ` over observed cells.
    pub fn nll(&self, lambda: &[f64]) -> Result<f64, NoRegError> {
        self.check(lambda)?;
        Ok(self.nll_unchecked(lambda))
    }

    fn nll_unchecked(&self, lambda: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..lambda.len() {
            let n = self.n[k];
            if n > 0.0 {
                let m = self.m[k];
                s += n * lambda[k] * self.duration(k);
                if m > 0.0 {
                    s -= m * lambda[k].ln();
                }
            }
        }
        s
    }

    /// `(W_G/2) Σ_{t,t'∈G} N_t N_t' (λ_t − λ_t')²` summed over groups and `(c, i, d)` rows.
    pub fn time_penalty(&self, lambda: &[f64]) -> f64 {
        let t_len = self.dims.intervals;
        let rows = self.n.len() / t_len;
        let mut s = 0.0;
        for g in self.groups.iter().filter(|g| g.weight > 0.0) {
            for r in 0..rows {
                let base = r * t_len;
                // centred form of the double sum: W · S0 · Σ a_t (λ_t − μ)²
                let (mut s0, mut s1) = (0.0, 0.0);
                for &t in &g.intervals {
                    let a = self.n[base + t];
                    s0 += a;
                    s1 += a * lambda[base + t];
                }
                if s0 == 0.0 {
                    continue;
                }
                let mu = s1 / s0;
                let mut q = 0.0;
                for &t in &g.intervals {
                    q += self.n[base + t] * (lambda[base + t] - mu).powi(2);
                }
                s += g.weight * s0 * q;
            }
        }
        s
    }

    /// `Σ_{i≠j} (w_ij/2) N_i N_j (λ_i − λ_j)²` over ordered pairs, per `(c, d, t)`.
    pub fn space_penalty(&self, lambda: &[f64]) -> f64 {
        let Dims { types, classes, intervals, .. } = self.dims;
        let mut s = 0.0;
        for w in self.space.iter().filter(|w| w.weight > 0.0) {
            for c in 0..types {
                for d in 0..classes {
                    for t in 0..intervals {
                        let a = self.dims.index(c, w.i, d, t);
                        let b = self.dims.index(c, w.j, d, t);
                        s += w.weight * self.n[a] * self.n[b] * (lambda[a] - lambda[b]).powi(2);
                    }
                }
            }
        }
        s
    }

    pub fn loss(&self, lambda: &[f64]) -> Result<f64, NoRegError> {
        self.check(lambda)?;
        Ok(self.loss_unchecked(lambda))
    }

    fn loss_unchecked(&self, lambda: &[f64]) -> f64 {
        self.nll_unchecked(lambda) + self.time_penalty(lambda) + self.space_penalty(lambda)
    }

    pub fn loss_gradient(&self, lambda: &[f64]) -> Result<Vec<f64>, NoRegError> {
        self.check(lambda)?;
        let mut g = vec![0.0; lambda.len()];
        self.gradient_into(lambda, &mut g);
        Ok(g)
    }

    fn gradient_into(&self, lambda: &[f64], g: &mut [f64]) {
        for k in 0..lambda.len() {
            g[k] = if self.n[k] > 0.0 { self.n[k] * self.duration(k) - self.m[k] / lambda[k] } else { 0.0 };
        }
        let t_len = self.dims.intervals;
        let rows = self.n.len() / t_len;
        for gr in self.groups.iter().filter(|g| g.weight > 0.0) {
            for r in 0..rows {
                let base = r * t_len;
                let (mut s0, mut s1) = (0.0, 0.0);
                for &t in &gr.intervals {
                    let a = self.n[base + t];
                    s0 += a;
                    s1 += a * lambda[base + t];
                }
                for &t in &gr.intervals {
                    let k = base + t;
                    g[k] += 2.0 * gr.weight * self.n[k] * (lambda[k] * s0 - s1);
                }
            }
        }
        let Dims { types, classes, intervals, .. } = self.dims;
        for w in self.space.iter().filter(|w| w.weight > 0.0) {
            for c in 0..types {
                for d in 0..classes {
                    for t in 0..intervals {
                        let a = self.dims.index(c, w.i, d, t);
                        let b = self.dims.index(c, w.j, d, t);
                        let v = 2.0 * w.weight * self.n[a] * self.n[b] * (lambda[a] - lambda[b]);
                        g[a] += v;
                        g[b] -= v;
                    }
                }
            }
        }
    }

    /// Projection onto `{λ ≥ ε}` with unobserved cells at `ε`.
    pub fn project(&self, lambda: &mut [f64]) {
        for (k, v) in lambda.iter_mut().enumerate() {
            *v = if self.n[k] > 0.0 { v.max(self.epsilon) } else { self.epsilon };
        }
    }

    /// `M / (N 𝒟)` floored at `ε`, and `ε` where `N = 0`.
    pub fn empirical(&self) -> Vec<f64> {
        let mut l: Vec<f64> =
            (0..self.n.len()).map(|k| if self.n[k] > 0.0 { self.m[k] / (self.n[k] * self.duration(k)) } else { 0.0 }).collect();
        self.project(&mut l);
        l
    }

    pub fn calibrate(&self, init: Init, cfg: &OptimizerConfig) -> Result<CalibrationResult, NoRegError> {
        let x0 = match init {
            Init::Empirical => self.empirical(),
            Init::Constant(v) => vec![v; self.n.len()],
        };
        Ok(minimize(self, &x0, cfg)?)
    }
}

/// Starting point of the no-covariate calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    #[default]
    Empirical,
    Constant(f64),
}

impl Problem for NoRegModel {
    fn dim(&self) -> usize {
        self.n.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.loss_unchecked(x)
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.gradient_into(x, g)
    }

    fn project(&self, x: &mut [f64]) -> Result<(), OptimizerError> {
        NoRegModel::project(self, x);
        Ok(())
    }

    fn lower_bounds(&self) -> Vec<f64> {
        vec![self.epsilon; self.n.len()]
    }
}

/// Empirical estimate of a sample, floored at `epsilon`.
pub fn empirical_estimate(sample: &AggregatedSample, epsilon: f64) -> Vec<f64> {
    let mut l = sample.empirical_rates(epsilon);
    for (k, v) in l.iter_mut().enumerate() {
        if sample.n_at(k) == 0 {
            *v = epsilon;
        }
        *v = v.max(epsilon);
    }
    l
}

/// Time groups of intervals by residue `t mod period`, all with weight `w`.
pub fn modular_groups(n_intervals: usize, period: usize, w: f64) -> Vec<TimeGroup> {
    (0..period)
        .map(|r| TimeGroup { intervals: (r..n_intervals).step_by(period).collect(), weight: w })
        .filter(|g| !g.intervals.is_empty())
        .collect()
}

/// Uniform weights on neighbour pairs.
pub fn uniform_space_weights(pairs: &[(usize, usize)], w: f64) -> Vec<SpaceWeight> {
    pairs.iter().map(|&(i, j)| SpaceWeight { i, j, weight: w }).collect()
}
