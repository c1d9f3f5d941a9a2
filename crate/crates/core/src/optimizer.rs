//! Projected gradient with Armijo line search.
//!
//! Two variants share one loop. `FeasibleDirection` projects once per
//! iteration and backtracks along the segment to the projected point.
//! `Boundary` re-projects at every halved step. After accepting at backtrack
//! level `j` both update the trial step as `Δ ← 2Δ / 2^j`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{max_affine_min, Cut};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("line search exceeded 2^-60 at iteration {iteration}")]
    LineSearchOverflow { iteration: usize },
    #[error("gap stopping needs an upper box bound lambda_max")]
    MissingBox,
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("projection failed: {0}")]
    Projection(String),
    #[error("objective is not finite at the starting point")]
    NonFiniteStart,
}

/// A smooth convex objective over a closed convex set.
pub trait Problem {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    /// Euclidean projection onto the feasible set, in place.
    fn project(&self, x: &mut [f64]) -> Result<(), OptimizerError>;
    /// Lower ends of the box used by the gap bound.
    fn lower_bounds(&self) -> Vec<f64> {
        vec![f64::NEG_INFINITY; self.dim()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    FeasibleDirection,
    Boundary,
}

/// Stop when the objective dropped by at most `tol * |f|` over `window` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallRule {
    pub tol: f64,
    pub window: usize,
}

/// Stop when `u_k - l_k <= eps` with the box `[lower_bounds, lambda_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRule {
    pub eps: f64,
    pub lambda_max: Option<f64>,
    pub max_cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub sigma: f64,
    pub delta_bar: f64,
    pub max_iters: usize,
    pub variant: Variant,
    pub stall: Option<StallRule>,
    pub gap: Option<GapRule>,
    /// Keep a per-iteration line-search log.
    pub record_steps: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            sigma: 0.5,
            delta_bar: 2.0,
            max_iters: 1000,
            variant: Variant::FeasibleDirection,
            stall: Some(StallRule { tol: 1e-9, window: 10 }),
            gap: None,
            record_steps: false,
        }
    }
}

/// Upper bound on the trial step.
pub const DELTA_CAP: f64 = 1e12;
/// Largest backtracking exponent before giving up.
pub const MAX_BACKTRACK: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIterations,
    ObjectiveStall,
    Gap,
    /// The projected step no longer predicts a decrease above rounding level.
    Stationary,
}

/// One accepted line search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub f_before: f64,
    pub f_after: f64,
    pub j: u32,
    /// `∇ℓ(λ)ᵀ(z − λ)` of the accepted trial.
    pub directional: f64,
    /// Step size in force during this iteration.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub solution: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CalibrationResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the start value")
    }
}

/// Rounding level of an objective value.
fn noise(f: f64) -> f64 {
    64.0 * f64::EPSILON * f.abs().max(1.0)
}

impl OptimizerConfig {
    fn validate(&self) -> Result<(), OptimizerError> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(OptimizerError::InvalidConfig(format!("sigma {} not in (0,1)", self.sigma)));
        }
        if !(self.delta_bar > 0.0 && self.delta_bar.is_finite()) {
            return Err(OptimizerError::InvalidConfig(format!("delta_bar {} must be positive", self.delta_bar)));
        }
        if self.max_iters == 0 {
            return Err(OptimizerError::InvalidConfig("max_iters must be at least 1".into()));
        }
        if let Some(g) = &self.gap {
            if g.lambda_max.is_none() {
                return Err(OptimizerError::MissingBox);
            }
        }
        Ok(())
    }
}

/// Runs the configured variant from `x0`; the start is projected first.
pub fn minimize<P: Problem + ?Sized>(
    p: &P,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<CalibrationResult, OptimizerError> {
    cfg.validate()?;
    let started = Instant::now();
    let n = p.dim();
    let mut x = x0.to_vec();
    p.project(&mut x)?;
    let mut f = p.value(&x);
    if !f.is_finite() {
        return Err(OptimizerError::NonFiniteStart);
    }
    let mut trace = vec![f];
    let mut steps = Vec::new();
    let mut delta = cfg.delta_bar;
    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut cuts: Vec<Cut> = Vec::new();
    let mut bounds = (None, None);
    let box_ = cfg.gap.map(|r| (p.lower_bounds(), vec![r.lambda_max.unwrap(); n]));
    let mut reason = StopReason::MaxIterations;
    let mut iters = 0;

    'outer: while iters < cfg.max_iters {
        p.gradient(&x, &mut g);
        if let (Some(rule), Some((lo, hi))) = (cfg.gap, &box_) {
            cuts.push(Cut { x: x.clone(), f, g: g.clone() });
            if cuts.len() > rule.max_cuts.max(1) {
                cuts.remove(0);
            }
            let u = trace.iter().copied().fold(f64::INFINITY, f64::min);
            let l = max_affine_min(&cuts, lo, hi).min(u);
            bounds = (Some(u), Some(l));
            if u - l <= rule.eps {
                reason = StopReason::Gap;
                break;
            }
        }
        let mut j: u32 = 0;
        let accepted = loop {
            let scale = 0.5f64.powi(j as i32);
            match cfg.variant {
                Variant::FeasibleDirection => {
                    if j == 0 {
                        for k in 0..n {
                            z[k] = x[k] - delta * g[k];
                        }
                        p.project(&mut z)?;
                    }
                    if j == 0 {
                        trial.copy_from_slice(&z);
                    } else {
                        for k in 0..n {
                            trial[k] = x[k] + scale * (z[k] - x[k]);
                        }
                        // the segment is feasible; this only removes rounding below the floor
                        p.project(&mut trial)?;
                    }
                }
                Variant::Boundary => {
                    for k in 0..n {
                        z[k] = x[k] - delta * scale * g[k];
                    }
                    p.project(&mut z)?;
                    trial.copy_from_slice(&z);
                }
            }
            let dz: f64 = g.iter().zip(z.iter().zip(&x)).map(|(gi, (zi, xi))| gi * (zi - xi)).sum();
            let predicted = match cfg.variant {
                Variant::FeasibleDirection => cfg.sigma * scale * dz,
                Variant::Boundary => cfg.sigma * dz,
            };
            if j == 0 && (predicted >= -noise(f) || zero_step(&z, &x)) {
                reason = StopReason::Stationary;
                break 'outer;
            }
            let ft = p.value(&trial);
            if ft.is_finite() && ft <= f + predicted {
                break (ft, dz);
            }
            if -predicted < noise(f) {
                reason = StopReason::Stationary;
                break 'outer;
            }
            j += 1;
            if j > MAX_BACKTRACK {
                return Err(OptimizerError::LineSearchOverflow { iteration: iters });
            }
        };
        let (ft, dz) = accepted;
        if cfg.record_steps {
            steps.push(StepRecord { f_before: f, f_after: ft, j, directional: dz, delta });
        }
        x.copy_from_slice(&trial);
        f = ft;
        trace.push(f);
        iters += 1;
        delta = (2.0 * delta * 0.5f64.powi(j as i32)).min(DELTA_CAP);
        if let Some(rule) = cfg.stall {
            let k = trace.len() - 1;
            if k >= rule.window && trace[k - rule.window] - f <= rule.tol * f.abs() {
                reason = StopReason::ObjectiveStall;
                break;
            }
        }
    }
    Ok(CalibrationResult {
        solution: x,
        objective_trace: trace,
        stop_reason: reason,
        upper_bound: bounds.0,
        lower_bound: bounds.1,
        iterations: iters,
        steps,
        wall_time: started.elapsed(),
    })
}

fn zero_step(z: &[f64], x: &[f64]) -> bool {
    let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    z.iter().zip(x).all(|(a, b)| (a - b).abs() <= 4.0 * f64::EPSILON * scale)
}

pub fn pg_feasible_direction<P: Problem + ?Sized>(
    p: &P,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<CalibrationResult, OptimizerError> {
    minimize(p, x0, &OptimizerConfig { variant: Variant::FeasibleDirection, ..cfg.clone() })
}

pub fn pg_boundary<P: Problem + ?Sized>(
    p: &P,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<CalibrationResult, OptimizerError> {
    minimize(p, x0, &OptimizerConfig { variant: Variant::Boundary, ..cfg.clone() })
}

/// Upper and lower bounds from a set of cuts over `[lo, hi]`.
pub fn gap_bounds(cuts: &[Cut], lo: &[f64], hi: Option<&[f64]>) -> Result<(f64, f64), OptimizerError> {
    let hi = hi.ok_or(OptimizerError::MissingBox)?;
    if cuts.is_empty() {
        return Err(OptimizerError::InvalidConfig("gap bounds need at least one cut".into()));
    }
    let u = cuts.iter().map(|c| c.f).fold(f64::INFINITY, f64::min);
    Ok((u, max_affine_min(cuts, lo, hi).min(u)))
}

/// Separable quadratic `Σ a_k (x_k − c_k)²` over `x ≥ floor`, for tests and examples.
#[derive(Debug, Clone)]
pub struct BoxQuadratic {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub floor: f64,
}

impl Problem for BoxQuadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..x.len()).map(|k| self.a[k] * (x[k] - self.c[k]).powi(2)).sum()
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        for k in 0..x.len() {
            g[k] = 2.0 * self.a[k] * (x[k] - self.c[k]);
        }
    }

    fn project(&self, x: &mut [f64]) -> Result<(), OptimizerError> {
        for v in x.iter_mut() {
            *v = v.max(self.floor);
        }
        Ok(())
    }

    fn lower_bounds(&self) -> Vec<f64> {
        vec![self.floor; self.a.len()]
    }
}
