//! Covariate model: the expected count of cell `(c, i, d, t)` is `βᵀx_i`
//! with one coefficient vector per `(c, d, t)` block.
//!
//! The feasible set asks `βᵀx_i ≥ ε` for every zone with at least one
//! observation of the type, and `0 ≤ β_p ≤ 1` on the population coordinate
//! `p`. Blocks share no variables or constraints, so they are calibrated
//! independently; a joint mode over all blocks is kept for checking.
//!
//! Projection onto the block constraints is an exact dual active-set solve.
//! Dykstra's cyclic projection is provided too; it is simple but slow when
//! covariate rows are nearly parallel, which is the common case.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{AggregatedSample, Dims};
use crate::optimizer::{minimize, CalibrationResult, OptimizerConfig, OptimizerError, Problem, StopReason};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;
/// Largest constraint violation accepted after projection.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Starting value of every coefficient before projection.
pub const INITIAL_BETA: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CovError {
    #[error("invalid covariate model: {0}")]
    InvalidSpec(String),
    #[error("beta of block {block} gives count {count} below epsilon at zone {zone}")]
    InfeasibleBeta { block: usize, zone: usize, count: f64 },
    #[error("feasible set is empty: {0}")]
    InfeasibleSet(String),
    #[error(transparent)]
    Optimizer(OptimizerError),
}

impl From<OptimizerError> for CovError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::Projection(msg) => CovError::InfeasibleSet(msg),
            other => CovError::Optimizer(other),
        }
    }
}

/// Block calibration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovMode {
    /// One optimizer run per `(c, d, t)` block, in parallel.
    #[default]
    Blocks,
    /// One optimizer run over the concatenated coefficients.
    Joint,
}

#[derive(Debug, Clone)]
pub struct CovModel {
    dims: Dims,
    k: usize,
    x: Vec<Vec<f64>>,
    n: Vec<f64>,
    m: Vec<f64>,
    durations: Vec<f64>,
    epsilon: f64,
    pop: Option<usize>,
    // zones carrying constraints, per type
    used: Vec<Vec<usize>>,
}

/// Coefficients of all blocks, `K` per block, blocks ordered by `(c, d, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovFit {
    pub beta: Vec<f64>,
    pub summary: CalibrationResult,
    pub blocks: Vec<CalibrationResult>,
}

impl CovModel {
    /// `x[i]` holds the covariates of zone `i`; `pop` is the 0-based index of
    /// the population coordinate, or `None` for no box constraint.
    pub fn new(sample: &AggregatedSample, x: Vec<Vec<f64>>, epsilon: f64, pop: Option<usize>) -> Result<Self, CovError> {
        let dims = sample.dims();
        if !(epsilon > 0.0) {
            return Err(CovError::InvalidSpec(format!("epsilon {epsilon} must be positive")));
        }
        if x.len() != dims.zones {
            return Err(CovError::InvalidSpec(format!("{} covariate rows for {} zones", x.len(), dims.zones)));
        }
        let k = x.first().map_or(0, Vec::len);
        if k == 0 || x.iter().any(|r| r.len() != k) {
            return Err(CovError::InvalidSpec("covariate rows must share a positive length".into()));
        }
        if x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CovError::InvalidSpec("covariates must be finite".into()));
        }
        if pop.is_some_and(|p| p >= k) {
            return Err(CovError::InvalidSpec(format!("population coordinate {} out of range", pop.unwrap())));
        }
        let n: Vec<f64> = sample.n_tensor().into_iter().map(f64::from).collect();
        let m: Vec<f64> = sample.m_tensor().into_iter().map(|v| v as f64).collect();
        let per_zone = dims.classes * dims.intervals;
        let used: Vec<Vec<usize>> = (0..dims.types)
            .map(|c| {
                (0..dims.zones)
                    .filter(|&i| {
                        let base = dims.index(c, i, 0, 0);
                        n[base..base + per_zone].iter().any(|&v| v > 0.0)
                    })
                    .collect()
            })
            .collect();
        for zones in &used {
            if let Some(&i) = zones.iter().find(|&&i| x[i].iter().all(|&v| v == 0.0)) {
                return Err(CovError::InfeasibleSet(format!("zone {i} has observations but all covariates are zero")));
            }
        }
        Ok(CovModel { dims, k, x, n, m, durations: sample.durations().to_vec(), epsilon, pop, used })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn n_covariates(&self) -> usize {
        self.k
    }

    pub fn n_blocks(&self) -> usize {
        self.dims.types * self.dims.classes * self.dims.intervals
    }

    pub fn block_index(&self, c: usize, d: usize, t: usize) -> usize {
        (c * self.dims.classes + d) * self.dims.intervals + t
    }

    pub fn block_coords(&self, b: usize) -> (usize, usize, usize) {
        let t = b % self.dims.intervals;
        let r = b / self.dims.intervals;
        (r / self.dims.classes, r % self.dims.classes, t)
    }

    /// Zones constrained in blocks of type `c`.
    pub fn used_zones(&self, c: usize) -> &[usize] {
        &self.used[c]
    }

    fn count(&self, beta: &[f64], i: usize) -> f64 {
        dot(beta, &self.x[i])
    }

    fn block_value(&self, b: usize, beta: &[f64]) -> f64 {
        let (c, d, t) = self.block_coords(b);
        let mut s = 0.0;
        for &i in &self.used[c] {
            let cell = self.dims.index(c, i, d, t);
            let (n, m) = (self.n[cell], self.m[cell]);
            if n == 0.0 {
                continue;
            }
            let v = self.count(beta, i);
            s += n * v;
            if m > 0.0 {
                if v <= 0.0 {
                    return f64::INFINITY;
                }
                s -= m * v.ln();
            }
        }
        s
    }

    fn block_gradient(&self, b: usize, beta: &[f64], g: &mut [f64]) {
        g.fill(0.0);
        let (c, d, t) = self.block_coords(b);
        for &i in &self.used[c] {
            let cell = self.dims.index(c, i, d, t);
            let (n, m) = (self.n[cell], self.m[cell]);
            if n == 0.0 {
                continue;
            }
            let coef = if m > 0.0 { n - m / self.count(beta, i) } else { n };
            for (gk, xk) in g.iter_mut().zip(&self.x[i]) {
                *gk += coef * xk;
            }
        }
    }

    fn check(&self, beta: &[f64]) -> Result<(), CovError> {
        if beta.len() != self.n_blocks() * self.k {
            return Err(CovError::InvalidSpec(format!("beta has {} entries, expected {}", beta.len(), self.n_blocks() * self.k)));
        }
        for b in 0..self.n_blocks() {
            let (c, _, _) = self.block_coords(b);
            let bb = &beta[b * self.k..(b + 1) * self.k];
            for &i in &self.used[c] {
                let v = self.count(bb, i);
                if v < self.epsilon - FEASIBILITY_TOL {
                    return Err(CovError::InfeasibleBeta { block: b, zone: i, count: v });
                }
            }
        }
        Ok(())
    }

    /// `Σ N βᵀx − M log βᵀx` over all cells.
    pub fn nll(&self, beta: &[f64]) -> Result<f64, CovError> {
        self.check(beta)?;
        Ok((0..self.n_blocks()).map(|b| self.block_value(b, &beta[b * self.k..(b + 1) * self.k])).sum())
    }

    pub fn gradient(&self, beta: &[f64]) -> Result<Vec<f64>, CovError> {
        self.check(beta)?;
        let mut g = vec![0.0; beta.len()];
        for b in 0..self.n_blocks() {
            let r = b * self.k..(b + 1) * self.k;
            self.block_gradient(b, &beta[r.clone()], &mut g[r]);
        }
        Ok(g)
    }

    /// Euclidean projection of one block onto its constraint set.
    pub fn project_block(&self, b: usize, beta: &mut [f64]) -> Result<(), CovError> {
        let (c, _, _) = self.block_coords(b);
        let rows: Vec<&[f64]> = self.used[c].iter().map(|&i| self.x[i].as_slice()).collect();
        active_set(beta, &rows, self.epsilon, self.pop).map_err(CovError::InfeasibleSet)
    }

    /// Projection of the whole coefficient tensor, block by block.
    pub fn project(&self, beta: &mut [f64]) -> Result<(), CovError> {
        let k = self.k;
        beta.par_chunks_mut(k).enumerate().try_for_each(|(b, bb)| self.project_block(b, bb))
    }

    pub fn initial_beta(&self) -> Result<Vec<f64>, CovError> {
        let mut beta = vec![INITIAL_BETA; self.n_blocks() * self.k];
        self.project(&mut beta)?;
        Ok(beta)
    }

    /// Expected count `βᵀx_i` of cell `(c, i, d, t)`.
    pub fn expected_count(&self, beta: &[f64], c: usize, i: usize, d: usize, t: usize) -> f64 {
        let b = self.block_index(c, d, t);
        self.count(&beta[b * self.k..(b + 1) * self.k], i)
    }

    /// Rate per time unit: `βᵀx_i / 𝒟_t`.
    pub fn intensity(&self, beta: &[f64], c: usize, i: usize, d: usize, t: usize) -> f64 {
        self.expected_count(beta, c, i, d, t) / self.durations[t]
    }

    /// Rates for every cell in sample order.
    pub fn intensities(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.dims.n_cells())
            .map(|cell| {
                let (c, i, d, t) = self.dims.coords(cell);
                self.intensity(beta, c, i, d, t)
            })
            .collect()
    }

    pub fn calibrate(&self, cfg: &OptimizerConfig, mode: CovMode) -> Result<CovFit, CovError> {
        let x0 = self.initial_beta()?;
        match mode {
            CovMode::Joint => {
                let res = minimize(self, &x0, cfg)?;
                Ok(CovFit { beta: res.solution.clone(), summary: res, blocks: Vec::new() })
            }
            CovMode::Blocks => {
                let k = self.k;
                let blocks: Vec<CalibrationResult> = (0..self.n_blocks())
                    .into_par_iter()
                    .map(|b| minimize(&Block { model: self, b }, &x0[b * k..(b + 1) * k], cfg))
                    .collect::<Result<_, _>>()?;
                let beta: Vec<f64> = blocks.iter().flat_map(|r| r.solution.iter().copied()).collect();
                let summary = merge(&blocks, beta.clone());
                Ok(CovFit { beta, summary, blocks })
            }
        }
    }
}

// Sums block traces, padding finished blocks with their final value.
fn merge(blocks: &[CalibrationResult], solution: Vec<f64>) -> CalibrationResult {
    let len = blocks.iter().map(|r| r.objective_trace.len()).max().unwrap_or(0);
    let objective_trace = (0..len)
        .map(|s| blocks.iter().map(|r| r.objective_trace[s.min(r.objective_trace.len() - 1)]).sum())
        .collect();
    let longest = blocks.iter().max_by_key(|r| r.iterations);
    let sum_bound = |f: fn(&CalibrationResult) -> Option<f64>| blocks.iter().map(f).sum::<Option<f64>>();
    CalibrationResult {
        solution,
        objective_trace,
        stop_reason: longest.map_or(StopReason::Stationary, |r| r.stop_reason),
        upper_bound: sum_bound(|r| r.upper_bound),
        lower_bound: sum_bound(|r| r.lower_bound),
        iterations: longest.map_or(0, |r| r.iterations),
        steps: Vec::new(),
        wall_time: blocks.iter().map(|r| r.wall_time).max().unwrap_or_default(),
    }
}

struct Block<'a> {
    model: &'a CovModel,
    b: usize,
}

impl Problem for Block<'_> {
    fn dim(&self) -> usize {
        self.model.k
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.model.block_value(self.b, x)
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.model.block_gradient(self.b, x, g)
    }

    fn project(&self, x: &mut [f64]) -> Result<(), OptimizerError> {
        self.model.project_block(self.b, x).map_err(|e| OptimizerError::Projection(e.to_string()))
    }
}

impl Problem for CovModel {
    fn dim(&self) -> usize {
        self.n_blocks() * self.k
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..self.n_blocks()).map(|b| self.block_value(b, &x[b * self.k..(b + 1) * self.k])).sum()
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        for b in 0..self.n_blocks() {
            let r = b * self.k..(b + 1) * self.k;
            self.block_gradient(b, &x[r.clone()], &mut g[r]);
        }
    }

    fn project(&self, x: &mut [f64]) -> Result<(), OptimizerError> {
        CovModel::project(self, x).map_err(|e| OptimizerError::Projection(e.to_string()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn violation(beta: &[f64], rows: &[&[f64]], eps: f64, pop: Option<usize>) -> f64 {
    let mut v = 0.0f64;
    for a in rows {
        v = v.max(eps - dot(a, beta));
    }
    if let Some(p) = pop {
        v = v.max(-beta[p]).max(beta[p] - 1.0);
    }
    v
}

/// Dykstra's cyclic projection onto `{aᵀβ ≥ ε : a ∈ rows} ∩ {0 ≤ β_pop ≤ 1}`.
///
/// Feasible input is returned unchanged.
pub fn dykstra(beta: &mut [f64], rows: &[&[f64]], eps: f64, pop: Option<usize>) -> Result<(), String> {
    if let Some(i) = rows.iter().position(|a| a.iter().all(|&v| v == 0.0)) {
        return Err(format!("constraint {i} has a zero covariate row"));
    }
    if violation(beta, rows, eps, pop) <= 0.0 {
        return Ok(());
    }
    let k = beta.len();
    let norms: Vec<f64> = rows.iter().map(|a| dot(a, a)).collect();
    let n_sets = rows.len() + usize::from(pop.is_some());
    let mut incr = vec![vec![0.0; k]; n_sets];
    let mut prev = beta.to_vec();
    let mut y = vec![0.0; k];
    for _ in 0..DYKSTRA_MAX_SWEEPS {
        for (s, p) in incr.iter_mut().enumerate() {
            for j in 0..k {
                y[j] = beta[j] + p[j];
            }
            if s < rows.len() {
                let a = rows[s];
                let gap = eps - dot(a, &y);
                if gap > 0.0 {
                    let f = gap / norms[s];
                    for j in 0..k {
                        beta[j] = y[j] + f * a[j];
                    }
                } else {
                    beta.copy_from_slice(&y);
                }
            } else {
                let p_idx = pop.unwrap();
                beta.copy_from_slice(&y);
                beta[p_idx] = beta[p_idx].clamp(0.0, 1.0);
            }
            for j in 0..k {
                p[j] = y[j] - beta[j];
            }
        }
        let change = beta.iter().zip(&prev).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        // a tiny step alone can mean a slow phase, not convergence
        if change < DYKSTRA_TOL && violation(beta, rows, eps, pop) <= DYKSTRA_TOL {
            break;
        }
        prev.copy_from_slice(beta);
    }
    let v = violation(beta, rows, eps, pop);
    if v > FEASIBILITY_TOL {
        return Err(format!("projection left a violation of {v:e}"));
    }
    Ok(())
}

/// Exact projection onto `{aᵀβ ≥ ε : a ∈ rows} ∩ {0 ≤ β_pop ≤ 1}` by the
/// dual active-set method of Goldfarb and Idnani with identity Hessian.
///
/// Feasible input is returned unchanged.
pub fn active_set(beta: &mut [f64], rows: &[&[f64]], eps: f64, pop: Option<usize>) -> Result<(), String> {
    if let Some(i) = rows.iter().position(|a| a.iter().all(|&v| v == 0.0)) {
        return Err(format!("constraint {i} has a zero covariate row"));
    }
    if violation(beta, rows, eps, pop) <= 0.0 {
        return Ok(());
    }
    let k = beta.len();
    let mut normals: Vec<Vec<f64>> = rows.iter().map(|a| a.to_vec()).collect();
    let mut rhs = vec![eps; rows.len()];
    if let Some(p) = pop {
        let mut e = vec![0.0; k];
        e[p] = 1.0;
        normals.push(e.clone());
        rhs.push(0.0);
        e[p] = -1.0;
        normals.push(e);
        rhs.push(-1.0);
    }
    let scale: Vec<f64> = normals.iter().map(|a| dot(a, a).sqrt()).collect();
    let slack = |x: &[f64], j: usize| (dot(&normals[j], x) - rhs[j]) / scale[j];
    let tol = 1e-13 * (1.0 + beta.iter().fold(0.0f64, |a, v| a.max(v.abs())));

    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let cap = 50 * (normals.len() + k) + 100;
    let mut iters = 0;
    loop {
        let Some(p) = (0..normals.len())
            .map(|j| (j, slack(beta, j)))
            .filter(|&(_, s)| s < -tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
        else {
            break;
        };
        let mut up = 0.0;
        loop {
            iters += 1;
            if iters > cap {
                return Err("active-set projection did not terminate".into());
            }
            let np = &normals[p];
            // r solves (NᵀN) r = Nᵀ n_p; z = n_p − N r is the primal direction
            let r = solve_normal(&active.iter().map(|&j| normals[j].as_slice()).collect::<Vec<_>>(), np)
                .ok_or("singular active set")?;
            let mut z = np.clone();
            for (q, &j) in active.iter().enumerate() {
                for l in 0..k {
                    z[l] -= r[q] * normals[j][l];
                }
            }
            let zn = dot(&z, np);
            let full = if zn > 1e-14 * scale[p] * scale[p] { -(dot(np, beta) - rhs[p]) / zn } else { f64::INFINITY };
            let mut partial = f64::INFINITY;
            let mut drop = None;
            for q in 0..active.len() {
                if r[q] > 1e-14 {
                    let t = u[q] / r[q];
                    if t < partial {
                        partial = t;
                        drop = Some(q);
                    }
                }
            }
            if full.is_infinite() && partial.is_infinite() {
                return Err(format!("constraints are inconsistent at constraint {p}"));
            }
            let t = full.min(partial);
            if full.is_finite() {
                for l in 0..k {
                    beta[l] += t * z[l];
                }
            }
            for q in 0..active.len() {
                u[q] -= t * r[q];
            }
            up += t;
            if full <= partial {
                active.push(p);
                u.push(up);
                break;
            }
            let q = drop.unwrap();
            active.remove(q);
            u.remove(q);
        }
    }
    let v = violation(beta, rows, eps, pop);
    if v > FEASIBILITY_TOL {
        return Err(format!("projection left a violation of {v:e}"));
    }
    // round-off can leave the box a hair outside
    if let Some(p) = pop {
        beta[p] = beta[p].clamp(0.0, 1.0);
    }
    Ok(())
}

// Least-squares coefficients of `b` on the columns `cols`.
fn solve_normal(cols: &[&[f64]], b: &[f64]) -> Option<Vec<f64>> {
    let q = cols.len();
    let mut a: Vec<Vec<f64>> = (0..q)
        .map(|i| {
            let mut row: Vec<f64> = (0..q).map(|j| dot(cols[i], cols[j])).collect();
            row.push(dot(cols[i], b));
            row
        })
        .collect();
    for c in 0..q {
        let piv = (c..q).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..q {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=q {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    Some((0..q).map(|i| a[i][q] / a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dims: Dims, per_obs: Vec<Vec<u32>>) -> AggregatedSample {
        AggregatedSample::from_per_obs(dims, vec![1.0; dims.intervals], per_obs).unwrap()
    }

    fn unit() -> Dims {
        Dims { types: 1, zones: 1, classes: 1, intervals: 1 }
    }

    #[test]
    fn single_cell_nll_and_gradient() {
        let m = CovModel::new(&sample(unit(), vec![vec![1]]), vec![vec![1.0]], DEFAULT_EPSILON, Some(0)).unwrap();
        assert_eq!(m.nll(&[1.0]).unwrap(), 1.0);
        assert_eq!(m.gradient(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn one_dimensional_projection() {
        let mut b = [-1.0];
        dykstra(&mut b, &[&[2.0]], 0.1, Some(0)).unwrap();
        assert!((b[0] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn feasible_input_is_untouched() {
        let mut b = [0.3, 2.0];
        dykstra(&mut b, &[&[1.0, 1.0], &[0.0, 3.0]], 0.1, Some(0)).unwrap();
        assert_eq!(b, [0.3, 2.0]);
    }

    #[test]
    fn zero_row_is_infeasible() {
        let mut b = [0.0, 0.0];
        assert!(dykstra(&mut b, &[&[0.0, 0.0]], 0.1, None).is_err());
        let s = sample(unit(), vec![vec![1]]);
        assert!(matches!(CovModel::new(&s, vec![vec![0.0]], 1e-3, None), Err(CovError::InfeasibleSet(_))));
    }

    #[test]
    fn box_and_halfspace_together() {
        // only the upper box bound and one halfspace are active
        let mut b = [2.0, -5.0];
        dykstra(&mut b, &[&[0.0, 1.0]], 0.5, Some(0)).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unused_zones_carry_no_constraint() {
        let dims = Dims { types: 1, zones: 2, classes: 1, intervals: 1 };
        let s = sample(dims, vec![vec![2, 0], vec![]]);
        let m = CovModel::new(&s, vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1e-3, None).unwrap();
        assert_eq!(m.used_zones(0), &[0]);
        let mut b = vec![0.5, -3.0];
        m.project(&mut b).unwrap();
        assert_eq!(b, vec![0.5, -3.0]);
    }

    #[test]
    fn expected_count_is_dot_product() {
        let dims = Dims { types: 1, zones: 1, classes: 1, intervals: 1 };
        let s = AggregatedSample::from_per_obs(dims, vec![2.0], vec![vec![1]]).unwrap();
        let m = CovModel::new(&s, vec![vec![10.0, 3.0]], 1e-3, Some(0)).unwrap();
        assert_eq!(m.expected_count(&[0.5, 2.0], 0, 0, 0, 0), 11.0);
        assert_eq!(m.intensity(&[0.5, 2.0], 0, 0, 0, 0), 5.5);
    }

    #[test]
    fn infeasible_beta_is_reported() {
        let m = CovModel::new(&sample(unit(), vec![vec![1]]), vec![vec![1.0]], DEFAULT_EPSILON, None).unwrap();
        assert!(matches!(m.nll(&[-1.0]), Err(CovError::InfeasibleBeta { .. })));
    }

    #[test]
    fn block_calibration_recovers_single_zone_mle() {
        // one zone per block: optimum count is M/N
        let dims = Dims { types: 1, zones: 1, classes: 1, intervals: 2 };
        let s = sample(dims, vec![vec![3, 5], vec![1, 1, 1, 2]]);
        let m = CovModel::new(&s, vec![vec![2.0]], 1e-3, None).unwrap();
        let cfg = OptimizerConfig { max_iters: 5000, ..OptimizerConfig::default() };
        let fit = m.calibrate(&cfg, CovMode::Blocks).unwrap();
        assert!((fit.beta[0] * 2.0 - 4.0).abs() < 1e-5);
        assert!((fit.beta[1] * 2.0 - 1.25).abs() < 1e-5);
        for w in fit.summary.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
