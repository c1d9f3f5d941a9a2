//! Choice of the penalty weight by held-out likelihood.
//!
//! Each replication trains on one fold (a `1/k` share of the observations of
//! every cell) and scores the fit on the remaining folds. The weight with the
//! best average score is refitted on the full sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{split_folds, AggregatedSample, AggregationError};
use crate::noreg::{uniform_space_weights, Init, NoRegError, NoRegModel, TimeGroup, DEFAULT_EPSILON};
use crate::optimizer::{CalibrationResult, OptimizerConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CvError {
    #[error("sample has no observations")]
    EmptySample,
    #[error("invalid cross-validation setup: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Model(#[from] NoRegError),
}

/// Structure of the penalty, independent of the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTemplate {
    pub groups: Vec<Vec<usize>>,
    pub pairs: Vec<(usize, usize)>,
    pub epsilon: f64,
}

impl PenaltyTemplate {
    pub fn new(groups: Vec<Vec<usize>>, pairs: Vec<(usize, usize)>) -> Self {
        PenaltyTemplate { groups, pairs, epsilon: DEFAULT_EPSILON }
    }

    pub fn build(&self, sample: &AggregatedSample, w: Weights) -> Result<NoRegModel, NoRegError> {
        let groups = self.groups.iter().map(|g| TimeGroup { intervals: g.clone(), weight: w.time }).collect();
        NoRegModel::new(sample, groups, uniform_space_weights(&self.pairs, w.space), self.epsilon)
    }
}

/// Time-group and neighbour weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub time: f64,
    pub space: f64,
}

impl Weights {
    pub fn equal(w: f64) -> Self {
        Weights { time: w, space: w }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    /// Candidate weights used for both penalties.
    pub weights: Vec<f64>,
    /// Separate neighbour weights; when set the grid is `weights × space_weights`.
    pub space_weights: Option<Vec<f64>>,
    pub folds: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { weights: vec![0.0], space_weights: None, folds: 5, seed: 0, optimizer: OptimizerConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub weights: Weights,
    pub mean: f64,
    pub per_replication: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best: Weights,
    pub scores: Vec<CvScore>,
    pub refit: CalibrationResult,
}

/// Poisson log-likelihood of `test` under rates `lambda`, up to a constant:
/// `Σ M log λ − N λ 𝒟`.
pub fn held_out_score(lambda: &[f64], test: &AggregatedSample) -> f64 {
    let t_len = test.dims().intervals;
    let mut s = 0.0;
    for (k, &l) in lambda.iter().enumerate() {
        let n = test.n_at(k);
        if n == 0 {
            continue;
        }
        let m = test.m_at(k) as f64;
        s -= n as f64 * l * test.durations()[k % t_len];
        if m > 0.0 {
            s += m * l.ln();
        }
    }
    s
}

fn sorted_unique(v: &[f64]) -> Result<Vec<f64>, CvError> {
    if v.is_empty() {
        return Err(CvError::InvalidConfig("weight grid is empty".into()));
    }
    if let Some(w) = v.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(CvError::InvalidConfig(format!("weight {w} must be finite and non-negative")));
    }
    let mut g = v.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Grid of candidate weights, sorted so that ties favour smaller weights.
pub fn weight_grid(cfg: &CvConfig) -> Result<Vec<Weights>, CvError> {
    let time = sorted_unique(&cfg.weights)?;
    Ok(match &cfg.space_weights {
        None => time.into_iter().map(Weights::equal).collect(),
        Some(sw) => {
            let space = sorted_unique(sw)?;
            time.iter().flat_map(|&t| space.iter().map(move |&s| Weights { time: t, space: s })).collect()
        }
    })
}

pub fn cross_validate(sample: &AggregatedSample, template: &PenaltyTemplate, cfg: &CvConfig) -> Result<CvResult, CvError> {
    if sample.n_tensor().iter().all(|&n| n == 0) {
        return Err(CvError::EmptySample);
    }
    let grid = weight_grid(cfg)?;
    let folds = split_folds(sample, cfg.folds, cfg.seed)?;
    let jobs: Vec<(usize, usize)> = (0..folds.len()).flat_map(|r| (0..grid.len()).map(move |w| (r, w))).collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(r, w)| -> Result<f64, CvError> {
            let model = template.build(&folds[r].train, grid[w])?;
            let fit = model.calibrate(Init::Empirical, &cfg.optimizer)?;
            Ok(held_out_score(&fit.solution, &folds[r].test))
        })
        .collect::<Result<_, _>>()?;
    let k = folds.len();
    let table: Vec<CvScore> = grid
        .iter()
        .enumerate()
        .map(|(w, &weights)| {
            let per_replication: Vec<f64> = (0..k).map(|r| scores[r * grid.len() + w]).collect();
            let mean = per_replication.iter().sum::<f64>() / k as f64;
            CvScore { weights, mean, per_replication }
        })
        .collect();
    // first maximum in grid order, i.e. the smallest weight among ties
    let best = table
        .iter()
        .fold(None::<&CvScore>, |b, s| match b {
            Some(b) if b.mean >= s.mean => Some(b),
            _ => Some(s),
        })
        .unwrap()
        .weights;
    let refit = template.build(sample, best)?.calibrate(Init::Empirical, &cfg.optimizer)?;
    Ok(CvResult { best, scores: table, refit })
}
