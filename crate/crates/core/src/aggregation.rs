//! Count tensors over (type, zone, class, interval) cells.
//!
//! Every cell keeps its per-observation counts `M[c,i,d,t,n]`, one entry per
//! complete occurrence of interval `t` with class `d` in the horizon, in
//! chronological order. `N` is the number of entries and `M` their sum.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::{NaiveDate, NaiveDateTime};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::seed;
use crate::space::SpatialDiscretization;
use crate::time::{parse_timestamp, TimeDiscretization, TimeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregationError {
    #[error("event {index} has type {kind}, but only {n_types} types are declared")]
    UnknownType { index: usize, kind: usize, n_types: usize },
    #[error("conflicting day_class overrides for {0}")]
    ConflictingOverride(NaiveDate),
    #[error("day_class {class} on {date} is out of range (n = {n})")]
    OverrideOutOfRange { date: NaiveDate, class: usize, n: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error("sample dimensions do not match: {0}")]
    Shape(String),
}

/// One observed event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub ts: NaiveDateTime,
    pub location: Point2,
    pub kind: usize,
    /// Day class forced for the event's calendar date.
    pub day_class: Option<usize>,
}

/// Array shape `(C, I, D, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub types: usize,
    pub zones: usize,
    pub classes: usize,
    pub intervals: usize,
}

impl Dims {
    pub fn n_cells(&self) -> usize {
        self.types * self.zones * self.classes * self.intervals
    }

    pub fn index(&self, c: usize, i: usize, d: usize, t: usize) -> usize {
        ((c * self.zones + i) * self.classes + d) * self.intervals + t
    }

    /// Inverse of [`Dims::index`].
    pub fn coords(&self, k: usize) -> (usize, usize, usize, usize) {
        let t = k % self.intervals;
        let r = k / self.intervals;
        let d = r % self.classes;
        let r = r / self.classes;
        (r / self.zones, r % self.zones, d, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedSample {
    dims: Dims,
    durations: Vec<f64>,
    per_obs: Vec<Vec<u32>>,
    pub dropped_outside: u64,
    pub dropped_horizon: u64,
}

impl AggregatedSample {
    /// Builds a sample from per-cell observation lists in [`Dims::index`] order.
    pub fn from_per_obs(dims: Dims, durations: Vec<f64>, per_obs: Vec<Vec<u32>>) -> Result<Self, AggregationError> {
        if per_obs.len() != dims.n_cells() {
            return Err(AggregationError::Shape(format!("{} cells for {:?}", per_obs.len(), dims)));
        }
        if durations.len() != dims.intervals {
            return Err(AggregationError::Shape(format!("{} durations for T = {}", durations.len(), dims.intervals)));
        }
        Ok(AggregatedSample { dims, durations, per_obs, dropped_outside: 0, dropped_horizon: 0 })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn n_cells(&self) -> usize {
        self.per_obs.len()
    }

    pub fn n(&self, c: usize, i: usize, d: usize, t: usize) -> u32 {
        self.per_obs[self.dims.index(c, i, d, t)].len() as u32
    }

    pub fn m(&self, c: usize, i: usize, d: usize, t: usize) -> u64 {
        self.m_at(self.dims.index(c, i, d, t))
    }

    pub fn obs(&self, c: usize, i: usize, d: usize, t: usize) -> &[u32] {
        &self.per_obs[self.dims.index(c, i, d, t)]
    }

    pub fn n_at(&self, cell: usize) -> u32 {
        self.per_obs[cell].len() as u32
    }

    pub fn m_at(&self, cell: usize) -> u64 {
        self.per_obs[cell].iter().map(|&x| x as u64).sum()
    }

    pub fn per_obs(&self) -> &[Vec<u32>] {
        &self.per_obs
    }

    /// `N` over all cells in index order.
    pub fn n_tensor(&self) -> Vec<u32> {
        (0..self.n_cells()).map(|k| self.n_at(k)).collect()
    }

    /// `M` over all cells in index order.
    pub fn m_tensor(&self) -> Vec<u64> {
        (0..self.n_cells()).map(|k| self.m_at(k)).collect()
    }

    pub fn total_events(&self) -> u64 {
        (0..self.n_cells()).map(|k| self.m_at(k)).sum()
    }

    /// Merges the class axis into the interval axis: `t' = d * T + t`.
    pub fn flatten_day_classes(&self) -> AggregatedSample {
        let Dims { types, zones, classes, intervals } = self.dims;
        let dims = Dims { types, zones, classes: 1, intervals: classes * intervals };
        let durations = (0..classes).flat_map(|_| self.durations.iter().copied()).collect();
        // with D=1 the flattened cell order coincides with the original order
        AggregatedSample {
            dims,
            durations,
            per_obs: self.per_obs.clone(),
            dropped_outside: self.dropped_outside,
            dropped_horizon: self.dropped_horizon,
        }
    }

    /// Empirical rates `M / (N 𝒟_t)`, with `fallback` where `N = 0`.
    pub fn empirical_rates(&self, fallback: f64) -> Vec<f64> {
        (0..self.n_cells())
            .map(|k| {
                let n = self.n_at(k);
                if n == 0 {
                    fallback
                } else {
                    let t = k % self.dims.intervals;
                    self.m_at(k) as f64 / (n as f64 * self.durations[t])
                }
            })
            .collect()
    }
}

fn collect_overrides(events: &[EventRecord], n_day: usize) -> Result<BTreeMap<NaiveDate, usize>, AggregationError> {
    let mut out = BTreeMap::new();
    for e in events {
        let Some(class) = e.day_class else { continue };
        let date = e.ts.date();
        if class >= n_day {
            return Err(AggregationError::OverrideOutOfRange { date, class, n: n_day });
        }
        if let Some(prev) = out.insert(date, class) {
            if prev != class {
                return Err(AggregationError::ConflictingOverride(date));
            }
        }
    }
    Ok(out)
}

/// Bins events over the horizon `[start, end)` into a sample with `n_types` types.
pub fn aggregate(
    events: &[EventRecord],
    sd: &SpatialDiscretization,
    td: &TimeDiscretization,
    horizon: (NaiveDateTime, NaiveDateTime),
    n_types: usize,
) -> Result<AggregatedSample, AggregationError> {
    if let Some((index, e)) = events.iter().enumerate().find(|(_, e)| e.kind >= n_types) {
        return Err(AggregationError::UnknownType { index, kind: e.kind, n_types });
    }
    let overrides = collect_overrides(events, td.n_day_classes())?;
    let occ = td.occurrences(horizon.0, horizon.1, &overrides)?;
    let dims = Dims { types: n_types, zones: sd.len(), classes: td.n_classes(), intervals: td.n_intervals() };
    let mut per_obs: Vec<Vec<u32>> = Vec::with_capacity(dims.n_cells());
    for _c in 0..n_types {
        for _i in 0..dims.zones {
            for d in 0..dims.classes {
                for t in 0..dims.intervals {
                    per_obs.push(vec![0; occ.counts()[d][t] as usize]);
                }
            }
        }
    }
    enum Fate {
        Outside,
        Horizon,
        Cell(usize, u32),
    }
    let fates: Vec<Fate> = events
        .par_iter()
        .map(|e| {
            let Some(i) = sd.locate(&e.location) else { return Fate::Outside };
            match occ.lookup(td, e.ts) {
                Some(s) if e.ts >= horizon.0 && e.ts < horizon.1 => {
                    Fate::Cell(dims.index(e.kind, i, s.class, s.interval), s.observation)
                }
                _ => Fate::Horizon,
            }
        })
        .collect();
    let (mut outside, mut beyond) = (0, 0);
    for f in fates {
        match f {
            Fate::Outside => outside += 1,
            Fate::Horizon => beyond += 1,
            Fate::Cell(k, n) => per_obs[k][n as usize] += 1,
        }
    }
    Ok(AggregatedSample {
        dims,
        durations: td.durations().to_vec(),
        per_obs,
        dropped_outside: outside,
        dropped_horizon: beyond,
    })
}

/// One cross-validation replication: train on one fold, test on the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPair {
    pub train: AggregatedSample,
    pub test: AggregatedSample,
}

/// Splits observation indices of every cell into `k` folds.
///
/// Each cell's indices are shuffled with a generator seeded by `(seed, cell)`
/// and dealt round-robin, so fold sizes differ by at most one. Replication
/// `r` trains on fold `r` and tests on the other `k - 1` folds.
pub fn split_folds(s: &AggregatedSample, k: usize, seed: u64) -> Result<Vec<FoldPair>, AggregationError> {
    if k < 2 {
        return Err(AggregationError::InvalidFoldCount(k));
    }
    let fold_of: Vec<Vec<usize>> = s
        .per_obs
        .par_iter()
        .enumerate()
        .map(|(cell, obs)| {
            let mut order: Vec<usize> = (0..obs.len()).collect();
            order.shuffle(&mut seed::stream(seed, &[cell as u64]));
            let mut f = vec![0; obs.len()];
            for (pos, &n) in order.iter().enumerate() {
                f[n] = pos % k;
            }
            f
        })
        .collect();
    Ok((0..k)
        .map(|r| {
            let part = |want_train: bool| -> Vec<Vec<u32>> {
                s.per_obs
                    .iter()
                    .zip(&fold_of)
                    .map(|(obs, f)| {
                        obs.iter().zip(f).filter(|(_, &fo)| (fo == r) == want_train).map(|(&m, _)| m).collect()
                    })
                    .collect()
            };
            let mk = |per_obs| AggregatedSample {
                dims: s.dims,
                durations: s.durations.clone(),
                per_obs,
                dropped_outside: 0,
                dropped_horizon: 0,
            };
            FoldPair { train: mk(part(true)), test: mk(part(false)) }
        })
        .collect())
}

/// Reads `ts,lat,lon,type[,day_class]` records; `lat` is the y and `lon` the x coordinate.
pub fn read_events_csv<R: Read>(reader: R) -> Result<Vec<EventRecord>, AggregationError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let perr = |line: u64, msg: String| AggregationError::Parse { line, msg };
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(c_ts), Some(c_lat), Some(c_lon), Some(c_type)) = (col("ts"), col("lat"), col("lon"), col("type")) else {
        return Err(perr(1, "header must contain ts, lat, lon and type".into()));
    };
    let c_day = col("day_class");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| perr(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize, what: &str| -> Result<&str, AggregationError> {
            match rec.get(k) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(perr(line, format!("missing {what}"))),
            }
        };
        let ts = parse_timestamp(field(c_ts, "ts")?).map_err(|e| perr(line, e.to_string()))?;
        let num = |k: usize, what: &str| -> Result<f64, AggregationError> {
            let v = field(k, what)?;
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(perr(line, format!("bad {what} {v:?}"))),
            }
        };
        let y = num(c_lat, "lat")?;
        let x = num(c_lon, "lon")?;
        let t = field(c_type, "type")?;
        let kind = t.parse::<usize>().map_err(|_| perr(line, format!("bad type {t:?}")))?;
        let day_class = match c_day.and_then(|k| rec.get(k)).filter(|v| !v.is_empty()) {
            None => None,
            Some(v) => Some(v.parse::<usize>().map_err(|_| perr(line, format!("bad day_class {v:?}")))?),
        };
        out.push(EventRecord { ts, location: Point2::new(x, y), kind, day_class });
    }
    Ok(out)
}
