//! Synthetic data on the 10×10 checkerboard.
//!
//! The square `[0,10]²` is cut into 100 unit zones, numbered row by row from
//! the bottom-left corner. Blue zones fill the top-left and bottom-right
//! quadrants, red zones the other two. Time has 28 unit intervals; interval
//! `t` (0-based) covers `(t, t+1]`, so even `t` are the intervals starting
//! at an even time.
//!
//! Counts are drawn per cell from the exact zone integral of the rate
//! function, one Poisson variate per observation.

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::aggregation::{AggregatedSample, Dims, EventRecord};
use crate::geometry::{Point2, Polygon, Region};
use crate::noreg::TimeGroup;
use crate::seed;
use crate::space::{rect_discretize, SpatialDiscretization};

pub const SIDE: usize = 10;
pub const N_ZONES: usize = SIDE * SIDE;
pub const N_INTERVALS: usize = 28;
pub const N_HOLIDAYS: usize = 8;

/// Penalty grid of the checkerboard experiments.
pub const WEIGHT_GRID: [f64; 22] = [
    0.0, 1e-4, 2e-4, 4e-4, 1e-3, 2e-3, 4e-3, 8e-3, 0.01, 0.02, 0.04, 0.08, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0,
    100.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Color {
    Blue,
    Red,
}

/// Column and row of a zone, both 0-based.
pub fn zone_cell(i: usize) -> (usize, usize) {
    (i % SIDE, i / SIDE)
}

pub fn zone_color(i: usize) -> Color {
    let (cx, cy) = zone_cell(i);
    if (cx < SIDE / 2) != (cy < SIDE / 2) {
        Color::Blue
    } else {
        Color::Red
    }
}

/// The 10×10 unit-square discretization of `[0,10]²`.
pub fn checkerboard() -> SpatialDiscretization {
    let border = Region::from(Polygon::rect(0.0, 0.0, SIDE as f64, SIDE as f64).unwrap());
    rect_discretize(&border, SIDE, SIDE).unwrap()
}

/// Neighbour pairs of the checkerboard sharing an edge.
pub fn edge_pairs() -> Vec<(usize, usize)> {
    checkerboard().neighbors().to_vec()
}

/// Edge neighbours of equal colour.
pub fn same_color_pairs() -> Vec<(usize, usize)> {
    edge_pairs().into_iter().filter(|&(i, j)| zone_color(i) == zone_color(j)).collect()
}

/// Groups `{t : t ≡ r mod period}` with weight `w`.
pub fn parity_groups(period: usize, w: f64) -> Vec<TimeGroup> {
    crate::noreg::modular_groups(N_INTERVALS, period, w)
}

/// Groups for a sample whose day classes were flattened into
/// `classes × intervals` slots: interval parity crossed with ordinary day
/// (class 0) versus any holiday.
pub fn holiday_parity_groups(classes: usize, w: f64) -> Vec<TimeGroup> {
    let mut g = vec![Vec::new(); 4];
    for d in 0..classes {
        for t in 0..N_INTERVALS {
            g[2 * usize::from(d > 0) + t % 2].push(d * N_INTERVALS + t);
        }
    }
    g.into_iter().filter(|v| !v.is_empty()).map(|intervals| TimeGroup { intervals, weight: w }).collect()
}

/// Expected counts per cell over one unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub dims: Dims,
    pub expected: Vec<f64>,
}

impl GroundTruth {
    fn build(classes: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let dims = Dims { types: 1, zones: N_ZONES, classes, intervals: N_INTERVALS };
        let expected = (0..dims.n_cells())
            .map(|k| {
                let (_, i, d, t) = dims.coords(k);
                f(i, d, t)
            })
            .collect();
        GroundTruth { dims, expected }
    }

    pub fn get(&self, i: usize, d: usize, t: usize) -> f64 {
        self.expected[self.dims.index(0, i, d, t)]
    }

    /// Sum over zones per interval, for class `d`.
    pub fn totals(&self, d: usize) -> Vec<f64> {
        (0..self.dims.intervals).map(|t| (0..self.dims.zones).map(|i| self.get(i, d, t)).sum()).collect()
    }
}

/// Piecewise constant rates: blue 0.1 on even intervals and 0.5 on odd ones,
/// red the other way round.
pub fn truth_ex1() -> GroundTruth {
    GroundTruth::build(1, |i, _, t| match (zone_color(i), t % 2) {
        (Color::Blue, 0) | (Color::Red, 1) => 0.1,
        _ => 0.5,
    })
}

/// Rate `x + y` times 1 or 5 by colour and parity; the zone integral is the
/// value at the centroid.
pub fn truth_ex2() -> GroundTruth {
    GroundTruth::build(1, |i, _, t| {
        let (cx, cy) = zone_cell(i);
        let centroid = cx as f64 + 0.5 + cy as f64 + 0.5;
        match (zone_color(i), t % 2) {
            (Color::Blue, 0) | (Color::Red, 1) => centroid,
            _ => 5.0 * centroid,
        }
    })
}

pub const BETA_EX3: [[f64; 3]; 2] = [[0.0, 6.0, 3.0], [0.05, 18.0, 6.0]];
pub const BETA_EX4_HOLIDAY: [[f64; 3]; 2] = [[0.0, 12.0, 6.0], [0.1, 36.0, 12.0]];

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `β(t mod 2)ᵀ y_i`.
pub fn truth_ex3(cov: &CovariateField) -> GroundTruth {
    let y = cov.aggregates();
    GroundTruth::build(1, |i, _, t| dot3(&BETA_EX3[t % 2], &y[i]))
}

/// Class 0 uses the ordinary coefficients, classes `1..=8` the holiday ones.
pub fn truth_ex4(cov: &CovariateField) -> GroundTruth {
    let y = cov.aggregates();
    GroundTruth::build(1 + N_HOLIDAYS, |i, d, t| {
        let beta = if d == 0 { &BETA_EX3[t % 2] } else { &BETA_EX4_HOLIDAY[t % 2] };
        dot3(beta, &y[i])
    })
}

/// `∫_{i-1}^{i} |sin(2πk s/10)| ds` for a zone column `i ∈ 1..=10` and
/// frequency `k ∈ 1..=10`.
pub fn sin_zone_integral(i: u32, k: u32) -> f64 {
    assert!((1..=10).contains(&i) && (1..=10).contains(&k));
    let kf = k as f64;
    let a = kf * (i - 1) as f64 / 5.0;
    let b = kf * i as f64 / 5.0;
    // exact integer ceil/floor of k(i-1)/5 and ki/5
    let c = (k * (i - 1)).div_ceil(5);
    let f = k * i / 5;
    let sign = |n: u32| if n % 2 == 0 { 1.0 } else { -1.0 };
    let h = 5.0 / (PI * kf);
    if c <= f {
        let (cf, ff) = (c as f64, f as f64);
        h * sign(c) * ((PI * cf).cos() - (PI * a).cos()) + 2.0 * h * (ff - cf)
            - h * sign(f) * ((PI * b).cos() - (PI * ff).cos())
    } else {
        h * sign(f) * ((PI * a).cos() - (PI * b).cos())
    }
}

/// The covariate field: random sine mixture `x₁` plus colour constants `x₂`, `x₃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateField {
    pub u_blue: [f64; 20],
    pub u_red: [f64; 20],
}

impl CovariateField {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = seed::stream(seed, &[u64::MAX]);
        let mut u_blue = [0.0; 20];
        let mut u_red = [0.0; 20];
        for v in u_blue.iter_mut().chain(u_red.iter_mut()) {
            *v = rng.gen::<f64>();
        }
        CovariateField { u_blue, u_red }
    }

    fn coefficients(&self, color: Color) -> [f64; 20] {
        match color {
            Color::Blue => self.u_blue,
            Color::Red => self.u_red.map(|u| u + 1.0),
        }
    }

    /// Value of `x₁` at a point of the given colour.
    pub fn x1_at(&self, color: Color, p: Point2) -> f64 {
        let u = self.coefficients(color);
        (1..=10)
            .map(|j| {
                let jf = j as f64;
                0.5f64.powi(j)
                    * (u[2 * j as usize - 2] * (2.0 * PI * jf * p.x / 10.0).sin().abs()
                        + u[2 * j as usize - 1] * (2.0 * PI * jf * p.y / 10.0).sin().abs())
            })
            .sum()
    }

    /// Zone aggregates `y_i = (∫x₁, ∫x₂, ∫x₃)` over each unit zone.
    pub fn aggregates(&self) -> Vec<[f64; 3]> {
        (0..N_ZONES)
            .map(|i| {
                let (cx, cy) = zone_cell(i);
                let color = zone_color(i);
                let u = self.coefficients(color);
                let y1: f64 = (1..=10u32)
                    .map(|k| {
                        0.5f64.powi(k as i32)
                            * (u[2 * k as usize - 2] * sin_zone_integral(cx as u32 + 1, k)
                                + u[2 * k as usize - 1] * sin_zone_integral(cy as u32 + 1, k))
                    })
                    .sum();
                match color {
                    Color::Blue => [y1, 0.25, 0.5],
                    Color::Red => [y1, 0.5, 0.25],
                }
            })
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.aggregates().into_iter().map(|y| y.to_vec()).collect()
    }
}

/// Observations per cell for each day class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub per_class: Vec<u32>,
}

impl Schedule {
    pub fn uniform(n: u32) -> Self {
        Schedule { per_class: vec![n] }
    }

    /// `ordinary` observations of class 0 and `holiday` observations of each
    /// holiday class `1..=8`; one year of data is `holidays(51, 1)`.
    pub fn holidays(ordinary: u32, holiday: u32) -> Self {
        let per_class = std::iter::once(ordinary).chain(std::iter::repeat(holiday).take(N_HOLIDAYS)).collect();
        Schedule { per_class }
    }
}

/// Draws `M ~ Poisson(Λ 𝒟)` for every observation of every cell.
///
/// Each cell uses its own generator seeded from `(seed, c, i, d, t)`.
pub fn simulate_counts(truth: &GroundTruth, schedule: &Schedule, seed: u64) -> AggregatedSample {
    let dims = truth.dims;
    assert_eq!(schedule.per_class.len(), dims.classes, "schedule and truth disagree on day classes");
    let per_obs: Vec<Vec<u32>> = (0..dims.n_cells())
        .into_par_iter()
        .map(|k| {
            let (c, i, d, t) = dims.coords(k);
            let n = schedule.per_class[d];
            let mean = truth.expected[k];
            if n == 0 {
                return Vec::new();
            }
            if mean <= 0.0 {
                return vec![0; n as usize];
            }
            let pois = Poisson::new(mean).unwrap();
            let mut rng = seed::stream(seed, &[c as u64, i as u64, d as u64, t as u64]);
            (0..n).map(|_| pois.sample(&mut rng) as u32).collect()
        })
        .collect();
    AggregatedSample::from_per_obs(dims, vec![1.0; dims.intervals], per_obs).unwrap()
}

/// `(1/|cells|) Σ |Λ − λ̂| / Λ` over every cell.
pub fn mean_relative_error(truth: &[f64], estimate: &[f64]) -> f64 {
    assert_eq!(truth.len(), estimate.len());
    truth.iter().zip(estimate).map(|(a, b)| (a - b).abs() / a).sum::<f64>() / truth.len() as f64
}

/// Mean relative error restricted to cells with at least one observation.
pub fn observed_relative_error(truth: &[f64], estimate: &[f64], sample: &AggregatedSample) -> f64 {
    let mut s = 0.0;
    let mut n = 0usize;
    for k in 0..truth.len() {
        if sample.n_at(k) > 0 {
            s += (truth[k] - estimate[k]).abs() / truth[k];
            n += 1;
        }
    }
    s / n as f64
}

/// A small synthetic city for end-to-end runs.
pub mod city {
    use super::*;

    /// Types of call in the fixture.
    pub const N_TYPES: usize = 3;

    /// U-shaped border: a 12×10 block with a bay cut into the top.
    pub fn border() -> Region {
        let outer = [(0.0, 0.0), (12.0, 0.0), (12.0, 10.0), (8.0, 10.0), (8.0, 4.0), (4.0, 4.0), (4.0, 10.0), (0.0, 10.0)];
        Region::from(Polygon::from_coords(&outer).unwrap())
    }

    // hotspot per type
    const CENTRES: [(f64, f64); N_TYPES] = [(2.0, 7.0), (10.0, 2.0), (6.0, 2.0)];

    /// Events over `weeks` weeks starting Monday 2024-01-01.
    pub fn events(weeks: u32, per_day: u32, seed: u64) -> Vec<EventRecord> {
        let b = border();
        let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let mut out = Vec::new();
        for day in 0..7 * weeks {
            let mut rng = seed::stream(seed, &[u64::from(day)]);
            let n = Poisson::new(f64::from(per_day)).unwrap().sample(&mut rng) as u32;
            for _ in 0..n {
                let kind = match rng.gen::<f64>() {
                    u if u < 0.5 => 0,
                    u if u < 0.8 => 1,
                    _ => 2,
                };
                // daytime peak: accept night hours with lower probability
                let secs = loop {
                    let s: i64 = rng.gen_range(0..86_400);
                    let hour = s / 3600;
                    let keep = if (8..20).contains(&hour) { 1.0 } else { 0.3 };
                    if rng.gen::<f64>() < keep {
                        break s;
                    }
                };
                let location = loop {
                    let (cx, cy) = CENTRES[kind];
                    let p = if rng.gen::<f64>() < 0.6 {
                        Point2::new(cx + rng.gen_range(-2.0..2.0), cy + rng.gen_range(-2.0..2.0))
                    } else {
                        Point2::new(rng.gen_range(0.0..12.0), rng.gen_range(0.0..10.0))
                    };
                    if b.contains(&p) {
                        break p;
                    }
                };
                let ts = start + Duration::days(i64::from(day)) + Duration::seconds(secs);
                out.push(EventRecord { ts, location, kind, day_class: None });
            }
        }
        out.sort_by(|a, b| a.ts.cmp(&b.ts).then(a.kind.cmp(&b.kind)));
        out
    }
}
