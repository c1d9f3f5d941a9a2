//! Acceptance suite: one PASS/FAIL line per criterion.

use std::cell::Cell;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use stpoisson::aggregation::{AggregatedSample, Dims};
use stpoisson::covariate::{CovMode, CovModel};
use stpoisson::crossval::{cross_validate, held_out_score, CvConfig, PenaltyTemplate, Weights};
use stpoisson::geometry::{voronoi_cells, Point2, Polygon, Region, GEOM_TOL};
use stpoisson::noreg::{modular_groups, uniform_space_weights, Init, NoRegModel, TimeGroup, DEFAULT_EPSILON};
use stpoisson::optimizer::{minimize, BoxQuadratic, GapRule, OptimizerConfig, OptimizerError, Problem, StallRule, Variant};
use stpoisson::simulation::*;
use stpoisson::space::{intersection_matrix, rect_discretize, reallocate_attribute, voronoi_discretize};

type Outcome = Result<String, String>;

struct Suite {
    failed: usize,
}

impl Suite {
    fn run(&mut self, id: &str, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let (ok, detail) = match res {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget of {budget:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        println!("{} {id:>2} {name}: {detail} [{:.2}s]", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn random_sample(rng: &mut ChaCha8Rng, max_types: usize, max_zones: usize, max_t: usize, max_obs: usize) -> AggregatedSample {
    let dims = Dims {
        types: rng.gen_range(1..=max_types),
        zones: rng.gen_range(1..=max_zones),
        classes: 1,
        intervals: rng.gen_range(1..=max_t),
    };
    let durations = (0..dims.intervals).map(|_| rng.gen_range(0.25..2.0)).collect();
    let per_obs = (0..dims.n_cells())
        .map(|_| (0..rng.gen_range(0..=max_obs)).map(|_| rng.gen_range(0..8)).collect())
        .collect();
    AggregatedSample::from_per_obs(dims, durations, per_obs).unwrap()
}

fn all_pairs(zones: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..zones {
        for j in i + 1..zones {
            if rng.gen_bool(0.4) {
                v.push((i, j));
            }
        }
    }
    v
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = OptimizerConfig { max_iters: 100_000, stall: Some(StallRule { tol: 1e-15, window: 10 }), ..Default::default() };
    let mut worst = 0.0f64;
    for inst in 0..50 {
        let s = random_sample(&mut rng, 2, 9, 6, 5);
        let m = NoRegModel::new(&s, vec![], vec![], DEFAULT_EPSILON).unwrap();
        let fit = m.calibrate(Init::Constant(0.1), &cfg).map_err(|e| format!("instance {inst}: {e}"))?;
        for k in 0..s.n_cells() {
            let (n, mm) = (s.n_at(k), s.m_at(k));
            if n == 0 || mm == 0 {
                continue;
            }
            let want = mm as f64 / (n as f64 * s.durations()[k % s.dims().intervals]);
            if want <= DEFAULT_EPSILON {
                continue;
            }
            worst = worst.max((fit.solution[k] - want).abs() / want);
        }
    }
    ensure(worst < 1e-4, format!("max relative deviation {worst:.3e}"))?;
    Ok(format!("50 instances, max relative deviation {worst:.2e}"))
}

fn fd_error<F: Fn(&[f64]) -> f64>(f: F, g: &[f64], x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..x.len() {
        let h = 1e-6 * x[k].abs().max(1e-3);
        let (mut p, mut q) = (x.to_vec(), x.to_vec());
        p[k] += h;
        q[k] -= h;
        let fd = (f(&p) - f(&q)) / (2.0 * h);
        worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1.0));
    }
    worst
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut w_noreg, mut w_cov) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let s = random_sample(&mut rng, 2, 6, 4, 4);
        let d = s.dims();
        let period = rng.gen_range(1..=d.intervals);
        let pairs = all_pairs(d.zones, &mut rng);
        let m = NoRegModel::new(
            &s,
            modular_groups(d.intervals, period, rng.gen_range(0.0..2.0)),
            uniform_space_weights(&pairs, rng.gen_range(0.0..2.0)),
            DEFAULT_EPSILON,
        )
        .unwrap();
        let x: Vec<f64> = (0..d.n_cells()).map(|_| rng.gen_range(0.05..4.0)).collect();
        let g = m.loss_gradient(&x).unwrap();
        w_noreg = w_noreg.max(fd_error(|v| m.loss(v).unwrap(), &g, &x));

        let k = rng.gen_range(1..=3);
        let cov: Vec<Vec<f64>> = (0..d.zones).map(|_| (0..k).map(|_| rng.gen_range(0.1..3.0)).collect()).collect();
        let cm = CovModel::new(&s, cov, DEFAULT_EPSILON, Some(0)).unwrap();
        let mut b: Vec<f64> = (0..cm.n_blocks() * k).map(|_| rng.gen_range(0.05..1.0)).collect();
        cm.project(&mut b).unwrap();
        b.iter_mut().for_each(|v| *v += 0.05);
        let g = cm.gradient(&b).unwrap();
        w_cov = w_cov.max(fd_error(|v| cm.nll(v).unwrap(), &g, &b));
    }
    ensure(w_noreg < 1e-5 && w_cov < 1e-5, format!("no-covariate {w_noreg:.2e}, covariate {w_cov:.2e}"))?;
    Ok(format!("100 points per model, max relative error {w_noreg:.2e} / {w_cov:.2e}"))
}

// Counts evaluations at points outside the feasible set.
struct Watch<'a, P: Problem> {
    inner: &'a P,
    feasible: &'a dyn Fn(&[f64]) -> bool,
    bad: Cell<usize>,
}

impl<P: Problem> Problem for Watch<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        if !(self.feasible)(x) {
            self.bad.set(self.bad.get() + 1);
        }
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.inner.gradient(x, g)
    }
    fn project(&self, x: &mut [f64]) -> Result<(), OptimizerError> {
        self.inner.project(x)
    }
    fn lower_bounds(&self) -> Vec<f64> {
        self.inner.lower_bounds()
    }
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runs = 0;
    let mut worst_agree = 0.0f64;
    for variant in [Variant::FeasibleDirection, Variant::Boundary] {
        let cfg = OptimizerConfig { variant, ..Default::default() };
        for _ in 0..20 {
            let s = random_sample(&mut rng, 2, 6, 4, 4);
            let d = s.dims();
            let pairs = all_pairs(d.zones, &mut rng);
            let m = NoRegModel::new(&s, modular_groups(d.intervals, 2.min(d.intervals), 0.5), uniform_space_weights(&pairs, 0.5), DEFAULT_EPSILON)
                .unwrap();
            let feas = |x: &[f64]| x.iter().all(|&v| v >= DEFAULT_EPSILON);
            let w = Watch { inner: &m, feasible: &feas, bad: Cell::new(0) };
            let r = minimize(&w, &m.empirical(), &cfg).map_err(|e| e.to_string())?;
            ensure(monotone(&r.objective_trace), "non-monotone no-covariate trace".into())?;
            ensure(w.bad.get() == 0, format!("{} infeasible no-covariate iterates", w.bad.get()))?;

            let k = rng.gen_range(1..=3);
            let cov: Vec<Vec<f64>> = (0..d.zones).map(|_| (0..k).map(|_| rng.gen_range(0.1..3.0)).collect()).collect();
            let cm = CovModel::new(&s, cov.clone(), DEFAULT_EPSILON, Some(0)).unwrap();
            let feas_b = |b: &[f64]| cm.nll(b).is_ok();
            let w = Watch { inner: &cm, feasible: &feas_b, bad: Cell::new(0) };
            let r = minimize(&w, &cm.initial_beta().unwrap(), &cfg).map_err(|e| e.to_string())?;
            ensure(monotone(&r.objective_trace), "non-monotone covariate trace".into())?;
            ensure(w.bad.get() == 0, format!("{} infeasible covariate iterates", w.bad.get()))?;
            runs += 2;
        }
    }
    let tight = OptimizerConfig { max_iters: 5000, stall: Some(StallRule { tol: 1e-15, window: 10 }), ..Default::default() };
    for _ in 0..20 {
        let n = rng.gen_range(1..8);
        let q = BoxQuadratic {
            a: (0..n).map(|_| rng.gen_range(0.5..5.0)).collect(),
            c: (0..n).map(|_| rng.gen_range(-2.0..3.0)).collect(),
            floor: DEFAULT_EPSILON,
        };
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let a = minimize(&q, &x0, &tight).map_err(|e| e.to_string())?;
        let b = minimize(&q, &x0, &OptimizerConfig { variant: Variant::Boundary, ..tight.clone() }).map_err(|e| e.to_string())?;
        ensure(monotone(&a.objective_trace) && monotone(&b.objective_trace), "non-monotone probe trace".into())?;
        let (fa, fb) = (a.objective(), b.objective());
        worst_agree = worst_agree.max((fa - fb).abs() / fa.abs().max(1.0));
        runs += 2;
    }
    ensure(worst_agree <= 1e-6, format!("variants disagree by {worst_agree:.2e}"))?;
    Ok(format!("{runs} runs monotone and feasible, variant gap {worst_agree:.1e}"))
}

fn noreg_error(sample: &AggregatedSample, truth: &[f64], groups: Vec<TimeGroup>, pairs: &[(usize, usize)], w: f64) -> f64 {
    let m = NoRegModel::new(sample, groups, uniform_space_weights(pairs, w), DEFAULT_EPSILON).unwrap();
    let fit = m.calibrate(Init::Empirical, &OptimizerConfig::default()).unwrap();
    mean_relative_error(truth, &fit.solution)
}

/// Average error over replications for each weight of the grid.
fn error_curve(truth: &GroundTruth, n: u32, reps: u64, period: usize, pairs: &[(usize, usize)], seed: u64) -> Vec<f64> {
    let samples: Vec<AggregatedSample> = (0..reps).map(|r| simulate_counts(truth, &Schedule::uniform(n), seed + r)).collect();
    let jobs: Vec<(usize, usize)> = (0..WEIGHT_GRID.len()).flat_map(|w| (0..samples.len()).map(move |r| (w, r))).collect();
    let errs: Vec<f64> = jobs
        .par_iter()
        .map(|&(w, r)| noreg_error(&samples[r], &truth.expected, parity_groups(period, WEIGHT_GRID[w]), pairs, WEIGHT_GRID[w]))
        .collect();
    (0..WEIGHT_GRID.len()).map(|w| (0..samples.len()).map(|r| errs[w * samples.len() + r]).sum::<f64>() / reps as f64).collect()
}

fn best(curve: &[f64]) -> (f64, f64) {
    let (i, e) = curve.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    (*e, WEIGHT_GRID[i])
}

fn criterion_4() -> Outcome {
    let truth = truth_ex1();
    let pairs = edge_pairs();
    let c1 = error_curve(&truth, 1, 3, 2, &pairs, 100);
    let c10 = error_curve(&truth, 10, 3, 2, &pairs, 200);
    let c500 = error_curve(&truth, 500, 3, 2, &pairs, 300);
    let (b1, w1) = best(&c1);
    let (b10, w10) = best(&c10);
    let msg = format!(
        "N=1 empirical {:.3}, best {b1:.3} at w={w1}; N=10 empirical {:.3}, best {b10:.3} at w={w10}; N=500 empirical {:.3}",
        c1[0], c10[0], c500[0]
    );
    ensure((1.2..=1.9).contains(&c1[0]), msg.clone())?;
    ensure(b1 <= 0.7, msg.clone())?;
    ensure((0.05..=0.11).contains(&c500[0]), msg.clone())?;
    ensure(b1 < c1[0] && b10 < c10[0], msg.clone())?;
    Ok(msg)
}

fn criterion_5() -> Outcome {
    let truth = truth_ex2();
    let emp: Vec<f64> = [1u32, 10, 50, 500]
        .iter()
        .map(|&n| {
            let s = simulate_counts(&truth, &Schedule::uniform(n), 400 + n as u64);
            let m = NoRegModel::new(&s, vec![], vec![], DEFAULT_EPSILON).unwrap();
            mean_relative_error(&truth.expected, &m.empirical())
        })
        .collect();
    let c1 = error_curve(&truth, 1, 1, 2, &[], 500);
    let (b1, w1) = best(&c1);
    let msg = format!("empirical errors {emp:.3?}; N=1 time-only best {b1:.3} at w={w1} vs {:.3} at w=0", c1[0]);
    ensure(emp.windows(2).all(|p| p[1] <= 1.1 * p[0]), msg.clone())?;
    ensure(b1 < c1[0] && w1 > 0.0, msg.clone())?;
    Ok(msg)
}

fn cov_fit(sample: &AggregatedSample, cov: &CovariateField) -> Result<Vec<f64>, String> {
    let m = CovModel::new(sample, cov.rows(), DEFAULT_EPSILON, Some(0)).map_err(|e| e.to_string())?;
    let fit = m.calibrate(&OptimizerConfig::default(), CovMode::Blocks).map_err(|e| e.to_string())?;
    Ok(m.intensities(&fit.beta))
}

fn criterion_6() -> Outcome {
    let cov = CovariateField::from_seed(6);
    let truth = truth_ex3(&cov);
    let mut errs = Vec::new();
    for (n, seed) in [(520u32, 61u64), (52, 62)] {
        let s = simulate_counts(&truth, &Schedule::uniform(n), seed);
        errs.push(mean_relative_error(&truth.expected, &cov_fit(&s, &cov)?));
    }
    let msg = format!("error {:.4} at 520 observations, {:.4} at 52", errs[0], errs[1]);
    ensure(errs[0] <= 0.01 && errs[1] <= 0.03, msg.clone())?;
    Ok(msg)
}

fn criterion_7() -> Outcome {
    let cov = CovariateField::from_seed(7);
    let truth = truth_ex4(&cov);
    let s = simulate_counts(&truth, &Schedule::holidays(510, 10), 71);
    let e_cov = observed_relative_error(&truth.expected, &cov_fit(&s, &cov)?, &s);
    let flat = s.flatten_day_classes();
    let classes = s.dims().classes;
    let same = same_color_pairs();
    let errs: Vec<(f64, f64, &str)> = WEIGHT_GRID
        .par_iter()
        .flat_map_iter(|&w| {
            let run = |pairs: &[(usize, usize)]| {
                let m = NoRegModel::new(&flat, holiday_parity_groups(classes, w), uniform_space_weights(pairs, w), DEFAULT_EPSILON).unwrap();
                let fit = m.calibrate(Init::Empirical, &OptimizerConfig::default()).unwrap();
                observed_relative_error(&truth.expected, &fit.solution, &s)
            };
            [(run(&[]), w, "no neighbours"), (run(&same), w, "same-colour neighbours")]
        })
        .collect();
    let (e_best, w_best, kind) = errs.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    let msg = format!("covariate error {e_cov:.4}; best no-covariate {e_best:.4} ({kind}, w={w_best})");
    ensure(e_cov <= 0.15, msg.clone())?;
    ensure(e_best <= 2.0 * e_cov || e_best <= 0.05, msg.clone())?;
    Ok(msg)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    let left = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
    let right = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson(f, a, m, tol / 2.0, depth - 1) + adaptive_simpson(f, m, b, tol / 2.0, depth - 1)
    }
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=10u32 {
        for k in 1..=10u32 {
            let f = move |s: f64| (2.0 * std::f64::consts::PI * k as f64 * s / 10.0).sin().abs();
            let q = adaptive_simpson(&f, (i - 1) as f64, i as f64, 1e-13, 40);
            worst = worst.max((q - sin_zone_integral(i, k)).abs());
        }
    }
    ensure(worst < 1e-9, format!("max abs error {worst:.2e}"))?;
    Ok(format!("100 pairs, max abs error {worst:.2e}"))
}

fn random_partition(rng: &mut ChaCha8Rng, border: &Region) -> stpoisson::space::SpatialDiscretization {
    if rng.gen_bool(0.5) {
        rect_discretize(border, rng.gen_range(1..8), rng.gen_range(1..8)).unwrap()
    } else {
        let sites: Vec<Point2> = (0..rng.gen_range(2..15)).map(|_| Point2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
        voronoi_discretize(border, &sites).unwrap()
    }
}

fn criterion_9() -> Outcome {
    let border = Region::from(Polygon::rect(0.0, 0.0, 10.0, 10.0).unwrap());
    let grid = rect_discretize(&border, 10, 10).unwrap();
    let area_err = grid.areas().iter().fold(0.0f64, |a, &z| a.max((z - 1.0).abs()));
    ensure(grid.len() == 100 && area_err <= 1e-9, format!("{} zones, area error {area_err:.2e}", grid.len()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mass_err = 0.0f64;
    for _ in 0..100 {
        let mut d1 = random_partition(&mut rng, &border);
        let d2 = random_partition(&mut rng, &border);
        let pop: Vec<f64> = (0..d1.len()).map(|_| rng.gen_range(0.0..1000.0)).collect();
        d1.set_attribute("population", &pop);
        let m = intersection_matrix(&d1, &d2).map_err(|e| e.to_string())?;
        let out = reallocate_attribute(&d1, "population", &d2, &m).map_err(|e| e.to_string())?;
        let (a, b): (f64, f64) = (pop.iter().sum(), out.iter().sum());
        mass_err = mass_err.max((a - b).abs() / a.max(1.0));
    }
    ensure(mass_err <= 1e-9, format!("mass error {mass_err:.2e}"))?;

    let sites: Vec<Point2> = (0..30).map(|_| Point2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let cells = voronoi_cells(&sites, &border).map_err(|e| e.to_string())?;
    let mut violations = 0;
    for _ in 0..100_000 {
        let p = Point2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let nearest = sites.iter().map(|s| s.dist(&p)).fold(f64::INFINITY, f64::min);
        let owner = cells.iter().position(|c| c.iter().any(|poly| poly.contains(&p)));
        match owner {
            Some(o) if sites[o].dist(&p) <= nearest + GEOM_TOL * 10.0 => {}
            _ => violations += 1,
        }
    }
    ensure(violations == 0, format!("{violations} Voronoi violations"))?;
    Ok(format!("area error {area_err:.1e}, mass error {mass_err:.1e}, 0 Voronoi violations in 1e5 points"))
}

fn criterion_10() -> Outcome {
    let truth = truth_ex1();
    let s = simulate_counts(&truth, &Schedule::uniform(10), 1000);
    let template = PenaltyTemplate::new(parity_groups(2, 0.0).into_iter().map(|g| g.intervals).collect(), edge_pairs());
    let cfg = CvConfig { weights: WEIGHT_GRID.to_vec(), seed: 10, ..Default::default() };
    let r = cross_validate(&s, &template, &cfg).map_err(|e| e.to_string())?;
    let empirical = template.build(&s, Weights::equal(0.0)).unwrap().empirical();
    // held-out data: an independent sample from the same truth
    let fresh = simulate_counts(&truth, &Schedule::uniform(10), 2000);
    let (a, b) = (held_out_score(&r.refit.solution, &fresh), held_out_score(&empirical, &fresh));
    let err = mean_relative_error(&truth.expected, &r.refit.solution);
    let msg = format!("w* = {}, held-out {a:.1} vs {b:.1} at w=0, refit error {err:.3}", r.best.time);
    ensure(r.best.time > 0.0 && a >= b, msg.clone())?;
    Ok(msg)
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_gap = 0.0f64;
    let mut max_iters = 0;
    for _ in 0..10 {
        let n = rng.gen_range(1..6);
        let q = BoxQuadratic {
            a: (0..n).map(|_| rng.gen_range(0.5..3.0)).collect(),
            c: (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect(),
            floor: DEFAULT_EPSILON,
        };
        let hi = 5.0;
        let min: f64 = (0..n).map(|k| q.a[k] * (q.c[k].clamp(DEFAULT_EPSILON, hi) - q.c[k]).powi(2)).sum();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..hi)).collect();
        let gap = GapRule { eps: 1e-4, lambda_max: Some(hi), max_cuts: 50 };
        let mut done = None;
        for k in 1..=200 {
            let cfg = OptimizerConfig { max_iters: k, stall: None, gap: Some(gap), ..Default::default() };
            let r = minimize(&q, &x0, &cfg).map_err(|e| e.to_string())?;
            let (u, l) = (r.upper_bound.unwrap(), r.lower_bound.unwrap());
            ensure(l <= min + 1e-12 && min <= u + 1e-12, format!("bounds [{l}, {u}] miss minimum {min}"))?;
            if u - l < 1e-4 {
                done = Some(k);
                worst_gap = worst_gap.max(u - l);
                break;
            }
        }
        let k = done.ok_or_else(|| "gap not closed within 200 cuts".to_string())?;
        max_iters = max_iters.max(k);
    }
    Ok(format!("10 quadratics sandwiched at every step, gap < 1e-4 after at most {max_iters} cuts"))
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_stpoisson"))
}

fn criterion_12() -> Outcome {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/city");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = |name: &str| dir.path().join(name);
    let run = |args: &[&std::ffi::OsStr]| -> Result<(), String> {
        let o = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
        if o.status.code() == Some(0) {
            Ok(())
        } else {
            Err(format!("{:?} exited {:?}: {}", args, o.status.code(), String::from_utf8_lossy(&o.stderr)))
        }
    };
    let os = |s: &str| std::ffi::OsString::from(s);
    let p = |b: PathBuf| b.into_os_string();
    let steps: Vec<Vec<std::ffi::OsString>> = vec![
        vec![os("discretize"), os("--border"), p(fixture.join("border.geojson")), os("--method"), os("rect"), os("--nx"), os("6"), os("--ny"), os("5"), os("--out"), p(out("zones.json"))],
        vec![os("aggregate"), os("--events"), p(fixture.join("events.csv")), os("--zones"), p(out("zones.json")), os("--time"), p(fixture.join("time.json")), os("--types"), os("3"), os("--out"), p(out("sample.json"))],
        vec![os("calibrate"), os("--sample"), p(out("sample.json")), os("--zones"), p(out("zones.json")), os("--model"), os("noreg"), os("--time"), p(fixture.join("time.json")), os("--weight"), os("0.1"), os("--out-dir"), p(out("fit"))],
        vec![os("report"), os("--intensities"), p(out("fit").join("intensities.csv")), os("--group-by"), os("c,t"), os("--out"), p(out("rates.csv"))],
    ];
    for s in &steps {
        let refs: Vec<&std::ffi::OsStr> = s.iter().map(|v| v.as_os_str()).collect();
        run(&refs)?;
    }
    let text = std::fs::read_to_string(out("rates.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("c,t,rate"), "unexpected report header".into())?;
    let types: std::collections::BTreeSet<&str> = lines.filter_map(|l| l.split(',').next()).collect();
    ensure(types.len() == 3, format!("{} types in report", types.len()))?;
    Ok("discretize, aggregate, calibrate and report exited 0; report covers 3 types".into())
}

fn main() {
    let mut suite = Suite { failed: 0 };
    let s = Duration::from_secs;
    suite.run("1", "closed-form MLE equivalence", s(10), criterion_1);
    suite.run("2", "gradient correctness", s(30), criterion_2);
    suite.run("3", "Armijo monotonicity and feasibility", s(60), criterion_3);
    suite.run("4", "example 1 error levels", s(300), criterion_4);
    suite.run("5", "example 2 trend", s(300), criterion_5);
    suite.run("6", "example 3 covariate accuracy", s(180), criterion_6);
    suite.run("7", "example 4 holiday setting", s(300), criterion_7);
    suite.run("8", "sine integrals", s(1), criterion_8);
    suite.run("9", "geometry and partition invariants", s(30), criterion_9);
    suite.run("10", "cross-validation", s(180), criterion_10);
    suite.run("11", "gap bounds", s(10), criterion_11);
    suite.run("12", "city pipeline", s(120), criterion_12);
    if suite.failed > 0 {
        println!("{} criteria failed", suite.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
