use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpoisson::aggregation::{AggregatedSample, Dims};
use stpoisson::covariate::{dykstra, CovMode, CovModel, DEFAULT_EPSILON};
use stpoisson::optimizer::{OptimizerConfig, StallRule};

fn random_model(seed: u64) -> (CovModel, AggregatedSample, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = Dims {
        types: rng.gen_range(1..=2),
        zones: rng.gen_range(1..=6),
        classes: rng.gen_range(1..=2),
        intervals: rng.gen_range(1..=3),
    };
    let k = rng.gen_range(1..=3);
    let x: Vec<Vec<f64>> = (0..dims.zones).map(|_| (0..k).map(|_| rng.gen_range(0.1..5.0)).collect()).collect();
    let per_obs: Vec<Vec<u32>> = (0..dims.n_cells())
        .map(|_| (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..8)).collect())
        .collect();
    let durations = (0..dims.intervals).map(|_| rng.gen_range(0.5..2.0)).collect();
    let s = AggregatedSample::from_per_obs(dims, durations, per_obs).unwrap();
    (CovModel::new(&s, x.clone(), DEFAULT_EPSILON, Some(0)).unwrap(), s, x)
}

fn random_feasible(model: &CovModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let mut b: Vec<f64> = (0..model.n_blocks() * model.n_covariates()).map(|_| rng.gen_range(0.05..1.0)).collect();
    model.project(&mut b).unwrap();
    b
}

// direct summation over every cell of the sample
fn summed_nll(s: &AggregatedSample, x: &[Vec<f64>], beta: &[f64]) -> f64 {
    let d = s.dims();
    let k = x[0].len();
    let mut total = 0.0;
    for c in 0..d.types {
        for i in 0..d.zones {
            for dd in 0..d.classes {
                for t in 0..d.intervals {
                    let b = (c * d.classes + dd) * d.intervals + t;
                    let v: f64 = (0..k).map(|j| beta[b * k + j] * x[i][j]).sum();
                    let (n, m) = (s.n(c, i, dd, t) as f64, s.m(c, i, dd, t) as f64);
                    if n > 0.0 {
                        total += n * v - if m > 0.0 { m * v.ln() } else { 0.0 };
                    }
                }
            }
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nll_matches_direct_summation(seed in any::<u64>()) {
        let (m, s, x) = random_model(seed);
        let b = random_feasible(&m, seed);
        let a = m.nll(&b).unwrap();
        let want = summed_nll(&s, &x, &b);
        prop_assert!((a - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>()) {
        let (m, _, _) = random_model(seed);
        let b: Vec<f64> = random_feasible(&m, seed).iter().map(|v| v + 0.05).collect();
        let g = m.gradient(&b).unwrap();
        let scale = g.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for k in 0..b.len() {
            let h = 1e-6 * b[k].abs().max(1e-3);
            let (mut p, mut q) = (b.clone(), b.clone());
            p[k] += h;
            q[k] -= h;
            let fd = (m.nll(&p).unwrap() - m.nll(&q).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * scale, "coord {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(seed in any::<u64>()) {
        let (m, _, _) = random_model(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = m.n_blocks() * m.n_covariates();
        let a0: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b0: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (mut a, mut b) = (a0.clone(), b0.clone());
        m.project(&mut a).unwrap();
        m.project(&mut b).unwrap();
        let mut a2 = a.clone();
        m.project(&mut a2).unwrap();
        let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(dist(&a, &a2) <= 1e-8);
        prop_assert!(dist(&a, &b) <= dist(&a0, &b0) + 1e-9);
        prop_assert!(m.nll(&a).is_ok());
    }

    #[test]
    fn nll_is_midpoint_convex(seed in any::<u64>()) {
        let (m, _, _) = random_model(seed);
        let a = random_feasible(&m, seed);
        let b = random_feasible(&m, seed.wrapping_add(17));
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let f = |v: &[f64]| m.nll(v).unwrap();
        prop_assert!(f(&mid) <= 0.5 * f(&a) + 0.5 * f(&b) + 1e-9);
    }
}

#[test]
fn projection_satisfies_variational_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let k = 3;
        let rows: Vec<Vec<f64>> = (0..8).map(|_| (0..k).map(|_| rng.gen_range(0.0..2.0)).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let b0: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..1.0)).collect();
        let mut p = b0.clone();
        stpoisson::covariate::active_set(&mut p, &refs, 0.3, Some(0)).unwrap();
        let mut checked = 0;
        while checked < 1000 {
            let cand: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..4.0)).collect();
            let ok = refs.iter().all(|a| a.iter().zip(&cand).map(|(x, y)| x * y).sum::<f64>() >= 0.3)
                && (0.0..=1.0).contains(&cand[0]);
            if !ok {
                continue;
            }
            checked += 1;
            let vi: f64 = (0..k).map(|j| (b0[j] - p[j]) * (cand[j] - p[j])).sum();
            assert!(vi <= 1e-6, "{vi}");
        }
    }
}

#[test]
fn blocks_agree_with_joint_solve() {
    let cfg = OptimizerConfig { max_iters: 20_000, stall: Some(StallRule { tol: 1e-14, window: 10 }), ..OptimizerConfig::default() };
    for seed in 0..10 {
        let (m, _, _) = random_model(seed);
        let a = m.calibrate(&cfg, CovMode::Blocks).unwrap();
        let b = m.calibrate(&cfg, CovMode::Joint).unwrap();
        let fa = m.nll(&a.beta).unwrap();
        let fb = m.nll(&b.beta).unwrap();
        assert!((fa - fb).abs() <= 1e-6 * fa.abs().max(1.0), "seed {seed}: {fa} vs {fb}");
        assert_eq!(a.blocks.len(), m.n_blocks());
    }
}

#[test]
fn zero_arrivals_make_the_objective_linear() {
    let dims = Dims { types: 1, zones: 2, classes: 1, intervals: 1 };
    let s = AggregatedSample::from_per_obs(dims, vec![1.0], vec![vec![0, 0], vec![0]]).unwrap();
    let m = CovModel::new(&s, vec![vec![1.0, 2.0], vec![3.0, 1.0]], DEFAULT_EPSILON, Some(0)).unwrap();
    let b = [0.2, 0.7];
    let want = 2.0 * (0.2 + 1.4) + (0.6 + 0.7);
    assert!((m.nll(&b).unwrap() - want).abs() < 1e-12);
    assert_eq!(m.gradient(&b).unwrap(), vec![2.0 + 3.0, 4.0 + 1.0]);
}

#[test]
fn dykstra_and_active_set_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let k = rng.gen_range(1..=4);
        // well separated normals keep Dykstra fast
        let rows: Vec<Vec<f64>> = (0..rng.gen_range(1..6)).map(|_| (0..k).map(|_| rng.gen_range(-1.0..2.0)).collect()).collect();
        let mut rows: Vec<Vec<f64>> = rows.into_iter().filter(|r| r.iter().any(|v| *v != 0.0)).collect();
        rows.push(vec![1.0; k]);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let b0: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut a = b0.clone();
        let mut b = b0.clone();
        let ra = stpoisson::covariate::active_set(&mut a, &refs, 0.2, Some(0));
        let rb = dykstra(&mut b, &refs, 0.2, Some(0));
        if let (Ok(()), Ok(())) = (&ra, &rb) {
            let d = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d < 1e-6, "{a:?} {b:?}");
        }
    }
}
