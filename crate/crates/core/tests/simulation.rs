use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpoisson::geometry::Point2;
use stpoisson::simulation::*;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 50)
}

#[test]
fn sin_closed_form_matches_quadrature_everywhere() {
    let mut worst = 0.0f64;
    for i in 1..=10u32 {
        for k in 1..=10u32 {
            let f = move |s: f64| (2.0 * std::f64::consts::PI * k as f64 * s / 10.0).sin().abs();
            let q = adaptive(&f, (i - 1) as f64, i as f64);
            worst = worst.max((q - sin_zone_integral(i, k)).abs());
        }
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn ex2_centroid_identity_by_quadrature() {
    let g = truth_ex2();
    for i in [0usize, 7, 45, 62, 99] {
        let (cx, cy) = zone_cell(i);
        let factor = g.get(i, 0, 0) / (cx as f64 + cy as f64 + 1.0);
        let inner = |x: f64| adaptive(&|y: f64| factor * (x + y), cy as f64, cy as f64 + 1.0);
        let q = adaptive(&inner, cx as f64, cx as f64 + 1.0);
        assert!((q - g.get(i, 0, 0)).abs() < 1e-10);
    }
}

#[test]
fn y1_matches_monte_carlo() {
    let cov = CovariateField::from_seed(42);
    let y = cov.aggregates();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in [0usize, 9, 33, 56, 99] {
        let (cx, cy) = zone_cell(i);
        let n = 1_000_000;
        let s: f64 = (0..n)
            .map(|_| cov.x1_at(zone_color(i), Point2::new(cx as f64 + rng.gen::<f64>(), cy as f64 + rng.gen::<f64>())))
            .sum();
        assert!((s / n as f64 - y[i][0]).abs() < 1e-3, "zone {i}");
    }
}

#[test]
fn ex3_truth_is_a_dot_product() {
    let cov = CovariateField::from_seed(9);
    let y = cov.aggregates();
    let g = truth_ex3(&cov);
    for i in 0..N_ZONES {
        for t in 0..N_INTERVALS {
            let b = BETA_EX3[t % 2];
            assert_eq!(g.get(i, 0, t), b[0] * y[i][0] + b[1] * y[i][1] + b[2] * y[i][2]);
        }
    }
    let g4 = truth_ex4(&cov);
    assert_eq!(g4.dims.classes, 9);
    assert!(g4.expected.iter().all(|&v| v > 0.0));
    assert_eq!(g4.get(3, 0, 5), g.get(3, 0, 5));
}

#[test]
fn checkerboard_symmetry() {
    // reflecting x swaps colours; shifting t by one swaps them back
    let g = truth_ex1();
    for i in 0..N_ZONES {
        let (cx, cy) = zone_cell(i);
        let j = cy * SIDE + (SIDE - 1 - cx);
        assert_ne!(zone_color(i), zone_color(j));
        for t in 0..N_INTERVALS - 1 {
            assert_eq!(g.get(i, 0, t), g.get(j, 0, t + 1));
        }
    }
}

#[test]
fn law_of_large_numbers() {
    let mut g = truth_ex1();
    g.expected.iter_mut().for_each(|v| *v = 0.1);
    g.dims.zones = 1;
    g.dims.intervals = 1;
    g.expected.truncate(1);
    let s = simulate_counts(&g, &Schedule::uniform(1_000_000), 3);
    let mean = s.m(0, 0, 0, 0) as f64 / 1e6;
    assert!((mean - 0.1).abs() <= 3.0 * (0.1f64 / 1e6).sqrt());
}

#[test]
fn counts_pass_chi_square() {
    // per-observation counts of Λ = 0.5 cells against the Poisson pmf
    let g = truth_ex1();
    let s = simulate_counts(&g, &Schedule::uniform(200), 17);
    let mut hist = [0u64; 5];
    let mut total = 0u64;
    for k in 0..g.expected.len() {
        if g.expected[k] == 0.5 {
            for &m in &s.per_obs()[k] {
                hist[(m as usize).min(4)] += 1;
                total += 1;
            }
        }
    }
    let lam: f64 = 0.5;
    let mut pmf: Vec<f64> = (0..4).map(|m| (-lam).exp() * lam.powi(m) / (1..=m).product::<i32>().max(1) as f64).collect();
    pmf.push(1.0 - pmf.iter().sum::<f64>());
    let chi2: f64 = hist.iter().zip(&pmf).map(|(&o, &p)| (o as f64 - p * total as f64).powi(2) / (p * total as f64)).sum();
    // 4 degrees of freedom, alpha = 0.001
    assert!(chi2 < 18.47, "{chi2}");
}

#[test]
fn ex4_sample_shape() {
    let cov = CovariateField::from_seed(2);
    let g = truth_ex4(&cov);
    let s = simulate_counts(&g, &Schedule::holidays(51, 1), 1);
    assert_eq!(s.n(0, 0, 0, 0), 51);
    assert_eq!(s.n(0, 0, 1, 0), 1);
    assert_eq!(s.n(0, 0, 8, 0), 1);
    let flat = s.flatten_day_classes();
    assert_eq!(flat.dims().intervals, 9 * N_INTERVALS);
}
