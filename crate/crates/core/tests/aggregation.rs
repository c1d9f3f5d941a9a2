use chrono::{Duration, NaiveDate, NaiveDateTime};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpoisson::aggregation::*;
use stpoisson::geometry::{Point2, Polygon, Region};
use stpoisson::space::rect_discretize;
use stpoisson::time::{TimeConfig, TimeDiscretization, TimeUnit};

fn monday() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

fn events(seed: u64, n: usize) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| EventRecord {
            ts: monday() + Duration::seconds(rng.gen_range(0..3 * 7 * 86_400)),
            // some events fall outside the 10×10 border
            location: Point2::new(rng.gen_range(-1.0..11.0), rng.gen_range(0.0..10.0)),
            kind: rng.gen_range(0..2),
            day_class: None,
        })
        .collect()
}

fn setup() -> (stpoisson::space::SpatialDiscretization, TimeDiscretization) {
    let border = Region::from(Polygon::rect(0.0, 0.0, 10.0, 10.0).unwrap());
    let sd = rect_discretize(&border, 4, 3).unwrap();
    let td = TimeDiscretization::new(TimeConfig::periodic_equal(TimeUnit::Hour, 6, 7 * 24)).unwrap();
    (sd, td)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn every_event_is_accounted_for(seed in any::<u64>(), n in 0usize..400) {
        let (sd, td) = setup();
        let ev = events(seed, n);
        let s = aggregate(&ev, &sd, &td, (monday(), monday() + Duration::weeks(3)), 2).unwrap();
        prop_assert_eq!(s.total_events() + s.dropped_outside + s.dropped_horizon, n as u64);
        prop_assert_eq!(s.dropped_horizon, 0);
        prop_assert!(s.n_tensor().iter().all(|&v| v == 3));
    }

    #[test]
    fn folds_reunite(seed in any::<u64>(), k in 2usize..6) {
        let (sd, td) = setup();
        let s = aggregate(&events(seed, 300), &sd, &td, (monday(), monday() + Duration::weeks(3)), 2).unwrap();
        for f in split_folds(&s, k, seed).unwrap() {
            for c in 0..s.n_cells() {
                prop_assert_eq!(f.train.n_at(c) + f.test.n_at(c), s.n_at(c));
                prop_assert_eq!(f.train.m_at(c) + f.test.m_at(c), s.m_at(c));
            }
        }
    }
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let (sd, td) = setup();
    let ev = events(9, 5000);
    let horizon = (monday(), monday() + Duration::weeks(3));
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| aggregate(&ev, &sd, &td, horizon, 2).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn events_beyond_the_horizon_are_counted_separately() {
    let (sd, td) = setup();
    let ev = events(3, 200);
    let s = aggregate(&ev, &sd, &td, (monday(), monday() + Duration::weeks(2)), 2).unwrap();
    assert!(s.dropped_horizon > 0);
    assert_eq!(s.total_events() + s.dropped_outside + s.dropped_horizon, 200);
}

#[test]
fn five_folds_of_ten_observations() {
    let dims = Dims { types: 1, zones: 1, classes: 1, intervals: 1 };
    let s = AggregatedSample::from_per_obs(dims, vec![1.0], vec![(0..10).collect()]).unwrap();
    let folds = split_folds(&s, 5, 1).unwrap();
    assert!(folds.iter().all(|f| f.train.n_at(0) == 2 && f.test.n_at(0) == 8));
}

#[test]
fn bad_rows_report_their_line() {
    let csv = "ts,lat,lon,type\n2024-01-01T00:00:00,1,1,0\nnot-a-date,1,1,0\n";
    let e = read_events_csv(csv.as_bytes()).unwrap_err();
    assert!(e.to_string().contains('3'), "{e}");
}
