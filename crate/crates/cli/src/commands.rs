use std::collections::BTreeMap;
use std::path::Path;

use chrono::Duration;
use stpoisson::aggregation::{aggregate as bin_events, read_events_csv, AggregatedSample};
use stpoisson::covariate::{CovMode, CovModel};
use stpoisson::crossval::{cross_validate, CvConfig, PenaltyTemplate};
use stpoisson::geometry::{Polygon, Region};
use stpoisson::noreg::{modular_groups, uniform_space_weights, Init, NoRegModel, TimeGroup};
use stpoisson::optimizer::{GapRule, OptimizerConfig, StallRule, Variant};
use stpoisson::simulation::{self, city, CovariateField, Schedule};
use stpoisson::space::{
    custom_discretize, geojson, hex_discretize, intersection_matrix, neighbor_graph, rect_discretize,
    reallocate_attribute, voronoi_discretize, SpatialDiscretization,
};
use stpoisson::time::{parse_timestamp, TimeConfig, TimeDiscretization, TimeUnit};

use crate::error::CliError;
use crate::io::{self, read_json, read_text, to_json};
use crate::manifest::{beside, Run};
use crate::*;

fn need<T: Copy>(v: Option<T>, flag: &str, method: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("--{flag} is required for {method}")))
}

pub fn discretize(a: &DiscretizeArgs) -> Result<(), CliError> {
    let mut run = Run::new("discretize", a, None);
    run.input(&a.border)?;
    let border = geojson::parse_region(&read_text(&a.border)?).map_err(CliError::input)?;
    let d = match a.method {
        Method::Rect => rect_discretize(&border, need(a.nx, "nx", "rect")?, need(a.ny, "ny", "rect")?),
        Method::Hex => hex_discretize(&border, need(a.scale, "scale", "hex")?),
        Method::Voronoi => {
            let path = a.sites.as_deref().ok_or_else(|| CliError::Input("--sites is required for voronoi".into()))?;
            run.input(path)?;
            voronoi_discretize(&border, &io::read_points(path)?)
        }
        Method::Custom => {
            let path = a.subregions.as_deref().ok_or_else(|| CliError::Input("--subregions is required for custom".into()))?;
            run.input(path)?;
            let features = geojson::parse_features(&read_text(path)?).map_err(CliError::input)?;
            custom_discretize(&border, features.into_iter().map(|f| (f.polygons, f.properties)).collect())
        }
    }
    .map_err(CliError::input)?
    .with_neighbor_rule(a.neighbor_rule.into());
    run.output(a.out.clone(), to_json(&d));
    if let Some(g) = &a.geojson {
        run.output(g.clone(), to_json(&geojson::zones_to_features(&d)));
    }
    run.commit(&beside(&a.out))
}

fn read_zones(path: &Path) -> Result<SpatialDiscretization, CliError> {
    read_json(path)
}

pub fn aggregate(a: &AggregateArgs) -> Result<(), CliError> {
    let mut run = Run::new("aggregate", a, None);
    for p in [&a.events, &a.zones, &a.time] {
        run.input(p)?;
    }
    let file = std::fs::File::open(&a.events).map_err(|e| CliError::Input(format!("{}: {e}", a.events.display())))?;
    let events = read_events_csv(file).map_err(|e| CliError::Input(format!("{}: {e}", a.events.display())))?;
    let sd = read_zones(&a.zones)?;
    let td: TimeDiscretization = read_json(&a.time)?;
    let n_types = a.types.unwrap_or_else(|| events.iter().map(|e| e.kind + 1).max().unwrap_or(1));
    let first = events.iter().map(|e| e.ts).min();
    let last = events.iter().map(|e| e.ts).max();
    let start = match &a.start {
        Some(s) => parse_timestamp(s).map_err(CliError::input)?,
        None => td.anchor_for(first),
    };
    let end = match (&a.end, last) {
        (Some(s), _) => parse_timestamp(s).map_err(CliError::input)?,
        (None, Some(last)) => {
            let period = td.config().period as i64 * td.config().time_unit.seconds();
            let n = (last - start).num_seconds().div_euclid(period) + 1;
            start + Duration::seconds(n * period)
        }
        (None, None) => return Err(CliError::Input("no events; give --start and --end".into())),
    };
    let sample = bin_events(&events, &sd, &td, (start, end), n_types).map_err(CliError::input)?;
    run.output(a.out.clone(), io::sample_json(&sample));
    run.commit(&beside(&a.out))
}

fn square_zones() -> SpatialDiscretization {
    let side = simulation::SIDE as f64;
    let border = Region::from(Polygon::rect(0.0, 0.0, side, side).expect("valid square"));
    rect_discretize(&border, simulation::SIDE, simulation::SIDE).expect("valid grid")
}

/// Weekly period of 4-hour slots, grouped by time of day.
fn city_time() -> TimeConfig {
    let mut c = TimeConfig::periodic_equal(TimeUnit::Hour, 4, 168);
    c.groups = Some((0..6).map(|s| (0..7).map(|d| 6 * d + s).collect()).collect());
    c
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut run = Run::new("simulate", a, Some(a.seed));
    let dir = &a.out_dir;
    if matches!(a.scenario, Scenario::City) {
        if a.weeks == 0 {
            return Err(CliError::Input("--weeks must be positive".into()));
        }
        let events = city::events(a.weeks, a.per_day, a.seed);
        run.output(dir.join("border.geojson"), io::region_geojson(&city::border()));
        run.output(dir.join("events.csv"), io::events_csv(&events));
        run.output(dir.join("time.json"), to_json(&city_time()));
        return run.commit(&dir.join("manifest.json"));
    }
    if a.observations == 0 {
        return Err(CliError::Input("--observations must be positive".into()));
    }
    let cov = CovariateField::from_seed(a.seed);
    let (truth, schedule) = match a.scenario {
        Scenario::Ex1 => (simulation::truth_ex1(), Schedule::uniform(a.observations)),
        Scenario::Ex2 => (simulation::truth_ex2(), Schedule::uniform(a.observations)),
        Scenario::Ex3 => (simulation::truth_ex3(&cov), Schedule::uniform(a.observations)),
        Scenario::Ex4 => (simulation::truth_ex4(&cov), Schedule::holidays(a.observations, a.holiday_observations)),
        Scenario::City => unreachable!(),
    };
    let sample = simulation::simulate_counts(&truth, &schedule, a.seed);
    run.output(dir.join("sample.json"), io::sample_json(&sample));
    run.output(dir.join("truth.csv"), io::intensities_csv(truth.dims, &truth.expected));
    run.output(dir.join("zones.json"), to_json(&square_zones()));
    if matches!(a.scenario, Scenario::Ex3 | Scenario::Ex4) {
        run.output(dir.join("covariates.csv"), io::covariates_csv(&cov.aggregates()));
    }
    run.commit(&dir.join("manifest.json"))
}

fn optimizer_config(o: &OptArgs) -> Result<OptimizerConfig, CliError> {
    let cfg = OptimizerConfig {
        sigma: o.sigma,
        delta_bar: o.delta_bar,
        max_iters: o.max_iters,
        variant: match o.variant {
            VariantArg::FeasibleDirection => Variant::FeasibleDirection,
            VariantArg::Boundary => Variant::Boundary,
        },
        stall: (o.stall_tol > 0.0).then_some(StallRule { tol: o.stall_tol, window: o.stall_window }),
        gap: o.lambda_max.map(|hi| GapRule { eps: o.gap_eps, lambda_max: Some(hi), max_cuts: o.max_cuts }),
        record_steps: false,
    };
    if !(cfg.sigma > 0.0 && cfg.sigma < 1.0) || !(cfg.delta_bar > 0.0) || cfg.max_iters == 0 {
        return Err(CliError::Input("need 0 < sigma < 1, delta-bar > 0 and max-iters > 0".into()));
    }
    Ok(cfg)
}

/// Time groups over the day-class-flattened intervals, and neighbour pairs.
fn penalty(p: &PenaltyArgs, run: &mut Run, sample: &AggregatedSample) -> Result<(Vec<Vec<usize>>, Vec<(usize, usize)>), CliError> {
    let dims = sample.dims();
    let flat = dims.classes * dims.intervals;
    let groups = if let Some(period) = p.group_period {
        if period == 0 || period > flat {
            return Err(CliError::Input(format!("--group-period must be in 1..={flat}")));
        }
        modular_groups(flat, period, 0.0).into_iter().map(|g| g.intervals).collect()
    } else if let Some(path) = &p.time {
        run.input(path)?;
        let td: TimeDiscretization = read_json(path)?;
        let groups = td.groups().map(<[_]>::to_vec).unwrap_or_default();
        if td.n_intervals() != dims.intervals {
            return Err(CliError::Input(format!("{} has {} intervals, the sample {}", path.display(), td.n_intervals(), dims.intervals)));
        }
        (0..dims.classes)
            .flat_map(|d| groups.iter().map(move |g| g.iter().map(|t| d * dims.intervals + t).collect()))
            .collect()
    } else {
        Vec::new()
    };
    let pairs = match &p.zones {
        Some(path) => {
            run.input(path)?;
            let sd = read_zones(path)?;
            if sd.len() != dims.zones {
                return Err(CliError::Input(format!("{} has {} zones, the sample {}", path.display(), sd.len(), dims.zones)));
            }
            match p.neighbor_rule {
                Some(r) => neighbor_graph(&sd, r.into()),
                None => sd.neighbors().to_vec(),
            }
        }
        None => Vec::new(),
    };
    Ok((groups, pairs))
}

fn read_sample(path: &Path, run: &mut Run) -> Result<AggregatedSample, CliError> {
    run.input(path)?;
    read_json(path)
}

pub fn calibrate(a: &CalibrateArgs) -> Result<(), CliError> {
    let mut run = Run::new("calibrate", a, None);
    let sample = read_sample(&a.sample, &mut run)?;
    let cfg = optimizer_config(&a.opt)?;
    let dims = sample.dims();
    let dir = &a.out_dir;
    match a.model {
        ModelArg::Noreg => {
            let flat = sample.flatten_day_classes();
            let (groups, pairs) = penalty(&a.penalty, &mut run, &sample)?;
            let wt = a.time_weight.unwrap_or(a.weight);
            let ws = a.space_weight.unwrap_or(a.weight);
            let groups = groups.into_iter().map(|intervals| TimeGroup { intervals, weight: wt }).collect();
            let model = NoRegModel::new(&flat, groups, uniform_space_weights(&pairs, ws), a.penalty.epsilon)?;
            let init = a.init_constant.map_or(Init::Empirical, Init::Constant);
            let fit = model.calibrate(init, &cfg)?;
            run.output(dir.join("intensities.csv"), io::intensities_csv(flat.dims(), &fit.solution));
            run.output(dir.join("result.json"), to_json(&fit));
        }
        ModelArg::Cov => {
            let path = a.covariates.as_deref().ok_or_else(|| CliError::Input("--covariates is required for cov".into()))?;
            run.input(path)?;
            let x = io::read_covariates(path, dims.zones)?;
            let k = x.first().map_or(0, Vec::len);
            let bounded = (!a.no_box).then_some(a.box_coefficient);
            let model = CovModel::new(&sample, x, a.penalty.epsilon, bounded)?;
            let mode = match a.mode {
                ModeArg::Blocks => CovMode::Blocks,
                ModeArg::Joint => CovMode::Joint,
            };
            let fit = model.calibrate(&cfg, mode)?;
            run.output(dir.join("intensities.csv"), io::intensities_csv(dims, &model.intensities(&fit.beta)));
            run.output(dir.join("beta.csv"), io::beta_csv(dims, k, &fit.beta));
            run.output(dir.join("result.json"), to_json(&fit));
        }
    }
    run.commit(&dir.join("manifest.json"))
}

fn read_weights(path: &Path) -> Result<Vec<f64>, CliError> {
    read_text(path)?
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| CliError::Input(format!("{}: bad weight {w:?}", path.display()))))
        .collect()
}

pub fn cv(a: &CvArgs) -> Result<(), CliError> {
    let mut run = Run::new("cv", a, Some(a.seed));
    let sample = read_sample(&a.sample, &mut run)?;
    let weights = match &a.weights_file {
        Some(p) => {
            run.input(p)?;
            read_weights(p)?
        }
        None => a.weights_list.clone(),
    };
    let folds = match (a.cv_proportion, a.folds) {
        (Some(p), _) if p > 0.0 && p <= 1.0 => (1.0 / p).round() as usize,
        (Some(p), _) => return Err(CliError::Input(format!("--cv-proportion {p} must be in (0, 1]"))),
        (None, Some(k)) => k,
        (None, None) => 5,
    };
    let (groups, pairs) = penalty(&a.penalty, &mut run, &sample)?;
    let mut template = PenaltyTemplate::new(groups, pairs);
    template.epsilon = a.penalty.epsilon;
    let cfg = CvConfig { weights, space_weights: a.space_weights_list.clone(), folds, seed: a.seed, optimizer: optimizer_config(&a.opt)? };
    let flat = sample.flatten_day_classes();
    let r = cross_validate(&flat, &template, &cfg)?;
    let mut table = String::from("time_weight,space_weight,mean");
    for k in 0..folds {
        table.push_str(&format!(",rep{k}"));
    }
    table.push('\n');
    for s in &r.scores {
        table.push_str(&format!("{:.16e},{:.16e},{:.16e}", s.weights.time, s.weights.space, s.mean));
        for v in &s.per_replication {
            table.push_str(&format!(",{v:.16e}"));
        }
        table.push('\n');
    }
    let dir = &a.out_dir;
    run.output(dir.join("scores.csv"), table.into_bytes());
    run.output(dir.join("intensities.csv"), io::intensities_csv(flat.dims(), &r.refit.solution));
    run.output(dir.join("result.json"), to_json(&r));
    run.commit(&dir.join("manifest.json"))
}

pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let rows = io::read_intensities(&a.intensities)?;
    let mut sums: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for r in &rows {
        let key = match a.group_by {
            GroupBy::T => (0, r.t),
            GroupBy::CT => (r.c, r.t),
        };
        *sums.entry(key).or_default() += r.lambda;
    }
    let mut out = String::from(match a.group_by {
        GroupBy::T => "t,rate\n",
        GroupBy::CT => "c,t,rate\n",
    });
    for ((c, t), v) in sums {
        match a.group_by {
            GroupBy::T => out.push_str(&format!("{t},{v:.16e}\n")),
            GroupBy::CT => out.push_str(&format!("{c},{t},{v:.16e}\n")),
        }
    }
    match &a.out {
        None => {
            print!("{out}");
            Ok(())
        }
        Some(path) => {
            let mut run = Run::new("report", a, None);
            run.input(&a.intensities)?;
            run.output(path.clone(), out.into_bytes());
            run.commit(&beside(path))
        }
    }
}

pub fn reallocate(a: &ReallocateArgs) -> Result<(), CliError> {
    let mut run = Run::new("reallocate", a, None);
    run.input(&a.from)?;
    run.input(&a.to)?;
    let mut d1 = read_zones(&a.from)?;
    let mut d2 = read_zones(&a.to)?;
    if let Some(p) = &a.values {
        run.input(p)?;
        let v = io::read_zone_values(p, d1.len())?;
        d1.set_attribute(&a.attribute, &v);
    }
    let m = intersection_matrix(&d1, &d2).map_err(CliError::input)?;
    let out = reallocate_attribute(&d1, &a.attribute, &d2, &m).map_err(CliError::input)?;
    d2.set_attribute(&a.attribute, &out);
    run.output(a.out.clone(), to_json(&d2));
    if let Some(c) = &a.csv {
        run.output(c.clone(), io::zone_values_csv(&a.attribute, &out));
    }
    run.commit(&beside(&a.out))
}
