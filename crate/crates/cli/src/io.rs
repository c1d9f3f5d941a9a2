//! File formats of the command-line tool.

use std::fmt::Write as _;
use std::path::Path;

use stpoisson::aggregation::{AggregatedSample, Dims, EventRecord};
use stpoisson::geometry::Region;

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable value");
    s.push(b'\n');
    s
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, path: &Path) -> Result<T, CliError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(k)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::Input(format!("{}:{line}: bad or missing value in column {}", path.display(), k + 1)))
}

/// Writes `c,i,t,lambda` rows in cell order; day classes are folded into `t`.
pub fn intensities_csv(dims: Dims, lambda: &[f64]) -> Vec<u8> {
    let mut s = String::from("c,i,t,lambda\n");
    for (k, l) in lambda.iter().enumerate() {
        let (c, i, d, t) = dims.coords(k);
        writeln!(s, "{c},{i},{},{l:.16e}", d * dims.intervals + t).unwrap();
    }
    s.into_bytes()
}

pub struct IntensityRow {
    pub c: usize,
    pub t: usize,
    pub lambda: f64,
}

pub fn read_intensities(path: &Path) -> Result<Vec<IntensityRow>, CliError> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["c", "i", "t", "lambda"] {
        return Err(CliError::Input(format!("{}: header must be c,i,t,lambda", path.display())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let _zone: usize = field(&rec, 1, path)?;
        rows.push(IntensityRow { c: field(&rec, 0, path)?, t: field(&rec, 2, path)?, lambda: field(&rec, 3, path)? });
    }
    Ok(rows)
}

/// Reads `zone_id,x1,...,xK` into one row per zone `0..zones`.
pub fn read_covariates(path: &Path, zones: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
    if headers.get(0) != Some("zone_id") || headers.len() < 2 {
        return Err(CliError::Input(format!("{}: header must be zone_id,x1,...,xK", path.display())));
    }
    let k = headers.len() - 1;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; zones];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let id: usize = field(&rec, 0, path)?;
        let x = (1..=k).map(|j| field(&rec, j, path)).collect::<Result<Vec<f64>, _>>()?;
        match rows.get_mut(id) {
            Some(slot @ None) => *slot = Some(x),
            Some(Some(_)) => return Err(CliError::Input(format!("{}: zone {id} listed twice", path.display()))),
            None => return Err(CliError::Input(format!("{}: zone {id} is not in the sample", path.display()))),
        }
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| CliError::Input(format!("{}: no covariates for zone {i}", path.display()))))
        .collect()
}

pub fn covariates_csv(rows: &[[f64; 3]]) -> Vec<u8> {
    let mut s = String::from("zone_id,x1,x2,x3\n");
    for (i, r) in rows.iter().enumerate() {
        writeln!(s, "{i},{:.16e},{:.16e},{:.16e}", r[0], r[1], r[2]).unwrap();
    }
    s.into_bytes()
}

/// Writes `c,d,t,k,beta` rows; blocks are ordered by `(c, d, t)`.
pub fn beta_csv(dims: Dims, k: usize, beta: &[f64]) -> Vec<u8> {
    let mut s = String::from("c,d,t,k,beta\n");
    for (n, b) in beta.iter().enumerate() {
        let block = n / k;
        let t = block % dims.intervals;
        let d = (block / dims.intervals) % dims.classes;
        let c = block / (dims.intervals * dims.classes);
        writeln!(s, "{c},{d},{t},{},{b:.16e}", n % k).unwrap();
    }
    s.into_bytes()
}

/// Reads `x,y` site coordinates.
pub fn read_points(path: &Path) -> Result<Vec<stpoisson::geometry::Point2>, CliError> {
    let mut rdr = csv_reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        out.push(stpoisson::geometry::Point2::new(field(&rec, 0, path)?, field(&rec, 1, path)?));
    }
    Ok(out)
}

/// Reads `zone_id,value` pairs.
pub fn read_zone_values(path: &Path, zones: usize) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv_reader(path)?;
    let mut out = vec![None; zones];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let id: usize = field(&rec, 0, path)?;
        let slot = out.get_mut(id).ok_or_else(|| CliError::Input(format!("{}: unknown zone {id}", path.display())))?;
        *slot = Some(field(&rec, 1, path)?);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| CliError::Input(format!("{}: no value for zone {i}", path.display()))))
        .collect()
}

pub fn zone_values_csv(attr: &str, values: &[f64]) -> Vec<u8> {
    let mut s = format!("zone_id,{attr}\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(s, "{i},{v:.16e}").unwrap();
    }
    s.into_bytes()
}

pub fn events_csv(events: &[EventRecord]) -> Vec<u8> {
    let mut s = String::from("ts,lat,lon,type\n");
    for e in events {
        writeln!(s, "{},{:.16e},{:.16e},{}", e.ts.format("%Y-%m-%dT%H:%M:%S"), e.location.y, e.location.x, e.kind).unwrap();
    }
    s.into_bytes()
}

pub fn region_geojson(r: &Region) -> Vec<u8> {
    let polys: Vec<serde_json::Value> = r
        .polygons()
        .iter()
        .map(|p| {
            let rings: Vec<Vec<[f64; 2]>> = p.clone().into();
            serde_json::Value::from(
                rings
                    .into_iter()
                    .map(|mut ring| {
                        if ring.first() != ring.last() {
                            ring.push(ring[0]);
                        }
                        ring
                    })
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    to_json(&serde_json::json!({
        "type": "Feature",
        "properties": {},
        "geometry": { "type": "MultiPolygon", "coordinates": polys },
    }))
}

pub fn sample_json(s: &AggregatedSample) -> Vec<u8> {
    to_json(s)
}
