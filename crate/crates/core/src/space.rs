//! Spatial discretizations: partitions of a border region into zones.
//!
//! Zones are numbered from 0. Cells of a construction grid that miss the
//! border are dropped and the remaining ids compacted. Points are located with
//! a uniform bucket index; a point on a shared boundary goes to the lowest id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    boundary_contact, convex_hull, parts_centroid, polygon_intersection, region_intersection,
    tolerance_for, voronoi_cells, BBox, Contact, GeometryError, Point2, Polygon, Region,
};

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("border region is empty")]
    EmptyRegion,
    #[error("grid dimensions must be at least 1, got {0}x{1}")]
    InvalidGrid(usize, usize),
    #[error("hexagon scale must be in 1..=16, got {0}")]
    InvalidScale(u32),
    #[error("subregions {0} and {1} overlap")]
    OverlapError(usize, usize),
    #[error("subregions leave {0:.3e} of the border area uncovered")]
    CoverageError(f64),
    #[error("discretizations have different borders")]
    BorderMismatch,
    #[error("zone {zone} has no attribute {attr:?}")]
    MissingAttribute { zone: usize, attr: String },
    #[error("geometry input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborRule {
    #[default]
    EdgeOnly,
    EdgeOrVertex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: usize,
    pub geometry: Vec<Polygon>,
    pub area: f64,
    pub centroid: Point2,
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

impl Zone {
    pub fn contains_tol(&self, p: &Point2, tol: f64) -> bool {
        self.geometry.iter().any(|g| g.contains_tol(p, tol))
    }

    fn bbox(&self) -> BBox {
        self.geometry
            .iter()
            .map(Polygon::bbox)
            .reduce(|a, b| a.union(&b))
            .expect("zone has geometry")
    }
}

/// Uniform bucket grid over zone bounding boxes.
#[derive(Debug, Clone)]
struct BucketIndex {
    bbox: BBox,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl BucketIndex {
    fn build(boxes: &[BBox], tol: f64) -> Self {
        let bbox = boxes.iter().copied().reduce(|a, b| a.union(&b)).unwrap_or(BBox {
            min: Point2::new(0.0, 0.0),
            max: Point2::new(1.0, 1.0),
        });
        let side = ((boxes.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let mut idx = BucketIndex { bbox, nx: side, ny: side, buckets: vec![Vec::new(); side * side] };
        for (k, b) in boxes.iter().enumerate() {
            let (x0, y0) = idx.cell_of(b.min.x - tol, b.min.y - tol);
            let (x1, y1) = idx.cell_of(b.max.x + tol, b.max.y + tol);
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    idx.buckets[gy * idx.nx + gx].push(k);
                }
            }
        }
        idx
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let fx = (x - self.bbox.min.x) / self.bbox.width().max(f64::MIN_POSITIVE);
        let fy = (y - self.bbox.min.y) / self.bbox.height().max(f64::MIN_POSITIVE);
        let gx = ((fx * self.nx as f64).floor().max(0.0) as usize).min(self.nx - 1);
        let gy = ((fy * self.ny as f64).floor().max(0.0) as usize).min(self.ny - 1);
        (gx, gy)
    }

    /// Candidate ids, ascending.
    fn candidates(&self, p: &Point2, tol: f64) -> &[usize] {
        if !self.bbox.contains(p, tol) {
            return &[];
        }
        let (gx, gy) = self.cell_of(p.x, p.y);
        &self.buckets[gy * self.nx + gx]
    }
}

/// A partition of a border region into zones.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DiscretizationRepr", into = "DiscretizationRepr")]
pub struct SpatialDiscretization {
    zones: Vec<Zone>,
    border: Region,
    neighbors: Vec<(usize, usize)>,
    neighbor_rule: NeighborRule,
    grid: Option<GridMap>,
    tol: f64,
    index: BucketIndex,
}

/// Mapping from construction-grid cell `(row, col)` to zone id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Option<usize>>,
}

impl GridMap {
    pub fn zone_at(&self, row: usize, col: usize) -> Option<usize> {
        self.cells[row * self.cols + col]
    }
}

#[derive(Serialize, Deserialize)]
struct DiscretizationRepr {
    border: Vec<Polygon>,
    neighbor_rule: NeighborRule,
    adjacency: Vec<(usize, usize)>,
    zones: Vec<Zone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridMap>,
}

impl TryFrom<DiscretizationRepr> for SpatialDiscretization {
    type Error = SpaceError;

    fn try_from(r: DiscretizationRepr) -> Result<Self, SpaceError> {
        let border = Region::new(r.border).map_err(|_| SpaceError::EmptyRegion)?;
        for (k, z) in r.zones.iter().enumerate() {
            if z.id != k {
                return Err(SpaceError::Input(format!("zone at position {k} has id {}", z.id)));
            }
        }
        let n = r.zones.len();
        if r.adjacency.iter().any(|&(a, b)| a >= n || b >= n || a == b) {
            return Err(SpaceError::Input("adjacency refers to an invalid zone".into()));
        }
        let mut d = SpatialDiscretization::assemble(border, r.zones, r.neighbor_rule);
        d.neighbors = normalise_pairs(r.adjacency);
        d.grid = r.grid;
        Ok(d)
    }
}

impl From<SpatialDiscretization> for DiscretizationRepr {
    fn from(d: SpatialDiscretization) -> Self {
        DiscretizationRepr {
            border: d.border.polygons().to_vec(),
            neighbor_rule: d.neighbor_rule,
            adjacency: d.neighbors,
            zones: d.zones,
            grid: d.grid,
        }
    }
}

fn normalise_pairs(mut pairs: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    for p in pairs.iter_mut() {
        if p.0 > p.1 {
            *p = (p.1, p.0);
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

impl SpatialDiscretization {
    fn assemble(border: Region, zones: Vec<Zone>, rule: NeighborRule) -> Self {
        let tol = tolerance_for(&border.bbox());
        let boxes: Vec<BBox> = zones.iter().map(Zone::bbox).collect();
        let index = BucketIndex::build(&boxes, tol);
        SpatialDiscretization { zones, border, neighbors: Vec::new(), neighbor_rule: rule, grid: None, tol, index }
    }

    /// Builds a discretization from zone geometries, dropping slivers and empty zones.
    ///
    /// Returns the discretization and, for each input, its zone id if kept.
    pub fn from_parts(
        border: Region,
        parts: Vec<(Vec<Polygon>, BTreeMap<String, f64>)>,
        rule: NeighborRule,
    ) -> (Self, Vec<Option<usize>>) {
        let min_area = 1e-12 * border.area();
        let mut zones = Vec::new();
        let mut kept = Vec::with_capacity(parts.len());
        for (geometry, attributes) in parts {
            let geometry: Vec<Polygon> = geometry.into_iter().filter(|p| p.area() > min_area).collect();
            let area: f64 = geometry.iter().map(Polygon::area).sum();
            if geometry.is_empty() || area <= min_area {
                kept.push(None);
                continue;
            }
            let id = zones.len();
            kept.push(Some(id));
            let centroid = parts_centroid(&geometry);
            zones.push(Zone { id, geometry, area, centroid, attributes });
        }
        let mut d = Self::assemble(border, zones, rule);
        d.neighbors = d.compute_neighbors(rule);
        (d, kept)
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn border(&self) -> &Region {
        &self.border
    }

    pub fn neighbor_rule(&self) -> NeighborRule {
        self.neighbor_rule
    }

    /// Unordered neighbour pairs `(i, j)` with `i < j`, sorted.
    pub fn neighbors(&self) -> &[(usize, usize)] {
        &self.neighbors
    }

    pub fn grid(&self) -> Option<&GridMap> {
        self.grid.as_ref()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn areas(&self) -> Vec<f64> {
        self.zones.iter().map(|z| z.area).collect()
    }

    /// Recomputes the stored neighbour set under `rule`.
    pub fn with_neighbor_rule(mut self, rule: NeighborRule) -> Self {
        self.neighbors = self.compute_neighbors(rule);
        self.neighbor_rule = rule;
        self
    }

    pub fn set_attribute(&mut self, attr: &str, values: &[f64]) {
        for (z, &v) in self.zones.iter_mut().zip(values) {
            z.attributes.insert(attr.to_string(), v);
        }
    }

    /// Zone containing `p`, lowest id on shared boundaries.
    pub fn locate(&self, p: &Point2) -> Option<usize> {
        self.index
            .candidates(p, self.tol)
            .iter()
            .copied()
            .find(|&k| self.zones[k].contains_tol(p, self.tol))
    }

    fn compute_neighbors(&self, rule: NeighborRule) -> Vec<(usize, usize)> {
        let tol = self.tol;
        let boxes: Vec<BBox> = self.zones.iter().map(Zone::bbox).collect();
        let mut order: Vec<usize> = (0..self.zones.len()).collect();
        order.sort_by(|&a, &b| boxes[a].min.x.total_cmp(&boxes[b].min.x));
        let mut pairs = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[pos + 1..] {
                if boxes[j].min.x > boxes[i].max.x + tol {
                    break;
                }
                if !boxes[i].overlaps(&boxes[j], tol) {
                    continue;
                }
                let c = boundary_contact(&self.zones[i].geometry, &self.zones[j].geometry, tol);
                let hit = match rule {
                    NeighborRule::EdgeOnly => c == Contact::Edge,
                    NeighborRule::EdgeOrVertex => c != Contact::None,
                };
                if hit {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
        normalise_pairs(pairs)
    }

    /// Neighbour lists per zone.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.zones.len()];
        for &(a, b) in &self.neighbors {
            adj[a].push(b);
            adj[b].push(a);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        adj
    }
}

/// Neighbour pairs of `d` under `rule`, independent of the stored rule.
pub fn neighbor_graph(d: &SpatialDiscretization, rule: NeighborRule) -> Vec<(usize, usize)> {
    if rule == d.neighbor_rule {
        d.neighbors.clone()
    } else {
        d.compute_neighbors(rule)
    }
}

/// Rectangle spanning the points' bounding box.
pub fn rectangle_border(points: &[Point2]) -> Result<Region, SpaceError> {
    let b = BBox::of_points(points.iter()).ok_or(SpaceError::EmptyRegion)?;
    let p = Polygon::rect(b.min.x, b.min.y, b.max.x, b.max.y).map_err(|_| SpaceError::EmptyRegion)?;
    Ok(Region::from(p))
}

/// Convex hull of the points as a border.
pub fn hull_border(points: &[Point2]) -> Result<Region, SpaceError> {
    Ok(Region::from(convex_hull(points)?))
}

/// Split the border's bounding box into `nx × ny` cells, numbered row-major from the bottom left.
pub fn rect_discretize(border: &Region, nx: usize, ny: usize) -> Result<SpatialDiscretization, SpaceError> {
    if nx == 0 || ny == 0 {
        return Err(SpaceError::InvalidGrid(nx, ny));
    }
    let b = border.bbox();
    let (w, h) = (b.width() / nx as f64, b.height() / ny as f64);
    let mut parts = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        for col in 0..nx {
            let x0 = b.min.x + col as f64 * w;
            let y0 = b.min.y + row as f64 * h;
            // last edge snapped to the bbox so rounding leaves no gap
            let x1 = if col + 1 == nx { b.max.x } else { b.min.x + (col + 1) as f64 * w };
            let y1 = if row + 1 == ny { b.max.y } else { b.min.y + (row + 1) as f64 * h };
            let cell = Polygon::rect(x0, y0, x1, y1)?;
            parts.push((region_intersection(border, &cell), BTreeMap::new()));
        }
    }
    let (mut d, kept) = SpatialDiscretization::from_parts(border.clone(), parts, NeighborRule::EdgeOnly);
    d.grid = Some(GridMap { rows: ny, cols: nx, cells: kept });
    Ok(d)
}

/// Hexagon circumradius for a border bounding box at `scale`.
pub fn hex_radius(bbox: &BBox, scale: u32) -> f64 {
    bbox.diagonal() / (2.0 * 3f64.powf((scale as f64 - 1.0) / 2.0))
}

/// Flat-top hexagonal tiling anchored at the bounding-box centre.
pub fn hex_discretize(border: &Region, scale: u32) -> Result<SpatialDiscretization, SpaceError> {
    if !(1..=16).contains(&scale) {
        return Err(SpaceError::InvalidScale(scale));
    }
    let b = border.bbox();
    let c = b.center();
    let r = hex_radius(&b, scale);
    let dx = 1.5 * r;
    let dy = 3f64.sqrt() * r;
    let qmax = ((0.5 * b.width() + r) / dx).ceil() as i64;
    let rmax = ((0.5 * b.height() + r) / dy).ceil() as i64 + 1;
    let mut centers = Vec::new();
    for row in -rmax..=rmax {
        for q in -qmax..=qmax {
            let x = c.x + dx * q as f64;
            let y = c.y + dy * (row as f64 + 0.5 * q.rem_euclid(2) as f64);
            let hb = BBox { min: Point2::new(x - r, y - dy / 2.0), max: Point2::new(x + r, y + dy / 2.0) };
            if hb.overlaps(&b, 0.0) {
                centers.push((row, q, Point2::new(x, y)));
            }
        }
    }
    centers.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut parts = Vec::with_capacity(centers.len());
    for &(_, _, p) in &centers {
        let ring = (0..6)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_3 * k as f64;
                Point2::new(p.x + r * a.cos(), p.y + r * a.sin())
            })
            .collect();
        let hex = Polygon::new(ring, Vec::new())?;
        parts.push((region_intersection(border, &hex), BTreeMap::new()));
    }
    Ok(SpatialDiscretization::from_parts(border.clone(), parts, NeighborRule::EdgeOnly).0)
}

/// Zones given by user subregions clipped to the border.
pub fn custom_discretize(
    border: &Region,
    subregions: Vec<(Vec<Polygon>, BTreeMap<String, f64>)>,
) -> Result<SpatialDiscretization, SpaceError> {
    let areas: Vec<f64> = subregions.iter().map(|(g, _)| g.iter().map(Polygon::area).sum()).collect();
    let boxes: Vec<Option<BBox>> = subregions
        .iter()
        .map(|(g, _)| g.iter().map(Polygon::bbox).reduce(|a, b| a.union(&b)))
        .collect();
    for i in 0..subregions.len() {
        for j in i + 1..subregions.len() {
            let (Some(bi), Some(bj)) = (boxes[i], boxes[j]) else { continue };
            if !bi.overlaps(&bj, 0.0) {
                continue;
            }
            let mut a = 0.0;
            for p in &subregions[i].0 {
                for q in &subregions[j].0 {
                    a += polygon_intersection(p, q).iter().map(Polygon::area).sum::<f64>();
                }
            }
            if a > 1e-6 * areas[i].min(areas[j]) {
                return Err(SpaceError::OverlapError(i, j));
            }
        }
    }
    let parts = subregions
        .into_iter()
        .map(|(g, attrs)| (g.iter().flat_map(|p| region_intersection(border, p)).collect(), attrs))
        .collect();
    let (d, _) = SpatialDiscretization::from_parts(border.clone(), parts, NeighborRule::EdgeOnly);
    let covered: f64 = d.zones.iter().map(|z| z.area).sum();
    let deficit = 1.0 - covered / border.area();
    if deficit > 1e-3 {
        return Err(SpaceError::CoverageError(deficit));
    }
    Ok(d)
}

/// Voronoi zones of `sites`; zone id equals site index.
pub fn voronoi_discretize(border: &Region, sites: &[Point2]) -> Result<SpatialDiscretization, SpaceError> {
    let cells = voronoi_cells(sites, border)?;
    let parts = cells.into_iter().map(|c| (c, BTreeMap::new())).collect();
    let (d, kept) = SpatialDiscretization::from_parts(border.clone(), parts, NeighborRule::EdgeOnly);
    if let Some(k) = kept.iter().position(Option::is_none) {
        return Err(GeometryError::DegenerateGeometry(format!("Voronoi cell {k} is empty")).into());
    }
    Ok(d)
}

/// Sparse areas of pairwise zone intersections between two discretizations.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    n_cols: usize,
}

impl IntersectionMatrix {
    /// Non-zero entries of row `i1`, ascending in the target id.
    pub fn row(&self, i1: usize) -> &[(usize, f64)] {
        &self.rows[i1]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.rows[i1]
            .binary_search_by_key(&i2, |e| e.0)
            .map_or(0.0, |k| self.rows[i1][k].1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, a)| (i, j, a)))
    }
}

fn same_border(a: &Region, b: &Region) -> bool {
    let (aa, ab) = (a.area(), b.area());
    if (aa - ab).abs() > 1e-6 * aa.max(ab) {
        return false;
    }
    let (ba, bb) = (a.bbox(), b.bbox());
    let tol = 1e-6 * ba.diagonal();
    ba.min.dist(&bb.min) <= tol && ba.max.dist(&bb.max) <= tol
}

pub fn intersection_matrix(
    d1: &SpatialDiscretization,
    d2: &SpatialDiscretization,
) -> Result<IntersectionMatrix, SpaceError> {
    if !same_border(&d1.border, &d2.border) {
        return Err(SpaceError::BorderMismatch);
    }
    let min_area = 1e-12 * d1.border.area();
    let boxes2: Vec<BBox> = d2.zones.iter().map(Zone::bbox).collect();
    let mut order: Vec<usize> = (0..boxes2.len()).collect();
    order.sort_by(|&a, &b| boxes2[a].min.x.total_cmp(&boxes2[b].min.x));
    let starts: Vec<f64> = order.iter().map(|&k| boxes2[k].min.x).collect();
    let rows = d1
        .zones
        .iter()
        .map(|z1| {
            let b1 = z1.bbox();
            let end = starts.partition_point(|&x| x <= b1.max.x);
            let mut row = Vec::new();
            for &k in &order[..end] {
                if !boxes2[k].overlaps(&b1, 0.0) {
                    continue;
                }
                let mut a = 0.0;
                for p in &z1.geometry {
                    for q in &d2.zones[k].geometry {
                        a += polygon_intersection(p, q).iter().map(Polygon::area).sum::<f64>();
                    }
                }
                if a > min_area {
                    row.push((k, a));
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(IntersectionMatrix { rows, n_cols: d2.zones.len() })
}

/// Area-weighted transfer of an extensive attribute from `d1` to `d2`.
pub fn reallocate_attribute(
    d1: &SpatialDiscretization,
    attr: &str,
    d2: &SpatialDiscretization,
    m: &IntersectionMatrix,
) -> Result<Vec<f64>, SpaceError> {
    let mut out = vec![0.0; d2.zones.len()];
    for z in &d1.zones {
        let p = *z
            .attributes
            .get(attr)
            .ok_or_else(|| SpaceError::MissingAttribute { zone: z.id, attr: attr.to_string() })?;
        // clipping noise aside, the pieces of a zone add up to its area; dividing
        // by their sum then conserves mass exactly
        let covered: f64 = m.row(z.id).iter().map(|e| e.1).sum();
        let whole = if (covered - z.area).abs() <= 1e-6 * z.area { covered } else { z.area };
        for &(i2, a) in m.row(z.id) {
            out[i2] += p * a / whole;
        }
    }
    Ok(out)
}

/// Feature collection reading and writing for polygon input.
pub mod geojson {
    use super::*;
    use serde_json::Value;

    /// One input feature: numeric properties and its polygons.
    #[derive(Debug, Clone)]
    pub struct Feature {
        pub properties: BTreeMap<String, f64>,
        pub polygons: Vec<Polygon>,
    }

    fn ring(v: &Value) -> Result<Vec<Point2>, SpaceError> {
        let arr = v.as_array().ok_or_else(|| SpaceError::Input("ring is not an array".into()))?;
        arr.iter()
            .map(|c| {
                let xy = c.as_array().filter(|a| a.len() >= 2);
                let xy = xy.ok_or_else(|| SpaceError::Input("coordinate is not a pair".into()))?;
                match (xy[0].as_f64(), xy[1].as_f64()) {
                    (Some(x), Some(y)) => Ok(Point2::new(x, y)),
                    _ => Err(SpaceError::Input("coordinate is not numeric".into())),
                }
            })
            .collect()
    }

    fn polygon(v: &Value) -> Result<Polygon, SpaceError> {
        let rings = v.as_array().ok_or_else(|| SpaceError::Input("polygon is not an array".into()))?;
        let mut rings = rings.iter().map(ring).collect::<Result<Vec<_>, _>>()?.into_iter();
        let outer = rings.next().ok_or_else(|| SpaceError::Input("polygon without rings".into()))?;
        Ok(Polygon::new(outer, rings.collect())?)
    }

    fn geometry(g: &Value) -> Result<Vec<Polygon>, SpaceError> {
        let coords = &g["coordinates"];
        match g["type"].as_str() {
            Some("Polygon") => Ok(vec![polygon(coords)?]),
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| SpaceError::Input("MultiPolygon coordinates are not an array".into()))?
                .iter()
                .map(polygon)
                .collect(),
            other => Err(SpaceError::Input(format!("unsupported geometry type {other:?}"))),
        }
    }

    /// Parses a feature collection, a single feature, or a bare geometry.
    pub fn parse_features(text: &str) -> Result<Vec<Feature>, SpaceError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| SpaceError::Input(e.to_string()))?;
        let feature = |f: &Value| -> Result<Feature, SpaceError> {
            let properties = f["properties"]
                .as_object()
                .map(|m| m.iter().filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x))).collect())
                .unwrap_or_default();
            Ok(Feature { properties, polygons: geometry(&f["geometry"])? })
        };
        if let Some(fs) = doc.get("features").and_then(Value::as_array) {
            fs.iter().map(feature).collect()
        } else if doc.get("geometry").is_some() {
            Ok(vec![feature(&doc)?])
        } else {
            Ok(vec![Feature { properties: BTreeMap::new(), polygons: geometry(&doc)? }])
        }
    }

    /// Union of all feature polygons as one region.
    pub fn parse_region(text: &str) -> Result<Region, SpaceError> {
        let polys = parse_features(text)?.into_iter().flat_map(|f| f.polygons).collect();
        Region::new(polys).map_err(|_| SpaceError::EmptyRegion)
    }

    fn polygon_json(p: &Polygon) -> Value {
        Value::from(
            p.rings()
                .iter()
                .map(|r| {
                    let mut pts: Vec<Value> = r.iter().map(|q| Value::from(vec![q.x, q.y])).collect();
                    pts.push(Value::from(vec![r[0].x, r[0].y]));
                    Value::from(pts)
                })
                .collect::<Vec<_>>(),
        )
    }

    /// A feature collection with one MultiPolygon feature per zone.
    pub fn zones_to_features(d: &SpatialDiscretization) -> Value {
        let features: Vec<Value> = d
            .zones()
            .iter()
            .map(|z| {
                let mut props = serde_json::Map::new();
                props.insert("zone_id".into(), z.id.into());
                props.insert("area".into(), z.area.into());
                for (k, v) in &z.attributes {
                    props.insert(k.clone(), (*v).into());
                }
                serde_json::json!({
                    "type": "Feature",
                    "properties": props,
                    "geometry": {
                        "type": "MultiPolygon",
                        "coordinates": z.geometry.iter().map(polygon_json).collect::<Vec<_>>(),
                    },
                })
            })
            .collect();
        serde_json::json!({ "type": "FeatureCollection", "features": features })
    }
}
