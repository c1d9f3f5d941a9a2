//! Planar polygon primitives.
//!
//! Polygons are closed sets: boundary points belong to the polygon. Outer
//! rings are stored counter-clockwise and holes clockwise, without a repeated
//! closing vertex. Predicates use an absolute tolerance of [`GEOM_TOL`] times
//! the bounding-box diagonal of the inputs involved.
//!
//! Intersections take the cheapest exact route available: convex against
//! convex is clipped directly, a convex polygon lying inside the other operand
//! is returned unchanged, and everything else (concave parts, holes) goes
//! through a general boolean overlay.

use geo::BooleanOps;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative geometric tolerance, applied after scaling by the bounding-box diagonal.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("duplicate Voronoi sites {0} and {1}")]
    DuplicateSites(usize, usize),
    #[error("Voronoi site {0} lies outside the clip region")]
    SiteOutsideClip(usize),
    #[error("region has zero area")]
    EmptyRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point2,
    pub max: Point2,
}

impl BBox {
    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point2>) -> Option<BBox> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        let mut b = BBox { min: first, max: first };
        for p in it {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            min: Point2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(&self.max)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.min.x + self.max.x), 0.5 * (self.min.y + self.max.y))
    }

    pub fn overlaps(&self, o: &BBox, tol: f64) -> bool {
        self.min.x <= o.max.x + tol
            && o.min.x <= self.max.x + tol
            && self.min.y <= o.max.y + tol
            && o.min.y <= self.max.y + tol
    }

    pub fn contains(&self, p: &Point2, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }
}

/// Absolute tolerance for predicates on geometry spanning `b`.
pub fn tolerance_for(b: &BBox) -> f64 {
    GEOM_TOL * b.diagonal().max(f64::MIN_POSITIVE)
}

fn signed_ring_area(ring: &[Point2]) -> f64 {
    // Shifted shoelace: subtracting the first vertex keeps cancellation small.
    let o = ring[0];
    let mut s = 0.0;
    for k in 1..ring.len() - 1 {
        s += cross(o, ring[k], ring[k + 1]);
    }
    0.5 * s
}

fn clean_ring(ring: &[Point2], tol: f64) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(ring.len());
    for &p in ring {
        if out.last().map_or(true, |q| q.dist(&p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

/// A polygon with one outer ring and zero or more holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct Polygon {
    rings: Vec<Vec<Point2>>,
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for Polygon {
    type Error = GeometryError;

    fn try_from(rings: Vec<Vec<[f64; 2]>>) -> Result<Self, Self::Error> {
        let mut rings = rings
            .into_iter()
            .map(|r| r.into_iter().map(|[x, y]| Point2::new(x, y)).collect::<Vec<_>>());
        let outer = rings
            .next()
            .ok_or_else(|| GeometryError::DegenerateGeometry("polygon without rings".into()))?;
        Polygon::new(outer, rings.collect())
    }
}

impl From<Polygon> for Vec<Vec<[f64; 2]>> {
    fn from(p: Polygon) -> Self {
        p.rings
            .into_iter()
            .map(|r| r.into_iter().map(|q| [q.x, q.y]).collect())
            .collect()
    }
}

impl Polygon {
    /// Builds a polygon, dropping a repeated closing vertex and fixing ring orientation.
    pub fn new(outer: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self, GeometryError> {
        let mut rings = Vec::with_capacity(1 + holes.len());
        rings.push(outer);
        rings.extend(holes);
        if rings.iter().flatten().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let bbox = BBox::of_points(rings.iter().flatten())
            .ok_or_else(|| GeometryError::DegenerateGeometry("empty ring".into()))?;
        let tol = tolerance_for(&bbox);
        let mut cleaned = Vec::with_capacity(rings.len());
        for (k, ring) in rings.iter().enumerate() {
            let mut r = clean_ring(ring, tol);
            if r.len() < 3 {
                return Err(GeometryError::DegenerateGeometry(format!(
                    "ring {k} has fewer than 3 distinct vertices"
                )));
            }
            let a = signed_ring_area(&r);
            if a.abs() <= tol * bbox.diagonal() {
                return Err(GeometryError::DegenerateGeometry(format!("ring {k} has zero area")));
            }
            // outer ccw, holes cw
            if (k == 0) != (a > 0.0) {
                r.reverse();
            }
            cleaned.push(r);
        }
        Ok(Polygon { rings: cleaned })
    }

    pub fn from_coords(outer: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Polygon::new(outer.iter().map(|&p| p.into()).collect(), Vec::new())
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Polygon::from_coords(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    pub fn outer(&self) -> &[Point2] {
        &self.rings[0]
    }

    pub fn holes(&self) -> &[Vec<Point2>] {
        &self.rings[1..]
    }

    pub fn rings(&self) -> &[Vec<Point2>] {
        &self.rings
    }

    pub fn area(&self) -> f64 {
        self.rings.iter().map(|r| signed_ring_area(r)).sum::<f64>().max(0.0)
    }

    pub fn centroid(&self) -> Point2 {
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        let o = self.rings[0][0];
        for ring in &self.rings {
            let n = ring.len();
            for k in 0..n {
                let p = ring[k].sub(o);
                let q = ring[(k + 1) % n].sub(o);
                let c = p.x * q.y - q.x * p.y;
                a += c;
                cx += (p.x + q.x) * c;
                cy += (p.y + q.y) * c;
            }
        }
        Point2::new(o.x + cx / (3.0 * a), o.y + cy / (3.0 * a))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(self.rings[0].iter()).expect("non-empty ring")
    }

    pub fn is_convex(&self) -> bool {
        if self.rings.len() > 1 {
            return false;
        }
        let r = &self.rings[0];
        let tol = tolerance_for(&self.bbox());
        let n = r.len();
        (0..n).all(|k| {
            let (a, b, c) = (r[k], r[(k + 1) % n], r[(k + 2) % n]);
            // cross normalised by edge length gives a distance
            cross(a, b, c) >= -tol * a.dist(&b).max(b.dist(&c))
        })
    }

    /// Closed containment: points on any ring boundary count as inside.
    pub fn contains(&self, p: &Point2) -> bool {
        self.contains_tol(p, tolerance_for(&self.bbox()))
    }

    /// Closed containment with an explicit absolute tolerance.
    pub fn contains_tol(&self, p: &Point2, tol: f64) -> bool {
        if !self.bbox().contains(p, tol) {
            return false;
        }
        if self.rings.iter().any(|r| on_ring_boundary(r, p, tol)) {
            return true;
        }
        crossing_inside(&self.rings[0], p) && !self.rings[1..].iter().any(|h| crossing_inside(h, p))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.rings.iter().flat_map(|r| {
            let n = r.len();
            (0..n).map(move |k| (r[k], r[(k + 1) % n]))
        })
    }

    /// O(n²) check that no two non-adjacent edges meet.
    pub fn is_simple(&self) -> bool {
        let tol = tolerance_for(&self.bbox());
        let edges: Vec<_> = self.edges().collect();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                let adjacent = a.dist(&d) <= tol || b.dist(&c) <= tol;
                if adjacent {
                    continue;
                }
                if segment_distance(a, b, c, d) <= tol {
                    return false;
                }
            }
        }
        true
    }

    fn to_geo(&self) -> geo::Polygon<f64> {
        let ring = |r: &Vec<Point2>| {
            geo::LineString::from(r.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())
        };
        geo::Polygon::new(ring(&self.rings[0]), self.rings[1..].iter().map(ring).collect())
    }

    fn from_geo(p: &geo::Polygon<f64>) -> Result<Self, GeometryError> {
        let ring = |l: &geo::LineString<f64>| l.0.iter().map(|c| Point2::new(c.x, c.y)).collect();
        Polygon::new(ring(p.exterior()), p.interiors().iter().map(ring).collect())
    }
}

fn point_segment_distance(p: &Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.dist(&a);
    }
    let s = ((ap.x * ab.x + ap.y * ab.y) / len2).clamp(0.0, 1.0);
    p.dist(&Point2::new(a.x + s * ab.x, a.y + s * ab.y))
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(&a, c, d)
        .min(point_segment_distance(&b, c, d))
        .min(point_segment_distance(&c, a, b))
        .min(point_segment_distance(&d, a, b))
}

fn on_ring_boundary(ring: &[Point2], p: &Point2, tol: f64) -> bool {
    let n = ring.len();
    (0..n).any(|k| point_segment_distance(p, ring[k], ring[(k + 1) % n]) <= tol)
}

fn crossing_inside(ring: &[Point2], p: &Point2) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// A possibly multi-part region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    polygons: Vec<Polygon>,
}

impl Region {
    pub fn new(polygons: Vec<Polygon>) -> Result<Self, GeometryError> {
        let r = Region { polygons };
        if r.polygons.is_empty() || r.area() <= 0.0 {
            return Err(GeometryError::EmptyRegion);
        }
        Ok(r)
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(Polygon::area).sum()
    }

    pub fn bbox(&self) -> BBox {
        self.polygons
            .iter()
            .map(Polygon::bbox)
            .reduce(|a, b| a.union(&b))
            .expect("region has at least one polygon")
    }

    pub fn centroid(&self) -> Point2 {
        parts_centroid(&self.polygons)
    }

    pub fn contains(&self, p: &Point2) -> bool {
        point_in_region(p, self)
    }
}

impl From<Polygon> for Region {
    fn from(p: Polygon) -> Self {
        Region { polygons: vec![p] }
    }
}

/// Area-weighted centroid of a set of interior-disjoint polygons.
pub fn parts_centroid(parts: &[Polygon]) -> Point2 {
    let (mut a, mut x, mut y) = (0.0, 0.0, 0.0);
    for p in parts {
        let w = p.area();
        let c = p.centroid();
        a += w;
        x += w * c.x;
        y += w * c.y;
    }
    Point2::new(x / a, y / a)
}

pub fn polygon_area(p: &Polygon) -> f64 {
    p.area()
}

pub fn point_in_region(pt: &Point2, r: &Region) -> bool {
    let tol = tolerance_for(&r.bbox());
    r.polygons.iter().any(|p| p.contains_tol(pt, tol))
}

/// Clip a convex polygon by the half-plane to the left of the directed line `a → b`.
fn clip_halfplane(poly: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let side = |p: Point2| cross(a, b, p);
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let s = sp / (sp - sq);
            out.push(Point2::new(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)));
        }
    }
    out
}

fn ring_to_polygon(ring: Vec<Point2>, min_area: f64) -> Option<Polygon> {
    if ring.len() < 3 || signed_ring_area(&ring).abs() <= min_area {
        return None;
    }
    Polygon::new(ring, Vec::new()).ok()
}

fn convex_intersection(a: &Polygon, b: &Polygon, min_area: f64) -> Vec<Polygon> {
    let mut ring = a.outer().to_vec();
    let clip = b.outer();
    let n = clip.len();
    for k in 0..n {
        if ring.is_empty() {
            break;
        }
        ring = clip_halfplane(&ring, clip[k], clip[(k + 1) % n]);
    }
    ring_to_polygon(ring, min_area).into_iter().collect()
}

/// Parameter interval of segment `p → q` inside a convex ccw polygon (Cyrus–Beck).
fn clip_segment_convex(p: Point2, q: Point2, poly: &[Point2]) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let n = poly.len();
    let d = q.sub(p);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let e = b.sub(a);
        // inside means cross(a,b,x) >= 0
        let num = e.x * (p.y - a.y) - e.y * (p.x - a.x);
        let den = e.x * d.y - e.y * d.x;
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// True when convex `inner` is contained in the closed polygon `outer`.
fn convex_within(inner: &Polygon, outer: &Polygon, tol: f64) -> bool {
    if !inner.outer().iter().all(|p| outer.contains_tol(p, tol)) {
        return false;
    }
    let ring = inner.outer();
    for (p, q) in outer.edges() {
        let Some((t0, t1)) = clip_segment_convex(p, q, ring) else {
            continue;
        };
        let len = p.dist(&q) * (t1 - t0);
        if len <= tol {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let m = Point2::new(p.x + tm * (q.x - p.x), p.y + tm * (q.y - p.y));
        if !on_ring_boundary(ring, &m, tol) {
            return false;
        }
    }
    // no boundary crosses the interior, so one interior point decides; corners
    // alone cannot tell a notch whose walls touch every corner
    outer.contains(&inner.centroid())
}

/// Intersection of two polygons as a list of interior-disjoint polygons.
pub fn polygon_intersection(a: &Polygon, b: &Polygon) -> Vec<Polygon> {
    let (ba, bb) = (a.bbox(), b.bbox());
    let tol = tolerance_for(&ba.union(&bb));
    if !ba.overlaps(&bb, 0.0) {
        return Vec::new();
    }
    let min_area = tol * tol;
    let (ca, cb) = (a.is_convex(), b.is_convex());
    if ca && cb {
        return convex_intersection(a, b, min_area);
    }
    if ca && convex_within(a, b, tol) {
        return vec![a.clone()];
    }
    if cb && convex_within(b, a, tol) {
        return vec![b.clone()];
    }
    let out: geo::MultiPolygon<f64> = a.to_geo().intersection(&b.to_geo());
    out.0
        .iter()
        .filter_map(|p| Polygon::from_geo(p).ok())
        .filter(|p| p.area() > min_area)
        .collect()
}

/// Intersection of a region with a polygon.
pub fn region_intersection(r: &Region, p: &Polygon) -> Vec<Polygon> {
    r.polygons.iter().flat_map(|q| polygon_intersection(p, q)).collect()
}

/// Convex hull by Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<Polygon, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    if points.len() < 3 {
        return Err(GeometryError::DegenerateGeometry("fewer than 3 points".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    let tol = tolerance_for(&BBox::of_points(pts.iter()).unwrap());
    let keep = |h: &Vec<Point2>, p: Point2| {
        let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
        cross(a, b, p) > tol * a.dist(&p)
    };
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && !keep(&lower, p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && !keep(&upper, p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(GeometryError::DegenerateGeometry("points are collinear".into()));
    }
    Polygon::new(lower, Vec::new())
}

/// Voronoi cells of `sites`, each clipped to `clip`.
///
/// Cell `k` is the intersection of the half-planes closer to site `k` than
/// to every other site. A cell may come back in several parts when the clip
/// region is concave or multi-part.
pub fn voronoi_cells(sites: &[Point2], clip: &Region) -> Result<Vec<Vec<Polygon>>, GeometryError> {
    if sites.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    if sites.len() < 2 {
        return Err(GeometryError::DegenerateGeometry("need at least 2 sites".into()));
    }
    let bbox = clip.bbox();
    let tol = tolerance_for(&bbox);
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if sites[i].dist(&sites[j]) <= tol {
                return Err(GeometryError::DuplicateSites(i, j));
            }
        }
        if !point_in_region(&sites[i], clip) {
            return Err(GeometryError::SiteOutsideClip(i));
        }
    }
    let pad = bbox.diagonal();
    let frame = vec![
        Point2::new(bbox.min.x - pad, bbox.min.y - pad),
        Point2::new(bbox.max.x + pad, bbox.min.y - pad),
        Point2::new(bbox.max.x + pad, bbox.max.y + pad),
        Point2::new(bbox.min.x - pad, bbox.max.y + pad),
    ];
    let mut cells = Vec::with_capacity(sites.len());
    for (k, s) in sites.iter().enumerate() {
        let mut ring = frame.clone();
        for (j, o) in sites.iter().enumerate() {
            if j == k || ring.is_empty() {
                continue;
            }
            // bisector line directed so that site k is on its left
            let m = Point2::new(0.5 * (s.x + o.x), 0.5 * (s.y + o.y));
            let d = o.sub(*s);
            let a = m;
            let b = Point2::new(m.x - d.y, m.y + d.x);
            ring = clip_halfplane(&ring, a, b);
        }
        let cell = ring_to_polygon(ring, tol * tol)
            .ok_or_else(|| GeometryError::DegenerateGeometry(format!("empty cell for site {k}")))?;
        cells.push(region_intersection(clip, &cell));
    }
    Ok(cells)
}

/// How two sets of polygons touch along their boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Contact {
    None,
    Vertex,
    Edge,
}

/// Strongest boundary contact between two polygon sets.
pub fn boundary_contact(a: &[Polygon], b: &[Polygon], tol: f64) -> Contact {
    let mut best = Contact::None;
    for pa in a {
        for pb in b {
            if !pa.bbox().overlaps(&pb.bbox(), tol) {
                continue;
            }
            for (p, q) in pa.edges() {
                for (r, s) in pb.edges() {
                    let eb = BBox::of_points([p, q].iter()).unwrap();
                    let fb = BBox::of_points([r, s].iter()).unwrap();
                    if !eb.overlaps(&fb, tol) {
                        continue;
                    }
                    if segment_distance(p, q, r, s) > tol {
                        continue;
                    }
                    if collinear_overlap(p, q, r, s, tol) > tol {
                        return Contact::Edge;
                    }
                    best = Contact::Vertex;
                }
            }
        }
    }
    best
}

fn collinear_overlap(p: Point2, q: Point2, r: Point2, s: Point2, tol: f64) -> f64 {
    let len = p.dist(&q);
    if len == 0.0 {
        return 0.0;
    }
    let line_dist = |x: Point2| cross(p, q, x).abs() / len;
    if line_dist(r) > tol || line_dist(s) > tol {
        return 0.0;
    }
    let dir = Point2::new((q.x - p.x) / len, (q.y - p.y) / len);
    let proj = |x: Point2| (x.x - p.x) * dir.x + (x.y - p.y) * dir.y;
    let (r0, r1) = {
        let (u, v) = (proj(r), proj(s));
        (u.min(v), u.max(v))
    };
    (len.min(r1) - 0.0f64.max(r0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::rect(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    fn area_of(ps: &[Polygon]) -> f64 {
        ps.iter().map(Polygon::area).sum()
    }

    #[test]
    fn areas() {
        assert_eq!(unit_square().area(), 1.0);
        let holed = Polygon::new(
            unit_square().outer().to_vec(),
            vec![vec![
                Point2::new(0.25, 0.25),
                Point2::new(0.75, 0.25),
                Point2::new(0.75, 0.75),
                Point2::new(0.25, 0.75),
            ]],
        )
        .unwrap();
        assert!((holed.area() - 0.75).abs() < 1e-15);
        let tri = Polygon::from_coords(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]).unwrap();
        assert!((tri.area() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn orientation_is_normalised() {
        let cw = Polygon::from_coords(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0)])
            .unwrap();
        assert_eq!(cw.outer().len(), 4);
        assert!(signed_ring_area(cw.outer()) > 0.0);
    }

    #[test]
    fn degenerate_rings_rejected() {
        let e = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(e, Err(GeometryError::DegenerateGeometry(_))));
        let flat = Polygon::from_coords(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert!(matches!(flat, Err(GeometryError::DegenerateGeometry(_))));
        let nan = Polygon::from_coords(&[(0.0, 0.0), (f64::NAN, 0.0), (2.0, 1.0)]);
        assert_eq!(nan, Err(GeometryError::NonFinite));
    }

    #[test]
    fn containment() {
        let r = Region::from(unit_square());
        assert!(point_in_region(&Point2::new(0.5, 0.5), &r));
        assert!(!point_in_region(&Point2::new(2.0, 2.0), &r));
        assert!(point_in_region(&Point2::new(1.0, 0.5), &r));
        assert!(point_in_region(&Point2::new(0.0, 0.0), &r));
    }

    #[test]
    fn hole_boundary_is_inside_hole_interior_is_not() {
        let holed = Polygon::new(
            Polygon::rect(0.0, 0.0, 4.0, 4.0).unwrap().outer().to_vec(),
            vec![Polygon::rect(1.0, 1.0, 3.0, 3.0).unwrap().outer().to_vec()],
        )
        .unwrap();
        assert!(holed.contains(&Point2::new(1.0, 2.0)));
        assert!(!holed.contains(&Point2::new(2.0, 2.0)));
        assert!(holed.contains(&Point2::new(0.5, 2.0)));
    }

    #[test]
    fn overlapping_squares() {
        let a = Polygon::rect(0.0, 0.0, 2.0, 2.0).unwrap();
        let b = Polygon::rect(1.0, 1.0, 3.0, 3.0).unwrap();
        let r = polygon_intersection(&a, &b);
        assert_eq!(r.len(), 1);
        assert!((r[0].area() - 1.0).abs() < 1e-12);
        let far = Polygon::rect(5.0, 5.0, 6.0, 6.0).unwrap();
        assert!(polygon_intersection(&a, &far).is_empty());
        // touching along an edge only
        let side = Polygon::rect(2.0, 0.0, 3.0, 2.0).unwrap();
        assert!(area_of(&polygon_intersection(&a, &side)) < 1e-12);
    }

    #[test]
    fn concave_against_convex_uses_general_overlay() {
        // U shape; a bar across the arms yields two pieces
        let u = Polygon::from_coords(&[
            (0.0, 0.0),
            (3.0, 0.0),
            (3.0, 3.0),
            (2.0, 3.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 3.0),
            (0.0, 3.0),
        ])
        .unwrap();
        let bar = Polygon::rect(-1.0, 2.0, 4.0, 2.5).unwrap();
        let r = polygon_intersection(&u, &bar);
        assert_eq!(r.len(), 2);
        assert!((area_of(&r) - 1.0).abs() < 1e-9);
        let r2 = polygon_intersection(&bar, &u);
        assert!((area_of(&r2) - area_of(&r)).abs() < 1e-9);
    }

    #[test]
    fn convex_cell_on_concave_diagonal_edge_is_not_contained() {
        // the hole's boundary runs along the square's diagonal and touches
        // all four square corners only at the closure
        let holed = Polygon::new(
            Polygon::rect(-1.0, -1.0, 3.0, 3.0).unwrap().outer().to_vec(),
            vec![vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)]],
        )
        .unwrap();
        let sq = unit_square();
        assert!(sq.outer().iter().all(|p| holed.contains(p)));
        let got = area_of(&polygon_intersection(&sq, &holed));
        assert!((got - 0.5).abs() < 1e-9, "{got}");
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts: Vec<Point2> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5), (0.5, 0.0)]
            .iter()
            .map(|&p| p.into())
            .collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.outer().len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-15);
        let tri = convex_hull(&pts[..3]).unwrap();
        assert!((tri.area() - 0.5).abs() < 1e-15);
        let line: Vec<Point2> = (0..5).map(|k| Point2::new(k as f64, 2.0 * k as f64)).collect();
        assert!(matches!(convex_hull(&line), Err(GeometryError::DegenerateGeometry(_))));
    }

    #[test]
    fn voronoi_two_and_four_sites() {
        let clip = Region::from(Polygon::rect(0.0, 0.0, 10.0, 10.0).unwrap());
        let cells = voronoi_cells(&[Point2::new(2.0, 5.0), Point2::new(8.0, 5.0)], &clip).unwrap();
        for c in &cells {
            assert!((area_of(c) - 50.0).abs() < 1e-9);
        }
        assert!(cells[0][0].outer().iter().all(|p| p.x <= 5.0 + 1e-12));
        let quads = [(2.5, 2.5), (7.5, 2.5), (2.5, 7.5), (7.5, 7.5)].map(Point2::from);
        let cells = voronoi_cells(&quads, &clip).unwrap();
        for c in &cells {
            assert!((area_of(c) - 25.0).abs() < 1e-9);
        }
    }

    #[test]
    fn voronoi_errors() {
        let clip = Region::from(Polygon::rect(0.0, 0.0, 10.0, 10.0).unwrap());
        let dup = [Point2::new(1.0, 1.0), Point2::new(3.0, 3.0), Point2::new(1.0, 1.0)];
        assert_eq!(voronoi_cells(&dup, &clip), Err(GeometryError::DuplicateSites(0, 2)));
        let out = [Point2::new(1.0, 1.0), Point2::new(30.0, 3.0)];
        assert_eq!(voronoi_cells(&out, &clip), Err(GeometryError::SiteOutsideClip(1)));
    }

    #[test]
    fn contacts() {
        let a = [unit_square()];
        let right = [Polygon::rect(1.0, 0.0, 2.0, 1.0).unwrap()];
        let diag = [Polygon::rect(1.0, 1.0, 2.0, 2.0).unwrap()];
        let far = [Polygon::rect(3.0, 3.0, 4.0, 4.0).unwrap()];
        let tol = 1e-9;
        assert_eq!(boundary_contact(&a, &right, tol), Contact::Edge);
        assert_eq!(boundary_contact(&a, &diag, tol), Contact::Vertex);
        assert_eq!(boundary_contact(&a, &far, tol), Contact::None);
    }

    #[test]
    fn serde_roundtrip_keeps_orientation() {
        let p = Polygon::from_coords(&[(0.0, 0.0), (0.0, 2.0), (3.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: Polygon = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
