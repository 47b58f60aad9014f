//! Exact contact-state classification between convex polygonal blocks.
//!
//! This is the ground-truth oracle the learned classifiers are trained
//! against. A pair of blocks is in one of four states:
//!
//! | code | state            |
//! |------|------------------|
//! | 0    | no contact       |
//! | 1    | vertex to vertex |
//! | 2    | vertex to edge   |
//! | 3    | edge to edge     |
//!
//! Features closer than the contact tolerance count as touching. When
//! several feature pairs touch at once the most specific description wins
//! (edge-edge over vertex-edge over vertex-vertex).

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default contact distance threshold in metres.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Maximum angle (radians) between two edges still considered antiparallel.
pub const PARALLEL_TOL: f64 = 1e-6;

const MIN_VERTEX_SPACING: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a block needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex coordinates must be finite")]
    NonFinite,
    #[error("consecutive vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("vertices do not form a strictly convex simple polygon")]
    NotConvex,
    #[error("contact tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("blocks {a} and {b} interpenetrate by {depth:e} m (tolerance {tol:e} m)")]
    Overlap { a: i64, b: i64, depth: f64, tol: f64 },
    #[error("invalid contact-state code {0}")]
    InvalidCode(i64),
}

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation about the origin.
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn lex_lt(self, other: Point) -> bool {
        self.x < other.x || (self.x == other.x && self.y < other.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point::new(x, y)
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        <[f64; 2]>::deserialize(d).map(Point::from)
    }
}

/// Contact state between two blocks, coded 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum ContactState {
    None = 0,
    VertexVertex = 1,
    VertexEdge = 2,
    EdgeEdge = 3,
}

impl ContactState {
    pub const ALL: [ContactState; 4] =
        [ContactState::None, ContactState::VertexVertex, ContactState::VertexEdge, ContactState::EdgeEdge];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: i64) -> Result<Self, GeometryError> {
        match code {
            0 => Ok(ContactState::None),
            1 => Ok(ContactState::VertexVertex),
            2 => Ok(ContactState::VertexEdge),
            3 => Ok(ContactState::EdgeEdge),
            other => Err(GeometryError::InvalidCode(other)),
        }
    }

    /// Round a real-valued regression output to the nearest code, clamping
    /// into `0..=3`.
    pub fn from_real(value: f64) -> Self {
        let code = if value.is_nan() { 0.0 } else { value.round().clamp(0.0, 3.0) };
        Self::ALL[code as usize]
    }
}

impl fmt::Display for ContactState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl TryFrom<i64> for ContactState {
    type Error = GeometryError;
    fn try_from(code: i64) -> Result<Self, Self::Error> {
        Self::from_code(code)
    }
}

impl Serialize for ContactState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for ContactState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = i64::deserialize(d)?;
        Self::from_code(code).map_err(serde::de::Error::custom)
    }
}

/// A rigid convex polygonal block.
///
/// Vertices are stored counter-clockwise, starting at the lexicographically
/// smallest vertex (lowest x, then lowest y). Two blocks with the same
/// vertex set therefore always store the same sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    id: i64,
    vertices: Vec<Point>,
}

#[derive(Deserialize)]
struct RawBlock {
    id: i64,
    vertices: Vec<Point>,
}

impl<'de> Deserialize<'de> for Block {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawBlock::deserialize(d)?;
        Block::new(raw.id, raw.vertices).map_err(serde::de::Error::custom)
    }
}

impl Block {
    pub fn new(id: i64, vertices: impl Into<Vec<Point>>) -> Result<Self, GeometryError> {
        let mut vertices: Vec<Point> = vertices.into();
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i].distance(vertices[j]) <= MIN_VERTEX_SPACING {
                return Err(GeometryError::DuplicateVertex(i, j));
            }
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        // Strict convexity plus a total turn of exactly one revolution rules
        // out collinear runs and star-shaped windings.
        let mut turning = 0.0;
        for i in 0..n {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            let cross = e0.cross(e1);
            if cross <= 1e-12 * e0.norm() * e1.norm() {
                return Err(GeometryError::NotConvex);
            }
            turning += cross.atan2(e0.dot(e1));
        }
        if (turning - TAU).abs() > 1e-6 {
            return Err(GeometryError::NotConvex);
        }
        let start = (1..n).fold(0, |best, i| if vertices[i].lex_lt(vertices[best]) { i } else { best });
        vertices.rotate_left(start);
        Ok(Self { id, vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(id: i64, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Block::new(id, vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)])
    }

    pub fn id(&self) -> i64 {
        self.id
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges `(start, end)` in counter-clockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }

    /// Centre of gravity of the polygon (area centroid).
    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let origin = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i] - origin;
            let q = self.vertices[(i + 1) % n] - origin;
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        origin + Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    pub fn translated(&self, offset: Point) -> Block {
        Block { id: self.id, vertices: self.vertices.iter().map(|&p| p + offset).collect() }
    }

    /// Rotate about the origin by `angle` radians, then translate.
    pub fn transformed(&self, angle: f64, offset: Point) -> Block {
        let moved: Vec<Point> = self.vertices.iter().map(|p| p.rotated(angle) + offset).collect();
        Block::new(self.id, moved).expect("rigid motion preserves convexity")
    }

    pub fn with_id(mut self, id: i64) -> Block {
        self.id = id;
        self
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        self.vertices.iter().fold(
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
        )
    }

    /// Whether `p` lies inside or on the boundary.
    pub fn contains(&self, p: Point) -> bool {
        self.edges().all(|(s, e)| (e - s).cross(p - s) >= 0.0)
    }

    /// Distance from `p` to the closed polygon (zero inside).
    pub fn distance_to_point(&self, p: Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges().map(|(s, e)| point_segment_distance(p, s, e)).fold(f64::INFINITY, f64::min)
    }
}

fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let origin = vertices[0];
    let twice: f64 = (0..n).map(|i| (vertices[i] - origin).cross(vertices[(i + 1) % n] - origin)).sum();
    0.5 * twice
}

/// Unsigned shoelace area.
pub fn polygon_area(block: &Block) -> f64 {
    signed_area(block.vertices()).abs()
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn project(block: &Block, axis: Point) -> (f64, f64) {
    block
        .vertices()
        .iter()
        .map(|p| p.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Separating-axis penetration depth: the smallest projection overlap over
/// all edge normals of both blocks. Zero when the blocks are disjoint or
/// merely touch.
pub fn penetration_depth(a: &Block, b: &Block) -> f64 {
    let mut depth = f64::INFINITY;
    for block in [a, b] {
        for (s, e) in block.edges() {
            let d = e - s;
            let axis = Point::new(d.y, -d.x) * (1.0 / d.norm());
            let (a_lo, a_hi) = project(a, axis);
            let (b_lo, b_hi) = project(b, axis);
            let overlap = a_hi.min(b_hi) - a_lo.max(b_lo);
            if overlap <= 0.0 {
                return 0.0;
            }
            depth = depth.min(overlap);
        }
    }
    depth
}

fn separated(a: &Block, b: &Block) -> bool {
    [a, b].iter().any(|block| {
        block.edges().any(|(s, e)| {
            let d = e - s;
            let axis = Point::new(d.y, -d.x);
            let (a_lo, a_hi) = project(a, axis);
            let (b_lo, b_hi) = project(b, axis);
            a_hi < b_lo || b_hi < a_lo
        })
    })
}

/// Euclidean distance between the two closed point sets; zero when they
/// touch or overlap.
pub fn min_separation(a: &Block, b: &Block) -> f64 {
    if !separated(a, b) {
        return 0.0;
    }
    let one_way = |p: &Block, q: &Block| {
        p.vertices()
            .iter()
            .flat_map(|&v| q.edges().map(move |(s, e)| point_segment_distance(v, s, e)))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

fn edge_edge_touch(a: &Block, b: &Block, tol: f64) -> bool {
    let max_sin = PARALLEL_TOL.sin();
    a.edges().any(|(p, q)| {
        let len_a = p.distance(q);
        let ua = (q - p) * (1.0 / len_a);
        b.edges().any(|(r, s)| {
            let ub = (s - r) * (1.0 / r.distance(s));
            if ua.dot(ub) >= 0.0 || ua.cross(ub).abs() > max_sin {
                return false;
            }
            // perpendicular offsets of b's edge from a's edge line
            if ua.cross(r - p).abs() > tol || ua.cross(s - p).abs() > tol {
                return false;
            }
            let (t0, t1) = {
                let tr = (r - p).dot(ua);
                let ts = (s - p).dot(ua);
                (tr.min(ts), tr.max(ts))
            };
            let overlap = t1.min(len_a) - t0.max(0.0);
            overlap > tol
        })
    })
}

fn vertex_edge_touch(vertices_of: &Block, edges_of: &Block, tol: f64) -> bool {
    vertices_of.vertices().iter().any(|&v| {
        edges_of.edges().any(|(s, e)| {
            let d = e - s;
            let len = d.norm();
            let along = (v - s).dot(d) / len;
            along > tol && along < len - tol && (d.cross(v - s) / len).abs() <= tol
        })
    })
}

fn vertex_vertex_touch(a: &Block, b: &Block, tol: f64) -> bool {
    a.vertices().iter().any(|&p| b.vertices().iter().any(|&q| p.distance(q) <= tol))
}

/// Classify the contact between two blocks.
///
/// Fails with [`GeometryError::Overlap`] when the interiors interpenetrate
/// deeper than `tol`.
pub fn classify_contact(a: &Block, b: &Block, tol: f64) -> Result<ContactState, GeometryError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(GeometryError::BadTolerance(tol));
    }
    let depth = penetration_depth(a, b);
    if depth > tol {
        return Err(GeometryError::Overlap { a: a.id(), b: b.id(), depth, tol });
    }
    if min_separation(a, b) > tol {
        return Ok(ContactState::None);
    }
    if edge_edge_touch(a, b, tol) {
        return Ok(ContactState::EdgeEdge);
    }
    if vertex_edge_touch(a, b, tol) || vertex_edge_touch(b, a, tol) {
        return Ok(ContactState::VertexEdge);
    }
    if vertex_vertex_touch(a, b, tol) {
        return Ok(ContactState::VertexVertex);
    }
    // Shallow crossing of two edges within tolerance.
    Ok(ContactState::VertexEdge)
}
