//! Planar primitives: points, segments, lines, simple polygons, and the
//! handful of numerically careful operations every other stage builds on.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn try_new(x: T, y: T) -> Result<Self> {
        let p = Self { x, y };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::DegenerateInput(format!("non-finite point ({x}, {y})")))
        }
    }

    pub fn from_f64(x: f64, y: f64) -> Self {
        Self::new(T::lit(x), T::lit(y))
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn dist_sq(self, o: Self) -> T {
        (self - o).norm_sq()
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * n.recip())
        } else {
            None
        }
    }

    /// Lexicographic total order on (x, y); NaN-free inputs assumed.
    pub fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.x
            .partial_cmp(&o.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(self.y.partial_cmp(&o.y).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Segment2<T> {
    pub a: Point2<T>,
    pub b: Point2<T>,
}

impl<T: Scalar> Segment2<T> {
    pub fn new(a: Point2<T>, b: Point2<T>) -> Result<Self> {
        if a.dist(b) <= T::eps_len() {
            return Err(Error::DegenerateInput("segment endpoints coincide".into()));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> T {
        self.a.dist(self.b)
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance_to(&self, p: Point2<T>) -> T {
        point_segment_distance(p, self.a, self.b)
    }
}

/// Infinite line with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Line2<T> {
    pub origin: Point2<T>,
    pub direction: Point2<T>,
}

impl<T: Scalar> Line2<T> {
    pub fn new(origin: Point2<T>, direction: Point2<T>) -> Result<Self> {
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::DegenerateInput("zero line direction".into()))?;
        Ok(Self { origin, direction })
    }

    #[inline]
    pub fn point_at(&self, t: T) -> Point2<T> {
        self.origin + self.direction * t
    }

    /// Signed parameter of the orthogonal projection of `p`.
    #[inline]
    pub fn param_of(&self, p: Point2<T>) -> T {
        (p - self.origin).dot(self.direction)
    }

    pub fn distance_to(&self, p: Point2<T>) -> T {
        (p - self.origin).cross(self.direction).abs()
    }
}

/// Simple counter-clockwise polygon with at least three vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(try_from = "RawPolygon<T>", into = "RawPolygon<T>")]
pub struct Polygon2<T: Scalar> {
    vertices: Vec<Point2<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawPolygon<T> {
    vertices: Vec<Point2<T>>,
}

impl<T: Scalar> TryFrom<RawPolygon<T>> for Polygon2<T> {
    type Error = Error;
    fn try_from(raw: RawPolygon<T>) -> Result<Self> {
        Polygon2::new(raw.vertices)
    }
}

impl<T: Scalar> From<Polygon2<T>> for RawPolygon<T> {
    fn from(p: Polygon2<T>) -> Self {
        RawPolygon { vertices: p.vertices }
    }
}

impl<T: Scalar> Polygon2<T> {
    /// Validates and normalizes a vertex ring.
    ///
    /// Consecutive duplicates (within `eps_len`) are dropped and a clockwise
    /// ring is reversed. Fails on fewer than three distinct vertices, zero
    /// area, non-finite coordinates, or self-intersection.
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self> {
        let mut poly = Self::normalized_ring(vertices)?;
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(Error::InvalidPolygon(format!("edges {i} and {j} intersect")));
        }
        poly.vertices.shrink_to_fit();
        Ok(poly)
    }

    fn normalized_ring(vertices: Vec<Point2<T>>) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let eps = T::eps_len();
        let mut ring: Vec<Point2<T>> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if ring.last().is_none_or(|q| q.dist(p) > eps) {
                ring.push(p);
            }
        }
        while ring.len() > 1 && ring[0].dist(*ring.last().unwrap()) <= eps {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 distinct vertices, got {}",
                ring.len()
            )));
        }
        let area = signed_area(&ring);
        let scale = bbox_diag(&ring);
        if area.abs() <= eps * scale {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if area < T::zero() {
            ring.reverse();
        }
        Ok(Self { vertices: ring })
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as (start, end) pairs, closing back to the first vertex.
    pub fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> T {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> T {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// Axis-aligned bounds as (min, max).
    pub fn bounds(&self) -> (Point2<T>, Point2<T>) {
        bounds(&self.vertices).expect("polygon has vertices")
    }

    /// Distance from `p` to the polygon outline (zero on the boundary).
    pub fn distance_to_boundary(&self, p: Point2<T>) -> T {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    /// Mean edge length, used as the vertex spacing of sampled boundaries.
    pub fn mean_edge_length(&self) -> T {
        self.perimeter() / T::from_count(self.len())
    }

    /// Same outline with extra vertices inserted so no edge is longer than
    /// `max_edge`.
    pub fn densified(&self, max_edge: T) -> Self {
        if !(max_edge > T::zero()) {
            return self.clone();
        }
        let mut vertices = Vec::with_capacity(self.len());
        for (a, b) in self.edges() {
            let pieces = (a.dist(b) / max_edge).ceil().to_usize().unwrap_or(1).max(1);
            for k in 0..pieces {
                vertices.push(a.lerp(b, T::from_count(k) / T::from_count(pieces)));
            }
        }
        Self { vertices }
    }

    /// Douglas–Peucker simplification of the ring: every dropped vertex lies
    /// within `tolerance` of the edge that replaces it. Falls back to `self`
    /// when the result would be degenerate or self-intersecting.
    pub fn simplified(&self, tolerance: T) -> Self {
        let n = self.len();
        if !(tolerance > T::zero()) || n <= 3 {
            return self.clone();
        }
        // Split the ring at vertex 0 and the vertex farthest from it.
        let v = &self.vertices;
        let far = (1..n)
            .max_by(|&a, &b| {
                v[a].dist_sq(v[0])
                    .partial_cmp(&v[b].dist_sq(v[0]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(1);
        let mut keep = vec![false; n];
        keep[0] = true;
        keep[far] = true;
        let idx: Vec<usize> = (0..=n).map(|i| i % n).collect();
        let mut stack = vec![(0usize, far), (far, n)];
        while let Some((lo, hi)) = stack.pop() {
            let (a, b) = (v[idx[lo]], v[idx[hi]]);
            let mut worst = (T::zero(), lo);
            for i in lo + 1..hi {
                let d = point_segment_distance(v[idx[i]], a, b);
                if d > worst.0 {
                    worst = (d, i);
                }
            }
            if worst.0 > tolerance {
                keep[idx[worst.1]] = true;
                stack.push((lo, worst.1));
                stack.push((worst.1, hi));
            }
        }
        let ring: Vec<Point2<T>> = (0..n).filter(|&i| keep[i]).map(|i| v[i]).collect();
        Self::new(ring).unwrap_or_else(|_| self.clone())
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                // Adjacent edges share a vertex by construction.
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        // Adjacent edges folding back onto each other.
        for i in 0..n {
            let prev = self.vertices[(i + n - 1) % n];
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let (u, v) = (prev - cur, next - cur);
            if u.cross(v).abs() <= T::epsilon() * u.norm() * v.norm() && u.dot(v) > T::zero() {
                return Some(((i + n - 1) % n, i));
            }
        }
        None
    }
}

pub(crate) fn signed_area<T: Scalar>(ring: &[Point2<T>]) -> T {
    let n = ring.len();
    if n < 3 {
        return T::zero();
    }
    let origin = ring[0];
    let twice: T = (1..n - 1).map(|i| (ring[i] - origin).cross(ring[i + 1] - origin)).sum();
    twice * T::lit(0.5)
}

pub(crate) fn bounds<T: Scalar>(points: &[Point2<T>]) -> Option<(Point2<T>, Point2<T>)> {
    let first = *points.first()?;
    Some(points.iter().fold((first, first), |(lo, hi), p| {
        (
            Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
            Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
        )
    }))
}

fn bbox_diag<T: Scalar>(points: &[Point2<T>]) -> T {
    bounds(points).map_or(T::zero(), |(lo, hi)| lo.dist(hi))
}

/// Orientation of `c` relative to the directed line `a -> b`:
/// positive left, negative right, zero collinear.
#[inline]
pub fn orient<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b - a).cross(c - a)
}

fn on_segment<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching and collinear overlap count).
pub fn segments_intersect<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let zero = T::zero();
    if ((d1 > zero && d2 < zero) || (d1 < zero && d2 > zero)) && ((d3 > zero && d4 < zero) || (d3 < zero && d4 > zero))
    {
        return true;
    }
    (d1 == zero && on_segment(c, d, a))
        || (d2 == zero && on_segment(c, d, b))
        || (d3 == zero && on_segment(a, b, c))
        || (d4 == zero && on_segment(a, b, d))
}

pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == T::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.dist(a + ab * t)
}

/// Principal axis of a point set together with its covariance spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAxis<T> {
    pub line: Line2<T>,
    /// Larger and smaller covariance eigenvalues.
    pub eigenvalues: (T, T),
    /// The covariance was isotropic and the direction fell back to (1, 0).
    pub tie: bool,
}

/// Relative eigenvalue gap below which the covariance counts as isotropic.
const PCA_TIE_REL: f64 = 1e-9;

/// Fits the principal axis of `points`.
///
/// The line passes through the centroid along the eigenvector of the 2x2
/// covariance with the larger eigenvalue. Direction sign is canonical
/// (positive x, or positive y when x is zero). Isotropic covariance yields
/// direction (1, 0) with `tie` set.
pub fn pca_principal_axis<T: Scalar>(points: &[Point2<T>]) -> Result<PrincipalAxis<T>> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "principal axis needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = T::from_count(points.len());
    let centroid = centroid(points).expect("non-empty");
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    let mut spread = T::zero();
    for p in points {
        let d = *p - centroid;
        sxx = sxx + d.x * d.x;
        sxy = sxy + d.x * d.y;
        syy = syy + d.y * d.y;
        spread = spread.max(d.norm());
    }
    if spread <= T::eps_len() {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let (a, b, c) = (sxx / n, sxy / n, syy / n);
    let half_trace = (a + c) * T::lit(0.5);
    let disc = ((a - c) * T::lit(0.5)).hypot(b);
    let (l1, l2) = (half_trace + disc, half_trace - disc);

    let tie = disc <= T::lit(PCA_TIE_REL) * half_trace;
    let direction = if tie {
        Point2::new(T::one(), T::zero())
    } else {
        // Two algebraically equivalent eigenvector forms; pick the better
        // conditioned one.
        let u = Point2::new(l1 - c, b);
        let v = Point2::new(b, l1 - a);
        let raw = if u.norm_sq() >= v.norm_sq() { u } else { v };
        let mut d = raw.normalized().expect("non-zero eigenvector");
        if d.x < T::zero() || (d.x == T::zero() && d.y < T::zero()) {
            d = -d;
        }
        d
    };
    Ok(PrincipalAxis {
        line: Line2 {
            origin: centroid,
            direction,
        },
        eigenvalues: (l1, l2.max(T::zero())),
        tie,
    })
}

/// Principal line of `points`; see [`pca_principal_axis`].
pub fn pca_principal_line<T: Scalar>(points: &[Point2<T>]) -> Result<Line2<T>> {
    pca_principal_axis(points).map(|a| a.line)
}

pub fn centroid<T: Scalar>(points: &[Point2<T>]) -> Option<Point2<T>> {
    if points.is_empty() {
        return None;
    }
    let n = T::from_count(points.len());
    let sum = points.iter().fold(Point2::new(T::zero(), T::zero()), |acc, p| acc + *p);
    Some(sum * n.recip())
}

/// Points where the infinite `line` meets the polygon outline, sorted by
/// line parameter and deduplicated within `eps_len`. Edges collinear with
/// the line contribute both endpoints.
pub fn line_polygon_intersections<T: Scalar>(line: &Line2<T>, poly: &Polygon2<T>) -> Vec<Point2<T>> {
    let eps = T::eps_len();
    let mut hits: Vec<(T, Point2<T>)> = Vec::new();
    for (a, b) in poly.edges() {
        let e = b - a;
        let len = e.norm();
        let denom = line.direction.cross(e);
        if denom.abs() <= T::epsilon() * T::lit(16.0) * len {
            if line.distance_to(a) <= eps {
                hits.push((line.param_of(a), a));
                hits.push((line.param_of(b), b));
            }
            continue;
        }
        let w = a - line.origin;
        let s = w.cross(line.direction) / denom;
        let slack = eps / len;
        if s < -slack || s > T::one() + slack {
            continue;
        }
        let p = a + e * s.max(T::zero()).min(T::one());
        hits.push((line.param_of(p), p));
    }
    hits.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Point2<T>> = Vec::with_capacity(hits.len());
    for (_, p) in hits {
        if out.last().is_none_or(|q| q.dist(p) > eps) {
            out.push(p);
        }
    }
    out
}

/// Crossing-number containment test. Points within `eps_len` of an edge
/// count as inside.
pub fn point_in_polygon_raycast<T: Scalar>(p: Point2<T>, poly: &Polygon2<T>) -> bool {
    let eps = T::eps_len();
    let mut inside = false;
    for (a, b) in poly.edges() {
        if point_segment_distance(p, a, b) <= eps {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Sum of consecutive Euclidean distances; zero for fewer than two points.
pub fn polyline_length<T: Scalar>(points: &[Point2<T>]) -> T {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point at arc length `s` along the polyline, clamped to its ends.
pub fn point_along_polyline<T: Scalar>(points: &[Point2<T>], s: T) -> Option<Point2<T>> {
    let first = *points.first()?;
    if s <= T::zero() {
        return Some(first);
    }
    let mut remaining = s;
    for w in points.windows(2) {
        let seg = w[0].dist(w[1]);
        if remaining <= seg {
            if seg == T::zero() {
                return Some(w[0]);
            }
            return Some(w[0].lerp(w[1], remaining / seg));
        }
        remaining = remaining - seg;
    }
    points.last().copied()
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, collinear
/// points dropped.
pub fn convex_hull<T: Scalar>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts: Vec<Point2<T>> = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup_by(|a, b| a.dist(*b) <= T::eps_len());
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2<T>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<T>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
