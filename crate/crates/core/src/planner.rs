//! Footprint collision checking against cluster boundaries, and an RRT that
//! tracks one route edge at a time.
//!
//! A point is inside a boundary when it is closer to the cluster center
//! than every one of the `m_p` boundary vertices nearest to it. A pose is
//! free when every footprint sample is inside at least one of the `n`
//! boundaries whose centers are nearest to that sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{estimate_boundary, Boundary};
use crate::error::{Error, Result};
use crate::geometry::{centroid, pca_principal_axis, Point2};
use crate::graph::StructureGraph;
use crate::scalar::Scalar;
use crate::spatial::GridIndex;
use crate::vocpp::InspectionRoute;

/// Wraps an angle into (−π, π].
pub fn normalize_angle<T: Scalar>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut a = theta % two_pi;
    if a <= -T::PI() {
        a = a + two_pi;
    } else if a > T::PI() {
        a = a - two_pi;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RobotConfig<T> {
    pub x: T,
    pub y: T,
    /// Heading in (−π, π].
    pub theta: T,
}

impl<T: Scalar> RobotConfig<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Configuration-space distance; heading differences are weighted by
    /// `turn_radius` so they are measured as arc length.
    pub fn distance(&self, o: &Self, turn_radius: T) -> T {
        let dth = normalize_angle(o.theta - self.theta) * turn_radius;
        ((o.x - self.x).powi(2) + (o.y - self.y).powi(2) + dth * dth).sqrt()
    }

    /// Straight-line interpolation along the shorter heading change.
    pub fn interpolate(&self, o: &Self, t: T) -> Self {
        let dth = normalize_angle(o.theta - self.theta);
        Self::new(
            self.x + (o.x - self.x) * t,
            self.y + (o.y - self.y) * t,
            self.theta + dth * t,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default)]
pub struct RobotParams<T: Scalar> {
    pub half_length: T,
    pub half_width: T,
    /// Samples per footprint side, counting one corner.
    pub sample_points: usize,
}

impl<T: Scalar> Default for RobotParams<T> {
    fn default() -> Self {
        Self {
            half_length: T::lit(0.1),
            half_width: T::lit(0.075),
            sample_points: 5,
        }
    }
}

impl<T: Scalar> RobotParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > T::zero() && self.half_width > T::zero()) {
            return Err(Error::InvalidArgument("robot dimensions must be positive".into()));
        }
        if self.sample_points < 2 {
            return Err(Error::InvalidArgument("sample_points must be >= 2".into()));
        }
        Ok(())
    }
}

/// Footprint outline samples plus the center: the four corners and
/// `sample_points - 1` evenly spaced points after each corner, so
/// `4 * sample_points + 1` points in all.
pub fn footprint_samples<T: Scalar>(c: &RobotConfig<T>, params: &RobotParams<T>) -> Vec<Point2<T>> {
    let (s, co) = c.theta.sin_cos();
    let fwd = Point2::new(co, s);
    let left = fwd.perp();
    let at = |u: T, v: T| c.position() + fwd * u + left * v;
    let (l, w) = (params.half_length, params.half_width);
    let corners = [at(-l, -w), at(l, -w), at(l, w), at(-l, w)];
    let k = params.sample_points;
    let mut out = Vec::with_capacity(4 * k + 1);
    out.push(c.position());
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        for j in 0..k {
            out.push(a.lerp(b, T::from_count(j) / T::from_count(k)));
        }
    }
    out
}

/// Center-closest inclusion test of `p` against one boundary.
pub fn pibc_point<T: Scalar>(p: Point2<T>, boundary: &Boundary<T>, m_p: usize) -> bool {
    let c = boundary.center;
    let d_s = p.dist_sq(c);
    let verts = boundary.polygon.vertices();
    let m = m_p.max(1).min(verts.len());
    let mut near: Vec<(T, usize)> = verts.iter().enumerate().map(|(i, v)| (v.dist_sq(p), i)).collect();
    if m < near.len() {
        near.select_nth_unstable_by(m - 1, |a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
    }
    near[..m].iter().all(|&(_, i)| d_s < verts[i].dist_sq(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PibcParams {
    /// Candidate boundaries per sample, by center distance.
    pub n: usize,
    /// Boundary vertices compared per boundary.
    pub m_p: usize,
}

impl Default for PibcParams {
    fn default() -> Self {
        Self { n: 3, m_p: 5 }
    }
}

/// True when every footprint sample passes [`pibc_point`] for at least one
/// of the `n` boundaries whose centers are closest to that sample.
pub fn pibc_config_free<T: Scalar>(
    c: &RobotConfig<T>,
    params: &RobotParams<T>,
    boundaries: &[Boundary<T>],
    pibc: PibcParams,
) -> bool {
    if boundaries.is_empty() || !c.is_finite() {
        return false;
    }
    let n = pibc.n.max(1).min(boundaries.len());
    let mut order: Vec<(T, usize)> = Vec::with_capacity(boundaries.len());
    footprint_samples(c, params).into_iter().all(|p| {
        order.clear();
        order.extend(boundaries.iter().enumerate().map(|(i, b)| (b.center.dist_sq(p), i)));
        order.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        order[..n].iter().any(|&(_, i)| pibc_point(p, &boundaries[i], pibc.m_p))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrtOptions {
    /// Longest tree extension in configuration space, m.
    pub step_max: f64,
    pub goal_bias: f64,
    pub budget: usize,
    pub pibc: PibcParams,
}

impl Default for RrtOptions {
    fn default() -> Self {
        Self {
            step_max: 0.15,
            goal_bias: 0.1,
            budget: 5000,
            pibc: PibcParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PlannedPath<T> {
    pub edge_id: usize,
    pub configs: Vec<RobotConfig<T>>,
}

struct Checker<'a, T: Scalar> {
    params: &'a RobotParams<T>,
    boundaries: &'a [Boundary<T>],
    pibc: PibcParams,
    sub_step: T,
    turn_radius: T,
}

impl<T: Scalar> Checker<'_, T> {
    fn free(&self, c: &RobotConfig<T>) -> bool {
        pibc_config_free(c, self.params, self.boundaries, self.pibc)
    }

    /// Interior sub-steps of the motion `a -> b` (the end `b` included).
    fn motion_free(&self, a: &RobotConfig<T>, b: &RobotConfig<T>) -> bool {
        let d = a.distance(b, self.turn_radius);
        let steps = (d / self.sub_step).ceil().to_usize().unwrap_or(1).max(1);
        (1..=steps).all(|i| self.free(&a.interpolate(b, T::from_count(i) / T::from_count(steps))))
    }
}

/// RRT from `start` to `goal`; every tree node and every sub-step of every
/// tree edge (at `step_max / 4`) passes [`pibc_config_free`].
pub fn rrt_plan<T: Scalar>(
    start: RobotConfig<T>,
    goal: RobotConfig<T>,
    boundaries: &[Boundary<T>],
    params: &RobotParams<T>,
    opts: &RrtOptions,
    seed: u64,
) -> Result<Vec<RobotConfig<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rrt_plan_with(start, goal, boundaries, params, opts, &mut rng)
}

fn rrt_plan_with<T: Scalar>(
    start: RobotConfig<T>,
    goal: RobotConfig<T>,
    boundaries: &[Boundary<T>],
    params: &RobotParams<T>,
    opts: &RrtOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<RobotConfig<T>>> {
    params.validate()?;
    if !(opts.step_max > 0.0) || !(0.0..=1.0).contains(&opts.goal_bias) {
        return Err(Error::InvalidArgument(
            "step_max must be > 0 and goal_bias in [0, 1]".into(),
        ));
    }
    let step_max = T::lit(opts.step_max);
    let check = Checker {
        params,
        boundaries,
        pibc: opts.pibc,
        sub_step: step_max / T::lit(4.0),
        turn_radius: params.half_length,
    };
    if !check.free(&start) {
        return Err(Error::InvalidEndpoint(format!("start {start:?} is not free")));
    }
    if !check.free(&goal) {
        return Err(Error::InvalidEndpoint(format!("goal {goal:?} is not free")));
    }
    let r = check.turn_radius;
    if start.distance(&goal, r) <= T::eps_len() {
        return Ok(vec![start]);
    }
    let (lo, hi) = boundaries
        .iter()
        .map(|b| b.polygon.bounds())
        .reduce(|(a0, a1), (b0, b1)| {
            (
                Point2::new(a0.x.min(b0.x), a0.y.min(b0.y)),
                Point2::new(a1.x.max(b1.x), a1.y.max(b1.y)),
            )
        })
        .expect("non-empty boundaries");
    let (lo_x, hi_x, lo_y, hi_y) = (lo.x.as_f64(), hi.x.as_f64(), lo.y.as_f64(), hi.y.as_f64());

    let mut nodes = vec![start];
    let mut parent: Vec<usize> = vec![0];
    let finish = |nodes: &[RobotConfig<T>], parent: &[usize], last: usize| {
        let mut path = vec![goal];
        let mut i = last;
        loop {
            path.push(nodes[i]);
            if i == 0 {
                break;
            }
            i = parent[i];
        }
        path.reverse();
        path
    };
    if start.distance(&goal, r) <= step_max && check.motion_free(&start, &goal) {
        return Ok(vec![start, goal]);
    }
    for _ in 0..opts.budget {
        let sample = if rng.random::<f64>() < opts.goal_bias {
            goal
        } else {
            RobotConfig::new(
                T::lit(rng.random_range(lo_x..=hi_x)),
                T::lit(rng.random_range(lo_y..=hi_y)),
                T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
            )
        };
        let near = (0..nodes.len())
            .min_by(|&a, &b| {
                nodes[a]
                    .distance(&sample, r)
                    .partial_cmp(&nodes[b].distance(&sample, r))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("tree has a root");
        let from = nodes[near];
        let d = from.distance(&sample, r);
        if d <= T::eps_len() {
            continue;
        }
        let new = if d > step_max {
            from.interpolate(&sample, step_max / d)
        } else {
            sample
        };
        if !check.motion_free(&from, &new) {
            continue;
        }
        nodes.push(new);
        parent.push(near);
        let last = nodes.len() - 1;
        if new.distance(&goal, r) <= step_max && check.motion_free(&new, &goal) {
            return Ok(finish(&nodes, &parent, last));
        }
    }
    Err(Error::BudgetExhausted {
        iterations: opts.budget,
    })
}

/// Planning outcome along a whole route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RouteMotion<T> {
    /// One path per traversal that succeeded, in route order.
    pub paths: Vec<PlannedPath<T>>,
    /// Edge ids with at least one failed traversal, ascending.
    pub untraversable: Vec<usize>,
}

/// Pose at `from` heading towards `to`, pulled back along the edge in
/// `step / 4` increments (at most half the edge) until it is free.
fn endpoint_pose<T: Scalar>(from: Point2<T>, to: Point2<T>, check: &Checker<'_, T>) -> Option<RobotConfig<T>> {
    let d = to - from;
    let theta = d.y.atan2(d.x);
    let len = d.norm();
    let mut s = T::zero();
    while s <= len * T::lit(0.5) {
        let p = from.lerp(to, if len > T::zero() { s / len } else { T::zero() });
        let c = RobotConfig::new(p.x, p.y, theta);
        if check.free(&c) {
            return Some(c);
        }
        s = s + check.sub_step;
    }
    None
}

/// Plans every traversal of `route` independently, heading along the edge.
/// Endpoint poses that are not free are pulled back along the edge; edges
/// that cannot be planned are reported rather than failing the run.
pub fn plan_along_route<T: Scalar>(
    route: &InspectionRoute<T>,
    g: &StructureGraph<T>,
    boundaries: &[Boundary<T>],
    params: &RobotParams<T>,
    opts: &RrtOptions,
    seed: u64,
) -> Result<RouteMotion<T>> {
    params.validate()?;
    if route.traversed_edges.is_empty() {
        return Ok(RouteMotion {
            paths: Vec::new(),
            untraversable: Vec::new(),
        });
    }
    if boundaries.is_empty() {
        return Err(Error::InvalidArgument("no boundaries to plan in".into()));
    }
    if route.walk.len() != route.traversed_edges.len() + 1 {
        return Err(Error::InvalidArgument("walk and edge list lengths disagree".into()));
    }
    let check = Checker {
        params,
        boundaries,
        pibc: opts.pibc,
        sub_step: T::lit(opts.step_max / 4.0),
        turn_radius: params.half_length,
    };
    let results: Vec<(usize, Option<Vec<RobotConfig<T>>>)> = route
        .traversed_edges
        .par_iter()
        .enumerate()
        .map(|(k, &e)| {
            let a = g.vertex(route.walk[k])?.position;
            let b = g.vertex(route.walk[k + 1])?.position;
            let (Some(start), Some(goal)) = (endpoint_pose(a, b, &check), endpoint_pose(b, a, &check)) else {
                return Ok((e, None));
            };
            let goal = RobotConfig::new(goal.x, goal.y, start.theta);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            Ok((e, rrt_plan_with(start, goal, boundaries, params, opts, &mut rng).ok()))
        })
        .collect::<Result<_>>()?;
    let mut paths = Vec::new();
    let mut untraversable = Vec::new();
    for (edge_id, configs) in results {
        match configs {
            Some(configs) => paths.push(PlannedPath { edge_id, configs }),
            None => untraversable.push(edge_id),
        }
    }
    untraversable.sort_unstable();
    untraversable.dedup();
    Ok(RouteMotion { paths, untraversable })
}

/// How cluster outlines are turned into planning boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionOptions<T> {
    /// Clusters are cut across their principal axis into pieces about this
    /// long, each with its own boundary and center.
    pub piece_length: T,
    /// Each piece takes in the points of its own and neighboring clusters
    /// within this distance, so adjacent regions overlap instead of leaving
    /// the sampling gap between them.
    pub grow: T,
    pub sliding_factor: usize,
    /// Outline jitter below this is smoothed away.
    pub simplify_tolerance: T,
    /// Longest edge after densification.
    pub max_vertex_spacing: T,
}

/// Splits `points` along their principal axis into `ceil(extent / len)`
/// equal slabs; returns the slab of every point. Compact clusters (aspect
/// ratio under about 1.4) have no meaningful axis and stay whole.
fn slabs<T: Scalar>(points: &[Point2<T>], len: T) -> Vec<usize> {
    let Ok(axis) = pca_principal_axis(points) else {
        return vec![0; points.len()];
    };
    let (l1, l2) = axis.eigenvalues;
    if l1 < T::lit(2.0) * l2 {
        return vec![0; points.len()];
    }
    let t: Vec<T> = points.iter().map(|p| axis.line.param_of(*p)).collect();
    let lo = t.iter().copied().fold(T::infinity(), T::min);
    let hi = t.iter().copied().fold(T::neg_infinity(), T::max);
    let extent = hi - lo;
    let m = (extent / len).ceil().to_usize().unwrap_or(1).max(1);
    if m == 1 {
        return vec![0; points.len()];
    }
    let width = extent / T::from_count(m);
    t.iter()
        .map(|&ti| ((ti - lo) / width).floor().to_usize().unwrap_or(0).min(m - 1))
        .collect()
}

/// Boundaries the planner checks footprints against.
///
/// The center-closest test compares a point with the boundary vertices
/// nearest to it, which is only faithful near the center: a dent in a wall
/// (a sampling gap in the cloud) shadows a patch of interior that grows with
/// the distance from the center, and sparse vertices do the same on long
/// walls. So each cluster is cut into short pieces, each piece is grown into
/// its own and neighboring clusters (`neighbors` is the k×k adjacency, empty
/// meaning all; growing into non-neighbors would bridge the concave corners
/// between them), outlined, smoothed and densified. Pieces whose boundary
/// fails are skipped; `cluster_id` is the cluster a piece came from.
pub fn planning_boundaries<T: Scalar>(
    points: &[Point2<T>],
    labels: &[usize],
    k: usize,
    neighbors: &[Vec<bool>],
    opts: &RegionOptions<T>,
) -> Result<Vec<Boundary<T>>> {
    if points.len() != labels.len() {
        return Err(Error::InvalidArgument("labels do not match points".into()));
    }
    if !neighbors.is_empty() && (neighbors.len() != k || neighbors.iter().any(|r| r.len() != k)) {
        return Err(Error::InvalidArgument("neighbor matrix must be k×k".into()));
    }
    if !(opts.piece_length > T::zero()) {
        return Err(Error::InvalidArgument("piece_length must be > 0".into()));
    }
    let may_grow = |c: usize, l: usize| l == c || neighbors.is_empty() || (l < k && neighbors[c][l]);
    let mut pieces: Vec<(usize, Vec<usize>)> = Vec::new();
    for c in 0..k {
        let idx: Vec<usize> = (0..points.len()).filter(|&i| labels[i] == c).collect();
        let own: Vec<Point2<T>> = idx.iter().map(|&i| points[i]).collect();
        let slab = slabs(&own, opts.piece_length);
        let m = slab.iter().max().map_or(0, |s| s + 1);
        let mut groups = vec![Vec::new(); m];
        for (&i, &s) in idx.iter().zip(&slab) {
            groups[s].push(i);
        }
        pieces.extend(groups.into_iter().filter(|g| !g.is_empty()).map(|g| (c, g)));
    }
    let eps = opts.grow;
    let index = GridIndex::with_cell(points, eps.max(T::eps_len()));
    let out: Vec<Option<Boundary<T>>> = pieces
        .par_iter()
        .map(|(c, idx)| {
            let mut member = vec![false; points.len()];
            for &i in idx {
                member[i] = true;
                for j in index.within(points[i], eps) {
                    if may_grow(*c, labels[j]) {
                        member[j] = true;
                    }
                }
            }
            let grown: Vec<Point2<T>> = (0..points.len()).filter(|&i| member[i]).map(|i| points[i]).collect();
            let mut b = estimate_boundary(*c, &grown, opts.sliding_factor).ok()?;
            // The center of the piece itself, not of its grown surroundings.
            let own: Vec<Point2<T>> = idx.iter().map(|&i| points[i]).collect();
            if let Some(center) = centroid(&own) {
                b.center = center;
            }
            b.polygon = b
                .polygon
                .simplified(opts.simplify_tolerance)
                .densified(opts.max_vertex_spacing);
            Some(b)
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}
