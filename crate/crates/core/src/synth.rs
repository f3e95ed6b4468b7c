//! Ground-truth-labeled synthetic clouds of the five joint shapes.
//!
//! Every layout is a set of rectangular bars radiating from junction
//! ("cross") regions. A junction is the convex hull of the bars' inner end
//! corners together with the corners of the `w x w` junction square that no
//! bar covers, so for axis-aligned layouts it is exactly that square.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud2D;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, point_in_polygon_raycast, Point2, Polygon2};

type P = Point2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Cross,
    T,
    K,
    L,
    I,
}

impl Shape {
    pub const ALL: [Shape; 5] = [Shape::Cross, Shape::T, Shape::K, Shape::L, Shape::I];

    pub fn bar_count(self) -> usize {
        match self {
            Shape::Cross => 4,
            Shape::T | Shape::K | Shape::I => 3,
            Shape::L => 2,
        }
    }

    pub fn junction_count(self) -> usize {
        match self {
            Shape::I => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Cross => "cross",
            Shape::T => "t",
            Shape::K => "k",
            Shape::L => "l",
            Shape::I => "i",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cross" | "x" | "+" => Ok(Shape::Cross),
            "t" => Ok(Shape::T),
            "k" => Ok(Shape::K),
            "l" => Ok(Shape::L),
            "i" => Ok(Shape::I),
            other => Err(Error::InvalidSpec(format!("unknown shape {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructureSpec {
    pub shape: Shape,
    pub bar_width: f64,
    /// One length per bar, or a single length shared by all bars.
    pub bar_lengths: Vec<f64>,
    /// Per-bar width overrides (same arity rules as `bar_lengths`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bar_widths: Option<Vec<f64>>,
    /// Points per square meter.
    pub density: f64,
    pub noise_sigma: f64,
    /// Dropout probability gained per meter along +x.
    pub dropout_slope: f64,
    pub seed: u64,
}

impl Default for StructureSpec {
    fn default() -> Self {
        Self {
            shape: Shape::Cross,
            bar_width: 0.3,
            bar_lengths: vec![1.0],
            bar_widths: None,
            density: 2000.0,
            noise_sigma: 0.0,
            dropout_slope: 0.0,
            seed: 0,
        }
    }
}

impl StructureSpec {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            ..Self::default()
        }
    }

    /// Parses a JSON spec; fields left out take their defaults. Values are
    /// checked by [`generate`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn per_bar(&self, values: &[f64], what: &str) -> Result<Vec<f64>> {
        let n = self.shape.bar_count();
        match values.len() {
            1 => Ok(vec![values[0]; n]),
            m if m == n => Ok(values.to_vec()),
            m => Err(Error::InvalidSpec(format!(
                "{what}: expected 1 or {n} values for {:?}, got {m}",
                self.shape
            ))),
        }
    }

    fn validate(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.bar_width) {
            return Err(Error::InvalidSpec("bar_width must be > 0".into()));
        }
        if !positive(self.density) {
            return Err(Error::InvalidSpec("density must be > 0".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec("noise_sigma must be >= 0".into()));
        }
        if !(self.dropout_slope.is_finite() && self.dropout_slope >= 0.0) {
            return Err(Error::InvalidSpec("dropout_slope must be >= 0".into()));
        }
        let lengths = self.per_bar(&self.bar_lengths, "bar_lengths")?;
        let widths = match &self.bar_widths {
            Some(w) => self.per_bar(w, "bar_widths")?,
            None => vec![self.bar_width; lengths.len()],
        };
        if lengths.iter().chain(&widths).any(|&v| !positive(v)) {
            return Err(Error::InvalidSpec("bar dimensions must be > 0".into()));
        }
        Ok((lengths, widths))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionRole {
    Bar,
    Cross,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueRegion {
    pub id: usize,
    pub role: RegionRole,
    pub polygon: Polygon2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCloud {
    pub cloud: PointCloud2D<f64>,
    /// Region id of each point's noiseless origin.
    pub labels: Vec<usize>,
    pub regions: Vec<TrueRegion>,
}

impl LabeledCloud {
    pub fn cross_regions(&self) -> impl Iterator<Item = &TrueRegion> {
        self.regions.iter().filter(|r| r.role == RegionRole::Cross)
    }

    /// Indices of points whose true label is `region`.
    pub fn members(&self, region: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == region).collect()
    }

    /// Points grouped by true region, in region order.
    pub fn true_clusters(&self) -> Vec<Vec<P>> {
        let mut out = vec![Vec::new(); self.regions.len()];
        for (p, &l) in self.cloud.points.iter().zip(&self.labels) {
            out[l].push(*p);
        }
        out
    }
}

struct Junction {
    center: P,
    /// Bars leaving this junction: (direction angle, bar index).
    bars: Vec<(f64, usize)>,
}

fn layout(shape: Shape, w: f64, lengths: &[f64]) -> Vec<Junction> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let one = |angles: &[f64]| {
        vec![Junction {
            center: P::new(0.0, 0.0),
            bars: angles.iter().copied().zip(0..).collect(),
        }]
    };
    match shape {
        Shape::Cross => one(&[0.0, FRAC_PI_2, PI, -FRAC_PI_2]),
        Shape::T => one(&[0.0, PI, -FRAC_PI_2]),
        Shape::K => one(&[PI, FRAC_PI_4, -FRAC_PI_4]),
        Shape::L => one(&[0.0, FRAC_PI_2]),
        Shape::I => {
            // bar 0 | junction 0 | bar 1 | junction 1 | bar 2, along +x.
            let second = P::new(w + lengths[1], 0.0);
            vec![
                Junction {
                    center: P::new(0.0, 0.0),
                    bars: vec![(PI, 0), (0.0, 1)],
                },
                Junction {
                    center: second,
                    bars: vec![(0.0, 2)],
                },
            ]
        }
    }
}

fn rect(center: P, dir: P, s0: f64, s1: f64, half_width: f64) -> [P; 4] {
    let n = dir.perp();
    [
        center + dir * s0 - n * half_width,
        center + dir * s1 - n * half_width,
        center + dir * s1 + n * half_width,
        center + dir * s0 + n * half_width,
    ]
}

fn strictly_inside_rect(p: P, r: &[P; 4]) -> bool {
    (0..4).all(|i| (r[(i + 1) % 4] - r[i]).cross(p - r[i]) > 1e-12)
}

/// Region polygons in id order: junctions first, then bars.
fn regions(spec: &StructureSpec, lengths: &[f64], widths: &[f64]) -> Result<Vec<TrueRegion>> {
    let w = spec.bar_width;
    let h = w / 2.0;
    let junctions = layout(spec.shape, w, lengths);
    let mut bar_rects: Vec<Option<[P; 4]>> = vec![None; lengths.len()];
    for j in &junctions {
        for &(angle, bar) in &j.bars {
            let dir = P::new(angle.cos(), angle.sin());
            bar_rects[bar] = Some(rect(j.center, dir, h, h + lengths[bar], widths[bar] / 2.0));
        }
    }
    let bar_rects: Vec<[P; 4]> = bar_rects.into_iter().map(|r| r.expect("every bar placed")).collect();

    let mut out = Vec::new();
    for j in &junctions {
        let mut corners: Vec<P> = Vec::new();
        for &(_, bar) in &j.bars {
            corners.push(bar_rects[bar][0]);
            corners.push(bar_rects[bar][3]);
        }
        // The I layout's middle bar ends at the second junction too.
        for (bar, r) in bar_rects.iter().enumerate() {
            if j.bars.iter().all(|&(_, b)| b != bar) && r[1].dist(j.center) <= w && r[2].dist(j.center) <= w {
                corners.push(r[1]);
                corners.push(r[2]);
            }
        }
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            let c = j.center + P::new(sx * h, sy * h);
            if !bar_rects.iter().any(|r| strictly_inside_rect(c, r)) {
                corners.push(c);
            }
        }
        let hull = convex_hull(&corners);
        out.push((RegionRole::Cross, Polygon2::new(hull)?));
    }
    for r in &bar_rects {
        out.push((RegionRole::Bar, Polygon2::new(r.to_vec())?));
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(id, (role, polygon))| TrueRegion { id, role, polygon })
        .collect())
}

/// Samples a labeled cloud for `spec`.
///
/// Each region receives `round(density * area)` uniform samples kept at
/// least `2 * eps_len` away from its outline, so every noiseless origin lies
/// in exactly one region. Gaussian noise and then +x dropout are applied.
pub fn generate(spec: &StructureSpec) -> Result<LabeledCloud> {
    let (lengths, widths) = spec.validate()?;
    let regions = regions(spec, &lengths, &widths)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidSpec(e.to_string()))?)
    } else {
        None
    };
    let margin = 2e-6;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for region in &regions {
        let poly = &region.polygon;
        let target = (spec.density * poly.area()).round() as usize;
        let (lo, hi) = poly.bounds();
        let mut placed = 0;
        while placed < target {
            let q = P::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if !point_in_polygon_raycast(q, poly) || poly.distance_to_boundary(q) < margin {
                continue;
            }
            let p = match &noise {
                Some(n) => P::new(q.x + n.sample(&mut rng), q.y + n.sample(&mut rng)),
                None => q,
            };
            points.push(p);
            labels.push(region.id);
            placed += 1;
        }
    }
    let labeled = LabeledCloud {
        cloud: PointCloud2D::new(points),
        labels,
        regions,
    };
    Ok(if spec.dropout_slope > 0.0 {
        degrade(&labeled, P::new(1.0, 0.0), spec.dropout_slope, spec.seed ^ 0x5eed_d809)
    } else {
        labeled
    })
}

/// Maximum dropout probability.
pub const MAX_DROPOUT: f64 = 0.9;

/// Drops points with probability `min(0.9, slope * (s - s_min))`, where `s`
/// is the projection on `axis`.
pub fn degrade(labeled: &LabeledCloud, axis: P, slope: f64, seed: u64) -> LabeledCloud {
    if slope <= 0.0 || labeled.cloud.is_empty() {
        return labeled.clone();
    }
    let axis = axis.normalized().unwrap_or(P::new(1.0, 0.0));
    let proj: Vec<f64> = labeled.cloud.points.iter().map(|p| p.dot(axis)).collect();
    let s_min = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut intensity = labeled.cloud.intensity.as_ref().map(|_| Vec::new());
    for (i, (&p, &l)) in labeled.cloud.points.iter().zip(&labeled.labels).enumerate() {
        let drop_p = (slope * (proj[i] - s_min)).min(MAX_DROPOUT);
        if rng.random::<f64>() < drop_p {
            continue;
        }
        points.push(p);
        labels.push(l);
        if let (Some(out), Some(src)) = (intensity.as_mut(), labeled.cloud.intensity.as_ref()) {
            out.push(src[i]);
        }
    }
    LabeledCloud {
        cloud: PointCloud2D { points, intensity },
        labels,
        regions: labeled.regions.clone(),
    }
}
