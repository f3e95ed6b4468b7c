//! End-to-end orchestration: cloud → segmentation → graph → route → paths,
//! with every stage's output persisted as a JSON artifact.

pub mod io;
mod svg;

pub use svg::{render_svg, Layer};

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::boundary::{Boundary, DEFAULT_SLIDING_FACTOR};
use crate::cloud::PointCloud2D;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::graph::{build_graph, Edge, GraphDiagnostic, StructureGraph, Vertex, VertexRole};
use crate::planner::{
    plan_along_route, planning_boundaries, PibcParams, RegionOptions, RobotConfig, RobotParams, RrtOptions,
};
use crate::segmentation::{
    neighbor_info_by_cluster, segment_structure, CandidateReport, EmOptions, SegmentOptions, BORDER_SPACING_FACTOR,
};
use crate::spatial::mean_nearest_neighbor_spacing;
use crate::synth::LabeledCloud;
use crate::vocpp::{plan_route, InspectionRoute, ParityCase};

/// Planning boundaries follow the walls more loosely than the segmentation
/// outlines so thin sampling gaps do not cut into the free space.
pub const DEFAULT_PLANNING_SLIDING_FACTOR: usize = 24;

/// How a route endpoint is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexSelector {
    Id(usize),
    /// The vertex nearest to a coordinate.
    Nearest([f64; 2]),
    /// Vertex 0.
    Lowest,
    /// The last vertex.
    Highest,
}

impl VertexSelector {
    pub fn resolve(&self, g: &StructureGraph<f64>) -> Result<usize> {
        if g.vertex_count() == 0 {
            return Err(Error::DegenerateInput("graph has no vertices".into()));
        }
        match self {
            VertexSelector::Id(id) => g.vertex(*id).map(|v| v.id),
            VertexSelector::Nearest([x, y]) => {
                let p = Point2::try_new(*x, *y)?;
                Ok(g.nearest_vertex(p).expect("non-empty graph"))
            }
            VertexSelector::Lowest => Ok(0),
            VertexSelector::Highest => Ok(g.vertex_count() - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Defaults to half the bar width.
    pub step_max: Option<f64>,
    pub goal_bias: f64,
    pub budget: usize,
    pub n: usize,
    pub m_p: usize,
    /// Vertex spacing of the planning boundaries; defaults to a twentieth
    /// of the robot half width.
    pub vertex_spacing: Option<f64>,
    /// Length of the pieces clusters are cut into for planning; defaults to
    /// the bar width.
    pub piece_length: Option<f64>,
    /// Concave hull sliding factor of the planning boundaries.
    pub sliding_factor: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let rrt = RrtOptions::default();
        Self {
            step_max: None,
            goal_bias: rrt.goal_bias,
            budget: rrt.budget,
            n: rrt.pibc.n,
            m_p: rrt.pibc.m_p,
            vertex_spacing: None,
            piece_length: None,
            sliding_factor: DEFAULT_PLANNING_SLIDING_FACTOR,
        }
    }
}

/// Every tunable of a run. Length defaults not given explicitly scale with
/// `bar_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Nominal bar width, m.
    pub bar_width: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Minimum neighbor border length; defaults to half the bar width.
    pub l_b: Option<f64>,
    pub sliding_factor: usize,
    /// Border membership distance; defaults to a multiple of the mean point
    /// spacing.
    pub eps_border: Option<f64>,
    /// Minimum distance from existing vertices for a bar endpoint; defaults
    /// to 1.5 bar widths.
    pub d_min: Option<f64>,
    pub start: VertexSelector,
    pub target: VertexSelector,
    pub robot: RobotParams<f64>,
    pub planner: PlannerConfig,
    pub em: EmOptions,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bar_width: 0.3,
            n_min: 3,
            n_max: 8,
            l_b: None,
            sliding_factor: DEFAULT_SLIDING_FACTOR,
            eps_border: None,
            d_min: None,
            start: VertexSelector::Lowest,
            target: VertexSelector::Highest,
            robot: RobotParams::default(),
            planner: PlannerConfig::default(),
            em: EmOptions::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.n_min >= 2 && self.n_max >= self.n_min) {
            return bad(format!(
                "need 2 <= n_min <= n_max, got {} and {}",
                self.n_min, self.n_max
            ));
        }
        if self.sliding_factor < 3 || self.planner.sliding_factor < 3 {
            return bad("sliding factors must be >= 3".into());
        }
        let lengths = [
            ("bar_width", Some(self.bar_width)),
            ("l_b", self.l_b),
            ("eps_border", self.eps_border),
            ("d_min", self.d_min),
            ("planner.step_max", self.planner.step_max),
            ("planner.vertex_spacing", self.planner.vertex_spacing),
            ("planner.piece_length", self.planner.piece_length),
        ];
        for (name, v) in lengths {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("{name} must be a positive length, got {v}"));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.planner.goal_bias) {
            return bad("planner.goal_bias must be in [0, 1]".into());
        }
        if self.planner.n == 0 || self.planner.m_p == 0 {
            return bad("planner.n and planner.m_p must be >= 1".into());
        }
        self.robot.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn l_b(&self) -> f64 {
        self.l_b.unwrap_or(0.5 * self.bar_width)
    }

    pub fn d_min(&self) -> f64 {
        self.d_min.unwrap_or(1.5 * self.bar_width)
    }

    pub fn step_max(&self) -> f64 {
        self.planner.step_max.unwrap_or(0.5 * self.bar_width)
    }

    pub fn vertex_spacing(&self) -> f64 {
        self.planner.vertex_spacing.unwrap_or(self.robot.half_width / 20.0)
    }

    pub fn eps_border_for(&self, points: &[Point2<f64>]) -> f64 {
        self.eps_border
            .unwrap_or_else(|| mean_nearest_neighbor_spacing(points).unwrap_or(0.0) * BORDER_SPACING_FACTOR)
    }

    pub fn segment_options(&self) -> SegmentOptions {
        SegmentOptions {
            n_min: self.n_min,
            n_max: self.n_max,
            l_b: self.l_b(),
            sliding_factor: self.sliding_factor,
            seed: self.seed,
            em: self.em,
            eps_border: self.eps_border,
        }
    }

    pub fn region_options(&self, eps_border: f64) -> RegionOptions<f64> {
        RegionOptions {
            piece_length: self.planner.piece_length.unwrap_or(self.bar_width),
            grow: eps_border,
            sliding_factor: self.planner.sliding_factor,
            simplify_tolerance: 0.25 * eps_border,
            max_vertex_spacing: self.vertex_spacing(),
        }
    }

    pub fn rrt_options(&self) -> RrtOptions {
        RrtOptions {
            step_max: self.step_max(),
            goal_bias: self.planner.goal_bias,
            budget: self.planner.budget,
            pibc: PibcParams {
                n: self.planner.n,
                m_p: self.planner.m_p,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphVertexRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub role: VertexRole,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdgeRecord {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// On-disk graph layout with flat vertex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphArtifact {
    pub vertices: Vec<GraphVertexRecord>,
    pub edges: Vec<GraphEdgeRecord>,
}

impl From<&StructureGraph<f64>> for GraphArtifact {
    fn from(g: &StructureGraph<f64>) -> Self {
        Self {
            vertices: g
                .vertices()
                .iter()
                .map(|v| GraphVertexRecord {
                    id: v.id,
                    x: v.position.x,
                    y: v.position.y,
                    role: v.role,
                    cluster: v.cluster,
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| GraphEdgeRecord {
                    id: e.id,
                    u: e.u,
                    v: e.v,
                    weight: e.weight,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphArtifact> for StructureGraph<f64> {
    type Error = Error;
    fn try_from(a: GraphArtifact) -> Result<Self> {
        StructureGraph::new(
            a.vertices
                .into_iter()
                .map(|v| Vertex {
                    id: v.id,
                    position: Point2::new(v.x, v.y),
                    role: v.role,
                    cluster: v.cluster,
                })
                .collect(),
            a.edges
                .into_iter()
                .map(|e| Edge {
                    id: e.id,
                    u: e.u,
                    v: e.v,
                    weight: e.weight,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteArtifact {
    pub start: usize,
    pub target: usize,
    pub walk: Vec<usize>,
    pub positions: Vec<[f64; 2]>,
    pub edges: Vec<usize>,
    pub cost: f64,
    pub case: ParityCase,
    pub duplicated_edges: Vec<usize>,
}

impl RouteArtifact {
    pub fn route(&self) -> InspectionRoute<f64> {
        InspectionRoute {
            walk: self.walk.clone(),
            traversed_edges: self.edges.clone(),
            total_cost: self.cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathArtifact {
    pub edge_id: usize,
    pub waypoints: Vec<RobotConfig<f64>>,
}

/// Non-fatal findings of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Diagnostics {
    pub n_o: Option<usize>,
    pub candidates: Vec<CandidateReport<f64>>,
    pub eps_border: Option<f64>,
    /// Chosen clusters whose boundary could not be estimated.
    pub failed_clusters: Vec<usize>,
    pub graph: Vec<GraphDiagnostic>,
    pub route_error: Option<String>,
    pub untraversable_edges: Vec<usize>,
}

impl Diagnostics {
    /// True when something a user should look at happened.
    pub fn has_issues(&self) -> bool {
        !self.failed_clusters.is_empty()
            || self
                .graph
                .iter()
                .any(|d| matches!(d, GraphDiagnostic::Disconnected { .. }))
            || self.route_error.is_some()
            || !self.untraversable_edges.is_empty()
    }
}

/// All stage outputs of a run; absent layers are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunArtifacts {
    pub points: Option<Vec<Point2<f64>>>,
    /// Point index → cluster label.
    pub clusters: Option<BTreeMap<usize, usize>>,
    pub boundaries: Option<Vec<Boundary<f64>>>,
    pub planning_boundaries: Option<Vec<Boundary<f64>>>,
    pub graph: Option<StructureGraph<f64>>,
    pub route: Option<RouteArtifact>,
    pub paths: Option<Vec<PathArtifact>>,
    pub diagnostics: Diagnostics,
}

const POINTS: &str = "points.json";
const CLUSTERS: &str = "clusters.json";
const BOUNDARIES: &str = "boundaries.json";
const PLANNING_BOUNDARIES: &str = "planning_boundaries.json";
const GRAPH: &str = "graph.json";
const ROUTE: &str = "route.json";
const PATHS: &str = "paths.json";
const DIAGNOSTICS: &str = "diagnostics.json";

fn write_json<V: Serialize>(dir: &Path, name: &str, value: &V) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn read_json<V: DeserializeOwned>(dir: &Path, name: &str) -> Result<Option<V>> {
    let path = dir.join(name);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    serde_json::from_str(&text).map(Some).map_err(|e| Error::Parse {
        source_name: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn missing(layer: &str) -> Error {
    Error::MissingLayer(layer.to_string())
}

impl RunArtifacts {
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        if let Some(p) = &self.points {
            write_json(dir, POINTS, p)?;
        }
        if let Some(c) = &self.clusters {
            write_json(dir, CLUSTERS, c)?;
        }
        if let Some(b) = &self.boundaries {
            write_json(dir, BOUNDARIES, b)?;
        }
        if let Some(b) = &self.planning_boundaries {
            write_json(dir, PLANNING_BOUNDARIES, b)?;
        }
        if let Some(g) = &self.graph {
            write_json(dir, GRAPH, &GraphArtifact::from(g))?;
        }
        if let Some(r) = &self.route {
            write_json(dir, ROUTE, r)?;
        }
        if let Some(p) = &self.paths {
            write_json(dir, PATHS, p)?;
        }
        write_json(dir, DIAGNOSTICS, &self.diagnostics)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} is not a directory", dir.display()),
            )));
        }
        Ok(Self {
            points: read_json(dir, POINTS)?,
            clusters: read_json(dir, CLUSTERS)?,
            boundaries: read_json(dir, BOUNDARIES)?,
            planning_boundaries: read_json(dir, PLANNING_BOUNDARIES)?,
            graph: read_json::<GraphArtifact>(dir, GRAPH)?
                .map(StructureGraph::try_from)
                .transpose()?,
            route: read_json(dir, ROUTE)?,
            paths: read_json(dir, PATHS)?,
            diagnostics: read_json(dir, DIAGNOSTICS)?.unwrap_or_default(),
        })
    }

    /// Cluster label of every point, in point order.
    pub fn labels(&self) -> Result<Vec<usize>> {
        let clusters = self.clusters.as_ref().ok_or_else(|| missing("clusters"))?;
        let n = self.points.as_ref().map_or(clusters.len(), Vec::len);
        (0..n)
            .map(|i| {
                clusters
                    .get(&i)
                    .copied()
                    .ok_or_else(|| Error::DegenerateInput(format!("point {i} has no cluster label")))
            })
            .collect()
    }

    /// Segments `cloud`, replacing every layer.
    pub fn segment(&mut self, cloud: &PointCloud2D<f64>, cfg: &PipelineConfig) -> Result<()> {
        let seg = segment_structure(cloud, &cfg.segment_options()).map_err(|e| e.in_stage("segment"))?;
        let chosen = seg
            .candidates
            .iter()
            .find(|c| c.n_c == seg.n_o)
            .map(|c| c.failed_clusters.clone())
            .unwrap_or_default();
        *self = RunArtifacts {
            points: Some(cloud.points.clone()),
            clusters: Some(seg.clusters.labels.iter().copied().enumerate().collect()),
            boundaries: Some(seg.boundaries),
            diagnostics: Diagnostics {
                n_o: Some(seg.n_o),
                candidates: seg.candidates,
                eps_border: Some(seg.eps_border),
                failed_clusters: chosen,
                ..Default::default()
            },
            ..Default::default()
        };
        Ok(())
    }

    /// Segmentation layers from known labels (bypassing the mixture fit).
    pub fn from_labels(points: Vec<Point2<f64>>, labels: &[usize], cfg: &PipelineConfig) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::InvalidArgument("labels do not match points".into()));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut clusters = vec![Vec::new(); k];
        for (p, &l) in points.iter().zip(labels) {
            clusters[l].push(*p);
        }
        let (boundaries, failed) = crate::segmentation::cluster_boundaries(&clusters, cfg.sliding_factor);
        let eps = cfg.eps_border_for(&points);
        Ok(Self {
            clusters: Some(labels.iter().copied().enumerate().collect()),
            points: Some(points),
            boundaries: Some(boundaries),
            diagnostics: Diagnostics {
                n_o: Some(k),
                eps_border: Some(eps),
                failed_clusters: failed,
                ..Default::default()
            },
            ..Default::default()
        })
    }

    fn eps_border(&self, cfg: &PipelineConfig) -> Result<f64> {
        match self.diagnostics.eps_border {
            Some(e) => Ok(e),
            None => Ok(cfg.eps_border_for(self.points.as_ref().ok_or_else(|| missing("points"))?)),
        }
    }

    /// Builds the structure graph from the boundaries; clears later layers.
    pub fn build_graph(&mut self, cfg: &PipelineConfig) -> Result<()> {
        let stage = |e: Error| e.in_stage("graph");
        let boundaries = self.boundaries.as_ref().ok_or_else(|| stage(missing("boundaries")))?;
        let k = self
            .clusters
            .as_ref()
            .and_then(|c| c.values().max().map(|m| m + 1))
            .unwrap_or(0)
            .max(boundaries.iter().map(|b| b.cluster_id + 1).max().unwrap_or(0));
        let eps = self.eps_border(cfg).map_err(stage)?;
        let info = neighbor_info_by_cluster(k, boundaries, cfg.l_b(), eps);
        let built = build_graph(boundaries, &info, cfg.d_min()).map_err(stage)?;
        self.graph = Some(built.graph);
        self.diagnostics.graph = built.diagnostics;
        self.route = None;
        self.paths = None;
        self.planning_boundaries = None;
        self.diagnostics.route_error = None;
        self.diagnostics.untraversable_edges.clear();
        Ok(())
    }

    /// Plans the inspection route; clears the paths.
    pub fn route(&mut self, cfg: &PipelineConfig) -> Result<()> {
        let stage = |e: Error| e.in_stage("route");
        let g = self.graph.as_ref().ok_or_else(|| stage(missing("graph")))?;
        let v_s = cfg.start.resolve(g).map_err(stage)?;
        let v_t = cfg.target.resolve(g).map_err(stage)?;
        let plan = plan_route(g, v_s, v_t).map_err(stage)?;
        self.route = Some(RouteArtifact {
            start: v_s,
            target: v_t,
            positions: plan
                .route
                .walk
                .iter()
                .map(|&v| {
                    let p = g.vertices()[v].position;
                    [p.x, p.y]
                })
                .collect(),
            walk: plan.route.walk,
            edges: plan.route.traversed_edges,
            cost: plan.route.total_cost,
            case: plan.case,
            duplicated_edges: plan.augmented.duplicated_edges,
        });
        self.paths = None;
        self.diagnostics.route_error = None;
        self.diagnostics.untraversable_edges.clear();
        Ok(())
    }

    /// Plans robot paths along the route.
    pub fn plan(&mut self, cfg: &PipelineConfig) -> Result<()> {
        let stage = |e: Error| e.in_stage("plan");
        let points = self.points.as_ref().ok_or_else(|| stage(missing("points")))?;
        let labels = self.labels().map_err(stage)?;
        let g = self.graph.as_ref().ok_or_else(|| stage(missing("graph")))?;
        let route = self.route.as_ref().ok_or_else(|| stage(missing("route")))?.route();
        route
            .validate(g, route.walk[0], *route.walk.last().expect("non-empty walk"))
            .map_err(stage)?;
        let eps = self.eps_border(cfg).map_err(stage)?;
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let seg_boundaries = self.boundaries.as_ref().ok_or_else(|| stage(missing("boundaries")))?;
        let info = neighbor_info_by_cluster(k, seg_boundaries, cfg.l_b(), eps);
        let boundaries =
            planning_boundaries(points, &labels, k, &info.matrix, &cfg.region_options(eps)).map_err(stage)?;
        let motion =
            plan_along_route(&route, g, &boundaries, &cfg.robot, &cfg.rrt_options(), cfg.seed).map_err(stage)?;
        self.paths = Some(
            motion
                .paths
                .into_iter()
                .map(|p| PathArtifact {
                    edge_id: p.edge_id,
                    waypoints: p.configs,
                })
                .collect(),
        );
        self.planning_boundaries = Some(boundaries);
        self.diagnostics.untraversable_edges = motion.untraversable;
        Ok(())
    }

    /// Graph, route and paths after segmentation. A disconnected graph
    /// stops before routing and is reported in the diagnostics.
    pub fn run_from_segmentation(&mut self, cfg: &PipelineConfig) -> Result<()> {
        self.build_graph(cfg)?;
        let g = self.graph.as_ref().expect("graph just built");
        if !g.is_connected() {
            self.diagnostics.route_error = Some(format!("graph is disconnected ({} components)", g.components().len()));
            return Ok(());
        }
        self.route(cfg)?;
        self.plan(cfg)
    }
}

/// Runs every stage on `cloud`.
pub fn run_on_cloud(cloud: &PointCloud2D<f64>, cfg: &PipelineConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let mut art = RunArtifacts::default();
    art.segment(cloud, cfg)?;
    art.run_from_segmentation(cfg)?;
    Ok(art)
}

/// Reads the cloud (and config, if given), runs every stage and writes all
/// artifacts to `out_dir`.
pub fn run_pipeline(cloud_path: &Path, config_path: Option<&Path>, out_dir: &Path) -> Result<RunArtifacts> {
    let cfg = match config_path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let cloud = io::read_cloud(cloud_path)?;
    let art = run_on_cloud(&cloud, &cfg)?;
    art.save(out_dir)?;
    Ok(art)
}

/// Writes a synthetic fixture as `cloud.csv` plus a `truth.json` sidecar.
pub fn export_fixture(labeled: &LabeledCloud, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = std::fs::File::create(dir.join("cloud.csv"))?;
    io::write_csv(&labeled.cloud, std::io::BufWriter::new(file))?;
    #[derive(Serialize)]
    struct Truth<'a> {
        labels: &'a [usize],
        regions: &'a [crate::synth::TrueRegion],
    }
    write_json(
        dir,
        "truth.json",
        &Truth {
            labels: &labeled.labels,
            regions: &labeled.regions,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_scale_with_bar_width() {
        let cfg = PipelineConfig::from_json(r#"{"bar_width": 0.2}"#).unwrap();
        assert!((cfg.l_b() - 0.1).abs() < 1e-12);
        assert!((cfg.d_min() - 0.3).abs() < 1e-12);
        assert!((cfg.step_max() - 0.1).abs() < 1e-12);
        let cfg = PipelineConfig::from_json(r#"{"d_min": 0.5, "start": {"id": 2}, "target": {"nearest": [1.0, 0.0]}}"#)
            .unwrap();
        assert_eq!(cfg.d_min(), 0.5);
        assert_eq!(cfg.start, VertexSelector::Id(2));
        assert_eq!(cfg.target, VertexSelector::Nearest([1.0, 0.0]));
    }

    #[test]
    fn config_rejects_bad_values() {
        for bad in [
            r#"{"n_min": 5, "n_max": 4}"#,
            r#"{"n_min": 1}"#,
            r#"{"bar_width": -1}"#,
            r#"{"l_b": 0}"#,
            r#"{"unknown": 1}"#,
            r#"{"robot": {"half_width": 0}}"#,
            r#"{"planner": {"goal_bias": 2}}"#,
            "not json",
        ] {
            assert!(matches!(PipelineConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn selectors() {
        let g = StructureGraph::from_weighted_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(VertexSelector::Lowest.resolve(&g).unwrap(), 0);
        assert_eq!(VertexSelector::Highest.resolve(&g).unwrap(), 2);
        assert_eq!(VertexSelector::Id(1).resolve(&g).unwrap(), 1);
        assert!(VertexSelector::Id(3).resolve(&g).is_err());
        assert_eq!(VertexSelector::Nearest([0.0, 0.0]).resolve(&g).unwrap(), 0);
    }

    #[test]
    fn missing_layers_are_reported() {
        let mut art = RunArtifacts::default();
        let cfg = PipelineConfig::default();
        assert!(matches!(
            art.build_graph(&cfg).unwrap_err().root(),
            Error::MissingLayer(_)
        ));
        assert!(matches!(art.route(&cfg).unwrap_err().root(), Error::MissingLayer(_)));
        assert!(matches!(art.plan(&cfg).unwrap_err().root(), Error::MissingLayer(_)));
    }
}
