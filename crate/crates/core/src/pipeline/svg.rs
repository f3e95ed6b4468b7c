//! Deterministic SVG rendering of pipeline layers.

use std::fmt::Write as _;
use std::str::FromStr;

use super::RunArtifacts;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::graph::VertexRole;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Segmentation,
    Boundaries,
    Graph,
    Route,
    Path,
}

impl Layer {
    pub const ALL: [Layer; 5] = [
        Layer::Segmentation,
        Layer::Boundaries,
        Layer::Graph,
        Layer::Route,
        Layer::Path,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Segmentation => "segmentation",
            Layer::Boundaries => "boundaries",
            Layer::Graph => "graph",
            Layer::Route => "route",
            Layer::Path => "path",
        }
    }
}

impl FromStr for Layer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Layer::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown layer {s:?}")))
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Pixels per meter.
const SCALE: f64 = 400.0;
const MARGIN: f64 = 20.0;

struct Frame {
    min: Point2<f64>,
    max: Point2<f64>,
}

impl Frame {
    // y flipped so the picture is upright
    fn map(&self, p: Point2<f64>) -> (f64, f64) {
        (MARGIN + (p.x - self.min.x) * SCALE, MARGIN + (self.max.y - p.y) * SCALE)
    }

    fn size(&self) -> (f64, f64) {
        (
            2.0 * MARGIN + (self.max.x - self.min.x) * SCALE,
            2.0 * MARGIN + (self.max.y - self.min.y) * SCALE,
        )
    }
}

fn frame(art: &RunArtifacts) -> Option<Frame> {
    let mut pts: Vec<Point2<f64>> = Vec::new();
    if let Some(p) = &art.points {
        pts.extend(p);
    }
    if let Some(bs) = &art.boundaries {
        for b in bs {
            pts.extend(b.polygon.vertices());
        }
    }
    if let Some(g) = &art.graph {
        pts.extend(g.vertices().iter().map(|v| v.position));
    }
    let first = *pts.first()?;
    let (mut min, mut max) = (first, first);
    for p in pts {
        min = Point2::new(min.x.min(p.x), min.y.min(p.y));
        max = Point2::new(max.x.max(p.x), max.y.max(p.y));
    }
    Some(Frame { min, max })
}

fn polygon_points(f: &Frame, pts: &[Point2<f64>]) -> String {
    let mut s = String::new();
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = f.map(*p);
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

/// Renders `layer` over the layers it is built on.
pub fn render_svg(art: &RunArtifacts, layer: Layer) -> Result<String> {
    let need = |present: bool, name: &str| {
        if present {
            Ok(())
        } else {
            Err(Error::MissingLayer(name.to_string()))
        }
    };
    match layer {
        Layer::Segmentation => {
            need(art.points.is_some(), "points")?;
            need(art.clusters.is_some(), "clusters")?;
        }
        Layer::Boundaries => need(art.boundaries.is_some(), "boundaries")?,
        Layer::Graph => need(art.graph.is_some(), "graph")?,
        Layer::Route => {
            need(art.graph.is_some(), "graph")?;
            need(art.route.is_some(), "route")?;
        }
        Layer::Path => need(art.paths.is_some(), "paths")?,
    }
    let f = frame(art).ok_or_else(|| Error::MissingLayer("points".into()))?;
    let (w, h) = f.size();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    s.push_str(concat!(
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto">"##,
        r##"<path d="M0,0 L10,5 L0,10 z" fill="#d62728"/></marker></defs>"##,
        "\n"
    ));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if layer == Layer::Segmentation {
        let labels = art.labels()?;
        let _ = writeln!(s, r#"<g class="segmentation">"#);
        for (p, l) in art.points.as_ref().expect("checked").iter().zip(labels) {
            let (x, y) = f.map(*p);
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.2" fill="{}" data-cluster="{l}"/>"#,
                PALETTE[l % PALETTE.len()]
            );
        }
        s.push_str("</g>\n");
    } else if let Some(points) = &art.points {
        let _ = writeln!(s, r##"<g class="cloud" fill="#cccccc">"##);
        for p in points {
            let (x, y) = f.map(*p);
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="0.8"/>"#);
        }
        s.push_str("</g>\n");
    }

    if layer != Layer::Segmentation {
        if let Some(bs) = &art.boundaries {
            let _ = writeln!(s, r#"<g class="boundaries" fill="none" stroke-width="1.5">"#);
            for b in bs {
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" stroke="{}" data-cluster="{}"/>"#,
                    polygon_points(&f, b.polygon.vertices()),
                    PALETTE[b.cluster_id % PALETTE.len()],
                    b.cluster_id
                );
            }
            s.push_str("</g>\n");
        }
    }

    if matches!(layer, Layer::Graph | Layer::Route | Layer::Path) {
        if let Some(g) = &art.graph {
            let _ = writeln!(s, r##"<g class="graph" stroke="#333333" stroke-width="1">"##);
            for e in g.edges() {
                let (x1, y1) = f.map(g.vertices()[e.u].position);
                let (x2, y2) = f.map(g.vertices()[e.v].position);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" data-edge="{}"/>"#,
                    e.id
                );
            }
            for v in g.vertices() {
                let (x, y) = f.map(v.position);
                let fill = match v.role {
                    VertexRole::Center => "#000000",
                    VertexRole::BorderMid => "#ffffff",
                    VertexRole::Endpoint => "#2ca02c",
                };
                let _ = writeln!(
                    s,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{fill}" data-vertex="{}"/>"#,
                    v.id
                );
            }
            s.push_str("</g>\n");
        }
    }

    if layer == Layer::Route {
        let r = art.route.as_ref().expect("checked");
        let _ = writeln!(
            s,
            r##"<g class="route" stroke="#d62728" stroke-width="2" marker-end="url(#arrow)">"##
        );
        for (k, (pair, e)) in r.positions.windows(2).zip(&r.edges).enumerate() {
            let (x1, y1) = f.map(Point2::new(pair[0][0], pair[0][1]));
            let (x2, y2) = f.map(Point2::new(pair[1][0], pair[1][1]));
            let _ = writeln!(
                s,
                r#"<line class="route-step" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" data-step="{k}" data-edge="{e}"/>"#
            );
        }
        s.push_str("</g>\n");
    }

    if layer == Layer::Path {
        let paths = art.paths.as_ref().expect("checked");
        let _ = writeln!(
            s,
            r##"<g class="paths" fill="none" stroke="#9467bd" stroke-width="1.5">"##
        );
        for p in paths {
            let pts: Vec<Point2<f64>> = p.waypoints.iter().map(|c| c.position()).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" data-edge="{}"/>"#,
                polygon_points(&f, &pts),
                p.edge_id
            );
        }
        s.push_str("</g>\n");
        let bad = &art.diagnostics.untraversable_edges;
        if let (Some(g), false) = (&art.graph, bad.is_empty()) {
            let _ = writeln!(
                s,
                r##"<g class="untraversable" stroke="#ff0000" stroke-width="3" stroke-dasharray="6,4">"##
            );
            for &id in bad {
                if let Some(e) = g.edges().get(id) {
                    let (x1, y1) = f.map(g.vertices()[e.u].position);
                    let (x2, y2) = f.map(g.vertices()[e.v].position);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" data-edge="{id}"/>"#
                    );
                }
            }
            s.push_str("</g>\n");
        }
    }

    s.push_str("</svg>\n");
    Ok(s)
}
