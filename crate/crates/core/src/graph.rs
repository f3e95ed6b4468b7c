//! Structure graph: cluster centers, border midpoints between neighboring
//! clusters, and bar endpoints found where each cluster's principal axis
//! leaves its boundary.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::boundary::{border_midpoint, Boundary};
use crate::error::{Error, Result};
use crate::geometry::{line_polygon_intersections, Point2};
use crate::scalar::Scalar;
use crate::segmentation::NeighborInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexRole {
    Center,
    BorderMid,
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Vertex<T> {
    pub id: usize,
    pub position: Point2<T>,
    pub role: VertexRole,
    /// Owning cluster; for border midpoints, the lower of the two ids.
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Edge<T> {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

impl<T> Edge<T> {
    /// The endpoint opposite `from`.
    pub fn other(&self, from: usize) -> usize {
        if self.u == from {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawGraph<T> {
    vertices: Vec<Vertex<T>>,
    edges: Vec<Edge<T>>,
}

/// Undirected weighted multigraph with ids equal to positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawGraph<T>", into = "RawGraph<T>")]
pub struct StructureGraph<T: Scalar> {
    vertices: Vec<Vertex<T>>,
    edges: Vec<Edge<T>>,
    /// Per vertex: `(edge id, other endpoint)` in ascending edge id.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl<T: Scalar> TryFrom<RawGraph<T>> for StructureGraph<T> {
    type Error = Error;
    fn try_from(raw: RawGraph<T>) -> Result<Self> {
        Self::new(raw.vertices, raw.edges)
    }
}

impl<T: Scalar> From<StructureGraph<T>> for RawGraph<T> {
    fn from(g: StructureGraph<T>) -> Self {
        RawGraph {
            vertices: g.vertices,
            edges: g.edges,
        }
    }
}

impl<T: Scalar> StructureGraph<T> {
    pub fn new(vertices: Vec<Vertex<T>>, edges: Vec<Edge<T>>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::InvalidArgument(format!("vertex at index {i} has id {}", v.id)));
            }
            if !v.position.is_finite() {
                return Err(Error::InvalidArgument(format!("vertex {i} has a non-finite position")));
            }
        }
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidArgument(format!("edge at index {i} has id {}", e.id)));
            }
            for end in [e.u, e.v] {
                if end >= n {
                    return Err(Error::UnknownVertex(end));
                }
            }
            if e.u == e.v {
                return Err(Error::InvalidArgument(format!("edge {i} is a self-loop")));
            }
            if !(e.weight > T::zero()) || !e.weight.is_finite() {
                return Err(Error::InvalidArgument(format!("edge {i} has weight {}", e.weight)));
            }
            adjacency[e.u].push((i, e.v));
            adjacency[e.v].push((i, e.u));
        }
        Ok(Self {
            vertices,
            edges,
            adjacency,
        })
    }

    /// Abstract graph from `(u, v, weight)` triples; vertices sit at the
    /// origin with role `Center`.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        let vertices = (0..n)
            .map(|id| Vertex {
                id,
                position: Point2::new(T::zero(), T::zero()),
                role: VertexRole::Center,
                cluster: id,
            })
            .collect();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(id, &(u, v, weight))| Edge { id, u, v, weight })
            .collect();
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn vertex(&self, id: usize) -> Result<&Vertex<T>> {
        self.vertices.get(id).ok_or(Error::UnknownVertex(id))
    }

    pub fn edge(&self, id: usize) -> &Edge<T> {
        &self.edges[id]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(edge id, other endpoint)` pairs incident to `v`, ascending by edge.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Connected components as sorted vertex lists, ordered by their
    /// smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(_, w) in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Vertex nearest to `p`; ties go to the lower id.
    pub fn nearest_vertex(&self, p: Point2<T>) -> Option<usize> {
        self.vertices
            .iter()
            .map(|v| (v.position.dist_sq(p), v.id))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }
}

/// Non-fatal findings of graph construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphDiagnostic {
    Disconnected {
        components: Vec<Vec<usize>>,
    },
    /// The cluster's covariance is isotropic, so it has no axis.
    AxisSkipped {
        cluster: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphBuild<T: Scalar> {
    pub graph: StructureGraph<T>,
    pub diagnostics: Vec<GraphDiagnostic>,
}

/// Builds the structure graph.
///
/// Vertices: one center per boundary, one border midpoint per neighbor pair
/// (edged center–mid–center), then for each cluster the points where its
/// principal axis crosses its own boundary, kept when farther than `d_min`
/// from every vertex placed so far and edged to the cluster center.
pub fn build_graph<T: Scalar>(
    boundaries: &[Boundary<T>],
    neighbors: &NeighborInfo<T>,
    d_min: T,
) -> Result<GraphBuild<T>> {
    if boundaries.is_empty() {
        return Err(Error::InvalidArgument("no boundaries".into()));
    }
    if !(d_min >= T::zero()) {
        return Err(Error::InvalidArgument(format!("d_min must be >= 0, got {d_min}")));
    }
    let clusters = boundaries.iter().map(|b| b.cluster_id + 1).max().unwrap_or(0);
    let mut center_of: Vec<Option<usize>> = vec![None; clusters.max(neighbors.len())];
    let mut vertices: Vec<Vertex<T>> = Vec::new();
    let mut edges: Vec<Edge<T>> = Vec::new();
    let mut diagnostics = Vec::new();

    for b in boundaries {
        if center_of[b.cluster_id].is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate boundary for cluster {}",
                b.cluster_id
            )));
        }
        center_of[b.cluster_id] = Some(vertices.len());
        vertices.push(Vertex {
            id: vertices.len(),
            position: b.center,
            role: VertexRole::Center,
            cluster: b.cluster_id,
        });
    }

    let connect = |vertices: &Vec<Vertex<T>>, edges: &mut Vec<Edge<T>>, u: usize, v: usize| {
        let weight = vertices[u].position.dist(vertices[v].position);
        if weight > T::zero() {
            edges.push(Edge {
                id: edges.len(),
                u,
                v,
                weight,
            });
        }
    };

    for (i, j) in neighbors.pairs() {
        let (Some(ci), Some(cj)) = (center_of.get(i).copied().flatten(), center_of.get(j).copied().flatten()) else {
            continue;
        };
        let m_ij = border_midpoint(&neighbors.borders[i][j])?;
        let m_ji = border_midpoint(&neighbors.borders[j][i])?;
        let mid = vertices.len();
        vertices.push(Vertex {
            id: mid,
            position: m_ij.lerp(m_ji, T::lit(0.5)),
            role: VertexRole::BorderMid,
            cluster: i,
        });
        connect(&vertices, &mut edges, ci, mid);
        connect(&vertices, &mut edges, mid, cj);
    }

    for b in boundaries {
        let Some(axis) = &b.axis else {
            diagnostics.push(GraphDiagnostic::AxisSkipped { cluster: b.cluster_id });
            continue;
        };
        let center = center_of[b.cluster_id].expect("center placed");
        for q in line_polygon_intersections(axis, &b.polygon) {
            if vertices.iter().all(|v| v.position.dist(q) > d_min) {
                let id = vertices.len();
                vertices.push(Vertex {
                    id,
                    position: q,
                    role: VertexRole::Endpoint,
                    cluster: b.cluster_id,
                });
                connect(&vertices, &mut edges, center, id);
            }
        }
    }

    let graph = StructureGraph::new(vertices, edges)?;
    let components = graph.components();
    if components.len() > 1 {
        diagnostics.push(GraphDiagnostic::Disconnected { components });
    }
    Ok(GraphBuild { graph, diagnostics })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths<T> {
    pub source: usize,
    /// Infinite for unreachable vertices.
    pub dist: Vec<T>,
    /// `(previous vertex, edge)` on the shortest path tree.
    pub pred: Vec<Option<(usize, usize)>>,
}

impl<T: Scalar> ShortestPaths<T> {
    pub fn reachable(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Vertices and edges from the source to `target`.
    pub fn path_to(&self, target: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        if !self.reachable(target) {
            return None;
        }
        let mut verts = vec![target];
        let mut edges = Vec::new();
        let mut cur = target;
        while let Some((prev, e)) = self.pred[cur] {
            verts.push(prev);
            edges.push(e);
            cur = prev;
        }
        verts.reverse();
        edges.reverse();
        Some((verts, edges))
    }
}

struct Queued<T> {
    dist: T,
    vertex: usize,
}

impl<T: Scalar> PartialEq for Queued<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Queued<T> {}
impl<T: Scalar> PartialOrd for Queued<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Scalar> Ord for Queued<T> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then(o.vertex.cmp(&self.vertex))
    }
}

/// Single-source shortest paths. Ties keep the first relaxation, which
/// with ascending edge ids makes the tree deterministic.
pub fn dijkstra<T: Scalar>(g: &StructureGraph<T>, source: usize) -> Result<ShortestPaths<T>> {
    let n = g.vertex_count();
    if source >= n {
        return Err(Error::UnknownVertex(source));
    }
    let mut dist = vec![T::infinity(); n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = T::zero();
    heap.push(Queued {
        dist: T::zero(),
        vertex: source,
    });
    while let Some(Queued { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(e, w) in g.incident(u) {
            let nd = d + g.edge(e).weight;
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = Some((u, e));
                heap.push(Queued { dist: nd, vertex: w });
            }
        }
    }
    Ok(ShortestPaths { source, dist, pred })
}
