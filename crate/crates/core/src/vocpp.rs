//! Open Chinese-postman routing between arbitrary start and end vertices.
//!
//! Parity is fixed in stages: the start/end vertices are first made the
//! only odd vertices (duplicating shortest paths to the nearest odd vertex
//! where needed), the remaining odd vertices are paired by a minimum-cost
//! matching over shortest-path distances, and an Eulerian trail of the
//! augmented multigraph is the route.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{dijkstra, ShortestPaths, StructureGraph};
use crate::scalar::Scalar;

/// Largest odd set paired exactly; larger sets are paired greedily.
pub const EXACT_MATCHING_LIMIT: usize = 16;

/// Largest graph accepted by [`brute_force_ocpp`].
pub const BRUTE_FORCE_MAX_EDGES: usize = 12;

/// Odd-degree vertices, ascending.
pub fn odd_vertices<T: Scalar>(g: &StructureGraph<T>) -> Vec<usize> {
    (0..g.vertex_count()).filter(|&v| g.degree(v) % 2 == 1).collect()
}

/// Which parity situation the start and end vertices are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityCase {
    /// No odd vertices at all.
    NoOdd,
    /// Start and end are both odd.
    BothOdd,
    /// Start even, end odd.
    StartEven,
    /// Start odd, end even.
    EndEven,
    /// Start and end both even while odd vertices exist.
    BothEven,
    /// Start equals end and odd vertices exist: a closed tour.
    Closed,
}

/// Base graph plus re-traversals of existing edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AugmentedGraph<T: Scalar> {
    pub base: StructureGraph<T>,
    /// Base edge ids, one entry per extra traversal, ascending.
    pub duplicated_edges: Vec<usize>,
}

impl<T: Scalar> AugmentedGraph<T> {
    pub fn new(base: StructureGraph<T>, mut duplicated_edges: Vec<usize>) -> Result<Self> {
        if let Some(&e) = duplicated_edges.iter().find(|&&e| e >= base.edge_count()) {
            return Err(Error::InvalidArgument(format!("duplicated edge {e} does not exist")));
        }
        duplicated_edges.sort_unstable();
        Ok(Self { base, duplicated_edges })
    }

    /// Every edge traversal: base edges then duplicates, as base edge ids.
    pub fn multiedges(&self) -> Vec<usize> {
        (0..self.base.edge_count())
            .chain(self.duplicated_edges.iter().copied())
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.base.degree(v)
            + self
                .duplicated_edges
                .iter()
                .filter(|&&e| {
                    let edge = self.base.edge(e);
                    edge.u == v || edge.v == v
                })
                .count()
    }

    pub fn odd_vertices(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.base.vertex_count()];
        for e in self.multiedges() {
            let edge = self.base.edge(e);
            deg[edge.u] += 1;
            deg[edge.v] += 1;
        }
        (0..deg.len()).filter(|&v| deg[v] % 2 == 1).collect()
    }

    pub fn duplicated_cost(&self) -> T {
        self.duplicated_edges.iter().map(|&e| self.base.edge(e).weight).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InspectionRoute<T> {
    pub walk: Vec<usize>,
    pub traversed_edges: Vec<usize>,
    pub total_cost: T,
}

impl<T: Scalar> InspectionRoute<T> {
    /// Checks the route against `g`: consecutive walk vertices joined by the
    /// listed edges, every edge covered, and the cost equal to the replayed
    /// weight sum (relative 1e-9).
    pub fn validate(&self, g: &StructureGraph<T>, v_s: usize, v_t: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.walk.first() != Some(&v_s) || self.walk.last() != Some(&v_t) {
            return bad(format!("walk does not run from {v_s} to {v_t}"));
        }
        if self.walk.len() != self.traversed_edges.len() + 1 {
            return bad("walk and edge list lengths disagree".into());
        }
        let mut covered = vec![false; g.edge_count()];
        let mut cost = T::zero();
        for (k, &e) in self.traversed_edges.iter().enumerate() {
            let Some(edge) = g.edges().get(e) else {
                return bad(format!("unknown edge {e}"));
            };
            let (a, b) = (self.walk[k], self.walk[k + 1]);
            if !((edge.u == a && edge.v == b) || (edge.u == b && edge.v == a)) {
                return bad(format!("edge {e} does not join {a} and {b}"));
            }
            covered[e] = true;
            cost = cost + edge.weight;
        }
        if let Some(e) = covered.iter().position(|c| !c) {
            return bad(format!("edge {e} is never traversed"));
        }
        let tol = T::lit(1e-9) * cost.max(T::one());
        if (cost - self.total_cost).abs() > tol {
            return bad(format!("cost {} disagrees with replay {cost}", self.total_cost));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutePlan<T: Scalar> {
    pub route: InspectionRoute<T>,
    pub augmented: AugmentedGraph<T>,
    pub case: ParityCase,
}

/// Shortest route from `v_s` to `v_t` traversing every edge at least once.
pub fn plan_route<T: Scalar>(g: &StructureGraph<T>, v_s: usize, v_t: usize) -> Result<RoutePlan<T>> {
    g.vertex(v_s)?;
    g.vertex(v_t)?;
    let components = g.components();
    if components.len() > 1 {
        return Err(Error::Disconnected {
            components: components.len(),
        });
    }
    let odd = odd_vertices(g);
    let is_odd = |v: usize| g.degree(v) % 2 == 1;
    let mut sp_cache: HashMap<usize, ShortestPaths<T>> = HashMap::new();
    let mut sp = |v: usize| -> Result<ShortestPaths<T>> {
        if let Some(s) = sp_cache.get(&v) {
            return Ok(s.clone());
        }
        let s = dijkstra(g, v)?;
        sp_cache.insert(v, s.clone());
        Ok(s)
    };
    let mut dup: Vec<usize> = Vec::new();
    let add_path = |dup: &mut Vec<usize>, from: &ShortestPaths<T>, to: usize| {
        let (_, edges) = from.path_to(to).expect("connected graph");
        dup.extend(edges);
    };

    let (case, remaining): (ParityCase, Vec<usize>) = if odd.is_empty() {
        if v_s != v_t {
            add_path(&mut dup, &sp(v_s)?, v_t);
        }
        (ParityCase::NoOdd, Vec::new())
    } else if v_s == v_t {
        (ParityCase::Closed, odd.clone())
    } else {
        match (is_odd(v_s), is_odd(v_t)) {
            (true, true) => (
                ParityCase::BothOdd,
                odd.iter().copied().filter(|&v| v != v_s && v != v_t).collect(),
            ),
            (false, true) => {
                let from = sp(v_s)?;
                let v_c = nearest(&from, odd.iter().copied().filter(|&v| v != v_t));
                add_path(&mut dup, &from, v_c);
                (
                    ParityCase::StartEven,
                    odd.iter().copied().filter(|&v| v != v_t && v != v_c).collect(),
                )
            }
            (true, false) => {
                let from = sp(v_t)?;
                let v_c = nearest(&from, odd.iter().copied().filter(|&v| v != v_s));
                add_path(&mut dup, &from, v_c);
                (
                    ParityCase::EndEven,
                    odd.iter().copied().filter(|&v| v != v_s && v != v_c).collect(),
                )
            }
            (false, false) => {
                let (from_s, from_t) = (sp(v_s)?, sp(v_t)?);
                let mut best: Option<(T, usize, usize)> = None;
                for &c1 in &odd {
                    for &c2 in &odd {
                        if c1 == c2 {
                            continue;
                        }
                        let cost = from_s.dist[c1] + from_t.dist[c2];
                        if best.is_none_or(|(b, _, _)| cost < b) {
                            best = Some((cost, c1, c2));
                        }
                    }
                }
                let (_, c1, c2) = best.expect("odd set has at least two vertices");
                add_path(&mut dup, &from_s, c1);
                add_path(&mut dup, &from_t, c2);
                (
                    ParityCase::BothEven,
                    odd.iter().copied().filter(|&v| v != c1 && v != c2).collect(),
                )
            }
        }
    };

    if !remaining.is_empty() {
        let trees: Vec<ShortestPaths<T>> = remaining.iter().map(|&v| sp(v)).collect::<Result<_>>()?;
        let m = remaining.len();
        let dist: Vec<Vec<T>> = (0..m)
            .map(|a| (0..m).map(|b| trees[a].dist[remaining[b]]).collect())
            .collect();
        for (a, b) in min_weight_perfect_matching(&dist)? {
            add_path(&mut dup, &trees[a], remaining[b]);
        }
    }
    let augmented = AugmentedGraph::new(g.clone(), dup)?;
    let trail = eulerian_trail(&augmented, v_s)?;
    let route = replay(g, v_s, &trail);
    if route.walk.last() != Some(&v_t) {
        return Err(Error::NotEulerian {
            start: v_s,
            reason: format!("trail ends at {:?}, expected {v_t}", route.walk.last()),
        });
    }
    Ok(RoutePlan { route, augmented, case })
}

fn nearest<T: Scalar>(from: &ShortestPaths<T>, candidates: impl Iterator<Item = usize>) -> usize {
    candidates
        .min_by(|&a, &b| {
            from.dist[a]
                .partial_cmp(&from.dist[b])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        })
        .expect("odd vertices come in pairs")
}

fn replay<T: Scalar>(g: &StructureGraph<T>, start: usize, trail: &[usize]) -> InspectionRoute<T> {
    let mut walk = vec![start];
    let mut cur = start;
    let mut total_cost = T::zero();
    for &e in trail {
        let edge = g.edge(e);
        cur = edge.other(cur);
        walk.push(cur);
        total_cost = total_cost + edge.weight;
    }
    InspectionRoute {
        walk,
        traversed_edges: trail.to_vec(),
        total_cost,
    }
}

/// Minimum-cost pairing of an even number of items given a symmetric cost
/// matrix. Exact up to [`EXACT_MATCHING_LIMIT`] items, greedy closest-pair
/// beyond. Pairs are `(a, b)` with `a < b`, sorted.
pub fn min_weight_perfect_matching<T: Scalar>(cost: &[Vec<T>]) -> Result<Vec<(usize, usize)>> {
    let m = cost.len();
    if m % 2 == 1 {
        return Err(Error::InvalidArgument(format!("cannot pair {m} items")));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut pairs = if m <= EXACT_MATCHING_LIMIT {
        exact_matching(cost)
    } else {
        greedy_matching(cost)
    };
    pairs.sort_unstable();
    Ok(pairs)
}

fn exact_matching<T: Scalar>(cost: &[Vec<T>]) -> Vec<(usize, usize)> {
    let m = cost.len();
    let full = (1usize << m) - 1;
    // best[mask]: cheapest pairing of the items in `mask`.
    let mut best = vec![T::infinity(); 1 << m];
    let mut choice = vec![(0usize, 0usize); 1 << m];
    best[0] = T::zero();
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let a = mask.trailing_zeros() as usize;
        for (b, &w) in cost[a].iter().enumerate().take(m).skip(a + 1) {
            if mask & (1 << b) == 0 {
                continue;
            }
            let rest = mask & !(1 << a) & !(1 << b);
            let c = best[rest] + w;
            if c < best[mask] {
                best[mask] = c;
                choice[mask] = (a, b);
            }
        }
    }
    let mut pairs = Vec::with_capacity(m / 2);
    let mut mask = full;
    while mask != 0 {
        let (a, b) = choice[mask];
        pairs.push((a, b));
        mask &= !(1 << a) & !(1 << b);
    }
    pairs
}

fn greedy_matching<T: Scalar>(cost: &[Vec<T>]) -> Vec<(usize, usize)> {
    let m = cost.len();
    let mut candidates: Vec<(T, usize, usize)> = (0..m)
        .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
        .map(|(a, b)| (cost[a][b], a, b))
        .collect();
    candidates.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap_or(Ordering::Equal)
            .then((x.1, x.2).cmp(&(y.1, y.2)))
    });
    let mut used = vec![false; m];
    let mut pairs = Vec::new();
    for (_, a, b) in candidates {
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            pairs.push((a, b));
        }
    }
    pairs
}

/// Eulerian trail over every (multi)edge of `g`, starting at `start`, as
/// base edge ids. At each vertex the unused edge with the lowest id is taken
/// first.
pub fn eulerian_trail<T: Scalar>(g: &AugmentedGraph<T>, start: usize) -> Result<Vec<usize>> {
    let base = &g.base;
    base.vertex(start)?;
    let tokens = g.multiedges();
    if tokens.is_empty() {
        return Ok(Vec::new());
    }
    let odd = g.odd_vertices();
    let fail = |reason: String| Err(Error::NotEulerian { start, reason });
    match odd.len() {
        0 => {}
        2 if odd.contains(&start) => {}
        2 => return fail(format!("odd vertices are {odd:?}")),
        k => return fail(format!("{k} odd vertices")),
    }

    let n = base.vertex_count();
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (t, &e) in tokens.iter().enumerate() {
        let edge = base.edge(e);
        incident[edge.u].push((e, t));
        incident[edge.v].push((e, t));
    }
    for list in &mut incident {
        list.sort_unstable();
    }
    if incident[start].is_empty() {
        return fail("start has no incident edges".into());
    }
    let mut used = vec![false; tokens.len()];
    let mut cursor = vec![0usize; n];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut trail = Vec::with_capacity(tokens.len());
    while let Some(&(v, via)) = stack.last() {
        while cursor[v] < incident[v].len() && used[incident[v][cursor[v]].1] {
            cursor[v] += 1;
        }
        if let Some(&(e, t)) = incident[v].get(cursor[v]) {
            used[t] = true;
            stack.push((base.edge(e).other(v), Some(e)));
        } else {
            stack.pop();
            if let Some(e) = via {
                trail.push(e);
            }
        }
    }
    if trail.len() != tokens.len() {
        return fail("edges are not connected".into());
    }
    trail.reverse();
    Ok(trail)
}

/// Exact minimum cost of a walk from `v_s` to `v_t` covering every edge,
/// by shortest paths over (vertex, covered-edge set) states. Walks longer
/// than `max_traversals` edges are not considered.
pub fn brute_force_ocpp<T: Scalar>(g: &StructureGraph<T>, v_s: usize, v_t: usize, max_traversals: usize) -> Result<T> {
    g.vertex(v_s)?;
    g.vertex(v_t)?;
    let m = g.edge_count();
    if m > BRUTE_FORCE_MAX_EDGES {
        return Err(Error::InvalidArgument(format!(
            "{m} edges exceed the exhaustive search limit of {BRUTE_FORCE_MAX_EDGES}"
        )));
    }
    let full = (1usize << m) - 1;
    let n = g.vertex_count();
    let idx = |v: usize, mask: usize| v * (full + 1) + mask;
    let mut best: Vec<Option<(T, usize)>> = vec![None; n * (full + 1)];
    let mut heap = std::collections::BinaryHeap::new();
    best[idx(v_s, 0)] = Some((T::zero(), 0));
    heap.push(State {
        cost: T::zero(),
        steps: 0,
        vertex: v_s,
        mask: 0,
    });
    while let Some(State {
        cost,
        steps,
        vertex,
        mask,
    }) = heap.pop()
    {
        if best[idx(vertex, mask)] != Some((cost, steps)) {
            continue;
        }
        if vertex == v_t && mask == full {
            return Ok(cost);
        }
        if steps == max_traversals {
            continue;
        }
        for &(e, w) in g.incident(vertex) {
            let next = State {
                cost: cost + g.edge(e).weight,
                steps: steps + 1,
                vertex: w,
                mask: mask | (1 << e),
            };
            let slot = &mut best[idx(w, next.mask)];
            let better = match slot {
                None => true,
                Some((c, s)) => next.cost < *c || (next.cost == *c && next.steps < *s),
            };
            if better {
                *slot = Some((next.cost, next.steps));
                heap.push(next);
            }
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no covering walk from {v_s} to {v_t} within {max_traversals} traversals"
    )))
}

struct State<T> {
    cost: T,
    steps: usize,
    vertex: usize,
    mask: usize,
}

impl<T: Scalar> PartialEq for State<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for State<T> {}
impl<T: Scalar> PartialOrd for State<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Scalar> Ord for State<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then(o.steps.cmp(&self.steps))
            .then(o.vertex.cmp(&self.vertex))
            .then(o.mask.cmp(&self.mask))
    }
}
