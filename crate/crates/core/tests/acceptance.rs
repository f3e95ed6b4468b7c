//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails if any criterion outside `KNOWN_FAILURES` fails.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use bridgenav::boundary::Boundary;
use bridgenav::geometry::{centroid, convex_hull, point_in_polygon_raycast, Point2, Polygon2};
use bridgenav::graph::{StructureGraph, VertexRole};
use bridgenav::pipeline::{
    export_fixture, render_svg, run_on_cloud, run_pipeline, Layer, PipelineConfig, RunArtifacts,
};
use bridgenav::planner::{footprint_samples, pibc_config_free, pibc_point};
use bridgenav::segmentation::{
    em_gmm_fit_traced, segment_structure, selection_ratio, selection_ratio_exact, EmOptions, SegmentOptions,
};
use bridgenav::synth::{generate, LabeledCloud, Shape, StructureSpec};
use bridgenav::vocpp::{brute_force_ocpp, eulerian_trail, plan_route, AugmentedGraph, ParityCase};
use bridgenav::Error;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type P = Point2<f64>;
type Outcome = Result<String, String>;
/// Number, name and check of an acceptance criterion.
type Criterion = (u32, &'static str, fn() -> Outcome);

/// Criteria that do not hold with this implementation; see the README.
const KNOWN_FAILURES: [u32; 2] = [1, 7];

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(shape: Shape, seed: u64) -> LabeledCloud {
    generate(&StructureSpec::new(shape).with_seed(seed)).expect("default fixture")
}

// --- 1: segmentation shape suite -------------------------------------------

fn jaccard(a: &HashSet<usize>, b: &HashSet<usize>) -> f64 {
    a.intersection(b).count() as f64 / a.union(b).count() as f64
}

fn segmentation_shape_suite() -> Outcome {
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;
    for (shape, want) in [(Shape::Cross, 5), (Shape::T, 4), (Shape::K, 4), (Shape::L, 3)] {
        for seed in 1..=3 {
            let g = fixture(shape, seed);
            let t = Instant::now();
            let seg = segment_structure(
                &g.cloud,
                &SegmentOptions {
                    seed,
                    ..Default::default()
                },
            )
            .map_err(|e| format!("{shape:?}/{seed}: {e}"))?;
            let elapsed = t.elapsed();
            slowest = slowest.max(elapsed);
            let tag = format!("{shape:?}/{seed}");
            if seg.n_o != want {
                problems.push(format!("{tag} n_o {} != {want}", seg.n_o));
            }
            let counts = seg.neighbors.neighbor_counts();
            let max = counts.iter().copied().max().unwrap_or(0);
            let tops: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] == max).collect();
            if tops.len() != 1 {
                problems.push(format!("{tag} {} clusters share the max neighbor count", tops.len()));
                continue;
            }
            let cross = g.cross_regions().next().expect("one junction").id;
            let truth: HashSet<usize> = g.members(cross).into_iter().collect();
            let got: HashSet<usize> = seg.clusters.members(tops[0]).into_iter().collect();
            let j = jaccard(&got, &truth);
            if j < 0.8 {
                problems.push(format!("{tag} jaccard {j:.2}"));
            }
            if elapsed > Duration::from_secs(30) {
                problems.push(format!("{tag} took {elapsed:?}"));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("12 runs, slowest {slowest:.1?}"))
    } else {
        Err(problems.join("; "))
    }
}

// --- 2: I-shape tolerance --------------------------------------------------

fn i_shape_tolerance() -> Outcome {
    let g = fixture(Shape::I, 1);
    let cfg = PipelineConfig {
        seed: 1,
        ..Default::default()
    };
    let art = run_on_cloud(&g.cloud, &cfg).map_err(|e| e.to_string())?;
    let graph = art.graph.as_ref().ok_or("no graph")?;
    check(graph.is_connected(), || {
        format!("graph has {} components", graph.components().len())
    })?;
    let route = art.route.as_ref().ok_or("no route")?;
    route
        .route()
        .validate(graph, route.start, route.target)
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{} vertices, {} edges, route of {} steps",
        graph.vertex_count(),
        graph.edge_count(),
        route.edges.len()
    ))
}

// --- 3: EM hygiene ---------------------------------------------------------

fn random_cloud(rng: &mut ChaCha8Rng) -> Vec<P> {
    let blobs = rng.random_range(1..=4);
    let n = rng.random_range(60..300);
    let centers: Vec<(P, f64)> = (0..blobs)
        .map(|_| {
            (
                P::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                rng.random_range(0.05..0.6),
            )
        })
        .collect();
    (0..n)
        .map(|i| {
            let (c, s) = centers[i % blobs];
            c + P::new(rng.random_range(-s..s), rng.random_range(-s..s))
        })
        .collect()
}

fn em_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut steps = 0;
    for cloud_id in 0..50 {
        let pts = random_cloud(&mut rng);
        let k = rng.random_range(2..=6);
        let (fit, trace) = em_gmm_fit_traced(&pts, k, cloud_id, &EmOptions::default())
            .map_err(|e| format!("cloud {cloud_id}: {e}"))?;
        for i in 1..trace.log_likelihood.len() {
            if trace.reseeds.contains(&i) {
                continue;
            }
            let (a, b) = (trace.log_likelihood[i - 1], trace.log_likelihood[i]);
            check(b >= a - 1e-9, || format!("cloud {cloud_id} step {i}: {a} -> {b}"))?;
            steps += 1;
        }
        let (resp, _) = fit.model.responsibilities(&pts);
        for (i, row) in resp.chunks(fit.model.k()).enumerate() {
            let s: f64 = row.iter().sum();
            check((s - 1.0).abs() <= 1e-9, || {
                format!("cloud {cloud_id} row {i} sums to {s}")
            })?;
        }
    }
    Ok(format!("50 clouds, {steps} monotone steps"))
}

// --- 4: selection ratio ----------------------------------------------------

/// (n_m, n_s, n_c) and the expected ratio as a fraction.
type RatioCase = ((usize, usize, usize), (u64, u64));

fn selection_ratio_values() -> Outcome {
    // n_m / (n_m + n_s) + n_m / n_c, evaluated by hand.
    let cases: [RatioCase; 6] = [
        ((4, 1, 5), (8, 5)),
        ((2, 1, 3), (4, 3)),
        ((3, 3, 6), (1, 1)),
        ((1, 0, 2), (3, 2)),
        ((2, 2, 8), (3, 4)),
        ((3, 1, 4), (3, 2)),
    ];
    for ((m, s, c), (num, den)) in cases {
        let exact = selection_ratio_exact(m, s, c).map_err(|e| e.to_string())?;
        check(exact == Ratio::new(num, den), || format!("({m},{s},{c}) gave {exact}"))?;
        let r: f64 = selection_ratio(m, s, c).map_err(|e| e.to_string())?;
        let want = num as f64 / den as f64;
        check((r - want).abs() <= 1e-15, || {
            format!("({m},{s},{c}) gave {r}, want {want}")
        })?;
    }
    let r: f64 = selection_ratio(4, 1, 5).map_err(|e| e.to_string())?;
    check(r == 1.6, || format!("(4,1,5) gave {r}"))?;
    check(
        matches!(selection_ratio::<f64>(0, 0, 3), Err(Error::UndefinedRatio)),
        || "(0,0,3) did not report an undefined ratio".into(),
    )?;
    Ok(format!("{} hand-evaluated values", cases.len()))
}

// --- 5: open postman validity ----------------------------------------------

fn random_connected(rng: &mut ChaCha8Rng, n: usize, max_edges: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (order[rng.random_range(0..i)], order[i])).collect();
    let extra = rng.random_range(0..=max_edges - edges.len());
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            edges.push((u, v));
        }
    }
    edges
}

/// Union of random cycles: every degree even.
fn random_eulerian(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (order[i], order[(i + 1) % n])).collect();
    if n + 3 <= 12 && rng.random_bool(0.5) {
        let mut tri: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            tri.swap(i, rng.random_range(0..=i));
        }
        edges.extend([(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]);
    }
    edges
}

fn degrees(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut d = vec![0; n];
    for &(u, v) in edges {
        d[u] += 1;
        d[v] += 1;
    }
    d
}

/// Endpoints putting `edges` in parity case `want`, if any.
fn endpoints_for(rng: &mut ChaCha8Rng, n: usize, edges: &[(usize, usize)], want: ParityCase) -> Option<(usize, usize)> {
    let d = degrees(n, edges);
    let odd: Vec<usize> = (0..n).filter(|&v| d[v] % 2 == 1).collect();
    let even: Vec<usize> = (0..n).filter(|&v| d[v].is_multiple_of(2)).collect();
    let pick = |rng: &mut ChaCha8Rng, from: &[usize]| from[rng.random_range(0..from.len())];
    let distinct = |rng: &mut ChaCha8Rng, from: &[usize]| -> Option<(usize, usize)> {
        if from.len() < 2 {
            return None;
        }
        let a = pick(rng, from);
        loop {
            let b = pick(rng, from);
            if b != a {
                return Some((a, b));
            }
        }
    };
    match want {
        ParityCase::NoOdd if odd.is_empty() => distinct(rng, &even),
        ParityCase::BothOdd => distinct(rng, &odd),
        ParityCase::StartEven if !odd.is_empty() && !even.is_empty() => Some((pick(rng, &even), pick(rng, &odd))),
        ParityCase::EndEven if !odd.is_empty() && !even.is_empty() => Some((pick(rng, &odd), pick(rng, &even))),
        ParityCase::BothEven if !odd.is_empty() => distinct(rng, &even),
        _ => None,
    }
}

fn unit_graph(n: usize, edges: &[(usize, usize)]) -> StructureGraph<f64> {
    let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    StructureGraph::from_weighted_edges(n, &e).expect("valid fixture")
}

fn vocpp_validity() -> Outcome {
    let t = Instant::now();
    let cases = [
        ParityCase::NoOdd,
        ParityCase::BothOdd,
        ParityCase::StartEven,
        ParityCase::EndEven,
        ParityCase::BothEven,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut graphs = 0;
    while graphs < 200 {
        let want = cases[graphs % cases.len()];
        let n = rng.random_range(3..=8);
        let edges = if want == ParityCase::NoOdd {
            random_eulerian(&mut rng, n)
        } else {
            random_connected(&mut rng, n, 12)
        };
        let Some((s, t)) = endpoints_for(&mut rng, n, &edges, want) else {
            continue;
        };
        let weighted: Vec<_> = edges
            .iter()
            .map(|&(u, v)| (u, v, rng.random_range(1..=9) as f64))
            .collect();
        let g = StructureGraph::from_weighted_edges(n, &weighted).map_err(|e| e.to_string())?;
        let plan = plan_route(&g, s, t).map_err(|e| format!("graph {graphs}: {e}"))?;
        check(plan.case == want, || {
            format!("graph {graphs}: case {:?}, want {want:?}", plan.case)
        })?;
        plan.route
            .validate(&g, s, t)
            .map_err(|e| format!("graph {graphs}: {e}"))?;
        let optimum = brute_force_ocpp(&g, s, t, 2 * g.edge_count() + 1).map_err(|e| e.to_string())?;
        check(plan.route.total_cost >= optimum - 1e-9, || {
            format!("graph {graphs}: cost {} below optimum {optimum}", plan.route.total_cost)
        })?;
        *seen.entry(format!("{want:?}")).or_default() += 1;
        graphs += 1;
    }
    check(seen.len() == cases.len(), || format!("cases covered: {seen:?}"))?;

    let curated = [
        ("path", unit_graph(3, &[(0, 1), (1, 2)])),
        ("C4", unit_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])),
        ("K4", unit_graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])),
        (
            "bowtie",
            unit_graph(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]),
        ),
        (
            "grid",
            unit_graph(6, &[(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]),
        ),
    ];
    let mut pairs = 0;
    for (name, g) in &curated {
        for s in 0..g.vertex_count() {
            for t in 0..g.vertex_count() {
                let plan = plan_route(g, s, t).map_err(|e| format!("{name} {s}->{t}: {e}"))?;
                plan.route
                    .validate(g, s, t)
                    .map_err(|e| format!("{name} {s}->{t}: {e}"))?;
                let optimum = brute_force_ocpp(g, s, t, 2 * g.edge_count() + 1).map_err(|e| e.to_string())?;
                check(plan.route.total_cost == optimum, || {
                    format!("{name} {s}->{t}: cost {} vs optimum {optimum}", plan.route.total_cost)
                })?;
                pairs += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "200 random graphs {seen:?}, {pairs} curated pairs at optimum, {elapsed:.1?}"
    ))
}

// --- 6: Eulerian trails ----------------------------------------------------

fn eulerian_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut trails, mut rejections) = (0, 0);
    for i in 0..100 {
        let n = rng.random_range(2..=8);
        let edges = random_connected(&mut rng, n, 12);
        let g = unit_graph(n, &edges);
        let dups: Vec<usize> = (0..rng.random_range(0..=4))
            .map(|_| rng.random_range(0..edges.len()))
            .collect();
        let mut all = edges.clone();
        all.extend(dups.iter().map(|&e| edges[e]));
        let d = degrees(n, &all);
        let odd: Vec<usize> = (0..n).filter(|&v| d[v] % 2 == 1).collect();
        let start = if !odd.is_empty() && rng.random_bool(0.5) {
            odd[rng.random_range(0..odd.len())]
        } else {
            rng.random_range(0..n)
        };
        let feasible = odd.is_empty() || (odd.len() == 2 && odd.contains(&start));
        let aug = AugmentedGraph::new(g.clone(), dups.clone()).map_err(|e| e.to_string())?;
        match eulerian_trail(&aug, start) {
            Ok(trail) => {
                check(feasible, || {
                    format!("graph {i}: trail from {start} despite odd set {odd:?}")
                })?;
                let mut want: Vec<usize> = (0..edges.len()).chain(dups.iter().copied()).collect();
                let mut got = trail.clone();
                want.sort_unstable();
                got.sort_unstable();
                check(got == want, || format!("graph {i}: edges {got:?}, want {want:?}"))?;
                let mut at = start;
                for &e in &trail {
                    let (u, v) = edges[e];
                    at = match at {
                        x if x == u => v,
                        x if x == v => u,
                        _ => return Err(format!("graph {i}: edge {e} does not leave {at}")),
                    };
                }
                trails += 1;
            }
            Err(Error::NotEulerian { .. }) => {
                check(!feasible, || format!("graph {i}: rejected a feasible start {start}"))?;
                rejections += 1;
            }
            Err(e) => return Err(format!("graph {i}: {e}")),
        }
    }
    Ok(format!("{trails} trails replayed, {rejections} rejected"))
}

// --- 7: PIBC vs ray casting ------------------------------------------------

fn boundary(poly: Polygon2<f64>, spacing: f64) -> Boundary<f64> {
    let polygon = poly.densified(spacing);
    let center = centroid(polygon.vertices()).expect("non-empty");
    Boundary {
        cluster_id: 0,
        polygon,
        center,
        sliding_factor: 0,
        axis: None,
    }
}

fn radial(f: impl Fn(f64) -> f64, n: usize) -> Polygon2<f64> {
    let ring = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            P::new(f(a) * a.cos(), f(a) * a.sin())
        })
        .collect();
    Polygon2::new(ring).expect("radial outline")
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon2<f64> {
    Polygon2::new(vec![P::new(x0, y0), P::new(x1, y0), P::new(x1, y1), P::new(x0, y1)]).expect("rect")
}

struct Agreement {
    agree: usize,
    permissive: usize,
    conservative: usize,
    /// Largest margin of a disagreeing point, in vertex spacings.
    worst_margin: f64,
}

/// Compares the two tests on random points at least two vertex spacings
/// from the outline.
fn compare(b: &Boundary<f64>, spacing: f64, rng: &mut ChaCha8Rng) -> Agreement {
    let (lo, hi) = b.polygon.bounds();
    let pad = 0.2 * (hi.x - lo.x).max(hi.y - lo.y);
    let mut a = Agreement {
        agree: 0,
        permissive: 0,
        conservative: 0,
        worst_margin: 0.0,
    };
    while a.agree + a.permissive + a.conservative < 4000 {
        let p = P::new(
            rng.random_range(lo.x - pad..hi.x + pad),
            rng.random_range(lo.y - pad..hi.y + pad),
        );
        let margin = b.polygon.distance_to_boundary(p);
        if margin < 2.0 * spacing {
            continue;
        }
        match (pibc_point(p, b, 5), point_in_polygon_raycast(p, &b.polygon)) {
            (x, y) if x == y => {
                a.agree += 1;
                continue;
            }
            (true, false) => a.permissive += 1,
            _ => a.conservative += 1,
        }
        a.worst_margin = a.worst_margin.max(margin / spacing);
    }
    a
}

fn pibc_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spacing = 0.01;
    let hull_pts: Vec<P> = (0..25)
        .map(|_| P::new(rng.random_range(-1.0..1.0), rng.random_range(-0.6..0.6)))
        .collect();
    let convex = [
        ("square", rect(0.0, 0.0, 1.0, 1.0)),
        ("bar", rect(0.0, 0.0, 2.0, 0.3)),
        ("hexagon", radial(|_| 0.5, 6)),
        ("hull", Polygon2::new(convex_hull(&hull_pts)).expect("hull")),
    ];
    let mut report = Vec::new();
    let mut problems = Vec::new();
    for (name, poly) in convex {
        let b = boundary(poly, spacing);
        let a = compare(&b, spacing, &mut rng);
        if a.permissive + a.conservative > 0 {
            problems.push(format!(
                "{name}: {} permissive, {} conservative (worst at {:.2} spacings)",
                a.permissive, a.conservative, a.worst_margin
            ));
        }
        report.push(format!(
            "{name} {}/{}",
            a.agree,
            a.agree + a.permissive + a.conservative
        ));
    }
    let plus = Polygon2::new(vec![
        P::new(-0.15, -1.0),
        P::new(0.15, -1.0),
        P::new(0.15, -0.15),
        P::new(1.0, -0.15),
        P::new(1.0, 0.15),
        P::new(0.15, 0.15),
        P::new(0.15, 1.0),
        P::new(-0.15, 1.0),
        P::new(-0.15, 0.15),
        P::new(-1.0, 0.15),
        P::new(-1.0, -0.15),
        P::new(-0.15, -0.15),
    ])
    .expect("plus");
    let star = [
        ("flower", radial(|a| 0.5 * (1.0 + 0.25 * (5.0 * a).cos()), 720)),
        ("plus", plus),
        (
            "blob",
            radial(|a| 0.6 + 0.1 * (3.0 * a).sin() + 0.05 * (7.0 * a).cos(), 720),
        ),
    ];
    for (name, poly) in star {
        let b = boundary(poly, spacing);
        let a = compare(&b, spacing, &mut rng);
        let total = a.agree + a.permissive + a.conservative;
        let rate = a.agree as f64 / total as f64;
        if a.permissive > 0 {
            problems.push(format!("{name}: {} permissive disagreements", a.permissive));
        }
        if rate < 0.99 {
            problems.push(format!("{name}: agreement {:.2}%", 100.0 * rate));
        }
        report.push(format!("{name} {}/{total}", a.agree));
    }
    if problems.is_empty() {
        Ok(report.join(", "))
    } else {
        Err(format!("{} [{}]", problems.join("; "), report.join(", ")))
    }
}

// --- 8: planner soundness --------------------------------------------------

fn replay_paths(art: &RunArtifacts, cfg: &PipelineConfig, truth: &LabeledCloud) -> Result<usize, String> {
    let boundaries = art.planning_boundaries.as_ref().ok_or("no planning boundaries")?;
    let paths = art.paths.as_ref().ok_or("no paths")?;
    let pibc = cfg.rrt_options().pibc;
    let mut n = 0;
    for p in paths {
        for c in &p.waypoints {
            check(pibc_config_free(c, &cfg.robot, boundaries, pibc), || {
                format!("edge {}: {c:?} fails the center-closest check", p.edge_id)
            })?;
            for q in footprint_samples(c, &cfg.robot) {
                let in_boundary = boundaries.iter().any(|b| point_in_polygon_raycast(q, &b.polygon));
                let in_structure = truth.regions.iter().any(|r| point_in_polygon_raycast(q, &r.polygon));
                check(in_boundary && in_structure, || {
                    format!("edge {}: footprint point {q:?} of {c:?} is outside", p.edge_id)
                })?;
            }
            n += 1;
        }
    }
    Ok(n)
}

/// Edges of the branch hanging off the junction center towards `cluster`.
fn branch_edges(g: &StructureGraph<f64>, junction: usize, cluster: usize) -> Vec<usize> {
    let seed = g
        .vertices()
        .iter()
        .find(|v| v.cluster == cluster)
        .map(|v| v.id)
        .expect("narrow bar has vertices");
    let mut inside = vec![false; g.vertex_count()];
    let mut stack = vec![seed];
    inside[seed] = true;
    while let Some(v) = stack.pop() {
        for &(_, w) in g.incident(v) {
            if w != junction && !inside[w] {
                inside[w] = true;
                stack.push(w);
            }
        }
    }
    g.edges()
        .iter()
        .filter(|e| inside[e.u] || inside[e.v])
        .map(|e| e.id)
        .collect()
}

fn planner_soundness() -> Outcome {
    let truth = fixture(Shape::L, 1);
    let cfg = PipelineConfig::default();
    let art = run_on_cloud(&truth.cloud, &cfg).map_err(|e| e.to_string())?;
    check(art.diagnostics.untraversable_edges.is_empty(), || {
        format!("L run: untraversable {:?}", art.diagnostics.untraversable_edges)
    })?;
    let waypoints = replay_paths(&art, &cfg, &truth)?;

    // T junction whose stem is narrower than the robot. Ground-truth labels
    // keep segmentation out of the picture; l_b is below the narrow width so
    // the stem still joins the graph.
    let mut spec = StructureSpec::new(Shape::T).with_seed(2);
    spec.bar_widths = Some(vec![0.3, 0.3, 0.1]);
    let narrow = generate(&spec).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig {
        l_b: Some(0.05),
        ..Default::default()
    };
    let mut art =
        RunArtifacts::from_labels(narrow.cloud.points.clone(), &narrow.labels, &cfg).map_err(|e| e.to_string())?;
    art.run_from_segmentation(&cfg).map_err(|e| e.to_string())?;
    let g = art.graph.as_ref().ok_or("no graph")?;
    let stem = narrow.regions.len() - 1;
    let junction = g
        .vertices()
        .iter()
        .find(|v| v.role == VertexRole::Center && v.cluster == 0)
        .ok_or("no junction center")?
        .id;
    let want = branch_edges(g, junction, stem);
    check(art.diagnostics.untraversable_edges == want, || {
        format!(
            "narrow stem: untraversable {:?}, want {want:?}",
            art.diagnostics.untraversable_edges
        )
    })?;
    replay_paths(&art, &cfg, &narrow)?;
    Ok(format!(
        "L: {waypoints} waypoints replayed; narrow stem: edges {want:?} untraversable"
    ))
}

// --- 9: determinism --------------------------------------------------------

fn snapshot(dir: &std::path::Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        out.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn run_and_render(cloud: &std::path::Path, config: &std::path::Path, out: &std::path::Path) -> Result<(), String> {
    let art = run_pipeline(cloud, Some(config), out).map_err(|e| e.to_string())?;
    for layer in Layer::ALL {
        let svg = render_svg(&art, layer).map_err(|e| e.to_string())?;
        std::fs::write(out.join(format!("{}.svg", layer.name())), svg).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    export_fixture(&fixture(Shape::Cross, 1), tmp.path()).map_err(|e| e.to_string())?;
    let config = tmp.path().join("config.json");
    std::fs::write(&config, r#"{"seed": 42}"#).map_err(|e| e.to_string())?;
    let cloud = tmp.path().join("cloud.csv");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_and_render(&cloud, &config, &a)?;
    run_and_render(&cloud, &config, &b)?;
    let (sa, sb) = (snapshot(&a)?, snapshot(&b)?);
    check(sa.keys().eq(sb.keys()), || {
        format!("file sets differ: {:?} vs {:?}", sa.keys(), sb.keys())
    })?;
    for (name, bytes) in &sa {
        check(sb[name] == *bytes, || format!("{name} differs between runs"))?;
    }
    let json = sa.keys().filter(|k| k.ends_with(".json")).count();
    let svg = sa.keys().filter(|k| k.ends_with(".svg")).count();
    Ok(format!("{json} JSON and {svg} SVG files byte-identical"))
}

// --- 10: end-to-end runtime ------------------------------------------------

fn end_to_end_runtime() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("config.json");
    std::fs::write(&config, "{}").map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for shape in Shape::ALL {
        let dir = tmp.path().join(shape.name());
        export_fixture(&fixture(shape, 1), &dir).map_err(|e| e.to_string())?;
        let t = Instant::now();
        run_and_render(&dir.join("cloud.csv"), &config, &dir.join("out"))?;
        let elapsed = t.elapsed();
        check(elapsed < Duration::from_secs(60), || {
            format!("{shape:?} took {elapsed:?}")
        })?;
        report.push(format!("{} {elapsed:.1?}", shape.name()));
    }
    Ok(report.join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "segmentation shape suite", segmentation_shape_suite),
        (2, "I-shape tolerance", i_shape_tolerance),
        (3, "EM hygiene", em_hygiene),
        (4, "selection ratio values", selection_ratio_values),
        (5, "open postman validity", vocpp_validity),
        (6, "Eulerian correctness", eulerian_correctness),
        (7, "PIBC vs ray casting", pibc_vs_oracle),
        (8, "planner soundness", planner_soundness),
        (9, "determinism", determinism),
        (10, "end-to-end runtime", end_to_end_runtime),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({elapsed:.1?}): {detail}"),
            Err(detail) => {
                let known = KNOWN_FAILURES.contains(&id);
                let tag = if known { " [known]" } else { "" };
                println!("criterion {id:>2} FAIL{tag}  {name} ({elapsed:.1?}): {detail}");
                if !known {
                    unexpected.push(id);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
