use bridgenav::cloud::PointCloud2D;
use bridgenav::geometry::Point2;
use bridgenav::pipeline::{render_svg, run_on_cloud, Layer, PipelineConfig, RunArtifacts};
use bridgenav::synth::{generate, LabeledCloud, Shape, StructureSpec};
use bridgenav::Error;

fn fixture(shape: Shape, seed: u64) -> LabeledCloud {
    generate(&StructureSpec {
        shape,
        seed,
        ..Default::default()
    })
    .unwrap()
}

fn seeded(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        ..Default::default()
    }
}

#[test]
fn cross_runs_clean_end_to_end() {
    let art = run_on_cloud(&fixture(Shape::Cross, 1).cloud, &seeded(1)).unwrap();
    assert_eq!(art.diagnostics.n_o, Some(5));
    let g = art.graph.as_ref().unwrap();
    assert!(g.is_connected());
    let r = art.route.as_ref().unwrap();
    r.route().validate(g, r.start, r.target).unwrap();
    assert!(!art.diagnostics.has_issues(), "{:?}", art.diagnostics);
    let paths = art.paths.as_ref().unwrap();
    assert_eq!(paths.len(), r.edges.len());
    assert!(paths.iter().all(|p| !p.waypoints.is_empty()));
}

#[test]
fn clouds_smaller_than_n_max_are_rejected() {
    let points = (0..10).map(|i| Point2::new(i as f64 * 0.1, 0.0)).collect();
    let cfg = PipelineConfig {
        n_max: 20,
        ..Default::default()
    };
    let err = run_on_cloud(&PointCloud2D::new(points), &cfg).unwrap_err();
    assert!(
        matches!(err.root(), Error::TooFewPoints { needed: 20, got: 10 }),
        "{err}"
    );
    assert!(err.to_string().starts_with("segment stage"), "{err}");
}

#[test]
fn artifacts_round_trip_through_json() {
    let art = run_on_cloud(&fixture(Shape::L, 1).cloud, &seeded(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    art.save(dir.path()).unwrap();
    let back = RunArtifacts::load(dir.path()).unwrap();
    assert_eq!(back, art);
    // Rendering the reloaded run gives the same pictures.
    for layer in Layer::ALL {
        assert_eq!(render_svg(&back, layer).unwrap(), render_svg(&art, layer).unwrap());
    }
}

#[test]
fn stages_resume_from_saved_artifacts() {
    let cfg = seeded(1);
    let mut first = RunArtifacts::default();
    first.segment(&fixture(Shape::T, 1).cloud, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    first.save(dir.path()).unwrap();

    let mut resumed = RunArtifacts::load(dir.path()).unwrap();
    resumed.build_graph(&cfg).unwrap();
    resumed.route(&cfg).unwrap();
    first.run_from_segmentation(&cfg).unwrap();
    assert_eq!(resumed.graph, first.graph);
    assert_eq!(resumed.route, first.route);
}

#[test]
fn route_svg_draws_one_arrow_per_step() {
    let art = run_on_cloud(&fixture(Shape::Cross, 1).cloud, &seeded(1)).unwrap();
    let svg = render_svg(&art, Layer::Route).unwrap();
    let steps = svg.matches(r#"class="route-step""#).count();
    assert_eq!(steps, art.route.as_ref().unwrap().edges.len());
    assert!(svg.contains(r#"marker-end="url(#arrow)""#));
}

#[test]
fn missing_layers_are_reported() {
    let mut art = RunArtifacts::default();
    assert!(matches!(render_svg(&art, Layer::Graph), Err(Error::MissingLayer(_))));
    let err = art.build_graph(&PipelineConfig::default()).unwrap_err();
    assert!(matches!(err.root(), Error::MissingLayer(_)), "{err}");
    let err = art.plan(&PipelineConfig::default()).unwrap_err();
    assert!(matches!(err.root(), Error::MissingLayer(_)), "{err}");
}

#[test]
fn empty_directory_loads_as_empty_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(RunArtifacts::load(dir.path()).unwrap(), RunArtifacts::default());
}
