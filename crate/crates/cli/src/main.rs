//! `bridgenav`: run the navigation pipeline stage by stage or end to end.
//!
//! Exit status: 0 ok, 1 the run finished with diagnostics (or a stage could
//! not complete), 2 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bridgenav::pipeline::{export_fixture, io, render_svg, Layer, PipelineConfig, RunArtifacts};
use bridgenav::synth::{generate, Shape, StructureSpec};
use bridgenav::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bridgenav",
    version,
    about = "Navigation planning on steel-bridge point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a cloud (CSV or ASCII PLY) into clusters and boundaries.
    Segment {
        cloud: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Artifact directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the structure graph from segmentation artifacts.
    Graph {
        /// Artifact directory to read.
        artifacts: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Where to write; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan the inspection route over the graph.
    Route {
        artifacts: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan robot paths along the route.
    Plan {
        artifacts: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage and render every layer.
    Run {
        cloud: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render artifact layers as SVG.
    Render {
        artifacts: PathBuf,
        /// segmentation, boundaries, graph, route or path; all present
        /// layers when omitted.
        #[arg(long)]
        layer: Option<Layer>,
        /// Output directory; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic fixture (cloud.csv and truth.json).
    Synth {
        /// cross, t, k, l or i.
        shape: Shape,
        /// JSON structure spec; `shape` and `--seed` override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(common: &Common) -> Result<PipelineConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::Parse { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::MissingLayer(_)
            | Error::InvalidSpec(_)
            | Error::TooFewPoints { .. }
            | Error::UnknownVertex(_)
    )
}

/// Writes `<layer>.svg` for each of `layers`; absent layers are skipped
/// unless `strict`.
fn render_layers(art: &RunArtifacts, layers: &[Layer], dir: &Path, strict: bool) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for &layer in layers {
        let svg = match render_svg(art, layer) {
            Ok(svg) => svg,
            Err(Error::MissingLayer(_)) if !strict => continue,
            Err(e) => return Err(e),
        };
        let path = dir.join(format!("{}.svg", layer.name()));
        std::fs::write(path, svg)?;
    }
    Ok(())
}

fn finish(art: &RunArtifacts, out: &Path) -> Result<ExitCode, Error> {
    art.save(out)?;
    let d = &art.diagnostics;
    if let Some(e) = &d.route_error {
        eprintln!("route: {e}");
    }
    if !d.failed_clusters.is_empty() {
        eprintln!("clusters without a boundary: {:?}", d.failed_clusters);
    }
    if !d.untraversable_edges.is_empty() {
        eprintln!("untraversable edges: {:?}", d.untraversable_edges);
    }
    Ok(if d.has_issues() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn stage(
    artifacts: &Path,
    out: Option<&PathBuf>,
    common: &Common,
    f: impl FnOnce(&mut RunArtifacts, &PipelineConfig) -> Result<(), Error>,
) -> Result<ExitCode, Error> {
    let cfg = load_config(common)?;
    let mut art = RunArtifacts::load(artifacts)?;
    f(&mut art, &cfg)?;
    finish(&art, out.map_or(artifacts, |p| p.as_path()))
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Segment { cloud, common, out } => {
            let cfg = load_config(&common)?;
            let cloud = io::read_cloud(&cloud)?;
            let mut art = RunArtifacts::default();
            art.segment(&cloud, &cfg)?;
            finish(&art, &out)
        }
        Command::Graph { artifacts, common, out } => stage(&artifacts, out.as_ref(), &common, |a, c| a.build_graph(c)),
        Command::Route { artifacts, common, out } => stage(&artifacts, out.as_ref(), &common, |a, c| a.route(c)),
        Command::Plan { artifacts, common, out } => stage(&artifacts, out.as_ref(), &common, |a, c| a.plan(c)),
        Command::Run { cloud, common, out } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let cloud = io::read_cloud(&cloud)?;
            let mut art = RunArtifacts::default();
            art.segment(&cloud, &cfg)?;
            art.run_from_segmentation(&cfg)?;
            let code = finish(&art, &out)?;
            render_layers(&art, &Layer::ALL, &out, false)?;
            Ok(code)
        }
        Command::Render { artifacts, layer, out } => {
            let art = RunArtifacts::load(&artifacts)?;
            let dir = out.unwrap_or(artifacts);
            match layer {
                Some(layer) => render_layers(&art, &[layer], &dir, true)?,
                None => render_layers(&art, &Layer::ALL, &dir, false)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            shape,
            config,
            seed,
            out,
        } => {
            let mut spec = match config {
                Some(p) => load_spec(&p)?,
                None => StructureSpec::default(),
            };
            spec.shape = shape;
            if let Some(s) = seed {
                spec.seed = s;
            }
            export_fixture(&generate(&spec)?, &out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_spec(path: &Path) -> Result<StructureSpec, Error> {
    let text = std::fs::read_to_string(path)?;
    StructureSpec::from_json(&text).map_err(|e| match e {
        Error::InvalidSpec(m) => Error::InvalidSpec(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_input_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
