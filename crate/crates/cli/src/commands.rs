use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use kdecluster::document::{ClusterDocument, GeometrySpace, RunParams};
use kdecluster::grid::{auto_viewport, bin_points, smooth};
use kdecluster::ingest::{read_density_dump, read_points, write_density_dump, Ingested};
use kdecluster::labeling::{assign_documents, ctfidf_labels, emit_sql_predicate, tokenize};
use kdecluster::{cluster_density_map, ClusterId, Error};

use crate::bench::{format_table, run_bench, DEFAULT_POINTS, DEFAULT_SIZES};
use crate::config::{ConfigArgs, RunConfig};
use crate::error::{CliError, CliResult};
use crate::svg::render_svg;

#[derive(Debug, Parser)]
#[command(name = "kdecluster", version, about = "Density-map clustering for 2D embedding projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a CSV/JSONL point file into a cluster JSON document.
    Cluster {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Also write the density map (u32 width, u32 height, f32 values, little endian).
        #[arg(long, value_name = "PATH")]
        density_dump: Option<PathBuf>,
    },
    /// Render a cluster JSON document (--input) as SVG.
    Render {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Density dump drawn under the clusters.
        #[arg(long, value_name = "PATH")]
        underlay: Option<PathBuf>,
    },
    /// Label clusters with c-TF-IDF terms from the text column of --input.
    Label {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Cluster JSON produced by `cluster`.
        #[arg(long, value_name = "PATH")]
        clusters: PathBuf,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        /// Write the cluster document with labels filled in instead of a label list.
        #[arg(long)]
        merge: bool,
    },
    /// Print the SQL WHERE predicate selecting one cluster's rows.
    Sql {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        cluster_id: u32,
    },
    /// Time KDE and clustering on seeded synthetic mixtures.
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Grid side lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Synthetic points per grid.
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn read_document(path: &Path) -> CliResult<ClusterDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ClusterDocument::from_json(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn ingest(cfg: &RunConfig, require_text: bool) -> CliResult<Ingested> {
    let path = cfg.input_path()?;
    let ingested = read_points(BufReader::new(open(path)?), cfg.input_format(), &cfg.columns(require_text))
        .map_err(|e| match e {
            Error::Io(io) => CliError::io(path, io),
            e => CliError::from(e).with_context(path),
        })?;
    if !ingested.malformed.is_empty() {
        eprintln!(
            "warning: skipped {} malformed row(s), first at line {}",
            ingested.malformed.len(),
            ingested.malformed[0].0
        );
    }
    Ok(ingested)
}

impl CliError {
    fn with_context(self, path: &Path) -> Self {
        let p = path.display();
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{p}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{p}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{p}: {m}")),
        }
    }
}

/// Runs a parsed command. Returns the summary line for stderr, if any.
pub fn run(cli: Cli) -> CliResult<Option<String>> {
    match cli.command {
        Command::Cluster { cfg, density_dump } => {
            let mut cfg = RunConfig::resolve(&cfg)?;
            if density_dump.is_some() {
                cfg.density_dump = density_dump;
            }
            cmd_cluster(&cfg).map(Some)
        }
        Command::Render { cfg, underlay } => cmd_render(&RunConfig::resolve(&cfg)?, underlay.as_deref()).map(|_| None),
        Command::Label {
            cfg,
            clusters,
            top_k,
            merge,
        } => cmd_label(&RunConfig::resolve(&cfg)?, &clusters, top_k, merge).map(|_| None),
        Command::Sql { cfg, cluster_id } => cmd_sql(&RunConfig::resolve(&cfg)?, cluster_id).map(|_| None),
        Command::Bench {
            cfg,
            sizes,
            repeats,
            points,
        } => cmd_bench(&RunConfig::resolve(&cfg)?, &sizes, repeats, points).map(|_| None),
    }
}

pub fn cmd_cluster(cfg: &RunConfig) -> CliResult<String> {
    let ingested = ingest(cfg, false)?;
    let viewport = auto_viewport(&ingested.points, cfg.width, cfg.height, cfg.padding)?;

    let kde_start = Instant::now();
    let counts = bin_points(&ingested.points, &viewport)?.counts;
    let density = smooth(&counts, cfg.bandwidth_px())?;
    let kde_ms = kde_start.elapsed().as_secs_f64() * 1e3;

    let params = cfg.cluster_params();
    let cluster_start = Instant::now();
    let clustering = cluster_density_map(&density, &params)?;
    let cluster_ms = cluster_start.elapsed().as_secs_f64() * 1e3;

    let space = if cfg.pixel_space {
        GeometrySpace::Pixel
    } else {
        GeometrySpace::Data
    };
    let run = RunParams {
        bandwidth_px: cfg.bandwidth_px(),
        cluster: params,
    };
    let doc = ClusterDocument::build(viewport, run, &clustering, cfg.palette, space)?;
    let mut json = doc.to_json()?;
    json.push('\n');
    write_output(cfg.output.as_deref(), json.as_bytes())?;

    if let Some(path) = &cfg.density_dump {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        write_density_dump(BufWriter::new(file), &density).map_err(|e| match e {
            Error::Io(io) => CliError::io(path, io),
            e => e.into(),
        })?;
    }
    Ok(format!(
        "clusters={} pixels={} kde_ms={:.1} cluster_ms={:.1}",
        clustering.len(),
        viewport.len(),
        kde_ms,
        cluster_ms
    ))
}

pub fn cmd_render(cfg: &RunConfig, underlay: Option<&Path>) -> CliResult<()> {
    let doc = read_document(cfg.input_path()?)?;
    let density = match underlay {
        Some(path) => {
            let d = read_density_dump(BufReader::new(open(path)?)).map_err(|e| match e {
                Error::Io(io) => CliError::io(path, io),
                e => CliError::from(e).with_context(path),
            })?;
            if (d.width(), d.height()) != (doc.viewport.width, doc.viewport.height) {
                return Err(CliError::Data(format!(
                    "{}: underlay is {}x{} but the clusters are on a {}x{} grid",
                    path.display(),
                    d.width(),
                    d.height(),
                    doc.viewport.width,
                    doc.viewport.height
                )));
            }
            Some(d)
        }
        None => None,
    };
    let svg = render_svg(&doc, cfg.palette, density.as_ref());
    write_output(cfg.output.as_deref(), svg.as_bytes())
}

pub fn cmd_label(cfg: &RunConfig, clusters: &Path, top_k: usize, merge: bool) -> CliResult<()> {
    let mut doc = read_document(clusters)?;
    let ingested = ingest(cfg, true)?;
    let tokens: Vec<Vec<String>> = ingested
        .points
        .iter()
        .map(|p| p.text.as_deref().map(tokenize).unwrap_or_default())
        .collect();
    let assignment = assign_documents(&ingested.points, &doc.data_shapes(), &doc.viewport);
    let labels = ctfidf_labels(&assignment, &tokens, top_k)?;

    let mut json = if merge {
        for label in labels {
            if let Some(c) = doc.clusters.iter_mut().find(|c| c.id == label.cluster_id) {
                c.label = Some(label.top_terms);
            }
        }
        doc.to_json()?
    } else {
        serde_json::to_string_pretty(&labels).map_err(|e| CliError::Data(e.to_string()))?
    };
    json.push('\n');
    write_output(cfg.output.as_deref(), json.as_bytes())
}

pub fn cmd_sql(cfg: &RunConfig, cluster_id: u32) -> CliResult<()> {
    let doc = read_document(cfg.input_path()?)?;
    let shape = doc
        .data_shapes()
        .into_iter()
        .find(|s| s.cluster_id == ClusterId(cluster_id))
        .ok_or(Error::ClusterNotFound(cluster_id))?;
    let mut predicate = emit_sql_predicate(&shape, &cfg.x_col, &cfg.y_col)?;
    predicate.push('\n');
    write_output(cfg.output.as_deref(), predicate.as_bytes())
}

pub fn cmd_bench(cfg: &RunConfig, sizes: &[usize], repeats: usize, points: usize) -> CliResult<()> {
    let report = run_bench(sizes, repeats, points, cfg.seed, &cfg.cluster_params())?;
    print!("{}", format_table(&report));
    if let Some(path) = &cfg.output {
        let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
        json.push('\n');
        write_output(Some(path), json.as_bytes())?;
    }
    Ok(())
}
