//! Run configuration: JSON config file values overridden by flags.

use std::path::{Path, PathBuf};

use clap::Args;
use kdecluster::grid::default_bandwidth;
use kdecluster::ingest::{Columns, InputFormat};
use kdecluster::{ClusterParams, Connectivity};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::svg::PALETTE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub format: Option<InputFormat>,
    pub x_col: String,
    pub y_col: String,
    pub weight_col: Option<String>,
    pub text_col: Option<String>,
    pub width: usize,
    pub height: usize,
    /// Gaussian sigma in pixels; defaults to 1% of the larger grid side.
    pub bandwidth: Option<f64>,
    /// Viewport padding as a fraction of the data span per side.
    pub padding: f64,
    pub truncation_ratio: f64,
    pub merge_distance: f64,
    pub min_peak_density: f64,
    pub connectivity: Connectivity,
    pub palette: usize,
    pub output: Option<PathBuf>,
    pub density_dump: Option<PathBuf>,
    pub pixel_space: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cluster = ClusterParams::default();
        Self {
            input: None,
            format: None,
            x_col: "x".into(),
            y_col: "y".into(),
            weight_col: None,
            text_col: None,
            width: 1000,
            height: 1000,
            bandwidth: None,
            padding: 0.1,
            truncation_ratio: cluster.truncation_ratio,
            merge_distance: cluster.merge_distance_px,
            min_peak_density: cluster.min_peak_density,
            connectivity: cluster.connectivity,
            palette: PALETTE.len(),
            output: None,
            density_dump: None,
            pixel_space: false,
            seed: 0,
        }
    }
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file with any of the flag values (snake_case keys).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, short, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<InputFormat>,
    #[arg(long, value_name = "NAME")]
    pub x_col: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub y_col: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub weight_col: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub text_col: Option<String>,
    /// Grid width in pixels.
    #[arg(long)]
    pub width: Option<usize>,
    /// Grid height in pixels.
    #[arg(long)]
    pub height: Option<usize>,
    /// KDE bandwidth (sigma) in pixels.
    #[arg(long, value_name = "PX")]
    pub bandwidth: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    pub padding: Option<f64>,
    #[arg(long, value_name = "RATIO")]
    pub truncation_ratio: Option<f64>,
    /// Merge clusters whose peak is within this many pixels of a shared boundary.
    #[arg(long, value_name = "PX")]
    pub merge_distance: Option<f64>,
    #[arg(long, value_name = "DENSITY")]
    pub min_peak_density: Option<f64>,
    #[arg(long, value_parser = parse_connectivity)]
    pub connectivity: Option<Connectivity>,
    /// Number of palette colors used for cluster fills (at most 10).
    #[arg(long)]
    pub palette: Option<usize>,
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write cluster geometry in pixel coordinates instead of data coordinates.
    #[arg(long)]
    pub pixel_space: bool,
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    match s {
        "csv" => Ok(InputFormat::Csv),
        "jsonl" => Ok(InputFormat::Jsonl),
        _ => Err(format!("unknown format `{s}` (expected csv or jsonl)")),
    }
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    match s {
        "4" => Ok(Connectivity::Four),
        "8" => Ok(Connectivity::Eight),
        _ => Err(format!("connectivity must be 4 or 8, got `{s}`")),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Config file (if any) with flags applied on top, validated.
    pub fn resolve(args: &ConfigArgs) -> CliResult<Self> {
        let mut cfg = match &args.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &args.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if args.$field.is_some() {
                    cfg.$field = args.$field.clone();
                }
            )*};
        }
        set!(x_col, y_col, width, height, padding, truncation_ratio, merge_distance, min_peak_density);
        set!(connectivity, palette, seed);
        set_opt!(input, format, weight_col, text_col, bandwidth, output);
        cfg.pixel_space |= args.pixel_space;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.width == 0 || self.height == 0 {
            return bad(format!("grid must be at least 1x1, got {}x{}", self.width, self.height));
        }
        if let Some(b) = self.bandwidth {
            if !(b.is_finite() && b >= 0.0) {
                return bad(format!("bandwidth must be finite and >= 0, got {b}"));
            }
        }
        if !(0.0..1.0).contains(&self.padding) {
            return bad(format!("padding must be in [0, 1), got {}", self.padding));
        }
        if !(1..=PALETTE.len()).contains(&self.palette) {
            return bad(format!("palette must be between 1 and {}, got {}", PALETTE.len(), self.palette));
        }
        self.cluster_params().validate()?;
        Ok(())
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            truncation_ratio: self.truncation_ratio,
            merge_distance_px: self.merge_distance,
            connectivity: self.connectivity,
            min_peak_density: self.min_peak_density,
        }
    }

    pub fn bandwidth_px(&self) -> f64 {
        self.bandwidth
            .unwrap_or_else(|| default_bandwidth(self.width, self.height))
    }

    pub fn columns(&self, require_text: bool) -> Columns {
        Columns {
            x: self.x_col.clone(),
            y: self.y_col.clone(),
            weight: self.weight_col.clone(),
            text: self.text_col.clone(),
            require_text,
        }
    }

    pub fn input_path(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("missing --input".into()))
    }

    pub fn input_format(&self) -> InputFormat {
        self.format.unwrap_or_else(|| match &self.input {
            Some(p) if p.extension().is_some_and(|e| e == "jsonl" || e == "ndjson") => InputFormat::Jsonl,
            _ => InputFormat::Csv,
        })
    }
}
