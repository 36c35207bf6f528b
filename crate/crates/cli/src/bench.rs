//! Seeded clustering benchmark.

use std::fmt::Write;
use std::time::Instant;

use kdecluster::grid::{bin_points, default_bandwidth, smooth};
use kdecluster::synthetic::bench_points;
use kdecluster::{cluster_density_map, ClusterParams, Clustering, DensityMap, Viewport};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SIZES: [usize; 3] = [250, 500, 1000];
pub const DEFAULT_POINTS: usize = 100_000;
pub const MIN_SIZE: usize = 64;

/// One grid size. Times are medians over the repeats, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub pixels: usize,
    pub points: usize,
    pub clusters: usize,
    pub kde_ms: f64,
    pub cluster_ms: f64,
    pub kde_samples_ms: Vec<f64>,
    pub cluster_samples_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub repeats: usize,
    pub rows: Vec<BenchRow>,
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    match s.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => s[n / 2],
        n => 0.5 * (s[n / 2 - 1] + s[n / 2]),
    }
}

/// KDE of `points` seeded samples from the benchmark mixture on a
/// `size` x `size` grid, with the time taken to bin and smooth.
pub fn bench_density(size: usize, points: usize, seed: u64) -> CliResult<(DensityMap, f64)> {
    let pts = bench_points(size, points, seed);
    let viewport = Viewport::new(0.0, size as f64, 0.0, size as f64, size, size)?;
    let start = Instant::now();
    let counts = bin_points(&pts, &viewport)?.counts;
    let density = smooth(&counts, default_bandwidth(size, size))?;
    Ok((density, ms(start)))
}

/// Clusters `density` `repeats` times; returns per-run times and the last result.
pub fn time_clustering(
    density: &DensityMap,
    params: &ClusterParams,
    repeats: usize,
) -> CliResult<(Vec<f64>, Clustering)> {
    let mut samples = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let c = cluster_density_map(density, params)?;
        samples.push(ms(start));
        last = Some(c);
    }
    Ok((samples, last.unwrap()))
}

pub fn run_bench(
    sizes: &[usize],
    repeats: usize,
    points: usize,
    seed: u64,
    params: &ClusterParams,
) -> CliResult<BenchReport> {
    if repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    if let Some(s) = sizes.iter().find(|&&s| s < MIN_SIZE) {
        return Err(CliError::Usage(format!("bench sizes must be >= {MIN_SIZE}, got {s}")));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut kde_samples = Vec::with_capacity(repeats);
        let mut density = None;
        for _ in 0..repeats {
            let (d, t) = bench_density(size, points, seed)?;
            kde_samples.push(t);
            density = Some(d);
        }
        let (cluster_samples, clustering) = time_clustering(&density.unwrap(), params, repeats)?;
        rows.push(BenchRow {
            size,
            pixels: size * size,
            points,
            clusters: clustering.len(),
            kde_ms: median(&kde_samples),
            cluster_ms: median(&cluster_samples),
            kde_samples_ms: kde_samples,
            cluster_samples_ms: cluster_samples,
        });
    }
    Ok(BenchReport { seed, repeats, rows })
}

pub fn format_table(report: &BenchReport) -> String {
    let mut out = format!(
        "{:>6} {:>9} {:>9} {:>8} {:>10} {:>11}\n",
        "size", "pixels", "points", "clusters", "kde_ms", "cluster_ms"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:>6} {:>9} {:>9} {:>8} {:>10.2} {:>11.2}",
            r.size, r.pixels, r.points, r.clusters, r.kde_ms, r.cluster_ms
        );
    }
    out
}
