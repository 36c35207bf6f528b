//! Density-map clustering.
//!
//! Four phases run in sequence:
//!
//! 1. [`initial_clusters`]: every positive pixel joins the set of its
//!    highest neighbor when that neighbor is at least as dense, which groups
//!    pixels by the local maximum their uphill walk ends at.
//! 2. [`build_neighborhood_graph`]: one node per cluster, one edge per pair of
//!    touching clusters, summarizing the shared boundary.
//! 3. [`union_clusters`]: greedily merges clusters whose peak sits close to a
//!    shared boundary, closest first.
//! 4. [`truncate_clusters`]: drops pixels below `truncation_ratio` times the
//!    cluster's peak and keeps only the component holding the peak.

mod graph;
mod initial;
mod merge;
mod truncate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DensityMap;

pub use graph::{build_neighborhood_graph, BoundarySide, ClusterEdge, ClusterGraph, ClusterNode};
pub use initial::initial_clusters;
pub use merge::union_clusters;
pub use truncate::truncate_clusters;

/// Identifier of a cluster within one [`ClusterMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A pixel location on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Pixel) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Pixel neighborhood used for hill climbing, adjacency and connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

const OFFSETS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
const OFFSETS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &OFFSETS_4,
            Connectivity::Eight => &OFFSETS_8,
        }
    }

    /// Calls `f(nx, ny)` for every in-bounds neighbor of `(x, y)`.
    #[inline]
    pub fn for_each_neighbor(
        self,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize),
    ) {
        for &(dx, dy) in self.offsets() {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                f(nx as usize, ny as usize);
            }
        }
    }
}

/// Neighbor visitor over linear pixel indices, with a branch-free offset
/// table for interior pixels.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Neighbors {
    connectivity: Connectivity,
    width: usize,
    height: usize,
    offsets: [isize; 8],
    len: usize,
}

impl Neighbors {
    pub(crate) fn new(connectivity: Connectivity, width: usize, height: usize) -> Self {
        let mut offsets = [0isize; 8];
        let table = connectivity.offsets();
        for (o, &(dx, dy)) in offsets.iter_mut().zip(table) {
            *o = dy * width as isize + dx;
        }
        Self {
            connectivity,
            width,
            height,
            offsets,
            len: table.len(),
        }
    }

    /// Offsets in ascending index order when `(x, y)` is not on the border.
    #[inline(always)]
    pub(crate) fn interior_offsets(&self, x: usize, y: usize) -> Option<&[isize]> {
        (x > 0 && y > 0 && x + 1 < self.width && y + 1 < self.height).then(|| &self.offsets[..self.len])
    }

    /// Whether every neighbor of the interior pixel `i` carries `id`.
    /// Border pixels always answer `false`.
    #[inline(always)]
    pub(crate) fn all_interior_equal(&self, ids: &[u32], x: usize, y: usize, i: usize, id: u32) -> bool {
        if !(x > 0 && y > 0 && x + 1 < self.width && y + 1 < self.height) {
            return false;
        }
        let mut same = true;
        for &o in &self.offsets[..self.len] {
            same &= ids[i.wrapping_add_signed(o)] == id;
        }
        same
    }

    /// Calls `f(j)` for the in-bounds neighbors that come later in scan
    /// order, so each adjacent pair is seen once.
    #[inline(always)]
    pub(crate) fn for_each_forward(&self, x: usize, y: usize, i: usize, mut f: impl FnMut(usize)) {
        let half = self.len / 2;
        if x > 0 && x + 1 < self.width && y + 1 < self.height {
            for &o in &self.offsets[half..self.len] {
                f(i.wrapping_add_signed(o));
            }
        } else {
            for &(dx, dy) in &self.connectivity.offsets()[half..] {
                let nx = x as isize + dx;
                let ny = y + dy as usize;
                if nx >= 0 && (nx as usize) < self.width && ny < self.height {
                    f(ny * self.width + nx as usize);
                }
            }
        }
    }

    /// Calls `f(j)` for every in-bounds neighbor `j` of pixel `i = y * width + x`.
    #[inline(always)]
    pub(crate) fn for_each(&self, x: usize, y: usize, i: usize, mut f: impl FnMut(usize)) {
        if x > 0 && y > 0 && x + 1 < self.width && y + 1 < self.height {
            for &o in &self.offsets[..self.len] {
                f(i.wrapping_add_signed(o));
            }
        } else {
            let w = self.width;
            self.connectivity
                .for_each_neighbor(x, y, w, self.height, |nx, ny| f(ny * w + nx));
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, Self::Error> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Tunables for [`cluster_density_map`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// Pixels below `truncation_ratio * peak` are dropped from a cluster.
    pub truncation_ratio: f64,
    /// Merge when a peak is within this many pixels of a shared boundary.
    pub merge_distance_px: f64,
    pub connectivity: Connectivity,
    /// Clusters whose peak does not exceed this are removed.
    pub min_peak_density: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            truncation_ratio: 0.1,
            merge_distance_px: 8.0,
            connectivity: Connectivity::Eight,
            min_peak_density: 0.0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.truncation_ratio) {
            return Err(Error::param("truncation_ratio", "must be in [0, 1)"));
        }
        if !(self.merge_distance_px.is_finite() && self.merge_distance_px >= 0.0) {
            return Err(Error::param("merge_distance_px", "must be finite and >= 0"));
        }
        if !(self.min_peak_density.is_finite() && self.min_peak_density >= 0.0) {
            return Err(Error::param("min_peak_density", "must be finite and >= 0"));
        }
        Ok(())
    }
}

pub(crate) const BACKGROUND: u32 = u32::MAX;

/// Per-pixel cluster assignment; `None` is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterMap {
    width: usize,
    height: usize,
    ids: Vec<u32>,
}

impl ClusterMap {
    pub fn background(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            ids: vec![BACKGROUND; width * height],
        }
    }

    /// Builds a map from optional ids in row-major order.
    pub fn from_ids(width: usize, height: usize, ids: &[Option<ClusterId>]) -> Result<Self> {
        if ids.len() != width * height {
            return Err(Error::param(
                "ids",
                format!("expected {} entries, got {}", width * height, ids.len()),
            ));
        }
        if ids.iter().flatten().any(|id| id.0 == BACKGROUND) {
            return Err(Error::param("ids", "identifier u32::MAX is reserved"));
        }
        Ok(Self {
            width,
            height,
            ids: ids.iter().map(|id| id.map_or(BACKGROUND, |c| c.0)).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<ClusterId> {
        self.get_index(y * self.width + x)
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> Option<ClusterId> {
        match self.ids[i] {
            BACKGROUND => None,
            id => Some(ClusterId(id)),
        }
    }

    #[inline]
    pub(crate) fn raw(&self) -> &[u32] {
        &self.ids
    }

    pub fn to_ids(&self) -> Vec<Option<ClusterId>> {
        (0..self.ids.len()).map(|i| self.get_index(i)).collect()
    }

    /// Distinct cluster ids present, ascending.
    pub fn cluster_ids(&self) -> Vec<ClusterId> {
        let mut ids: Vec<u32> = self.ids.iter().copied().filter(|&i| i != BACKGROUND).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(ClusterId).collect()
    }

    pub fn contains(&self, id: ClusterId) -> bool {
        self.ids.contains(&id.0)
    }

    /// Pixels carrying `id`, in scan order.
    pub fn pixels_of(&self, id: ClusterId) -> Vec<Pixel> {
        self.ids
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == id.0)
            .map(|(i, _)| Pixel::new(i % self.width, i / self.width))
            .collect()
    }

    pub fn area_of(&self, id: ClusterId) -> usize {
        self.ids.iter().filter(|&&c| c == id.0).count()
    }
}

/// Output of the full clustering pipeline.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub map: ClusterMap,
    pub graph: ClusterGraph,
    /// Cluster count after hill climbing.
    pub initial_count: usize,
    /// Cluster count after merging, before truncation.
    pub merged_count: usize,
}

impl Clustering {
    pub fn len(&self) -> usize {
        self.graph.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.nodes().is_empty()
    }
}

/// Runs all four phases on `density`. Identical inputs give identical output.
pub fn cluster_density_map(density: &DensityMap, params: &ClusterParams) -> Result<Clustering> {
    params.validate()?;
    let map = initial_clusters(density, params.connectivity);
    let graph = build_neighborhood_graph(density, &map, params.connectivity)?;
    let initial_count = graph.nodes().len();
    let (graph, lookup) = merge::merge_lookup(graph, params);
    let merged_count = graph.nodes().len();
    let (graph, map) = truncate::truncate_basins(density, &map, &lookup, graph, params)?;
    Ok(Clustering {
        map,
        graph,
        initial_count,
        merged_count,
    })
}

pub(crate) fn check_dimensions(density: &DensityMap, map: &ClusterMap) -> Result<()> {
    if density.width() != map.width() || density.height() != map.height() {
        return Err(Error::Dimensions {
            expected_width: density.width(),
            expected_height: density.height(),
            width: map.width(),
            height: map.height(),
        });
    }
    Ok(())
}
