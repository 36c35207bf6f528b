use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use super::{check_dimensions, ClusterId, ClusterMap, Connectivity, Neighbors, Pixel, BACKGROUND};
use crate::error::Result;
use crate::grid::DensityMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterNode {
    pub id: ClusterId,
    /// Densest pixel of the region (first in scan order on ties).
    pub peak: Pixel,
    pub peak_density: f64,
    pub area_px: usize,
}

/// One endpoint's view of a shared boundary: its boundary pixel nearest to
/// its own peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySide {
    pub pixel: Pixel,
    pub distance: f64,
}

impl BoundarySide {
    /// Orders by distance, then by pixel scan order.
    pub(crate) fn closer_than(&self, other: &BoundarySide) -> bool {
        self.distance < other.distance
            || (self.distance == other.distance
                && (self.pixel.y, self.pixel.x) < (other.pixel.y, other.pixel.x))
    }

    pub(crate) fn nearer(self, other: BoundarySide) -> BoundarySide {
        if other.closer_than(&self) {
            other
        } else {
            self
        }
    }
}

/// Summary of the boundary between two touching clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterEdge {
    /// Smaller endpoint.
    pub a: ClusterId,
    /// Larger endpoint.
    pub b: ClusterId,
    /// Distinct pixels, on either side, that touch the other cluster.
    pub boundary_px_count: usize,
    pub max_boundary_density: f64,
    /// Nearest boundary pixel to each endpoint's peak, `[a, b]`.
    pub sides: [BoundarySide; 2],
}

impl ClusterEdge {
    /// Smallest peak-to-boundary distance over both endpoints.
    pub fn score(&self) -> f64 {
        self.sides[0].distance.min(self.sides[1].distance)
    }

    pub fn side(&self, id: ClusterId) -> Option<&BoundarySide> {
        if id == self.a {
            Some(&self.sides[0])
        } else if id == self.b {
            Some(&self.sides[1])
        } else {
            None
        }
    }

    pub fn other(&self, id: ClusterId) -> Option<ClusterId> {
        if id == self.a {
            Some(self.b)
        } else if id == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Clusters and the boundaries between them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterGraph {
    nodes: Vec<ClusterNode>,
    edges: Vec<ClusterEdge>,
}

impl ClusterGraph {
    pub(crate) fn from_parts(mut nodes: Vec<ClusterNode>, mut edges: Vec<ClusterEdge>) -> Self {
        nodes.sort_by_key(|n| n.id);
        edges.sort_by_key(|e| (e.a, e.b));
        Self { nodes, edges }
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    /// Edges in ascending `(a, b)` order.
    pub fn edges(&self) -> &[ClusterEdge] {
        &self.edges
    }

    pub fn node(&self, id: ClusterId) -> Option<&ClusterNode> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn edge(&self, x: ClusterId, y: ClusterId) -> Option<&ClusterEdge> {
        let key = if x < y { (x, y) } else { (y, x) };
        self.edges
            .binary_search_by_key(&key, |e| (e.a, e.b))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn neighbors(&self, id: ClusterId) -> Vec<ClusterId> {
        let mut out: Vec<ClusterId> = self.edges.iter().filter_map(|e| e.other(id)).collect();
        out.sort();
        out
    }

    pub fn degree(&self, id: ClusterId) -> usize {
        self.edges.iter().filter(|e| e.a == id || e.b == id).count()
    }
}

/// Computes node statistics in one pass.
pub(crate) fn collect_nodes(density: &DensityMap, map: &ClusterMap) -> Vec<ClusterNode> {
    let width = map.width;
    let mut slots: Vec<Option<ClusterNode>> = Vec::new();
    for (i, (&c, &d)) in map.ids.iter().zip(density.values()).enumerate() {
        if c == BACKGROUND {
            continue;
        }
        let c = c as usize;
        if c >= slots.len() {
            slots.resize(c + 1, None);
        }
        let pixel = Pixel::new(i % width, i / width);
        match &mut slots[c] {
            Some(node) => {
                node.area_px += 1;
                if d > node.peak_density {
                    node.peak = pixel;
                    node.peak_density = d;
                }
            }
            slot @ None => {
                *slot = Some(ClusterNode {
                    id: ClusterId(c as u32),
                    peak: pixel,
                    peak_density: d,
                    area_px: 1,
                })
            }
        }
    }
    slots.into_iter().flatten().collect()
}

/// Scans every neighboring pixel pair with differing clusters and
/// summarizes each shared boundary. `nodes` supplies the peaks.
pub(crate) fn collect_edges(
    density: &DensityMap,
    map: &ClusterMap,
    nodes: &[ClusterNode],
    connectivity: Connectivity,
) -> Vec<ClusterEdge> {
    let (width, height) = (map.width, map.height);
    let values = density.values();
    let mut peaks: Vec<Pixel> = Vec::new();
    for n in nodes {
        let c = n.id.0 as usize;
        if c >= peaks.len() {
            peaks.resize(c + 1, Pixel::new(0, 0));
        }
        peaks[c] = n.peak;
    }

    let mut index: HashMap<u64, usize, BuildHasherDefault<PairHasher>> = HashMap::default();
    let mut edges: Vec<Pending> = Vec::new();
    let mut last: Option<(u64, usize)> = None;
    let mut foreign: Vec<(u32, f64)> = Vec::with_capacity(8);
    let neighbors = Neighbors::new(connectivity, width, height);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let c = map.ids[i];
            if c == BACKGROUND || neighbors.all_interior_equal(&map.ids, x, y, i, c) {
                continue;
            }
            foreign.clear();
            neighbors.for_each(x, y, i, |j| {
                let other = map.ids[j];
                if other == BACKGROUND || other == c {
                    return;
                }
                match foreign.iter_mut().find(|(o, _)| *o == other) {
                    Some((_, d)) => *d = d.max(values[j]),
                    None => foreign.push((other, values[j])),
                }
            });
            if foreign.is_empty() {
                continue;
            }

            let peak = peaks[c as usize];
            let (dx, dy) = (x as i64 - peak.x as i64, y as i64 - peak.y as i64);
            let side = ((dx * dx + dy * dy) as u64, i);
            for &(other, neighbor_max) in &foreign {
                let (a, b) = if c < other { (c, other) } else { (other, c) };
                let slot = usize::from(c != a);
                let boundary_density = values[i].max(neighbor_max);
                let key = (a as u64) << 32 | b as u64;
                let found = match last {
                    Some((k, e)) if k == key => Some(e),
                    _ => index.get(&key).copied(),
                };
                let e = match found {
                    Some(e) => e,
                    None => {
                        index.insert(key, edges.len());
                        edges.push(Pending {
                            a,
                            b,
                            count: 0,
                            max: boundary_density,
                            sides: [(u64::MAX, usize::MAX); 2],
                        });
                        edges.len() - 1
                    }
                };
                let edge = &mut edges[e];
                edge.count += 1;
                edge.max = edge.max.max(boundary_density);
                edge.sides[slot] = edge.sides[slot].min(side);
                last = Some((key, e));
            }
        }
    }
    edges
        .into_iter()
        .map(|p| {
            let first = p.sides.iter().map(|s| s.1).min().unwrap_or(0);
            let side = |(d2, i): (u64, usize)| {
                if i == usize::MAX {
                    BoundarySide {
                        pixel: Pixel::new(first % width, first / width),
                        distance: f64::INFINITY,
                    }
                } else {
                    BoundarySide {
                        pixel: Pixel::new(i % width, i / width),
                        distance: (d2 as f64).sqrt(),
                    }
                }
            };
            ClusterEdge {
                a: ClusterId(p.a),
                b: ClusterId(p.b),
                boundary_px_count: p.count,
                max_boundary_density: p.max,
                sides: [side(p.sides[0]), side(p.sides[1])],
            }
        })
        .collect()
}

/// Edge under construction. Sides hold (squared distance, pixel index).
struct Pending {
    a: u32,
    b: u32,
    count: usize,
    max: f64,
    sides: [(u64, usize); 2],
}

/// Multiplicative hash for packed cluster-id pairs.
#[derive(Default)]
struct PairHasher(u64);

impl Hasher for PairHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (v ^ (v >> 29)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

/// Builds the cluster neighborhood graph of `map`.
pub fn build_neighborhood_graph(
    density: &DensityMap,
    map: &ClusterMap,
    connectivity: Connectivity,
) -> Result<ClusterGraph> {
    check_dimensions(density, map)?;
    let nodes = collect_nodes(density, map);
    let edges = collect_edges(density, map, &nodes, connectivity);
    Ok(ClusterGraph::from_parts(nodes, edges))
}
