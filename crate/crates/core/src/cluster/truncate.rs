use super::graph::{collect_edges, ClusterGraph, ClusterNode};
use super::{check_dimensions, ClusterMap, ClusterParams, Neighbors, BACKGROUND};
use crate::disjoint_set::DisjointSet;
use crate::error::Result;
use crate::grid::DensityMap;

/// Drops pixels below `truncation_ratio * peak` from each cluster and keeps
/// only the connected piece containing the peak.
///
/// Clusters whose peak does not exceed `min_peak_density` are removed. Node
/// areas are updated and edges are recomputed from the truncated map.
pub fn truncate_clusters(
    density: &DensityMap,
    mut map: ClusterMap,
    graph: ClusterGraph,
    params: &ClusterParams,
) -> Result<(ClusterGraph, ClusterMap)> {
    check_dimensions(density, &map)?;
    let (width, height) = (map.width, map.height);
    let values = density.values();

    let slots = graph
        .nodes()
        .iter()
        .map(|n| n.id.0 as usize + 1)
        .max()
        .unwrap_or(0);
    let mut floor = vec![f64::INFINITY; slots];
    let mut kept: Vec<ClusterNode> = Vec::with_capacity(graph.nodes().len());
    for n in graph.nodes() {
        if n.peak_density > params.min_peak_density {
            floor[n.id.0 as usize] = params.truncation_ratio * n.peak_density;
            kept.push(*n);
        }
    }

    for (c, &d) in map.ids.iter_mut().zip(values) {
        if *c != BACKGROUND && !(d >= floor[*c as usize]) {
            *c = BACKGROUND;
        }
    }

    let neighbors = Neighbors::new(params.connectivity, width, height);
    let mut reached = vec![false; map.ids.len()];
    let mut stack = Vec::new();
    for node in &mut kept {
        let start = node.peak.y * width + node.peak.x;
        let id = node.id.0;
        debug_assert_eq!(map.ids[start], id);
        reached[start] = true;
        stack.push(start);
        let mut area = 0;
        while let Some(i) = stack.pop() {
            area += 1;
            neighbors.for_each(i % width, i / width, i, |j| {
                if !reached[j] && map.ids[j] == id {
                    reached[j] = true;
                    stack.push(j);
                }
            });
        }
        node.area_px = area;
    }
    for (c, r) in map.ids.iter_mut().zip(&reached) {
        if !r {
            *c = BACKGROUND;
        }
    }

    let edges = collect_edges(density, &map, &kept, params.connectivity);
    Ok((ClusterGraph::from_parts(kept, edges), map))
}

/// Truncation for the clustering pipeline, given the hill-climbing basins
/// (`basins`, the initial map) and the merge lookup from basin id to merged
/// id.
///
/// Every pixel's uphill chain stays inside its basin and only rises, so a
/// basin cut at any floor stays connected and keeps its maxima. Connectivity
/// therefore only has to be resolved between basins of the same merged
/// cluster, which replaces the per-pixel flood fill.
pub(crate) fn truncate_basins(
    density: &DensityMap,
    basins: &ClusterMap,
    lookup: &[u32],
    graph: ClusterGraph,
    params: &ClusterParams,
) -> Result<(ClusterGraph, ClusterMap)> {
    check_dimensions(density, basins)?;
    let (width, height) = (basins.width, basins.height);
    let values = density.values();

    let mut floor = vec![f64::INFINITY; lookup.len()];
    let mut kept: Vec<ClusterNode> = Vec::with_capacity(graph.nodes().len());
    for n in graph.nodes() {
        if n.peak_density > params.min_peak_density {
            floor[n.id.0 as usize] = params.truncation_ratio * n.peak_density;
            kept.push(*n);
        }
    }

    let mut ids = vec![BACKGROUND; basins.ids.len()];
    for ((c, &b), &d) in ids.iter_mut().zip(&basins.ids).zip(values) {
        if b != BACKGROUND {
            let m = lookup[b as usize];
            if d >= floor[m as usize] {
                *c = m;
            }
        }
    }

    // Join basins of one merged cluster whose retained pixels touch.
    let neighbors = Neighbors::new(params.connectivity, width, height);
    let mut joined = DisjointSet::new(lookup.len());
    let mut last = (BACKGROUND, BACKGROUND);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let (c, b) = (ids[i], basins.ids[i]);
            if c == BACKGROUND || neighbors.all_interior_equal(&basins.ids, x, y, i, b) {
                continue;
            }
            neighbors.for_each_forward(x, y, i, |j| {
                let bj = basins.ids[j];
                if bj != b && ids[j] == c && last != (b, bj) {
                    last = (b, bj);
                    joined.union(b as usize, bj as usize);
                }
            });
        }
    }

    let mut peak_root = vec![usize::MAX; lookup.len()];
    for n in &kept {
        let b = basins.ids[n.peak.y * width + n.peak.x] as usize;
        peak_root[n.id.0 as usize] = joined.find(b);
    }
    let keep_basin: Vec<bool> = (0..lookup.len())
        .map(|b| joined.find(b) == peak_root[lookup[b] as usize])
        .collect();

    let mut area = vec![0usize; lookup.len()];
    for (c, &b) in ids.iter_mut().zip(&basins.ids) {
        if *c != BACKGROUND {
            if keep_basin[b as usize] {
                area[*c as usize] += 1;
            } else {
                *c = BACKGROUND;
            }
        }
    }
    for n in &mut kept {
        n.area_px = area[n.id.0 as usize];
    }

    let map = ClusterMap { width, height, ids };
    let edges = collect_edges(density, &map, &kept, params.connectivity);
    Ok((ClusterGraph::from_parts(kept, edges), map))
}
