use std::collections::BTreeMap;

use crate::cluster::{ClusterGraph, ClusterId};

/// Palette assignment for a cluster graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub colors: BTreeMap<ClusterId, usize>,
    /// Adjacent pairs that ended up sharing a color.
    pub conflicts: usize,
}

/// Greedy coloring in descending-degree order (ties by id).
///
/// Each cluster takes the smallest palette index unused by its colored
/// neighbors. If the palette is exhausted it takes the index shared with
/// the fewest neighbors, and the clash is counted.
pub fn color_clusters(graph: &ClusterGraph, palette_size: usize) -> Coloring {
    let palette_size = palette_size.max(1);
    let mut adjacency: BTreeMap<ClusterId, Vec<ClusterId>> =
        graph.nodes().iter().map(|n| (n.id, Vec::new())).collect();
    for e in graph.edges() {
        adjacency.entry(e.a).or_default().push(e.b);
        adjacency.entry(e.b).or_default().push(e.a);
    }

    let mut order: Vec<ClusterId> = adjacency.keys().copied().collect();
    order.sort_by_key(|id| (std::cmp::Reverse(adjacency[id].len()), *id));

    let mut colors: BTreeMap<ClusterId, usize> = BTreeMap::new();
    let mut conflicts = 0;
    let mut uses = vec![0usize; palette_size];
    for id in order {
        uses.fill(0);
        for n in &adjacency[&id] {
            if let Some(&c) = colors.get(n) {
                uses[c] += 1;
            }
        }
        let (color, clashes) = uses
            .iter()
            .enumerate()
            .min_by_key(|&(c, &n)| (n, c))
            .map(|(c, &n)| (c, n))
            .unwrap();
        conflicts += clashes;
        colors.insert(id, color);
    }
    Coloring { colors, conflicts }
}
