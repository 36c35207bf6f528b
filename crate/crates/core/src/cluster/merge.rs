use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::graph::{BoundarySide, ClusterEdge, ClusterGraph, ClusterNode};
use super::{ClusterId, ClusterMap, ClusterParams, BACKGROUND};

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    key: (u32, u32),
    edge: usize,
    version: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Reversed so the max-heap pops the smallest score, then smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.key.cmp(&self.key))
            .then_with(|| other.edge.cmp(&self.edge))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
struct LiveEdge {
    ends: [u32; 2],
    sides: [BoundarySide; 2],
    count: usize,
    max_density: f64,
    alive: bool,
    version: u32,
}

impl LiveEdge {
    fn slot(&self, id: u32) -> usize {
        usize::from(self.ends[1] == id)
    }

    fn score(&self) -> f64 {
        self.sides[0].distance.min(self.sides[1].distance)
    }

    fn key(&self) -> (u32, u32) {
        (self.ends[0].min(self.ends[1]), self.ends[0].max(self.ends[1]))
    }
}

struct Merger {
    nodes: Vec<Option<ClusterNode>>,
    adjacency: Vec<BTreeMap<u32, usize>>,
    edges: Vec<LiveEdge>,
    queue: BinaryHeap<Candidate>,
    /// Absorbed cluster -> the cluster it was merged into.
    redirect: Vec<u32>,
}

impl Merger {
    fn new(graph: ClusterGraph) -> Self {
        let slots = graph
            .nodes()
            .iter()
            .map(|n| n.id.0 as usize + 1)
            .max()
            .unwrap_or(0);
        let mut nodes = vec![None; slots];
        for n in graph.nodes() {
            nodes[n.id.0 as usize] = Some(*n);
        }
        let mut merger = Self {
            nodes,
            adjacency: vec![BTreeMap::new(); slots],
            edges: Vec::with_capacity(graph.edges().len()),
            queue: BinaryHeap::with_capacity(graph.edges().len()),
            redirect: (0..slots as u32).collect(),
        };
        for e in graph.edges() {
            let idx = merger.edges.len();
            merger.edges.push(LiveEdge {
                ends: [e.a.0, e.b.0],
                sides: e.sides,
                count: e.boundary_px_count,
                max_density: e.max_boundary_density,
                alive: true,
                version: 0,
            });
            merger.adjacency[e.a.0 as usize].insert(e.b.0, idx);
            merger.adjacency[e.b.0 as usize].insert(e.a.0, idx);
            merger.push(idx);
        }
        merger
    }

    fn push(&mut self, idx: usize) {
        let e = &self.edges[idx];
        self.queue.push(Candidate {
            score: e.score(),
            key: e.key(),
            edge: idx,
            version: e.version,
        });
    }

    fn node(&self, id: u32) -> &ClusterNode {
        self.nodes[id as usize].as_ref().expect("live cluster")
    }

    /// Pops the best live candidate whose score is within `threshold`.
    fn next_merge(&mut self, threshold: f64) -> Option<usize> {
        while let Some(c) = self.queue.pop() {
            let e = &self.edges[c.edge];
            if !e.alive || e.version != c.version {
                continue;
            }
            if c.score > threshold {
                return None;
            }
            return Some(c.edge);
        }
        None
    }

    fn merge(&mut self, idx: usize) {
        let [x, y] = self.edges[idx].ends;
        let (nx, ny) = (self.node(x), self.node(y));
        let x_wins = nx.peak_density > ny.peak_density
            || (nx.peak_density == ny.peak_density && x < y);
        let (keep, gone) = if x_wins { (x, y) } else { (y, x) };

        self.edges[idx].alive = false;
        self.adjacency[keep as usize].remove(&gone);
        self.adjacency[gone as usize].remove(&keep);

        let absorbed = self.nodes[gone as usize].take().expect("live cluster");
        let survivor = self.nodes[keep as usize].as_mut().expect("live cluster");
        survivor.area_px += absorbed.area_px;
        let peak = survivor.peak;
        self.redirect[gone as usize] = keep;

        let moved = std::mem::take(&mut self.adjacency[gone as usize]);
        for (other, f) in moved {
            self.adjacency[other as usize].remove(&gone);

            let edge = &mut self.edges[f];
            let slot = edge.slot(gone);
            edge.ends[slot] = keep;
            let pixel = edge.sides[slot].pixel;
            edge.sides[slot].distance = peak.distance(&pixel);

            match self.adjacency[keep as usize].get(&other).copied() {
                Some(g) => {
                    let f_edge = self.edges[f].clone();
                    self.edges[f].alive = false;
                    let target = &mut self.edges[g];
                    target.count += f_edge.count;
                    target.max_density = target.max_density.max(f_edge.max_density);
                    for id in [keep, other] {
                        let ts = target.slot(id);
                        let fs = f_edge.slot(id);
                        target.sides[ts] = target.sides[ts].nearer(f_edge.sides[fs]);
                    }
                    target.version += 1;
                    self.push(g);
                }
                None => {
                    self.adjacency[keep as usize].insert(other, f);
                    self.adjacency[other as usize].insert(keep, f);
                    self.edges[f].version += 1;
                    self.push(f);
                }
            }
        }
    }

    fn resolve(&self, mut id: u32) -> u32 {
        while self.redirect[id as usize] != id {
            id = self.redirect[id as usize];
        }
        id
    }

    /// The merged graph and, per initial id, the id it was merged into.
    fn finish(self) -> (ClusterGraph, Vec<u32>) {
        let lookup: Vec<u32> = (0..self.redirect.len() as u32)
            .map(|id| self.resolve(id))
            .collect();
        let nodes: Vec<ClusterNode> = self.nodes.into_iter().flatten().collect();
        let edges: Vec<ClusterEdge> = self
            .edges
            .into_iter()
            .filter(|e| e.alive)
            .map(|e| {
                let (lo, hi) = if e.ends[0] < e.ends[1] { (0, 1) } else { (1, 0) };
                ClusterEdge {
                    a: ClusterId(e.ends[lo]),
                    b: ClusterId(e.ends[hi]),
                    boundary_px_count: e.count,
                    max_boundary_density: e.max_density,
                    sides: [e.sides[lo], e.sides[hi]],
                }
            })
            .collect();
        (ClusterGraph::from_parts(nodes, edges), lookup)
    }
}

/// Runs the merge loop on `graph` alone.
pub(crate) fn merge_lookup(graph: ClusterGraph, params: &ClusterParams) -> (ClusterGraph, Vec<u32>) {
    let mut merger = Merger::new(graph);
    while let Some(idx) = merger.next_merge(params.merge_distance_px) {
        merger.merge(idx);
    }
    merger.finish()
}

/// Greedily merges neighboring clusters, closest peak-to-boundary first,
/// while the best score is within `params.merge_distance_px`.
///
/// The taller peak survives (smaller id on ties) and keeps its id. Edges
/// incident to the absorbed cluster are re-scored against the surviving
/// peak using each edge's stored nearest boundary pixel.
pub fn union_clusters(
    graph: ClusterGraph,
    map: ClusterMap,
    params: &ClusterParams,
) -> (ClusterGraph, ClusterMap) {
    let (graph, lookup) = merge_lookup(graph, params);
    let mut map = map;
    for c in map.ids.iter_mut().filter(|c| **c != BACKGROUND) {
        *c = lookup[*c as usize];
    }
    (graph, map)
}
