//! Polygons, rectangle covers and colors for cluster regions.

mod color;
mod rects;
mod trace;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterId, ClusterMap, Connectivity, BACKGROUND};
use crate::error::{Error, Result};
use crate::grid::Viewport;

pub use color::{color_clusters, Coloring};

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Half-open containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x0 <= x && x < self.x1 && self.y0 <= y && y < self.y1
    }
}

impl From<[f64; 4]> for Rect {
    fn from([x0, y0, x1, y1]: [f64; 4]) -> Self {
        Rect::new(x0, y0, x1, y1)
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x0, r.y0, r.x1, r.y1]
    }
}

/// Closed ring of vertices; the closing vertex is not repeated.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolygonRing {
    pub vertices: Vec<(f64, f64)>,
}

impl PolygonRing {
    /// Shoelace area; positive for counterclockwise rings.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let twice: f64 = (0..n)
            .map(|k| {
                let (x0, y0) = self.vertices[k];
                let (x1, y1) = self.vertices[(k + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum();
        twice / 2.0
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area() > 0.0
    }
}

/// Geometry of one cluster region.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterShape {
    pub cluster_id: ClusterId,
    pub outer: PolygonRing,
    pub holes: Vec<PolygonRing>,
    pub rects: Vec<Rect>,
}

impl ClusterShape {
    /// Outer area minus hole areas.
    pub fn area(&self) -> f64 {
        self.outer.signed_area().abs() - self.holes.iter().map(|h| h.signed_area().abs()).sum::<f64>()
    }

    /// Outer ring followed by holes, as plain vertex lists.
    pub fn rings(&self) -> Vec<Vec<(f64, f64)>> {
        std::iter::once(&self.outer)
            .chain(&self.holes)
            .map(|r| r.vertices.clone())
            .collect()
    }
}

/// Half-open pixel bounds of a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Bounds {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

impl Bounds {
    fn point(x: usize, y: usize) -> Self {
        Self {
            x0: x,
            y0: y,
            x1: x + 1,
            y1: y + 1,
        }
    }

    fn include(&mut self, x: usize, y: usize) {
        self.x0 = self.x0.min(x);
        self.y0 = self.y0.min(y);
        self.x1 = self.x1.max(x + 1);
        self.y1 = self.y1.max(y + 1);
    }
}

fn bounds_of(map: &ClusterMap, id: ClusterId) -> Result<Bounds> {
    let mut bounds: Option<Bounds> = None;
    for (i, &c) in map.raw().iter().enumerate() {
        if c == id.0 {
            let (x, y) = (i % map.width(), i / map.width());
            match &mut bounds {
                Some(b) => b.include(x, y),
                None => bounds = Some(Bounds::point(x, y)),
            }
        }
    }
    bounds.ok_or(Error::ClusterNotFound(id.0))
}

fn all_bounds(map: &ClusterMap) -> Vec<(u32, Bounds)> {
    let mut slots: Vec<Option<Bounds>> = Vec::new();
    for (i, &c) in map.raw().iter().enumerate() {
        if c == BACKGROUND {
            continue;
        }
        let (x, y) = (i % map.width(), i / map.width());
        let c = c as usize;
        if c >= slots.len() {
            slots.resize(c + 1, None);
        }
        match &mut slots[c] {
            Some(b) => b.include(x, y),
            slot @ None => *slot = Some(Bounds::point(x, y)),
        }
    }
    slots
        .into_iter()
        .enumerate()
        .filter_map(|(c, b)| b.map(|b| (c as u32, b)))
        .collect()
}

fn shape_from_rings(
    id: ClusterId,
    rings: Vec<PolygonRing>,
    rects: Vec<Rect>,
) -> Result<ClusterShape> {
    let (outers, holes): (Vec<_>, Vec<_>) = rings.into_iter().partition(|r| r.is_counterclockwise());
    let mut outers = outers.into_iter();
    match (outers.next(), outers.next()) {
        (Some(outer), None) => Ok(ClusterShape {
            cluster_id: id,
            outer,
            holes,
            rects,
        }),
        (None, _) => Err(Error::ClusterNotFound(id.0)),
        (Some(_), Some(_)) => Err(Error::param(
            "cluster",
            format!("region of cluster {id} is not connected"),
        )),
    }
}

/// Outer ring and holes of a cluster's pixel region, in pixel corners.
///
/// The region must be connected under `connectivity`. `rects` is left empty.
pub fn trace_boundary(
    map: &ClusterMap,
    id: ClusterId,
    connectivity: Connectivity,
) -> Result<ClusterShape> {
    let bounds = bounds_of(map, id)?;
    let rings = trace::trace_rings(map, id.0, &bounds, connectivity);
    shape_from_rings(id, rings, Vec::new())
}

/// Disjoint rectangles covering exactly the pixels of `id`.
pub fn decompose_rectangles(map: &ClusterMap, id: ClusterId) -> Result<Vec<Rect>> {
    let bounds = bounds_of(map, id)?;
    Ok(rects::row_run_rectangles(map, id.0, &bounds))
}

/// Traces and decomposes every cluster of `map`, in ascending id order.
pub fn cluster_shapes(map: &ClusterMap, connectivity: Connectivity) -> Result<Vec<ClusterShape>> {
    all_bounds(map)
        .into_iter()
        .map(|(id, bounds)| {
            let rings = trace::trace_rings(map, id, &bounds, connectivity);
            let rects = rects::row_run_rectangles(map, id, &bounds);
            shape_from_rings(ClusterId(id), rings, rects)
        })
        .collect()
}

/// Maps a pixel-space shape into data coordinates.
pub fn to_data_space(shape: &ClusterShape, viewport: &Viewport) -> ClusterShape {
    let ring = |r: &PolygonRing| PolygonRing {
        vertices: r.vertices.iter().map(|&(x, y)| viewport.to_data(x, y)).collect(),
    };
    ClusterShape {
        cluster_id: shape.cluster_id,
        outer: ring(&shape.outer),
        holes: shape.holes.iter().map(ring).collect(),
        rects: shape
            .rects
            .iter()
            .map(|r| {
                let (x0, y0) = viewport.to_data(r.x0, r.y0);
                let (x1, y1) = viewport.to_data(r.x1, r.y1);
                Rect::new(x0, y0, x1, y1)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterEdge;
    use crate::oracles::rasterize_rings;

    const A: Option<ClusterId> = Some(ClusterId(0));

    fn map_from(rows: &[&str]) -> ClusterMap {
        // Rows are listed top (largest y) to bottom.
        let width = rows[0].len();
        let mut ids = Vec::new();
        for row in rows.iter().rev() {
            ids.extend(row.chars().map(|c| (c == '#').then_some(ClusterId(0))));
        }
        ClusterMap::from_ids(width, rows.len(), &ids).unwrap()
    }

    fn assert_round_trip(map: &ClusterMap, conn: Connectivity) -> ClusterShape {
        let shape = trace_boundary(map, ClusterId(0), conn).unwrap();
        let raster = rasterize_rings(&shape.rings(), map.width(), map.height());
        let expected: Vec<bool> = map.to_ids().iter().map(|c| *c == A).collect();
        assert_eq!(raster, expected);
        shape
    }

    #[test]
    fn single_pixel() {
        let mut ids = vec![None; 6 * 8];
        ids[5 * 6 + 3] = A;
        let m = ClusterMap::from_ids(6, 8, &ids).unwrap();
        let s = trace_boundary(&m, ClusterId(0), Connectivity::Eight).unwrap();
        assert_eq!(s.outer.vertices, vec![(3.0, 5.0), (4.0, 5.0), (4.0, 6.0), (3.0, 6.0)]);
        assert!(s.holes.is_empty());
    }

    #[test]
    fn solid_block() {
        let m = map_from(&[".....", ".###.", ".###.", ".###.", "....."]);
        let s = assert_round_trip(&m, Connectivity::Eight);
        assert_eq!(s.outer.vertices, vec![(1.0, 1.0), (4.0, 1.0), (4.0, 4.0), (1.0, 4.0)]);
        assert!(s.holes.is_empty());
    }

    #[test]
    fn ring_with_hole() {
        let m = map_from(&["###", "#.#", "###"]);
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let s = assert_round_trip(&m, conn);
            assert_eq!(s.outer.signed_area(), 9.0);
            assert_eq!(s.holes.len(), 1);
            assert_eq!(s.holes[0].signed_area(), -1.0);
            assert_eq!(s.area(), 8.0);
        }
    }

    #[test]
    fn diagonal_pixels_form_one_ring_when_eight_connected() {
        let m = map_from(&[".#", "#."]);
        let s = assert_round_trip(&m, Connectivity::Eight);
        assert_eq!(s.outer.vertices.len(), 8);
        assert!(trace_boundary(&m, ClusterId(0), Connectivity::Four).is_err());
    }

    #[test]
    fn diagonal_hole_corners() {
        // Background pixels touching at a corner form two separate holes.
        let m = map_from(&["####", "#.##", "##.#", "####"]);
        let s = assert_round_trip(&m, Connectivity::Eight);
        assert_eq!(s.holes.len(), 2);
    }

    #[test]
    fn unknown_cluster() {
        let m = map_from(&["#"]);
        assert!(matches!(
            trace_boundary(&m, ClusterId(3), Connectivity::Eight),
            Err(Error::ClusterNotFound(3))
        ));
        assert!(decompose_rectangles(&m, ClusterId(3)).is_err());
    }

    #[test]
    fn rectangles_block_and_tromino() {
        let block = map_from(&["##", "##"]);
        assert_eq!(
            decompose_rectangles(&block, ClusterId(0)).unwrap(),
            vec![Rect::new(0.0, 0.0, 2.0, 2.0)]
        );
        // Pixels (0,0), (0,1), (1,1).
        let tromino = map_from(&["##", "#."]);
        assert_eq!(
            decompose_rectangles(&tromino, ClusterId(0)).unwrap(),
            vec![Rect::new(0.0, 0.0, 1.0, 1.0), Rect::new(0.0, 1.0, 2.0, 2.0)]
        );
    }

    #[test]
    fn data_space_unit_pixels() {
        let v = Viewport::new(0.0, 10.0, 0.0, 10.0, 10, 10).unwrap();
        let mut ids = vec![None; 100];
        ids[0] = A;
        ids[99] = Some(ClusterId(1));
        let m = ClusterMap::from_ids(10, 10, &ids).unwrap();
        let shapes = cluster_shapes(&m, Connectivity::Eight).unwrap();
        let first = to_data_space(&shapes[0], &v);
        let last = to_data_space(&shapes[1], &v);
        assert_eq!(first.rects, vec![Rect::new(0.0, 0.0, 1.0, 1.0)]);
        assert_eq!(last.rects, vec![Rect::new(9.0, 9.0, 10.0, 10.0)]);
    }

    #[test]
    fn rect_serde_is_array() {
        let json = serde_json::to_string(&Rect::new(0.0, 1.5, 2.0, 3.0)).unwrap();
        assert_eq!(json, "[0.0,1.5,2.0,3.0]");
    }

    fn path_graph(n: u32) -> ClusterGraph {
        use crate::cluster::{BoundarySide, ClusterNode, Pixel};
        let side = BoundarySide {
            pixel: Pixel::new(0, 0),
            distance: 1.0,
        };
        let nodes = (0..n)
            .map(|i| ClusterNode {
                id: ClusterId(i),
                peak: Pixel::new(i as usize, 0),
                peak_density: 1.0,
                area_px: 1,
            })
            .collect();
        let edges = (1..n)
            .map(|i| ClusterEdge {
                a: ClusterId(i - 1),
                b: ClusterId(i),
                boundary_px_count: 1,
                max_boundary_density: 1.0,
                sides: [side; 2],
            })
            .collect();
        ClusterGraph::from_parts(nodes, edges)
    }

    use crate::cluster::ClusterGraph;

    #[test]
    fn coloring_adjacent_pair_differs() {
        let c = color_clusters(&path_graph(2), 10);
        assert_ne!(c.colors[&ClusterId(0)], c.colors[&ClusterId(1)]);
        assert_eq!(c.conflicts, 0);
    }

    #[test]
    fn coloring_without_edges_uses_zero() {
        let c = color_clusters(&path_graph(1), 10);
        assert_eq!(c.colors[&ClusterId(0)], 0);
    }

    #[test]
    fn coloring_path_with_two_colors() {
        let g = path_graph(5);
        let c = color_clusters(&g, 2);
        assert_eq!(c.conflicts, 0);
        for e in g.edges() {
            assert_ne!(c.colors[&e.a], c.colors[&e.b]);
        }
        assert!(c.colors.values().all(|&k| k < 2));
    }

    #[test]
    fn coloring_reports_conflicts_on_tiny_palette() {
        let c = color_clusters(&path_graph(3), 1);
        assert_eq!(c.conflicts, 2);
    }
}
