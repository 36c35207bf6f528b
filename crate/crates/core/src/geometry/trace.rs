use super::{Bounds, PolygonRing};
use crate::cluster::{ClusterMap, Connectivity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    East,
    North,
    West,
    South,
}

impl Dir {
    const ALL: [Dir; 4] = [Dir::East, Dir::North, Dir::West, Dir::South];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    fn left(self) -> Dir {
        Dir::ALL[(self as usize + 1) % 4]
    }

    fn right(self) -> Dir {
        Dir::ALL[(self as usize + 3) % 4]
    }

    fn step(self, x: usize, y: usize) -> (usize, usize) {
        match self {
            Dir::East => (x + 1, y),
            Dir::North => (x, y + 1),
            Dir::West => (x - 1, y),
            Dir::South => (x, y - 1),
        }
    }
}

/// Traces every boundary ring of the pixels labeled `id` inside `bounds`.
///
/// Rings follow pixel-cell edges with the region on the left, so outer
/// rings come out counterclockwise and holes clockwise (y up). Where two
/// region pixels touch only at a corner, 8-connectivity keeps them on one
/// ring and 4-connectivity splits them.
pub(crate) fn trace_rings(
    map: &ClusterMap,
    id: u32,
    bounds: &Bounds,
    connectivity: Connectivity,
) -> Vec<PolygonRing> {
    let ids = map.raw();
    let width = map.width();
    let inside = |x: isize, y: isize| -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < width
            && (y as usize) < map.height()
            && ids[y as usize * width + x as usize] == id
    };

    // Vertex grid local to the bounds: (bw + 1) x (bh + 1) corners.
    let (ox, oy) = (bounds.x0, bounds.y0);
    let vw = bounds.x1 - bounds.x0 + 1;
    let vh = bounds.y1 - bounds.y0 + 1;
    let mut exists = vec![0u8; vw * vh];
    let mut edge_count = 0usize;
    for y in bounds.y0..bounds.y1 {
        for x in bounds.x0..bounds.x1 {
            if ids[y * width + x] != id {
                continue;
            }
            let (lx, ly) = (x - ox, y - oy);
            let (xi, yi) = (x as isize, y as isize);
            if !inside(xi, yi - 1) {
                exists[ly * vw + lx] |= Dir::East.bit();
                edge_count += 1;
            }
            if !inside(xi + 1, yi) {
                exists[ly * vw + lx + 1] |= Dir::North.bit();
                edge_count += 1;
            }
            if !inside(xi, yi + 1) {
                exists[(ly + 1) * vw + lx + 1] |= Dir::West.bit();
                edge_count += 1;
            }
            if !inside(xi - 1, yi) {
                exists[(ly + 1) * vw + lx] |= Dir::South.bit();
                edge_count += 1;
            }
        }
    }

    let prefer = |incoming: Dir| -> [Dir; 3] {
        match connectivity {
            Connectivity::Eight => [incoming.right(), incoming, incoming.left()],
            Connectivity::Four => [incoming.left(), incoming, incoming.right()],
        }
    };

    let mut used = vec![0u8; vw * vh];
    let mut rings = Vec::new();
    let mut traced = 0usize;
    let mut cursor = 0usize;
    while traced < edge_count {
        while exists[cursor] & !used[cursor] == 0 {
            cursor += 1;
        }
        let start = cursor;
        let free = exists[start] & !used[start];
        let first = *Dir::ALL.iter().find(|d| free & d.bit() != 0).unwrap();

        let mut corners: Vec<(usize, usize)> = Vec::new();
        let (mut vx, mut vy) = (start % vw, start / vw);
        let mut dir = first;
        loop {
            used[vy * vw + vx] |= dir.bit();
            traced += 1;
            let (nx, ny) = dir.step(vx, vy);
            let v = ny * vw + nx;
            let next = *prefer(dir)
                .iter()
                .find(|d| exists[v] & d.bit() != 0)
                .expect("boundary edges form closed rings");
            if next != dir {
                corners.push((nx, ny));
            }
            if used[v] & next.bit() != 0 {
                debug_assert!(v == start && next == first);
                break;
            }
            (vx, vy, dir) = (nx, ny, next);
        }

        let lowest = (0..corners.len())
            .min_by_key(|&k| (corners[k].1, corners[k].0))
            .unwrap_or(0);
        corners.rotate_left(lowest);
        rings.push(PolygonRing {
            vertices: corners
                .into_iter()
                .map(|(x, y)| ((x + ox) as f64, (y + oy) as f64))
                .collect(),
        });
    }
    rings
}
