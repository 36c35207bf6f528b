use super::{ClusterMap, Connectivity, Neighbors, BACKGROUND};
use crate::disjoint_set::DisjointSet;
use crate::grid::DensityMap;

/// Index of the densest neighbor of pixel `i`, ties to the smallest index.
#[cfg(test)]
pub(crate) fn densest_neighbor(
    values: &[f64],
    width: usize,
    height: usize,
    i: usize,
    connectivity: Connectivity,
) -> Option<usize> {
    densest(values, &Neighbors::new(connectivity, width, height), i % width, i / width, i)
}

#[inline(always)]
fn densest(values: &[f64], neighbors: &Neighbors, x: usize, y: usize, i: usize) -> Option<usize> {
    if let Some(offsets) = neighbors.interior_offsets(x, y) {
        let (mut bd, mut bj) = (f64::NEG_INFINITY, i);
        for &o in offsets {
            let j = i.wrapping_add_signed(o);
            let d = values[j];
            let better = d > bd;
            bd = if better { d } else { bd };
            bj = if better { j } else { bj };
        }
        return Some(bj);
    }
    let mut best: Option<(f64, usize)> = None;
    neighbors.for_each(x, y, i, |j| {
        let d = values[j];
        match best {
            Some((bd, bj)) if d < bd || (d == bd && j > bj) => {}
            _ => best = Some((d, j)),
        }
    });
    best.map(|(_, j)| j)
}

/// Groups positive pixels by hill climbing.
///
/// Each pixel is unioned with its densest neighbor when that neighbor is at
/// least as dense. Zero pixels are background. Ids are handed out in scan
/// order of the first pixel of each set.
pub fn initial_clusters(density: &DensityMap, connectivity: Connectivity) -> ClusterMap {
    let (width, height) = (density.width(), density.height());
    let values = density.values();
    let mut sets = DisjointSet::new(values.len());

    let neighbors = Neighbors::new(connectivity, width, height);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let d = values[i];
            if d <= 0.0 {
                continue;
            }
            if let Some(j) = densest(values, &neighbors, x, y, i) {
                if values[j] >= d {
                    sets.union(i, j);
                }
            }
        }
    }

    let mut root_ids = vec![BACKGROUND; values.len()];
    let mut ids = vec![BACKGROUND; values.len()];
    let mut next = 0u32;
    for (i, &d) in values.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        let root = sets.find(i);
        if root_ids[root] == BACKGROUND {
            root_ids[root] = next;
            next += 1;
        }
        ids[i] = root_ids[root];
    }
    ClusterMap { width, height, ids }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{ClusterId, Pixel};

    #[test]
    fn zero_map_is_background() {
        let d = DensityMap::from_pixels(8, 8, vec![0.0; 64]).unwrap();
        let m = initial_clusters(&d, Connectivity::Eight);
        assert!(m.cluster_ids().is_empty());
    }

    #[test]
    fn single_bump_is_one_cluster() {
        let mut values = vec![0.0; 25];
        for y in 0..5 {
            for x in 0..5 {
                let r2 = ((x as f64 - 2.0).powi(2) + (y as f64 - 2.0).powi(2)) as f64;
                values[y * 5 + x] = 10.0 - r2;
            }
        }
        let d = DensityMap::from_pixels(5, 5, values).unwrap();
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let m = initial_clusters(&d, conn);
            assert_eq!(m.cluster_ids(), vec![ClusterId(0)]);
            assert_eq!(m.area_of(ClusterId(0)), 25);
        }
    }

    #[test]
    fn isolated_positive_pixels_are_separate() {
        let mut values = vec![0.0; 9];
        values[0] = 1.0;
        values[8] = 2.0;
        let d = DensityMap::from_pixels(3, 3, values).unwrap();
        // Diagonal gap of zeros keeps them apart even with 8-connectivity.
        let m = initial_clusters(&d, Connectivity::Eight);
        assert_eq!(m.get(0, 0), Some(ClusterId(0)));
        assert_eq!(m.get(2, 2), Some(ClusterId(1)));
        assert_eq!(m.pixels_of(ClusterId(1)), vec![Pixel::new(2, 2)]);
    }

    #[test]
    fn diagonal_drainage_depends_on_connectivity() {
        // Two peaks touching only diagonally.
        let d = DensityMap::from_pixels(2, 2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(initial_clusters(&d, Connectivity::Eight).cluster_ids().len(), 1);
        assert_eq!(initial_clusters(&d, Connectivity::Four).cluster_ids().len(), 2);
    }

    #[test]
    fn plateau_unions_transitively() {
        let d = DensityMap::from_pixels(4, 1, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let m = initial_clusters(&d, Connectivity::Four);
        assert_eq!(m.cluster_ids(), vec![ClusterId(0)]);
    }

    #[test]
    fn tie_goes_to_smallest_index() {
        let values = [0.0, 5.0, 0.0, 5.0, 1.0, 5.0, 0.0, 5.0, 0.0];
        assert_eq!(densest_neighbor(&values, 3, 3, 4, Connectivity::Four), Some(1));
        assert_eq!(densest_neighbor(&values, 3, 3, 4, Connectivity::Eight), Some(1));
    }
}
