//! Deliberately naive reference implementations.
//!
//! These exist to pin down the semantics of the fast paths in tests and in
//! the acceptance suite. They share only definitions (neighbor offsets,
//! kernel radius) with the code they check, never the algorithms.

use std::collections::HashMap;

use crate::cluster::{ClusterId, ClusterMap, Connectivity};
use crate::error::{Error, Result};
use crate::grid::{kernel_radius, DensityMap};

/// Largest grid side accepted by [`dense_convolution_oracle`].
pub const DENSE_ORACLE_MAX_SIDE: usize = 128;

/// Labels each positive pixel by where a step-by-step uphill walk ends.
///
/// A step goes to the densest neighbor (smallest linear index on ties)
/// whenever it is at least as dense as the current pixel. On a plateau the
/// walk can fall into a cycle of equal pixels; the cycle is then the
/// terminal and is named by its smallest index. Ids are numbered in scan
/// order of the first pixel reaching each terminal.
pub fn steepest_ascent_oracle(density: &DensityMap, connectivity: Connectivity) -> ClusterMap {
    let (w, h) = (density.width(), density.height());
    let values = density.values();

    let step = |i: usize| -> Option<usize> {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        let mut best: Option<usize> = None;
        for &(dx, dy) in connectivity.offsets() {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            best = match best {
                None => Some(j),
                Some(b) if values[j] > values[b] || (values[j] == values[b] && j < b) => Some(j),
                keep => keep,
            };
        }
        best.filter(|&j| values[j] >= values[i])
    };

    let mut terminal_ids: HashMap<usize, u32> = HashMap::new();
    let mut ids = vec![None; values.len()];
    for start in 0..values.len() {
        if values[start] <= 0.0 {
            continue;
        }
        let mut path = vec![start];
        let terminal = loop {
            let here = *path.last().unwrap();
            match step(here) {
                None => break here,
                Some(next) => {
                    if let Some(pos) = path.iter().position(|&p| p == next) {
                        break *path[pos..].iter().min().unwrap();
                    }
                    path.push(next);
                }
            }
        };
        let next_id = terminal_ids.len() as u32;
        let id = *terminal_ids.entry(terminal).or_insert(next_id);
        ids[start] = Some(ClusterId(id));
    }
    ClusterMap::from_ids(w, h, &ids).expect("dimensions match")
}

/// Direct 2D convolution with the truncated, renormalized Gaussian.
pub fn dense_convolution_oracle(counts: &DensityMap, sigma: f64) -> Result<DensityMap> {
    let (w, h) = (counts.width(), counts.height());
    if w > DENSE_ORACLE_MAX_SIDE || h > DENSE_ORACLE_MAX_SIDE {
        return Err(Error::param(
            "counts",
            format!("dense oracle accepts grids up to {DENSE_ORACLE_MAX_SIDE}x{DENSE_ORACLE_MAX_SIDE}"),
        ));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", "must be finite and >= 0"));
    }
    if sigma == 0.0 {
        return Ok(counts.clone());
    }
    let r = kernel_radius(sigma) as isize;
    let side = (2 * r + 1) as usize;
    let mut kernel = vec![0.0; side * side];
    for j in -r..=r {
        for i in -r..=r {
            kernel[((j + r) as usize) * side + (i + r) as usize] =
                (-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp();
        }
    }
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for j in -r..=r {
                for i in -r..=r {
                    let (sx, sy) = (x - i, y - j);
                    if sx < 0 || sy < 0 || sx >= w as isize || sy >= h as isize {
                        continue;
                    }
                    acc += counts.get(sx as usize, sy as usize)
                        * kernel[((j + r) as usize) * side + (i + r) as usize];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    DensityMap::from_values(*counts.viewport(), out)
}

/// Number of connected components of the pixels labeled `id`.
pub fn flood_fill_components(map: &ClusterMap, id: ClusterId, connectivity: Connectivity) -> usize {
    let (w, h) = (map.width(), map.height());
    let mut seen = vec![false; w * h];
    let mut components = 0;
    for start in 0..w * h {
        if seen[start] || map.get_index(start) != Some(id) {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !seen[j] && map.get_index(j) == Some(id) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    components
}

/// Pixels whose centers fall inside `rings` under the even-odd rule.
/// Rings are closed implicitly and given in pixel coordinates.
pub fn rasterize_rings(rings: &[Vec<(f64, f64)>], width: usize, height: usize) -> Vec<bool> {
    let mut inside = vec![false; width * height];
    for y in 0..height {
        let cy = y as f64 + 0.5;
        for x in 0..width {
            let cx = x as f64 + 0.5;
            let mut crossings = 0;
            for ring in rings {
                for k in 0..ring.len() {
                    let (x0, y0) = ring[k];
                    let (x1, y1) = ring[(k + 1) % ring.len()];
                    if (y0 > cy) != (y1 > cy) {
                        let t = (cy - y0) / (y1 - y0);
                        if cx < x0 + t * (x1 - x0) {
                            crossings += 1;
                        }
                    }
                }
            }
            inside[y * width + x] = crossings % 2 == 1;
        }
    }
    inside
}

/// Point-in-polygon for an outer ring with holes, even-odd rule.
pub fn point_in_rings(rings: &[Vec<(f64, f64)>], px: f64, py: f64) -> bool {
    let mut inside = false;
    for ring in rings {
        for k in 0..ring.len() {
            let (x0, y0) = ring[k];
            let (x1, y1) = ring[(k + 1) % ring.len()];
            if (y0 > py) != (y1 > py) {
                let t = (py - y0) / (y1 - y0);
                if px < x0 + t * (x1 - x0) {
                    inside = !inside;
                }
            }
        }
    }
    inside
}
