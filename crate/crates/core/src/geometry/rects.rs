use std::collections::HashMap;

use super::{Bounds, Rect};
use crate::cluster::ClusterMap;

/// Exact cover of the pixels labeled `id` by disjoint rectangles.
///
/// Each row is split into maximal runs; a run with the same x-extent as a
/// rectangle ending on the previous row extends that rectangle downward
/// (upward in y). Output is ordered by `(y0, x0)`.
pub(crate) fn row_run_rectangles(map: &ClusterMap, id: u32, bounds: &Bounds) -> Vec<Rect> {
    let ids = map.raw();
    let width = map.width();
    let mut rects: Vec<[usize; 4]> = Vec::new();
    let mut open: HashMap<(usize, usize), usize> = HashMap::new();
    let mut next_open = HashMap::new();

    for y in bounds.y0..bounds.y1 {
        let row = &ids[y * width..(y + 1) * width];
        let mut x = bounds.x0;
        while x < bounds.x1 {
            if row[x] != id {
                x += 1;
                continue;
            }
            let start = x;
            while x < bounds.x1 && row[x] == id {
                x += 1;
            }
            let key = (start, x);
            let idx = match open.get(&key) {
                Some(&idx) => {
                    rects[idx][3] = y + 1;
                    idx
                }
                None => {
                    rects.push([start, y, x, y + 1]);
                    rects.len() - 1
                }
            };
            next_open.insert(key, idx);
        }
        std::mem::swap(&mut open, &mut next_open);
        next_open.clear();
    }

    rects
        .into_iter()
        .map(|[x0, y0, x1, y1]| Rect::new(x0 as f64, y0 as f64, x1 as f64, y1 as f64))
        .collect()
}
