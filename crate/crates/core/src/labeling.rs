//! Cluster labels from text via class-based TF-IDF, and SQL predicates that
//! select a cluster's rows from a table of projected points.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterId;
use crate::error::{Error, Result};
use crate::geometry::{ClusterShape, Rect};
use crate::grid::{Point2D, Viewport};

static STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Lowercases, splits on non-alphanumerics and drops short tokens and
/// stopwords (see `data/stopwords.txt`).
pub fn tokenize(text: &str) -> Vec<String> {
    let stop = stopwords();
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !stop.contains(t))
        .map(str::to_owned)
        .collect()
}

/// Document indices per cluster.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub clusters: BTreeMap<ClusterId, Vec<usize>>,
    pub unassigned: Vec<usize>,
}

impl Assignment {
    pub fn cluster_of(&self, doc: usize) -> Option<ClusterId> {
        self.clusters
            .iter()
            .find(|(_, docs)| docs.binary_search(&doc).is_ok())
            .map(|(id, _)| *id)
    }
}

/// Pixel-aligned lookup from grid cells to the rectangle covering them.
struct RectIndex<'a> {
    viewport: &'a Viewport,
    owner: Vec<u32>,
    rects: Vec<(ClusterId, Rect)>,
}

impl<'a> RectIndex<'a> {
    const NONE: u32 = u32::MAX;

    /// `None` when some rectangle does not sit on the viewport's pixel grid.
    fn build(shapes: &[ClusterShape], viewport: &'a Viewport) -> Option<Self> {
        let mut owner = vec![Self::NONE; viewport.len()];
        let mut rects = Vec::new();
        for shape in shapes {
            for r in &shape.rects {
                let (fx0, fy0) = viewport.to_pixel(r.x0, r.y0);
                let (fx1, fy1) = viewport.to_pixel(r.x1, r.y1);
                let snap = |v: f64, max: usize| -> Option<usize> {
                    let k = v.round();
                    ((v - k).abs() < 1e-6 && k >= 0.0 && k <= max as f64).then_some(k as usize)
                };
                let x0 = snap(fx0, viewport.width)?;
                let x1 = snap(fx1, viewport.width)?;
                let y0 = snap(fy0, viewport.height)?;
                let y1 = snap(fy1, viewport.height)?;
                let idx = rects.len() as u32;
                rects.push((shape.cluster_id, *r));
                for y in y0..y1 {
                    for x in x0..x1 {
                        owner[y * viewport.width + x] = idx;
                    }
                }
            }
        }
        Some(Self {
            viewport,
            owner,
            rects,
        })
    }

    fn lookup(&self, x: f64, y: f64) -> Option<ClusterId> {
        let (fx, fy) = self.viewport.to_pixel(x, y);
        if !(fx.is_finite() && fy.is_finite()) {
            return None;
        }
        let (w, h) = (self.viewport.width as i64, self.viewport.height as i64);
        let (px, py) = (fx.floor() as i64, fy.floor() as i64);
        for cy in (py - 1).max(0)..=(py + 1).min(h - 1) {
            for cx in (px - 1).max(0)..=(px + 1).min(w - 1) {
                let idx = self.owner[(cy * w + cx) as usize];
                if idx == Self::NONE {
                    continue;
                }
                let (id, rect) = &self.rects[idx as usize];
                if rect.contains(x, y) {
                    return Some(*id);
                }
            }
        }
        None
    }
}

/// Assigns each point to the cluster whose data-space rectangles contain it
/// (half-open). Points outside every rectangle stay unassigned.
pub fn assign_documents(
    points: &[Point2D],
    shapes: &[ClusterShape],
    viewport: &Viewport,
) -> Assignment {
    let mut assignment = Assignment::default();
    for shape in shapes {
        assignment.clusters.entry(shape.cluster_id).or_default();
    }
    let index = RectIndex::build(shapes, viewport);
    for (i, p) in points.iter().enumerate() {
        let hit = match &index {
            Some(index) => index.lookup(p.x, p.y),
            None => shapes
                .iter()
                .find(|s| s.rects.iter().any(|r| r.contains(p.x, p.y)))
                .map(|s| s.cluster_id),
        };
        match hit {
            Some(id) => assignment.clusters.entry(id).or_default().push(i),
            None => assignment.unassigned.push(i),
        }
    }
    assignment
}

/// Occurrence counts for one term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermStats {
    pub term: String,
    pub per_cluster_count: BTreeMap<ClusterId, u64>,
    /// Occurrences over all documents, clustered or not.
    pub corpus_count: u64,
}

/// Counts every term per cluster and over the whole corpus. Sorted by term.
pub fn term_stats(assignment: &Assignment, documents: &[Vec<String>]) -> Vec<TermStats> {
    let mut stats: HashMap<&str, TermStats> = HashMap::new();
    let mut owner: HashMap<usize, ClusterId> = HashMap::new();
    for (id, docs) in &assignment.clusters {
        for &d in docs {
            owner.insert(d, *id);
        }
    }
    for (i, tokens) in documents.iter().enumerate() {
        let cluster = owner.get(&i).copied();
        for t in tokens {
            let s = stats.entry(t.as_str()).or_insert_with(|| TermStats {
                term: t.clone(),
                per_cluster_count: BTreeMap::new(),
                corpus_count: 0,
            });
            s.corpus_count += 1;
            if let Some(c) = cluster {
                *s.per_cluster_count.entry(c).or_default() += 1;
            }
        }
    }
    let mut out: Vec<TermStats> = stats.into_values().collect();
    out.sort_by(|a, b| a.term.cmp(&b.term));
    out
}

/// Top terms for one cluster, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelResult {
    #[serde(rename = "id")]
    pub cluster_id: ClusterId,
    #[serde(rename = "label")]
    pub top_terms: Vec<(String, f64)>,
}

/// Scores terms per cluster with `tf(t, c) * ln(1 + A / f(t))`, where `tf` is
/// the term's share of the cluster's tokens, `A` the mean token count per
/// cluster and `f(t)` the term's corpus-wide count. Keeps the `k` best,
/// ties broken by term.
pub fn ctfidf_labels(
    assignment: &Assignment,
    documents: &[Vec<String>],
    k: usize,
) -> Result<Vec<LabelResult>> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let stats = term_stats(assignment, documents);
    let mut totals: BTreeMap<ClusterId, u64> = assignment.clusters.keys().map(|&c| (c, 0)).collect();
    for s in &stats {
        for (c, n) in &s.per_cluster_count {
            *totals.entry(*c).or_default() += n;
        }
    }
    let clusters = totals.len().max(1) as f64;
    let mean_tokens = totals.values().sum::<u64>() as f64 / clusters;

    let mut scored: BTreeMap<ClusterId, Vec<(String, f64)>> =
        totals.keys().map(|&c| (c, Vec::new())).collect();
    for s in &stats {
        let idf = (1.0 + mean_tokens / s.corpus_count as f64).ln();
        for (c, &n) in &s.per_cluster_count {
            let tf = n as f64 / totals[c] as f64;
            scored.get_mut(c).unwrap().push((s.term.clone(), tf * idf));
        }
    }
    Ok(scored
        .into_iter()
        .map(|(cluster_id, mut terms)| {
            terms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            terms.truncate(k);
            LabelResult {
                cluster_id,
                top_terms: terms,
            }
        })
        .collect())
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// SQL `WHERE` predicate selecting points inside the shape's rectangles:
/// one half-open range conjunct per rectangle, joined by `OR`.
pub fn emit_sql_predicate(shape: &ClusterShape, x_column: &str, y_column: &str) -> Result<String> {
    for (name, column) in [("x_column", x_column), ("y_column", y_column)] {
        if !valid_identifier(column) {
            return Err(Error::param(name, format!("`{column}` is not a plain SQL identifier")));
        }
    }
    if shape.rects.is_empty() {
        return Err(Error::param("shape", "no rectangles to emit"));
    }
    let conjuncts: Vec<String> = shape
        .rects
        .iter()
        .map(|r| {
            format!(
                "({x} >= {} AND {x} < {} AND {y} >= {} AND {y} < {})",
                r.x0,
                r.x1,
                r.y0,
                r.y1,
                x = x_column,
                y = y_column
            )
        })
        .collect();
    Ok(conjuncts.join(" OR "))
}
