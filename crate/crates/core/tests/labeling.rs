use std::collections::BTreeSet;

use kdecluster::document::{ClusterDocument, GeometrySpace, RunParams};
use kdecluster::geometry::{cluster_shapes, to_data_space, ClusterShape};
use kdecluster::grid::{auto_viewport, bin_points, smooth};
use kdecluster::labeling::{assign_documents, ctfidf_labels, emit_sql_predicate, tokenize};
use kdecluster::oracles::point_in_rings;
use kdecluster::synthetic::{fixture_corpus, planted_topics, rng, PLANTED_TOPICS};
use kdecluster::{cluster_density_map, ClusterParams, Point2D, Viewport};
use rand::Rng;
use rusqlite::Connection;

/// Fixture shapes in data space, plus random points and the viewport.
fn fixture_cases() -> Vec<(String, Viewport, Vec<ClusterShape>, Vec<Point2D>)> {
    let mut r = rng(77);
    fixture_corpus()
        .into_iter()
        .map(|f| {
            let (w, h) = (f.density.width(), f.density.height());
            let viewport = Viewport::new(-2.5, 3.0 * w as f64 - 2.5, 10.0, 10.0 + 0.5 * h as f64, w, h).unwrap();
            let c = cluster_density_map(&f.density, &f.params).unwrap();
            let shapes: Vec<_> = cluster_shapes(&c.map, f.params.connectivity)
                .unwrap()
                .iter()
                .map(|s| to_data_space(s, &viewport))
                .collect();
            let mut points: Vec<Point2D> = (0..2000)
                .map(|_| {
                    Point2D::new(
                        r.gen_range(viewport.x_min..viewport.x_max),
                        r.gen_range(viewport.y_min..viewport.y_max),
                    )
                })
                .collect();
            // Points exactly on rectangle corners exercise the half-open edges.
            for s in &shapes {
                for rect in s.rects.iter().take(5) {
                    points.push(Point2D::new(rect.x0, rect.y0));
                    points.push(Point2D::new(rect.x1, rect.y1));
                    points.push(Point2D::new(rect.x1, rect.y0));
                }
            }
            (f.name, viewport, shapes, points)
        })
        .collect()
}

#[test]
fn sql_predicates_select_assigned_rows() {
    let db = Connection::open_in_memory().unwrap();
    for (name, viewport, shapes, points) in fixture_cases() {
        db.execute_batch("DROP TABLE IF EXISTS pts; CREATE TABLE pts (id INTEGER PRIMARY KEY, px REAL, py REAL);")
            .unwrap();
        {
            let mut insert = db.prepare("INSERT INTO pts VALUES (?1, ?2, ?3)").unwrap();
            for (i, p) in points.iter().enumerate() {
                insert.execute((i as i64, p.x, p.y)).unwrap();
            }
        }
        let assignment = assign_documents(&points, &shapes, &viewport);
        for shape in &shapes {
            let predicate = emit_sql_predicate(shape, "px", "py").unwrap();
            let mut stmt = db
                .prepare(&format!("SELECT id FROM pts WHERE {predicate} ORDER BY id"))
                .unwrap();
            let rows: Vec<usize> = stmt
                .query_map([], |row| row.get::<_, i64>(0))
                .unwrap()
                .map(|r| r.unwrap() as usize)
                .collect();
            assert_eq!(rows, assignment.clusters[&shape.cluster_id], "{name} cluster {}", shape.cluster_id);
        }
    }
}

#[test]
fn assignment_matches_point_in_polygon() {
    let mut r = rng(5);
    for (name, viewport, shapes, _) in fixture_cases() {
        // Pixel centers avoid points on polygon edges, where containment is
        // ambiguous for the polygon test.
        let points: Vec<Point2D> = (0..3000)
            .map(|_| {
                let px = r.gen_range(0..viewport.width) as f64 + r.gen_range(0.01..0.99);
                let py = r.gen_range(0..viewport.height) as f64 + r.gen_range(0.01..0.99);
                let (x, y) = viewport.to_data(px, py);
                Point2D::new(x, y)
            })
            .collect();
        let assignment = assign_documents(&points, &shapes, &viewport);
        for (i, p) in points.iter().enumerate() {
            let want: Vec<_> = shapes
                .iter()
                .filter(|s| point_in_rings(&s.rings(), p.x, p.y))
                .map(|s| s.cluster_id)
                .collect();
            assert!(want.len() <= 1);
            assert_eq!(assignment.cluster_of(i), want.first().copied(), "{name} point {i}");
        }
    }
}

fn planted_document(per_blob: usize, params: ClusterParams) -> (ClusterDocument, Vec<Point2D>) {
    let points = planted_topics(42, per_blob);
    let viewport = auto_viewport(&points, 100, 100, 0.1).unwrap();
    let counts = bin_points(&points, &viewport).unwrap().counts;
    let density = smooth(&counts, 4.0).unwrap();
    let clustering = cluster_density_map(&density, &params).unwrap();
    let run = RunParams {
        bandwidth_px: 4.0,
        cluster: params,
    };
    (
        ClusterDocument::build(viewport, run, &clustering, 10, GeometrySpace::Data).unwrap(),
        points,
    )
}

#[test]
fn planted_topics_are_recovered() {
    let (doc, points) = planted_document(400, ClusterParams::default());
    assert_eq!(doc.clusters.len(), 3);
    let assignment = assign_documents(&points, &doc.data_shapes(), &doc.viewport);
    let tokens: Vec<Vec<String>> = points
        .iter()
        .map(|p| tokenize(p.text.as_deref().unwrap_or("")))
        .collect();
    let labels = ctfidf_labels(&assignment, &tokens, 5).unwrap();
    let mut seen = BTreeSet::new();
    for label in &labels {
        let docs = &assignment.clusters[&label.cluster_id];
        // The cluster's planted word is the one carried by most of its documents.
        let planted = PLANTED_TOPICS
            .iter()
            .max_by_key(|t| docs.iter().filter(|&&d| tokens[d].contains(&t.to_string())).count())
            .unwrap();
        assert_eq!(&label.top_terms[0].0, planted);
        seen.insert(label.top_terms[0].0.clone());
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn labels_are_deterministic() {
    let run = || {
        let (doc, points) = planted_document(150, ClusterParams::default());
        let assignment = assign_documents(&points, &doc.data_shapes(), &doc.viewport);
        let tokens: Vec<Vec<String>> = points
            .iter()
            .map(|p| tokenize(p.text.as_deref().unwrap_or("")))
            .collect();
        serde_json::to_string(&ctfidf_labels(&assignment, &tokens, 3).unwrap()).unwrap()
    };
    assert_eq!(run(), run());
}
