//! SVG rendering of a cluster document.

use std::fmt::Write;

use kdecluster::document::{ClusterDocument, GeometrySpace};
use kdecluster::geometry::PolygonRing;
use kdecluster::DensityMap;

/// Tableau 10.
pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

const UNDERLAY_LEVELS: usize = 8;

fn num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{}", r + 0.0)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders one filled path per cluster in pixel space, y up. Holes are cut
/// with the even-odd rule. `palette` colors are used cyclically.
pub fn render_svg(doc: &ClusterDocument, palette: usize, underlay: Option<&DensityMap>) -> String {
    let (w, h) = (doc.viewport.width, doc.viewport.height);
    let to_svg = |x: f64, y: f64| -> (f64, f64) {
        let (px, py) = match doc.space {
            GeometrySpace::Data => doc.viewport.to_pixel(x, y),
            GeometrySpace::Pixel => (x, y),
        };
        (px, h as f64 - py)
    };
    let ring_path = |out: &mut String, ring: &PolygonRing| {
        for (k, &(x, y)) in ring.vertices.iter().enumerate() {
            let (sx, sy) = to_svg(x, y);
            let _ = write!(out, "{}{} {}", if k == 0 { "M" } else { "L" }, num(sx), num(sy));
        }
        out.push('Z');
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    if let Some(density) = underlay {
        render_underlay(&mut out, density);
    }
    for c in &doc.clusters {
        let mut d = String::new();
        ring_path(&mut d, &c.outer);
        for hole in &c.holes {
            ring_path(&mut d, hole);
        }
        let fill = PALETTE[c.color % palette.clamp(1, PALETTE.len())];
        let _ = write!(
            out,
            r#"<path data-cluster="{}" fill="{fill}" fill-opacity="0.6" fill-rule="evenodd" stroke="{fill}" stroke-width="1" d="{d}">"#,
            c.id
        );
        let mut title = format!("cluster {}", c.id);
        if let Some(label) = &c.label {
            let terms: Vec<&str> = label.iter().map(|(t, _)| t.as_str()).collect();
            let _ = write!(title, ": {}", terms.join(", "));
        }
        let _ = writeln!(out, "<title>{}</title></path>", escape(&title));
    }
    out.push_str("</svg>\n");
    out
}

/// Gray row runs of the density map quantized to a few opacity levels.
fn render_underlay(out: &mut String, density: &DensityMap) {
    let (w, h) = (density.width(), density.height());
    let max = density.max();
    if !(max > 0.0) {
        return;
    }
    let level = |v: f64| ((v / max * UNDERLAY_LEVELS as f64).ceil() as usize).min(UNDERLAY_LEVELS);
    out.push_str("<g fill=\"#000000\">\n");
    for y in 0..h {
        let mut x = 0;
        while x < w {
            let l = level(density.get(x, y));
            let start = x;
            while x < w && level(density.get(x, y)) == l {
                x += 1;
            }
            if l > 0 {
                let _ = writeln!(
                    out,
                    r#"<rect x="{start}" y="{}" width="{}" height="1" fill-opacity="{}"/>"#,
                    h - 1 - y,
                    x - start,
                    num(0.4 * l as f64 / UNDERLAY_LEVELS as f64)
                );
            }
        }
    }
    out.push_str("</g>\n");
}
