//! Self-contained SVG of the phase plane: reference orbit, series curve, and
//! the first self-crossing of the series curve.

use std::fmt::Write;

use crate::diagnostics::SelfIntersection;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn of(points: &[(f64, f64)]) -> Self {
        let mut b = Bounds {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for &(x, y) in points {
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y0 = b.y0.min(y);
            b.y1 = b.y1.max(y);
        }
        b
    }

    fn include(&mut self, x: f64, y: f64) {
        self.x0 = self.x0.min(x);
        self.x1 = self.x1.max(x);
        self.y0 = self.y0.min(y);
        self.y1 = self.y1.max(y);
    }

    /// Grows each side by `frac` of the span; degenerate spans become unit width.
    fn padded(self, frac: f64) -> Self {
        let pad = |lo: f64, hi: f64| {
            let span = if hi > lo { hi - lo } else { 1.0 };
            (lo - frac * span, hi + frac * span)
        };
        let (x0, x1) = pad(self.x0, self.x1);
        let (y0, y1) = pad(self.y0, self.y1);
        Bounds { x0, x1, y0, y1 }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let inner_w = WIDTH * (1.0 - 2.0 * MARGIN);
        let inner_h = HEIGHT * (1.0 - 2.0 * MARGIN);
        let px = WIDTH * MARGIN + (x - self.x0) / (self.x1 - self.x0) * inner_w;
        let py = HEIGHT * (1.0 - MARGIN) - (y - self.y0) / (self.y1 - self.y0) * inner_h;
        (px, py)
    }
}

fn polyline(out: &mut String, bounds: &Bounds, points: &[(f64, f64)], class: &str, style: &str) {
    let _ = write!(out, r#"<polyline class="{class}" fill="none" {style} clip-path="url(#plot)" points=""#);
    for (k, &(x, y)) in points.iter().enumerate() {
        let (px, py) = bounds.map(x, y);
        // Clamp far-off series values so coordinates stay printable.
        let px = px.clamp(-1e6, 1e6);
        let py = py.clamp(-1e6, 1e6);
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{px:.3},{py:.3}");
    }
    out.push_str("\"/>\n");
}

/// Renders the phase-plane figure.
///
/// The view is fitted to the reference orbit (plus the crossing point, when
/// present) and padded by half its span, so the diverging series curve is
/// clipped rather than flattening the orbit.
pub fn phase_plane_svg(
    title: &str,
    reference: &[(f64, f64)],
    approx: &[(f64, f64)],
    crossing: Option<&SelfIntersection>,
) -> String {
    let mut bounds = Bounds::of(reference);
    if let Some(c) = crossing {
        bounds.include(c.x, c.y);
    }
    let view = bounds.padded(0.5);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let (cx, cy) = (WIDTH * MARGIN, HEIGHT * MARGIN);
    let (cw, ch) = (WIDTH * (1.0 - 2.0 * MARGIN), HEIGHT * (1.0 - 2.0 * MARGIN));
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="plot"><rect x="{cx}" y="{cy}" width="{cw}" height="{ch}"/></clipPath></defs>"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r##"<rect x="{cx}" y="{cy}" width="{cw}" height="{ch}" fill="none" stroke="#888" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT * MARGIN - 8.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">x [{:.4}, {:.4}]   y [{:.4}, {:.4}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 8.0,
        view.x0,
        view.x1,
        view.y0,
        view.y1
    );
    polyline(&mut out, &view, reference, "reference", r##"stroke="#1f4e9c" stroke-width="2""##);
    polyline(
        &mut out,
        &view,
        approx,
        "series",
        r##"stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6 4""##,
    );
    if let Some(c) = crossing {
        let (px, py) = view.map(c.x, c.y);
        let _ = writeln!(
            out,
            r##"<circle class="crossing" cx="{px:.3}" cy="{py:.3}" r="5" fill="none" stroke="#000" stroke-width="2"/>"##
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_polylines_and_a_marker() {
        let r = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)];
        let a = [(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)];
        let c = SelfIntersection { i: 0, j: 2, x: 1.0, y: 1.0 };
        let svg = phase_plane_svg("t <x>", &r, &a, Some(&c));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("class=\"crossing\"").count(), 1);
        assert!(svg.contains("viewBox=\"0 0 800 600\""));
        assert!(svg.contains("t &lt;x&gt;"));
        assert!(!phase_plane_svg("", &r, &a, None).contains("<circle"));
    }

    #[test]
    fn margins_map_to_the_frame() {
        let b = Bounds { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        let close = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs() < 1e-9 && (p.1 - q.1).abs() < 1e-9;
        assert!(close(b.map(0.0, 0.0), (40.0, 570.0)));
        assert!(close(b.map(1.0, 1.0), (760.0, 30.0)));
    }
}
