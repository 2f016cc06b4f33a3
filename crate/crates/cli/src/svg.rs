//! Minimal SVG writer. World coordinates are meters with y up; the
//! document flips y so the area's origin sits bottom-left.

use std::fmt::Write;

use loiter_core::geometry::{LoiterCircle, Vec2};

const MARGIN: f64 = 40.0;

pub struct Canvas {
    min: Vec2,
    max: Vec2,
    scale: f64,
    body: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Canvas {
    /// Canvas showing the world box `[min, max]` at `width` pixels.
    pub fn new(min: Vec2, max: Vec2, width: f64) -> Self {
        let span = (max.x - min.x).max(1e-9);
        Self { min, max, scale: width / span, body: String::new() }
    }

    fn px(&self, p: Vec2) -> (f64, f64) {
        (MARGIN + (p.x - self.min.x) * self.scale, MARGIN + (self.max.y - p.y) * self.scale)
    }

    fn size(&self) -> (f64, f64) {
        (
            2.0 * MARGIN + (self.max.x - self.min.x) * self.scale,
            2.0 * MARGIN + (self.max.y - self.min.y) * self.scale,
        )
    }

    pub fn rect(&mut self, lo: Vec2, hi: Vec2, style: &str) {
        let (x0, y0) = self.px(Vec2::new(lo.x, hi.y));
        let (x1, y1) = self.px(Vec2::new(hi.x, lo.y));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" style="{}"/>"#,
            x1 - x0,
            y1 - y0,
            esc(style)
        );
    }

    /// The only emitter of `<circle>`: one per loiter circle.
    pub fn loiter_circle(&mut self, c: &LoiterCircle, style: &str) {
        let (x, y) = self.px(c.center);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" style="{}"/>"#,
            c.radius * self.scale,
            esc(style)
        );
    }

    /// Small triangle at `p` pointing along `heading`.
    pub fn arrowhead(&mut self, p: Vec2, heading: f64, size_px: f64, fill: &str) {
        let (x, y) = self.px(p);
        // screen y is flipped, so the screen angle is −heading
        let a = -heading;
        let pt = |ang: f64, len: f64| (x + len * ang.cos(), y + len * ang.sin());
        let tip = pt(a, size_px);
        let l = pt(a + 2.5, size_px * 0.7);
        let r = pt(a - 2.5, size_px * 0.7);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{}"/>"#,
            tip.0, tip.1, l.0, l.1, r.0, r.1,
            esc(fill)
        );
    }

    /// Diamond marker at `p`.
    pub fn marker(&mut self, p: Vec2, size_px: f64, fill: &str, title: &str) {
        let (x, y) = self.px(p);
        let s = size_px;
        let _ = writeln!(
            self.body,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{}"><title>{}</title></polygon>"#,
            x, y - s, x + s, y, x, y + s, x - s, y,
            esc(fill),
            esc(title)
        );
    }

    pub fn polyline(&mut self, pts: &[Vec2], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = self.px(*p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" style="fill:none;{}"/>"#,
            coords.join(" "),
            esc(style)
        );
    }

    /// Text offset in pixels from a world point.
    pub fn text_px(&mut self, p: Vec2, dx: f64, dy: f64, s: &str, size_px: f64, anchor: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="{size_px}" text-anchor="{anchor}">{}</text>"#,
            x + dx,
            y + dy,
            esc(s)
        );
    }

    pub fn finish(self, title: &str) -> String {
        let (w, h) = self.size();
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n<title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            esc(title),
            self.body
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_and_counts_circles() {
        let mut c = Canvas::new(Vec2::ZERO, Vec2::new(100.0, 100.0), 400.0);
        c.loiter_circle(&LoiterCircle::ccw(Vec2::new(50.0, 50.0), 10.0), "fill:none;stroke:red");
        c.marker(Vec2::new(1.0, 1.0), 3.0, "green", "a < b & c");
        let doc = c.finish("t");
        assert_eq!(doc.matches("<circle").count(), 1);
        assert!(doc.contains("a &lt; b &amp; c"));
        // y is flipped: world y=50 at 40 + (100-50)*4
        assert!(doc.contains(r#"cy="240.00""#));
    }
}
