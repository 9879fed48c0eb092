//! Reproducible SVG 1.1 renderings of configurations and chord diagrams.
//!
//! Configurations are drawn with their participating squares; chord
//! diagrams are drawn as points in the half-plane above the diagonal
//! `a = b`. Exact coordinates are converted to floats for layout only.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::cycles::Config2d;
use crate::scalar::Coord;
use crate::RatDiagram;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("nothing to render")]
    EmptyInput,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Canvas {
    body: String,
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Canvas {
    fn new() -> Self {
        Canvas {
            body: String::new(),
            min_x: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            min_y: f64::INFINITY,
            max_y: f64::NEG_INFINITY,
        }
    }

    fn cover(&mut self, x: f64, y: f64) {
        self.min_x = self.min_x.min(x);
        self.max_x = self.max_x.max(x);
        self.min_y = self.min_y.min(y);
        self.max_y = self.max_y.max(y);
    }

    /// SVG y grows downward; flip so the figure reads like the plane.
    fn finish(self) -> String {
        let pad = 0.08 * (self.max_x - self.min_x).max(self.max_y - self.min_y).max(1.0);
        let (x0, y0) = (self.min_x - pad, self.min_y - pad);
        let w = self.max_x - self.min_x + 2.0 * pad;
        let h = self.max_y - self.min_y + 2.0 * pad;
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
                "width=\"480\" height=\"480\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
                "<g transform=\"translate(0,{:.6}) scale(1,-1)\">\n{}</g>\n</svg>\n"
            ),
            x0,
            y0,
            w,
            h,
            2.0 * y0 + h,
            self.body
        )
    }
}

/// Renders a configuration with its squares to an SVG file.
pub fn render_config(c: &Config2d, path: &Path) -> Result<(), RenderError> {
    if c.points.is_empty() {
        return Err(RenderError::EmptyInput);
    }
    let mut canvas = Canvas::new();
    for s in &c.squares {
        let cx = s.center.0.approx();
        let cy = s.center.1.approx();
        let half = s.half_side.approx();
        canvas.cover(cx - half, cy - half);
        canvas.cover(cx + half, cy + half);
        let stroke = (half * 0.02).max(1e-4);
        writeln!(
            canvas.body,
            "<rect x=\"{:.8}\" y=\"{:.8}\" width=\"{:.8}\" height=\"{:.8}\" \
             fill=\"none\" stroke=\"#555\" stroke-width=\"{:.8}\"/>",
            cx - half,
            cy - half,
            2.0 * half,
            2.0 * half,
            stroke
        )
        .expect("write to string");
    }
    let dot = c
        .squares
        .iter()
        .map(|s| s.half_side.approx())
        .fold(f64::INFINITY, f64::min)
        .max(1e-4)
        * 0.25;
    for (x, y) in &c.points {
        let (x, y) = (x.approx(), y.approx());
        canvas.cover(x, y);
        writeln!(
            canvas.body,
            "<circle cx=\"{x:.8}\" cy=\"{y:.8}\" r=\"{dot:.8}\" fill=\"#c22\"/>"
        )
        .expect("write to string");
    }
    std::fs::write(path, canvas.finish())?;
    Ok(())
}

/// Renders a chord diagram as a half-plane scatter with the diagonal drawn.
pub fn render_diagram(d: &RatDiagram, path: &Path) -> Result<(), RenderError> {
    if d.is_empty() {
        return Err(RenderError::EmptyInput);
    }
    let mut canvas = Canvas::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in d.chords() {
        let (a, b) = (c.a().approx(), c.b().approx());
        lo = lo.min(a);
        hi = hi.max(b);
        canvas.cover(a, b);
    }
    let pad = 0.1 * (hi - lo).max(1.0);
    writeln!(
        canvas.body,
        "<line x1=\"{:.8}\" y1=\"{:.8}\" x2=\"{:.8}\" y2=\"{:.8}\" \
         stroke=\"#999\" stroke-width=\"{:.8}\" stroke-dasharray=\"{:.8}\"/>",
        lo - pad,
        lo - pad,
        hi + pad,
        hi + pad,
        0.01 * (hi - lo).max(1.0),
        0.05 * (hi - lo).max(1.0),
    )
    .expect("write to string");
    canvas.cover(lo - pad, lo - pad);
    canvas.cover(hi + pad, hi + pad);
    let dot = 0.02 * (hi - lo).max(1.0);
    for c in d.chords() {
        writeln!(
            canvas.body,
            "<circle cx=\"{:.8}\" cy=\"{:.8}\" r=\"{dot:.8}\" fill=\"#22c\"/>",
            c.a().approx(),
            c.b().approx()
        )
        .expect("write to string");
    }
    std::fs::write(path, canvas.finish())?;
    Ok(())
}
