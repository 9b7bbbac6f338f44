//! Minimal raster plots: values in `[0, 1]` against a category or an x grid.
//! No text; axes, gridlines at quarters, and the data.

use std::path::Path;

use anyhow::Result;
use pvm_core::ingest::write_png;
use pvm_core::RawFrame;

const WHITE: [u8; 3] = [255, 255, 255];
const AXIS: [u8; 3] = [40, 40, 40];
const GRID: [u8; 3] = [220, 220, 220];
const DATA: [u8; 3] = [40, 90, 200];
const REFERENCE: [u8; 3] = [210, 50, 50];

const MARGIN: usize = 20;
const PLOT_H: usize = 200;

struct Canvas {
    frame: RawFrame,
    plot_w: usize,
}

impl Canvas {
    fn new(plot_w: usize) -> Self {
        let mut c = Canvas {
            frame: RawFrame::filled(plot_w + 2 * MARGIN, PLOT_H + 2 * MARGIN, WHITE),
            plot_w,
        };
        for q in 1..=4 {
            let y = c.y(q as f64 / 4.0);
            c.hline(y, MARGIN, MARGIN + plot_w, GRID);
        }
        c.hline(c.y(0.0), MARGIN, MARGIN + plot_w, AXIS);
        for y in MARGIN..=MARGIN + PLOT_H {
            c.frame.set_pixel(MARGIN, y, AXIS);
        }
        c
    }

    /// Pixel row of value `v ∈ [0, 1]`.
    fn y(&self, v: f64) -> usize {
        let v = v.clamp(0.0, 1.0);
        MARGIN + PLOT_H - (v * PLOT_H as f64).round() as usize
    }

    fn hline(&mut self, y: usize, x0: usize, x1: usize, rgb: [u8; 3]) {
        for x in x0..=x1.min(self.frame.width - 1) {
            self.frame.set_pixel(x, y, rgb);
        }
    }

    fn dashed(&mut self, y: usize, rgb: [u8; 3]) {
        for x in (MARGIN..=MARGIN + self.plot_w).filter(|x| (x / 4) % 2 == 0) {
            self.frame.set_pixel(x, y, rgb);
        }
    }

    fn rect(&mut self, x0: usize, x1: usize, y0: usize, y1: usize, rgb: [u8; 3]) {
        for y in y0.min(y1)..=y0.max(y1) {
            for x in x0..=x1 {
                self.frame.set_pixel(x, y, rgb);
            }
        }
    }

    fn line(&mut self, (x0, y0): (f64, f64), (x1, y1): (f64, f64), rgb: [u8; 3]) {
        let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = (x0 + t * (x1 - x0)).round() as usize;
            let y = (y0 + t * (y1 - y0)).round() as usize;
            for (dx, dy) in [(0, 0), (0, 1), (1, 0)] {
                let (px, py) = (x + dx, y + dy);
                if px < self.frame.width && py < self.frame.height {
                    self.frame.set_pixel(px, py, rgb);
                }
            }
        }
    }
}

/// One bar per value, with an optional dashed reference level.
pub fn bar_plot(path: &Path, values: &[f64], reference: Option<f64>) -> Result<()> {
    let slot = 30;
    let mut c = Canvas::new(values.len().max(1) * slot);
    for (i, &v) in values.iter().enumerate() {
        let x0 = MARGIN + i * slot + 6;
        let top = c.y(v);
        let base = c.y(0.0) - 1;
        if top <= base {
            c.rect(x0, x0 + slot - 12, top, base, DATA);
        }
    }
    if let Some(r) = reference {
        let y = c.y(r);
        c.dashed(y, REFERENCE);
    }
    Ok(write_png(path, &c.frame)?)
}

/// Polyline of `(x, y)` points, x mapped linearly from its range.
pub fn curve_plot(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut c = Canvas::new(300);
    if points.len() >= 2 {
        let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let px = |x: f64| MARGIN as f64 + (x - lo) / span * c.plot_w as f64;
        let pts: Vec<(f64, f64)> = points
            .iter()
            .map(|&(x, y)| (px(x), c.y(y) as f64))
            .collect();
        for w in pts.windows(2) {
            c.line(w[0], w[1], DATA);
        }
    }
    Ok(write_png(path, &c.frame)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_heights_follow_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.png");
        bar_plot(&path, &[1.0, 0.5, 0.0], None).unwrap();
        let f = pvm_core::ingest::read_image(&path).unwrap();
        let column = |x: usize| (0..f.height).filter(|&y| f.pixel(x, y) == DATA).count();
        let full = column(MARGIN + 15);
        let half = column(MARGIN + 45);
        assert_eq!(full, PLOT_H);
        assert_eq!(half, PLOT_H / 2);
        assert_eq!(column(MARGIN + 75), 0);
    }
}
