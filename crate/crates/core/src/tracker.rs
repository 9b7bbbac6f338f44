//! Windowed tracking on top of frozen heatmap regressors, plus the
//! Success and Accuracy scores.

use serde::{Deserialize, Serialize};

use crate::error::{PvmError, Result};
use crate::hierarchy::ModelState;
use crate::ingest::{crop_resize, RawFrame};
use crate::readout::{emit_heatmaps, train_heatmap, Heatmap, HeatmapRegressor, HeatmapTraining};

/// Axis-aligned box in source pixels. `present == false` means the target
/// is absent and the geometry is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub present: bool,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoundingBox {
            x,
            y,
            w: w.max(0.0),
            h: h.max(0.0),
            present: true,
        }
    }

    pub fn absent() -> Self {
        BoundingBox {
            x: 0.0,
            y: 0.0,
            w: 0.0,
            h: 0.0,
            present: false,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_degenerate(&self) -> bool {
        !self.present
            || !(self.w > 0.0 && self.h > 0.0)
            || !self.x.is_finite()
            || !self.y.is_finite()
    }

    /// Boundary-inclusive point test.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        self.present
            && px >= self.x
            && px <= self.x + self.w
            && py >= self.y
            && py <= self.y + self.h
    }

    /// Scaled about its center.
    pub fn scaled(&self, factor: f64) -> Self {
        let (cx, cy) = self.center();
        let (w, h) = (self.w * factor, self.h * factor);
        BoundingBox {
            x: cx - w / 2.0,
            y: cy - h / 2.0,
            w,
            h,
            present: self.present,
        }
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let h = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        w.max(0.0) * h.max(0.0)
    }

    /// Intersection over union of two present boxes; 0 when the union is empty.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            (inter / union).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Per-frame overlap used by Success: both absent is a full match, a
/// presence mismatch scores 0.
pub fn frame_overlap(pred: &BoundingBox, gt: &BoundingBox) -> f64 {
    match (pred.present, gt.present) {
        (false, false) => 1.0,
        (true, true) => pred.iou(gt),
        _ => 0.0,
    }
}

/// Predicted and ground-truth boxes of one clip. Frame 0 is the priming
/// frame and is never scored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackRun {
    pub predicted: Vec<BoundingBox>,
    pub ground_truth: Vec<BoundingBox>,
}

impl TrackRun {
    pub fn new(predicted: Vec<BoundingBox>, ground_truth: Vec<BoundingBox>) -> Result<Self> {
        if predicted.len() != ground_truth.len() {
            return Err(PvmError::Shape {
                context: "track run",
                expected: ground_truth.len(),
                actual: predicted.len(),
            });
        }
        if predicted.len() < 2 {
            return Err(PvmError::InvalidArgument(
                "track run needs at least one frame after priming".into(),
            ));
        }
        Ok(TrackRun {
            predicted,
            ground_truth,
        })
    }

    fn scored(&self) -> Result<impl Iterator<Item = (&BoundingBox, &BoundingBox)>> {
        if self.predicted.len() != self.ground_truth.len() {
            return Err(PvmError::Shape {
                context: "track run",
                expected: self.ground_truth.len(),
                actual: self.predicted.len(),
            });
        }
        if self.predicted.len() < 2 {
            return Err(PvmError::InvalidArgument(
                "track run needs at least one frame after priming".into(),
            ));
        }
        Ok(self.predicted.iter().zip(&self.ground_truth).skip(1))
    }

    pub fn scored_frames(&self) -> usize {
        self.predicted.len().saturating_sub(1)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame,x,y,w,h,present\n");
        for (i, b) in self.predicted.iter().enumerate() {
            if b.present {
                s.push_str(&format!("{i},{},{},{},{},1\n", b.x, b.y, b.w, b.h));
            } else {
                s.push_str(&format!("{i},NaN,NaN,NaN,NaN,0\n"));
            }
        }
        s
    }
}

/// `S(θ)`: fraction of scored frames whose overlap exceeds θ.
pub fn success_curve(run: &TrackRun, thresholds: &[f64]) -> Result<Vec<(f64, f64)>> {
    let overlaps: Vec<f64> = run.scored()?.map(|(p, g)| frame_overlap(p, g)).collect();
    let n = overlaps.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| (t, overlaps.iter().filter(|&&o| o > t).count() as f64 / n))
        .collect())
}

/// Accuracy at each ground-truth scale: center-inside hits plus correct
/// absences over the scored frames.
pub fn accuracy_curve(run: &TrackRun, scales: &[f64]) -> Result<Vec<(f64, f64)>> {
    let pairs: Vec<_> = run.scored()?.collect();
    let n = pairs.len() as f64;
    Ok(scales
        .iter()
        .map(|&s| {
            let hits = pairs
                .iter()
                .filter(|(p, g)| match (p.present, g.present) {
                    (false, false) => true,
                    (true, true) => {
                        let (cx, cy) = p.center();
                        g.scaled(s).contains(cx, cy)
                    }
                    _ => false,
                })
                .count();
            (s, hits as f64 / n)
        })
        .collect())
}

/// `n + 1` evenly spaced points on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// Mean of a curve's values over its grid.
pub fn area_under(curve: &[(f64, f64)]) -> f64 {
    curve.iter().map(|c| c.1).sum::<f64>() / curve.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub window_multiple: f64,
    pub absence_threshold: f64,
    /// Per-level fusion weights; empty means equal weights.
    pub level_weights: Vec<f64>,
    /// Frozen steps per tracked frame.
    pub steps_per_frame: usize,
    pub training: HeatmapTraining,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            window_multiple: 4.0,
            absence_threshold: 0.1,
            level_weights: Vec::new(),
            steps_per_frame: 1,
            training: HeatmapTraining::default(),
        }
    }
}

/// Square crop window in source coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub cx: f64,
    pub cy: f64,
    pub size: f64,
}

impl Window {
    /// Window of `multiple ×` the box's larger side, clamped to the frame.
    pub fn around(b: &BoundingBox, multiple: f64, frame_w: usize, frame_h: usize) -> Self {
        let size = (b.w.max(b.h) * multiple)
            .min(frame_w.min(frame_h) as f64)
            .max(1.0);
        let (cx, cy) = b.center();
        Window { cx, cy, size }.clamped(frame_w, frame_h)
    }

    /// Shift so the window lies inside the frame.
    pub fn clamped(mut self, frame_w: usize, frame_h: usize) -> Self {
        let half = self.size / 2.0;
        self.cx = self.cx.clamp(half, (frame_w as f64 - half).max(half));
        self.cy = self.cy.clamp(half, (frame_h as f64 - half).max(half));
        self
    }

    pub fn recentered(&self, cx: f64, cy: f64, frame_w: usize, frame_h: usize) -> Self {
        Window { cx, cy, ..*self }.clamped(frame_w, frame_h)
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.cx - self.size / 2.0, self.cy - self.size / 2.0)
    }

    pub fn as_box(&self) -> BoundingBox {
        let (x, y) = self.origin();
        BoundingBox::new(x, y, self.size, self.size)
    }

    pub fn crop(&self, frame: &RawFrame, field: usize) -> RawFrame {
        let (x, y) = self.origin();
        crop_resize(
            frame,
            x,
            y,
            self.size,
            self.size,
            field,
            field,
            Some([0, 0, 0]),
        )
    }

    pub fn to_field(&self, b: &BoundingBox, field: usize) -> BoundingBox {
        let (ox, oy) = self.origin();
        let k = field as f64 / self.size;
        BoundingBox::new((b.x - ox) * k, (b.y - oy) * k, b.w * k, b.h * k)
    }

    pub fn from_field(&self, b: &BoundingBox, field: usize) -> BoundingBox {
        if !b.present {
            return *b;
        }
        let (ox, oy) = self.origin();
        let k = self.size / field as f64;
        BoundingBox::new(ox + b.x * k, oy + b.y * k, b.w * k, b.h * k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub window: Window,
    pub regressors: Vec<HeatmapRegressor>,
    /// Raw heatmap peaks on the priming view, one per level.
    pub priming_peaks: Vec<f64>,
    pub fused: Heatmap,
    pub last_box: BoundingBox,
    pub config: TrackerConfig,
}

/// Min-max normalize each map and take the weighted pixelwise mean.
/// A constant map contributes zeros.
pub fn fuse_heatmaps(maps: &[Heatmap], weights: &[f64]) -> Heatmap {
    let side = maps.first().map_or(0, |m| m.side);
    let mut values = vec![0.0; side * side];
    let mut total = 0.0;
    for (i, m) in maps.iter().enumerate() {
        let w = weights.get(i).copied().unwrap_or(1.0);
        total += w;
        let (lo, hi) = (m.min(), m.max());
        if hi > lo {
            for (o, &v) in values.iter_mut().zip(&m.values) {
                *o += w * (v - lo) / (hi - lo);
            }
        }
    }
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    }
    Heatmap { side, values }
}

/// Bounding rectangle (field pixels) of the largest 4-connected component of
/// pixels at or above half the map maximum. Ties go to the component found
/// first in row-major order.
pub fn extract_box(map: &Heatmap) -> BoundingBox {
    let side = map.side;
    let peak = map.max();
    if side == 0 || peak.is_nan() || peak <= 0.0 {
        return BoundingBox::absent();
    }
    let thr = 0.5 * peak;
    let mut label = vec![usize::MAX; side * side];
    let mut best: Option<(usize, [usize; 4])> = None;
    let mut stack = Vec::new();
    let mut id = 0;
    for start in 0..side * side {
        if label[start] != usize::MAX || map.values[start] < thr {
            continue;
        }
        let (mut count, mut u0, mut v0, mut u1, mut v1) = (0, side, side, 0, 0);
        label[start] = id;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (u, v) = (p % side, p / side);
            count += 1;
            u0 = u0.min(u);
            v0 = v0.min(v);
            u1 = u1.max(u);
            v1 = v1.max(v);
            let mut visit = |q: usize| {
                if label[q] == usize::MAX && map.values[q] >= thr {
                    label[q] = id;
                    stack.push(q);
                }
            };
            if u > 0 {
                visit(p - 1);
            }
            if u + 1 < side {
                visit(p + 1);
            }
            if v > 0 {
                visit(p - side);
            }
            if v + 1 < side {
                visit(p + side);
            }
        }
        if best.is_none_or(|(c, _)| count > c) {
            best = Some((count, [u0, v0, u1, v1]));
        }
        id += 1;
    }
    let (_, [u0, v0, u1, v1]) = best.expect("peak pixel passes the threshold");
    BoundingBox::new(
        u0 as f64,
        v0 as f64,
        (u1 - u0 + 1) as f64,
        (v1 - v0 + 1) as f64,
    )
}

fn weighted_presence(maps: &[Heatmap], peaks: &[f64], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (m, &p)) in maps.iter().zip(peaks).enumerate() {
        let w = weights.get(i).copied().unwrap_or(1.0);
        num += w * m.max() / p.max(crate::sparse_coding::GUARD);
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Train regressors on the first frame and place the window on the box.
/// The model is left with cleared dynamics.
pub fn prime(
    model: &mut ModelState,
    frame: &RawFrame,
    target: &BoundingBox,
    config: &TrackerConfig,
) -> Result<TrackerState> {
    if target.is_degenerate() {
        return Err(PvmError::DegenerateBox {
            w: target.w,
            h: target.h,
        });
    }
    let field = model.spec.field_size;
    let window = Window::around(target, config.window_multiple, frame.width, frame.height);
    let view = window.crop(frame, field);
    let field_box = window.to_field(target, field);
    let regressors = train_heatmap(model, &view, &field_box, &config.training)?;
    crate::readout::settle_on(model, &view, config.training.settle)?;
    let maps = emit_heatmaps(&regressors, model)?;
    let priming_peaks = maps.iter().map(|m| m.max()).collect();
    let fused = fuse_heatmaps(&maps, &config.level_weights);
    model.reset_dynamics();
    Ok(TrackerState {
        window,
        regressors,
        priming_peaks,
        fused,
        last_box: *target,
        config: config.clone(),
    })
}

/// Advance one frame: crop, run the frozen model, fuse, extract, re-center.
pub fn track_step(
    state: &mut TrackerState,
    model: &mut ModelState,
    frame: &RawFrame,
) -> Result<BoundingBox> {
    let field = model.spec.field_size;
    let view = state.window.crop(frame, field);
    let window = vec![view; model.spec.frames_per_input];
    for _ in 0..state.config.steps_per_frame.max(1) {
        model.present(&window, false)?;
    }
    let maps = emit_heatmaps(&state.regressors, model)?;
    let presence = weighted_presence(&maps, &state.priming_peaks, &state.config.level_weights);
    state.fused = fuse_heatmaps(&maps, &state.config.level_weights);
    let found = if presence < state.config.absence_threshold {
        BoundingBox::absent()
    } else {
        state.window.from_field(&extract_box(&state.fused), field)
    };
    if found.present {
        let (cx, cy) = found.center();
        state.window = state.window.recentered(cx, cy, frame.width, frame.height);
    }
    state.last_box = found;
    Ok(found)
}

/// Prime on frame 0 and track the rest. Frame 0's prediction is the
/// priming box.
pub fn run_tracker(
    model: &mut ModelState,
    frames: &[RawFrame],
    target: &BoundingBox,
    config: &TrackerConfig,
) -> Result<Vec<BoundingBox>> {
    let first = frames.first().ok_or(PvmError::EmptyStream)?;
    let mut state = prime(model, first, target, config)?;
    let mut out = vec![*target];
    for f in &frames[1..] {
        out.push(track_step(&mut state, model, f)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_shift_iou_is_one_third() {
        let a = BoundingBox::new(0.0, 0.0, 10.0, 4.0);
        let b = BoundingBox::new(5.0, 0.0, 10.0, 4.0);
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.iou(&a), 1.0);
    }

    #[test]
    fn corner_counts_as_inside() {
        let g = BoundingBox::new(10.0, 10.0, 4.0, 4.0);
        let p = BoundingBox::new(12.0, 12.0, 4.0, 4.0);
        let run = TrackRun::new(vec![g, p], vec![g, g]).unwrap();
        assert_eq!(accuracy_curve(&run, &[1.0]).unwrap(), vec![(1.0, 1.0)]);
    }

    #[test]
    fn absence_rules() {
        let g = BoundingBox::new(0.0, 0.0, 4.0, 4.0);
        let run = TrackRun::new(
            vec![g, BoundingBox::absent(), BoundingBox::absent()],
            vec![g, BoundingBox::absent(), g],
        )
        .unwrap();
        assert_eq!(success_curve(&run, &[0.5]).unwrap(), vec![(0.5, 0.5)]);
        assert_eq!(accuracy_curve(&run, &[1.0]).unwrap(), vec![(1.0, 0.5)]);
    }

    #[test]
    fn window_clamps_at_edges() {
        let centered = Window::around(&BoundingBox::new(45.0, 45.0, 10.0, 10.0), 4.0, 100, 100);
        assert_eq!(
            (centered.cx, centered.cy, centered.size),
            (50.0, 50.0, 40.0)
        );
        let edge = Window::around(&BoundingBox::new(0.0, 90.0, 10.0, 10.0), 4.0, 100, 100);
        assert_eq!((edge.cx, edge.cy), (20.0, 80.0));
        let huge = Window::around(&BoundingBox::new(0.0, 0.0, 60.0, 30.0), 4.0, 100, 80);
        assert_eq!(huge.size, 80.0);
    }

    #[test]
    fn field_mapping_round_trips() {
        let w = Window {
            cx: 50.0,
            cy: 40.0,
            size: 40.0,
        };
        let b = BoundingBox::new(45.0, 35.0, 8.0, 6.0);
        let f = w.to_field(&b, 80);
        assert_eq!(f, BoundingBox::new(30.0, 30.0, 16.0, 12.0));
        assert_eq!(w.from_field(&f, 80), b);
    }

    #[test]
    fn largest_component_wins() {
        let mut values = vec![0.0; 100];
        values[0] = 1.0;
        for v in 4..7 {
            for u in 5..9 {
                values[v * 10 + u] = 0.8;
            }
        }
        let b = extract_box(&Heatmap { side: 10, values });
        assert_eq!(b, BoundingBox::new(5.0, 4.0, 4.0, 3.0));
        let zero = Heatmap {
            side: 10,
            values: vec![0.0; 100],
        };
        assert!(!extract_box(&zero).present);
    }

    #[test]
    fn zero_heatmaps_report_absent() {
        let zero = Heatmap {
            side: 4,
            values: vec![0.0; 16],
        };
        assert_eq!(
            weighted_presence(&[zero.clone(), zero], &[1.0, 2.0], &[]),
            0.0
        );
    }

    #[test]
    fn perfect_heatmaps_hold_a_static_target() {
        let field = 16;
        let target = BoundingBox::new(31.0, 57.0, 9.0, 7.0);
        let mut window = Window::around(&BoundingBox::new(26.0, 52.0, 9.0, 7.0), 4.0, 100, 100);
        for _ in 0..10 {
            let truth = window.to_field(&target, field);
            let oracle = Heatmap {
                side: field,
                values: crate::readout::box_mask(&truth, field),
            };
            let fused = fuse_heatmaps(&[oracle.clone(), oracle], &[1.0, 1.0]);
            let found = window.from_field(&extract_box(&fused), field);
            let (cx, cy) = found.center();
            assert!(target.contains(cx, cy), "{found:?}");
            window = window.recentered(cx, cy, 100, 100);
        }
    }
}
