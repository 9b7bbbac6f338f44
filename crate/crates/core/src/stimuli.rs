//! Synthetic stimulus generators: white noise, dead-leaves natural-image
//! proxies, drifting gratings, object sprites and moving-target clips.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::RawFrame;
use crate::tracker::BoundingBox;

/// I.i.d. uniform bytes.
pub fn noise_frame(w: usize, h: usize, seed: u64) -> RawFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * 3).map(|_| rng.random::<u8>()).collect();
    RawFrame {
        width: w,
        height: h,
        data,
    }
}

/// Dead-leaves image: occluding discs with power-law radii (density ∝ r⁻³),
/// which reproduces the scale invariance and edge statistics of natural
/// scenes. Colors share a luminance component across channels.
pub fn dead_leaves<R: Rng + ?Sized>(size: usize, rng: &mut R) -> RawFrame {
    let mut img = vec![[0.0f64; 3]; size * size];
    let r_min = 1.0f64;
    let r_max = size as f64 / 2.0;
    let n_discs = size * size / 4;
    for _ in 0..n_discs {
        // Inverse CDF of p(r) ∝ r⁻³ on [r_min, r_max].
        let u: f64 = rng.random();
        let inv = 1.0 / (r_min * r_min) - u * (1.0 / (r_min * r_min) - 1.0 / (r_max * r_max));
        let r = 1.0 / inv.sqrt();
        let cx = rng.random::<f64>() * size as f64;
        let cy = rng.random::<f64>() * size as f64;
        let lum = rng.random::<f64>() * 255.0;
        let tint: [f64; 3] = [
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        ];
        let color = [
            (lum + 80.0 * tint[0]).clamp(0.0, 255.0),
            (lum + 80.0 * tint[1]).clamp(0.0, 255.0),
            (lum + 80.0 * tint[2]).clamp(0.0, 255.0),
        ];
        let x0 = (cx - r).floor().max(0.0) as usize;
        let x1 = ((cx + r).ceil() as usize).min(size);
        let y0 = (cy - r).floor().max(0.0) as usize;
        let y1 = ((cy + r).ceil() as usize).min(size);
        for y in y0..y1 {
            for x in x0..x1 {
                let dx = x as f64 + 0.5 - cx;
                let dy = y as f64 + 0.5 - cy;
                if dx * dx + dy * dy <= r * r {
                    img[y * size + x] = color;
                }
            }
        }
    }
    let mut data = Vec::with_capacity(size * size * 3);
    for p in img {
        for c in p {
            let noise = (rng.random::<f64>() - 0.5) * 6.0;
            data.push((c + noise).round().clamp(0.0, 255.0) as u8);
        }
    }
    RawFrame {
        width: size,
        height: size,
        data,
    }
}

/// `n` random `tile × tile` patches (centered, interleaved RGB) cut from
/// dead-leaves images.
pub fn natural_patches(n: usize, tile: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 128;
    let per_image = 200;
    let mut out = Vec::with_capacity(n);
    let mut img = dead_leaves(size, &mut rng);
    while out.len() < n {
        if out.len() % per_image == 0 && !out.is_empty() {
            img = dead_leaves(size, &mut rng);
        }
        let x0 = rng.random_range(0..=size - tile);
        let y0 = rng.random_range(0..=size - tile);
        let mut v = Vec::with_capacity(tile * tile * 3);
        for y in y0..y0 + tile {
            for x in x0..x0 + tile {
                v.extend(img.pixel(x, y).iter().map(|&b| b as f64 - 127.5));
            }
        }
        out.push(v);
    }
    out
}

/// A video of sinusoidal gratings drifting at constant velocity; every
/// `segment` frames a new orientation, spatial period, speed, color and
/// contrast are drawn.
#[derive(Debug, Clone)]
pub struct DriftingGratings {
    pub size: usize,
    pub segment: usize,
    rng: ChaCha8Rng,
    current: GratingParams,
    t_in_segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingParams {
    pub orientation: f64,
    /// Spatial period in pixels.
    pub period: f64,
    /// Phase advance per frame, radians.
    pub phase_step: f64,
    pub phase0: f64,
    pub color: [f64; 3],
    pub amplitude: f64,
}

impl GratingParams {
    pub fn render(&self, size: usize, t: usize) -> RawFrame {
        grating_frame(
            size,
            self.orientation,
            self.period,
            self.phase0 + self.phase_step * t as f64,
            self.color,
            self.amplitude,
        )
    }
}

/// A static sinusoidal grating. `color` weights the modulation per channel.
pub fn grating_frame(
    size: usize,
    orientation: f64,
    period: f64,
    phase: f64,
    color: [f64; 3],
    amplitude: f64,
) -> RawFrame {
    let (s, c) = orientation.sin_cos();
    let k = 2.0 * PI / period;
    let mut data = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let u = x as f64 * c + y as f64 * s;
            let v = (k * u - phase).sin();
            for ch in color {
                data.push((127.5 + amplitude * ch * v).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RawFrame {
        width: size,
        height: size,
        data,
    }
}

impl DriftingGratings {
    pub fn new(size: usize, segment: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let current = Self::draw(&mut rng);
        DriftingGratings {
            size,
            segment: segment.max(1),
            rng,
            current,
            t_in_segment: 0,
        }
    }

    fn draw(rng: &mut ChaCha8Rng) -> GratingParams {
        let gray = rng.random::<f64>() < 0.6;
        let color = if gray {
            [1.0, 1.0, 1.0]
        } else {
            let mut c = [0.0; 3];
            for v in &mut c {
                *v = rng.random::<f64>() * 2.0 - 1.0;
            }
            let m = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
            c.map(|v| v / m)
        };
        let speed = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let period = rng.random_range(4.0..16.0);
        GratingParams {
            orientation: rng.random::<f64>() * PI,
            period,
            phase_step: 2.0 * PI * speed / period,
            phase0: rng.random::<f64>() * 2.0 * PI,
            color,
            amplitude: rng.random_range(40.0..120.0),
        }
    }

    pub fn current(&self) -> GratingParams {
        self.current
    }
}

impl Iterator for DriftingGratings {
    type Item = RawFrame;

    fn next(&mut self) -> Option<RawFrame> {
        if self.t_in_segment == self.segment {
            self.current = Self::draw(&mut self.rng);
            self.t_in_segment = 0;
        }
        let f = self.current.render(self.size, self.t_in_segment);
        self.t_in_segment += 1;
        Some(f)
    }
}

/// Shape primitives used for object sprites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Disc,
    Square,
    Triangle,
    Cross,
    Ring,
    Diamond,
    HBar,
    VBar,
}

impl Shape {
    pub const ALL: [Shape; 8] = [
        Shape::Disc,
        Shape::Square,
        Shape::Triangle,
        Shape::Cross,
        Shape::Ring,
        Shape::Diamond,
        Shape::HBar,
        Shape::VBar,
    ];

    /// Whether the point `(u, v)` in `[-1, 1]²` lies inside the shape.
    pub fn contains(self, u: f64, v: f64) -> bool {
        match self {
            Shape::Disc => u * u + v * v <= 1.0,
            Shape::Square => u.abs() <= 0.8 && v.abs() <= 0.8,
            Shape::Triangle => (-0.9..=0.9).contains(&v) && u.abs() <= (v + 0.9) / 1.8,
            Shape::Cross => {
                (u.abs() <= 0.3 && v.abs() <= 1.0) || (v.abs() <= 0.3 && u.abs() <= 1.0)
            }
            Shape::Ring => {
                let r2 = u * u + v * v;
                (0.35..=1.0).contains(&r2)
            }
            Shape::Diamond => u.abs() + v.abs() <= 1.0,
            Shape::HBar => u.abs() <= 1.0 && v.abs() <= 0.35,
            Shape::VBar => v.abs() <= 1.0 && u.abs() <= 0.35,
        }
    }
}

const PALETTE: [[u8; 3]; 6] = [
    [230, 40, 40],
    [40, 200, 60],
    [50, 80, 230],
    [240, 220, 40],
    [230, 230, 230],
    [200, 60, 210],
];

/// Shape and color of sprite class `class` (distinct for up to 48 classes).
pub fn sprite_class(class: usize) -> (Shape, [u8; 3]) {
    let shape = Shape::ALL[class % Shape::ALL.len()];
    let color = PALETTE[(class / Shape::ALL.len() + class % Shape::ALL.len()) % PALETTE.len()];
    (shape, color)
}

/// Paint a sprite of the given class with half-size `radius` at `(cx, cy)`.
pub fn paint_sprite(frame: &mut RawFrame, class: usize, cx: f64, cy: f64, radius: f64) {
    let (shape, color) = sprite_class(class);
    let x0 = (cx - radius).floor().max(0.0) as usize;
    let y0 = (cy - radius).floor().max(0.0) as usize;
    let x1 = ((cx + radius).ceil().max(0.0) as usize).min(frame.width);
    let y1 = ((cy + radius).ceil().max(0.0) as usize).min(frame.height);
    for y in y0..y1 {
        for x in x0..x1 {
            let u = (x as f64 + 0.5 - cx) / radius;
            let v = (y as f64 + 0.5 - cy) / radius;
            if shape.contains(u, v) {
                frame.set_pixel(x, y, color);
            }
        }
    }
}

/// One labeled classification stimulus: a sprite of a random class,
/// randomly scaled and positioned on black.
pub fn sprite_stimulus<R: Rng + ?Sized>(
    field: usize,
    classes: usize,
    rng: &mut R,
) -> (RawFrame, usize) {
    let class = rng.random_range(0..classes);
    (sprite_of_class(field, class, rng), class)
}

pub fn sprite_of_class<R: Rng + ?Sized>(field: usize, class: usize, rng: &mut R) -> RawFrame {
    let mut f = RawFrame::filled(field, field, [0, 0, 0]);
    let f_size = field as f64;
    let radius = rng.random_range(0.2..0.45) * f_size;
    let cx = rng.random_range(0.25..0.75) * f_size;
    let cy = rng.random_range(0.25..0.75) * f_size;
    paint_sprite(&mut f, class, cx, cy, radius);
    f
}

/// A video of sprites drifting across a black field with occasional
/// re-spawning; used as an unsupervised training corpus.
#[derive(Debug, Clone)]
pub struct MovingSprites {
    field: usize,
    classes: usize,
    rng: ChaCha8Rng,
    sprites: Vec<(usize, f64, f64, f64, f64, f64)>,
    t: usize,
    respawn: usize,
}

impl MovingSprites {
    pub fn new(field: usize, classes: usize, count: usize, respawn: usize, seed: u64) -> Self {
        let mut s = MovingSprites {
            field,
            classes,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sprites: Vec::new(),
            t: 0,
            respawn: respawn.max(1),
        };
        for _ in 0..count {
            let sp = s.spawn();
            s.sprites.push(sp);
        }
        s
    }

    fn spawn(&mut self) -> (usize, f64, f64, f64, f64, f64) {
        let f = self.field as f64;
        let class = self.rng.random_range(0..self.classes);
        let r = self.rng.random_range(0.15..0.45) * f;
        let x = self.rng.random_range(0.0..f);
        let y = self.rng.random_range(0.0..f);
        let speed = self.rng.random_range(0.2..1.0) * f / 16.0;
        let ang = self.rng.random::<f64>() * 2.0 * PI;
        (class, x, y, r, speed * ang.cos(), speed * ang.sin())
    }
}

impl Iterator for MovingSprites {
    type Item = RawFrame;

    fn next(&mut self) -> Option<RawFrame> {
        self.t += 1;
        if self.t.is_multiple_of(self.respawn) {
            let i = self.rng.random_range(0..self.sprites.len().max(1));
            if !self.sprites.is_empty() {
                self.sprites[i] = self.spawn();
            }
        }
        let mut frame = RawFrame::filled(self.field, self.field, [0, 0, 0]);
        let f = self.field as f64;
        for s in &mut self.sprites {
            s.1 += s.4;
            s.2 += s.5;
            if s.1 < 0.0 || s.1 > f {
                s.4 = -s.4;
                s.1 = s.1.clamp(0.0, f);
            }
            if s.2 < 0.0 || s.2 > f {
                s.5 = -s.5;
                s.2 = s.2.clamp(0.0, f);
            }
            paint_sprite(&mut frame, s.0, s.1, s.2, s.3);
        }
        Some(frame)
    }
}

/// A tracking clip: a colored square moving on a textured background, with
/// its ground-truth boxes.
pub fn moving_square_clip(
    width: usize,
    height: usize,
    frames: usize,
    side: usize,
    velocity: (f64, f64),
    seed: u64,
) -> (Vec<RawFrame>, Vec<BoundingBox>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut background = RawFrame::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            let v = 20 + ((x / 7 + y / 5) % 3) as u8 * 12 + rng.random_range(0..6u8);
            background.set_pixel(x, y, [v, v, v + 5]);
        }
    }
    let mut out = Vec::with_capacity(frames);
    let mut gt = Vec::with_capacity(frames);
    let (mut x, mut y) = (
        width as f64 / 2.0 - side as f64 / 2.0,
        height as f64 / 2.0 - side as f64 / 2.0,
    );
    let (mut vx, mut vy) = velocity;
    for _ in 0..frames {
        let mut f = background.clone();
        let xi = x.round() as usize;
        let yi = y.round() as usize;
        for yy in yi..(yi + side).min(height) {
            for xx in xi..(xi + side).min(width) {
                let stripe = ((xx - xi) / 3).is_multiple_of(2);
                f.set_pixel(
                    xx,
                    yy,
                    if stripe {
                        [240, 60, 40]
                    } else {
                        [250, 200, 40]
                    },
                );
            }
        }
        out.push(f);
        gt.push(BoundingBox::new(
            xi as f64,
            yi as f64,
            side as f64,
            side as f64,
        ));
        x += vx;
        y += vy;
        if x < 0.0 || x + side as f64 > width as f64 {
            vx = -vx;
            x = x.clamp(0.0, (width - side) as f64);
        }
        if y < 0.0 || y + side as f64 > height as f64 {
            vy = -vy;
            y = y.clamp(0.0, (height - side) as f64);
        }
    }
    (out, gt)
}
