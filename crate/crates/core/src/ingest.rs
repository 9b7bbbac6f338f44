//! Frame loading, resizing to the visual field, and level-1 tile assembly.
//!
//! Datasets are directories of numbered PNG/PPM images sorted by filename, or a
//! raw planar-RGB blob with a `<blob>.dims` sidecar holding `width height`.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PvmError, Result};
use crate::tracker::BoundingBox;

/// Offset subtracted from every level-1 pixel byte.
pub const GRAY_LEVEL: f64 = 127.5;

/// An 8-bit interleaved RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RawFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(PvmError::shape("RawFrame data", expected, data.len()));
        }
        Ok(RawFrame {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        RawFrame {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn to_rgb_image(&self) -> image::RgbImage {
        image::RgbImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .expect("RawFrame invariant guarantees buffer size")
    }

    pub fn from_rgb_image(img: &image::RgbImage) -> Self {
        RawFrame {
            width: img.width() as usize,
            height: img.height() as usize,
            data: img.as_raw().clone(),
        }
    }

    /// Bilinear sample at continuous source coordinates (pixel centers at
    /// integer positions). Coordinates outside the frame clamp to the edge.
    pub fn sample_clamped(&self, sx: f64, sy: f64) -> [f64; 3] {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let sx = sx.clamp(0.0, max_x);
        let sy = sy.clamp(0.0, max_y);
        let x0 = sx.floor() as usize;
        let y0 = sy.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = sx - x0 as f64;
        let fy = sy - y0 as f64;
        let p00 = self.pixel(x0, y0);
        let p10 = self.pixel(x1, y0);
        let p01 = self.pixel(x0, y1);
        let p11 = self.pixel(x1, y1);
        let mut out = [0.0; 3];
        for c in 0..3 {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            out[c] = top * (1.0 - fy) + bottom * fy;
        }
        out
    }

    /// Like [`RawFrame::sample_clamped`] but returns `fill` when the point
    /// lies more than half a pixel outside the frame.
    pub fn sample_or(&self, sx: f64, sy: f64, fill: [f64; 3]) -> [f64; 3] {
        if sx < -0.5 || sy < -0.5 || sx > self.width as f64 - 0.5 || sy > self.height as f64 - 0.5 {
            fill
        } else {
            self.sample_clamped(sx, sy)
        }
    }
}

/// Bilinear resize to `out_w x out_h`. Same-size input is returned unchanged.
pub fn resize_bilinear(frame: &RawFrame, out_w: usize, out_h: usize) -> RawFrame {
    if frame.width == out_w && frame.height == out_h {
        return frame.clone();
    }
    crop_resize(
        frame,
        0.0,
        0.0,
        frame.width as f64,
        frame.height as f64,
        out_w,
        out_h,
        None,
    )
}

/// Resample the source rectangle `(x, y, w, h)` (in source pixel units, edges
/// not centers) into an `out_w x out_h` frame. Points outside the source are
/// clamped to the border, or painted with `fill` when given.
#[allow(clippy::too_many_arguments)]
pub fn crop_resize(
    frame: &RawFrame,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    out_w: usize,
    out_h: usize,
    fill: Option<[u8; 3]>,
) -> RawFrame {
    let mut data = Vec::with_capacity(out_w * out_h * 3);
    let sx_scale = w / out_w as f64;
    let sy_scale = h / out_h as f64;
    for v in 0..out_h {
        let sy = y + (v as f64 + 0.5) * sy_scale - 0.5;
        for u in 0..out_w {
            let sx = x + (u as f64 + 0.5) * sx_scale - 0.5;
            let px = match fill {
                Some(f) => frame.sample_or(sx, sy, [f[0] as f64, f[1] as f64, f[2] as f64]),
                None => frame.sample_clamped(sx, sy),
            };
            data.extend(px.iter().map(|&c| c.round().clamp(0.0, 255.0) as u8));
        }
    }
    RawFrame {
        width: out_w,
        height: out_h,
        data,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub field_size: usize,
    pub tile_size: usize,
    pub frames_per_input: usize,
    /// How many times the frame sequence is replayed.
    pub repeat_count: usize,
    /// Keep every `stride`-th source frame.
    pub stride: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            field_size: 80,
            tile_size: 10,
            frames_per_input: 1,
            repeat_count: 1,
            stride: 1,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 || self.field_size == 0 {
            return Err(PvmError::Config(
                "field and tile size must be positive".into(),
            ));
        }
        if !self.field_size.is_multiple_of(self.tile_size) {
            return Err(PvmError::Config(format!(
                "field_size {} is not divisible by tile_size {}",
                self.field_size, self.tile_size
            )));
        }
        if !(1..=5).contains(&self.frames_per_input) {
            return Err(PvmError::Config(format!(
                "frames_per_input must be in [1,5], got {}",
                self.frames_per_input
            )));
        }
        if self.stride == 0 {
            return Err(PvmError::Config("stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn tiles_per_side(&self) -> usize {
        self.field_size / self.tile_size
    }

    /// Length of one level-1 input vector.
    pub fn input_dim(&self) -> usize {
        self.tile_size * self.tile_size * 3 * self.frames_per_input
    }
}

#[derive(Debug, Clone)]
enum Source {
    Files(Vec<PathBuf>),
    Blob {
        path: PathBuf,
        width: usize,
        height: usize,
        frames: usize,
    },
}

/// A lazily decoded, ordered sequence of frames resized to the visual field.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    source: Source,
    config: StreamConfig,
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "ppm", "pnm"];

/// Open a dataset directory or raw blob.
pub fn load_frame_sequence(path: &Path, config: &StreamConfig) -> Result<FrameSequence> {
    config.validate()?;
    if !path.exists() {
        return Err(PvmError::MissingPath(path.to_path_buf()));
    }
    let source = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| PvmError::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                        .unwrap_or(false)
            })
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(PvmError::EmptyStream);
        }
        Source::Files(files)
    } else {
        let dims_path = sidecar_path(path);
        let dims = fs::read_to_string(&dims_path).map_err(|e| PvmError::io(&dims_path, e))?;
        let nums: Vec<usize> = dims
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| PvmError::Config(format!("bad dims sidecar {dims_path:?}: {e}")))?;
        if nums.len() < 2 || nums[0] == 0 || nums[1] == 0 {
            return Err(PvmError::Config(format!(
                "dims sidecar {dims_path:?} must hold `width height`"
            )));
        }
        let len = fs::metadata(path).map_err(|e| PvmError::io(path, e))?.len() as usize;
        let frame_bytes = nums[0] * nums[1] * 3;
        if !len.is_multiple_of(frame_bytes) {
            return Err(PvmError::Image {
                path: path.to_path_buf(),
                message: format!("blob length {len} is not a multiple of frame size {frame_bytes}"),
            });
        }
        if len == 0 {
            return Err(PvmError::EmptyStream);
        }
        Source::Blob {
            path: path.to_path_buf(),
            width: nums[0],
            height: nums[1],
            frames: len / frame_bytes,
        }
    };
    Ok(FrameSequence {
        source,
        config: config.clone(),
    })
}

fn sidecar_path(blob: &Path) -> PathBuf {
    let mut s = blob.as_os_str().to_owned();
    s.push(".dims");
    PathBuf::from(s)
}

/// Write frames as a planar-RGB blob plus its `.dims` sidecar.
pub fn write_raw_blob(path: &Path, frames: &[RawFrame]) -> Result<()> {
    let first = frames.first().ok_or(PvmError::EmptyStream)?;
    let mut bytes = Vec::with_capacity(frames.len() * first.data.len());
    for f in frames {
        if f.width != first.width || f.height != first.height {
            return Err(PvmError::InvalidArgument(
                "blob frames must share dimensions".into(),
            ));
        }
        for c in 0..3 {
            bytes.extend(f.data.iter().skip(c).step_by(3));
        }
    }
    fs::write(path, bytes).map_err(|e| PvmError::io(path, e))?;
    let dims = sidecar_path(path);
    fs::write(&dims, format!("{} {}\n", first.width, first.height))
        .map_err(|e| PvmError::io(&dims, e))
}

impl FrameSequence {
    /// Number of source frames after stride decimation (one replay).
    pub fn len(&self) -> usize {
        let n = match &self.source {
            Source::Files(f) => f.len(),
            Source::Blob { frames, .. } => *frames,
        };
        n.div_ceil(self.config.stride)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    /// Decode the source frame at decimated index `i`, at native resolution.
    pub fn source_frame(&self, i: usize) -> Result<RawFrame> {
        let idx = i * self.config.stride;
        match &self.source {
            Source::Files(files) => read_image(&files[idx]),
            Source::Blob {
                path,
                width,
                height,
                ..
            } => {
                use std::io::{Read, Seek, SeekFrom};
                let frame_bytes = width * height * 3;
                let mut f = fs::File::open(path).map_err(|e| PvmError::io(path, e))?;
                f.seek(SeekFrom::Start((idx * frame_bytes) as u64))
                    .map_err(|e| PvmError::io(path, e))?;
                let mut planar = vec![0u8; frame_bytes];
                f.read_exact(&mut planar)
                    .map_err(|e| PvmError::io(path, e))?;
                let plane = width * height;
                let mut data = vec![0u8; frame_bytes];
                for p in 0..plane {
                    for c in 0..3 {
                        data[p * 3 + c] = planar[c * plane + p];
                    }
                }
                RawFrame::new(*width, *height, data)
            }
        }
    }

    /// Decode frame `i` resized to the visual field.
    pub fn frame(&self, i: usize) -> Result<RawFrame> {
        let f = self.source_frame(i)?;
        Ok(resize_bilinear(
            &f,
            self.config.field_size,
            self.config.field_size,
        ))
    }

    /// All frames of one replay, in temporal order.
    pub fn iter(&self) -> impl Iterator<Item = Result<RawFrame>> + '_ {
        (0..self.len()).map(move |i| self.frame(i))
    }

    /// Frames of every replay (`repeat_count` times).
    pub fn iter_repeated(&self) -> impl Iterator<Item = Result<RawFrame>> + '_ {
        (0..self.config.repeat_count.max(1)).flat_map(move |_| self.iter())
    }

    pub fn load_all(&self) -> Result<Vec<RawFrame>> {
        self.iter().collect()
    }
}

pub fn read_image(path: &Path) -> Result<RawFrame> {
    let img = image::open(path).map_err(|e| PvmError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(RawFrame::from_rgb_image(&img.to_rgb8()))
}

pub fn write_png(path: &Path, frame: &RawFrame) -> Result<()> {
    frame
        .to_rgb_image()
        .save(path)
        .map_err(|e| PvmError::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

/// Split a window of field-sized frames into centered level-1 tile vectors,
/// row-major over tiles. Each vector holds `(row, col, channel)` bytes of the
/// oldest frame first.
pub fn tile_and_center(window: &[RawFrame], config: &StreamConfig) -> Result<Vec<Vec<f64>>> {
    if window.len() != config.frames_per_input {
        return Err(PvmError::shape(
            "frame window length",
            config.frames_per_input,
            window.len(),
        ));
    }
    for f in window {
        if f.width != config.field_size || f.height != config.field_size {
            return Err(PvmError::shape("frame side", config.field_size, f.width));
        }
    }
    let side = config.tiles_per_side();
    let ts = config.tile_size;
    let mut out = Vec::with_capacity(side * side);
    for ty in 0..side {
        for tx in 0..side {
            let mut v = Vec::with_capacity(config.input_dim());
            for f in window {
                for y in ty * ts..(ty + 1) * ts {
                    let row = (y * f.width + tx * ts) * 3;
                    v.extend(
                        f.data[row..row + ts * 3]
                            .iter()
                            .map(|&b| b as f64 - GRAY_LEVEL),
                    );
                }
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Sliding window of the last `frames_per_input` frames; advances one frame
/// per push.
#[derive(Debug, Clone)]
pub struct FrameWindow {
    frames: VecDeque<RawFrame>,
    size: usize,
}

impl FrameWindow {
    pub fn new(size: usize) -> Self {
        FrameWindow {
            frames: VecDeque::with_capacity(size),
            size: size.max(1),
        }
    }

    /// Push a frame; returns the full window (oldest first) once `size`
    /// frames have been seen.
    pub fn push(&mut self, frame: RawFrame) -> Option<Vec<RawFrame>> {
        if self.frames.len() == self.size {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        (self.frames.len() == self.size).then(|| self.frames.iter().cloned().collect())
    }

    pub fn clear(&mut self) {
        self.frames.clear();
    }
}

/// Parse OTB-style ground truth: one `x,y,w,h` line per frame; `NaN` marks
/// target absence. Tabs and spaces are accepted as separators too.
pub fn parse_groundtruth(text: &str) -> Result<Vec<BoundingBox>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split([',', '\t', ' '])
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err(PvmError::Config(format!(
                "groundtruth line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let vals: Vec<f64> = fields
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| PvmError::Config(format!("groundtruth line {}: {e}", lineno + 1)))?;
        if vals.iter().any(|v| v.is_nan()) {
            out.push(BoundingBox::absent());
        } else {
            out.push(BoundingBox::new(vals[0], vals[1], vals[2], vals[3]));
        }
    }
    Ok(out)
}

pub fn load_groundtruth(path: &Path) -> Result<Vec<BoundingBox>> {
    let text = fs::read_to_string(path).map_err(|e| PvmError::io(path, e))?;
    parse_groundtruth(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_frame(w: usize, h: usize) -> RawFrame {
        let mut data = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                data.extend_from_slice(&[(x * 3) as u8, (y * 3) as u8, ((x + y) % 256) as u8]);
            }
        }
        RawFrame::new(w, h, data).unwrap()
    }

    #[test]
    fn gray_and_white_centering() {
        let cfg = StreamConfig::default();
        let gray = RawFrame::filled(80, 80, [127, 127, 127]);
        let tiles = tile_and_center(&[gray], &cfg).unwrap();
        assert!(tiles.iter().flatten().all(|&v| v == -0.5));
        let white = RawFrame::filled(80, 80, [255, 255, 255]);
        let tiles = tile_and_center(&[white], &cfg).unwrap();
        assert!(tiles.iter().flatten().all(|&v| v == 127.5));
    }

    #[test]
    fn three_frame_window_shapes() {
        let cfg = StreamConfig {
            frames_per_input: 3,
            ..Default::default()
        };
        let f = gradient_frame(80, 80);
        let tiles = tile_and_center(&[f.clone(), f.clone(), f], &cfg).unwrap();
        assert_eq!(tiles.len(), 64);
        assert!(tiles.iter().all(|t| t.len() == 900));
    }

    #[test]
    fn window_length_mismatch_is_error() {
        let cfg = StreamConfig {
            frames_per_input: 2,
            ..Default::default()
        };
        let f = gradient_frame(80, 80);
        assert!(matches!(
            tile_and_center(&[f], &cfg),
            Err(PvmError::Shape { .. })
        ));
    }

    #[test]
    fn tiling_is_a_partition_and_invertible() {
        let cfg = StreamConfig::default();
        let f = gradient_frame(80, 80);
        let tiles = tile_and_center(std::slice::from_ref(&f), &cfg).unwrap();
        let mut rebuilt = vec![0u8; f.data.len()];
        let mut hits = vec![0u32; f.data.len()];
        for (t, v) in tiles.iter().enumerate() {
            let (ty, tx) = (t / 8, t % 8);
            for (k, &val) in v.iter().enumerate() {
                let c = k % 3;
                let px = (k / 3) % 10;
                let py = k / 30;
                let idx = ((ty * 10 + py) * 80 + tx * 10 + px) * 3 + c;
                rebuilt[idx] = (val + GRAY_LEVEL) as u8;
                hits[idx] += 1;
            }
        }
        assert!(hits.iter().all(|&h| h == 1));
        assert_eq!(rebuilt, f.data);
    }

    #[test]
    fn identity_and_halving_resize() {
        let f = gradient_frame(80, 80);
        assert_eq!(resize_bilinear(&f, 80, 80), f);
        let big = gradient_frame(160, 160);
        let small = resize_bilinear(&big, 80, 80);
        assert_eq!((small.width, small.height), (80, 80));
        // Halving averages each 2x2 block.
        let p = small.pixel(3, 5);
        let expect_r = ((6 * 3 + 7 * 3) as f64 / 2.0).round() as u8;
        assert_eq!(p[0], expect_r);
    }

    #[test]
    fn sliding_window_advances_by_one() {
        let mut w = FrameWindow::new(3);
        let frames: Vec<RawFrame> = (0..5).map(|i| RawFrame::filled(2, 2, [i, 0, 0])).collect();
        assert!(w.push(frames[0].clone()).is_none());
        assert!(w.push(frames[1].clone()).is_none());
        let win = w.push(frames[2].clone()).unwrap();
        assert_eq!(win[0].data[0], 0);
        let win = w.push(frames[3].clone()).unwrap();
        assert_eq!(win[0].data[0], 1);
        assert_eq!(win[2].data[0], 3);
    }

    #[test]
    fn groundtruth_parsing() {
        let gt = parse_groundtruth("10,20,30,40\nNaN,NaN,NaN,NaN\n1\t2\t3\t4\n").unwrap();
        assert_eq!(gt.len(), 3);
        assert!(gt[0].present && gt[0].x == 10.0 && gt[0].h == 40.0);
        assert!(!gt[1].present);
        assert_eq!(gt[2].w, 3.0);
        assert!(parse_groundtruth("1,2,3").is_err());
    }

    #[test]
    fn config_validation() {
        let bad = StreamConfig {
            field_size: 81,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = StreamConfig {
            frames_per_input: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
