//! Versioned binary container of named chunks.
//!
//! Layout (little-endian): `"PVMC"`, `u32` version, `u32` chunk count, then
//! per chunk a `u32`-length-prefixed UTF-8 name, a `u64` payload length and
//! the payload. Model chunks store every float as `f64` so that save/load
//! reproduces frozen inference exactly.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{PvmError, Result};
use crate::hierarchy::{HierarchySpec, LevelState, ModelState, TileState};
use crate::predictive::{ComplexState, ComplexWeights, ContextVector};
use crate::sparse_coding::{Dictionary, UpdateSchedule};

pub const MAGIC: &[u8; 4] = b"PVMC";
pub const VERSION: u32 = 1;

#[derive(Debug, Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for &x in v {
            self.f64(x);
        }
    }

    pub fn matrix(&mut self, m: &Array2<f64>) {
        self.u64(m.nrows() as u64);
        self.u64(m.ncols() as u64);
        for &x in m.iter() {
            self.f64(x);
        }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.buf.extend_from_slice(b);
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'a str,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8], what: &'a str) -> Self {
        ByteReader { buf, pos: 0, what }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(PvmError::Truncated(format!(
                "{}: need {n} bytes at offset {}",
                self.what, self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u64()? as usize;
        if n > self.buf.len() {
            return Err(PvmError::Truncated(format!(
                "{}: length {n} exceeds data",
                self.what
            )));
        }
        Ok(n)
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn matrix(&mut self) -> Result<Array2<f64>> {
        let r = self.u64()? as usize;
        let c = self.u64()? as usize;
        if r.saturating_mul(c) > self.buf.len() {
            return Err(PvmError::Truncated(format!(
                "{}: matrix too large",
                self.what
            )));
        }
        let data: Vec<f64> = (0..r * c).map(|_| self.f64()).collect::<Result<_>>()?;
        Ok(Array2::from_shape_vec((r, c), data).expect("shape matches length"))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.len()?;
        self.take(n)
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

/// An ordered list of named byte chunks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Container {
    pub chunks: Vec<(String, Vec<u8>)>,
}

impl Container {
    pub fn push(&mut self, name: impl Into<String>, payload: Vec<u8>) {
        self.chunks.push((name.into(), payload));
    }

    pub fn get(&self, name: &str) -> Result<&[u8]> {
        self.chunks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| &p[..])
            .ok_or_else(|| PvmError::Truncated(format!("missing chunk `{name}`")))
    }

    pub fn has(&self, name: &str) -> bool {
        self.chunks.iter().any(|(n, _)| n == name)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.buf.extend_from_slice(MAGIC);
        w.u32(VERSION);
        w.u32(self.chunks.len() as u32);
        for (name, payload) in &self.chunks {
            w.u32(name.len() as u32);
            w.buf.extend_from_slice(name.as_bytes());
            w.bytes(payload);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes, "container");
        if r.take(4).map_err(|_| PvmError::Magic)? != MAGIC {
            return Err(PvmError::Magic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(PvmError::Version {
                found: version,
                expected: VERSION,
            });
        }
        let count = r.u32()?;
        let mut chunks = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| PvmError::Truncated("chunk name is not UTF-8".into()))?
                .to_string();
            chunks.push((name, r.bytes()?.to_vec()));
        }
        if !r.is_done() {
            return Err(PvmError::Truncated(
                "trailing bytes after last chunk".into(),
            ));
        }
        Ok(Container { chunks })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| PvmError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| PvmError::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn dictionary_chunk(d: &Dictionary) -> Vec<u8> {
    let p = d.raw_parts();
    let mut w = ByteWriter::new();
    w.u32(p.atoms.ncols() as u32);
    w.u32(p.atoms.nrows() as u32);
    w.matrix(p.atoms);
    w.matrix(p.b);
    w.matrix(p.e);
    w.f64(p.s);
    w.matrix(p.pending_ya);
    w.matrix(p.pending_aa);
    w.u64(p.pending_n);
    w.u64(p.steps_since_update);
    w.u64(p.next_interval);
    w.u64(p.updates_done);
    w.u64(p.schedule.initial);
    w.f64(p.schedule.growth);
    w.finish()
}

fn read_dictionary(bytes: &[u8]) -> Result<Dictionary> {
    let mut r = ByteReader::new(bytes, "dictionary chunk");
    let m = r.u32()? as usize;
    let k = r.u32()? as usize;
    let atoms = r.matrix()?;
    if atoms.dim() != (k, m) {
        return Err(PvmError::Truncated(
            "dictionary header disagrees with data".into(),
        ));
    }
    let b = r.matrix()?;
    let e = r.matrix()?;
    let s = r.f64()?;
    let pending_ya = r.matrix()?;
    let pending_aa = r.matrix()?;
    let pending_n = r.u64()?;
    let steps_since_update = r.u64()?;
    let next_interval = r.u64()?;
    let updates_done = r.u64()?;
    let schedule = UpdateSchedule {
        initial: r.u64()?,
        growth: r.f64()?,
    };
    Ok(Dictionary::from_raw(
        atoms,
        b,
        e,
        s,
        pending_ya,
        pending_aa,
        pending_n,
        steps_since_update,
        next_interval,
        updates_done,
        schedule,
    ))
}

fn complex_chunk(level: &LevelState) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.u32(level.weights.cells() as u32);
    w.matrix(&level.weights.c);
    w.u64(level.weights.t);
    w.u32(level.tiles.len() as u32);
    for t in &level.tiles {
        w.f64s(&t.complex.v);
    }
    w.finish()
}

fn tiles_chunk(level: &LevelState) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.u32(level.tiles.len() as u32);
    for t in &level.tiles {
        w.f64s(&t.code);
        w.f64s(&t.simple);
        w.f64s(&t.prev_out);
        w.f64s(&t.out);
        match &t.pending {
            Some((p0, c)) => {
                w.u32(1);
                w.f64s(p0.as_slice());
                w.f64s(c);
            }
            None => w.u32(0),
        }
    }
    w.finish()
}

/// Serialize a model into chunks `spec`, `model`, and per level
/// `dict.<i>`, `complex.<i>`, `tiles.<i>`.
pub fn model_to_container(model: &ModelState) -> Container {
    let mut c = Container::default();
    c.push(
        "spec",
        serde_json::to_vec(&model.spec).expect("spec serializes"),
    );
    let mut w = ByteWriter::new();
    w.u64(model.step);
    w.u64(model.since_reset);
    c.push("model", w.finish());
    for (i, l) in model.levels.iter().enumerate() {
        c.push(format!("dict.{i}"), dictionary_chunk(&l.dictionary));
        c.push(format!("complex.{i}"), complex_chunk(l));
        c.push(format!("tiles.{i}"), tiles_chunk(l));
    }
    c
}

pub fn model_from_container(c: &Container) -> Result<ModelState> {
    let spec: HierarchySpec = serde_json::from_slice(c.get("spec")?)
        .map_err(|e| PvmError::Truncated(format!("spec chunk: {e}")))?;
    spec.validate()?;
    let mut r = ByteReader::new(c.get("model")?, "model chunk");
    let step = r.u64()?;
    let since_reset = r.u64()?;
    let mut levels = Vec::with_capacity(spec.levels.len());
    for (i, ls) in spec.levels.iter().enumerate() {
        let dictionary = read_dictionary(c.get(&format!("dict.{i}"))?)?;
        if dictionary.size() != ls.simple.k || dictionary.input_dim() != ls.input_dim {
            return Err(PvmError::Truncated(format!("level {i} dictionary shape")));
        }
        let mut r = ByteReader::new(c.get(&format!("complex.{i}"))?, "complex chunk");
        let j = r.u32()? as usize;
        let cm = r.matrix()?;
        if j != ls.cells() || cm.ncols() != j {
            return Err(PvmError::Truncated(format!("level {i} complex shape")));
        }
        let t = r.u64()?;
        let n_tiles = r.u32()? as usize;
        if n_tiles != ls.tile_count() {
            return Err(PvmError::Truncated(format!("level {i} tile count")));
        }
        let vs: Vec<Vec<f64>> = (0..n_tiles).map(|_| r.f64s()).collect::<Result<_>>()?;
        let mut r = ByteReader::new(c.get(&format!("tiles.{i}"))?, "tiles chunk");
        if r.u32()? as usize != n_tiles {
            return Err(PvmError::Truncated(format!("level {i} tile chunk count")));
        }
        let mut tiles = Vec::with_capacity(n_tiles);
        for v in vs {
            let code = r.f64s()?;
            let simple = r.f64s()?;
            let prev_out = r.f64s()?;
            let out = r.f64s()?;
            let pending = match r.u32()? {
                0 => None,
                _ => Some((ContextVector(r.f64s()?), r.f64s()?)),
            };
            tiles.push(TileState {
                complex: ComplexState { v },
                code,
                simple,
                prev_out,
                out,
                pending,
            });
        }
        levels.push(LevelState {
            dictionary,
            weights: ComplexWeights { c: cm, t },
            tiles,
        });
    }
    Ok(ModelState {
        spec,
        levels,
        step,
        since_reset,
    })
}

pub fn save_checkpoint(model: &ModelState, path: &Path) -> Result<()> {
    model_to_container(model).write(path)
}

pub fn load_checkpoint(path: &Path) -> Result<ModelState> {
    model_from_container(&Container::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic_and_version() {
        assert!(matches!(
            Container::from_bytes(b"NOPE\x01\0\0\0\0\0\0\0"),
            Err(PvmError::Magic)
        ));
        let mut bytes = Container::default().to_bytes();
        bytes[4] = 9;
        assert!(matches!(
            Container::from_bytes(&bytes),
            Err(PvmError::Version { found: 9, .. })
        ));
    }

    #[test]
    fn truncation_is_detected() {
        let mut c = Container::default();
        c.push("a", vec![1, 2, 3, 4, 5]);
        let bytes = c.to_bytes();
        for cut in [6, 12, bytes.len() - 1] {
            assert!(Container::from_bytes(&bytes[..cut]).is_err());
        }
        assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
    }
}
