//! Frame sources shared by the commands.

use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;
use pvm_core::ingest::{load_frame_sequence, FrameSequence, StreamConfig};
use pvm_core::stimuli::{DriftingGratings, MovingSprites};
use pvm_core::RawFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    Gratings,
    Sprites,
}

/// Frames of one pass over a dataset or a seeded synthetic video.
pub enum FrameSource {
    Data(FrameSequence),
    Synthetic {
        kind: Synthetic,
        size: usize,
        frames: usize,
        seed: u64,
    },
}

impl FrameSource {
    pub fn open(data: Option<&Path>, stream: &StreamConfig) -> Result<Option<Self>> {
        Ok(match data {
            Some(p) => Some(FrameSource::Data(load_frame_sequence(p, stream)?)),
            None => None,
        })
    }

    pub fn synthetic(kind: Synthetic, size: usize, frames: usize, seed: u64) -> Self {
        FrameSource::Synthetic {
            kind,
            size,
            frames,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FrameSource::Data(seq) => seq.len(),
            FrameSource::Synthetic { frames, .. } => *frames,
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = pvm_core::Result<RawFrame>> + '_> {
        match self {
            FrameSource::Data(seq) => Box::new(seq.iter_repeated()),
            &FrameSource::Synthetic {
                kind,
                size,
                frames,
                seed,
            } => match kind {
                Synthetic::Gratings => {
                    Box::new(DriftingGratings::new(size, 100, seed).take(frames).map(Ok))
                }
                Synthetic::Sprites => Box::new(
                    MovingSprites::new(size, 5, 2, 50, seed)
                        .take(frames)
                        .map(Ok),
                ),
            },
        }
    }

    /// At most `n` frames, in order.
    pub fn take(&self, n: usize) -> Result<Vec<RawFrame>> {
        Ok(self.iter().take(n).collect::<pvm_core::Result<_>>()?)
    }
}
