//! Predictive vision model: a hierarchy of sparse-coding Simple layers and
//! predictive Complex layers over tiled video, with supervised readouts,
//! a windowed tracker and analysis tools.

pub mod analysis;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod hierarchy;
pub mod ingest;
pub mod predictive;
pub mod readout;
pub mod sparse_coding;
pub mod stimuli;
pub mod tracker;

pub use error::{PvmError, Result};
pub use hierarchy::{build, HierarchySpec, Layer, ModelState};
pub use ingest::RawFrame;
pub use tracker::BoundingBox;
