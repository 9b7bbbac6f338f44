//! Receptive-field images: dictionary grids, Complex-cell contributor grids
//! and second-level composites.

use ndarray::ArrayView1;

use super::{top_indices, Ranking};
use crate::error::{PvmError, Result};
use crate::hierarchy::ModelState;
use crate::ingest::RawFrame;
use crate::predictive::{ComplexWeights, BLOCK_SIMPLE};
use crate::sparse_coding::Dictionary;

const GRAY: [u8; 3] = [128, 128, 128];
const BACKGROUND: [u8; 3] = [0, 0, 0];

/// Render the newest frame of a pixel-space dictionary column as a
/// `tile × tile` RGB patch, mapping its min to 0 and max to 255. A constant
/// column renders mid-gray.
pub fn render_patch(column: ArrayView1<'_, f64>, tile: usize) -> Result<RawFrame> {
    let per_frame = tile * tile * 3;
    if per_frame == 0 || !column.len().is_multiple_of(per_frame) {
        return Err(PvmError::InvalidArgument(format!(
            "column of length {} is not a stack of {tile}x{tile} RGB patches",
            column.len()
        )));
    }
    let newest = column.slice(ndarray::s![column.len() - per_frame..]);
    let lo = newest.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = newest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let data = if hi > lo {
        newest
            .iter()
            .map(|&v| ((v - lo) / (hi - lo) * 255.0).round() as u8)
            .collect()
    } else {
        GRAY.repeat(tile * tile)
    };
    RawFrame::new(tile, tile, data)
}

fn flat_patch(tile: usize) -> RawFrame {
    RawFrame::filled(tile, tile, GRAY)
}

/// Lay out patches row-major on a `cols`-wide grid with `gap` pixels
/// between them.
pub fn tile_patches(patches: &[RawFrame], cols: usize, gap: usize) -> RawFrame {
    let Some(first) = patches.first() else {
        return RawFrame::filled(0, 0, BACKGROUND);
    };
    let (pw, ph) = (first.width, first.height);
    let cols = cols.max(1);
    let rows = patches.len().div_ceil(cols);
    let w = cols * pw + (cols - 1) * gap;
    let h = rows * ph + rows.saturating_sub(1) * gap;
    let mut out = RawFrame::filled(w, h, BACKGROUND);
    for (i, p) in patches.iter().enumerate() {
        let (ox, oy) = ((i % cols) * (pw + gap), (i / cols) * (ph + gap));
        blit(&mut out, p, ox, oy);
    }
    out
}

fn blit(dst: &mut RawFrame, src: &RawFrame, ox: usize, oy: usize) {
    for y in 0..src.height {
        for x in 0..src.width {
            dst.set_pixel(ox + x, oy + y, src.pixel(x, y));
        }
    }
}

/// All `K` atoms on a `⌈√K⌉`-wide grid.
pub fn render_dictionary_grid(dict: &Dictionary, tile: usize, gap: usize) -> Result<RawFrame> {
    let k = dict.size();
    let patches = (0..k)
        .map(|i| render_patch(dict.atom(i), tile))
        .collect::<Result<Vec<_>>>()?;
    let cols = (k as f64).sqrt().ceil() as usize;
    Ok(tile_patches(&patches, cols, gap))
}

/// The `top_n` Simple cells feeding a Complex cell most strongly through
/// the feedforward block.
pub fn complex_contributors(
    weights: &ComplexWeights,
    cell: usize,
    top_n: usize,
    ranking: Ranking,
) -> Result<Vec<(usize, f64)>> {
    let j = weights.cells();
    if cell >= j {
        return Err(PvmError::InvalidArgument(format!(
            "complex cell {cell} out of range ({j} cells)"
        )));
    }
    let column: Vec<f64> = weights.block(BLOCK_SIMPLE).column(cell).to_vec();
    Ok(top_indices(&column, top_n, ranking))
}

fn patch_for_cell(dict: &Dictionary, cell: usize, tile: usize) -> Result<RawFrame> {
    if cell < dict.size() {
        render_patch(dict.atom(cell), tile)
    } else {
        Ok(flat_patch(tile))
    }
}

/// Receptive fields of the top contributors to a Complex cell on a square
/// grid (16 → 4×4). The constant cell renders flat gray.
pub fn render_complex_contributors(
    dict: &Dictionary,
    weights: &ComplexWeights,
    cell: usize,
    top_n: usize,
    ranking: Ranking,
    tile: usize,
    gap: usize,
) -> Result<RawFrame> {
    let top = complex_contributors(weights, cell, top_n, ranking)?;
    let patches = top
        .iter()
        .map(|&(i, _)| patch_for_cell(dict, i, tile))
        .collect::<Result<Vec<_>>>()?;
    let cols = (top_n as f64).sqrt().ceil() as usize;
    Ok(tile_patches(&patches, cols, gap))
}

/// Per child tile, the nine highest-weight first-level Complex cells of a
/// second-level atom, and the image showing their Simple RFs.
#[derive(Debug, Clone, PartialEq)]
pub struct V2Composite {
    pub image: RawFrame,
    /// Children in input order: (0,0), (1,0), (0,1), (1,1).
    pub boxes: Vec<Vec<(usize, f64)>>,
}

impl V2Composite {
    /// Children whose slice of the atom is all zero.
    pub fn zero_boxes(&self) -> Vec<usize> {
        self.boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.iter().all(|&(_, w)| w == 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

/// 2×2 arrangement of child boxes, each a 3×3 grid of level-1 Simple RFs.
pub fn render_v2_composite(
    model: &ModelState,
    v2_cell: usize,
    ranking: Ranking,
) -> Result<V2Composite> {
    if model.num_levels() < 2 {
        return Err(PvmError::InvalidArgument(
            "second-level composite needs at least two levels".into(),
        ));
    }
    let d2 = &model.levels[1].dictionary;
    if v2_cell >= d2.size() {
        return Err(PvmError::InvalidArgument(format!(
            "level-2 cell {v2_cell} out of range ({} cells)",
            d2.size()
        )));
    }
    let d1 = &model.levels[0].dictionary;
    let j1 = model.spec.levels[0].cells();
    let tile = model.spec.tile_size;
    let atom = d2.atom(v2_cell);
    let mut boxes = Vec::with_capacity(4);
    let mut images = Vec::with_capacity(4);
    for child in 0..4 {
        let slice: Vec<f64> = atom
            .slice(ndarray::s![child * j1..(child + 1) * j1])
            .to_vec();
        let top = top_indices(&slice, 9, ranking);
        let patches = top
            .iter()
            .map(|&(i, _)| patch_for_cell(d1, i, tile))
            .collect::<Result<Vec<_>>>()?;
        images.push(tile_patches(&patches, 3, 1));
        boxes.push(top);
    }
    Ok(V2Composite {
        image: tile_patches(&images, 2, 3),
        boxes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn constant_patch_is_gray() {
        let col = ndarray::Array1::from_elem(12, 0.3);
        let p = render_patch(col.view(), 2).unwrap();
        assert!(p.data.iter().all(|&b| b == 128));
    }

    #[test]
    fn grid_geometry() {
        let atoms = Array2::from_shape_fn((400, 300), |(i, j)| ((i * 7 + j) % 13) as f64);
        let d = Dictionary::from_atoms(atoms, Default::default());
        let g = render_dictionary_grid(&d, 10, 0).unwrap();
        assert_eq!((g.width, g.height), (200, 200));
        assert_eq!(render_dictionary_grid(&d, 10, 0).unwrap(), g);
        let sep = render_dictionary_grid(&d, 10, 1).unwrap();
        assert_eq!((sep.width, sep.height), (219, 219));
    }

    #[test]
    fn one_hot_contributor_first() {
        let mut w = ComplexWeights::zeros(5, 5);
        w.c[[3, 1]] = 0.7;
        let top = complex_contributors(&w, 1, 3, Ranking::Signed).unwrap();
        assert_eq!(top, vec![(3, 0.7), (0, 0.0), (1, 0.0)]);
        assert!(complex_contributors(&w, 5, 3, Ranking::Signed).is_err());
    }
}
