use super::{check_widths, ItemSet, SetError};

/// The `2^k` cells cut out by `sets`, indexed by membership pattern with the
/// first set as the most significant bit. Cell 0 holds the items in none of the sets.
pub fn part_cells(sets: &[ItemSet], width: usize) -> Result<Vec<ItemSet>, SetError> {
    check_widths(width, sets)?;
    let mut cells = vec![ItemSet::full(width)];
    for s in sets {
        let not_s = s.complement();
        cells = cells
            .iter()
            .flat_map(|c| [c.intersection(&not_s), c.intersection(s)])
            .collect();
    }
    Ok(cells)
}

/// Cell sizes of [`part_cells`], optionally restricted to `mask`.
///
/// Works one machine word at a time, so no cell is materialized.
pub fn part_profile(
    sets: &[ItemSet],
    width: usize,
    mask: Option<&ItemSet>,
) -> Result<Vec<usize>, SetError> {
    check_widths(width, sets)?;
    if let Some(mk) = mask {
        check_widths(width, [mk])?;
    }
    let k = sets.len();
    assert!(k < 24, "part_profile over {k} sets");
    let full = ItemSet::full(width);
    let base = mask.unwrap_or(&full);
    let mut counts = vec![0usize; 1 << k];
    let mut buf = vec![0u64; 1 << k];
    let mut next = vec![0u64; 1 << k];
    for (w, &root) in base.words().iter().enumerate() {
        if root == 0 {
            continue;
        }
        buf[0] = root;
        let mut live = 1;
        for s in sets {
            let sw = s.words()[w];
            for c in 0..live {
                next[2 * c] = buf[c] & !sw;
                next[2 * c + 1] = buf[c] & sw;
            }
            live *= 2;
            std::mem::swap(&mut buf, &mut next);
        }
        for (cnt, word) in counts.iter_mut().zip(&buf) {
            *cnt += word.count_ones() as usize;
        }
    }
    Ok(counts)
}

/// A partition of the universe together with a target count per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionParameter {
    cells: Vec<ItemSet>,
    counts: Vec<usize>,
}

impl PartitionParameter {
    pub fn new(cells: Vec<ItemSet>, counts: Vec<usize>) -> Result<Self, SetError> {
        if cells.is_empty() {
            return Err(SetError::InvalidParameter("no cells".into()));
        }
        if cells.len() != counts.len() {
            return Err(SetError::InvalidParameter(format!(
                "{} cells but {} counts",
                cells.len(),
                counts.len()
            )));
        }
        let width = cells[0].width();
        check_widths(width, &cells)?;
        let mut seen = ItemSet::empty(width);
        for (i, (c, &p)) in cells.iter().zip(&counts).enumerate() {
            if !seen.is_disjoint(c) {
                return Err(SetError::InvalidParameter(format!("cell {i} overlaps an earlier cell")));
            }
            seen = seen.union(c);
            if p > c.count() {
                return Err(SetError::InvalidParameter(format!(
                    "count {p} exceeds size {} of cell {i}",
                    c.count()
                )));
            }
        }
        if seen.count() != width {
            return Err(SetError::InvalidParameter(format!(
                "cells cover {} of {width} items",
                seen.count()
            )));
        }
        Ok(PartitionParameter { cells, counts })
    }

    /// The parameter whose cells are `part_cells(sets)` with the given counts.
    pub fn from_sets(sets: &[ItemSet], width: usize, counts: Vec<usize>) -> Result<Self, SetError> {
        PartitionParameter::new(part_cells(sets, width)?, counts)
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn width(&self) -> usize {
        self.cells[0].width()
    }

    pub fn cells(&self) -> &[ItemSet] {
        &self.cells
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Index of the cell containing item `z`.
    pub fn cell_of(&self, z: usize) -> usize {
        self.cells
            .iter()
            .position(|c| c.contains(z))
            .expect("cells cover the universe")
    }
}
