use num_bigint::BigInt;
use rand::Rng;

use super::{check_widths, ItemSet, PartitionParameter, Rational, RngStream, SetError};

/// Splits every cell uniformly into labeled classes with prescribed sizes.
///
/// `class_counts[i][t]` is how many items of `base_cells[i]` go to class `t`.
/// Within a cell the assignment is a uniform shuffle followed by a split, so it
/// is uniform over all assignments meeting the counts, independently per cell.
pub fn refine_sample(
    base_cells: &[ItemSet],
    class_counts: &[Vec<usize>],
    rng: &mut RngStream,
) -> Result<Vec<ItemSet>, SetError> {
    if base_cells.is_empty() {
        return Err(SetError::CountMismatch("no cells".into()));
    }
    if base_cells.len() != class_counts.len() {
        return Err(SetError::CountMismatch(format!(
            "{} cells but {} count rows",
            base_cells.len(),
            class_counts.len()
        )));
    }
    let width = base_cells[0].width();
    check_widths(width, base_cells)?;
    let c = class_counts[0].len();
    let mut classes = vec![ItemSet::empty(width); c];
    let mut items = Vec::new();
    for (i, (cell, row)) in base_cells.iter().zip(class_counts).enumerate() {
        if row.len() != c {
            return Err(SetError::CountMismatch(format!(
                "row {i} has {} classes, expected {c}",
                row.len()
            )));
        }
        let size = cell.count();
        if row.iter().sum::<usize>() != size {
            return Err(SetError::CountMismatch(format!(
                "cell {i} has {size} items but counts {row:?}"
            )));
        }
        items.clear();
        items.extend(cell.iter());
        // Partial Fisher-Yates: only the prefix handed to the first c-1 classes
        // needs to be a uniform draw; the rest is whatever remains.
        let head = size - row.last().copied().unwrap_or(0);
        for pos in 0..head {
            let j = rng.random_range(pos..size);
            items.swap(pos, j);
        }
        let mut start = 0;
        for (t, &cnt) in row.iter().enumerate() {
            for &z in &items[start..start + cnt] {
                classes[t].insert(z);
            }
            start += cnt;
        }
    }
    Ok(classes)
}

/// A uniform draw from the sets meeting `param`'s per-cell counts.
pub fn sample_pc(param: &PartitionParameter, rng: &mut RngStream) -> ItemSet {
    let rows: Vec<Vec<usize>> = param
        .cells()
        .iter()
        .zip(param.counts())
        .map(|(c, &p)| vec![p, c.count() - p])
        .collect();
    refine_sample(param.cells(), &rows, rng)
        .expect("validated parameter")
        .swap_remove(0)
}

/// Includes each item independently with probability `count / |cell|` of its cell.
pub fn sample_pc_ally(param: &PartitionParameter, rng: &mut RngStream) -> ItemSet {
    let mut u = ItemSet::empty(param.width());
    for (cell, &p) in param.cells().iter().zip(param.counts()) {
        let size = cell.count();
        if p == 0 {
            continue;
        }
        let (num, den) = (p as u32, size as u32);
        for z in cell.iter() {
            if rng.random_ratio(num, den) {
                u.insert(z);
            }
        }
    }
    u
}

/// The exact mean of `|U ∩ U'|` for independent draws from the two parameters.
pub fn expected_intersection(
    d: &PartitionParameter,
    d2: &PartitionParameter,
) -> Result<Rational, SetError> {
    if d.width() != d2.width() {
        return Err(SetError::WidthMismatch {
            expected: d.width(),
            found: d2.width(),
        });
    }
    let mut total = Rational::from_integer(BigInt::from(0));
    for (pi, &ci) in d.cells().iter().zip(d.counts()) {
        let si = pi.count();
        if si == 0 {
            continue;
        }
        for (pj, &cj) in d2.cells().iter().zip(d2.counts()) {
            let sj = pj.count();
            if sj == 0 {
                continue;
            }
            let overlap = pi.intersection_count(pj);
            if overlap == 0 || ci == 0 || cj == 0 {
                continue;
            }
            total += Rational::new(
                BigInt::from(ci) * BigInt::from(cj) * BigInt::from(overlap),
                BigInt::from(si) * BigInt::from(sj),
            );
        }
    }
    Ok(total)
}
