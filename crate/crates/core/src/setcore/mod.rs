//! Item sets, partitions of the item universe, and partition-constrained sampling.

mod itemset;
mod partition;
mod rng;
mod sampling;

pub use itemset::ItemSet;
pub use partition::{part_cells, part_profile, PartitionParameter};
pub use rng::RngStream;
pub use sampling::{expected_intersection, refine_sample, sample_pc, sample_pc_ally};

use thiserror::Error;

/// Exact rational used for expectations and golden constants.
pub type Rational = num_rational::BigRational;

/// Builds an exact rational from a machine fraction.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// The exact value of the shortest decimal that prints as `x` (so `0.002` is `1/500`);
/// `None` for non-finite input.
pub fn decimal_ratio(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{}", x.abs());
    let (int, fracpart) = text.split_once('.').unwrap_or((&text, ""));
    let digits: num_bigint::BigInt = format!("{int}{fracpart}").parse().ok()?;
    let den = num_bigint::BigInt::from(10u32).pow(fracpart.len() as u32);
    let r = Rational::new(digits, den);
    Some(if x < 0.0 { -r } else { r })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("item {item} outside universe of {width} items")]
    ItemOutOfRange { item: usize, width: usize },
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("malformed hex item set: {0}")]
    BadHex(String),
    #[error("invalid partition parameter: {0}")]
    InvalidParameter(String),
    #[error("class counts do not match cell sizes: {0}")]
    CountMismatch(String),
}

pub(crate) fn check_widths<'a, I>(width: usize, sets: I) -> Result<(), SetError>
where
    I: IntoIterator<Item = &'a ItemSet>,
{
    for s in sets {
        if s.width() != width {
            return Err(SetError::WidthMismatch {
                expected: width,
                found: s.width(),
            });
        }
    }
    Ok(())
}
