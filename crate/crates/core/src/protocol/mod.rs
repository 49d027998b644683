//! Two-bidder protocols with a seller: execution, accounting, baselines, and truthfulness checks.

mod baselines;
mod engine;
mod truthful;

pub use baselines::{
    protocol_by_name, BasisExchange, GrandBundle, RandomClause, PROTOCOL_NAMES,
};
pub use engine::{approx_ratio, execute, ProtocolOutcome, DEFAULT_MAX_ROUNDS};
pub use truthful::{check_truthful, Bidder, Violation};

use thiserror::Error;

use crate::construction::Basis;
use crate::setcore::{ItemSet, Rational};
use crate::valuation::{BxosValuation, ValuationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("protocol did not terminate within {0} rounds")]
    RoundBudget(usize),
    #[error("allocation is not disjoint")]
    Overlap,
    #[error("simultaneous protocol tried to continue past round 1")]
    NotSimultaneous,
    #[error("max_rounds must be at least 1")]
    ZeroRounds,
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("unknown protocol {0:?}")]
    Unknown(String),
}

/// A bit string with an exact length; bit `i` lives in word `i / 64`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitMessage {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BitMessage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitMessage({} bits)", self.len)
    }
}

impl BitMessage {
    pub fn empty() -> Self {
        BitMessage::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} of a {}-bit message", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn push_bit(&mut self, b: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if b {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends `value` in `bits` bits, least significant first.
    pub fn push_uint(&mut self, value: u64, bits: usize) {
        assert!(bits == 64 || value >> bits == 0, "{value} does not fit in {bits} bits");
        for i in 0..bits {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    /// Appends the characteristic vector of `s` (`s.width()` bits).
    pub fn push_set(&mut self, s: &ItemSet) {
        if self.len % 64 == 0 {
            // Word-aligned fast path.
            self.words.extend_from_slice(s.words());
            self.len += s.width();
            self.words.truncate(self.len.div_ceil(64));
        } else {
            for z in 0..s.width() {
                self.push_bit(s.contains(z));
            }
        }
    }

    pub fn from_set(s: &ItemSet) -> Self {
        let mut msg = BitMessage::empty();
        msg.push_set(s);
        msg
    }

    pub fn read_uint(&self, offset: usize, bits: usize) -> u64 {
        (0..bits).fold(0, |acc, i| acc | (u64::from(self.bit(offset + i)) << i))
    }

    pub fn read_set(&self, offset: usize, width: usize) -> ItemSet {
        assert!(offset + width <= self.len, "set read past end of message");
        if offset % 64 == 0 {
            let start = offset / 64;
            let words = self.words[start..start + width.div_ceil(64)].to_vec();
            ItemSet::from_words(width, words)
        } else {
            ItemSet::from_items(width, (0..width).filter(|&z| self.bit(offset + z))).expect("in range")
        }
    }
}

/// Bits needed to send any value in `0..=m`.
pub fn value_bits(m: usize) -> usize {
    (usize::BITS - m.leading_zeros()) as usize
}

/// A bidder's private input: her valuation and, where the protocol uses it, her basis.
#[derive(Debug, Clone)]
pub struct BidderInput {
    pub valuation: BxosValuation,
    pub basis: Option<Basis>,
}

impl BidderInput {
    pub fn new(valuation: BxosValuation) -> Self {
        BidderInput {
            valuation,
            basis: None,
        }
    }

    pub fn with_basis(valuation: BxosValuation, basis: Basis) -> Self {
        BidderInput {
            valuation,
            basis: Some(basis),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SellerAction {
    Reply { to_alice: BitMessage, to_bob: BitMessage },
    Terminate,
}

/// A deterministic protocol. Transcripts passed in are everything seen so far.
pub trait Protocol {
    fn name(&self) -> &str;

    /// Declared one-round protocols must terminate after the first bidder messages.
    fn is_simultaneous(&self) -> bool;

    fn alice(&self, input: &BidderInput, from_seller: &[BitMessage]) -> BitMessage;

    fn bob(&self, input: &BidderInput, from_seller: &[BitMessage]) -> BitMessage;

    fn seller(&self, from_alice: &[BitMessage], from_bob: &[BitMessage]) -> SellerAction;

    /// Items for (Alice, Bob); the engine rejects overlapping bundles.
    fn alloc(&self, width: usize, from_alice: &[BitMessage], from_bob: &[BitMessage]) -> (ItemSet, ItemSet);

    fn price(&self, from_alice: &[BitMessage], from_bob: &[BitMessage]) -> (Rational, Rational);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uint_round_trip() {
        let mut msg = BitMessage::empty();
        msg.push_uint(5, 3);
        msg.push_uint(0, 0);
        msg.push_uint(1000, 10);
        assert_eq!(msg.len(), 13);
        assert_eq!(msg.read_uint(0, 3), 5);
        assert_eq!(msg.read_uint(3, 10), 1000);
    }

    #[test]
    fn set_round_trip_aligned_and_not() {
        let s = ItemSet::from_items(130, [0, 64, 77, 129]).unwrap();
        let mut msg = BitMessage::from_set(&s);
        msg.push_bit(true);
        msg.push_set(&s);
        assert_eq!(msg.len(), 261);
        assert_eq!(msg.read_set(0, 130), s);
        assert_eq!(msg.read_set(131, 130), s);
    }

    #[test]
    fn value_bit_widths() {
        assert_eq!(value_bits(0), 0);
        assert_eq!(value_bits(1), 1);
        assert_eq!(value_bits(16), 5);
        assert_eq!(value_bits(15), 4);
    }
}
