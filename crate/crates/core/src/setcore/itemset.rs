use std::fmt;

use super::SetError;

const WORD_BITS: usize = 64;

fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the final word of a `width`-bit vector.
fn tail_mask(width: usize) -> u64 {
    match width % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// A subset of the item universe `{0, .., m-1}` stored as a fixed-width bit vector.
///
/// Bits at positions `>= m` are always zero, so word-wise popcounts give exact
/// cardinalities.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet {
    width: usize,
    words: Vec<u64>,
}

impl ItemSet {
    pub fn empty(width: usize) -> Self {
        ItemSet {
            width,
            words: vec![0; words_for(width)],
        }
    }

    pub fn full(width: usize) -> Self {
        let mut set = ItemSet {
            width,
            words: vec![!0; words_for(width)],
        };
        set.clear_tail();
        set
    }

    pub fn from_items<I>(width: usize, items: I) -> Result<Self, SetError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = ItemSet::empty(width);
        for z in items {
            if z >= width {
                return Err(SetError::ItemOutOfRange { item: z, width });
            }
            set.insert(z);
        }
        Ok(set)
    }

    /// Builds a set of width `width <= 64` from the low bits of `mask`.
    pub fn from_mask(width: usize, mask: u64) -> Self {
        assert!(width <= WORD_BITS, "from_mask needs width <= 64");
        let mut set = ItemSet::empty(width);
        if width > 0 {
            set.words[0] = mask & tail_mask(width);
        }
        set
    }

    /// The low 64 bits; exact for `width <= 64`.
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub(crate) fn from_words(width: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(width));
        let mut set = ItemSet { width, words };
        set.clear_tail();
        set
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.width);
        }
    }

    /// Size of the universe this set lives in.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Cardinality.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, z: usize) -> bool {
        z < self.width && (self.words[z / WORD_BITS] >> (z % WORD_BITS)) & 1 == 1
    }

    pub fn insert(&mut self, z: usize) {
        assert!(z < self.width, "item {z} outside universe of {}", self.width);
        self.words[z / WORD_BITS] |= 1 << (z % WORD_BITS);
    }

    pub fn remove(&mut self, z: usize) {
        assert!(z < self.width, "item {z} outside universe of {}", self.width);
        self.words[z / WORD_BITS] &= !(1 << (z % WORD_BITS));
    }

    fn check_width(&self, other: &ItemSet) {
        assert_eq!(
            self.width, other.width,
            "item sets over different universes ({} vs {})",
            self.width, other.width
        );
    }

    fn zip_with(&self, other: &ItemSet, f: impl Fn(u64, u64) -> u64) -> ItemSet {
        self.check_width(other);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ItemSet::from_words(self.width, words)
    }

    pub fn intersection(&self, other: &ItemSet) -> ItemSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &ItemSet) -> ItemSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> ItemSet {
        let words = self.words.iter().map(|&w| !w).collect();
        ItemSet::from_words(self.width, words)
    }

    /// `|self ∩ other|` without materializing the intersection.
    pub fn intersection_count(&self, other: &ItemSet) -> usize {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self ∪ other|` without materializing the union.
    pub fn union_count(&self, other: &ItemSet) -> usize {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.check_width(other);
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.intersection_count(other) == 0
    }

    /// Items in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    /// Lowercase hex of the little-endian byte image: item 0 is the least
    /// significant bit of the first byte. Always `ceil(m/8)` bytes.
    pub fn to_hex(&self) -> String {
        let nbytes = self.width.div_ceil(8);
        let bytes: Vec<u8> = self
            .words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(width: usize, s: &str) -> Result<Self, SetError> {
        let bytes = hex::decode(s).map_err(|e| SetError::BadHex(e.to_string()))?;
        if bytes.len() != width.div_ceil(8) {
            return Err(SetError::BadHex(format!(
                "expected {} bytes for {} items, got {}",
                width.div_ceil(8),
                width,
                bytes.len()
            )));
        }
        let mut words = vec![0u64; words_for(width)];
        for (i, b) in bytes.iter().enumerate() {
            words[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        let set = ItemSet { width, words };
        let mut clean = set.clone();
        clean.clear_tail();
        if clean != set {
            return Err(SetError::BadHex(format!("bits set beyond item {}", width - 1)));
        }
        Ok(set)
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width <= 128 {
            write!(f, "ItemSet[{}]", self.width)?;
            f.debug_set().entries(self.iter()).finish()
        } else {
            write!(f, "ItemSet[{}] |{}|", self.width, self.count())
        }
    }
}
