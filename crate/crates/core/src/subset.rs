use std::fmt;

use fixedbitset::FixedBitSet;

/// A subset of the ground set `V = {0, .., n-1}`.
///
/// Equivalent to a binary decision vector `x ∈ {0,1}^n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    bits: FixedBitSet,
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        Self { bits: FixedBitSet::with_capacity(n) }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Self { bits }
    }

    /// Builds a subset from element indices. Out-of-range indices panic.
    pub fn from_elements<I: IntoIterator<Item = usize>>(n: usize, elements: I) -> Self {
        let mut s = Self::empty(n);
        for j in elements {
            s.insert(j);
        }
        s
    }

    pub fn from_indicator(x: &[bool]) -> Self {
        Self::from_elements(x.len(), x.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j))
    }

    /// Decodes the low `n` bits of `mask` (`n ≤ 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        Self::from_elements(n, (0..n).filter(|&j| mask >> j & 1 == 1))
    }

    pub fn ground_size(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.bits.contains(j)
    }

    pub fn insert(&mut self, j: usize) {
        self.bits.insert(j);
    }

    pub fn remove(&mut self, j: usize) {
        self.bits.set(j, false);
    }

    /// `self ∪ {j}`.
    pub fn with(&self, j: usize) -> Self {
        let mut s = self.clone();
        s.insert(j);
        s
    }

    /// `self ∖ {j}`.
    pub fn without(&self, j: usize) -> Self {
        let mut s = self.clone();
        s.remove(j);
        s
    }

    pub fn union(&self, other: &Subset) -> Self {
        let mut s = self.clone();
        s.bits.union_with(&other.bits);
        s
    }

    pub fn difference(&self, other: &Subset) -> Self {
        let mut s = self.clone();
        s.bits.difference_with(&other.bits);
        s
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        s.bits.toggle_range(..);
        s
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_indicator(&self) -> Vec<bool> {
        (0..self.ground_size()).map(|j| self.contains(j)).collect()
    }

    /// Bitmask encoding, available when `n ≤ 64`.
    pub fn mask(&self) -> Option<u64> {
        if self.ground_size() > 64 {
            return None;
        }
        Some(self.iter().fold(0u64, |m, j| m | 1 << j))
    }

    /// Lexicographic order of the binary vectors, index 0 most significant.
    pub fn lex_cmp(&self, other: &Subset) -> std::cmp::Ordering {
        let n = self.ground_size().max(other.ground_size());
        for j in 0..n {
            match (self.contains(j), other.contains(j)) {
                (false, true) => return std::cmp::Ordering::Less,
                (true, false) => return std::cmp::Ordering::Greater,
                _ => {}
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}
