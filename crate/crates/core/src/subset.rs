//! Feature subsets as 64-bit masks, and fixed-size subset enumeration.

use std::fmt;

/// Largest feature count representable by a [`SubsetMask`].
pub const MAX_FEATURES: usize = 64;

/// A subset `u` of the feature set `M = {0, .., p-1}`.
///
/// Complements are always taken relative to an explicit `p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetMask(u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        SubsetMask(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The full set `M` for `p` features.
    #[inline]
    pub fn full(p: usize) -> Self {
        debug_assert!(p <= MAX_FEATURES);
        if p == MAX_FEATURES {
            SubsetMask(u64::MAX)
        } else {
            SubsetMask((1u64 << p) - 1)
        }
    }

    #[inline]
    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_FEATURES);
        SubsetMask(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices.into_iter().fold(Self::EMPTY, |acc, i| acc.with(i))
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_FEATURES && self.0 & (1u64 << i) != 0
    }

    /// `u + i`
    #[inline]
    pub fn with(self, i: usize) -> Self {
        SubsetMask(self.0 | (1u64 << i))
    }

    /// `u - i`
    #[inline]
    pub fn without(self, i: usize) -> Self {
        SubsetMask(self.0 & !(1u64 << i))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// `M \ u` for `M = {0, .., p-1}`.
    #[inline]
    pub fn complement(self, p: usize) -> Self {
        SubsetMask(!self.0 & Self::full(p).0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member indices in increasing order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// Maps a mask over local positions `0..k` into the positions of `self`
    /// (the i-th set bit of `self` receives local bit i).
    pub fn deposit(self, local: u64) -> SubsetMask {
        let mut out = 0u64;
        let mut rest = self.0;
        let mut bit = 0;
        while rest != 0 {
            let low = rest & rest.wrapping_neg();
            if local & (1u64 << bit) != 0 {
                out |= low;
            }
            rest &= rest - 1;
            bit += 1;
        }
        SubsetMask(out)
    }

    /// All subsets of `self` with exactly `k` members, in increasing
    /// numeric (lexicographic bitmask) order.
    pub fn k_subsets(self, k: usize) -> KSubsets {
        KSubsets::new(self, k)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Iterator over the members of a mask.
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Gosper's hack over the compressed universe, deposited back into the
/// universe's bit positions. Deposit is monotone, so output order is the
/// numeric order of the resulting masks.
pub struct KSubsets {
    universe: SubsetMask,
    n: usize,
    current: Option<u64>,
}

impl KSubsets {
    fn new(universe: SubsetMask, k: usize) -> Self {
        let n = universe.len();
        let current = if k > n {
            None
        } else if k == 0 {
            Some(0)
        } else if k == 64 {
            Some(u64::MAX)
        } else {
            Some((1u64 << k) - 1)
        };
        KSubsets { universe, n, current }
    }
}

impl Iterator for KSubsets {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.current?;
        let out = self.universe.deposit(cur);
        self.current = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            // overflow past bit n-1 (or past 64 bits) ends the sequence
            if r == 0 || (self.n < 64 && r >> self.n != 0) {
                None
            } else {
                Some((((r ^ cur) >> 2) / c) | r)
            }
        };
        Some(out)
    }
}

/// Binomial coefficient `C(n, k)` as a running product in floating point.
/// Returns 0 for `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for t in 1..=k {
        acc = acc * (n - k + t) as f64 / t as f64;
    }
    acc
}

/// Shapley weight `|u|!(p-|u|-1)!/p!` written as `1/(p * C(p-1, |u|))`.
pub fn shapley_weight(p: usize, size: usize) -> f64 {
    debug_assert!(size < p);
    1.0 / (p as f64 * binomial(p as i64 - 1, size as i64))
}
