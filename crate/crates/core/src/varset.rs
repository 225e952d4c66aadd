use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest number of predictors a [`VarSet`] can address.
pub const MAX_PREDICTORS: usize = 128;

/// A set of predictor indices stored as a fixed-width bitmask.
///
/// Predictor indices are 0-based (`0..p`). The intercept is never a member;
/// it takes part in every fit implicitly.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct VarSet(u128);

impl VarSet {
    pub const fn empty() -> Self {
        VarSet(0)
    }

    /// `{0, 1, ..., p-1}`.
    pub fn full(p: usize) -> Self {
        assert!(p <= MAX_PREDICTORS, "p = {p} exceeds {MAX_PREDICTORS}");
        if p == MAX_PREDICTORS {
            VarSet(u128::MAX)
        } else {
            VarSet((1u128 << p) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        VarSet(bit(j))
    }

    pub const fn from_bits(bits: u128) -> Self {
        VarSet(bits)
    }

    pub const fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, j: usize) -> bool {
        j < MAX_PREDICTORS && self.0 & (1u128 << j) != 0
    }

    pub fn insert(&mut self, j: usize) {
        self.0 |= bit(j);
    }

    pub fn remove(&mut self, j: usize) {
        self.0 &= !bit(j);
    }

    pub fn with(self, j: usize) -> Self {
        VarSet(self.0 | bit(j))
    }

    pub fn without(self, j: usize) -> Self {
        VarSet(self.0 & !bit(j))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lexicographic comparison of the ascending member lists.
    pub fn cmp_lex(self, other: Self) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

fn bit(j: usize) -> u128 {
    assert!(j < MAX_PREDICTORS, "predictor index {j} out of range");
    1u128 << j
}

pub struct Iter(u128);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let j = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(j)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for VarSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = VarSet::empty();
        for j in iter {
            s.insert(j);
        }
        s
    }
}

impl From<Vec<usize>> for VarSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl From<VarSet> for Vec<usize> {
    fn from(s: VarSet) -> Self {
        s.to_vec()
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VarSet {
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
