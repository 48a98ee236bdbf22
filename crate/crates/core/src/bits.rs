//! Subsets of markings as `u64` bitmasks.

use itertools::Itertools;
use std::cmp::Ordering;

/// A subset of `{0, .., 63}`.
pub type Mask = u64;

/// Largest number of markings a mask can hold.
pub const MAX_MARKINGS: usize = 63;

#[inline]
pub fn card(m: Mask) -> u32 {
    m.count_ones()
}

/// Mask of the first `n` indices.
#[inline]
pub fn full(n: usize) -> Mask {
    assert!(n <= MAX_MARKINGS, "at most {MAX_MARKINGS} markings");
    (1u64 << n) - 1
}

/// Mask of the half-open index range `start..end`.
#[inline]
pub fn range(start: usize, end: usize) -> Mask {
    full(end) & !full(start)
}

#[inline]
pub fn contains(m: Mask, i: usize) -> bool {
    m >> i & 1 == 1
}

pub fn indices(m: Mask) -> Vec<usize> {
    (0..64).filter(|&i| contains(m, i)).collect()
}

pub fn from_indices(ix: &[usize]) -> Mask {
    ix.iter().fold(0, |acc, &i| acc | 1 << i)
}

/// Compares two subsets as sorted index lists, lexicographically.
pub fn lex_cmp(a: Mask, b: Mask) -> Ordering {
    let mut x = a;
    let mut y = b;
    loop {
        match (x == 0, y == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let i = x.trailing_zeros();
        let j = y.trailing_zeros();
        if i != j {
            return i.cmp(&j);
        }
        x &= x - 1;
        y &= y - 1;
    }
}

/// A mask ordered by [`lex_cmp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LexMask(pub Mask);

impl Ord for LexMask {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_cmp(self.0, other.0)
    }
}

impl PartialOrd for LexMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All subsets of `m`, in increasing numeric order.
pub fn subsets(m: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m {
            None
        } else {
            Some((cur.wrapping_sub(m)) & m)
        };
        Some(cur)
    })
}

/// All `k`-subsets of `m`, in lexicographic order of sorted index lists.
pub fn k_subsets(m: Mask, k: usize) -> Vec<Mask> {
    indices(m)
        .into_iter()
        .combinations(k)
        .map(|c| from_indices(&c))
        .collect()
}

/// Lexicographically least `k`-subset of `m`, if any.
pub fn least_k_subset(m: Mask, k: usize) -> Option<Mask> {
    let ix = indices(m);
    (ix.len() >= k).then(|| from_indices(&ix[..k]))
}

/// Applies a permutation of indices to a mask.
pub fn permute(m: Mask, perm: &[usize]) -> Mask {
    indices(m).into_iter().fold(0, |acc, i| acc | 1 << perm[i])
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
