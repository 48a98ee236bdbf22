//! Finite-dimensional SL(2) representations stored by highest weight, and
//! graded virtual representations indexed by cohomological degree.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

/// A direct sum of irreducibles `V_m` with multiplicities.
///
/// Zero multiplicities are never stored, so structural equality is
/// isomorphism of representations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IrrepSum {
    mults: BTreeMap<u32, BigUint>,
}

impl IrrepSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The irreducible `V_m` of dimension `m + 1`.
    pub fn irrep(m: u32) -> Self {
        let mut s = Self::zero();
        s.add_irrep(m, BigUint::one());
        s
    }

    pub fn trivial() -> Self {
        Self::irrep(0)
    }

    pub fn from_pairs<I: IntoIterator<Item = (u32, u64)>>(pairs: I) -> Self {
        let mut s = Self::zero();
        for (m, k) in pairs {
            s.add_irrep(m, BigUint::from(k));
        }
        s
    }

    pub fn add_irrep(&mut self, m: u32, k: BigUint) {
        if k.is_zero() {
            return;
        }
        *self.mults.entry(m).or_default() += k;
    }

    pub fn add(&mut self, other: &IrrepSum) {
        for (&m, k) in &other.mults {
            self.add_irrep(m, k.clone());
        }
    }

    pub fn scaled(&self, k: &BigUint) -> IrrepSum {
        if k.is_zero() {
            return Self::zero();
        }
        IrrepSum {
            mults: self.mults.iter().map(|(&m, v)| (m, v * k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mults.is_empty()
    }

    pub fn multiplicity(&self, m: u32) -> BigUint {
        self.mults.get(&m).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BigUint)> {
        self.mults.iter().map(|(&m, k)| (m, k))
    }

    pub fn highest(&self) -> Option<u32> {
        self.mults.keys().next_back().copied()
    }

    pub fn dimension(&self) -> BigUint {
        self.mults
            .iter()
            .map(|(&m, k)| k * BigUint::from(m + 1))
            .sum()
    }

    /// The weight multiset: weight `w` maps to its multiplicity.
    pub fn weights(&self) -> BTreeMap<i64, BigUint> {
        let mut out: BTreeMap<i64, BigUint> = BTreeMap::new();
        for (&m, k) in &self.mults {
            let m = m as i64;
            for w in (-m..=m).step_by(2) {
                *out.entry(w).or_default() += k;
            }
        }
        out
    }

    /// Drops every summand of highest weight above `bound`.
    pub fn truncate_above(&mut self, bound: u32) {
        self.mults.retain(|&m, _| m <= bound);
    }
}

/// `V_l ⊗ V_l2 = V_{l+l2} ⊕ V_{l+l2-2} ⊕ ... ⊕ V_{|l-l2|}`.
pub fn clebsch_gordan(l: u32, l2: u32) -> IrrepSum {
    let lo = l.abs_diff(l2);
    let mut s = IrrepSum::zero();
    for m in (lo..=l + l2).step_by(2) {
        s.add_irrep(m, BigUint::one());
    }
    s
}

/// Bilinear extension of [`clebsch_gordan`].
pub fn tensor(a: &IrrepSum, b: &IrrepSum) -> IrrepSum {
    let mut out = IrrepSum::zero();
    for (m1, k1) in a.iter() {
        for (m2, k2) in b.iter() {
            let k = k1 * k2;
            for m in (m1.abs_diff(m2)..=m1 + m2).step_by(2) {
                out.add_irrep(m, k.clone());
            }
        }
    }
    out
}

/// Multiplicity of the trivial representation.
pub fn invariant_multiplicity(a: &IrrepSum) -> BigUint {
    a.multiplicity(0)
}

/// Dimension of the invariants of `V_{m_1} ⊗ ... ⊗ V_{m_k}`.
///
/// Summands whose highest weight exceeds the total of the remaining factors
/// cannot reach the trivial representation and are pruned as we go.
pub fn invariants_of_product(factors: &[u32]) -> BigUint {
    let mut sorted: Vec<u32> = factors.iter().copied().filter(|&m| m > 0).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = sorted.iter().map(|&m| m as u64).sum();
    if total % 2 == 1 {
        return BigUint::zero();
    }
    let Some((&first, rest)) = sorted.split_first() else {
        return BigUint::one();
    };
    let mut remaining: u64 = rest.iter().map(|&m| m as u64).sum();
    if first as u64 > remaining {
        return BigUint::zero();
    }
    let mut acc = IrrepSum::irrep(first);
    for &m in rest {
        remaining -= m as u64;
        acc = tensor(&acc, &IrrepSum::irrep(m));
        acc.truncate_above(remaining.min(u32::MAX as u64) as u32);
        if acc.is_zero() {
            return BigUint::zero();
        }
    }
    acc.multiplicity(0)
}

/// Cohomological-degree-indexed representations. Zero components are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VirtualGradedRep {
    by_degree: BTreeMap<i32, IrrepSum>,
}

impl VirtualGradedRep {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn concentrated(degree: i32, rep: IrrepSum) -> Self {
        let mut v = Self::zero();
        v.add_in_degree(degree, &rep);
        v
    }

    pub fn add_in_degree(&mut self, degree: i32, rep: &IrrepSum) {
        if rep.is_zero() {
            return;
        }
        self.by_degree.entry(degree).or_default().add(rep);
    }

    pub fn is_zero(&self) -> bool {
        self.by_degree.is_empty()
    }

    pub fn degree(&self, d: i32) -> IrrepSum {
        self.by_degree.get(&d).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &IrrepSum)> {
        self.by_degree.iter().map(|(&d, r)| (d, r))
    }

    /// `X[k]` moves degree `d` to `d - k`.
    pub fn shifted(&self, k: i32) -> Self {
        VirtualGradedRep {
            by_degree: self
                .by_degree
                .iter()
                .map(|(&d, r)| (d - k, r.clone()))
                .collect(),
        }
    }

    /// Invariant dimensions in each degree.
    pub fn invariants(&self) -> GradedDims {
        let mut g = GradedDims::zero();
        for (&d, r) in &self.by_degree {
            g.add(d, invariant_multiplicity(r));
        }
        g
    }

    /// Euler characteristic of dimensions.
    pub fn euler_dimension(&self) -> num_bigint::BigInt {
        let mut acc = num_bigint::BigInt::zero();
        for (&d, r) in &self.by_degree {
            let dim = num_bigint::BigInt::from(r.dimension());
            if d % 2 == 0 {
                acc += dim;
            } else {
                acc -= dim;
            }
        }
        acc
    }
}

/// Degree-wise convolution.
pub fn graded_tensor(x: &VirtualGradedRep, y: &VirtualGradedRep) -> VirtualGradedRep {
    let mut out = VirtualGradedRep::zero();
    for (d1, r1) in x.iter() {
        for (d2, r2) in y.iter() {
            out.add_in_degree(d1 + d2, &tensor(r1, r2));
        }
    }
    out
}

/// Graded dimensions: degree to dimension, zero entries absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GradedDims {
    dims: BTreeMap<i32, BigUint>,
}

impl GradedDims {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn concentrated(degree: i32, dim: u64) -> Self {
        let mut g = Self::zero();
        g.add(degree, BigUint::from(dim));
        g
    }

    pub fn add(&mut self, degree: i32, dim: BigUint) {
        if dim.is_zero() {
            return;
        }
        *self.dims.entry(degree).or_default() += dim;
    }

    pub fn add_all(&mut self, other: &GradedDims) {
        for (&d, k) in &other.dims {
            self.add(d, k.clone());
        }
    }

    pub fn shifted(&self, k: i32) -> Self {
        GradedDims {
            dims: self.dims.iter().map(|(&d, v)| (d - k, v.clone())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn get(&self, d: i32) -> BigUint {
        self.dims.get(&d).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &BigUint)> {
        self.dims.iter().map(|(&d, v)| (d, v))
    }

    /// True when the only nonzero entry is a one-dimensional space.
    pub fn is_one_dimensional(&self) -> bool {
        self.dims.len() == 1 && self.dims.values().all(|v| v.is_one())
    }

    /// Degree of the unique nonzero entry, if there is exactly one.
    pub fn single_degree(&self) -> Option<i32> {
        (self.dims.len() == 1).then(|| *self.dims.keys().next().unwrap())
    }

    pub fn concentrated_in(&self, degree: i32) -> bool {
        self.dims.keys().all(|&d| d == degree)
    }
}

impl Serialize for GradedDims {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.dims.len()))?;
        for (d, v) in &self.dims {
            m.serialize_entry(&d.to_string(), &v.to_string())?;
        }
        m.end()
    }
}
