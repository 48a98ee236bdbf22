//! Equivariant cohomology of line bundles on `(P1)^n`, RHom between the
//! bundles `F(l,E) = O(E) ⊗ V_l` on the quotient stack, and the projective
//! space cohomology needed for sheaves on boundary divisors.

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::sl2::{
    graded_tensor, invariants_of_product, tensor, GradedDims, IrrepSum, VirtualGradedRep,
};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Heavy and light markings as complementary bitsets over `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkingSplit {
    pub n: usize,
    pub heavy: Mask,
    pub light: Mask,
}

impl MarkingSplit {
    pub fn new(n: usize, heavy: Mask, light: Mask) -> Result<Self> {
        if n > bits::MAX_MARKINGS {
            return Err(Error::Split(format!("too many markings: {n}")));
        }
        if heavy & light != 0 || heavy | light != bits::full(n) {
            return Err(Error::Split(
                "heavy and light markings must partition the index set".into(),
            ));
        }
        Ok(Self { n, heavy, light })
    }

    /// Heavy markings `0..p`, light markings `p..p+q`.
    pub fn standard(p: usize, q: usize) -> Result<Self> {
        Self::new(p + q, bits::full(p), bits::range(p, p + q))
    }

    pub fn p(&self) -> usize {
        bits::card(self.heavy) as usize
    }

    pub fn q(&self) -> usize {
        bits::card(self.light) as usize
    }

    pub fn all(&self) -> Mask {
        self.heavy | self.light
    }
}

/// A label `(l, E)` with `l + |E|` even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairLE {
    pub l: i64,
    pub set: Mask,
}

impl PairLE {
    pub fn new(l: i64, set: Mask) -> Result<Self> {
        let e = bits::card(set);
        if (l + e as i64).rem_euclid(2) != 0 {
            return Err(Error::Parity { l, e });
        }
        Ok(Self { l, set })
    }

    pub fn from_indices(l: i64, ix: &[usize]) -> Result<Self> {
        Self::new(l, bits::from_indices(ix))
    }

    pub fn e(&self) -> i64 {
        bits::card(self.set) as i64
    }

    pub fn e_p(&self, split: &MarkingSplit) -> i64 {
        bits::card(self.set & split.heavy) as i64
    }

    pub fn e_q(&self, split: &MarkingSplit) -> i64 {
        bits::card(self.set & split.light) as i64
    }

    pub fn heavy_part(&self, split: &MarkingSplit) -> Mask {
        self.set & split.heavy
    }

    pub fn light_part(&self, split: &MarkingSplit) -> Mask {
        self.set & split.light
    }

    /// The label `(l, E^c)` inside `n` markings.
    pub fn complement(&self, n: usize) -> Result<Self> {
        Self::new(self.l, bits::full(n) & !self.set)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            l: self.l,
            set: bits::permute(self.set, perm),
        }
    }

    /// Exponent vector of `O(E)` on `(P1)^n`.
    pub fn exponents(&self, n: usize) -> LineBundleExponents {
        LineBundleExponents((0..n).map(|i| bits::contains(self.set, i) as i64).collect())
    }
}

impl fmt::Display for PairLE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", self.l, bits::indices(self.set))
    }
}

impl Serialize for PairLE {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            l: i64,
            #[serde(rename = "E")]
            e: Vec<usize>,
        }
        Repr {
            l: self.l,
            e: bits::indices(self.set),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairLE {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            l: i64,
            #[serde(rename = "E")]
            e: Vec<usize>,
        }
        let r = Repr::deserialize(d)?;
        PairLE::from_indices(r.l, &r.e).map_err(serde::de::Error::custom)
    }
}

/// Exponents of a line bundle `O(i_1, .., i_n)` on `(P1)^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LineBundleExponents(pub Vec<i64>);

impl LineBundleExponents {
    /// Descends to the PGL(2) quotient iff the total degree is even.
    pub fn descends(&self) -> bool {
        self.0.iter().sum::<i64>().rem_euclid(2) == 0
    }

    pub fn minus(&self, other: &Self) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// `RΓ(P1, O(a))` as a graded SL(2)-representation.
pub fn p1_cohomology(a: i64) -> VirtualGradedRep {
    match a {
        a if a >= 0 => VirtualGradedRep::concentrated(0, IrrepSum::irrep(a as u32)),
        -1 => VirtualGradedRep::zero(),
        a => VirtualGradedRep::concentrated(1, IrrepSum::irrep((-a - 2) as u32)),
    }
}

/// Künneth over the factors.
pub fn product_cohomology(lb: &LineBundleExponents) -> VirtualGradedRep {
    let mut acc = VirtualGradedRep::concentrated(0, IrrepSum::trivial());
    for &a in &lb.0 {
        acc = graded_tensor(&acc, &p1_cohomology(a));
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// Invariant part of `RΓ((P1)^n, O(exps)) ⊗ V_{m_1} ⊗ ... ⊗ V_{m_k}`.
///
/// Each factor contributes in a single degree, so the product is
/// concentrated in the degree counting exponents `<= -2`.
pub fn invariant_cohomology(exps: &[i64], extra: &[u32]) -> GradedDims {
    let mut factors: Vec<u32> = Vec::with_capacity(exps.len() + extra.len());
    let mut degree = 0;
    for &a in exps {
        match a {
            -1 => return GradedDims::zero(),
            a if a >= 0 => factors.push(a as u32),
            a => {
                degree += 1;
                factors.push((-a - 2) as u32);
            }
        }
    }
    factors.extend_from_slice(extra);
    let mut g = GradedDims::zero();
    g.add(degree, invariants_of_product(&factors));
    g
}

/// `RHom(F(from), F(to))` on the stack of `n` points, as graded invariant dimensions.
pub fn stack_rhom(from: &PairLE, to: &PairLE, n: usize) -> GradedDims {
    let exps = to.exponents(n).minus(&from.exponents(n));
    invariant_cohomology(&exps.0, &[from.l as u32, to.l as u32])
}

/// RHom between `O(exps_from) ⊗ rep_from` and `O(exps_to) ⊗ rep_to`, via the
/// full graded representation (slower, used for cross-checks).
pub fn rhom_general(
    exps_from: &LineBundleExponents,
    rep_from: &IrrepSum,
    exps_to: &LineBundleExponents,
    rep_to: &IrrepSum,
) -> GradedDims {
    let coh = product_cohomology(&exps_to.minus(exps_from));
    let twist = tensor(rep_from, rep_to);
    graded_tensor(&coh, &VirtualGradedRep::concentrated(0, twist)).invariants()
}

/// Label-level check of `F(l,E) ≅ F(l,E^c)^∨ ⊗ F(0,Σ)` for even `n`.
pub fn dual_identity_check(pair: &PairLE, n: usize) -> Result<bool> {
    if n % 2 == 1 {
        return Err(Error::Invalid(format!(
            "dual identity needs an even number of markings, got {n}"
        )));
    }
    let comp = pair.complement(n)?;
    let all = PairLE::new(0, bits::full(n))?;
    let lhs = pair.exponents(n);
    let rhs = all.exponents(n).minus(&comp.exponents(n));
    Ok(lhs == rhs && pair.l + 1 == comp.l + 1)
}

/// `H*(P^m, O(d))` dimensions.
pub fn projective_space_cohomology(m: u32, d: i64) -> GradedDims {
    let m64 = m as i64;
    if d >= 0 {
        {
            let mut g = GradedDims::zero();
            g.add(0, BigUint::from(bits::binomial((d + m64) as u64, m as u64)));
            g
        }
    } else if d <= -m64 - 1 {
        let mut g = GradedDims::zero();
        g.add(
            m as i32,
            BigUint::from(bits::binomial((-d - 1) as u64, m as u64)),
        );
        g
    } else {
        GradedDims::zero()
    }
}

/// `RΓ(P^m × P^m, O(x, y))` by Künneth.
pub fn biprojective_cohomology(m: u32, x: i64, y: i64) -> GradedDims {
    let a = projective_space_cohomology(m, x);
    let b = projective_space_cohomology(m, y);
    let mut out = GradedDims::zero();
    for (d1, k1) in a.iter() {
        for (d2, k2) in b.iter() {
            out.add(d1 + d2, k1 * k2);
        }
    }
    out
}

/// `RHom(O_δ(-a,-b), O_δ(-a2,-b2))` for a divisor `δ = P^m × P^m` with normal
/// bundle `O(-1,-1)`: `RΓ(O(a-a2, b-b2)) ⊕ RΓ(O(a-a2-1, b-b2-1))[-1]`.
pub fn boundary_sheaf_rhom(m: u32, a: i64, b: i64, a2: i64, b2: i64) -> GradedDims {
    let mut out = biprojective_cohomology(m, a - a2, b - b2);
    out.add_all(&biprojective_cohomology(m, a - a2 - 1, b - b2 - 1).shifted(-1));
    out
}
