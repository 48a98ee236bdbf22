//! Rank of `K_0` of Hassett spaces by walking a straight path of weights
//! from a projective space and applying the blow-up formula at every wall,
//! plus character checks for Koszul expansions on the stack.

use crate::bits::{self, Mask};
use crate::error::{Error, Result};
use crate::git::GitProblem;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

/// Weights `a_i ∈ (0, 1]` with `Σ a_i > 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HassettWeights {
    pub weights: Vec<BigRational>,
}

impl HassettWeights {
    /// Validates the range and the sum; generic weights have no subset of
    /// size at least two with weight exactly one.
    pub fn new(weights: Vec<BigRational>, generic: bool) -> Result<Self> {
        let one = BigRational::one();
        if weights.len() < 3 {
            return Err(Error::Weights(format!(
                "need at least 3 weights, got {}",
                weights.len()
            )));
        }
        if weights.len() > bits::MAX_MARKINGS {
            return Err(Error::Weights("too many weights".into()));
        }
        for w in &weights {
            if !w.is_positive() || *w > one {
                return Err(Error::Weights(format!("weight {w} outside (0, 1]")));
            }
        }
        let total: BigRational = weights.iter().sum();
        if total <= BigRational::from_integer(2.into()) {
            return Err(Error::Weights(format!(
                "weights sum to {total}, need more than 2"
            )));
        }
        let w = Self { weights };
        if generic {
            if let Some(k) = w.wall_subset() {
                return Err(Error::NonGeneric {
                    subset: bits::indices(k),
                });
            }
        }
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    fn sum(&self, k: Mask) -> BigRational {
        subset_sum(&self.weights, k)
    }

    /// A subset of size at least two with weight exactly one.
    pub fn wall_subset(&self) -> Option<Mask> {
        let one = BigRational::one();
        bits::subsets(bits::full(self.n())).find(|&k| bits::card(k) >= 2 && self.sum(k) == one)
    }

    /// Smallest nonzero `|Σ_K a - 1|` over subsets of size at least two.
    fn gap(&self) -> BigRational {
        let one = BigRational::one();
        bits::subsets(bits::full(self.n()))
            .filter(|&k| bits::card(k) >= 2)
            .map(|k| (self.sum(k) - &one).abs())
            .filter(|d| !d.is_zero())
            .min()
            .unwrap_or_else(BigRational::one)
    }

    /// Shifts every weight by `sign · δ`, with `δ` small enough not to cross
    /// any wall other than the ones it resolves.
    fn perturbed(&self, upward: bool) -> Self {
        let n = BigRational::from_integer((self.n() as i64).into());
        let two = BigRational::from_integer(2.into());
        let total: BigRational = self.weights.iter().sum();
        let mut bound = self.gap();
        let slack = &total - &two;
        if slack.is_positive() && slack < bound {
            bound = slack;
        }
        let min_w = self
            .weights
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(BigRational::one);
        if min_w < bound {
            bound = min_w;
        }
        let one = BigRational::one();
        let max_w = self
            .weights
            .iter()
            .max()
            .cloned()
            .unwrap_or_else(BigRational::one);
        if upward && max_w < one && &one - &max_w < bound {
            bound = &one - &max_w;
        }
        let delta = bound / (&n * &two);
        let weights = self
            .weights
            .iter()
            .map(|w| if upward { w + &delta } else { w - &delta })
            .collect();
        Self { weights }
    }
}

fn subset_sum(w: &[BigRational], k: Mask) -> BigRational {
    bits::indices(k).into_iter().map(|i| w[i].clone()).sum()
}

type Memo = Mutex<HashMap<Vec<BigRational>, BigUint>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A wall crossed by the path at time `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallEvent {
    pub t: BigRational,
    /// Sets whose weight drops through one.
    pub decreasing: Vec<Mask>,
    /// Sets whose weight rises through one.
    pub increasing: Vec<Mask>,
}

/// Reference weights `(1, b, .., b)` with `b` strictly between `1/(n-1)` and
/// `1/(n-2)`: the Hassett space is `P^{n-3}`.
pub fn reference_weights(n: usize) -> Vec<BigRational> {
    assert!(n >= 4);
    let b = (BigRational::new(1.into(), ((n - 1) as i64).into())
        + BigRational::new(1.into(), ((n - 2) as i64).into()))
        / BigRational::from_integer(2.into());
    let mut w = vec![BigRational::one()];
    w.extend(std::iter::repeat_n(b, n - 1));
    w
}

/// Wall events along `t ↦ (1 - t)·from + t·to`, `0 < t < 1`, grouped by time.
pub fn wall_events(from: &[BigRational], to: &[BigRational]) -> Vec<WallEvent> {
    let n = from.len();
    let one = BigRational::one();
    let mut by_time: BTreeMap<BigRational, WallEvent> = BTreeMap::new();
    for k in bits::subsets(bits::full(n)).filter(|&k| bits::card(k) >= 2) {
        let s0 = subset_sum(from, k);
        let s1 = subset_sum(to, k);
        if s0 == s1 {
            continue;
        }
        let t = (&one - &s0) / (&s1 - &s0);
        if t.is_positive() && t < one {
            let ev = by_time.entry(t.clone()).or_insert_with(|| WallEvent {
                t,
                decreasing: Vec::new(),
                increasing: Vec::new(),
            });
            if s1 < s0 {
                ev.decreasing.push(k);
            } else {
                ev.increasing.push(k);
            }
        }
    }
    by_time.into_values().collect()
}

/// Rank of `K_0` of the Hassett space with generic weights `w`.
pub fn rank_hassett(w: &HassettWeights) -> Result<BigUint> {
    if let Some(k) = w.wall_subset() {
        return Err(Error::NonGeneric {
            subset: bits::indices(k),
        });
    }
    Ok(rank_inner(&w.weights)
        .to_biguint()
        .expect("ranks are nonnegative"))
}

fn rank_inner(w: &[BigRational]) -> BigInt {
    let n = w.len();
    if n == 3 {
        return BigInt::one();
    }
    let mut key = w.to_vec();
    key.sort();
    if let Some(r) = memo().lock().expect("memo lock").get(&key) {
        return BigInt::from(r.clone());
    }
    let reference = reference_weights(n);
    let mut rank = BigInt::from(n as i64 - 2);
    for ev in wall_events(&reference, &key) {
        let one = BigRational::one();
        let at: Vec<BigRational> = reference
            .iter()
            .zip(&key)
            .map(|(a, b)| (&one - &ev.t) * a + &ev.t * b)
            .collect();
        rank -= contribution(&at, &ev.decreasing);
        rank += contribution(&at, &ev.increasing);
    }
    assert!(!rank.is_negative(), "negative rank for weights {key:?}");
    memo()
        .lock()
        .expect("memo lock")
        .insert(key, rank.to_biguint().expect("nonnegative"));
    rank
}

/// `Σ_F Π_{J∈F} (|J| - 2) · rank(Y_F)` over nonempty families of pairwise
/// disjoint crossing sets.
fn contribution(at: &[BigRational], sets: &[Mask]) -> BigInt {
    let mut total = BigInt::zero();
    let mut family = Vec::new();
    families(at, sets, 0, 0, &mut family, &mut total);
    total
}

fn families(
    at: &[BigRational],
    sets: &[Mask],
    i: usize,
    used: Mask,
    family: &mut Vec<Mask>,
    total: &mut BigInt,
) {
    if i == sets.len() {
        if family.is_empty() {
            return;
        }
        let coef: i64 = family.iter().map(|&m| bits::card(m) as i64 - 2).product();
        if coef != 0 {
            *total += BigInt::from(coef) * locus_rank(at, family);
        }
        return;
    }
    families(at, sets, i + 1, used, family, total);
    if sets[i] & used == 0 {
        family.push(sets[i]);
        families(at, sets, i + 1, used | sets[i], family, total);
        family.pop();
    }
}

/// Rank of the locus where each set of the family collapses to a point of
/// weight one; non-generic loci are perturbed downward.
fn locus_rank(at: &[BigRational], family: &[Mask]) -> BigInt {
    let used = family.iter().fold(0, |a, &m| a | m);
    let mut w: Vec<BigRational> = family.iter().map(|_| BigRational::one()).collect();
    w.extend(
        (0..at.len())
            .filter(|&i| !bits::contains(used, i))
            .map(|i| at[i].clone()),
    );
    let mut hw = HassettWeights { weights: w };
    if hw.wall_subset().is_some() {
        hw = hw.perturbed(false);
        assert!(hw.wall_subset().is_none(), "perturbation left a wall");
    }
    rank_inner(&hw.weights)
}

/// Hassett weights realizing `M̄_{p,q}`.
///
/// With no light markings the weights are the midpoint of the chamber
/// (`(2/p, 1/r]` for `p = 2r + 1`, `(1/r, 1/(r-1)]` for `p = 2r`). Otherwise
/// the standard GIT weights (summing to 2) are shifted up uniformly, which
/// for even `p` and `q` selects the resolution with boundary divisors.
pub fn mpq_weights(p: usize, q: usize) -> Result<HassettWeights> {
    let rat = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    if q == 0 {
        let w = if p % 2 == 1 {
            let r = ((p - 1) / 2) as i64;
            if r == 0 {
                return Err(Error::UnsupportedSpace(format!("p = {p}")));
            }
            (rat(2, p as i64) + rat(1, r)) / rat(2, 1)
        } else {
            let r = (p / 2) as i64;
            if r < 2 {
                return Err(Error::UnsupportedSpace(format!("p = {p}")));
            }
            let upper = if r == 2 {
                BigRational::one()
            } else {
                rat(1, r - 1)
            };
            (rat(1, r) + upper) / rat(2, 1)
        };
        return HassettWeights::new(vec![w; p], true);
    }
    let git = GitProblem::recipe(p, q)?;
    let raw = HassettWeights {
        weights: git.weights.clone(),
    };
    HassettWeights::new(raw.perturbed(true).weights, true)
}

/// Rank of `K_0(M̄_{p,q})`.
pub fn rank_mpq(p: usize, q: usize) -> Result<BigUint> {
    rank_hassett(&mpq_weights(p, q)?)
}

/// `M̄_{0,n}` with all weights one.
pub fn rank_m0n(n: usize) -> Result<BigUint> {
    rank_hassett(&HassettWeights::new(vec![BigRational::one(); n], true)?)
}

/// Laurent polynomial in one variable with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Laurent(pub BTreeMap<i64, BigInt>);

impl Laurent {
    pub fn monomial(exp: i64, coef: i64) -> Self {
        let mut m = BTreeMap::new();
        if coef != 0 {
            m.insert(exp, BigInt::from(coef));
        }
        Self(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_scaled(&mut self, other: &Laurent, k: i64) {
        for (e, c) in &other.0 {
            let entry = self.0.entry(*e).or_insert_with(BigInt::zero);
            *entry += c * k;
            if entry.is_zero() {
                self.0.remove(e);
            }
        }
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        let mut out = Laurent::default();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &other.0 {
                let entry = out.0.entry(e1 + e2).or_insert_with(BigInt::zero);
                *entry += c1 * c2;
            }
        }
        out.0.retain(|_, c| !c.is_zero());
        out
    }

    pub fn pow(&self, k: u32) -> Laurent {
        (0..k).fold(Laurent::monomial(0, 1), |acc, _| acc.mul(self))
    }

    /// Character of `V_k`, extended to all `k` by `χ_{-1} = 0` and
    /// `χ_k = -χ_{-k-2}` (the class of `V_{-k-2}[-1]`).
    pub fn sl2_character(k: i64) -> Laurent {
        if k == -1 {
            return Laurent::default();
        }
        let (top, sign) = if k >= 0 { (k, 1) } else { (-k - 2, -1) };
        let mut out = Laurent::default();
        for j in 0..=top {
            out.add_scaled(&Laurent::monomial(top - 2 * j, 1), sign);
        }
        out
    }
}

/// A Koszul expansion: for each `J ⊆ interior` the term `F(m - |J|, base ∪ J)`
/// with sign `(-1)^{|J|}`. `base` and `interior` are disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KoszulExpansion {
    pub n: usize,
    pub interior: Mask,
    pub base: Mask,
    pub m: i64,
}

/// Outcome of [`koszul_class_check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KoszulCheck {
    pub rank_sum: BigInt,
    pub points_checked: usize,
    pub failures: Vec<Vec<usize>>,
}

impl KoszulCheck {
    pub fn ok(&self) -> bool {
        self.rank_sum.is_zero() && self.failures.is_empty()
    }
}

/// The alternating class of a Koszul expansion restricted to each torus
/// fixed point `z_K`: zero when the interior meets both `K` and its
/// complement, and equal to the class of a line bundle on the diagonal times
/// `λ_{-1}` of its conormal bundle otherwise. The alternating rank is zero.
pub fn koszul_class_check(exp: &KoszulExpansion) -> KoszulCheck {
    if exp.interior == 0 {
        return KoszulCheck {
            rank_sum: BigInt::zero(),
            points_checked: 0,
            failures: Vec::new(),
        };
    }
    let i_len = bits::card(exp.interior);
    let sub: Vec<Mask> = bits::subsets(exp.interior).collect();
    let mut rank_sum = BigInt::zero();
    for &j in &sub {
        let sign = if bits::card(j).is_multiple_of(2) {
            1
        } else {
            -1
        };
        let k = exp.m - bits::card(j) as i64;
        rank_sum += BigInt::from(sign * (k + 1));
    }
    let mut failures = Vec::new();
    let mut points = 0;
    for kset in bits::subsets(bits::full(exp.n)) {
        points += 1;
        let weight_sign = |i: usize| if bits::contains(kset, i) { -1 } else { 1 };
        let mut total = Laurent::default();
        for &j in &sub {
            let sign = if bits::card(j).is_multiple_of(2) {
                1
            } else {
                -1
            };
            let lin: i64 = bits::indices(exp.base | j)
                .into_iter()
                .map(weight_sign)
                .sum();
            let term = Laurent::monomial(-lin, 1)
                .mul(&Laurent::sl2_character(exp.m - bits::card(j) as i64));
            total.add_scaled(&term, sign);
        }
        let inside = exp.interior & kset;
        let expected = if inside != 0 && inside != exp.interior {
            Laurent::default()
        } else {
            let sigma = if inside == 0 { 1 } else { -1 };
            let b: i64 = bits::indices(exp.base).into_iter().map(weight_sign).sum();
            let line = Laurent::monomial(-b + exp.m * sigma, 1);
            let mut conormal = Laurent::monomial(0, 1);
            conormal.add_scaled(&Laurent::monomial(-2 * sigma, 1), -1);
            line.mul(&conormal.pow(i_len - 1))
        };
        if total != expected {
            failures.push(bits::indices(kset));
        }
    }
    KoszulCheck {
        rank_sum,
        points_checked: points,
        failures,
    }
}

/// Clears the rank memo table.
pub fn clear_memo() {
    memo().lock().expect("memo lock").clear();
}

/// Number of memoized weight vectors.
pub fn memo_len() -> usize {
    memo().lock().expect("memo lock").len()
}

/// Converts a rank to `u64` for reporting.
pub fn rank_u64(r: &BigUint) -> Option<u64> {
    r.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m0n_sequence() {
        let ranks: Vec<u64> = (3..=7)
            .map(|n| rank_m0n(n).unwrap().to_u64().unwrap())
            .collect();
        assert_eq!(ranks, vec![1, 2, 7, 34, 213]);
    }

    #[test]
    fn mpq_examples() {
        assert_eq!(rank_mpq(5, 0).unwrap(), BigUint::from(7u32));
        assert_eq!(rank_mpq(7, 0).unwrap(), BigUint::from(38u32));
        assert_eq!(rank_mpq(4, 3).unwrap(), BigUint::from(34u32));
        assert_eq!(rank_mpq(6, 0).unwrap(), BigUint::from(34u32));
    }

    #[test]
    fn non_generic_rejected() {
        let half = BigRational::new(1.into(), 2.into());
        let w = vec![half.clone(), half, BigRational::one(), BigRational::one()];
        assert!(HassettWeights::new(w, true).is_err());
    }

    #[test]
    fn koszul_game_one_ranks() {
        let exp = KoszulExpansion {
            n: 5,
            interior: 0b111,
            base: 0,
            m: 2,
        };
        let chk = koszul_class_check(&exp);
        assert!(chk.ok(), "{chk:?}");
        assert_eq!(chk.rank_sum, BigInt::zero());
    }

    #[test]
    fn koszul_with_base_and_negative_terms() {
        let exp = KoszulExpansion {
            n: 6,
            interior: 0b001110,
            base: 0b110000,
            m: 1,
        };
        assert!(koszul_class_check(&exp).ok());
    }

    #[test]
    fn empty_expansion() {
        let exp = KoszulExpansion {
            n: 4,
            interior: 0,
            base: 0b1,
            m: 3,
        };
        assert!(koszul_class_check(&exp).ok());
    }

    #[test]
    fn characters() {
        assert_eq!(Laurent::sl2_character(-1), Laurent::default());
        let mut neg = Laurent::sl2_character(1);
        neg.add_scaled(&Laurent::sl2_character(-3), 1);
        assert!(neg.is_zero());
    }
}
