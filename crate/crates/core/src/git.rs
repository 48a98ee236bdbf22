//! Kempf–Ness strata of weighted `(P1)^n` under PGL(2), window feasibility
//! for collections of bundles `F(l,E)`, and the strict weight test used to
//! identify cohomology on the stack with cohomology on the semistable part.
//!
//! Two opposite sign conventions for weights at the fixed point `z_K` are in
//! use. [`Convention::Dhl`] gives `O(a)` the weight `Σ_{K^c} a - Σ_K a`;
//! [`Convention::Teleman`] is its negative. Every [`WeightSet`] carries its
//! tag and the checks refuse the wrong one.

use crate::bits::{self, Mask};
use crate::cohomology::{MarkingSplit, PairLE};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use std::fmt;

/// Whether subsets of weight exactly one are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StabilityMode {
    /// No subset has weight exactly one; the quotient is a fine moduli space.
    Generic,
    /// Subsets of weight one are allowed and count as semistable. Only the
    /// unstable locus (weight strictly above one) is stratified.
    Semistable,
}

/// Role of a marking of an auxiliary space obtained by collapsing heavy
/// markings into one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AuxRole {
    /// The collapsed point of the first heavy half.
    First,
    /// The collapsed point of the second heavy half.
    Second,
    /// An uncollapsed heavy marking.
    Heavy,
    /// A light marking.
    Light,
}

/// Shape of an unstable stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StratumKind {
    /// A diagonal of an ordinary weighted problem.
    Diagonal,
    /// First collapsed point with light markings only.
    FirstWithLight,
    /// First collapsed point with at least one heavy marking.
    FirstWithHeavy,
    /// All heavy markings (without the collapsed point) with light markings.
    HeavyWithLight,
    /// Second collapsed point with light markings only.
    SecondWithLight,
    /// Both collapsed points together.
    BothCollapsed,
}

/// An unstable stratum: the diagonal where the markings of `set` coincide.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Stratum {
    #[serde(serialize_with = "ser_mask")]
    pub set: Mask,
    pub eta: i64,
    pub kind: StratumKind,
}

fn ser_mask<S: serde::Serializer>(m: &Mask, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize as _;
    bits::indices(*m).serialize(s)
}

/// The data `(p, q)` a problem was built from, when it comes from the
/// standard weight recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Recipe {
    pub p: usize,
    pub q: usize,
}

/// A weighted configuration problem on `(P1)^n`.
#[derive(Debug, Clone)]
pub struct GitProblem {
    pub split: MarkingSplit,
    pub weights: Vec<BigRational>,
    pub mode: StabilityMode,
    pub recipe: Option<Recipe>,
    pub roles: Option<Vec<AuxRole>>,
    int_weights: Vec<i128>,
    denom: i128,
    strata: Vec<Stratum>,
}

impl GitProblem {
    /// Validates `0 < a_i <= 1`, `Σ a_i = 2` and, in generic mode, that no
    /// subset has weight exactly one.
    pub fn new(
        split: MarkingSplit,
        weights: Vec<BigRational>,
        mode: StabilityMode,
    ) -> Result<Self> {
        if weights.len() != split.n {
            return Err(Error::Weights(format!(
                "{} weights for {} markings",
                weights.len(),
                split.n
            )));
        }
        if split.n > 24 {
            return Err(Error::Weights(format!(
                "too many markings for stratification: {}",
                split.n
            )));
        }
        let one = BigRational::one();
        for w in &weights {
            if !w.is_positive() || *w > one {
                return Err(Error::Weights(format!("weight {w} outside (0, 1]")));
            }
        }
        let total: BigRational = weights.iter().sum();
        if total != BigRational::from_integer(2.into()) {
            return Err(Error::Weights(format!("weights sum to {total}, not 2")));
        }
        let denom = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let int_weights: Option<Vec<i128>> = weights
            .iter()
            .map(|w| (w.numer() * (&denom / w.denom())).to_i128())
            .collect();
        let int_weights =
            int_weights.ok_or_else(|| Error::Weights("denominators too large".into()))?;
        let denom = denom
            .to_i128()
            .ok_or_else(|| Error::Weights("denominators too large".into()))?;
        let mut problem = Self {
            split,
            weights,
            mode,
            recipe: None,
            roles: None,
            int_weights,
            denom,
            strata: Vec::new(),
        };
        if mode == StabilityMode::Generic {
            if let Some(k) =
                bits::subsets(split.all()).find(|&k| problem.weight_numerator(k) == problem.denom)
            {
                return Err(Error::NonGeneric {
                    subset: bits::indices(k),
                });
            }
        }
        problem.strata = bits::subsets(split.all())
            .filter(|&k| problem.is_unstable_rational(k))
            .map(|k| Stratum {
                set: k,
                eta: 2 * (bits::card(k) as i64 - 1),
                kind: StratumKind::Diagonal,
            })
            .collect();
        Ok(problem)
    }

    /// The standard weights for `p` heavy and `q` light markings:
    /// `2/p` each for odd `p` and `q = 0`; otherwise heavy `2/p - ε` (odd `p`)
    /// or `1/r - ε` (`p = 2r`) and light `pε/q`, with `ε` half of its upper
    /// bound. When `p` and `q` are both even the weights are strictly
    /// semistable and the problem is built in [`StabilityMode::Semistable`].
    pub fn recipe(p: usize, q: usize) -> Result<Self> {
        let split = MarkingSplit::standard(p, q)?;
        let rat = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let (weights, mode) = if p % 2 == 1 {
            if p < 3 {
                return Err(Error::UnsupportedSpace(format!("p = {p}")));
            }
            let r = ((p - 1) / 2) as i64;
            if q == 0 {
                (vec![rat(2, p as i64); p], StabilityMode::Generic)
            } else {
                let eps = rat(1, 2 * (2 * r + 1) * (r + 1));
                let heavy = rat(2, p as i64) - &eps;
                let light = &eps * rat(p as i64, q as i64);
                let mut w = vec![heavy; p];
                w.extend(std::iter::repeat_n(light, q));
                (w, StabilityMode::Generic)
            }
        } else {
            if p < 4 {
                return Err(Error::UnsupportedSpace(format!("p = {p}")));
            }
            let r = (p / 2) as i64;
            let mode = if q.is_multiple_of(2) {
                StabilityMode::Semistable
            } else {
                StabilityMode::Generic
            };
            if q == 0 {
                (vec![rat(1, r); p], mode)
            } else {
                let eps = rat(1, 2 * r * (r + 1));
                let heavy = rat(1, r) - &eps;
                let light = &eps * rat(p as i64, q as i64);
                let mut w = vec![heavy; p];
                w.extend(std::iter::repeat_n(light, q));
                (w, mode)
            }
        };
        let mut problem = Self::new(split, weights, mode)?;
        problem.recipe = Some(Recipe { p, q });
        Ok(problem)
    }

    /// `n` markings of weight `2/n` each.
    pub fn symmetric(n: usize) -> Result<Self> {
        let split = MarkingSplit::standard(n, 0)?;
        let mode = if n.is_multiple_of(2) {
            StabilityMode::Semistable
        } else {
            StabilityMode::Generic
        };
        Self::new(
            split,
            vec![BigRational::new(2.into(), (n as i64).into()); n],
            mode,
        )
    }

    /// The space where the heavy markings of `half` (of size `r`, inside a
    /// recipe problem with `p = 2r` and odd `q`) have collapsed to a single
    /// point. Markings are ordered: collapsed point, remaining heavy markings
    /// in increasing order, then the light markings.
    pub fn collapsed(p: usize, q: usize, half: Mask) -> Result<CollapsedSpace> {
        let (r, eps) = Self::even_heavy_eps(p, q)?;
        if bits::card(half) as i64 != r || half & !bits::full(p) != 0 {
            return Err(Error::Invalid(format!(
                "{:?} is not half of the heavy markings",
                bits::indices(half)
            )));
        }
        let rat = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let light = &eps * rat(p as i64, q as i64);
        let mut weights = vec![BigRational::one() - &eps * rat(r, 1)];
        weights.extend(std::iter::repeat_n(rat(1, r) - &eps, r as usize));
        weights.extend(std::iter::repeat_n(light, q));
        let mut roles = vec![AuxRole::First];
        roles.extend(std::iter::repeat_n(AuxRole::Heavy, r as usize));
        roles.extend(std::iter::repeat_n(AuxRole::Light, q));
        let n = 1 + r as usize + q;
        let split = MarkingSplit::new(
            n,
            bits::full(1 + r as usize),
            bits::range(1 + r as usize, n),
        )?;
        let problem = Self::new(split, weights, StabilityMode::Generic)?.with_roles(roles);
        let other: Vec<usize> = bits::indices(bits::full(p) & !half);
        Ok(CollapsedSpace {
            problem,
            half,
            other_heavy: other,
            p,
            q,
        })
    }

    /// The space where both heavy halves have collapsed. Markings are ordered:
    /// first collapsed point, second collapsed point, light markings.
    pub fn doubly_collapsed(p: usize, q: usize) -> Result<GitProblem> {
        let (r, eps) = Self::even_heavy_eps(p, q)?;
        let rat = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let light = &eps * rat(p as i64, q as i64);
        let pt = BigRational::one() - &eps * rat(r, 1);
        let mut weights = vec![pt.clone(), pt];
        weights.extend(std::iter::repeat_n(light, q));
        let mut roles = vec![AuxRole::First, AuxRole::Second];
        roles.extend(std::iter::repeat_n(AuxRole::Light, q));
        let split = MarkingSplit::new(q + 2, 0b11, bits::range(2, q + 2))?;
        Ok(Self::new(split, weights, StabilityMode::Generic)?.with_roles(roles))
    }

    fn even_heavy_eps(p: usize, q: usize) -> Result<(i64, BigRational)> {
        if !p.is_multiple_of(2) || p < 4 || q % 2 != 1 {
            return Err(Error::UnsupportedSpace(format!(
                "collapsed spaces need even p >= 4 and odd q, got ({p}, {q})"
            )));
        }
        let r = (p / 2) as i64;
        Ok((r, BigRational::new(1.into(), (2 * r * (r + 1)).into())))
    }

    fn with_roles(mut self, roles: Vec<AuxRole>) -> Self {
        for st in &mut self.strata {
            st.kind = classify_kind(&roles, st.set);
        }
        self.roles = Some(roles);
        self
    }

    pub fn n(&self) -> usize {
        self.split.n
    }

    fn weight_numerator(&self, k: Mask) -> i128 {
        bits::indices(k)
            .into_iter()
            .map(|i| self.int_weights[i])
            .sum()
    }

    /// `Σ_{i∈K} a_i` exactly.
    pub fn subset_weight(&self, k: Mask) -> BigRational {
        bits::indices(k)
            .into_iter()
            .map(|i| self.weights[i].clone())
            .sum()
    }

    /// `Σ_{i∈K} a_i > 1`, in exact arithmetic.
    pub fn is_unstable_rational(&self, k: Mask) -> bool {
        self.weight_numerator(k) > self.denom
    }

    /// Closed-form instability test for recipe problems. `None` for other
    /// problems.
    pub fn is_unstable_combinatorial(&self, k: Mask) -> Option<bool> {
        let Recipe { p, q } = self.recipe?;
        let kp = bits::card(k & self.split.heavy) as usize;
        let kq = bits::card(k & self.split.light) as usize;
        Some(if p % 2 == 1 {
            kp >= p.div_ceil(2)
        } else {
            let r = p / 2;
            kp >= r + 1 || (kp == r && q > 0 && 2 * kq > q)
        })
    }

    /// All unstable strata, in increasing numeric order of the subset.
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }
}

fn classify_kind(roles: &[AuxRole], k: Mask) -> StratumKind {
    let has = |role: AuxRole| bits::indices(k).into_iter().any(|i| roles[i] == role);
    match (
        has(AuxRole::First),
        has(AuxRole::Second),
        has(AuxRole::Heavy),
    ) {
        (true, true, _) => StratumKind::BothCollapsed,
        (true, false, true) => StratumKind::FirstWithHeavy,
        (true, false, false) => StratumKind::FirstWithLight,
        (false, true, _) => StratumKind::SecondWithLight,
        (false, false, _) => StratumKind::HeavyWithLight,
    }
}

/// The space where one heavy half collapsed, with the index bookkeeping to
/// translate labels of the original markings.
#[derive(Debug, Clone)]
pub struct CollapsedSpace {
    pub problem: GitProblem,
    /// The collapsed heavy half, in original indices.
    pub half: Mask,
    /// Original indices of the remaining heavy markings, in order.
    pub other_heavy: Vec<usize>,
    pub p: usize,
    pub q: usize,
}

impl CollapsedSpace {
    /// Exponent vector `O(point, heavy subset, light exponents)` where the
    /// subsets are given in original indices.
    pub fn exponents(
        &self,
        point: i64,
        heavy: &dyn Fn(usize) -> i64,
        light: &dyn Fn(usize) -> i64,
    ) -> Vec<i64> {
        let mut v = vec![point];
        v.extend(self.other_heavy.iter().map(|&i| heavy(i)));
        v.extend((self.p..self.p + self.q).map(light));
        v
    }

    /// Indicator of the remaining heavy markings.
    pub fn devil(&self) -> Vec<i64> {
        let r = self.other_heavy.len() as i64;
        let mut v = vec![r];
        v.extend(std::iter::repeat_n(1, self.other_heavy.len()));
        v.extend(std::iter::repeat_n(0, self.q));
        v
    }
}

/// Weight convention at the fixed points `z_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Convention {
    Dhl,
    Teleman,
}

impl Convention {
    fn name(self) -> &'static str {
        match self {
            Convention::Dhl => "dhl",
            Convention::Teleman => "teleman",
        }
    }
}

/// Weight of `O(exps)` at `z_K` in the given convention.
pub fn line_bundle_weight(exps: &[i64], k: Mask, convention: Convention) -> i64 {
    let (inside, outside) = exps.iter().enumerate().fold((0, 0), |(a, b), (i, &x)| {
        if bits::contains(k, i) {
            (a + x, b)
        } else {
            (a, b + x)
        }
    });
    match convention {
        Convention::Dhl => outside - inside,
        Convention::Teleman => inside - outside,
    }
}

/// Weights of a restriction to `z_K`, by stratum, with a convention tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightSet {
    pub convention: Convention,
    pub per_stratum: Vec<(Stratum, Vec<i64>)>,
}

impl WeightSet {
    /// Joins weight lists that must all use `convention`.
    pub fn from_parts(
        convention: Convention,
        parts: Vec<(Convention, Stratum, Vec<i64>)>,
    ) -> Result<Self> {
        let mut per_stratum = Vec::with_capacity(parts.len());
        for (c, st, w) in parts {
            if c != convention {
                return Err(Error::Convention {
                    expected: convention.name(),
                    found: c.name(),
                });
            }
            per_stratum.push((st, w));
        }
        Ok(Self {
            convention,
            per_stratum,
        })
    }

    /// Weights of `O(exps) ⊗ V_l` on every stratum of `problem`.
    pub fn of_bundle(problem: &GitProblem, exps: &[i64], l: u32, convention: Convention) -> Self {
        let per_stratum = problem
            .strata()
            .iter()
            .map(|st| {
                let w = line_bundle_weight(exps, st.set, convention);
                (
                    st.clone(),
                    (0..=l as i64).map(|j| w + l as i64 - 2 * j).collect(),
                )
            })
            .collect();
        Self {
            convention,
            per_stratum,
        }
    }

    pub fn flipped(&self) -> Self {
        let convention = match self.convention {
            Convention::Dhl => Convention::Teleman,
            Convention::Teleman => Convention::Dhl,
        };
        let per_stratum = self
            .per_stratum
            .iter()
            .map(|(st, w)| (st.clone(), w.iter().map(|x| -x).collect()))
            .collect();
        Self {
            convention,
            per_stratum,
        }
    }
}

/// True iff every weight on every stratum is strictly greater than `-η`.
pub fn teleman_ok(weights: &WeightSet) -> Result<bool> {
    Ok(teleman_witness(weights)?.is_none())
}

/// The first stratum violating the strict bound, if any.
pub fn teleman_witness(weights: &WeightSet) -> Result<Option<Stratum>> {
    if weights.convention != Convention::Teleman {
        return Err(Error::Convention {
            expected: "teleman",
            found: weights.convention.name(),
        });
    }
    Ok(weights
        .per_stratum
        .iter()
        .find(|(st, w)| w.iter().any(|&x| x <= -st.eta))
        .map(|(st, _)| st.clone()))
}

/// Weights of `F(l,E)` at `z_K` in the DHL convention: `l + d, l - 2 + d, .., -l + d`
/// with `d = |E ∩ K^c| - |E ∩ K|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeightInterval {
    pub min: i64,
    pub max: i64,
}

pub fn fixed_point_weights(pair: &PairLE, k: Mask) -> WeightInterval {
    let d = bits::card(pair.set & !k) as i64 - bits::card(pair.set & k) as i64;
    WeightInterval {
        min: d - pair.l,
        max: d + pair.l,
    }
}

/// Admissible window offsets on one stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumWindow {
    pub stratum: Stratum,
    pub low: i64,
    pub high: i64,
}

impl StratumWindow {
    pub fn is_empty(&self) -> bool {
        self.low > self.high
    }
}

/// Result of a window computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub feasible: bool,
    pub windows: Vec<StratumWindow>,
    pub witness: Option<Stratum>,
}

/// For each stratum, the interval of `w_K` with every member's weights in
/// `[w_K, w_K + η)`.
pub fn window_feasible(collection: &[PairLE], problem: &GitProblem) -> WindowReport {
    let mut windows = Vec::with_capacity(problem.strata().len());
    let mut witness = None;
    for st in problem.strata() {
        let (mut top, mut bottom) = (i64::MIN, i64::MAX);
        for pair in collection {
            let w = fixed_point_weights(pair, st.set);
            top = top.max(w.max);
            bottom = bottom.min(w.min);
        }
        let win = StratumWindow {
            stratum: st.clone(),
            low: top.saturating_sub(st.eta - 1),
            high: bottom,
        };
        if win.is_empty() && witness.is_none() {
            witness = Some(st.clone());
        }
        windows.push(win);
    }
    WindowReport {
        feasible: witness.is_none(),
        windows,
        witness,
    }
}

/// The same condition pair by pair: `top(A, K) - bottom(B, K) < η_K` for all
/// members `A`, `B` and strata `K`. Returns the first failing `(A, B, K)`.
pub fn window_pairwise(
    collection: &[PairLE],
    problem: &GitProblem,
) -> Option<(PairLE, PairLE, Stratum)> {
    for st in problem.strata() {
        for a in collection {
            let top = fixed_point_weights(a, st.set).max;
            for b in collection {
                if top - fixed_point_weights(b, st.set).min >= st.eta {
                    return Some((*a, *b, st.clone()));
                }
            }
        }
    }
    None
}

/// The size-only form for problems whose strata are all subsets of size at
/// least `kmin` (equal weights): for each `k`,
/// `max_A min{l+e, l+2(n-k)-e} + max_B min{l+e, l+2k-e} < 2(k-1)`.
/// Returns the first failing `k`.
pub fn window_by_size(collection: &[PairLE], n: usize, kmin: usize) -> Option<usize> {
    if collection.is_empty() {
        return None;
    }
    let n = n as i64;
    (kmin..=n as usize).find(|&k| {
        let k = k as i64;
        let top = collection
            .iter()
            .map(|a| (a.l + a.e()).min(a.l + 2 * (n - k) - a.e()))
            .max()
            .unwrap();
        let bot = collection
            .iter()
            .map(|b| (b.l + b.e()).min(b.l + 2 * k - b.e()))
            .max()
            .unwrap();
        top + bot >= 2 * (k - 1)
    })
}

/// Whether `RΓ` of `F(from)^∨ ⊗ F(to)` on the stack equals its value on the
/// semistable part: on every stratum, `top(to) - bottom(from) < η`. Returns
/// the first failing stratum.
pub fn pair_teleman_witness(from: &PairLE, to: &PairLE, problem: &GitProblem) -> Option<Stratum> {
    problem
        .strata()
        .iter()
        .find(|st| {
            fixed_point_weights(to, st.set).max - fixed_point_weights(from, st.set).min >= st.eta
        })
        .cloned()
}

/// `c0 + c1 · N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LinearForm {
    pub c0: i64,
    pub c1: i64,
}

impl LinearForm {
    pub fn constant(c0: i64) -> Self {
        Self { c0, c1: 0 }
    }

    pub fn eval(&self, n: i64) -> i64 {
        self.c0 + self.c1 * n
    }

    /// `self > bound` for all sufficiently large `N`.
    pub fn eventually_greater(&self, bound: i64) -> bool {
        self.c1 > 0 || (self.c1 == 0 && self.c0 > bound)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}N", self.c0, self.c1)
    }
}

/// Lowest Teleman weight of `O(base + N·devil) ⊗ V_l` on one stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicStratumWeight {
    pub stratum: Stratum,
    pub lowest: LinearForm,
    pub devil_slope: i64,
}

/// Lowest weights of the twist by `N` copies of `devil`, per stratum.
pub fn devil_twist(
    problem: &GitProblem,
    base: &[i64],
    devil: &[i64],
    l: u32,
) -> Vec<SymbolicStratumWeight> {
    problem
        .strata()
        .iter()
        .map(|st| {
            let c0 = line_bundle_weight(base, st.set, Convention::Teleman) - l as i64;
            let c1 = line_bundle_weight(devil, st.set, Convention::Teleman);
            SymbolicStratumWeight {
                stratum: st.clone(),
                lowest: LinearForm { c0, c1 },
                devil_slope: c1,
            }
        })
        .collect()
}

/// Outcome of the strict weight test with a symbolic twist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicVerdict {
    pub asymptotic: bool,
    pub at_n0: bool,
    pub n0: i64,
    pub witness: Option<Stratum>,
}

impl SymbolicVerdict {
    pub fn ok(&self) -> bool {
        self.asymptotic && self.at_n0
    }
}

/// Strict test `lowest > -η` for large `N` and at the concrete `n0`.
pub fn teleman_symbolic(weights: &[SymbolicStratumWeight], n0: i64) -> SymbolicVerdict {
    let mut witness = None;
    let mut asymptotic = true;
    let mut at_n0 = true;
    for w in weights {
        let a = w.lowest.eventually_greater(-w.stratum.eta);
        let c = w.lowest.eval(n0) > -w.stratum.eta;
        if (!a || !c) && witness.is_none() {
            witness = Some(w.stratum.clone());
        }
        asymptotic &= a;
        at_n0 &= c;
    }
    SymbolicVerdict {
        asymptotic,
        at_n0,
        n0,
        witness,
    }
}

/// Checks that the closed-form and exact predicates agree on every subset.
pub fn predicates_agree(problem: &GitProblem) -> Option<Mask> {
    bits::subsets(problem.split.all()).find(|&k| {
        problem
            .is_unstable_combinatorial(k)
            .is_some_and(|c| c != problem.is_unstable_rational(k))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(l: i64, ix: &[usize]) -> PairLE {
        PairLE::from_indices(l, ix).unwrap()
    }

    #[test]
    fn empty_collection_fits_every_window() {
        let g = GitProblem::recipe(7, 0).unwrap();
        let r = window_feasible(&[], &g);
        assert!(r.feasible && r.witness.is_none());
    }

    #[test]
    fn strata_p5() {
        let g = GitProblem::recipe(5, 0).unwrap();
        let sizes: Vec<u32> = g.strata().iter().map(|s| bits::card(s.set)).collect();
        assert_eq!(sizes.len(), 10 + 5 + 1);
        assert!(sizes.iter().all(|&k| k >= 3));
        for s in g.strata() {
            assert_eq!(s.eta, 2 * (bits::card(s.set) as i64 - 1));
        }
    }

    #[test]
    fn strata_p4_q3() {
        let g = GitProblem::recipe(4, 3).unwrap();
        assert_eq!(predicates_agree(&g), None);
        assert!(g.is_unstable_rational(bits::from_indices(&[0, 1, 4, 5])));
        assert!(!g.is_unstable_rational(bits::from_indices(&[0, 1, 4])));
        assert!(g.is_unstable_rational(bits::from_indices(&[0, 1, 2])));
    }

    #[test]
    fn symmetric_three() {
        let g = GitProblem::symmetric(3).unwrap();
        assert_eq!(g.strata().len(), 4);
    }

    #[test]
    fn non_generic_rejected() {
        let split = MarkingSplit::standard(4, 0).unwrap();
        let w = vec![BigRational::new(1.into(), 2.into()); 4];
        assert!(matches!(
            GitProblem::new(split, w, StabilityMode::Generic),
            Err(Error::NonGeneric { .. })
        ));
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(
            fixed_point_weights(&pair(0, &[]), 0b111),
            WeightInterval { min: 0, max: 0 }
        );
        let w = fixed_point_weights(&pair(1, &[0]), 0b011);
        assert_eq!((w.min, w.max), (-2, 0));
    }

    #[test]
    fn window_p5_plus_extra() {
        let g = GitProblem::recipe(5, 0).unwrap();
        let mut coll = vec![pair(0, &[]), pair(1, &[0]), pair(0, &[0, 1])];
        assert!(window_feasible(&coll, &g).feasible);
        coll.push(pair(2, &[]));
        let rep = window_feasible(&coll, &g);
        assert!(!rep.feasible);
        assert_eq!(bits::card(rep.witness.unwrap().set), 3);
        assert_eq!(window_by_size(&coll, 5, 3), Some(3));
    }

    #[test]
    fn teleman_boundary() {
        let g = GitProblem::recipe(5, 0).unwrap();
        let zero = WeightSet::of_bundle(&g, &[0; 5], 0, Convention::Teleman);
        assert!(teleman_ok(&zero).unwrap());
        let st = g.strata()[0].clone();
        let eta = st.eta;
        let edge = WeightSet::from_parts(
            Convention::Teleman,
            vec![(Convention::Teleman, st, vec![-eta])],
        )
        .unwrap();
        assert!(!teleman_ok(&edge).unwrap());
        assert!(teleman_ok(&zero.flipped()).is_err());
    }

    #[test]
    fn mixed_conventions_rejected() {
        let g = GitProblem::recipe(5, 0).unwrap();
        let st = g.strata()[0].clone();
        let parts = vec![
            (Convention::Teleman, st.clone(), vec![0]),
            (Convention::Dhl, st, vec![0]),
        ];
        assert!(matches!(
            WeightSet::from_parts(Convention::Teleman, parts),
            Err(Error::Convention { .. })
        ));
    }

    #[test]
    fn collapsed_kinds_and_devil() {
        let z = GitProblem::collapsed(4, 3, 0b0011).unwrap();
        let devil = z.devil();
        for st in z.problem.strata() {
            let slope = line_bundle_weight(&devil, st.set, Convention::Teleman);
            let heavy_inside = bits::card(st.set & 0b110) as i64;
            match st.kind {
                StratumKind::FirstWithHeavy => assert_eq!(slope, 2 * heavy_inside),
                StratumKind::FirstWithLight | StratumKind::HeavyWithLight => assert_eq!(slope, 0),
                k => panic!("unexpected kind {k:?}"),
            }
        }
        let y = GitProblem::doubly_collapsed(4, 3).unwrap();
        for st in y.strata() {
            let slope = line_bundle_weight(&[1, 1, 0, 0, 0], st.set, Convention::Teleman);
            assert_eq!(
                slope,
                if st.kind == StratumKind::BothCollapsed {
                    2
                } else {
                    0
                }
            );
        }
    }

    #[test]
    fn linear_forms() {
        let f = LinearForm { c0: -10, c1: 1 };
        assert!(f.eventually_greater(-3));
        assert!(!LinearForm::constant(-3).eventually_greater(-3));
        assert_eq!(f.eval(4), -6);
    }
}
