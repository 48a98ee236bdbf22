//! Subset functions `f`, `α`, `m`, the scores `S` and `S'`, group membership
//! for even numbers of heavy markings, and exhaustive checks of the
//! inequalities that feed the window arguments.
//!
//! Half-integers are avoided throughout: functions with a `_doubled` suffix
//! return twice the value.

use crate::bits::{self, Mask};
use crate::cohomology::{MarkingSplit, PairLE};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// A subset of markings together with its heavy and light cardinalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitSubset {
    pub set: Mask,
    pub t_p: u32,
    pub t_q: u32,
}

impl SplitSubset {
    pub fn new(set: Mask, split: &MarkingSplit) -> Result<Self> {
        if set & !split.all() != 0 {
            return Err(Error::Invalid(format!(
                "subset {:?} leaves the marking set",
                bits::indices(set)
            )));
        }
        Ok(Self {
            set,
            t_p: bits::card(set & split.heavy),
            t_q: bits::card(set & split.light),
        })
    }

    pub fn complement(&self, split: &MarkingSplit) -> Self {
        Self::new(split.all() & !self.set, split).expect("complement stays inside the split")
    }
}

/// `2 f_{T,E,l} = 2|E ∩ T| - |E| + l`, defined for any parity.
#[inline]
pub fn f_doubled(t: Mask, set: Mask, l: i64) -> i64 {
    2 * bits::card(t & set) as i64 - bits::card(set) as i64 + l
}

/// `f_{T,E,l} = |E ∩ T| - (e - l)/2`.
pub fn f_value(t: Mask, pair: &PairLE) -> i64 {
    f_doubled(t, pair.set, pair.l) / 2
}

/// `max(0, -f)`.
pub fn alpha_value(t: Mask, pair: &PairLE) -> i64 {
    (-f_value(t, pair)).max(0)
}

/// `max(0, f)`.
pub fn m_value(t: Mask, pair: &PairLE) -> i64 {
    f_value(t, pair).max(0)
}

/// `l + min(e_p, p - e_p) + min(e_q, q - e_q)` over the split as given.
pub fn score_s(pair: &PairLE, split: &MarkingSplit) -> i64 {
    let (p, q) = (split.p() as i64, split.q() as i64);
    let (ep, eq) = (pair.e_p(split), pair.e_q(split));
    pair.l + ep.min(p - ep) + eq.min(q - eq)
}

/// The score over a split whose light set has one extra marking. Identical
/// in form to [`score_s`]; kept separate so call sites say which space they
/// mean.
pub fn score_s_prime(pair: &PairLE, extended: &MarkingSplit) -> i64 {
    score_s(pair, extended)
}

/// Which list of groups applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GroupFamily {
    /// Even heavy, odd light: groups 1A and 2 (1B after swapping).
    OddLight,
    /// Even heavy, even light: groups 1A, 1B, 2A, 2B.
    EvenLight,
}

/// Group membership flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct GroupFlags {
    pub g1a: bool,
    pub g1b: bool,
    pub g2: bool,
    pub g2a: bool,
    pub g2b: bool,
}

impl GroupFlags {
    pub fn any(&self) -> bool {
        self.g1a || self.g1b || self.g2 || self.g2a || self.g2b
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (flag, name) in [
            (self.g1a, "1A"),
            (self.g1b, "1B"),
            (self.g2, "2"),
            (self.g2a, "2A"),
            (self.g2b, "2B"),
        ] {
            if flag {
                v.push(name);
            }
        }
        v
    }
}

/// Half-sizes `(r, s)` for an even heavy count and the odd light count `q`.
/// `q` is the light count itself for [`GroupFamily::OddLight`] and one less
/// than it for [`GroupFamily::EvenLight`].
pub fn half_sizes(split: &MarkingSplit, family: GroupFamily) -> Result<(i64, i64, i64)> {
    let p = split.p() as i64;
    if p % 2 != 0 || p < 4 {
        return Err(Error::UnsupportedSpace(format!(
            "group tests need an even heavy count >= 4, got {p}"
        )));
    }
    let q = match family {
        GroupFamily::OddLight => split.q() as i64,
        GroupFamily::EvenLight => split.q() as i64 - 1,
    };
    if q.rem_euclid(2) != 1 && !(family == GroupFamily::EvenLight && q == -1) {
        return Err(Error::UnsupportedSpace(format!(
            "light count {} does not match {family:?}",
            split.q()
        )));
    }
    Ok((p / 2, (q - 1).div_euclid(2), q))
}

/// Evaluates each group inequality as printed.
pub fn classify_group(
    pair: &PairLE,
    split: &MarkingSplit,
    family: GroupFamily,
) -> Result<GroupFlags> {
    let (r, s, q) = half_sizes(split, family)?;
    let p = 2 * r;
    let (l, ep, eq) = (pair.l, pair.e_p(split), pair.e_q(split));
    let mut g = GroupFlags {
        g1a: l + ep.min(p + 1 - ep) <= r - 1,
        g1b: l + (ep + 1).min(p - ep) <= r - 1,
        ..Default::default()
    };
    match family {
        GroupFamily::OddLight => {
            g.g2 = ep == r && l + eq.min(q - eq) <= s - 1;
        }
        GroupFamily::EvenLight => {
            g.g2a = ep == r && l + (eq + 1).min(q + 1 - eq) <= s;
            g.g2b = ep == r && l + eq.min(q + 2 - eq) <= s;
        }
    }
    Ok(g)
}

/// Which inequality defines criticality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalMode {
    /// `|T_p| = r`, `|T_q| = s + 1`, bound `(r + s)/2`, on the even-light split.
    Extended,
    /// `|T_p| = r`, `|T_q| = s`, `T` avoids the given light marking, bound
    /// `(r + s - 1)/2`, on the odd-light split.
    Avoiding(usize),
}

/// All subsets `T` of the constrained family that reach the bound.
pub fn critical_subsets(
    pair: &PairLE,
    split: &MarkingSplit,
    mode: CriticalMode,
) -> Result<Vec<SplitSubset>> {
    let (family, avoid) = match mode {
        CriticalMode::Extended => (GroupFamily::EvenLight, 0),
        CriticalMode::Avoiding(y) => {
            if !bits::contains(split.light, y) {
                return Err(Error::Invalid(format!("marking {y} is not light")));
            }
            (GroupFamily::OddLight, 1u64 << y)
        }
    };
    let g = classify_group(pair, split, family)?;
    let inside = match family {
        GroupFamily::EvenLight => g.g1a || g.g1b || g.g2a || g.g2b,
        GroupFamily::OddLight => g.g1a || g.g1b || g.g2,
    };
    if !inside {
        return Err(Error::OutsideGroups(pair.to_string()));
    }
    let (r, s, _) = half_sizes(split, family)?;
    let (tq, bound) = match mode {
        CriticalMode::Extended => (s + 1, r + s),
        CriticalMode::Avoiding(_) => (s, r + s - 1),
    };
    Ok(constrained_family(split.heavy, split.light & !avoid, r, tq)
        .into_iter()
        .filter(|&t| f_doubled(t, pair.set, pair.l) == bound)
        .map(|t| SplitSubset::new(t, split).expect("subset of the split"))
        .collect())
}

/// Subsets with `tp` heavy markings from `heavy` and `tq` light ones from `light`.
pub fn constrained_family(heavy: Mask, light: Mask, tp: i64, tq: i64) -> Vec<Mask> {
    if tp < 0 || tq < 0 {
        return Vec::new();
    }
    let hs = bits::k_subsets(heavy, tp as usize);
    let ls = bits::k_subsets(light, tq as usize);
    hs.iter()
        .flat_map(|&h| ls.iter().map(move |&q| h | q))
        .collect()
}

/// A single failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub lemma: String,
    pub l: i64,
    #[serde(rename = "E")]
    pub set: Vec<usize>,
    pub subset: Vec<usize>,
    pub detail: String,
}

/// Outcome of an exhaustive sweep.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ScoreReport {
    pub cases: Vec<(usize, usize)>,
    pub checks: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl ScoreReport {
    pub fn ok(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

struct Sink {
    checks: u64,
    bad: Vec<Counterexample>,
}

impl Sink {
    fn new() -> Self {
        Self {
            checks: 0,
            bad: Vec::new(),
        }
    }

    fn check(
        &mut self,
        cond: bool,
        lemma: &str,
        l: i64,
        set: Mask,
        t: Mask,
        detail: impl FnOnce() -> String,
    ) {
        self.checks += 1;
        if !cond && self.bad.len() < 16 {
            self.bad.push(Counterexample {
                lemma: lemma.to_string(),
                l,
                set: bits::indices(set),
                subset: bits::indices(t),
                detail: detail(),
            });
        }
    }
}

#[inline]
fn sub_or_sup(a: Mask, b: Mask) -> bool {
    a & !b == 0 || b & !a == 0
}

/// Checks, for heavy count `p = 2r` and odd light count `q = 2s + 1`, every
/// score inequality and equality characterization over all labels with
/// `0 <= l <= 2(r + s) + 2` and all admissible subsets.
pub fn verify_score_lemmas_for(p: usize, q: usize) -> Result<ScoreReport> {
    if !p.is_multiple_of(2) || p < 4 || q % 2 != 1 || p + q + 1 > 16 {
        return Err(Error::Invalid(format!(
            "score sweep needs even p >= 4, odd q, p + q < 16; got ({p}, {q})"
        )));
    }
    let ext = MarkingSplit::standard(p, q + 1)?;
    let odd = MarkingSplit::standard(p, q)?;
    let r = (p / 2) as i64;
    let s = ((q - 1) / 2) as i64;
    let lmax = 2 * (r + s) + 2;

    let ext_sets: Vec<Mask> = bits::subsets(ext.all()).collect();
    let sinks: Vec<Sink> = ext_sets
        .par_iter()
        .map(|&set| {
            let mut sink = Sink::new();
            for l in 0..=lmax {
                check_extended(&mut sink, &ext, r, s, l, set);
                if set & !odd.all() == 0 {
                    check_odd(&mut sink, &odd, r, s, l, set);
                }
            }
            sink
        })
        .collect();

    let light_sinks: Vec<Sink> = bits::subsets(bits::full(q + 1))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&set| {
            let mut sink = Sink::new();
            for l in 0..=lmax {
                check_light_only(&mut sink, s, l, set);
            }
            sink
        })
        .collect();

    let mut report = ScoreReport {
        cases: vec![(p, q)],
        ..Default::default()
    };
    for sink in sinks.into_iter().chain(light_sinks) {
        report.checks += sink.checks;
        for c in sink.bad {
            if report.counterexamples.len() < 16 {
                report.counterexamples.push(c);
            }
        }
    }
    Ok(report)
}

/// Runs [`verify_score_lemmas_for`] over every combination and merges the reports.
pub fn verify_score_lemmas(ps: &[usize], qs: &[usize]) -> Result<ScoreReport> {
    let mut total = ScoreReport::default();
    for &p in ps {
        for &q in qs {
            let rep = verify_score_lemmas_for(p, q)?;
            total.cases.extend(rep.cases);
            total.checks += rep.checks;
            total.counterexamples.extend(rep.counterexamples);
        }
    }
    Ok(total)
}

fn check_extended(sink: &mut Sink, ext: &MarkingSplit, r: i64, s: i64, l: i64, set: Mask) {
    let e = bits::card(set) as i64;
    if (l + e) % 2 != 0 {
        return;
    }
    let pair = PairLE { l, set };
    let sp = score_s_prime(&pair, ext);
    let (ep_set, eq_set) = (set & ext.heavy, set & ext.light);
    let (ep, eq) = (bits::card(ep_set) as i64, bits::card(eq_set) as i64);
    let family = constrained_family(ext.heavy, ext.light, r, s + 1);

    // Maximum of f and of -f over the balanced family.
    let mut max_f = i64::MIN;
    let mut max_neg = i64::MIN;
    for &t in &family {
        let f2 = f_doubled(t, set, l);
        max_f = max_f.max(f2);
        max_neg = max_neg.max(-f2);
        let tc = ext.all() & !t;
        let first_eq = sub_or_sup(t & ext.heavy, ep_set) && sub_or_sup(t & ext.light, eq_set);
        sink.check((f2 == sp) == first_eq, "max f equality", l, set, t, || {
            format!("2f={f2}, S'={sp}")
        });
        let second_eq = sub_or_sup(tc & ext.heavy, ep_set) && sub_or_sup(tc & ext.light, eq_set);
        sink.check(
            (-f2 == sp - 2 * l) == second_eq,
            "max -f equality",
            l,
            set,
            t,
            || format!("-2f={}, S'-2l={}", -f2, sp - 2 * l),
        );
    }
    sink.check(max_f == sp, "max f", l, set, 0, || {
        format!("max 2f={max_f}, S'={sp}")
    });
    sink.check(max_neg == sp - 2 * l, "max -f", l, set, 0, || {
        format!("max -2f={max_neg}, S'-2l={}", sp - 2 * l)
    });

    let g = classify_group(&pair, ext, GroupFamily::EvenLight).expect("even split");
    let q = 2 * s + 1;
    if g.g1a || g.g1b || g.g2a || g.g2b {
        let even = (r + s) % 2 == 0;
        for &t in &family {
            let f2 = f_doubled(t, set, l);
            sink.check(f2 <= r + s, "balanced bound", l, set, t, || {
                format!("2f={f2} > r+s={}", r + s)
            });
            let (tp, tq) = (t & ext.heavy, t & ext.light);
            let row = (g.g1a
                && l + ep == r - 1
                && eq == s + 1
                && ep_set & !tp == 0
                && eq_set == tq)
                || (g.g2a && ep == r && l + q + 1 - eq == s && ep_set == tp && tq & !eq_set == 0)
                || (g.g1b
                    && l + (2 * r - ep) == r - 1
                    && eq == s + 1
                    && tp & !ep_set == 0
                    && eq_set == tq)
                || (g.g2b && ep == r && l + eq == s && ep_set == tp && eq_set & !tq == 0);
            let critical = f2 == r + s;
            sink.check(
                critical == (even && row),
                "critical table",
                l,
                set,
                t,
                || format!("critical={critical}, table={row}, r+s even={even}"),
            );
            let fc = f_doubled(ext.all() & !t, set, l);
            sink.check(fc >= -(r + s), "complement bound", l, set, t, || {
                format!("2f(T^c)={fc}")
            });
            sink.check(
                (fc == -(r + s)) == (even && l == 0 && critical),
                "complement equality",
                l,
                set,
                t,
                || format!("2f(T^c)={fc}, critical={critical}"),
            );
        }
    }
    if g.g2a || g.g2b {
        for i in bits::k_subsets(ext.light, (s + 1) as usize) {
            let fi = f_doubled(i, eq_set, l);
            sink.check(fi <= s, "light bound", l, set, i, || {
                format!("2f={fi} > s={s}")
            });
            let eqc = (eq == l + s + 2 && i & !eq_set == 0) || (l + eq == s && eq_set & !i == 0);
            sink.check((fi == s) == eqc, "light equality", l, set, i, || {
                format!("2f={fi}, listed={eqc}")
            });
            let fic = f_doubled(ext.light & !i, eq_set, l);
            sink.check(fic >= -s, "light complement bound", l, set, i, || {
                format!("2f={fic}")
            });
        }
    }
    if g.g1a || g.g1b {
        check_heavy_halves(sink, ext.heavy, r, l, ep_set);
    }
}

fn check_odd(sink: &mut Sink, odd: &MarkingSplit, r: i64, s: i64, l: i64, set: Mask) {
    let e = bits::card(set) as i64;
    if (l + e) % 2 != 0 {
        return;
    }
    let pair = PairLE { l, set };
    let g = classify_group(&pair, odd, GroupFamily::OddLight).expect("odd split");
    if !(g.g1a || g.g1b || g.g2) {
        return;
    }
    let (ep_set, eq_set) = (set & odd.heavy, set & odd.light);
    let (ep, eq) = (bits::card(ep_set) as i64, bits::card(eq_set) as i64);
    let odd_sum = (r + s) % 2 == 1;
    for y in bits::indices(odd.light) {
        let y_in = bits::contains(set, y);
        for t in constrained_family(odd.heavy, odd.light & !(1 << y), r, s) {
            let f2 = f_doubled(t, set, l);
            sink.check(f2 <= r + s - 1, "avoiding bound", l, set, t, || {
                format!("2f={f2}, y={y}")
            });
            let (tp, tq) = (t & odd.heavy, t & odd.light);
            let row = (g.g1a && l + ep == r - 1 && eq == s && ep_set & !tp == 0 && eq_set == tq)
                || (g.g1b
                    && l + (2 * r - ep) == r - 1
                    && eq == s
                    && tp & !ep_set == 0
                    && eq_set == tq)
                || (g.g2 && ep == r && l + eq == s - 1 && ep_set == tp && eq_set & !tq == 0);
            let critical = f2 == r + s - 1;
            sink.check(
                critical == (odd_sum && !y_in && row),
                "avoiding table",
                l,
                set,
                t,
                || format!("critical={critical}, table={row}, y={y}"),
            );
            let m2 = f2.max(0);
            sink.check(
                m2 <= r + s - 2 * y_in as i64,
                "avoiding m bound",
                l,
                set,
                t,
                || format!("2m={m2}, y={y}"),
            );
        }
    }
    if g.g1a || g.g1b {
        check_heavy_halves(sink, odd.heavy, r, l, ep_set);
    }
}

fn check_heavy_halves(sink: &mut Sink, heavy: Mask, r: i64, l: i64, ep_set: Mask) {
    for half in bits::k_subsets(heavy, r as usize) {
        let f2 = f_doubled(half, ep_set, l);
        sink.check(f2 <= r - 1, "heavy half bound", l, ep_set, half, || {
            format!("2f={f2} > r-1={}", r - 1)
        });
    }
}

/// Inequalities for sets of light markings alone, at light counts `2s + 1`
/// and `2s + 2`, with the light markings indexed from 0.
fn check_light_only(sink: &mut Sink, s: i64, l: i64, set: Mask) {
    for (qsize, lemma) in [(2 * s + 1, 0), (2 * s + 2, 1)] {
        let qmask = bits::full(qsize as usize);
        if set & !qmask != 0 {
            continue;
        }
        let e = bits::card(set) as i64;
        let q = qsize;
        for i in bits::subsets(qmask) {
            let ic = qmask & !i;
            let lhs = l + bits::card(set & ic) as i64 - bits::card(set & i) as i64;
            let ic_n = bits::card(ic) as i64;
            if lemma == 0 {
                if l + e.min(q - e) <= s - 1 {
                    let rhs = if e <= s { s - 1 } else { 2 * ic_n - s - 2 };
                    sink.check(lhs <= rhs, "odd light sets", l, set, i, || {
                        format!("{lhs} > {rhs}")
                    });
                }
            } else {
                if l + (e + 1).min(q + 1 - e) <= s {
                    let rhs = if e <= s { s - 1 } else { 2 * ic_n - s - 2 };
                    sink.check(lhs <= rhs, "even light sets, first", l, set, i, || {
                        format!("{lhs} > {rhs}")
                    });
                }
                if l + e.min(q + 2 - e) <= s {
                    let rhs = if e <= s + 1 { s } else { 2 * ic_n - s - 3 };
                    sink.check(lhs <= rhs, "even light sets, second", l, set, i, || {
                        format!("{lhs} > {rhs}")
                    });
                }
            }
        }
    }
}
