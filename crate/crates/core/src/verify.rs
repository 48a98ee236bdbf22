//! Pairwise vanishing certificates for enumerated collections.
//!
//! Bundle pairs are computed on the quotient stack once a window (or the
//! strict weight test for the pair) shows the stack computation agrees with
//! the moduli space. Torsion sheaves supported on the loci `Z_R` are reduced
//! to invariant cohomology on a collapsed space twisted by a large multiple
//! of a line bundle that is trivial on the quotient. Boundary sheaves are
//! handled on the divisor itself.

use crate::bits::{self, Mask};
use crate::cohomology::{
    biprojective_cohomology, boundary_sheaf_rhom, invariant_cohomology, stack_rhom, PairLE,
};
use crate::enumerate::{enumerate, Collection, CollectionObject, Space, SpaceKind, Variant};
use crate::error::{Error, Result};
use crate::git::{
    devil_twist, pair_teleman_witness, teleman_symbolic, window_feasible, CollapsedSpace,
    GitProblem, Stratum,
};
use crate::sl2::GradedDims;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// How a pair was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Window on the pair, then invariant cohomology on the stack.
    WindowStack,
    /// Strict weight test for the pair's Hom bundle, then the stack.
    TelemanStack,
    /// Pullback bundle against a sheaf killed by the contraction.
    BlockOrthogonality,
    /// Bundle then torsion: restriction to the support.
    TorsionBundleToSheaf,
    /// Torsion then bundle: duality along the support.
    TorsionSheafToBundle,
    /// Two torsion sheaves on the same locus, via its Koszul resolution.
    TorsionSameLocus,
    /// Two torsion sheaves on complementary loci, via their intersection.
    TorsionComplementaryLoci,
    /// Two sheaves on the same boundary divisor.
    BoundaryKoszul,
    /// Supports do not meet.
    DisjointSupport,
}

/// Whether a verdict carries a computed result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Computed,
    /// The method's precondition failed; nothing is claimed.
    MethodInapplicable,
    /// Not verified by this tool.
    Skipped,
}

/// A computed `RHom` with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub method: Method,
    pub result: GradedDims,
    /// Raw shift removed from a duality isomorphism.
    pub shift: i32,
    /// Devil exponents at which the computation was repeated and agreed.
    pub devil_checks: Vec<i64>,
}

impl Evaluation {
    fn plain(method: Method, result: GradedDims) -> Self {
        Self {
            method,
            result,
            shift: 0,
            devil_checks: Vec::new(),
        }
    }
}

/// Verdict for `RHom(E_source, E_target)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub source: usize,
    pub target: usize,
    pub source_label: String,
    pub target_label: String,
    pub status: Status,
    pub method: Option<Method>,
    pub result: GradedDims,
    pub shift: i32,
    pub devil_checks: Vec<i64>,
    /// Whether the order requires this Hom (`source >= target`).
    pub required: bool,
    pub ok: bool,
    pub witness: Option<Vec<usize>>,
    pub note: Option<String>,
}

impl PairVerdict {
    fn computed(source: usize, target: usize, labels: (String, String), ev: Evaluation) -> Self {
        let ok = expected_ok(source, target, &ev.result);
        Self {
            source,
            target,
            source_label: labels.0,
            target_label: labels.1,
            status: Status::Computed,
            method: Some(ev.method),
            result: ev.result,
            shift: ev.shift,
            devil_checks: ev.devil_checks,
            required: source >= target,
            ok,
            witness: None,
            note: None,
        }
    }

    fn uncomputed(
        source: usize,
        target: usize,
        labels: (String, String),
        status: Status,
        note: String,
    ) -> Self {
        Self {
            source,
            target,
            source_label: labels.0,
            target_label: labels.1,
            status,
            method: None,
            result: GradedDims::zero(),
            shift: 0,
            devil_checks: Vec::new(),
            required: source >= target,
            ok: false,
            witness: None,
            note: Some(note),
        }
    }

    /// Required, computed, and wrong.
    pub fn is_failure(&self) -> bool {
        self.required && self.status == Status::Computed && !self.ok
    }
}

/// `source > target` needs zero in all degrees; `source = target` needs
/// `C` in degree 0. Forward pairs are informational.
pub fn expected_ok(source: usize, target: usize, result: &GradedDims) -> bool {
    use std::cmp::Ordering::*;
    match source.cmp(&target) {
        Greater => result.is_zero(),
        Equal => result.is_one_dimensional() && result.single_degree() == Some(0),
        Less => true,
    }
}

/// `RHom(F(from), F(to))` on the stack, refusing when neither the window
/// for the pair nor the strict weight test for its Hom bundle holds.
pub fn verify_bundle_pair(from: &PairLE, to: &PairLE, problem: &GitProblem) -> Result<Evaluation> {
    let n = problem.n();
    let window = window_feasible(&[*from, *to], problem);
    let method = if window.feasible {
        Method::WindowStack
    } else if let Some(st) = pair_teleman_witness(from, to, problem) {
        return Err(Error::WindowInapplicable {
            stratum: bits::indices(st.set),
        });
    } else {
        Method::TelemanStack
    };
    Ok(Evaluation::plain(method, stack_rhom(from, to, n)))
}

/// A torsion sheaf `T(l,E)` with `|E_p| = r`, supported on `Z_{E_p}`.
fn torsion_locus(x: &PairLE, space: &Space) -> Mask {
    x.set & space.split().heavy
}

/// Devil exponent used as the concrete check point: large enough that every
/// linear form with positive slope has passed its bound.
pub fn devil_n0(space: &Space, lmax: i64) -> i64 {
    4 * (space.r() + space.s().max(0) + space.q as i64 + lmax)
}

/// Invariant cohomology of `O(base + N·devil) ⊗ V_l` on `problem`, after the
/// strict weight test for large `N` and at `n0`; repeated at `n0`, `n0 + 1`
/// and `2·n0`, which must agree.
fn devil_invariants(
    problem: &GitProblem,
    base: &[i64],
    devil: &[i64],
    l: u32,
    n0: i64,
) -> Result<(GradedDims, Vec<i64>)> {
    let weights = devil_twist(problem, base, devil, l);
    let verdict = teleman_symbolic(&weights, n0);
    if !verdict.ok() {
        let st: Stratum = verdict.witness.expect("failing verdict has a witness");
        return Err(Error::WindowInapplicable {
            stratum: bits::indices(st.set),
        });
    }
    let at = |n: i64| {
        let exps: Vec<i64> = base.iter().zip(devil).map(|(b, d)| b + n * d).collect();
        invariant_cohomology(&exps, if l > 0 { std::slice::from_ref(&l) } else { &[] })
    };
    let checks = vec![n0, n0 + 1, 2 * n0];
    let first = at(n0);
    for &n in &checks[1..] {
        if at(n) != first {
            return Err(Error::Invalid(format!(
                "result depends on the devil exponent (N = {n0} vs {n})"
            )));
        }
    }
    Ok((first, checks))
}

fn indicator(set: Mask) -> impl Fn(usize) -> i64 {
    move |i| bits::contains(set, i) as i64
}

/// `RHom(F(l,E), T(l',E'))`, restricted to `Z_R` with `R = E'_p`.
pub fn torsion_bundle_to_sheaf(
    space: &Space,
    bundle: &PairLE,
    sheaf: &PairLE,
    n0: i64,
) -> Result<Evaluation> {
    let r = space.r();
    let locus = torsion_locus(sheaf, space);
    let z = GitProblem::collapsed(space.p, space.q, locus)?;
    let e_in_r = bits::card(bundle.set & locus) as i64;
    let (e, e2) = (bundle.set, sheaf.set);
    let base = z.exponents(r + sheaf.l - e_in_r, &|i| -indicator(e)(i), &|j| {
        indicator(e2)(j) - indicator(e)(j)
    });
    let (result, checks) = devil_invariants(&z.problem, &base, &z.devil(), bundle.l as u32, n0)?;
    Ok(Evaluation {
        method: Method::TorsionBundleToSheaf,
        result,
        shift: 0,
        devil_checks: checks,
    })
}

/// `RHom(T(l,E), F(l',E'))` with `R = E_p`, using the normal bundle twist
/// `O(2r - 2, 0, 0)`; the raw shift is the codimension `r - 1`.
pub fn torsion_sheaf_to_bundle(
    space: &Space,
    sheaf: &PairLE,
    bundle: &PairLE,
    n0: i64,
) -> Result<Evaluation> {
    let r = space.r();
    let locus = torsion_locus(sheaf, space);
    let z = GitProblem::collapsed(space.p, space.q, locus)?;
    let e2_in_r = bits::card(bundle.set & locus) as i64;
    let (e, e2) = (sheaf.set, bundle.set);
    let base = z.exponents(r - sheaf.l + e2_in_r - 2, &indicator(e2), &|j| {
        indicator(e2)(j) - indicator(e)(j)
    });
    let (result, checks) = devil_invariants(&z.problem, &base, &z.devil(), bundle.l as u32, n0)?;
    let shift = (r - 1) as i32;
    Ok(Evaluation {
        method: Method::TorsionSheafToBundle,
        result: result.shifted(-shift),
        shift,
        devil_checks: checks,
    })
}

/// `RHom(T(l,E), T(l',E'))` with `E_p = E'_p = R`: the Koszul terms
/// `O(2j - l + l', 0, E'_q - E_q)` with multiplicity `C(r-1, j)` in degree `j`.
pub fn torsion_same_locus(
    space: &Space,
    from: &PairLE,
    to: &PairLE,
    n0: i64,
) -> Result<Evaluation> {
    let r = space.r();
    let locus = torsion_locus(from, space);
    if torsion_locus(to, space) != locus {
        return Err(Error::NoCase("torsion sheaves on different loci".into()));
    }
    let z: CollapsedSpace = GitProblem::collapsed(space.p, space.q, locus)?;
    let (e, e2) = (from.set, to.set);
    let mut result = GradedDims::zero();
    let mut checks = Vec::new();
    for j in 0..r {
        let base = z.exponents(2 * j - from.l + to.l, &|_| 0, &|k| {
            indicator(e2)(k) - indicator(e)(k)
        });
        let (term, c) = devil_invariants(&z.problem, &base, &z.devil(), 0, n0)?;
        let mult = BigUint::from(bits::binomial((r - 1) as u64, j as u64));
        for (d, k) in term.shifted(-(j as i32)).iter() {
            result.add(d, k * &mult);
        }
        checks = c;
    }
    Ok(Evaluation {
        method: Method::TorsionSameLocus,
        result,
        shift: 0,
        devil_checks: checks,
    })
}

/// `RHom(T(l,E), T(l',E'))` with `E_p = R`, `E'_p = R'`, on the doubly
/// collapsed space: `O(-l - l' - 2, 0, E'_q - E_q)` twisted by `O(1, 1, 0)`.
pub fn torsion_complementary(
    space: &Space,
    from: &PairLE,
    to: &PairLE,
    n0: i64,
) -> Result<Evaluation> {
    let heavy = space.split().heavy;
    if torsion_locus(from, space) != heavy & !torsion_locus(to, space) {
        return Err(Error::NoCase("torsion loci are not complementary".into()));
    }
    let y = GitProblem::doubly_collapsed(space.p, space.q)?;
    let mut base = vec![-from.l - to.l - 2, 0];
    base.extend((space.p..space.n()).map(|j| indicator(to.set)(j) - indicator(from.set)(j)));
    let mut devil = vec![1, 1];
    devil.extend(std::iter::repeat_n(0, space.q));
    let (result, checks) = devil_invariants(&y, &base, &devil, 0, n0)?;
    let shift = (space.r() - 1) as i32;
    Ok(Evaluation {
        method: Method::TorsionComplementaryLoci,
        result: result.shifted(-shift),
        shift,
        devil_checks: checks,
    })
}

/// Dispatcher for two torsion sheaves: same locus, complementary loci, or
/// loci that cannot meet.
pub fn torsion_pair(space: &Space, from: &PairLE, to: &PairLE, n0: i64) -> Result<Evaluation> {
    let (a, b) = (torsion_locus(from, space), torsion_locus(to, space));
    if a == b {
        torsion_same_locus(space, from, to, n0)
    } else if a == space.split().heavy & !b {
        torsion_complementary(space, from, to, n0)
    } else {
        Ok(Evaluation::plain(
            Method::DisjointSupport,
            GradedDims::zero(),
        ))
    }
}

/// `RHom` between two boundary sheaves `O_δ(-a,-b)` on divisors of dimension
/// `2m`.
pub fn boundary_pair(m: i64, from: &CollectionObject, to: &CollectionObject) -> Result<Evaluation> {
    match (*from, *to) {
        (
            CollectionObject::BoundaryAB {
                side: s1,
                a: a1,
                b: b1,
            },
            CollectionObject::BoundaryAB {
                side: s2,
                a: a2,
                b: b2,
            },
        ) => {
            if s1 != s2 {
                return Ok(Evaluation::plain(
                    Method::DisjointSupport,
                    GradedDims::zero(),
                ));
            }
            Ok(Evaluation::plain(
                Method::BoundaryKoszul,
                boundary_sheaf_rhom(m as u32, a1, b1, a2, b2),
            ))
        }
        _ => Err(Error::NoCase("boundary pair expected".into())),
    }
}

/// `RHom(β^*G, O_δ(-a,-b)) = RHom(G, Rβ_* O_δ(-a,-b))`, which vanishes when
/// `RΓ(P^m × P^m, O(-a,-b)) = 0`. Returns the obstruction otherwise.
pub fn block_orthogonality(m: i64, boundary: &CollectionObject) -> Result<Evaluation> {
    match *boundary {
        CollectionObject::BoundaryAB { a, b, .. } => {
            let push = biprojective_cohomology(m as u32, -a, -b);
            if !push.is_zero() {
                return Err(Error::NoCase(format!(
                    "O(-{a},-{b}) has nonzero pushforward to a point"
                )));
            }
            Ok(Evaluation::plain(
                Method::BlockOrthogonality,
                GradedDims::zero(),
            ))
        }
        _ => Err(Error::NoCase("boundary sheaf expected".into())),
    }
}

/// Full verdict matrix and summary for one collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub space: String,
    pub variant: String,
    pub objects: Vec<String>,
    pub verdicts: Vec<PairVerdict>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub objects: usize,
    pub pairs: usize,
    pub required: usize,
    pub required_ok: usize,
    pub failed: usize,
    pub inapplicable: usize,
    pub skipped: usize,
    /// Every required pair was computed and vanishes; every diagonal is `C`.
    pub exceptional: bool,
    /// As `exceptional`, but skipped pairs are allowed.
    pub verified_part_exceptional: bool,
    /// Every computed bundle-to-bundle Hom is concentrated in degree 0.
    pub strong_bundle_part: bool,
    /// No computed backward Hom is nonzero.
    pub order_valid: bool,
}

/// Context shared by all pair evaluations of one collection.
pub struct Verifier {
    pub collection: Collection,
    pub problem: GitProblem,
    pub n0: i64,
    boundary_dim: i64,
}

impl Verifier {
    pub fn new(collection: Collection) -> Result<Self> {
        let space = collection.space;
        let problem = GitProblem::recipe(space.p, space.q)?;
        let lmax = collection
            .objects
            .iter()
            .filter_map(|o| o.label())
            .map(|x| x.l)
            .max()
            .unwrap_or(0);
        Ok(Self {
            n0: devil_n0(&space, lmax),
            boundary_dim: space.r() + space.s() - 1,
            collection,
            problem,
        })
    }

    /// `RHom(E_i, E_j)`.
    pub fn evaluate(&self, i: usize, j: usize) -> PairVerdict {
        use CollectionObject::*;
        let space = self.collection.space;
        let (x, y) = (&self.collection.objects[i], &self.collection.objects[j]);
        let labels = (x.to_string(), y.to_string());
        let outcome = match (x, y) {
            (Bundle(a), Bundle(b)) => verify_bundle_pair(a, b, &self.problem),
            (Bundle(a), TorsionZ(t)) => torsion_bundle_to_sheaf(&space, a, t, self.n0),
            (TorsionZ(t), Bundle(b)) => torsion_sheaf_to_bundle(&space, t, b, self.n0),
            (TorsionZ(t), TorsionZ(u)) => torsion_pair(&space, t, u, self.n0),
            (BoundaryAB { .. }, BoundaryAB { .. }) => boundary_pair(self.boundary_dim, x, y),
            (Bundle(_), BoundaryAB { .. }) => block_orthogonality(self.boundary_dim, y),
            (TildeTorsion(_), _) | (_, TildeTorsion(_)) => {
                return PairVerdict::uncomputed(
                    i,
                    j,
                    labels,
                    Status::Skipped,
                    "projected torsion complex".into(),
                )
            }
            _ => {
                return PairVerdict::uncomputed(
                    i,
                    j,
                    labels,
                    Status::Skipped,
                    "no method for this direction".into(),
                )
            }
        };
        match outcome {
            Ok(ev) => PairVerdict::computed(i, j, labels, ev),
            Err(Error::WindowInapplicable { stratum }) => {
                let mut v = PairVerdict::uncomputed(
                    i,
                    j,
                    labels,
                    Status::MethodInapplicable,
                    "weight test failed".into(),
                );
                v.witness = Some(stratum);
                v
            }
            Err(e) => {
                PairVerdict::uncomputed(i, j, labels, Status::MethodInapplicable, e.to_string())
            }
        }
    }

    /// All ordered pairs, in row-major order.
    pub fn run(&self) -> VerificationReport {
        let len = self.collection.len();
        let verdicts: Vec<PairVerdict> = (0..len * len)
            .into_par_iter()
            .map(|k| self.evaluate(k / len, k % len))
            .collect();
        let c = &self.collection;
        VerificationReport {
            space: c.space.to_string(),
            variant: c.variant_name(),
            objects: c.objects.iter().map(|o| o.to_string()).collect(),
            summary: summarize(c, &verdicts),
            verdicts,
        }
    }

    /// Only the pairs with `i >= j`.
    pub fn run_required(&self) -> Vec<PairVerdict> {
        let len = self.collection.len();
        let pairs: Vec<(usize, usize)> = (0..len)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .collect();
        pairs
            .into_par_iter()
            .map(|(i, j)| self.evaluate(i, j))
            .collect()
    }
}

fn summarize(c: &Collection, verdicts: &[PairVerdict]) -> Summary {
    let required: Vec<&PairVerdict> = verdicts.iter().filter(|v| v.required).collect();
    let failed = required.iter().filter(|v| v.is_failure()).count();
    let inapplicable = required
        .iter()
        .filter(|v| v.status == Status::MethodInapplicable)
        .count();
    let skipped = required
        .iter()
        .filter(|v| v.status == Status::Skipped)
        .count();
    let required_ok = required
        .iter()
        .filter(|v| v.status == Status::Computed && v.ok)
        .count();
    let strong_bundle_part = verdicts.iter().all(|v| {
        let bundles = matches!(c.objects[v.source], CollectionObject::Bundle(_))
            && matches!(c.objects[v.target], CollectionObject::Bundle(_));
        !bundles || v.status != Status::Computed || v.result.concentrated_in(0)
    });
    let order_valid = verdicts
        .iter()
        .filter(|v| v.source > v.target && v.status == Status::Computed)
        .all(|v| v.result.is_zero());
    Summary {
        objects: c.len(),
        pairs: verdicts.len(),
        required: required.len(),
        required_ok,
        failed,
        inapplicable,
        skipped,
        exceptional: failed == 0
            && inapplicable == 0
            && skipped == 0
            && required_ok == required.len(),
        verified_part_exceptional: failed == 0
            && inapplicable == 0
            && required_ok + skipped == required.len(),
        strong_bundle_part,
        order_valid,
    }
}

/// Verifies the collection of `space` with `variant`.
pub fn verify_collection(space: Space, variant: Variant) -> Result<VerificationReport> {
    Ok(Verifier::new(enumerate(space, variant)?)?.run())
}

/// Required verdicts that involve a torsion sheaf, for `p = 2r`, odd `q`.
pub fn verify_torsion_cases(p: usize, q: usize, variant: Variant) -> Result<Vec<PairVerdict>> {
    let space = Space::new(p, q)?;
    if space.kind() != SpaceKind::EvenHeavyOddLight {
        return Err(Error::UnsupportedSpace(space.to_string()));
    }
    let v = Verifier::new(enumerate(space, variant)?)?;
    let objs = &v.collection.objects;
    Ok(v.run_required()
        .into_iter()
        .filter(|x| {
            matches!(objs[x.source], CollectionObject::TorsionZ(_))
                || matches!(objs[x.target], CollectionObject::TorsionZ(_))
        })
        .collect())
}

/// Required verdicts among boundary sheaves, for even `p` and even `q`.
pub fn verify_boundary_part(p: usize, q: usize) -> Result<Vec<PairVerdict>> {
    let space = Space::new(p, q)?;
    if space.kind() != SpaceKind::EvenHeavyEvenLight {
        return Err(Error::UnsupportedSpace(space.to_string()));
    }
    let v = Verifier::new(enumerate(space, Variant::default())?)?;
    let objs = &v.collection.objects;
    let nb = objs
        .iter()
        .filter(|o| matches!(o, CollectionObject::BoundaryAB { .. }))
        .count();
    let pairs: Vec<(usize, usize)> = (0..nb).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    Ok(pairs
        .into_par_iter()
        .map(|(i, j)| v.evaluate(i, j))
        .collect())
}

fn dims_field(g: &GradedDims) -> String {
    let parts: Vec<String> = g.iter().map(|(d, k)| format!("{d}:{k}")).collect();
    parts.join(";")
}

fn method_name(m: Option<Method>) -> String {
    m.map(|m| {
        serde_json::to_value(m)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    })
    .unwrap_or_default()
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

impl VerificationReport {
    /// CSV header for [`VerificationReport::to_csv`].
    pub const CSV_HEADER: &'static str =
        "source,target,source_label,target_label,status,method,required,ok,result";

    /// One row per ordered pair. Labels are quoted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "{},{},\"{}\",\"{}\",{},{},{},{},{}",
                v.source,
                v.target,
                v.source_label,
                v.target_label,
                status_name(v.status),
                method_name(v.method),
                v.required,
                v.ok,
                dims_field(&v.result)
            );
        }
        out
    }
}
