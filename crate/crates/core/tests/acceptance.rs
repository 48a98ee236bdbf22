//! Acceptance gate. Prints one PASS/FAIL line per criterion with its timing
//! against a fixed budget, and exits nonzero if any criterion fails.

use excoll::bits;
use excoll::cohomology::PairLE;
use excoll::enumerate::{
    check_equivariance, enumerate, CollectionObject, ObjectTag, Space, Variant,
};
use excoll::equivariant::{decompose, orbits};
use excoll::fullness::{certify_all, check_certificate, GenerationCertificate};
use excoll::git::{window_feasible, GitProblem};
use excoll::ktheory::{clear_memo, koszul_class_check, rank_m0n, rank_mpq};
use excoll::score::verify_score_lemmas;
use excoll::verify::{verify_collection, Method, Status, Verifier};
use num_bigint::BigUint;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn space(p: usize, q: usize) -> Space {
    Space::new(p, q).expect("valid space")
}

/// Spaces with `p + q <= 8` and every variant the enumerator accepts.
fn implemented_small() -> Vec<(Space, Variant)> {
    let mut out = Vec::new();
    for n in 3..=8usize {
        for p in 3..=n {
            let Ok(s) = Space::new(p, n - p) else {
                continue;
            };
            let mut seen = BTreeSet::new();
            for v in ["1A+2B", "1B+2B", "1A+2A", "1B+2A"] {
                let v: Variant = v.parse().unwrap();
                if let Ok(c) = enumerate(s, v) {
                    if seen.insert(c.variant_name()) {
                        out.push((s, v));
                    }
                }
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let expected = [
        ((3, 0), 1),
        ((4, 0), 2),
        ((5, 0), 7),
        ((7, 0), 38),
        ((6, 0), 34),
    ];
    let mut got = Vec::new();
    for ((p, q), want) in expected {
        let c = match enumerate(space(p, q), Variant::default()) {
            Ok(c) => c,
            Err(e) => return fail(format!("({p},{q}): {e}")),
        };
        if c.len() != want {
            return fail(format!(
                "({p},{q}) has {} objects, expected {want}",
                c.len()
            ));
        }
        got.push(format!("M({p})={}", c.len()));
    }
    let c6 = enumerate(space(6, 0), Variant::default()).unwrap();
    let (b, f) = (c6.count(ObjectTag::BoundaryAB), c6.count(ObjectTag::Bundle));
    if (b, f) != (10, 24) {
        return fail(format!(
            "M(6): {b} boundary + {f} bundles, expected 10 + 24"
        ));
    }
    pass(format!(
        "{}; M(6) = {b} boundary + {f} bundles",
        got.join(" ")
    ))
}

fn criterion_2() -> Outcome {
    clear_memo();
    let tower: Vec<BigUint> = (3..=7).map(|n| rank_m0n(n).unwrap()).collect();
    let want: Vec<BigUint> = [1u32, 2, 7, 34, 213]
        .iter()
        .map(|&x| BigUint::from(x))
        .collect();
    if tower != want {
        return fail(format!("M(0,n) ranks {tower:?}"));
    }
    let spaces = implemented_small();
    for (s, v) in &spaces {
        let len = enumerate(*s, *v).unwrap().len();
        let rank = match rank_mpq(s.p, s.q) {
            Ok(r) => r,
            Err(e) => return fail(format!("{s}: {e}")),
        };
        if rank != BigUint::from(len) {
            return fail(format!("{s} {v}: rank {rank}, collection length {len}"));
        }
    }
    pass(format!(
        "M(0,n) n=3..7: 1 2 7 34 213; {} space/variant pairs with p+q<=8 concordant",
        spaces.len()
    ))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for (p, q, strong) in [
        (5, 0, true),
        (7, 0, true),
        (9, 0, true),
        (4, 1, false),
        (4, 3, false),
        (6, 1, false),
        (4, 0, false),
        (6, 0, false),
    ] {
        let r = match verify_collection(space(p, q), Variant::default()) {
            Ok(r) => r,
            Err(e) => return fail(format!("({p},{q}): {e}")),
        };
        let s = &r.summary;
        if !s.exceptional || !s.order_valid || s.skipped > 0 || (strong && !s.strong_bundle_part) {
            return fail(format!(
                "({p},{q}): exceptional={} skipped={} failed={} inapplicable={} strong={}",
                s.exceptional, s.skipped, s.failed, s.inapplicable, s.strong_bundle_part
            ));
        }
        notes.push(format!("({p},{q}):{}", s.required));
    }
    // All four torsion reductions are exercised; the required ones vanish.
    let v = Verifier::new(enumerate(space(4, 3), Variant::default()).unwrap()).unwrap();
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    for verdict in v.run().verdicts {
        let Some(m) = verdict.method else { continue };
        if matches!(
            m,
            Method::TorsionBundleToSheaf
                | Method::TorsionSheafToBundle
                | Method::TorsionSameLocus
                | Method::TorsionComplementaryLoci
        ) {
            if verdict.status != Status::Computed || (verdict.required && !verdict.ok) {
                return fail(format!(
                    "torsion pair {} -> {} not ok",
                    verdict.source_label, verdict.target_label
                ));
            }
            *used.entry(format!("{m:?}")).or_default() += 1;
        }
    }
    if used.len() != 4 {
        return fail(format!("torsion reductions exercised: {used:?}"));
    }
    pass(format!(
        "required pairs {}; torsion cases {:?}",
        notes.join(" "),
        used.values().collect::<Vec<_>>()
    ))
}

fn criterion_4() -> Outcome {
    match verify_score_lemmas(&[4, 6], &[1, 3, 5]) {
        Ok(r) if r.ok() => pass(format!(
            "{} checks over {} cases, 0 counterexamples",
            r.checks,
            r.cases.len()
        )),
        Ok(r) => fail(format!(
            "{} counterexamples, first {:?}",
            r.counterexamples.len(),
            r.counterexamples.first()
        )),
        Err(e) => fail(e.to_string()),
    }
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut moves = 0usize;
    let mut expansions = HashSet::new();
    for (p, q, lmax) in [(5, 0, 6), (7, 0, 6), (4, 3, 4)] {
        let (summary, certs) = match certify_all(space(p, q), Variant::default(), lmax) {
            Ok(x) => x,
            Err(e) => return fail(format!("({p},{q}): {e}")),
        };
        if !summary.ok() {
            return fail(format!(
                "({p},{q}): {} failures, first {:?}",
                summary.failures.len(),
                summary.failures.first()
            ));
        }
        let rechecked = certs.iter().filter(|c| check_certificate(c).ok).count();
        if rechecked != certs.len() || certs.len() != summary.roots {
            return fail(format!(
                "({p},{q}): {rechecked}/{} certificates re-validate",
                summary.roots
            ));
        }
        for cert in &certs {
            for node in &cert.nodes {
                if let Some(mv) = &node.game_move {
                    moves += 1;
                    let exp = mv.expansion(p + q);
                    if expansions.insert(exp) && !koszul_class_check(&exp).ok() {
                        return fail(format!(
                            "({p},{q}): class check fails at root {}",
                            cert.root
                        ));
                    }
                }
            }
        }
        notes.push(format!("({p},{q}) l<={lmax}: {} roots", summary.roots));
    }
    pass(format!(
        "{}; {moves} moves, {} distinct expansions class-checked",
        notes.join(", "),
        expansions.len()
    ))
}

fn criterion_6() -> Outcome {
    let mut count = 0;
    for (s, v) in implemented_small().into_iter().chain([
        (space(6, 2), Variant::default()),
        (space(6, 3), Variant::default()),
    ]) {
        let c = enumerate(s, v).unwrap();
        let d = match decompose(&c) {
            Ok(d) => d,
            Err(e) => return fail(format!("{s} {v}: {e}")),
        };
        if !d.dimension_matches() {
            return fail(format!(
                "{s} {v}: dimension {} vs {} objects",
                d.total_dimension, d.objects
            ));
        }
        if s.n() <= 8 && rank_mpq(s.p, s.q).ok() != Some(BigUint::from(d.total_dimension)) {
            return fail(format!(
                "{s} {v}: dimension {} differs from rank",
                d.total_dimension
            ));
        }
        count += 1;
    }
    let d5 = decompose(&enumerate(space(5, 0), Variant::default()).unwrap()).unwrap();
    let want: BTreeMap<String, u64> = [("5".to_string(), 3), ("4+1".to_string(), 1)].into();
    if d5.multiplicities != want {
        return fail(format!("M(5) decomposition {:?}", d5.multiplicities));
    }
    pass(format!(
        "{count} spaces nonnegative and integral; M(5) = 3[5] + 1[4+1]"
    ))
}

fn tamper_edge(cert: &GenerationCertificate, node: usize, edge: usize) -> GenerationCertificate {
    let mut bad = cert.clone();
    let child = bad.nodes[node].edges[edge].child;
    let mv = bad.nodes[node]
        .game_move
        .as_mut()
        .expect("edge implies move");
    let t = &mut mv.children[child];
    t.label = PairLE {
        l: t.label.l + 2,
        set: t.label.set,
    };
    bad
}

fn criterion_7() -> Outcome {
    // Window with an extra bundle.
    let mut c5 = enumerate(space(5, 0), Variant::default()).unwrap();
    c5.inject(CollectionObject::Bundle(PairLE::new(2, 0).unwrap()))
        .unwrap();
    let w = window_feasible(
        &c5.labels(ObjectTag::Bundle),
        &GitProblem::recipe(5, 0).unwrap(),
    );
    let k = w.witness.as_ref().map(|s| bits::card(s.set));
    if w.feasible || k != Some(3) {
        return fail(format!(
            "injected window: feasible={} witness size {k:?}",
            w.feasible
        ));
    }
    // Removing any member of a nontrivial orbit.
    let mut removals = 0;
    for (p, q) in [(5, 0), (7, 0), (4, 3), (6, 0)] {
        let c = enumerate(space(p, q), Variant::default()).unwrap();
        if orbits(&c).is_err() {
            return fail(format!("({p},{q}) is not invariant to begin with"));
        }
        let all = c.space.split().all();
        let gens = excoll::enumerate::generators(&c.space);
        let moved: Vec<usize> = (0..c.len())
            .filter(|&i| {
                gens.iter()
                    .any(|g| c.objects[i].permuted(g, all) != c.objects[i])
            })
            .collect();
        for i in moved {
            let mut d = c.clone();
            d.objects.remove(i);
            match check_equivariance(&d) {
                Some((a, b)) if a != b => removals += 1,
                other => {
                    return fail(format!(
                        "({p},{q}) removing {} not detected: {other:?}",
                        c.objects[i]
                    ))
                }
            }
        }
    }
    // Tampering any edge.
    let mut tampered = 0;
    for (p, q, lmax) in [(5, 0, 4), (4, 3, 2)] {
        let (_, certs) = certify_all(space(p, q), Variant::default(), lmax).unwrap();
        for cert in &certs {
            for (ni, node) in cert.nodes.iter().enumerate() {
                for ei in 0..node.edges.len() {
                    let chk = check_certificate(&tamper_edge(cert, ni, ei));
                    if chk.ok {
                        return fail(format!(
                            "({p},{q}) tampering root {} node {ni} edge {ei} not caught",
                            cert.root
                        ));
                    }
                    tampered += 1;
                }
            }
        }
    }
    pass(format!(
        "window witness k=3; {removals} single removals caught; {tampered} tampered edges caught"
    ))
}

fn criterion_8() -> Outcome {
    let tower: Vec<String> = (3..=7).map(|n| rank_m0n(n).unwrap().to_string()).collect();
    let ok = tower == ["1", "2", "7", "34", "213"];
    let detail = format!(
        "scope: object-level collections on M(0,n) are not built; evidence is the suites above plus the rank tower {}",
        tower.join(" ")
    );
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("collection counts", Duration::from_secs(1), criterion_1),
        (
            "rank-oracle concordance",
            Duration::from_secs(10),
            criterion_2,
        ),
        (
            "exceptionality sweeps",
            Duration::from_secs(300),
            criterion_3,
        ),
        (
            "score-lemma exhaustion",
            Duration::from_secs(60),
            criterion_4,
        ),
        (
            "fullness certificates",
            Duration::from_secs(120),
            criterion_5,
        ),
        (
            "permutation-module property",
            Duration::from_secs(30),
            criterion_6,
        ),
        ("negative controls", Duration::from_secs(120), criterion_7),
        ("full-scale caveat", Duration::from_secs(10), criterion_8),
    ];
    let mut all_ok = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= *budget;
        let ok = out.ok && in_time;
        all_ok &= ok;
        let timing = format!("{:.3}s of {}s", took.as_secs_f64(), budget.as_secs());
        let late = if in_time { "" } else { " [over budget]" };
        println!(
            "{} [{}] {name}: {} ({timing}){late}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
