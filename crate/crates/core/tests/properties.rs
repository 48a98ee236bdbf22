//! Property tests: randomized where the domain is large, exhaustive where it
//! is small.

use excoll::bits::{self, Mask};
use excoll::cohomology::{invariant_cohomology, p1_cohomology, stack_rhom, MarkingSplit, PairLE};
use excoll::enumerate::{enumerate, generators, CollectionObject, Space, Variant};
use excoll::equivariant::decompose;
use excoll::fullness::{check_certificate, Replayer};
use excoll::git::{
    fixed_point_weights, window_by_size, window_feasible, window_pairwise, GitProblem, StratumKind,
};
use excoll::ktheory::{mpq_weights, rank_hassett, HassettWeights};
use excoll::score::{classify_group, f_value, GroupFamily};
use excoll::sl2::{clebsch_gordan, invariant_multiplicity, tensor, IrrepSum};
use excoll::verify::Verifier;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use std::collections::{BTreeMap, HashMap};

fn label(n: usize) -> impl Strategy<Value = PairLE> {
    (0i64..8, 0..(1u64 << n)).prop_map(|(l, set)| {
        let l = if (l + bits::card(set) as i64) % 2 == 0 {
            l
        } else {
            l + 1
        };
        PairLE::new(l, set).unwrap()
    })
}

fn irrep_sum() -> impl Strategy<Value = IrrepSum> {
    prop::collection::vec((0u32..12, 1u64..4), 0..5).prop_map(IrrepSum::from_pairs)
}

/// Irreducible decomposition of a weight multiset by peeling highest weights.
fn from_weights(mut w: BTreeMap<i64, BigUint>) -> IrrepSum {
    let mut out = IrrepSum::zero();
    while let Some((&top, k)) = w.iter().next_back() {
        let k = k.clone();
        out.add_irrep(top as u32, k.clone());
        for x in (-top..=top).step_by(2) {
            let e = w.get_mut(&x).expect("weight present");
            *e -= &k;
            if e.is_zero() {
                w.remove(&x);
            }
        }
    }
    out
}

fn convolve(a: &BTreeMap<i64, BigUint>, b: &BTreeMap<i64, BigUint>) -> BTreeMap<i64, BigUint> {
    let mut out: BTreeMap<i64, BigUint> = BTreeMap::new();
    for (x, m) in a {
        for (y, k) in b {
            *out.entry(x + y).or_default() += m * k;
        }
    }
    out
}

#[test]
fn clebsch_gordan_dimension_and_symmetry() {
    for l in 0..=30u32 {
        for l2 in 0..=30u32 {
            let cg = clebsch_gordan(l, l2);
            assert_eq!(cg.dimension(), BigUint::from((l + 1) * (l2 + 1)));
            assert_eq!(cg, clebsch_gordan(l2, l));
        }
    }
}

#[test]
fn clebsch_gordan_matches_weight_convolution() {
    for l in 0..=12u32 {
        for l2 in 0..=12u32 {
            let w = convolve(
                &IrrepSum::irrep(l).weights(),
                &IrrepSum::irrep(l2).weights(),
            );
            assert_eq!(from_weights(w), clebsch_gordan(l, l2), "({l}, {l2})");
        }
    }
}

proptest! {
    #[test]
    fn schur_orthogonality(a in 0u32..40, b in 0u32..40) {
        let inv = invariant_multiplicity(&tensor(&IrrepSum::irrep(a), &IrrepSum::irrep(b)));
        prop_assert_eq!(inv, BigUint::from((a == b) as u32));
    }

    #[test]
    fn tensor_dimension_is_multiplicative(x in irrep_sum(), y in irrep_sum()) {
        prop_assert_eq!(tensor(&x, &y).dimension(), x.dimension() * y.dimension());
        prop_assert_eq!(tensor(&x, &y), tensor(&y, &x));
    }

    #[test]
    fn f_complement_sums_to_l(pair in label(10), t in 0u64..(1 << 10)) {
        let comp = bits::full(10) & !t;
        prop_assert_eq!(f_value(t, &pair) + f_value(comp, &pair), pair.l);
        prop_assert!(f_value(t, &pair) >= 0 || f_value(comp, &pair) >= 0);
    }

    #[test]
    fn window_feasibility_is_monotone(picks in prop::collection::vec(label(7), 1..8), drop in 0usize..8) {
        let problem = GitProblem::recipe(7, 0).unwrap();
        if window_feasible(&picks, &problem).feasible {
            let mut fewer = picks.clone();
            fewer.remove(drop % picks.len());
            prop_assert!(window_feasible(&fewer, &problem).feasible);
        }
    }

    #[test]
    fn rank_is_invariant_under_relabeling(seed in any::<u64>()) {
        let w = mpq_weights(4, 3).unwrap();
        let mut perm: Vec<usize> = (0..w.n()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted = HassettWeights::new(perm.iter().map(|&i| w.weights[i].clone()).collect(), true).unwrap();
        prop_assert_eq!(rank_hassett(&permuted).unwrap(), rank_hassett(&w).unwrap());
    }

    #[test]
    fn certificates_check_for_random_roots(pair in label(7)) {
        let rp = Replayer::new(Space::new(7, 0).unwrap(), Variant::default()).unwrap();
        let cert = rp.certify(&pair).unwrap();
        let chk = check_certificate(&cert);
        prop_assert!(chk.ok, "{:?}", chk);
    }
}

#[test]
fn p1_euler_characteristic() {
    for a in -6i64..=6 {
        assert_eq!(
            p1_cohomology(a).euler_dimension(),
            BigInt::from(a + 1),
            "a = {a}"
        );
    }
}

#[test]
fn same_size_blocks_are_orthogonal_and_diagonals_are_one() {
    for n in 1..=6usize {
        let sets: Vec<Mask> = bits::subsets(bits::full(n)).collect();
        for &e in &sets {
            for &e2 in &sets {
                if e == e2 || bits::card(e) != bits::card(e2) {
                    continue;
                }
                for l in 0..=4 {
                    for l2 in 0..=4 {
                        let (Ok(x), Ok(y)) = (PairLE::new(l, e), PairLE::new(l2, e2)) else {
                            continue;
                        };
                        assert!(stack_rhom(&x, &y, n).is_zero(), "n={n} {x} {y}");
                    }
                }
            }
            for l in 0..=4 {
                if let Ok(x) = PairLE::new(l, e) {
                    let d = stack_rhom(&x, &x, n);
                    assert!(d.is_one_dimensional() && d.concentrated_in(0), "n={n} {x}");
                }
            }
        }
    }
}

/// `F(l,E) ⊗ F(l2,E')` for disjoint `E, E'` pairs like `⊕_j F(j, E ∪ E')`.
#[test]
fn tensor_of_labels_splits() {
    let n = 5;
    let tests: Vec<PairLE> = (0..=3)
        .flat_map(|l| bits::subsets(bits::full(n)).filter_map(move |s| PairLE::new(l, s).ok()))
        .collect();
    for e in bits::subsets(bits::full(n)) {
        for e2 in bits::subsets(bits::full(n) & !e) {
            for l in 0..=3u32 {
                for l2 in 0..=3u32 {
                    let (Ok(_), Ok(_)) = (PairLE::new(l as i64, e), PairLE::new(l2 as i64, e2))
                    else {
                        continue;
                    };
                    let union = e | e2;
                    assert_eq!(
                        clebsch_gordan(l, l2).dimension(),
                        BigUint::from((l + 1) * (l2 + 1))
                    );
                    for g in tests.iter().step_by(7) {
                        let exps: Vec<i64> = (0..n)
                            .map(|i| {
                                bits::contains(union, i) as i64 - bits::contains(g.set, i) as i64
                            })
                            .collect();
                        let lhs = invariant_cohomology(&exps, &[g.l as u32, l, l2]);
                        let mut rhs = excoll::sl2::GradedDims::zero();
                        for j in (l.abs_diff(l2)..=l + l2).step_by(2) {
                            rhs.add_all(&stack_rhom(g, &PairLE::new(j as i64, union).unwrap(), n));
                        }
                        assert_eq!(lhs, rhs, "{g} against ({l},{e:b})x({l2},{e2:b})");
                    }
                }
            }
        }
    }
}

#[test]
fn group_flags_swap_under_complement() {
    for (p, q, family) in [
        (4, 1, GroupFamily::OddLight),
        (6, 3, GroupFamily::OddLight),
        (4, 2, GroupFamily::EvenLight),
        (6, 4, GroupFamily::EvenLight),
    ] {
        let split = MarkingSplit::standard(p, q).unwrap();
        let n = p + q;
        for set in bits::subsets(bits::full(n)) {
            for l in 0..=6 {
                let Ok(x) = PairLE::new(l, set) else { continue };
                let a = classify_group(&x, &split, family).unwrap();
                // Odd light counts: the symmetry acts on the heavy markings only.
                let mirror = match family {
                    GroupFamily::EvenLight => x.complement(n).unwrap(),
                    GroupFamily::OddLight => PairLE::new(l, set ^ split.heavy).unwrap(),
                };
                let b = classify_group(&mirror, &split, family).unwrap();
                assert_eq!(a.g1a, b.g1b, "({p},{q}) {x}");
                assert_eq!(a.g2a, b.g2b, "({p},{q}) {x}");
                assert_eq!(a.g2, b.g2, "({p},{q}) {x}");
            }
        }
    }
}

fn recipe_spaces(max_n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 3..=max_n {
        for q in 0..=max_n - p {
            if Space::new(p, q).is_ok() && GitProblem::recipe(p, q).is_ok() {
                out.push((p, q));
            }
        }
    }
    out
}

#[test]
fn stability_predicates_agree() {
    for (p, q) in recipe_spaces(12) {
        let problem = GitProblem::recipe(p, q).unwrap();
        for k in bits::subsets(bits::full(p + q)) {
            assert_eq!(
                problem.is_unstable_combinatorial(k),
                Some(problem.is_unstable_rational(k)),
                "({p},{q}) {k:b}"
            );
        }
    }
}

#[test]
fn game_stability_agrees_with_git() {
    for (p, q) in [(5, 0), (7, 0), (4, 1), (4, 3), (6, 1)] {
        let rp = Replayer::new(Space::new(p, q).unwrap(), Variant::default()).unwrap();
        let problem = GitProblem::recipe(p, q).unwrap();
        for k in bits::subsets(bits::full(p + q)) {
            assert_eq!(
                rp.is_unstable(k),
                problem.is_unstable_rational(k),
                "({p},{q}) {k:b}"
            );
        }
    }
}

#[test]
fn eta_positive_and_monotone_on_diagonals() {
    for (p, q) in recipe_spaces(10) {
        let problem = GitProblem::recipe(p, q).unwrap();
        let mut by_size: BTreeMap<u32, Vec<i64>> = BTreeMap::new();
        for st in problem.strata() {
            assert!(st.eta > 0);
            if st.kind == StratumKind::Diagonal {
                by_size.entry(bits::card(st.set)).or_default().push(st.eta);
            }
        }
        let mut prev = i64::MIN;
        for etas in by_size.values() {
            assert!(etas.iter().all(|&e| e > prev), "({p},{q})");
            prev = *etas.iter().max().unwrap();
        }
    }
}

#[test]
fn window_forms_agree() {
    for p in [3usize, 5, 7, 9] {
        let problem = GitProblem::recipe(p, 0).unwrap();
        let r = (p - 1) / 2;
        let mut state = 0x9e3779b97f4a7c15u64;
        let labels: Vec<PairLE> = (0..=3)
            .flat_map(|l| bits::subsets(bits::full(p)).filter_map(move |s| PairLE::new(l, s).ok()))
            .collect();
        for trial in 0..200 {
            let mut picks = Vec::new();
            for _ in 0..(1 + trial % 6) {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                picks.push(labels[(state % labels.len() as u64) as usize]);
            }
            let interval = window_feasible(&picks, &problem).feasible;
            assert_eq!(
                interval,
                window_pairwise(&picks, &problem).is_none(),
                "p={p} {picks:?}"
            );
            // The size-only form bounds each side over all strata of a size
            // separately, so it is sufficient but not necessary.
            if window_by_size(&picks, p, r + 1).is_none() {
                assert!(interval, "p={p} {picks:?}");
            }
        }
        let members = enumerate(Space::new(p, 0).unwrap(), Variant::default())
            .unwrap()
            .labels(excoll::enumerate::ObjectTag::Bundle);
        assert!(window_feasible(&members, &problem).feasible);
        assert!(window_pairwise(&members, &problem).is_none());
        assert!(window_by_size(&members, p, r + 1).is_none());
    }
}

#[test]
fn extreme_weights_over_strata_of_one_size() {
    for n in 3..=8usize {
        for set in bits::subsets(bits::full(n)) {
            for l in 0..=4 {
                let Ok(x) = PairLE::new(l, set) else { continue };
                let e = x.e();
                for k in 0..=n {
                    let ks = bits::k_subsets(bits::full(n), k);
                    let lo = ks
                        .iter()
                        .map(|&s| fixed_point_weights(&x, s).min)
                        .min()
                        .unwrap();
                    let hi = ks
                        .iter()
                        .map(|&s| fixed_point_weights(&x, s).max)
                        .max()
                        .unwrap();
                    let k = k as i64;
                    assert_eq!(lo, -(l + e).min(l + 2 * k - e), "{x} k={k}");
                    assert_eq!(hi, (l + e).min(l + 2 * (n as i64) - 2 * k - e), "{x} k={k}");
                }
            }
        }
    }
}

fn implemented() -> Vec<(Space, Variant)> {
    let mut out = Vec::new();
    for (p, q) in [
        (3, 0),
        (4, 0),
        (5, 0),
        (6, 0),
        (7, 0),
        (8, 0),
        (4, 1),
        (4, 2),
        (4, 3),
        (4, 4),
        (5, 1),
        (5, 2),
        (5, 3),
        (6, 1),
        (6, 2),
        (7, 1),
    ] {
        for v in ["1A", "1B", "1A+2A", "1B+2B"] {
            let space = Space::new(p, q).unwrap();
            let variant: Variant = v.parse().unwrap();
            if enumerate(space, variant).is_ok() {
                out.push((space, variant));
            }
        }
    }
    out
}

#[test]
fn order_keys_are_distinct_and_consistent() {
    for (space, variant) in implemented() {
        let c = enumerate(space, variant).unwrap();
        let split = space.split();
        let keys: Vec<_> = c.objects.iter().map(|o| o.order_key(&split)).collect();
        for i in 0..keys.len() {
            for j in 0..keys.len() {
                assert_eq!(keys[i].cmp(&keys[j]), i.cmp(&j), "{space} {i} {j}");
                assert_eq!(keys[i].cmp(&keys[j]).reverse(), keys[j].cmp(&keys[i]));
            }
        }
    }
}

#[test]
fn variant_sides_have_equal_length() {
    for (p, q) in [(4, 1), (4, 3), (6, 1), (4, 2), (6, 2)] {
        let space = Space::new(p, q).unwrap();
        let a = enumerate(space, "1A".parse().unwrap()).unwrap().len();
        let b = enumerate(space, "1B".parse().unwrap()).unwrap().len();
        assert_eq!(a, b, "({p},{q})");
    }
}

#[test]
fn bundle_labels_pass_their_group_test() {
    for (p, q) in [(4, 1), (4, 3), (6, 1), (6, 3)] {
        let space = Space::new(p, q).unwrap();
        let split = space.split();
        for v in ["1A", "1B"] {
            let c = enumerate(space, v.parse().unwrap()).unwrap();
            for x in c.labels(excoll::enumerate::ObjectTag::Bundle) {
                let g = classify_group(&x, &split, GroupFamily::OddLight).unwrap();
                let claimed = if v == "1A" { g.g1a } else { g.g1b };
                assert!(claimed || g.g2, "({p},{q}) {v} {x}");
            }
        }
    }
}

#[test]
fn odd_heavy_collections_are_strong() {
    for p in [5, 7] {
        let report =
            Verifier::new(enumerate(Space::new(p, 0).unwrap(), Variant::default()).unwrap())
                .unwrap()
                .run();
        for v in &report.verdicts {
            assert!(
                v.result.is_zero() || v.result.concentrated_in(0),
                "p={p} {} -> {}",
                v.source_label,
                v.target_label
            );
        }
    }
}

#[test]
fn verdicts_are_constant_on_orbits() {
    let space = Space::new(4, 3).unwrap();
    let v = Verifier::new(enumerate(space, Variant::default()).unwrap()).unwrap();
    let objs = &v.collection.objects;
    let index: HashMap<CollectionObject, usize> =
        objs.iter().enumerate().map(|(i, o)| (*o, i)).collect();
    let all = space.split().all();
    for g in generators(&space) {
        for i in 0..objs.len() {
            for j in 0..objs.len() {
                let gi = index[&objs[i].permuted(&g, all)];
                let gj = index[&objs[j].permuted(&g, all)];
                let a = v.evaluate(i, j);
                let b = v.evaluate(gi, gj);
                assert_eq!(
                    a.result, b.result,
                    "{} -> {}",
                    a.source_label, a.target_label
                );
                assert_eq!(a.status, b.status);
            }
        }
    }
}

#[test]
fn decompositions_are_permutation_modules() {
    for (space, variant) in implemented() {
        let c = enumerate(space, variant).unwrap();
        let d = decompose(&c).unwrap();
        assert!(d.dimension_matches(), "{space} {variant}");
    }
}

#[test]
fn hassett_rank_near_all_ones() {
    let n = 7;
    let w: Vec<BigRational> = (0..n)
        .map(|i| BigRational::one() - BigRational::new(1.into(), (100 + i as i64).into()))
        .collect();
    let r = rank_hassett(&HassettWeights::new(w, true).unwrap()).unwrap();
    assert_eq!(r, BigUint::from(213u32));
}
