//! Orbits of collections under `S_p × S_q`, permutation characters, and
//! their decomposition into irreducible characters.
//!
//! Irreducible characters are evaluated with the Murnaghan-Nakayama rule on
//! beta-sets. Characters of the product group are products of factor
//! characters. All inner products are exact.

use crate::bits::{self, Mask};
use crate::enumerate::{check_equivariance, Collection, CollectionObject, Space};
use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

/// A partition of `n`: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Partition(format!("zero part in {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Partition(format!(
                "parts not weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    /// The empty partition of 0.
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    /// All partitions of `n`, in reverse lexicographic order (`[n]` first).
    pub fn all(n: usize) -> Vec<Partition> {
        fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for part in (1..=rest.min(max)).rev() {
                cur.push(part);
                rec(rest - part, part, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.0.first().copied().unwrap_or(0);
        Partition(
            (1..=width)
                .map(|j| self.0.iter().filter(|&&x| x >= j).count())
                .collect(),
        )
    }

    /// Dimension of the irreducible representation by the hook-length formula.
    pub fn hook_dimension(&self) -> BigUint {
        let conj = self.conjugate();
        let mut hooks = BigUint::one();
        for (i, &row) in self.0.iter().enumerate() {
            for j in 0..row {
                hooks *= (row - j - 1) + (conj.0[j] - i - 1) + 1;
            }
        }
        factorial(self.n()) / hooks
    }

    /// Number of permutations with this cycle type.
    pub fn class_size(&self) -> BigUint {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &x in &self.0 {
            *counts.entry(x).or_default() += 1;
        }
        let denom = counts.iter().fold(BigUint::one(), |acc, (&len, &m)| {
            acc * BigUint::from(len).pow(m as u32) * factorial(m)
        });
        factorial(self.n()) / denom
    }

    /// A permutation of `offset..offset + n` with this cycle type, as an image
    /// array written into `perm`.
    fn fill_representative(&self, perm: &mut [usize], offset: usize) {
        let mut start = offset;
        for &len in &self.0 {
            for k in 0..len {
                perm[start + k] = start + (k + 1) % len;
            }
            start += len;
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `"4+1"`; `"0"` is the empty partition.
    fn from_str(s: &str) -> Result<Self> {
        if s == "0" {
            return Ok(Self::empty());
        }
        let parts = s
            .split('+')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Partition(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

type CharMemo = Mutex<HashMap<(Vec<usize>, Vec<usize>), i64>>;

fn char_memo() -> &'static CharMemo {
    static MEMO: OnceLock<CharMemo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// `χ_λ(μ)` by the Murnaghan-Nakayama rule.
pub fn irreducible_character(lambda: &Partition, class: &Partition) -> Result<i64> {
    if lambda.n() != class.n() {
        return Err(Error::Partition(format!("|{lambda}| != |{class}|")));
    }
    let len = lambda.0.len();
    let beta: Vec<usize> = lambda
        .0
        .iter()
        .enumerate()
        .map(|(i, &x)| x + len - 1 - i)
        .collect();
    Ok(mn_beta(beta, &class.0))
}

/// Murnaghan-Nakayama on a strictly decreasing beta-set. Removing a rim hook
/// of length `h` moves one bead from `b` to the free position `b - h`; the
/// sign counts beads strictly in between.
fn mn_beta(beta: Vec<usize>, class: &[usize]) -> i64 {
    let Some((&h, rest)) = class.split_first() else {
        return 1;
    };
    let key = (beta.clone(), class.to_vec());
    if let Some(&v) = char_memo().lock().expect("memo lock").get(&key) {
        return v;
    }
    let set: HashSet<usize> = beta.iter().copied().collect();
    let mut total = 0;
    for (idx, &b) in beta.iter().enumerate() {
        if b < h || set.contains(&(b - h)) {
            continue;
        }
        let target = b - h;
        let between = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut next = beta.clone();
        next[idx] = target;
        next.sort_unstable_by(|x, y| y.cmp(x));
        let sign = if between % 2 == 0 { 1 } else { -1 };
        total += sign * mn_beta(next, rest);
    }
    char_memo().lock().expect("memo lock").insert(key, total);
    total
}

/// A conjugacy class of `S_p × S_q`, given by a cycle type on each factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CycleTypePair {
    pub heavy: Partition,
    pub light: Partition,
}

impl CycleTypePair {
    pub fn new(space: &Space, heavy: Partition, light: Partition) -> Result<Self> {
        if heavy.n() != space.p || light.n() != space.q {
            return Err(Error::Partition(format!(
                "class {heavy}|{light} does not match {space}"
            )));
        }
        Ok(Self { heavy, light })
    }

    pub fn size(&self) -> BigUint {
        self.heavy.class_size() * self.light.class_size()
    }

    /// A representative permutation of the markings, as an image array.
    pub fn representative(&self) -> Vec<usize> {
        let p = self.heavy.n();
        let mut perm = vec![0; p + self.light.n()];
        self.heavy.fill_representative(&mut perm, 0);
        self.light.fill_representative(&mut perm, p);
        perm
    }
}

impl fmt::Display for CycleTypePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.heavy, self.light)
    }
}

/// All conjugacy classes of `S_p × S_q`.
pub fn classes(space: &Space) -> Vec<CycleTypePair> {
    let lights = Partition::all(space.q);
    Partition::all(space.p)
        .into_iter()
        .flat_map(|h| {
            lights.iter().map(move |l| CycleTypePair {
                heavy: h.clone(),
                light: l.clone(),
            })
        })
        .collect()
}

pub fn group_order(space: &Space) -> BigUint {
    factorial(space.p) * factorial(space.q)
}

/// Character of the product group at a class.
pub fn product_character(rep: &CycleTypePair, class: &CycleTypePair) -> Result<i64> {
    Ok(irreducible_character(&rep.heavy, &class.heavy)?
        * irreducible_character(&rep.light, &class.light)?)
}

/// One orbit of the collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    /// Position of the first member in collection order.
    pub representative_index: usize,
    pub representative: String,
    pub size: usize,
    #[serde(serialize_with = "crate::equivariant::ser_big")]
    pub stabilizer_order: BigUint,
}

pub(crate) fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

/// Stabilizer order of an object, from its shape alone.
pub fn stabilizer_order(space: &Space, obj: &CollectionObject) -> BigUint {
    let heavy = bits::range(0, space.p);
    let light = bits::range(space.p, space.n());
    let split_order = |set: Mask| {
        let hp = bits::card(set & heavy) as usize;
        let hq = bits::card(set & light) as usize;
        factorial(hp) * factorial(space.p - hp) * factorial(hq) * factorial(space.q - hq)
    };
    match *obj {
        CollectionObject::Bundle(x)
        | CollectionObject::TorsionZ(x)
        | CollectionObject::TildeTorsion(x) => split_order(x.set),
        CollectionObject::BoundaryAB { side, a, b } => {
            let base = split_order(side);
            let comp = (heavy | light) & !side;
            let balanced = bits::card(side & heavy) == bits::card(comp & heavy)
                && bits::card(side & light) == bits::card(comp & light);
            if balanced && a == b {
                base * 2u32
            } else {
                base
            }
        }
    }
}

/// Orbit decomposition of an invariant collection. Orbits are listed in the
/// order of their first member. Fails if the collection is not invariant or
/// if orbit-stabilizer does not hold for some orbit.
pub fn orbits(collection: &Collection) -> Result<Vec<Orbit>> {
    if let Some((i, j)) = check_equivariance(collection) {
        return Err(Error::NotInvariant(format!(
            "transposition ({i} {j}) moves an object out of the collection"
        )));
    }
    let space = collection.space;
    let all = space.split().all();
    let gens = crate::enumerate::generators(&space);
    let order = group_order(&space);
    let mut seen: HashSet<CollectionObject> = HashSet::new();
    let mut out = Vec::new();
    for (idx, obj) in collection.objects.iter().enumerate() {
        if seen.contains(obj) {
            continue;
        }
        let mut queue = VecDeque::from([*obj]);
        seen.insert(*obj);
        let mut size = 0usize;
        while let Some(x) = queue.pop_front() {
            size += 1;
            for g in &gens {
                let y = x.permuted(g, all);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        let stab = stabilizer_order(&space, obj);
        if BigUint::from(size) * &stab != order {
            return Err(Error::NotInvariant(format!(
                "orbit of {obj} has size {size} and stabilizer {stab}, group order {order}"
            )));
        }
        out.push(Orbit {
            representative_index: idx,
            representative: obj.to_string(),
            size,
            stabilizer_order: stab,
        });
    }
    Ok(out)
}

/// Number of objects fixed by a representative of the class.
pub fn permutation_character(collection: &Collection, class: &CycleTypePair) -> usize {
    let perm = class.representative();
    let all = collection.space.split().all();
    collection
        .objects
        .iter()
        .filter(|o| o.permuted(&perm, all) == **o)
        .count()
}

/// `(1/|G|) Σ_C |C| f(C) g(C)` as an exact rational, returned as an integer
/// when it is one.
fn inner_product(
    space: &Space,
    values: &[(CycleTypePair, BigInt)],
    other: impl Fn(&CycleTypePair) -> Result<i64> + Sync,
) -> Result<(BigInt, BigInt)> {
    let terms: Vec<BigInt> = values
        .par_iter()
        .map(|(c, v)| Ok(BigInt::from(c.size()) * v * other(c)?))
        .collect::<Result<_>>()?;
    let sum: BigInt = terms.into_iter().sum();
    Ok(sum.div_rem(&BigInt::from(group_order(space))))
}

/// Multiplicity of one irreducible in the permutation representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constituent {
    pub key: String,
    pub heavy: Partition,
    pub light: Partition,
    pub multiplicity: u64,
    pub dimension: u64,
}

/// Decomposition of the permutation module spanned by a collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub space: Space,
    pub variant: String,
    pub objects: usize,
    pub orbits: usize,
    /// Multiplicities keyed by `"4+1"` (no light markings) or `"3+1|2"`.
    pub multiplicities: BTreeMap<String, u64>,
    pub constituents: Vec<Constituent>,
    pub total_dimension: u64,
    /// Values of the permutation character keyed by class.
    pub character: BTreeMap<String, usize>,
}

impl Decomposition {
    /// `Σ m·dim` equals the collection size.
    pub fn dimension_matches(&self) -> bool {
        self.total_dimension == self.objects as u64
    }
}

fn constituent_key(space: &Space, rep: &CycleTypePair) -> String {
    if space.q == 0 {
        rep.heavy.to_string()
    } else {
        rep.to_string()
    }
}

/// Decomposes the permutation character into irreducibles of `S_p × S_q`.
/// A fractional or negative multiplicity is reported as an error.
pub fn decompose(collection: &Collection) -> Result<Decomposition> {
    let space = collection.space;
    let orbit_list = orbits(collection)?;
    let class_list = classes(&space);
    let values: Vec<(CycleTypePair, BigInt)> = class_list
        .par_iter()
        .map(|c| {
            (
                c.clone(),
                BigInt::from(permutation_character(collection, c)),
            )
        })
        .collect();
    let mut multiplicities = BTreeMap::new();
    let mut constituents = Vec::new();
    let mut total = 0u64;
    for rep in &class_list {
        let (m, rem) = inner_product(&space, &values, |c| product_character(rep, c))?;
        let key = constituent_key(&space, rep);
        if !rem.is_zero() {
            return Err(Error::Decomposition(format!(
                "fractional multiplicity for {key}"
            )));
        }
        if m.is_negative() {
            return Err(Error::Decomposition(format!(
                "negative multiplicity {m} for {key}"
            )));
        }
        let m = m
            .to_u64()
            .ok_or_else(|| Error::Decomposition(format!("multiplicity overflow for {key}")))?;
        if m == 0 {
            continue;
        }
        let dim = (rep.heavy.hook_dimension() * rep.light.hook_dimension())
            .to_u64()
            .ok_or_else(|| Error::Decomposition(format!("dimension overflow for {key}")))?;
        total += m * dim;
        multiplicities.insert(key.clone(), m);
        constituents.push(Constituent {
            key,
            heavy: rep.heavy.clone(),
            light: rep.light.clone(),
            multiplicity: m,
            dimension: dim,
        });
    }
    let character = values
        .iter()
        .map(|(c, v)| {
            (
                constituent_key(&space, c),
                v.to_usize().expect("fixed-point count"),
            )
        })
        .collect();
    Ok(Decomposition {
        space,
        variant: collection.variant_name(),
        objects: collection.len(),
        orbits: orbit_list.len(),
        multiplicities,
        constituents,
        total_dimension: total,
        character,
    })
}

/// Burnside count `⟨χ_perm, 1⟩`.
pub fn burnside_count(collection: &Collection) -> Result<BigInt> {
    let space = collection.space;
    let values: Vec<(CycleTypePair, BigInt)> = classes(&space)
        .into_iter()
        .map(|c| {
            let v = BigInt::from(permutation_character(collection, &c));
            (c, v)
        })
        .collect();
    let (q, rem) = inner_product(&space, &values, |_| Ok(1))?;
    if !rem.is_zero() {
        return Err(Error::Decomposition("fractional orbit count".into()));
    }
    Ok(q)
}

/// Character table of `S_n`, rows indexed by irreducibles and columns by
/// classes, both in the order of [`Partition::all`].
pub fn character_table(n: usize) -> Vec<Vec<i64>> {
    let parts = Partition::all(n);
    parts
        .par_iter()
        .map(|l| {
            parts
                .iter()
                .map(|c| irreducible_character(l, c).expect("same size"))
                .collect()
        })
        .collect()
}
