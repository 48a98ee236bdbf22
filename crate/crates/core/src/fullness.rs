//! Replay of the Koszul-complex generation arguments as checkable
//! certificates.
//!
//! Everything here works with dual labels: the node `(l, E)` stands for the
//! dual bundle `F(l,E)^∨`, and the target collection is the dual of the
//! enumerated one. A move tensors the Koszul resolution of a diagonal
//! `Δ_{I ∪ {x}}` with `O(-base + m·x)` and pushes forward; the resulting
//! terms are `F(m - |J|, base ∪ J)` for `J ⊆ I`, read as `F(|J| - m - 2)[-1]`
//! when `m - |J| <= -2` and absent when `m - |J| = -1`.

use crate::bits::{self, Mask};
use crate::cohomology::{MarkingSplit, PairLE};
use crate::enumerate::{Side, Space, SpaceKind, Variant};
use crate::error::{Error, Result};
use crate::git::GitProblem;
use crate::ktheory::{koszul_class_check, KoszulExpansion};
use crate::score::{classify_group, score_s, GroupFamily};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::sync::{Mutex, OnceLock};

/// Which construction a move uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Game {
    /// `I` unstable and disjoint from `E`, twist `l`.
    G1,
    /// `I` unstable inside `E`, twist `|I| - 2 - l` on `E \ I`.
    G2,
    /// `I = E_p` of size `r`, twist `r - 2 - l` on `E_q`; the diagonal term
    /// is a torsion sheaf.
    G3,
    /// Odd heavy count, `|E| <= r`: as `G1` with `|I| = r + 1`.
    OddPCase1,
    /// Odd heavy count, `|E| >= r + 1`: as `G2` with `|I| = r + 1`.
    OddPCase2,
}

impl Game {
    fn needs_unstable(self) -> bool {
        !matches!(self, Game::G3)
    }
}

/// Kind of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TermKind {
    /// A dual bundle `F(l,E)^∨`.
    Bundle,
    /// A dual torsion sheaf `T(l,E)^∨`.
    Torsion,
}

/// One term of a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Term {
    pub kind: TermKind,
    pub label: PairLE,
    pub shift: i32,
}

/// A single Koszul move generating `root` from `children`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameMove {
    pub game: Game,
    pub root: PairLE,
    #[serde(serialize_with = "ser_mask")]
    pub interior: Mask,
    #[serde(serialize_with = "ser_mask")]
    pub base: Mask,
    pub twist: i64,
    pub children: Vec<Term>,
}

fn ser_mask<S: serde::Serializer>(m: &Mask, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize as _;
    bits::indices(*m).serialize(s)
}

impl GameMove {
    pub fn expansion(&self, n: usize) -> KoszulExpansion {
        KoszulExpansion {
            n,
            interior: self.interior,
            base: self.base,
            m: self.twist,
        }
    }
}

/// All bundle terms of the schema, in order of `|J|` then lex `J`.
pub fn schema_terms(interior: Mask, base: Mask, twist: i64) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for j in 0..=bits::card(interior) as usize {
        for sub in bits::k_subsets(interior, j) {
            let k = twist - j as i64;
            let (l, shift) = match k {
                -1 => continue,
                k if k >= 0 => (k, 0),
                k => (-k - 2, -1),
            };
            out.push(Term {
                kind: TermKind::Bundle,
                label: PairLE::new(l, base | sub)?,
                shift,
            });
        }
    }
    Ok(out)
}

/// Expected children: the schema minus the root term, plus the torsion term
/// for `G3`.
fn expected_children(
    game: Game,
    root: &PairLE,
    interior: Mask,
    base: Mask,
    twist: i64,
    r: i64,
) -> Result<Vec<Term>> {
    let root_term = match game {
        Game::G1 | Game::OddPCase1 => Term {
            kind: TermKind::Bundle,
            label: *root,
            shift: 0,
        },
        _ => Term {
            kind: TermKind::Bundle,
            label: *root,
            shift: -1,
        },
    };
    let mut terms = schema_terms(interior, base, twist)?;
    let pos = terms
        .iter()
        .position(|t| *t == root_term)
        .ok_or_else(|| Error::NoCase(format!("root {root} does not occur in its own move")))?;
    terms.remove(pos);
    if game == Game::G3 {
        terms.insert(
            0,
            Term {
                kind: TermKind::Torsion,
                label: *root,
                shift: (r - 1) as i32,
            },
        );
    }
    Ok(terms)
}

/// How an edge is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DescentKind {
    /// The child is in the dual collection.
    Member,
    /// The child's score is lower.
    ScoreDrop,
    /// Same score, lower `l`.
    LengthDrop,
}

/// `(score, l)` at both ends of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DescentWitness {
    pub kind: DescentKind,
    pub from: (i64, i64),
    pub to: (i64, i64),
}

/// An edge from a node to one child of its move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub child: usize,
    /// Node index of a non-member child.
    pub target: Option<usize>,
    pub witness: DescentWitness,
}

/// A node of the certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertNode {
    pub label: PairLE,
    pub member: bool,
    pub game_move: Option<GameMove>,
    pub edges: Vec<Edge>,
}

/// A DAG of moves rooted at node 0 whose leaves lie in the dual collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationCertificate {
    pub space: Space,
    pub variant: Variant,
    pub root: PairLE,
    pub nodes: Vec<CertNode>,
    pub leaves: Vec<Term>,
}

/// Outcome of [`check_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateCheck {
    pub ok: bool,
    /// `(node, edge)` of the first failure, if any; `edge` is `None` for
    /// node-level failures.
    pub witness: Option<(usize, Option<usize>)>,
    pub reason: Option<String>,
}

/// Expansion rules and membership for one space.
#[derive(Debug, Clone)]
pub struct Replayer {
    pub space: Space,
    pub variant: Variant,
    split: MarkingSplit,
    problem: GitProblem,
}

impl Replayer {
    /// Supported: odd heavy count without light markings, and even heavy
    /// count with an odd light count. Variant 2A is refused.
    pub fn new(space: Space, variant: Variant) -> Result<Self> {
        match space.kind() {
            SpaceKind::OddHeavy | SpaceKind::EvenHeavyOddLight => {}
            _ => {
                return Err(Error::UnsupportedSpace(format!(
                    "no generation argument replayed for {space}"
                )))
            }
        }
        if variant.complexes == Side::A {
            return Err(Error::Variant(format!(
                "{variant}: generation is not claimed for 2A"
            )));
        }
        let problem = GitProblem::recipe(space.p, space.q)?;
        Ok(Self {
            space,
            variant,
            split: space.split(),
            problem,
        })
    }

    pub fn score(&self, x: &PairLE) -> i64 {
        score_s(x, &self.split)
    }

    /// Membership of a term in the dual collection.
    pub fn is_member(&self, t: &Term) -> Result<bool> {
        match self.space.kind() {
            SpaceKind::OddHeavy => {
                Ok(t.kind == TermKind::Bundle && self.score(&t.label) <= self.space.r() - 1)
            }
            _ => {
                let g = classify_group(&t.label, &self.split, GroupFamily::OddLight)?;
                Ok(match t.kind {
                    TermKind::Bundle => match self.variant.bundles {
                        Side::A => g.g1a,
                        Side::B => g.g1b,
                    },
                    TermKind::Torsion => g.g2,
                })
            }
        }
    }

    fn bundle(label: PairLE) -> Term {
        Term {
            kind: TermKind::Bundle,
            label,
            shift: 0,
        }
    }

    /// Whether `set` is unstable, by the closed-form predicate.
    pub fn is_unstable(&self, set: Mask) -> bool {
        self.problem.is_unstable_combinatorial(set).unwrap_or(false)
    }

    /// The move for a non-member root, choosing lexicographically least sets.
    pub fn expand(&self, root: &PairLE) -> Result<GameMove> {
        if root.set & !self.split.all() != 0 || root.l < 0 {
            return Err(Error::Invalid(format!(
                "{root} is not a label on {}",
                self.space
            )));
        }
        if self.is_member(&Self::bundle(*root))? {
            return Err(Error::AlreadyMember(root.to_string()));
        }
        let r = self.space.r();
        let heavy = self.split.heavy;
        let light = self.split.light;
        let e_p = root.e_p(&self.split);
        let (game, interior, base, twist) = match self.space.kind() {
            SpaceKind::OddHeavy => {
                if root.e() <= r {
                    let i = pick(heavy & !root.set, (r + 1) as usize)?;
                    (Game::OddPCase1, i, root.set, root.l)
                } else {
                    let i = pick(root.set, (r + 1) as usize)?;
                    (Game::OddPCase2, i, root.set & !i, r - 1 - root.l)
                }
            }
            _ => {
                let s = self.space.s();
                let e_q = root.e_q(&self.split);
                let group2 = classify_group(root, &self.split, GroupFamily::OddLight)?.g2;
                if e_p == r && group2 {
                    (Game::G3, root.set & heavy, root.set & light, r - 2 - root.l)
                } else if e_p < r {
                    let i = pick(heavy & !root.set, (r + 1) as usize)?;
                    (Game::G1, i, root.set, root.l)
                } else if e_p > r {
                    let i = pick(root.set & heavy, (r + 1) as usize)?;
                    let size = bits::card(i) as i64;
                    (Game::G2, i, root.set & !i, size - 2 - root.l)
                } else if e_q <= s {
                    let ip = heavy & !root.set;
                    let iq = pick(light & !root.set, (s + 1) as usize)?;
                    (Game::G1, ip | iq, root.set, root.l)
                } else {
                    let size = root.e();
                    (Game::G2, root.set, 0, size - 2 - root.l)
                }
            }
        };
        if game.needs_unstable() && !self.is_unstable(interior) {
            return Err(Error::NoCase(format!(
                "chosen set {:?} is stable",
                bits::indices(interior)
            )));
        }
        let children = expected_children(game, root, interior, base, twist, r)?;
        Ok(GameMove {
            game,
            root: *root,
            interior,
            base,
            twist,
            children,
        })
    }

    fn descent(&self, from: &PairLE, child: &Term) -> Result<DescentWitness> {
        let a = (self.score(from), from.l);
        let b = (self.score(&child.label), child.label.l);
        let kind = if self.is_member(child)? {
            DescentKind::Member
        } else if child.kind == TermKind::Torsion {
            return Err(Error::Descent(format!(
                "torsion term {} outside the collection",
                child.label
            )));
        } else if b.0 < a.0 {
            DescentKind::ScoreDrop
        } else if b.0 == a.0 && b.1 < a.1 {
            DescentKind::LengthDrop
        } else {
            return Err(Error::Descent(format!(
                "{} -> {}: (score, l) goes from {a:?} to {b:?}",
                from, child.label
            )));
        };
        Ok(DescentWitness {
            kind,
            from: a,
            to: b,
        })
    }

    /// Expands until every leaf is in the dual collection.
    pub fn certify(&self, root: &PairLE) -> Result<GenerationCertificate> {
        let mut nodes: Vec<CertNode> = Vec::new();
        let mut index: HashMap<PairLE, usize> = HashMap::new();
        let mut leaves: Vec<Term> = Vec::new();
        let root_member = self.is_member(&Self::bundle(*root))?;
        nodes.push(CertNode {
            label: *root,
            member: root_member,
            game_move: None,
            edges: Vec::new(),
        });
        index.insert(*root, 0);
        if root_member {
            leaves.push(Self::bundle(*root));
        }
        let mut queue = VecDeque::from([0usize]);
        while let Some(idx) = queue.pop_front() {
            if nodes[idx].member {
                continue;
            }
            let label = nodes[idx].label;
            let mv = self.expand(&label)?;
            let mut edges = Vec::with_capacity(mv.children.len());
            for (c, child) in mv.children.iter().enumerate() {
                let witness = self.descent(&label, child)?;
                let target = if witness.kind == DescentKind::Member {
                    let leaf = Term { shift: 0, ..*child };
                    if !leaves.contains(&leaf) {
                        leaves.push(leaf);
                    }
                    None
                } else {
                    let t = *index.entry(child.label).or_insert_with(|| {
                        nodes.push(CertNode {
                            label: child.label,
                            member: false,
                            game_move: None,
                            edges: Vec::new(),
                        });
                        queue.push_back(nodes.len() - 1);
                        nodes.len() - 1
                    });
                    Some(t)
                };
                edges.push(Edge {
                    child: c,
                    target,
                    witness,
                });
            }
            nodes[idx].game_move = Some(mv);
            nodes[idx].edges = edges;
        }
        Ok(GenerationCertificate {
            space: self.space,
            variant: self.variant,
            root: *root,
            nodes,
            leaves,
        })
    }
}

fn pick(from: Mask, k: usize) -> Result<Mask> {
    bits::least_k_subset(from, k)
        .ok_or_else(|| Error::NoCase(format!("no {k}-subset of {:?}", bits::indices(from))))
}

/// The move for `pair` on `space`.
pub fn expand(pair: &PairLE, space: Space, variant: Variant) -> Result<GameMove> {
    Replayer::new(space, variant)?.expand(pair)
}

/// A certificate for `pair` on `space`.
pub fn certify(pair: &PairLE, space: Space, variant: Variant) -> Result<GenerationCertificate> {
    Replayer::new(space, variant)?.certify(pair)
}

/// Re-validates every move against the schema, the instability of its set,
/// its Koszul class, the descent bookkeeping, and leaf membership, without
/// re-running the choice of sets.
pub fn check_certificate(cert: &GenerationCertificate) -> CertificateCheck {
    let fail = |node: usize, edge: Option<usize>, reason: String| CertificateCheck {
        ok: false,
        witness: Some((node, edge)),
        reason: Some(reason),
    };
    let rp = match Replayer::new(cert.space, cert.variant) {
        Ok(rp) => rp,
        Err(e) => return fail(0, None, e.to_string()),
    };
    let n = cert.space.n();
    let r = cert.space.r();
    if cert.nodes.first().map(|x| x.label) != Some(cert.root) {
        return fail(0, None, "node 0 is not the root".into());
    }
    for (i, node) in cert.nodes.iter().enumerate() {
        let member = match rp.is_member(&Replayer::bundle(node.label)) {
            Ok(m) => m,
            Err(e) => return fail(i, None, e.to_string()),
        };
        if member != node.member {
            return fail(
                i,
                None,
                format!("membership of {} recorded as {}", node.label, node.member),
            );
        }
        if node.member {
            if node.game_move.is_some() || !node.edges.is_empty() {
                return fail(i, None, "member node has a move".into());
            }
            continue;
        }
        let Some(mv) = &node.game_move else {
            return fail(
                i,
                None,
                format!("{} is neither a member nor expanded", node.label),
            );
        };
        if mv.root != node.label || mv.interior & mv.base != 0 {
            return fail(i, None, "move does not match its node".into());
        }
        if mv.game.needs_unstable() && !rp.is_unstable(mv.interior) {
            return fail(
                i,
                None,
                format!("set {:?} is stable", bits::indices(mv.interior)),
            );
        }
        if mv.game == Game::G3 {
            let g2 = classify_group(&mv.root, &rp.split, GroupFamily::OddLight)
                .map(|g| g.g2)
                .unwrap_or(false);
            if mv.interior != mv.root.set & rp.split.heavy
                || bits::card(mv.interior) as i64 != r
                || !g2
            {
                return fail(i, None, "torsion move outside its case".into());
            }
        }
        match expected_children(mv.game, &mv.root, mv.interior, mv.base, mv.twist, r) {
            Ok(mut exp) => {
                for (c, child) in mv.children.iter().enumerate() {
                    match exp.iter().position(|t| t == child) {
                        Some(pos) => {
                            exp.swap_remove(pos);
                        }
                        None => return fail(i, Some(c), format!("child {c} is not in the schema")),
                    }
                }
                if !exp.is_empty() {
                    return fail(i, None, format!("{} schema terms missing", exp.len()));
                }
            }
            Err(e) => return fail(i, None, e.to_string()),
        }
        if !koszul_ok(&mv.expansion(n)) {
            return fail(i, None, "Koszul class check failed".into());
        }
        if node.edges.len() != mv.children.len() {
            return fail(i, None, "edge count differs from child count".into());
        }
        for (k, edge) in node.edges.iter().enumerate() {
            let Some(child) = mv.children.get(edge.child) else {
                return fail(i, Some(k), "edge to a missing child".into());
            };
            match rp.descent(&node.label, child) {
                Ok(w) if w == edge.witness => {}
                Ok(w) => {
                    return fail(
                        i,
                        Some(k),
                        format!("recorded witness {:?}, recomputed {w:?}", edge.witness),
                    )
                }
                Err(e) => return fail(i, Some(k), e.to_string()),
            }
            match (edge.witness.kind, edge.target) {
                (DescentKind::Member, None) => {}
                (DescentKind::Member, Some(_)) => {
                    return fail(i, Some(k), "member edge has a target".into())
                }
                (_, Some(t)) if cert.nodes.get(t).map(|x| x.label) == Some(child.label) => {}
                _ => {
                    return fail(
                        i,
                        Some(k),
                        "edge target does not carry the child label".into(),
                    )
                }
            }
        }
    }
    for leaf in &cert.leaves {
        if !rp.is_member(leaf).unwrap_or(false) {
            return fail(0, None, format!("leaf {} is not a member", leaf.label));
        }
    }
    CertificateCheck {
        ok: true,
        witness: None,
        reason: None,
    }
}

fn koszul_ok(exp: &KoszulExpansion) -> bool {
    static CACHE: OnceLock<Mutex<HashMap<KoszulExpansion, bool>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&ok) = cache.lock().expect("cache lock").get(exp) {
        return ok;
    }
    let ok = koszul_class_check(exp).ok();
    cache.lock().expect("cache lock").insert(*exp, ok);
    ok
}

/// Applies a permutation of markings to every label and set.
pub fn permute_certificate(cert: &GenerationCertificate, perm: &[usize]) -> GenerationCertificate {
    let pl = |x: &PairLE| x.permuted(perm);
    let pt = |t: &Term| Term {
        label: pl(&t.label),
        ..*t
    };
    GenerationCertificate {
        space: cert.space,
        variant: cert.variant,
        root: pl(&cert.root),
        nodes: cert
            .nodes
            .iter()
            .map(|nd| CertNode {
                label: pl(&nd.label),
                member: nd.member,
                game_move: nd.game_move.as_ref().map(|mv| GameMove {
                    game: mv.game,
                    root: pl(&mv.root),
                    interior: bits::permute(mv.interior, perm),
                    base: bits::permute(mv.base, perm),
                    twist: mv.twist,
                    children: mv.children.iter().map(pt).collect(),
                }),
                edges: nd.edges.clone(),
            })
            .collect(),
        leaves: cert.leaves.iter().map(pt).collect(),
    }
}

/// Result of certifying every dual label up to a bound on `l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertifySummary {
    pub space: Space,
    pub variant: Variant,
    pub lmax: i64,
    pub roots: usize,
    pub certified: usize,
    pub checked: usize,
    pub total_nodes: usize,
    pub failures: Vec<(PairLE, String)>,
}

impl CertifySummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.certified == self.roots && self.checked == self.roots
    }
}

/// All labels `(l, E)` with `0 <= l <= lmax` and the right parity.
pub fn labels_up_to(n: usize, lmax: i64) -> Vec<PairLE> {
    let mut out = Vec::new();
    for l in 0..=lmax {
        for set in bits::subsets(bits::full(n)) {
            if let Ok(x) = PairLE::new(l, set) {
                out.push(x);
            }
        }
    }
    out
}

/// Certifies and re-checks every label up to `lmax`.
pub fn certify_all(
    space: Space,
    variant: Variant,
    lmax: i64,
) -> Result<(CertifySummary, Vec<GenerationCertificate>)> {
    let rp = Replayer::new(space, variant)?;
    let roots = labels_up_to(space.n(), lmax);
    let results: Vec<(PairLE, Result<GenerationCertificate>)> =
        roots.par_iter().map(|x| (*x, rp.certify(x))).collect();
    let mut summary = CertifySummary {
        space,
        variant,
        lmax,
        roots: roots.len(),
        certified: 0,
        checked: 0,
        total_nodes: 0,
        failures: Vec::new(),
    };
    let mut certs = Vec::new();
    for (x, res) in results {
        match res {
            Ok(cert) => {
                summary.certified += 1;
                summary.total_nodes += cert.nodes.len();
                let chk = check_certificate(&cert);
                if chk.ok {
                    summary.checked += 1;
                } else {
                    summary.failures.push((x, chk.reason.unwrap_or_default()));
                }
                certs.push(cert);
            }
            Err(e) => summary.failures.push((x, e.to_string())),
        }
    }
    Ok((summary, certs))
}
