//! The subcommands. Each returns the payload in the requested format plus a
//! pass/fail flag; nothing is printed here.

use crate::inject;
use crate::{CertifyArgs, Failure, Format, Outcome, RankArgs, SpaceArgs};
use excoll::bits;
use excoll::cohomology::PairLE;
use excoll::enumerate::{
    enumerate as enumerate_space, Collection, CollectionJson, CollectionObject, ObjectTag, Space,
    Variant,
};
use excoll::equivariant::{decompose, orbits as orbit_list, Decomposition, Orbit};
use excoll::fullness::{certify_all, check_certificate, CertifySummary, GenerationCertificate};
use excoll::git::{window_feasible, GitProblem, WindowReport};
use excoll::ktheory::{mpq_weights, rank_hassett, HassettWeights};
use excoll::verify::{PairVerdict, Status, VerificationReport, Verifier};
use num_rational::BigRational;
use serde::Serialize;
use std::fmt::Write as _;
use std::str::FromStr;

const SCHEMA_VERSION: u32 = 1;

fn variant(s: Option<&String>) -> Result<Variant, Failure> {
    Ok(match s {
        Some(v) => Variant::from_str(v)?,
        None => Variant::default(),
    })
}

fn load(args: &SpaceArgs) -> Result<(Collection, bool), Failure> {
    let space = Space::new(args.p, args.q)?;
    let mut c = enumerate_space(space, variant(args.variant.as_ref())?)?;
    let tamper = inject::apply(&mut c, &args.inject)?;
    Ok((c, tamper))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable payload");
    s.push('\n');
    s
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn set_string(m: bits::Mask) -> String {
    bits::indices(m)
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct EnumeratePayload {
    schema_version: u32,
    command: &'static str,
    count: usize,
    counts: Counts,
    collection: CollectionJson,
}

#[derive(Serialize)]
struct Counts {
    bundle: usize,
    torsion: usize,
    boundary: usize,
    tilde_torsion: usize,
}

fn counts(c: &Collection) -> Counts {
    Counts {
        bundle: c.count(ObjectTag::Bundle),
        torsion: c.count(ObjectTag::TorsionZ),
        boundary: c.count(ObjectTag::BoundaryAB),
        tilde_torsion: c.count(ObjectTag::TildeTorsion),
    }
}

pub fn enumerate(args: &SpaceArgs, format: Format) -> Result<Outcome, Failure> {
    let (c, _) = load(args)?;
    let summary = format!("{} {}: {} objects", c.space, c.variant_name(), c.len());
    let payload = match format {
        Format::Json => json(&EnumeratePayload {
            schema_version: SCHEMA_VERSION,
            command: "enumerate",
            count: c.len(),
            counts: counts(&c),
            collection: c.to_json(),
        }),
        Format::Csv => csv_rows(
            &["order_index", "tag", "l", "E", "divisor", "a", "b"],
            c.objects.iter().enumerate().map(|(i, o)| {
                let tag = format!("{:?}", o.tag());
                match *o {
                    CollectionObject::BoundaryAB { side, a, b } => {
                        vec![
                            i.to_string(),
                            tag,
                            String::new(),
                            String::new(),
                            set_string(side),
                            a.to_string(),
                            b.to_string(),
                        ]
                    }
                    _ => {
                        let x = o.label().expect("labelled object");
                        vec![
                            i.to_string(),
                            tag,
                            x.l.to_string(),
                            set_string(x.set),
                            String::new(),
                            String::new(),
                            String::new(),
                        ]
                    }
                }
            }),
        ),
        Format::Text => {
            let mut s = format!("{summary}\n");
            for (i, o) in c.objects.iter().enumerate() {
                let _ = writeln!(s, "{i:4}  {o}");
            }
            s
        }
    };
    Ok(Outcome {
        payload,
        summary,
        ok: true,
    })
}

#[derive(Serialize)]
struct VerifyPayload<'a> {
    schema_version: u32,
    command: &'static str,
    ok: bool,
    /// Joint window of the bundle part, when it has bundles.
    bundle_window: Option<&'a WindowReport>,
    first_failure: Option<&'a PairVerdict>,
    report: &'a VerificationReport,
}

/// The bundle part must fit one window whenever the unmodified collection's
/// does; a failure there is reported with its stratum.
fn bundle_window(c: &Collection) -> Result<Option<WindowReport>, Failure> {
    let labels = c.labels(ObjectTag::Bundle);
    if labels.is_empty() {
        return Ok(None);
    }
    let problem = GitProblem::recipe(c.space.p, c.space.q)?;
    Ok(Some(window_feasible(&labels, &problem)))
}

pub fn verify(args: &SpaceArgs, format: Format) -> Result<Outcome, Failure> {
    let (c, _) = load(args)?;
    let baseline_window = if args.inject.is_empty() {
        None
    } else {
        bundle_window(&enumerate_space(c.space, c.variant)?)?
    };
    let window = bundle_window(&c)?;
    let window_expected = match (&baseline_window, &window) {
        (Some(b), _) => b.feasible,
        (None, Some(w)) => w.feasible,
        (None, None) => false,
    };
    let window_failed = window_expected && window.as_ref().is_some_and(|w| !w.feasible);
    let report = Verifier::new(c)?.run();
    let tilde_only_skips = report
        .verdicts
        .iter()
        .filter(|v| v.required && v.status == Status::Skipped)
        .all(|v| v.source_label.starts_with("T~") || v.target_label.starts_with("T~"));
    let s = &report.summary;
    let ok = s.verified_part_exceptional && s.order_valid && tilde_only_skips && !window_failed;
    let first_failure = report
        .verdicts
        .iter()
        .find(|v| v.required && (v.is_failure() || v.status == Status::MethodInapplicable));
    let mut summary = format!(
        "{} {}: {} objects, {} required pairs, {} ok, {} failed, {} inapplicable, {} skipped; exceptional={} strong={}",
        report.space, report.variant, s.objects, s.required, s.required_ok, s.failed, s.inapplicable, s.skipped, s.exceptional,
        s.strong_bundle_part
    );
    if let Some(w) = window.as_ref().filter(|_| window_failed) {
        let st = w.witness.as_ref().expect("infeasible window has a witness");
        let _ = write!(
            summary,
            "; window fails on stratum {:?} (k={})",
            bits::indices(st.set),
            bits::card(st.set)
        );
    }
    if let Some(v) = first_failure {
        let _ = write!(
            summary,
            "; first failure RHom({}, {}) = {:?}",
            v.source_label, v.target_label, v.status
        );
    }
    let payload = match format {
        Format::Json => json(&VerifyPayload {
            schema_version: SCHEMA_VERSION,
            command: "verify",
            ok,
            bundle_window: window.as_ref(),
            first_failure,
            report: &report,
        }),
        Format::Csv => report.to_csv(),
        Format::Text => format!("{summary}\n"),
    };
    Ok(Outcome {
        payload,
        summary,
        ok,
    })
}

#[derive(Serialize)]
struct RankPayload {
    schema_version: u32,
    command: &'static str,
    selector: String,
    weights: Vec<String>,
    rank: u64,
    collection_length: Option<usize>,
    concordant: Option<bool>,
}

pub fn rank(args: &RankArgs, format: Format) -> Result<Outcome, Failure> {
    let (selector, weights, length) = match (args.n, args.p, &args.weights) {
        (Some(n), None, None) => {
            let w = HassettWeights::new(vec![BigRational::from_integer(1.into()); n], true)?;
            (format!("n={n}"), w, None)
        }
        (None, Some(p), None) => {
            let q = args.q.unwrap_or(0);
            let space = Space::new(p, q)?;
            let len = enumerate_space(space, variant(args.variant.as_ref())?)?.len();
            (format!("p={p},q={q}"), mpq_weights(p, q)?, Some(len))
        }
        (None, None, Some(list)) => {
            let w = list
                .split(',')
                .map(|x| {
                    BigRational::from_str(x.trim())
                        .map_err(|_| Failure::Usage(format!("bad weight `{x}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (
                format!("weights={list}"),
                HassettWeights::new(w, true)?,
                None,
            )
        }
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --n, --p/--q, --weights".into(),
            ))
        }
    };
    let rank = rank_hassett(&weights)?;
    let rank = excoll::ktheory::rank_u64(&rank)
        .ok_or_else(|| Failure::Usage("rank exceeds 64 bits".into()))?;
    let concordant = length.map(|l| l as u64 == rank);
    let ok = concordant.unwrap_or(true);
    let summary = match length {
        Some(l) => format!("{selector}: rank {rank}, collection length {l}"),
        None => format!("{selector}: rank {rank}"),
    };
    let weight_strings: Vec<String> = weights.weights.iter().map(|w| w.to_string()).collect();
    let payload = match format {
        Format::Json => json(&RankPayload {
            schema_version: SCHEMA_VERSION,
            command: "rank",
            selector,
            weights: weight_strings,
            rank,
            collection_length: length,
            concordant,
        }),
        Format::Csv => csv_rows(
            &["selector", "rank", "collection_length", "concordant"],
            [vec![
                selector,
                rank.to_string(),
                length.map(|l| l.to_string()).unwrap_or_default(),
                concordant.map(|c| c.to_string()).unwrap_or_default(),
            ]],
        ),
        Format::Text => format!("{summary}\n"),
    };
    Ok(Outcome {
        payload,
        summary,
        ok,
    })
}

#[derive(Serialize)]
struct OrbitsPayload {
    schema_version: u32,
    command: &'static str,
    orbits: Vec<Orbit>,
    decomposition: Decomposition,
}

pub fn orbits(args: &SpaceArgs, format: Format) -> Result<Outcome, Failure> {
    let (c, _) = load(args)?;
    let orbits = orbit_list(&c)?;
    let d = decompose(&c)?;
    let ok = d.dimension_matches();
    let terms: Vec<String> = d
        .constituents
        .iter()
        .map(|x| format!("{}·[{}]", x.multiplicity, x.key))
        .collect();
    let summary = format!(
        "{} {}: {} objects, {} orbits, decomposition {}",
        c.space,
        c.variant_name(),
        c.len(),
        orbits.len(),
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    );
    let payload = match format {
        Format::Json => json(&OrbitsPayload {
            schema_version: SCHEMA_VERSION,
            command: "orbits",
            orbits,
            decomposition: d,
        }),
        Format::Csv => csv_rows(
            &["constituent", "multiplicity", "dimension"],
            d.constituents.iter().map(|x| {
                vec![
                    x.key.clone(),
                    x.multiplicity.to_string(),
                    x.dimension.to_string(),
                ]
            }),
        ),
        Format::Text => {
            let mut s = format!("{summary}\n");
            for o in &orbits {
                let _ = writeln!(
                    s,
                    "  orbit of {} (index {}): size {}, stabilizer {}",
                    o.representative, o.representative_index, o.size, o.stabilizer_order
                );
            }
            s
        }
    };
    Ok(Outcome {
        payload,
        summary,
        ok,
    })
}

#[derive(Serialize)]
struct CertDigest {
    root: PairLE,
    nodes: usize,
    leaves: usize,
    ok: bool,
    witness: Option<(usize, Option<usize>)>,
    reason: Option<String>,
}

#[derive(Serialize)]
struct CertifyPayload<'a> {
    schema_version: u32,
    command: &'static str,
    ok: bool,
    summary: &'a CertifySummary,
    roots: Vec<CertDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificates: Option<&'a [GenerationCertificate]>,
}

/// Corrupts the first child of the first move in place.
fn tamper(certs: &mut [GenerationCertificate]) -> bool {
    for cert in certs {
        if let Some(mv) = cert.nodes.first_mut().and_then(|n| n.game_move.as_mut()) {
            if let Some(t) = mv.children.first_mut() {
                t.label = PairLE {
                    l: t.label.l + 2,
                    set: t.label.set,
                };
                return true;
            }
        }
    }
    false
}

pub fn certify(args: &CertifyArgs, format: Format) -> Result<Outcome, Failure> {
    let (c, tamper_requested) = load(&args.space)?;
    if c.len() != enumerate_space(c.space, c.variant)?.len() {
        return Err(Failure::Usage(
            "certify accepts only `tamper` injections".into(),
        ));
    }
    let (summary_data, mut certs) = certify_all(c.space, c.variant, args.lmax)?;
    if tamper_requested && !tamper(&mut certs) {
        return Err(Failure::Usage(
            "no certificate has a move to tamper with".into(),
        ));
    }
    let checks: Vec<_> = certs.iter().map(check_certificate).collect();
    let roots: Vec<CertDigest> = certs
        .iter()
        .zip(&checks)
        .map(|(cert, chk)| CertDigest {
            root: cert.root,
            nodes: cert.nodes.len(),
            leaves: cert.leaves.len(),
            ok: chk.ok,
            witness: chk.witness,
            reason: chk.reason.clone(),
        })
        .collect();
    let ok = summary_data.ok() && checks.iter().all(|x| x.ok);
    let bad = roots.iter().filter(|r| !r.ok).count() + summary_data.failures.len();
    let mut summary = format!(
        "{} {}: {} roots with l <= {}, {} certified, {} nodes, {} invalid",
        c.space,
        c.variant_name(),
        summary_data.roots,
        args.lmax,
        summary_data.certified,
        summary_data.total_nodes,
        bad
    );
    if let Some(r) = roots.iter().find(|r| !r.ok) {
        let _ = write!(
            summary,
            "; first invalid root {} at {:?}: {}",
            r.root,
            r.witness,
            r.reason.as_deref().unwrap_or("")
        );
    }
    let payload = match format {
        Format::Json => json(&CertifyPayload {
            schema_version: SCHEMA_VERSION,
            command: "certify",
            ok,
            summary: &summary_data,
            roots,
            certificates: args.certificates.then_some(certs.as_slice()),
        }),
        Format::Csv => csv_rows(
            &["l", "E", "nodes", "leaves", "ok"],
            roots.iter().map(|r| {
                vec![
                    r.root.l.to_string(),
                    set_string(r.root.set),
                    r.nodes.to_string(),
                    r.leaves.to_string(),
                    r.ok.to_string(),
                ]
            }),
        ),
        Format::Text => format!("{summary}\n"),
    };
    Ok(Outcome {
        payload,
        summary,
        ok,
    })
}
