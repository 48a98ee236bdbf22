//! Parsing and application of `--inject` debug flags.

use crate::Failure;
use excoll::bits;
use excoll::cohomology::PairLE;
use excoll::enumerate::{Collection, CollectionObject};

/// One parsed injection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Injection {
    Add(CollectionObject),
    Drop(usize),
    Tamper,
}

fn parse_set(s: &str, n: usize) -> Result<bits::Mask, Failure> {
    if s == "empty" || s.is_empty() {
        return Ok(0);
    }
    let mut ix = Vec::new();
    for part in s.split(',') {
        let i: usize = part
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad marking index `{part}`")))?;
        if i >= n {
            return Err(Failure::Usage(format!(
                "marking {i} out of range for {n} markings"
            )));
        }
        ix.push(i);
    }
    Ok(bits::from_indices(&ix))
}

pub fn parse(spec: &str, n: usize) -> Result<Injection, Failure> {
    let fields: Vec<&str> = spec.split(':').collect();
    match fields.as_slice() {
        ["tamper"] => Ok(Injection::Tamper),
        ["drop", idx] => idx
            .parse()
            .map(Injection::Drop)
            .map_err(|_| Failure::Usage(format!("bad index in `{spec}`"))),
        [kind @ ("F" | "T"), l, set] => {
            let l: i64 = l
                .parse()
                .map_err(|_| Failure::Usage(format!("bad l in `{spec}`")))?;
            let label = PairLE::new(l, parse_set(set, n)?)?;
            Ok(Injection::Add(if *kind == "F" {
                CollectionObject::Bundle(label)
            } else {
                CollectionObject::TorsionZ(label)
            }))
        }
        _ => Err(Failure::Usage(format!("unrecognized injection `{spec}`"))),
    }
}

/// Applies additions and removals; returns whether `tamper` was requested.
/// Drops refer to indices of the unmodified collection.
pub fn apply(collection: &mut Collection, specs: &[String]) -> Result<bool, Failure> {
    let n = collection.space.n();
    let parsed = specs
        .iter()
        .map(|s| parse(s, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut drops: Vec<usize> = parsed
        .iter()
        .filter_map(|x| match x {
            Injection::Drop(i) => Some(*i),
            _ => None,
        })
        .collect();
    drops.sort_unstable();
    drops.dedup();
    for &i in drops.iter().rev() {
        if i >= collection.len() {
            return Err(Failure::Usage(format!(
                "drop index {i} out of range ({} objects)",
                collection.len()
            )));
        }
        collection.objects.remove(i);
    }
    for x in &parsed {
        if let Injection::Add(obj) = x {
            collection.inject(*obj)?;
        }
    }
    Ok(parsed.contains(&Injection::Tamper))
}
