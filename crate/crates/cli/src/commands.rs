//! The commands behind each subcommand. Every function returns the text to
//! emit; nothing here touches the file system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context};
use gwflop::chow::RingElement;
use gwflop::degeneration::{
    enumerate_blowup_triples, enumerate_conifold_triples, vdim_additivity, vdim_conifold_form, vdim_flop_form,
    Dimensions, EnumeratedTriple, EnumerationCaps, Side,
};
use gwflop::novikov::{Expansion, NovikovElement};
use gwflop::rational::{ratio, to_pq};
use gwflop::transform::{
    flop_involution_check, flop_transform, multiple_cover_tail, transition_threepoint_check, transition_transform,
    wallcrossing_check, GwKey, GwTable,
};
use gwflop::{CurveClass, CurveClassLattice};
use num_traits::Zero;

use crate::geometry::Geometry;
use crate::table::write_table;
use crate::text::{arity, body, coords, fail, int, show_coords, ParseError};

/// Provenance recorded on tables produced by the transition transform.
pub const TRANSITION_PROVENANCE: &str = "extremal-transition";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegenerationKind {
    Blowup,
    Conifold,
}

fn block_name(t: &EnumeratedTriple) -> &'static str {
    match t.block {
        gwflop::degeneration::Block::TwoSided => "two-sided",
        gwflop::degeneration::Block::FirstOnly => "first-only",
        gwflop::degeneration::Block::SecondOnly => "second-only",
    }
}

fn sides_of(geometry: &Geometry, kind: DegenerationKind) -> anyhow::Result<([&Side; 2], &CurveClassLattice)> {
    Ok(match kind {
        DegenerationKind::Blowup => {
            let b = geometry.blowup.as_ref().ok_or_else(|| anyhow!("the geometry declares no blowup"))?;
            (b.sides(), b.total())
        }
        DegenerationKind::Conifold => {
            let c = geometry.conifold.as_ref().ok_or_else(|| anyhow!("the geometry declares no conifold"))?;
            (c.sides(), c.total())
        }
    })
}

fn triples(
    geometry: &Geometry,
    kind: DegenerationKind,
    genus: u32,
    points: usize,
    beta: &CurveClass,
    caps: &EnumerationCaps,
) -> anyhow::Result<Vec<EnumeratedTriple>> {
    Ok(match kind {
        DegenerationKind::Blowup => {
            enumerate_blowup_triples(genus, points, beta, geometry.blowup.as_ref().expect("checked"), caps)?
        }
        DegenerationKind::Conifold => {
            enumerate_conifold_triples(genus, points, beta, geometry.conifold.as_ref().expect("checked"), caps)?
        }
    })
}

/// Lists the admissible triples of `(genus, points, beta)`.
pub fn enumerate(
    geometry: &Geometry,
    kind: DegenerationKind,
    genus: u32,
    points: usize,
    beta: &[i64],
    caps: &EnumerationCaps,
) -> anyhow::Result<String> {
    let (sides, total) = sides_of(geometry, kind)?;
    let beta = total.class(beta.to_vec())?;
    let mut s = String::new();
    let name = if kind == DegenerationKind::Blowup { "blowup" } else { "conifold" };
    let _ = writeln!(s, "gwflop-triples v1\ndegeneration {name}");
    let _ = writeln!(s, "target {} {} {}", genus, points, show_coords(beta.coords()));
    if !total.is_effective(&beta)? {
        let _ = writeln!(s, "note class {beta} is not effective\ncount 0");
        return Ok(s);
    }
    let found = triples(geometry, kind, genus, points, &beta, caps)?;
    for t in &found {
        let (first, second) = (t.triple.first(), t.triple.second());
        let d = |side: &Side, g: &gwflop::degeneration::AdmissibleGraph| -> anyhow::Result<i64> {
            match g.class() {
                Some(c) => Ok(side.lattice.pair(&side.divisor, &c)?),
                None => Ok(0),
            }
        };
        let _ = writeln!(
            s,
            "triple {} | block {} | genus {} | d {} {} | m {} | eq {}",
            t.triple,
            block_name(t),
            t.triple.genus(),
            d(sides[0], first)?,
            d(sides[1], second)?,
            t.triple.multiplicity(),
            t.eq_count
        );
    }
    let _ = writeln!(s, "count {}", found.len());
    Ok(s)
}

/// One line per entry a transformation could not carry over.
pub type Rejections = Vec<String>;

fn rejection(key: &GwKey, reason: &dyn std::fmt::Display) -> String {
    format!(
        "rejected {} {} {} {}: {reason}",
        key.genus,
        key.points(),
        show_coords(key.beta.coords()),
        crate::text::show_labels(key.labels())
    )
}

pub fn transform_flop(geometry: &Geometry, table: &GwTable) -> anyhow::Result<(String, Rejections)> {
    let out = flop_transform(table, geometry.flop()?)?;
    let rejected = out.rejected.iter().map(|(k, e)| rejection(k, e)).collect();
    Ok((write_table(&out.table), rejected))
}

/// Transports a table on `X` to `X''`. With `beta`, only that class is
/// computed; otherwise every class reached by an entry of the table.
pub fn transform_transition(
    geometry: &Geometry,
    table: &GwTable,
    beta: Option<&[i64]>,
) -> anyhow::Result<(String, Rejections)> {
    let t = geometry.transition()?;
    let target = t.phi_e().target().clone();
    // Labels on X'' keyed by their counterparts on X.
    let mut back: BTreeMap<&str, &str> = BTreeMap::new();
    for class in t.target_insertions().classes() {
        if let Some(image) = &class.image {
            back.insert(image.as_str(), class.label.as_str());
        }
    }
    let wanted = match beta {
        Some(b) => {
            let b = target.class(b.to_vec())?;
            if b.is_zero() {
                bail!("the transition transform needs a nonzero class");
            }
            Some(b)
        }
        None => None,
    };
    let mut rejected = Vec::new();
    let mut keys = BTreeSet::new();
    for key in table.entries().keys() {
        let image = t.phi_e().apply(&key.beta)?;
        if wanted.as_ref().is_some_and(|w| *w != image) {
            continue;
        }
        if image.is_zero() {
            rejected.push(rejection(key, &"class is contracted to 0"));
            continue;
        }
        let labels: Option<Vec<String>> =
            key.labels().iter().map(|l| back.get(l.as_str()).map(|s| s.to_string())).collect();
        match labels {
            Some(labels) => {
                keys.insert((key.genus, image, labels));
            }
            None => rejected.push(rejection(key, &"an insertion has no counterpart on the smoothing")),
        }
    }
    let mut out = GwTable::new(target);
    out.provenance = table.provenance.clone();
    out.provenance.push(TRANSITION_PROVENANCE.to_string());
    for (genus, b, labels) in keys {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let value = transition_transform(table, genus, &b, &refs, t)?;
        if !value.is_zero() {
            out.insert(GwKey::new(genus, b, labels), value)?;
        }
    }
    Ok((write_table(&out), rejected))
}

/// The identities `check` can verify.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    WallCrossing([String; 3]),
    Transition([String; 3]),
    Vdim { kind: DegenerationKind, genus: u32, points: usize, beta: Vec<i64> },
    Truncation { labels: [String; 3], multiples: u32 },
    Involution(String),
}

pub const CHECKS_HEADER: &str = "gwflop-checks v1";

pub fn parse_checks(text: &str) -> Result<Vec<Check>, ParseError> {
    let three = |w: &[&str]| [w[1].to_string(), w[2].to_string(), w[3].to_string()];
    body(text, CHECKS_HEADER)?
        .into_iter()
        .map(|(l, w)| {
            Ok(match w[0] {
                "wallcrossing" => {
                    arity(l, &w, 4)?;
                    Check::WallCrossing(three(&w))
                }
                "transition" => {
                    arity(l, &w, 4)?;
                    Check::Transition(three(&w))
                }
                "vdim" => {
                    arity(l, &w, 5)?;
                    let kind = match w[1] {
                        "blowup" => DegenerationKind::Blowup,
                        "conifold" => DegenerationKind::Conifold,
                        other => return fail(l, format!("unknown degeneration `{other}`")),
                    };
                    Check::Vdim { kind, genus: int(l, w[2])?, points: int(l, w[3])?, beta: coords(l, w[4])? }
                }
                "truncation" => {
                    arity(l, &w, 5)?;
                    Check::Truncation { labels: three(&w), multiples: int(l, w[4])? }
                }
                "involution" => {
                    arity(l, &w, 2)?;
                    Check::Involution(w[1].to_string())
                }
                other => fail(l, format!("unknown check `{other}`"))?,
            })
        })
        .collect()
}

pub struct Report {
    pub text: String,
    pub failed: usize,
}

struct Outcome {
    title: String,
    pass: bool,
    details: Vec<(String, String)>,
}

fn table_on<'a>(tables: &'a BTreeMap<String, GwTable>, lattice: &str) -> anyhow::Result<&'a GwTable> {
    tables.get(lattice).ok_or_else(|| anyhow!("no table on `{lattice}` was given"))
}

fn show_expansion(lattice: &CurveClassLattice, e: &Expansion) -> String {
    if e.is_empty() {
        return "0".into();
    }
    let mut terms: Vec<_> = e.iter().collect();
    terms.sort_by_key(|(b, _)| (lattice.degree(b), (*b).clone()));
    terms.into_iter().map(|(b, c)| format!("{} * q^{b}", to_pq(c))).collect::<Vec<_>>().join(" + ")
}

/// Runs each check and reports PASS or FAIL with both sides of the identity.
pub fn run_checks(
    geometry: &Geometry,
    tables: &BTreeMap<String, GwTable>,
    checks: &[Check],
    caps: &EnumerationCaps,
) -> anyhow::Result<Report> {
    let mut outcomes = Vec::new();
    for check in checks {
        outcomes.push(run_check(geometry, tables, check, caps).with_context(|| format!("{check:?}"))?);
    }
    let mut text = String::from("gwflop-check-report v1\n");
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    for o in &outcomes {
        let _ = writeln!(text, "{} {}", if o.pass { "PASS" } else { "FAIL" }, o.title);
        for (k, v) in &o.details {
            let _ = writeln!(text, "  {k}: {v}");
        }
    }
    let _ = writeln!(text, "summary {} checks, {} failed", outcomes.len(), failed);
    Ok(Report { text, failed })
}

fn run_check(
    geometry: &Geometry,
    tables: &BTreeMap<String, GwTable>,
    check: &Check,
    caps: &EnumerationCaps,
) -> anyhow::Result<Outcome> {
    Ok(match check {
        Check::WallCrossing(labels) => {
            let flop = geometry.flop()?;
            let x = table_on(tables, flop.source().name())?;
            let xp = table_on(tables, flop.target().name())?;
            let w = wallcrossing_check(x, xp, [&labels[0], &labels[1], &labels[2]], flop)?;
            Outcome {
                title: format!("wallcrossing {}", labels.join(",")),
                pass: w.holds(),
                details: vec![
                    ("transported".into(), w.transported.to_string()),
                    ("flopped".into(), w.flopped.to_string()),
                    (
                        "discrepancy".into(),
                        format!("{} expected {}", to_pq(&w.discrepancy), to_pq(&w.expected_discrepancy)),
                    ),
                ],
            }
        }
        Check::Transition(labels) => {
            let t = geometry.transition()?;
            let x = table_on(tables, t.phi_e().source().name())?;
            let xpp = table_on(tables, t.phi_e().target().name())?;
            let c = transition_threepoint_check(x, xpp, [&labels[0], &labels[1], &labels[2]], t)?;
            Outcome {
                title: format!("transition {}", labels.join(",")),
                pass: c.holds,
                details: vec![
                    ("transported".into(), c.transported.to_string()),
                    ("target".into(), c.target.to_string()),
                ],
            }
        }
        Check::Vdim { kind, genus, points, beta } => {
            let (sides, total) = sides_of(geometry, *kind)?;
            let class = total.class(beta.clone())?;
            let k = total.canonical_pair(&class)?;
            let found = triples(geometry, *kind, *genus, *points, &class, caps)?;
            let mut bad = None;
            for t in &found {
                let (l, r) = vdim_additivity(&t.triple, k, sides, &Dimensions::default())?;
                let (sl, sr) = match kind {
                    DegenerationKind::Blowup => {
                        vdim_flop_form(&t.triple, &class, geometry.blowup.as_ref().expect("checked"))?
                    }
                    DegenerationKind::Conifold => {
                        vdim_conifold_form(&t.triple, &class, geometry.conifold.as_ref().expect("checked"))?
                    }
                };
                if !(l == r && sl == sr && l == sl) && bad.is_none() {
                    bad = Some(format!("{}: general {l} = {r}, specialised {sl} = {sr}", t.triple));
                }
            }
            let name = if *kind == DegenerationKind::Blowup { "blowup" } else { "conifold" };
            let mut details = vec![("triples".into(), found.len().to_string())];
            if let Some(b) = &bad {
                details.push(("mismatch".into(), b.clone()));
            }
            Outcome {
                title: format!("vdim {name} {genus} {points} {}", show_coords(beta)),
                pass: bad.is_none(),
                details,
            }
        }
        Check::Truncation { labels, multiples } => {
            let flop = geometry.flop()?;
            let table = table_on(tables, flop.source().name())?;
            if !table.multiple_cover {
                bail!("the table on `{}` does not follow the multiple-cover rule", table.lattice().name());
            }
            let lattice = table.lattice();
            let curve = flop.curve();
            let mut a = [0i64; 3];
            for (slot, label) in a.iter_mut().zip(labels) {
                *slot = flop.insertions().class(label)?.c_pairing;
            }
            let cutoff = i64::from(*multiples) * lattice.degree(curve);
            let tail = multiple_cover_tail(lattice, a, curve)?.truncate(lattice.grading(), cutoff)?;
            // Divisor axiom: Ψ_(0,3;mC)(α) = (C·α1)(C·α2)(C·α3) m^3 Ψ_(0,0;mC).
            let mut sum = Expansion::new();
            for m in 1..=i64::from(*multiples) {
                let class = curve.scale(m);
                let key = GwKey::new(0, class.clone(), Vec::new());
                let psi = match table.entries().get(&key) {
                    Some(v) => v.clone(),
                    None => ratio(1, m * m * m),
                };
                let c = psi * ratio(a[0] * a[1] * a[2] * m * m * m, 1);
                if !c.is_zero() {
                    sum.insert(class, c);
                }
            }
            Outcome {
                title: format!("truncation {} {multiples}", labels.join(",")),
                pass: tail == sum,
                details: vec![
                    ("tail".into(), show_expansion(lattice, &tail)),
                    ("covers".into(), show_expansion(lattice, &sum)),
                ],
            }
        }
        Check::Involution(lattice) => {
            let flop = geometry.flop()?;
            let table = table_on(tables, lattice)?;
            Outcome {
                title: format!("involution {lattice}"),
                pass: flop_involution_check(table, flop)?,
                details: vec![("entries".into(), table.len().to_string())],
            }
        }
    })
}

pub fn ring_normal_form(geometry: &Geometry, ring: &str, expr: &str) -> anyhow::Result<String> {
    let element = RingElement::parse(geometry.ring(ring)?, expr)?;
    Ok(format!("{element}\n"))
}

/// Expands a series written in the canonical Novikov form up to `cutoff`.
pub fn series_truncate(
    geometry: &Geometry,
    lattice: &str,
    series: &str,
    cutoff: i64,
    ample: Option<&[i64]>,
) -> anyhow::Result<String> {
    let lattice = geometry.lattice(lattice)?;
    let element = NovikovElement::parse(lattice, series)?;
    let ample = ample.unwrap_or(lattice.grading());
    let e = element.truncate(ample, cutoff)?;
    let mut s = String::new();
    let _ =
        writeln!(s, "gwflop-expansion v1\nlattice {}\nample {}\ncutoff {cutoff}", lattice.name(), show_coords(ample));
    let mut terms: Vec<_> = e.iter().collect();
    terms.sort_by_key(|(b, _)| (b.dot(ample), (*b).clone()));
    for (b, c) in terms {
        let _ = writeln!(s, "term {} {}", show_coords(b.coords()), to_pq(c));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_file() {
        let text = "gwflop-checks v1\nwallcrossing H H H\nvdim conifold 0 1 1\ntruncation H H H 5\ninvolution X\n";
        let checks = parse_checks(text).unwrap();
        assert_eq!(checks.len(), 4);
        assert_eq!(checks[3], Check::Involution("X".into()));
        assert_eq!(parse_checks("gwflop-checks v1\nvdim sideways 0 1 1\n").unwrap_err().line, 2);
        assert!(parse_checks("gwflop-checks v1\n").unwrap().is_empty());
    }
}
