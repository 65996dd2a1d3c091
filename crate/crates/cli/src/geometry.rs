//! Geometry description files.
//!
//! ```text
//! gwflop-geometry v1
//! lattice X                  # one block per lattice
//! generators C L
//! effective 1,0 0,1
//! divisor H 1,1
//! canonical 0,-1
//! end
//! map p1 Xt X                # name, source, target; one row per target coordinate
//! row 1,0,0
//! row 0,0,1
//! end
//! ring Y
//! generators v:1 w:1
//! top 3
//! rule w^3 = 2 * v*w^2
//! integral v*w^2 1
//! end
//! insertions X
//! class H 1 1 Hp             # label, codimension, C-pairing, optional image
//! product H H H 1
//! end
//! flop
//! down p1
//! flopped-down p1p
//! divisor E
//! fibers 0,1,0 1,0,0
//! curves 1,0 1,0
//! registries X Xp
//! end
//! transition
//! phi-e phi_e
//! lift p1
//! contraction pc
//! divisor E
//! curve 1,0
//! registries X Xpp
//! end
//! blowup
//! projections p1 p2
//! divisors E E
//! fibers 0,1,0 0,1
//! end
//! conifold
//! contraction pc
//! divisor E
//! rulings 1,0,0 0,1,0
//! quadric Q E
//! line 1
//! end
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use gwflop::chow::{Polynomial, RingPresentation};
use gwflop::degeneration::{BlowupDegeneration, ConifoldDegeneration};
use gwflop::rational::to_pq;
use gwflop::transform::{FlopGeometry, InsertionClass, InsertionRegistry, TransitionGeometry};
use gwflop::{CurveClass, CurveClassLattice, LatticeMap, Rational};

use crate::text::{arity, body, coords, fail, int, rational, show_coords, ParseError};

pub const HEADER: &str = "gwflop-geometry v1";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LatticeSpec {
    pub name: String,
    pub generators: Vec<String>,
    pub effective: Vec<Vec<i64>>,
    pub divisors: Vec<(String, Vec<i64>)>,
    pub canonical: Vec<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MapSpec {
    pub name: String,
    pub source: String,
    pub target: String,
    pub rows: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingSpec {
    pub name: String,
    pub generators: Vec<(String, u32)>,
    pub top: u32,
    /// `lhs = rhs` as written.
    pub rules: Vec<(String, String)>,
    pub integrals: Vec<(String, Rational)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegistrySpec {
    pub lattice: String,
    pub classes: Vec<InsertionClass>,
    pub products: Vec<([String; 3], Rational)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlopSpec {
    pub down: String,
    pub flopped_down: String,
    pub divisor: String,
    pub fibers: [Vec<i64>; 2],
    pub curves: [Vec<i64>; 2],
    pub registries: [String; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionSpec {
    pub phi_e: String,
    pub lift: String,
    pub contraction: String,
    pub divisor: String,
    pub curve: Vec<i64>,
    pub registries: [String; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlowupSpec {
    pub projections: [String; 2],
    pub divisors: [String; 2],
    pub fibers: [Vec<i64>; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConifoldSpec {
    pub contraction: String,
    pub divisor: String,
    pub rulings: [Vec<i64>; 2],
    pub quadric: String,
    pub quadric_divisor: String,
    pub line: Vec<i64>,
}

/// The parsed contents of a geometry file, before validation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeometryFile {
    pub lattices: Vec<LatticeSpec>,
    pub maps: Vec<MapSpec>,
    pub rings: Vec<RingSpec>,
    pub registries: Vec<RegistrySpec>,
    pub flop: Option<FlopSpec>,
    pub transition: Option<TransitionSpec>,
    pub blowup: Option<BlowupSpec>,
    pub conifold: Option<ConifoldSpec>,
}

fn pair<T>(line: usize, words: &[&str], f: impl Fn(&str) -> Result<T, ParseError>) -> Result<[T; 2], ParseError> {
    arity(line, words, 3)?;
    Ok([f(words[1])?, f(words[2])?])
}

fn name(words: &[&str], line: usize) -> Result<String, ParseError> {
    arity(line, words, 2)?;
    Ok(words[1].to_string())
}

fn missing<T>(section: &str, line: usize, field: &str) -> Result<T, ParseError> {
    fail(line, format!("`{section}` block lacks `{field}`"))
}

impl GeometryFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let lines = body(text, HEADER)?;
        let mut out = GeometryFile::default();
        let mut i = 0;
        while i < lines.len() {
            let (start, head) = &lines[i];
            let start = *start;
            let end = lines[i..]
                .iter()
                .position(|(_, w)| w == &["end"])
                .map(|p| i + p)
                .ok_or_else(|| ParseError { line: start, message: format!("`{}` block is not closed", head[0]) })?;
            let block = &lines[i + 1..end];
            match head[0] {
                "lattice" => out.lattices.push(parse_lattice(name(head, start)?, block)?),
                "map" => {
                    arity(start, head, 4)?;
                    let rows = block
                        .iter()
                        .map(|(l, w)| match w.as_slice() {
                            ["row", r] => coords(*l, r),
                            _ => fail(*l, "expected `row`"),
                        })
                        .collect::<Result<_, _>>()?;
                    out.maps.push(MapSpec {
                        name: head[1].into(),
                        source: head[2].into(),
                        target: head[3].into(),
                        rows,
                    });
                }
                "ring" => out.rings.push(parse_ring(name(head, start)?, block)?),
                "insertions" => out.registries.push(parse_registry(name(head, start)?, block)?),
                "flop" => {
                    arity(start, head, 1)?;
                    out.flop = Some(parse_flop(start, block)?);
                }
                "transition" => {
                    arity(start, head, 1)?;
                    out.transition = Some(parse_transition(start, block)?);
                }
                "blowup" => {
                    arity(start, head, 1)?;
                    out.blowup = Some(parse_blowup(start, block)?);
                }
                "conifold" => {
                    arity(start, head, 1)?;
                    out.conifold = Some(parse_conifold(start, block)?);
                }
                other => return fail(start, format!("unknown block `{other}`")),
            }
            i = end + 1;
        }
        Ok(out)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}");
        for l in &self.lattices {
            let _ = writeln!(s, "lattice {}", l.name);
            let _ = writeln!(s, "generators {}", l.generators.join(" "));
            if !l.effective.is_empty() {
                let eff: Vec<String> = l.effective.iter().map(|c| show_coords(c)).collect();
                let _ = writeln!(s, "effective {}", eff.join(" "));
            }
            for (d, f) in &l.divisors {
                let _ = writeln!(s, "divisor {d} {}", show_coords(f));
            }
            let _ = writeln!(s, "canonical {}\nend", show_coords(&l.canonical));
        }
        for m in &self.maps {
            let _ = writeln!(s, "map {} {} {}", m.name, m.source, m.target);
            for r in &m.rows {
                let _ = writeln!(s, "row {}", show_coords(r));
            }
            let _ = writeln!(s, "end");
        }
        for r in &self.rings {
            let gens: Vec<String> = r.generators.iter().map(|(g, d)| format!("{g}:{d}")).collect();
            let _ = writeln!(s, "ring {}\ngenerators {}\ntop {}", r.name, gens.join(" "), r.top);
            for (lhs, rhs) in &r.rules {
                let _ = writeln!(s, "rule {lhs} = {rhs}");
            }
            for (m, v) in &r.integrals {
                let _ = writeln!(s, "integral {m} {}", to_pq(v));
            }
            let _ = writeln!(s, "end");
        }
        for r in &self.registries {
            let _ = writeln!(s, "insertions {}", r.lattice);
            for c in &r.classes {
                let _ = write!(s, "class {} {} {}", c.label, c.codim, c.c_pairing);
                if let Some(image) = &c.image {
                    let _ = write!(s, " {image}");
                }
                let _ = writeln!(s);
            }
            for ([a, b, c], v) in &r.products {
                let _ = writeln!(s, "product {a} {b} {c} {}", to_pq(v));
            }
            let _ = writeln!(s, "end");
        }
        if let Some(f) = &self.flop {
            let _ = writeln!(
                s,
                "flop\ndown {}\nflopped-down {}\ndivisor {}\nfibers {} {}\ncurves {} {}\nregistries {} {}\nend",
                f.down,
                f.flopped_down,
                f.divisor,
                show_coords(&f.fibers[0]),
                show_coords(&f.fibers[1]),
                show_coords(&f.curves[0]),
                show_coords(&f.curves[1]),
                f.registries[0],
                f.registries[1],
            );
        }
        if let Some(t) = &self.transition {
            let _ = writeln!(
                s,
                "transition\nphi-e {}\nlift {}\ncontraction {}\ndivisor {}\ncurve {}\nregistries {} {}\nend",
                t.phi_e,
                t.lift,
                t.contraction,
                t.divisor,
                show_coords(&t.curve),
                t.registries[0],
                t.registries[1],
            );
        }
        if let Some(b) = &self.blowup {
            let _ = writeln!(
                s,
                "blowup\nprojections {} {}\ndivisors {} {}\nfibers {} {}\nend",
                b.projections[0],
                b.projections[1],
                b.divisors[0],
                b.divisors[1],
                show_coords(&b.fibers[0]),
                show_coords(&b.fibers[1]),
            );
        }
        if let Some(c) = &self.conifold {
            let _ = writeln!(
                s,
                "conifold\ncontraction {}\ndivisor {}\nrulings {} {}\nquadric {} {}\nline {}\nend",
                c.contraction,
                c.divisor,
                show_coords(&c.rulings[0]),
                show_coords(&c.rulings[1]),
                c.quadric,
                c.quadric_divisor,
                show_coords(&c.line),
            );
        }
        s
    }
}

type Block<'a> = [(usize, Vec<&'a str>)];

fn parse_lattice(name: String, block: &Block<'_>) -> Result<LatticeSpec, ParseError> {
    let mut out = LatticeSpec { name, ..Default::default() };
    for (l, w) in block {
        match w[0] {
            "generators" => out.generators = w[1..].iter().map(|s| s.to_string()).collect(),
            "effective" => out.effective = w[1..].iter().map(|c| coords(*l, c)).collect::<Result<_, _>>()?,
            "divisor" => {
                arity(*l, w, 3)?;
                out.divisors.push((w[1].into(), coords(*l, w[2])?));
            }
            "canonical" => {
                arity(*l, w, 2)?;
                out.canonical = coords(*l, w[1])?;
            }
            other => return fail(*l, format!("unknown lattice field `{other}`")),
        }
    }
    Ok(out)
}

fn parse_ring(name: String, block: &Block<'_>) -> Result<RingSpec, ParseError> {
    let mut out = RingSpec { name, ..Default::default() };
    for (l, w) in block {
        match w[0] {
            "generators" => {
                for g in &w[1..] {
                    let (n, d) = g
                        .split_once(':')
                        .ok_or_else(|| ParseError { line: *l, message: format!("generator `{g}` lacks `:degree`") })?;
                    out.generators.push((n.into(), int(*l, d)?));
                }
            }
            "top" => {
                arity(*l, w, 2)?;
                out.top = int(*l, w[1])?;
            }
            "rule" => {
                let rest = w[1..].join(" ");
                let (lhs, rhs) =
                    rest.split_once('=').ok_or_else(|| ParseError { line: *l, message: "rule lacks `=`".into() })?;
                out.rules.push((lhs.trim().into(), rhs.trim().into()));
            }
            "integral" => {
                arity(*l, w, 3)?;
                out.integrals.push((w[1].into(), rational(*l, w[2])?));
            }
            other => return fail(*l, format!("unknown ring field `{other}`")),
        }
    }
    Ok(out)
}

fn parse_registry(lattice: String, block: &Block<'_>) -> Result<RegistrySpec, ParseError> {
    let mut out = RegistrySpec { lattice, ..Default::default() };
    for (l, w) in block {
        match w[0] {
            "class" => {
                if !(4..=5).contains(&w.len()) {
                    return fail(*l, "`class` takes a label, codimension, C-pairing and optional image");
                }
                out.classes.push(InsertionClass {
                    label: w[1].into(),
                    codim: int(*l, w[2])?,
                    c_pairing: int(*l, w[3])?,
                    image: w.get(4).map(|s| s.to_string()),
                });
            }
            "product" => {
                arity(*l, w, 5)?;
                out.products.push(([w[1].into(), w[2].into(), w[3].into()], rational(*l, w[4])?));
            }
            other => return fail(*l, format!("unknown insertions field `{other}`")),
        }
    }
    Ok(out)
}

/// Collects `key value...` lines of a fixed-shape block.
fn fields<'a>(
    section: &str,
    block: &'a Block<'a>,
    allowed: &[&str],
) -> Result<BTreeMap<&'a str, (usize, &'a [&'a str])>, ParseError> {
    let mut out = BTreeMap::new();
    for (l, w) in block {
        if !allowed.contains(&w[0]) {
            return fail(*l, format!("unknown `{section}` field `{}`", w[0]));
        }
        if out.insert(w[0], (*l, w.as_slice())).is_some() {
            return fail(*l, format!("repeated `{section}` field `{}`", w[0]));
        }
    }
    Ok(out)
}

struct Fields<'a> {
    section: &'static str,
    start: usize,
    map: BTreeMap<&'a str, (usize, &'a [&'a str])>,
}

impl<'a> Fields<'a> {
    fn new(section: &'static str, start: usize, block: &'a Block<'a>, allowed: &[&str]) -> Result<Self, ParseError> {
        Ok(Fields { section, start, map: fields(section, block, allowed)? })
    }

    fn get(&self, key: &str) -> Result<(usize, &'a [&'a str]), ParseError> {
        match self.map.get(key) {
            Some(v) => Ok(*v),
            None => missing(self.section, self.start, key),
        }
    }

    fn word(&self, key: &str) -> Result<String, ParseError> {
        let (l, w) = self.get(key)?;
        name(w, l)
    }

    fn coords(&self, key: &str) -> Result<Vec<i64>, ParseError> {
        let (l, w) = self.get(key)?;
        arity(l, w, 2)?;
        coords(l, w[1])
    }

    fn words2(&self, key: &str) -> Result<[String; 2], ParseError> {
        let (l, w) = self.get(key)?;
        pair(l, w, |s| Ok(s.to_string()))
    }

    fn coords2(&self, key: &str) -> Result<[Vec<i64>; 2], ParseError> {
        let (l, w) = self.get(key)?;
        pair(l, w, |s| coords(l, s))
    }
}

fn parse_flop(start: usize, block: &Block<'_>) -> Result<FlopSpec, ParseError> {
    let f = Fields::new("flop", start, block, &["down", "flopped-down", "divisor", "fibers", "curves", "registries"])?;
    Ok(FlopSpec {
        down: f.word("down")?,
        flopped_down: f.word("flopped-down")?,
        divisor: f.word("divisor")?,
        fibers: f.coords2("fibers")?,
        curves: f.coords2("curves")?,
        registries: f.words2("registries")?,
    })
}

fn parse_transition(start: usize, block: &Block<'_>) -> Result<TransitionSpec, ParseError> {
    let f =
        Fields::new("transition", start, block, &["phi-e", "lift", "contraction", "divisor", "curve", "registries"])?;
    Ok(TransitionSpec {
        phi_e: f.word("phi-e")?,
        lift: f.word("lift")?,
        contraction: f.word("contraction")?,
        divisor: f.word("divisor")?,
        curve: f.coords("curve")?,
        registries: f.words2("registries")?,
    })
}

fn parse_blowup(start: usize, block: &Block<'_>) -> Result<BlowupSpec, ParseError> {
    let f = Fields::new("blowup", start, block, &["projections", "divisors", "fibers"])?;
    Ok(BlowupSpec {
        projections: f.words2("projections")?,
        divisors: f.words2("divisors")?,
        fibers: f.coords2("fibers")?,
    })
}

fn parse_conifold(start: usize, block: &Block<'_>) -> Result<ConifoldSpec, ParseError> {
    let f = Fields::new("conifold", start, block, &["contraction", "divisor", "rulings", "quadric", "line"])?;
    let [quadric, quadric_divisor] = f.words2("quadric")?;
    Ok(ConifoldSpec {
        contraction: f.word("contraction")?,
        divisor: f.word("divisor")?,
        rulings: f.coords2("rulings")?,
        quadric,
        quadric_divisor,
        line: f.coords("line")?,
    })
}

/// A validated geometry with every object constructed.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub lattices: BTreeMap<String, Arc<CurveClassLattice>>,
    pub maps: BTreeMap<String, LatticeMap>,
    pub rings: BTreeMap<String, Arc<RingPresentation>>,
    pub registries: BTreeMap<String, InsertionRegistry>,
    pub flop: Option<FlopGeometry>,
    pub transition: Option<TransitionGeometry>,
    pub blowup: Option<BlowupDegeneration>,
    pub conifold: Option<ConifoldDegeneration>,
}

impl Geometry {
    pub fn lattice(&self, name: &str) -> anyhow::Result<&Arc<CurveClassLattice>> {
        self.lattices.get(name).ok_or_else(|| anyhow!("unknown lattice `{name}`"))
    }

    pub fn map(&self, name: &str) -> anyhow::Result<&LatticeMap> {
        self.maps.get(name).ok_or_else(|| anyhow!("unknown map `{name}`"))
    }

    pub fn ring(&self, name: &str) -> anyhow::Result<&Arc<RingPresentation>> {
        self.rings.get(name).ok_or_else(|| anyhow!("unknown ring `{name}`"))
    }

    fn registry(&self, name: &str) -> anyhow::Result<InsertionRegistry> {
        self.registries.get(name).cloned().ok_or_else(|| anyhow!("no insertions declared on `{name}`"))
    }

    pub fn flop(&self) -> anyhow::Result<&FlopGeometry> {
        self.flop.as_ref().ok_or_else(|| anyhow!("the geometry declares no flop"))
    }

    pub fn transition(&self) -> anyhow::Result<&TransitionGeometry> {
        self.transition.as_ref().ok_or_else(|| anyhow!("the geometry declares no transition"))
    }

    pub fn from_text(text: &str) -> anyhow::Result<Self> {
        Self::build(&GeometryFile::parse(text)?)
    }

    pub fn build(file: &GeometryFile) -> anyhow::Result<Self> {
        let mut g = Geometry {
            lattices: BTreeMap::new(),
            maps: BTreeMap::new(),
            rings: BTreeMap::new(),
            registries: BTreeMap::new(),
            flop: None,
            transition: None,
            blowup: None,
            conifold: None,
        };
        for l in &file.lattices {
            let lattice = CurveClassLattice::new(
                l.name.clone(),
                l.generators.clone(),
                l.effective.iter().cloned().map(CurveClass::new).collect(),
                l.divisors.iter().cloned().collect(),
                l.canonical.clone(),
            )
            .with_context(|| format!("lattice `{}`", l.name))?;
            if g.lattices.insert(l.name.clone(), Arc::new(lattice)).is_some() {
                return Err(anyhow!("lattice `{}` declared twice", l.name));
            }
        }
        for m in &file.maps {
            let map = LatticeMap::new(
                m.name.clone(),
                g.lattice(&m.source)?.clone(),
                g.lattice(&m.target)?.clone(),
                m.rows.clone(),
            )
            .with_context(|| format!("map `{}`", m.name))?;
            if g.maps.insert(m.name.clone(), map).is_some() {
                return Err(anyhow!("map `{}` declared twice", m.name));
            }
        }
        for r in &file.rings {
            let ring = build_ring(r).with_context(|| format!("ring `{}`", r.name))?;
            g.rings.insert(r.name.clone(), Arc::new(ring));
        }
        for r in &file.registries {
            g.lattice(&r.lattice)?;
            let mut registry = InsertionRegistry::new(r.lattice.clone());
            for c in &r.classes {
                registry.add_class(c.clone()).with_context(|| format!("insertions on `{}`", r.lattice))?;
            }
            for ([a, b, c], v) in &r.products {
                registry.set_product(a, b, c, v.clone()).with_context(|| format!("insertions on `{}`", r.lattice))?;
            }
            g.registries.insert(r.lattice.clone(), registry);
        }
        if let Some(f) = &file.flop {
            let [fiber, flopped_fiber] = f.fibers.clone().map(CurveClass::new);
            let [curve, flopped_curve] = f.curves.clone().map(CurveClass::new);
            let flop = FlopGeometry::from_blowup(
                g.map(&f.down)?,
                g.map(&f.flopped_down)?,
                &f.divisor,
                [&fiber, &flopped_fiber],
                curve,
                flopped_curve,
                g.registry(&f.registries[0])?,
                g.registry(&f.registries[1])?,
            )
            .context("flop block")?;
            g.flop = Some(flop);
        }
        if let Some(t) = &file.transition {
            let transition = TransitionGeometry::new(
                g.map(&t.phi_e)?.clone(),
                g.map(&t.lift)?.clone(),
                g.map(&t.contraction)?.clone(),
                t.divisor.clone(),
                CurveClass::new(t.curve.clone()),
                g.registry(&t.registries[0])?,
                g.registry(&t.registries[1])?,
            )
            .context("transition block")?;
            g.transition = Some(transition);
        }
        if let Some(b) = &file.blowup {
            let [f1, f2] = b.fibers.clone().map(CurveClass::new);
            let blowup = BlowupDegeneration::new(
                g.map(&b.projections[0])?.clone(),
                g.map(&b.projections[1])?.clone(),
                &b.divisors[0],
                &b.divisors[1],
                f1,
                f2,
            )
            .context("blowup block")?;
            g.blowup = Some(blowup);
        }
        if let Some(c) = &file.conifold {
            let conifold = ConifoldDegeneration::new(
                g.map(&c.contraction)?.clone(),
                &c.divisor,
                c.rulings.clone().map(CurveClass::new),
                g.lattice(&c.quadric)?.clone(),
                &c.quadric_divisor,
                CurveClass::new(c.line.clone()),
            )
            .context("conifold block")?;
            g.conifold = Some(conifold);
        }
        Ok(g)
    }
}

fn build_ring(r: &RingSpec) -> gwflop::Result<RingPresentation> {
    // A rule-free copy of the ring only serves to parse monomials by name.
    let names = RingPresentation::new(r.generators.clone(), Vec::new(), r.top, BTreeMap::new())?;
    let monomial = |text: &str| -> gwflop::Result<Vec<u32>> {
        let (m, c) = names.parse_term(text)?;
        if c != Rational::from_integer(1.into()) {
            return Err(gwflop::Error::Parse(format!("`{text}` is not a bare monomial")));
        }
        Ok(m)
    };
    let mut rules = Vec::new();
    for (lhs, rhs) in &r.rules {
        let rhs: Polynomial = if rhs == "0" { Polynomial::new() } else { names.parse_polynomial(rhs)? };
        rules.push((monomial(lhs)?, rhs));
    }
    let mut integrals = BTreeMap::new();
    for (m, v) in &r.integrals {
        integrals.insert(monomial(m)?, v.clone());
    }
    RingPresentation::new(r.generators.clone(), rules, r.top, integrals)
}
