//! The sets of admissible triples of a blow-up and of a conifold
//! degeneration, and the virtual-dimension bookkeeping on them.
//!
//! Both enumerations first list the possible pairs of side classes
//! `(b(Γ1), b(Γ2))` with the contact order `l2 = b(Γ1)·D`, then build all
//! graphs on each side under explicit caps. A vertex `v` is kept only when
//! its class is effective and the weights of its roots add up to `b(v)·D`;
//! a contracted vertex must be stable on its own.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{glued_connected, AdmissibleGraph, AdmissibleTriple, Root, Vertex, MAX_PERMUTED_ROOTS};
use crate::lattice::{CurveClass, CurveClassLattice, LatticeMap};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCaps {
    pub max_vertices: usize,
    pub max_genus: u32,
    pub max_weight: u32,
}

impl EnumerationCaps {
    pub fn new(max_vertices: usize, max_genus: u32, max_weight: u32) -> Result<Self> {
        if max_vertices == 0 || max_weight == 0 {
            return Err(Error::InvalidCaps("vertex and weight caps must be positive".into()));
        }
        Ok(EnumerationCaps { max_vertices, max_genus, max_weight })
    }
}

/// One side of a degenerate fiber: its curve lattice and the gluing divisor.
#[derive(Clone, Debug)]
pub struct Side {
    pub lattice: Arc<CurveClassLattice>,
    pub divisor: String,
}

impl Side {
    pub fn new(lattice: Arc<CurveClassLattice>, divisor: impl Into<String>) -> Result<Self> {
        let divisor = divisor.into();
        lattice.divisor(&divisor)?;
        Ok(Side { lattice, divisor })
    }

    fn contact(&self, class: &CurveClass) -> Result<i64> {
        self.lattice.pair(&self.divisor, class)
    }
}

/// `X` degenerating to `Y1 ∪_E Y2` with `Y1` the blow-up of `X` along a
/// curve and `Y2` a projective bundle over that curve.
#[derive(Clone, Debug)]
pub struct BlowupDegeneration {
    first: LatticeMap,
    second: LatticeMap,
    sides: [Side; 2],
    fibers: [CurveClass; 2],
}

impl BlowupDegeneration {
    /// `first: Y1 -> X`, `second: Y2 -> X`; each fiber is contracted by its
    /// projection and meets `E` with intersection `-1` on `Y1`, `+1` on `Y2`.
    pub fn new(
        first: LatticeMap,
        second: LatticeMap,
        first_divisor: &str,
        second_divisor: &str,
        first_fiber: CurveClass,
        second_fiber: CurveClass,
    ) -> Result<Self> {
        if first.target().name() != second.target().name() {
            return Err(Error::InvalidGeometry("the two projections have different targets".into()));
        }
        let sides =
            [Side::new(first.source().clone(), first_divisor)?, Side::new(second.source().clone(), second_divisor)?];
        check_fiber(&first, &sides[0], &first_fiber, -1)?;
        check_fiber(&second, &sides[1], &second_fiber, 1)?;
        Ok(BlowupDegeneration { first, second, sides, fibers: [first_fiber, second_fiber] })
    }

    pub fn sides(&self) -> [&Side; 2] {
        [&self.sides[0], &self.sides[1]]
    }

    pub fn total(&self) -> &Arc<CurveClassLattice> {
        self.first.target()
    }

    pub fn first_projection(&self) -> &LatticeMap {
        &self.first
    }

    /// Side classes `(b(Γ1), b(Γ2), l2)` allowed for `beta`.
    fn targets(&self, beta: &CurveClass) -> Result<Vec<Target>> {
        let mut out = Vec::new();
        for beta2 in self.total().effective_parts(beta)? {
            let Some(m2) = lift_or_skip(&self.second, &beta2)? else { continue };
            let Some(m1) = lift_or_skip(&self.first, &(beta - &beta2))? else { continue };
            let e = self.sides[0].contact(&m1)?;
            for l2 in 0..=e {
                let first = &m1 + &self.fibers[0].scale(e - l2);
                let second = &m2 + &self.fibers[1].scale(l2);
                push_target(&mut out, &self.sides, first, second)?;
            }
        }
        Ok(out)
    }
}

/// `X''` degenerating to `Ỹ ∪_E Q` with `Ỹ` the blow-up of the conifold
/// at its node and `Q` a quadric 3-fold.
#[derive(Clone, Debug)]
pub struct ConifoldDegeneration {
    contraction: LatticeMap,
    sides: [Side; 2],
    rulings: [CurveClass; 2],
    line: CurveClass,
}

impl ConifoldDegeneration {
    /// `contraction: Ỹ -> X''` contracts both rulings of `E`; each meets `E`
    /// with intersection `-1`, while the line of `Q` meets `E` with `+1`.
    pub fn new(
        contraction: LatticeMap,
        first_divisor: &str,
        rulings: [CurveClass; 2],
        quadric: Arc<CurveClassLattice>,
        second_divisor: &str,
        line: CurveClass,
    ) -> Result<Self> {
        let sides = [Side::new(contraction.source().clone(), first_divisor)?, Side::new(quadric, second_divisor)?];
        for ruling in &rulings {
            check_fiber(&contraction, &sides[0], ruling, -1)?;
        }
        sides[1].lattice.check(&line)?;
        if sides[1].contact(&line)? != 1 {
            return Err(Error::InvalidGeometry("the line must meet the divisor once".into()));
        }
        Ok(ConifoldDegeneration { contraction, sides, rulings, line })
    }

    pub fn sides(&self) -> [&Side; 2] {
        [&self.sides[0], &self.sides[1]]
    }

    pub fn total(&self) -> &Arc<CurveClassLattice> {
        self.contraction.target()
    }

    pub fn contraction(&self) -> &LatticeMap {
        &self.contraction
    }

    fn targets(&self, beta: &CurveClass) -> Result<Vec<Target>> {
        let mut out = Vec::new();
        let Some(m1) = lift_or_skip(&self.contraction, beta)? else { return Ok(out) };
        let e = self.sides[0].contact(&m1)?;
        for l2 in 0..=e {
            for l11 in 0..=e - l2 {
                let first = &(&m1 + &self.rulings[0].scale(l11)) + &self.rulings[1].scale(e - l2 - l11);
                push_target(&mut out, &self.sides, first, self.line.scale(l2))?;
            }
        }
        Ok(out)
    }
}

fn check_fiber(map: &LatticeMap, side: &Side, fiber: &CurveClass, expected: i64) -> Result<()> {
    side.lattice.check(fiber)?;
    if !map.apply(fiber)?.is_zero() || side.contact(fiber)? != expected {
        return Err(Error::InvalidGeometry(format!(
            "{fiber} must be contracted by `{}` and meet `{}` with intersection {expected}",
            map.name(),
            side.divisor
        )));
    }
    Ok(())
}

fn lift_or_skip(map: &LatticeMap, class: &CurveClass) -> Result<Option<CurveClass>> {
    match map.minimal_lift(class) {
        Ok(m) => Ok(Some(m)),
        Err(Error::NoLift(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Target {
    first: CurveClass,
    second: CurveClass,
    contact: u32,
}

fn push_target(out: &mut Vec<Target>, sides: &[Side; 2], first: CurveClass, second: CurveClass) -> Result<()> {
    let contact = sides[0].contact(&first)?;
    if contact >= 0 && contact == sides[1].contact(&second)? {
        out.push(Target { first, second, contact: contact as u32 });
    }
    Ok(())
}

/// Which sides of the degenerate fiber carry a nonempty graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    TwoSided,
    FirstOnly,
    SecondOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumeratedTriple {
    /// Canonical representative of the triple up to root reordering.
    pub triple: AdmissibleTriple,
    pub block: Block,
    pub eq_count: u64,
}

pub fn enumerate_blowup_triples(
    genus: u32,
    points: usize,
    beta: &CurveClass,
    geometry: &BlowupDegeneration,
    caps: &EnumerationCaps,
) -> Result<Vec<EnumeratedTriple>> {
    geometry.total().check(beta)?;
    let targets = geometry.targets(beta)?;
    collect(genus, points, &targets, &geometry.sides, caps)
}

pub fn enumerate_conifold_triples(
    genus: u32,
    points: usize,
    beta: &CurveClass,
    geometry: &ConifoldDegeneration,
    caps: &EnumerationCaps,
) -> Result<Vec<EnumeratedTriple>> {
    geometry.total().check(beta)?;
    let targets = geometry.targets(beta)?;
    collect(genus, points, &targets, &geometry.sides, caps)
}

fn collect(
    genus: u32,
    points: usize,
    targets: &[Target],
    sides: &[Side; 2],
    caps: &EnumerationCaps,
) -> Result<Vec<EnumeratedTriple>> {
    let mut found: BTreeMap<AdmissibleTriple, Block> = BTreeMap::new();
    let all_legs: BTreeSet<usize> = (1..=points).collect();
    for target in targets {
        if target.contact == 0 {
            let single = |side: &Side, class: &CurveClass| side_graphs(side, class, &[], points, 1, genus as i64, caps);
            if target.second.is_zero() {
                for graph in single(&sides[0], &target.first)? {
                    let t = AdmissibleTriple::new(graph, AdmissibleGraph::empty(), all_legs.clone())?;
                    found.insert(t.canonical()?, Block::FirstOnly);
                }
            }
            if target.first.is_zero() {
                for graph in single(&sides[1], &target.second)? {
                    let t = AdmissibleTriple::new(AdmissibleGraph::empty(), graph, BTreeSet::new())?;
                    found.insert(t.canonical()?, Block::SecondOnly);
                }
            }
            continue;
        }
        for weights in partitions(target.contact, caps.max_weight) {
            let r = weights.len();
            if r > MAX_PERMUTED_ROOTS {
                return Err(Error::TooManyRoots { roots: r, bound: MAX_PERMUTED_ROOTS });
            }
            let mut memo: BTreeMap<(usize, usize, usize, i64), Vec<AdmissibleGraph>> = BTreeMap::new();
            let mut graphs = |which: usize, legs: usize, k: usize, s: i64| -> Result<Vec<AdmissibleGraph>> {
                if let Some(g) = memo.get(&(which, legs, k, s)) {
                    return Ok(g.clone());
                }
                let class = if which == 0 { &target.first } else { &target.second };
                let g = side_graphs(&sides[which], class, &weights, legs, k, s, caps)?;
                memo.insert((which, legs, k, s), g.clone());
                Ok(g)
            };
            for n1 in 0..=points {
                let subsets = subsets_of_size(points, n1);
                for k1 in 1..=caps.max_vertices {
                    for k2 in 1..=caps.max_vertices {
                        let total = genus as i64 + (k1 + k2) as i64 - r as i64 - 1;
                        for s1 in 0..=total {
                            let lefts = graphs(0, n1, k1, s1)?;
                            if lefts.is_empty() {
                                continue;
                            }
                            let rights = graphs(1, points - n1, k2, total - s1)?;
                            for a in &lefts {
                                for b in rights.iter().filter(|b| glued_connected(a, b)) {
                                    for legs in &subsets {
                                        let t = AdmissibleTriple::new(a.clone(), b.clone(), legs.clone())?;
                                        found.insert(t.canonical()?, Block::TwoSided);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    found
        .into_iter()
        .map(|(triple, block)| {
            let eq_count = triple.eq_count()?;
            Ok(EnumeratedTriple { triple, block, eq_count })
        })
        .collect()
}

/// Nondecreasing lists of positive parts at most `max_part` summing to `total`.
fn partitions(total: u32, max_part: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, min: u32, max: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(current.clone());
            return;
        }
        for part in min..=max.min(rest) {
            current.push(part);
            go(rest - part, part, max, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(total, 1, max_part, &mut Vec::new(), &mut out);
    out
}

fn subsets_of_size(n: usize, size: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect());
        }
    }
    out
}

/// All graphs on one side with `k` vertices of total class `class`, vertex
/// genera summing to `genus_sum`, `legs` legs and roots of the given weights.
fn side_graphs(
    side: &Side,
    class: &CurveClass,
    weights: &[u32],
    legs: usize,
    k: usize,
    genus_sum: i64,
    caps: &EnumerationCaps,
) -> Result<Vec<AdmissibleGraph>> {
    let mut out = Vec::new();
    if genus_sum < 0 || genus_sum > k as i64 * caps.max_genus as i64 {
        return Ok(out);
    }
    let parts = side.lattice.effective_parts(class)?;
    let mut sequences = Vec::new();
    class_sequences(&parts, 0, k, class.clone(), &mut Vec::new(), &mut sequences);
    let genera = compositions(genus_sum as u32, k, caps.max_genus);
    for classes in sequences {
        let contacts: Vec<i64> = classes.iter().map(|c| side.contact(c)).collect::<Result<_>>()?;
        if contacts.iter().any(|&d| d < 0 || (k > 1 && d == 0)) {
            continue;
        }
        let root_maps: Vec<Vec<usize>> = assignments(weights.len(), k)
            .into_iter()
            .filter(|map| {
                (0..k).all(|v| {
                    let sum: i64 = map.iter().zip(weights).filter(|(&u, _)| u == v).map(|(_, &w)| w as i64).sum();
                    sum == contacts[v]
                })
            })
            .collect();
        if root_maps.is_empty() {
            continue;
        }
        for genus in &genera {
            for leg_map in assignments(legs, k) {
                let stable = (0..k).all(|v| {
                    let special = leg_map.iter().filter(|&&u| u == v).count() as i64;
                    !classes[v].is_zero() || 2 * genus[v] as i64 - 2 + special > 0
                });
                if !stable {
                    continue;
                }
                for root_map in &root_maps {
                    let vertices = (0..k).map(|v| Vertex { genus: genus[v], class: classes[v].clone() }).collect();
                    let roots =
                        root_map.iter().zip(weights).map(|(&vertex, &weight)| Root { vertex, weight }).collect();
                    if let Ok(g) = AdmissibleGraph::new(vertices, leg_map.clone(), roots) {
                        out.push(g);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn class_sequences(
    parts: &[CurveClass],
    start: usize,
    k: usize,
    rest: CurveClass,
    current: &mut Vec<CurveClass>,
    out: &mut Vec<Vec<CurveClass>>,
) {
    if current.len() + 1 == k {
        if parts[start..].contains(&rest) {
            let mut seq = current.clone();
            seq.push(rest);
            out.push(seq);
        }
        return;
    }
    for i in start..parts.len() {
        current.push(parts[i].clone());
        class_sequences(parts, i, k, &rest - &parts[i], current, out);
        current.pop();
    }
}

fn compositions(total: u32, k: usize, max: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, slots: usize, max: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 0 {
            if rest == 0 {
                out.push(current.clone());
            }
            return;
        }
        for g in 0..=max.min(rest) {
            current.push(g);
            go(rest - g, slots - 1, max, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(total, k, max, &mut Vec::new(), &mut out);
    out
}

/// Every map from `items` labelled objects to `k` vertices.
fn assignments(items: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..items {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Complex dimensions of the fiber, the two sides and the divisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    pub total: i64,
    pub first: i64,
    pub second: i64,
    pub divisor: i64,
}

impl Default for Dimensions {
    fn default() -> Self {
        Dimensions { total: 3, first: 3, second: 3, divisor: 2 }
    }
}

fn side_class(side: &Side, graph: &AdmissibleGraph) -> CurveClass {
    graph.class().unwrap_or_else(|| side.lattice.zero())
}

/// Both sides of the virtual-dimension additivity relation
///
/// `(1-g)(dim-3) - β·K + n
///    = Σ_i [(1-g_i)(dim Y_i - 3) - β_i·K_i + n_i + (r - β_i·D)] - r·dim D`,
///
/// where the sum runs over the nonempty sides, `β·K` is the canonical
/// degree of the total class and `g_i`, `β_i`, `n_i` are read off the graphs.
pub fn vdim_additivity(
    triple: &AdmissibleTriple,
    canonical_degree: i64,
    sides: [&Side; 2],
    dims: &Dimensions,
) -> Result<(i64, i64)> {
    let r = triple.root_count() as i64;
    let g = triple.genus();
    let lhs = (1 - g) * (dims.total - 3) - canonical_degree + triple.marked_points() as i64;
    let mut rhs = -r * dims.divisor;
    for (side, (graph, dim)) in sides.iter().zip([(triple.first(), dims.first), (triple.second(), dims.second)]) {
        if graph.is_empty() {
            continue;
        }
        let class = side_class(side, graph);
        rhs += (1 - graph.genus()) * (dim - 3) - side.lattice.canonical_pair(&class)?
            + graph.legs().len() as i64
            + (r - side.contact(&class)?);
    }
    Ok((lhs, rhs))
}

/// The relation specialised to a blow-up degeneration of a flop:
/// `-β·K_X + n = (-β1·p1*K_X + n1 + r - 2β1·E) + (2β2·E + n2 + r) - 2r`.
pub fn vdim_flop_form(
    triple: &AdmissibleTriple,
    beta: &CurveClass,
    geometry: &BlowupDegeneration,
) -> Result<(i64, i64)> {
    let total = geometry.total();
    let pulled = geometry.first.pull_back(total.canonical());
    let [first, second] = geometry.sides();
    let (b1, b2) = (side_class(first, triple.first()), side_class(second, triple.second()));
    let r = triple.root_count() as i64;
    let lhs = -total.canonical_pair(beta)? + triple.marked_points() as i64;
    let rhs = (-b1.dot(&pulled) + triple.first().legs().len() as i64 + r - 2 * first.contact(&b1)?)
        + (2 * second.contact(&b2)? + triple.second().legs().len() as i64 + r)
        - 2 * r;
    Ok((lhs, rhs))
}

/// The relation specialised to a conifold degeneration:
/// `-β·K_X'' + n = (-β1·K_Ỹ + n1 + r - β1·E) + (2β2·E + n2 + r) - 2r`.
pub fn vdim_conifold_form(
    triple: &AdmissibleTriple,
    beta: &CurveClass,
    geometry: &ConifoldDegeneration,
) -> Result<(i64, i64)> {
    let [first, second] = geometry.sides();
    let (b1, b2) = (side_class(first, triple.first()), side_class(second, triple.second()));
    let r = triple.root_count() as i64;
    let lhs = -geometry.total().canonical_pair(beta)? + triple.marked_points() as i64;
    let rhs = (-first.lattice.canonical_pair(&b1)? + triple.first().legs().len() as i64 + r - first.contact(&b1)?)
        + (2 * second.contact(&b2)? + triple.second().legs().len() as i64 + r)
        - 2 * r;
    Ok((lhs, rhs))
}
