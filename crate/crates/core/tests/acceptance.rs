//! Acceptance suite. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Run with `--nocapture` to see the lines.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use gwflop::chow::{Polynomial, RingElement};
use gwflop::degeneration::{
    enumerate_blowup_triples, enumerate_conifold_triples, vdim_additivity, vdim_conifold_form, vdim_flop_form,
    AdmissibleGraph, AdmissibleTriple, Dimensions, EnumeratedTriple, EnumerationCaps, Root, Side, Vertex,
};
use gwflop::local_p1;
use gwflop::rational::{int, ratio};
use gwflop::transform::{
    flop_involution_check, flop_transform, multiple_cover_tail, transition_threepoint_check, transition_transform,
    transition_transform_fiber_sum, wallcrossing_check, FlopGeometry, GwKey, GwTable, InsertionClass,
    InsertionRegistry,
};
use gwflop::{CurveClass, CurveClassLattice, Error, LatticeMap, Rational};
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn run(number: u32, title: &str, budget: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (pass, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; took {elapsed:?}, budget {budget:?}")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {number} [{title}]: {} ({detail}; {:.3} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cls(c: &[i64]) -> CurveClass {
    CurveClass::new(c.to_vec())
}

fn strings(l: &[&str]) -> Vec<String> {
    l.iter().map(|s| s.to_string()).collect()
}

// ---------------------------------------------------------------------------
// 1. Chow ring normal forms

fn chow_ring() -> Outcome {
    let ring = Arc::new(local_p1::bundle_chow_ring());
    let nf = |s: &str| RingElement::parse(&ring, s).map_err(|e| e.to_string());
    ensure(nf("w^3")?.to_string() == "2/1 * v*w^2", || "w^3 does not reduce to 2 v w^2".into())?;
    ensure(nf("w^4")?.is_zero(), || "w^4 is not zero".into())?;
    for m in ["v^2", "v^2*w", "v^3", "v^2*w^2"] {
        ensure(nf(m)?.is_zero(), || format!("{m} is not zero"))?;
    }
    // Every order of rule application from every monomial of degree <= 3
    // reaches the same normal form.
    let mut checked = 0;
    for a in 0..=3u32 {
        for b in 0..=3 - a {
            let m = vec![a, b];
            let reference = ring.reduce(&Polynomial::from([(m.clone(), int(1))]));
            for rule in ring.applicable_rules(&m) {
                let first_step = ring.rewrite_once(&m, rule);
                ensure(ring.reduce(&first_step) == reference, || format!("critical divergence at v^{a} w^{b}"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} monomials confluent"))
}

// ---------------------------------------------------------------------------
// 2. Multiple-cover tail

fn multiple_cover() -> Outcome {
    let x = local_p1::x();
    let c = local_p1::curve();
    let tail = multiple_cover_tail(&x, [1, 1, 1], &c).map_err(|e| e.to_string())?;
    let ample = [1, 1];
    for m_max in 1..=50i64 {
        let truncated = tail.truncate(&ample, m_max).map_err(|e| e.to_string())?;
        let mut oracle = BTreeMap::new();
        for m in 1..=m_max {
            let cube = int(m * m * m);
            oracle.insert(c.scale(m), &cube * (Rational::one() / &cube));
        }
        ensure(truncated == oracle, || format!("truncation at M = {m_max} differs"))?;
    }
    Ok("M = 1..50 exact".into())
}

// ---------------------------------------------------------------------------
// 3. Wall-crossing of 3-point functions

fn divisor_flop(a: [i64; 3], product: Rational) -> Result<FlopGeometry, Error> {
    let mut reg = InsertionRegistry::new("X");
    let mut flopped = InsertionRegistry::new("Xp");
    for (i, &ai) in a.iter().enumerate() {
        let (l, lp) = (format!("D{i}"), format!("D{i}p"));
        reg.add_class(InsertionClass { label: l.clone(), codim: 1, c_pairing: ai, image: Some(lp.clone()) })?;
        flopped.add_class(InsertionClass { label: lp, codim: 1, c_pairing: -ai, image: Some(l) })?;
    }
    reg.set_product("D0", "D1", "D2", product)?;
    let base = local_p1::flop_geometry();
    FlopGeometry::new(
        base.phi().clone(),
        base.phi_inverse().clone(),
        local_p1::curve(),
        local_p1::curve(),
        reg,
        flopped,
    )
}

const WALL_LABELS: [&str; 3] = ["D0", "D1", "D2"];

fn random_middle_table(rng: &mut StdRng) -> GwTable {
    let mut table = GwTable::new(local_p1::x());
    table.multiple_cover = true;
    for _ in 0..rng.gen_range(0..5) {
        let b = rng.gen_range(1..4);
        let a = rng.gen_range(0..=b);
        let key = GwKey::new(0, cls(&[a, b]), strings(&WALL_LABELS));
        if table.entries().contains_key(&key) {
            continue;
        }
        table.insert(key, ratio(rng.gen_range(-9..10), rng.gen_range(1..5))).unwrap();
    }
    table
}

fn wallcrossing(rng: &mut StdRng, controls: &mut Vec<Outcome>) -> Outcome {
    let mut cases = 0;
    for a0 in -5..=5i64 {
        for a1 in -5..=5i64 {
            for a2 in -5..=5i64 {
                let a = [a0, a1, a2];
                let geom = divisor_flop(a, int(rng.gen_range(-20..20))).map_err(|e| e.to_string())?;
                let table = random_middle_table(rng);
                let out = flop_transform(&table, &geom).map_err(|e| e.to_string())?;
                ensure(out.rejected.is_empty(), || format!("flop rejected entries for {a:?}"))?;
                let w = wallcrossing_check(&table, &out.table, WALL_LABELS, &geom).map_err(|e| e.to_string())?;
                ensure(w.isomorphic, || format!("{a:?}: {} vs {}", w.transported, w.flopped))?;
                ensure(w.discrepancy == int(-a0 * a1 * a2), || format!("{a:?}: discrepancy {}", w.discrepancy))?;
                ensure(w.holds(), || format!("{a:?}: identity does not hold"))?;
                cases += 1;
                if cases % 97 == 0 {
                    controls.push(wallcrossing_control(rng, &geom, &table, &out.table));
                }
            }
        }
    }
    Ok(format!("{cases} c-pairing triples"))
}

/// Perturbs one value of the flopped table and expects the check to fail.
fn wallcrossing_control(rng: &mut StdRng, geom: &FlopGeometry, table: &GwTable, flopped: &GwTable) -> Outcome {
    let mut corrupted = GwTable::new(flopped.lattice().clone());
    corrupted.multiple_cover = true;
    let entries: Vec<_> = flopped.entries().iter().collect();
    let images = strings(&["D0p", "D1p", "D2p"]);
    let target = if entries.is_empty() {
        GwKey::new(0, cls(&[rng.gen_range(0..3), 1]), images)
    } else {
        entries[rng.gen_range(0..entries.len())].0.clone()
    };
    let mut touched = false;
    for (k, v) in flopped.entries() {
        let v = if *k == target { v + Rational::one() } else { v.clone() };
        touched |= *k == target;
        corrupted.insert(k.clone(), v).map_err(|e| e.to_string())?;
    }
    if !touched {
        corrupted.insert(target.clone(), Rational::one()).map_err(|e| e.to_string())?;
    }
    let w = wallcrossing_check(table, &corrupted, WALL_LABELS, geom).map_err(|e| e.to_string())?;
    ensure(!w.holds(), || format!("perturbing {:?} went unnoticed", target.beta))?;
    Ok(format!("wall-crossing broken at {}", target.beta))
}

// ---------------------------------------------------------------------------
// 4. Flop involution

fn random_flop_table(rng: &mut StdRng) -> GwTable {
    let labels = ["1", "H", "pt"];
    let mut table = GwTable::new(local_p1::x());
    table.multiple_cover = rng.gen_bool(0.5);
    for _ in 0..rng.gen_range(0..12) {
        let genus = rng.gen_range(0..3);
        let key = if rng.gen_bool(0.2) {
            GwKey::new(genus, cls(&[rng.gen_range(1..5), 0]), vec![])
        } else {
            let b = rng.gen_range(1..5);
            let n = rng.gen_range(0..4);
            let ls = (0..n).map(|_| labels[rng.gen_range(0..3)].to_string()).collect();
            GwKey::new(genus, cls(&[rng.gen_range(0..=b), b]), ls)
        };
        if !table.entries().contains_key(&key) {
            table.insert(key, ratio(rng.gen_range(-50..50), rng.gen_range(1..9))).unwrap();
        }
    }
    table
}

fn flop_involution(rng: &mut StdRng) -> Outcome {
    let geom = local_p1::flop_geometry();
    let mut entries = 0;
    for case in 0..200 {
        let table = random_flop_table(rng);
        entries += table.len();
        ensure(flop_involution_check(&table, &geom).map_err(|e| e.to_string())?, || {
            format!("table {case} does not return to itself")
        })?;
    }
    Ok(format!("200 tables, {entries} entries"))
}

// ---------------------------------------------------------------------------
// 5. Triple enumeration against a brute-force filter

/// Effective classes with coordinates in `0..=bound`.
fn effective_box(lattice: &CurveClassLattice, bound: i64) -> Vec<CurveClass> {
    let rank = lattice.rank();
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (0..=bound).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(CurveClass::new).filter(|c| lattice.is_effective(c).unwrap()).collect()
}

/// The effective preimage of `class` under `map` from which every other
/// effective preimage in the box differs by a non-negative combination of
/// `contracted`.
fn box_minimal_lift(
    map: &LatticeMap,
    class: &CurveClass,
    boxed: &[CurveClass],
    contracted: &[CurveClass],
) -> Option<CurveClass> {
    let lifts: Vec<&CurveClass> = boxed.iter().filter(|b| map.apply(b).unwrap() == *class).collect();
    lifts
        .iter()
        .find(|m| lifts.iter().all(|other| nonneg_combination(&(*other - **m), contracted, 8).is_some()))
        .map(|m| (*m).clone())
}

/// Coefficients expressing `v` as a non-negative combination of `basis`.
fn nonneg_combination(v: &CurveClass, basis: &[CurveClass], bound: i64) -> Option<Vec<i64>> {
    let mut coeffs = vec![0i64; basis.len()];
    loop {
        let mut sum = v.scale(0);
        for (c, b) in coeffs.iter().zip(basis) {
            sum = &sum + &b.scale(*c);
        }
        if sum == *v {
            return Some(coeffs);
        }
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return None;
            }
            coeffs[i] += 1;
            if coeffs[i] <= bound {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

struct Pair {
    first: CurveClass,
    second: CurveClass,
    contact: i64,
}

fn blowup_pairs(beta: &CurveClass) -> Vec<Pair> {
    let geom = local_p1::blowup_degeneration();
    let (p1, p2) = (local_p1::blow_down(), local_p1::bundle_projection());
    let [s1, s2] = geom.sides();
    let box1 = effective_box(&s1.lattice, 6);
    let box2 = effective_box(&s2.lattice, 6);
    let gamma1 = local_p1::fiber();
    let gamma2 = cls(&[0, 1]);
    let mut out = Vec::new();
    for b1 in &box1 {
        for b2 in &box2 {
            if &p1.apply(b1).unwrap() + &p2.apply(b2).unwrap() != *beta {
                continue;
            }
            let c = s1.lattice.pair("E", b1).unwrap();
            if c < 0 || c != s2.lattice.pair("E", b2).unwrap() {
                continue;
            }
            let Some(m1) = box_minimal_lift(&p1, &p1.apply(b1).unwrap(), &box1, std::slice::from_ref(&gamma1)) else { continue };
            let Some(m2) = box_minimal_lift(&p2, &p2.apply(b2).unwrap(), &box2, std::slice::from_ref(&gamma2)) else { continue };
            let (Some(l1), Some(l2)) = (
                nonneg_combination(&(b1 - &m1), std::slice::from_ref(&gamma1), 8),
                nonneg_combination(&(b2 - &m2), std::slice::from_ref(&gamma2), 8),
            ) else {
                continue;
            };
            if l1[0] + l2[0] != s1.lattice.pair("E", &m1).unwrap() {
                continue;
            }
            out.push(Pair { first: b1.clone(), second: b2.clone(), contact: c });
        }
    }
    out
}

fn conifold_pairs(beta: &CurveClass) -> Vec<Pair> {
    let geom = local_p1::conifold_degeneration();
    let pc = local_p1::contraction();
    let [s1, s2] = geom.sides();
    let box1 = effective_box(&s1.lattice, 6);
    let box2 = effective_box(&s2.lattice, 6);
    let rulings = [local_p1::flopped_fiber(), local_p1::fiber()];
    let line = cls(&[1]);
    let mut out = Vec::new();
    for b1 in &box1 {
        if pc.apply(b1).unwrap() != *beta {
            continue;
        }
        let Some(m) = box_minimal_lift(&pc, beta, &box1, &rulings) else { continue };
        let Some(l1) = nonneg_combination(&(b1 - &m), &rulings, 8) else { continue };
        for b2 in &box2 {
            let c = s1.lattice.pair("E", b1).unwrap();
            if c < 0 || c != s2.lattice.pair("E", b2).unwrap() {
                continue;
            }
            let Some(l2) = nonneg_combination(b2, std::slice::from_ref(&line), 8) else { continue };
            if l1[0] + l1[1] + l2[0] != s1.lattice.pair("E", &m).unwrap() {
                continue;
            }
            out.push(Pair { first: b1.clone(), second: b2.clone(), contact: c });
        }
    }
    out
}

/// Ordered lists of positive weights at most `max` summing to `total`.
fn ordered_weights(total: i64, max: u32) -> Vec<Vec<u32>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for w in 1..=(max as i64).min(total) {
        for mut rest in ordered_weights(total - w, max) {
            rest.insert(0, w as u32);
            out.push(rest);
        }
    }
    out
}

fn tuples(len: usize, values: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..values).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Every graph on one side with vertex classes summing to `class`, legs
/// `legs`, and roots of the given ordered weights, subject to the vertex
/// conditions: effective classes, genus caps, per-vertex contact, relative
/// connectedness and stability of class-0 vertices.
fn brute_side_graphs(
    side: &Side,
    class: &CurveClass,
    weights: &[u32],
    legs: usize,
    caps: (usize, u32),
    boxed: &[CurveClass],
) -> Vec<AdmissibleGraph> {
    let mut out = Vec::new();
    if class.is_zero() && weights.is_empty() && legs == 0 {
        out.push(AdmissibleGraph::empty());
    }
    for k in 1..=caps.0 {
        for classes in tuples(k, boxed.len()) {
            let vs: Vec<&CurveClass> = classes.iter().map(|&i| &boxed[i]).collect();
            let mut total = class.scale(0);
            for v in &vs {
                total = &total + *v;
            }
            if total != *class {
                continue;
            }
            let contacts: Vec<i64> = vs.iter().map(|v| side.lattice.pair(&side.divisor, v).unwrap()).collect();
            for root_map in tuples(weights.len(), k) {
                let ok = (0..k).all(|v| {
                    let s: i64 = root_map.iter().zip(weights).filter(|(&u, _)| u == v).map(|(_, &w)| w as i64).sum();
                    s == contacts[v] && (k == 1 || root_map.contains(&v))
                });
                if !ok {
                    continue;
                }
                for genera in tuples(k, caps.1 as usize + 1) {
                    for leg_map in tuples(legs, k) {
                        let stable = (0..k).all(|v| {
                            let special = leg_map.iter().filter(|&&u| u == v).count()
                                + root_map.iter().filter(|&&u| u == v).count();
                            !vs[v].is_zero() || 2 * genera[v] as i64 - 2 + special as i64 > 0
                        });
                        if !stable {
                            continue;
                        }
                        let vertices =
                            (0..k).map(|v| Vertex { genus: genera[v] as u32, class: vs[v].clone() }).collect();
                        let roots =
                            root_map.iter().zip(weights).map(|(&vertex, &weight)| Root { vertex, weight }).collect();
                        out.push(AdmissibleGraph::new(vertices, leg_map.clone(), roots).unwrap());
                    }
                }
            }
        }
    }
    out
}

fn connected_after_gluing(a: &AdmissibleGraph, b: &AdmissibleGraph) -> bool {
    let (ka, kb) = (a.vertices().len(), b.vertices().len());
    let mut parent: Vec<usize> = (0..ka + kb).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for (ra, rb) in a.roots().iter().zip(b.roots()) {
        let (x, y) = (find(&mut parent, ra.vertex), find(&mut parent, ka + rb.vertex));
        parent[x] = y;
    }
    let roots: BTreeSet<usize> = (0..ka + kb).map(|v| find(&mut parent, v)).collect();
    roots.len() == 1
}

/// Brute-force triple filter for one degeneration. Side graphs are
/// remembered per (side, class, weights, legs) since they do not depend on
/// the genus or the leg split.
struct BruteForce<'a> {
    sides: [&'a Side; 2],
    caps: (usize, u32, u32),
    boxes: [Vec<CurveClass>; 2],
    graphs: BTreeMap<(usize, CurveClass, Vec<u32>, usize), Vec<AdmissibleGraph>>,
}

impl<'a> BruteForce<'a> {
    fn new(sides: [&'a Side; 2], caps: (usize, u32, u32)) -> Self {
        let boxes = [effective_box(&sides[0].lattice, 6), effective_box(&sides[1].lattice, 6)];
        BruteForce { sides, caps, boxes, graphs: BTreeMap::new() }
    }

    fn side(&mut self, which: usize, class: &CurveClass, weights: &[u32], legs: usize) -> &[AdmissibleGraph] {
        let key = (which, class.clone(), weights.to_vec(), legs);
        if !self.graphs.contains_key(&key) {
            let lattice = &self.sides[which].lattice;
            let candidates: Vec<CurveClass> =
                self.boxes[which].iter().filter(|b| lattice.is_effective(&(class - *b)).unwrap()).cloned().collect();
            let graphs =
                brute_side_graphs(self.sides[which], class, weights, legs, (self.caps.0, self.caps.1), &candidates);
            self.graphs.insert(key.clone(), graphs);
        }
        &self.graphs[&key]
    }

    fn triples(&mut self, genus: u32, points: usize, pairs: &[Pair]) -> BTreeSet<String> {
        let mut keys = BTreeSet::new();
        for pair in pairs {
            for weights in ordered_weights(pair.contact, self.caps.2) {
                let r = weights.len() as i64;
                for mask in 0u32..(1 << points) {
                    let first_legs: BTreeSet<usize> = (1..=points).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                    let n1 = first_legs.len();
                    let lefts = self.side(0, &pair.first, &weights, n1).to_vec();
                    let rights = self.side(1, &pair.second, &weights, points - n1);
                    for a in &lefts {
                        for b in rights {
                            if a.is_empty() && b.is_empty() {
                                continue;
                            }
                            let vertex_count = (a.vertices().len() + b.vertices().len()) as i64;
                            let genus_sum: i64 = a.vertices().iter().chain(b.vertices()).map(|v| v.genus as i64).sum();
                            if r + 1 - vertex_count + genus_sum != genus as i64 || !connected_after_gluing(a, b) {
                                continue;
                            }
                            let t = AdmissibleTriple::new(a.clone(), b.clone(), first_legs.clone()).unwrap();
                            keys.insert(t.canonical().unwrap().key().unwrap());
                        }
                    }
                }
            }
        }
        keys
    }
}

fn enumerated_keys(triples: &[EnumeratedTriple]) -> BTreeSet<String> {
    triples.iter().map(|t| t.triple.key().unwrap()).collect()
}

struct Enumerated {
    blowup: Vec<(CurveClass, Vec<EnumeratedTriple>)>,
    conifold: Vec<(CurveClass, Vec<EnumeratedTriple>)>,
}

fn enumeration_oracle(store: &mut Option<Enumerated>) -> Outcome {
    let caps = EnumerationCaps::new(3, 2, 3).map_err(|e| e.to_string())?;
    let blowup = local_p1::blowup_degeneration();
    let conifold = local_p1::conifold_degeneration();
    let mut enumerated = Enumerated { blowup: Vec::new(), conifold: Vec::new() };
    let mut brute_blowup = BruteForce::new(blowup.sides(), (3, 2, 3));
    let mut brute_conifold = BruteForce::new(conifold.sides(), (3, 2, 3));
    let mut blowup_pairs_cache = BTreeMap::new();
    let mut conifold_pairs_cache = BTreeMap::new();
    let (mut compared, mut total) = (0, 0);
    let x_classes: Vec<CurveClass> =
        (0..=2).flat_map(|a| (0..=3).map(move |d| cls(&[a, d]))).filter(|c| !c.is_zero()).collect();
    for g in 0..=2u32 {
        for n in 0..=2usize {
            for beta in &x_classes {
                let found = enumerate_blowup_triples(g, n, beta, &blowup, &caps).map_err(|e| e.to_string())?;
                let pairs = blowup_pairs_cache.entry(beta.clone()).or_insert_with(|| blowup_pairs(beta));
                let oracle = brute_blowup.triples(g, n, pairs);
                let keys = enumerated_keys(&found);
                ensure(keys == oracle, || {
                    format!(
                        "blow-up (g={g}, n={n}, β={beta}): {} enumerated, {} brute force; only enumerated {:?}; only brute {:?}",
                        keys.len(),
                        oracle.len(),
                        keys.difference(&oracle).take(2).collect::<Vec<_>>(),
                        oracle.difference(&keys).take(2).collect::<Vec<_>>()
                    )
                })?;
                compared += 1;
                total += found.len();
                enumerated.blowup.push((beta.clone(), found));
            }
            for d in 1..=3 {
                let beta = cls(&[d]);
                let found = enumerate_conifold_triples(g, n, &beta, &conifold, &caps).map_err(|e| e.to_string())?;
                let pairs = conifold_pairs_cache.entry(beta.clone()).or_insert_with(|| conifold_pairs(&beta));
                let oracle = brute_conifold.triples(g, n, pairs);
                let keys = enumerated_keys(&found);
                ensure(keys == oracle, || {
                    format!(
                        "conifold (g={g}, n={n}, β={beta}): {} enumerated, {} brute force",
                        keys.len(),
                        oracle.len()
                    )
                })?;
                compared += 1;
                total += found.len();
                enumerated.conifold.push((beta, found));
            }
        }
    }
    *store = Some(enumerated);
    Ok(format!("{compared} (g, n, β) cases, {total} triples"))
}

// ---------------------------------------------------------------------------
// 6. Dimension additivity

fn dimension_additivity(enumerated: Option<&Enumerated>) -> Outcome {
    let enumerated = enumerated.ok_or("no triples from criterion 5")?;
    let blowup = local_p1::blowup_degeneration();
    let conifold = local_p1::conifold_degeneration();
    let dims = Dimensions::default();
    let mut count = 0;
    for (beta, triples) in &enumerated.blowup {
        let k = blowup.total().canonical_pair(beta).map_err(|e| e.to_string())?;
        for t in triples {
            let (l, r) = vdim_additivity(&t.triple, k, blowup.sides(), &dims).map_err(|e| e.to_string())?;
            let (fl, fr) = vdim_flop_form(&t.triple, beta, &blowup).map_err(|e| e.to_string())?;
            ensure(l == r && fl == fr && l == fl && r == fr, || {
                format!("{}: general {l} = {r}, flop form {fl} = {fr}", t.triple)
            })?;
            count += 1;
        }
    }
    for (beta, triples) in &enumerated.conifold {
        let k = conifold.total().canonical_pair(beta).map_err(|e| e.to_string())?;
        for t in triples {
            let (l, r) = vdim_additivity(&t.triple, k, conifold.sides(), &dims).map_err(|e| e.to_string())?;
            let (cl, cr) = vdim_conifold_form(&t.triple, beta, &conifold).map_err(|e| e.to_string())?;
            ensure(l == r && cl == cr && l == cl && r == cr, || {
                format!("{}: general {l} = {r}, conifold form {cl} = {cr}", t.triple)
            })?;
            count += 1;
        }
    }
    ensure(count > 0, || "no triples to check".into())?;
    Ok(format!("{count} triples"))
}

// ---------------------------------------------------------------------------
// 7. Transition consistency

fn transition(rng: &mut StdRng, controls: &mut Vec<Outcome>) -> Outcome {
    let geom = local_p1::transition_geometry();
    let point = ["1pp", "1pp", "ptpp"];
    let domain: [(&[&str], Vec<String>); 3] =
        [(&[], vec![]), (&["ptpp"], strings(&["pt"])), (&point, strings(&["1", "1", "pt"]))];
    let mut cases = 0;
    for _ in 0..150 {
        let d = rng.gen_range(1..=4i64);
        let genus = rng.gen_range(0..3u32);
        let (target_labels, source_labels) = &domain[rng.gen_range(0..3)];
        let mut table = GwTable::new(local_p1::x());
        let mut oracle = Rational::zero();
        for l in 0..=d {
            if rng.gen_bool(0.75) {
                let v = ratio(rng.gen_range(-30..30), rng.gen_range(1..6));
                oracle += &v;
                table.insert(GwKey::new(genus, cls(&[l, d]), source_labels.clone()), v).unwrap();
            }
        }
        let beta = cls(&[d]);
        let direct = transition_transform(&table, genus, &beta, target_labels, &geom).map_err(|e| e.to_string())?;
        ensure(direct == oracle, || format!("finite sum {direct} differs from {oracle}"))?;
        for cutoff in d as u32..=d as u32 + 3 {
            let fiber = transition_transform_fiber_sum(&table, genus, &beta, target_labels, &geom, cutoff)
                .map_err(|e| e.to_string())?;
            ensure(fiber == direct, || format!("fiber sum {fiber} differs from {direct} at cutoff {cutoff}"))?;
        }
        cases += 1;
    }

    // 3-point equality on round-trip tables.
    let mut round_trips = 0;
    for _ in 0..30 {
        let mut table = GwTable::new(local_p1::x());
        for d in 1..=4i64 {
            for l in 0..=d {
                if rng.gen_bool(0.6) {
                    let key = GwKey::new(0, cls(&[l, d]), strings(&["1", "1", "pt"]));
                    table.insert(key, ratio(rng.gen_range(-30..30), rng.gen_range(1..6))).unwrap();
                }
            }
        }
        let mut target = GwTable::new(local_p1::smoothing());
        for d in 1..=4 {
            let v = transition_transform(&table, 0, &cls(&[d]), &point, &geom).map_err(|e| e.to_string())?;
            if !v.is_zero() {
                target.insert(GwKey::new(0, cls(&[d]), strings(&point)), v).unwrap();
            }
        }
        let check = transition_threepoint_check(&table, &target, point, &geom).map_err(|e| e.to_string())?;
        ensure(check.holds, || format!("{} vs {}", check.transported, check.target))?;
        round_trips += 1;
        if round_trips % 10 == 0 {
            controls.push(transition_control(rng, &table, &target));
        }
    }
    Ok(format!("{cases} fiber-sum cases, {round_trips} 3-point round trips"))
}

/// Perturbs one value of either table and expects the 3-point check to
/// fail; also plants an entry outside `I_β` and expects the fiber sum to
/// report it.
fn transition_control(rng: &mut StdRng, table: &GwTable, target: &GwTable) -> Outcome {
    let geom = local_p1::transition_geometry();
    let point = ["1pp", "1pp", "ptpp"];
    let perturb = |t: &GwTable, key: &GwKey| -> Result<GwTable, String> {
        let mut out = GwTable::new(t.lattice().clone());
        let mut touched = false;
        for (k, v) in t.entries() {
            touched |= k == key;
            out.insert(k.clone(), if k == key { v + Rational::one() } else { v.clone() }).map_err(|e| e.to_string())?;
        }
        if !touched {
            out.insert(key.clone(), Rational::one()).map_err(|e| e.to_string())?;
        }
        Ok(out)
    };
    let d = rng.gen_range(1..=4i64);
    let x_key = GwKey::new(0, cls(&[rng.gen_range(0..=d), d]), strings(&["1", "1", "pt"]));
    let xpp_key = GwKey::new(0, cls(&[d]), strings(&point));
    let bad_x = perturb(table, &x_key)?;
    let bad_xpp = perturb(target, &xpp_key)?;
    let run = |a: &GwTable, b: &GwTable| transition_threepoint_check(a, b, point, &geom).map(|c| c.holds);
    ensure(!run(&bad_x, target).map_err(|e| e.to_string())?, || format!("X entry {} unnoticed", x_key.beta))?;
    ensure(!run(table, &bad_xpp).map_err(|e| e.to_string())?, || format!("X'' entry {} unnoticed", xpp_key.beta))?;

    let outside = GwKey::new(0, cls(&[d + 1, d]), strings(&["1", "1", "pt"]));
    let planted = perturb(table, &outside)?;
    let r = transition_transform_fiber_sum(&planted, 0, &cls(&[d]), &point, &geom, d as u32 + 2);
    ensure(matches!(r, Err(Error::VanishingViolation { .. })), || "entry outside I_β summed silently".into())?;
    Ok(format!("transition broken at {} and {}", x_key.beta, xpp_key.beta))
}

#[test]
fn acceptance_criteria() {
    let mut rng = StdRng::seed_from_u64(0x5eed_f10b);
    let mut wall_controls = Vec::new();
    let mut transition_controls = Vec::new();
    let mut enumerated = None;
    let results = [
        run(1, "Chow ring normal form", Duration::from_secs(1), chow_ring),
        run(2, "multiple-cover tail", Duration::from_secs(1), multiple_cover),
        run(3, "wall-crossing", Duration::from_secs(10), || wallcrossing(&mut rng, &mut wall_controls)),
        run(4, "flop involution", Duration::from_secs(5), || flop_involution(&mut rng)),
        run(5, "triple enumeration oracle", Duration::from_secs(60), || enumeration_oracle(&mut enumerated)),
        run(6, "dimension additivity", Duration::from_secs(10), || dimension_additivity(enumerated.as_ref())),
        run(7, "transition consistency", Duration::from_secs(10), || transition(&mut rng, &mut transition_controls)),
        run(8, "negative controls", Duration::from_secs(1), || {
            ensure(!wall_controls.is_empty() && !transition_controls.is_empty(), || {
                "negative controls did not run".into()
            })?;
            for control in wall_controls.iter().chain(&transition_controls) {
                control.clone()?;
            }
            Ok(format!(
                "{} wall-crossing and {} transition perturbations detected",
                wall_controls.len(),
                transition_controls.len()
            ))
        }),
    ];
    assert!(results.iter().all(|&p| p), "some acceptance criteria failed");
}
