//! A small worked geometry: a 3-fold `X` containing a `(-1,-1)` curve `C`
//! and a line `L` meeting it once, its flop `X'`, the common blow-up `X̃`,
//! the projective bundle `Y` over `C`, and the smoothing `X''` of the
//! contraction, degenerating to the blown-up conifold and a quadric `Q`.
//!
//! Bases: `X = (C, L)`, `X' = (C', L')`, `X̃ = (Ct, F, Lt)` where `Ct` and
//! `F` are the two rulings of `E`, `Y = (Cb, Fy)`, `X'' = (L'')`, `Q = (line)`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::chow::{Polynomial, RingPresentation};
use crate::degeneration::{BlowupDegeneration, ConifoldDegeneration};
use crate::lattice::{CurveClass, CurveClassLattice, LatticeMap};
use crate::rational::int;
use crate::transform::{FlopGeometry, InsertionClass, InsertionRegistry, TransitionGeometry};

fn lattice(name: &str, generators: &[&str], divisors: &[(&str, &[i64])], canonical: &[i64]) -> Arc<CurveClassLattice> {
    let rank = generators.len();
    Arc::new(
        CurveClassLattice::new(
            name,
            generators.iter().map(|g| g.to_string()).collect(),
            (0..rank).map(|i| CurveClass::unit(rank, i)).collect(),
            divisors.iter().map(|(l, f)| (l.to_string(), f.to_vec())).collect(),
            canonical.to_vec(),
        )
        .expect("built-in lattice"),
    )
}

fn map(name: &str, source: Arc<CurveClassLattice>, target: Arc<CurveClassLattice>, rows: &[&[i64]]) -> LatticeMap {
    LatticeMap::new(name, source, target, rows.iter().map(|r| r.to_vec()).collect()).expect("built-in map")
}

pub fn x() -> Arc<CurveClassLattice> {
    lattice("X", &["C", "L"], &[("H", &[1, 1])], &[0, -1])
}

pub fn x_flopped() -> Arc<CurveClassLattice> {
    lattice("Xp", &["Cp", "Lp"], &[("Hp", &[-1, 2])], &[0, -1])
}

pub fn x_blown_up() -> Arc<CurveClassLattice> {
    lattice("Xt", &["Ct", "F", "Lt"], &[("E", &[-1, -1, 1]), ("H", &[1, 0, 1])], &[-1, -1, 0])
}

pub fn bundle() -> Arc<CurveClassLattice> {
    lattice("Y", &["Cb", "Fy"], &[("E", &[0, 1]), ("H", &[1, 1])], &[0, -3])
}

pub fn smoothing() -> Arc<CurveClassLattice> {
    lattice("Xpp", &["Lpp"], &[], &[-1])
}

pub fn quadric() -> Arc<CurveClassLattice> {
    lattice("Q", &["line"], &[("E", &[1])], &[-3])
}

/// `[C]` in `X`, also `[C']` in `X'`.
pub fn curve() -> CurveClass {
    CurveClass::new(vec![1, 0])
}

/// The fiber of `E -> C` contracted by the blow-down to `X`.
pub fn fiber() -> CurveClass {
    CurveClass::new(vec![0, 1, 0])
}

/// The ruling of `E` contracted by the blow-down to `X'`.
pub fn flopped_fiber() -> CurveClass {
    CurveClass::new(vec![1, 0, 0])
}

pub fn blow_down() -> LatticeMap {
    map("p1", x_blown_up(), x(), &[&[1, 0, 0], &[0, 0, 1]])
}

pub fn flopped_blow_down() -> LatticeMap {
    map("p1p", x_blown_up(), x_flopped(), &[&[0, 1, 0], &[0, 0, 1]])
}

pub fn bundle_projection() -> LatticeMap {
    map("p2", bundle(), x(), &[&[1, 0], &[0, 0]])
}

/// `X̃ -> X''`, contracting both rulings of `E`.
pub fn contraction() -> LatticeMap {
    map("pc", x_blown_up(), smoothing(), &[&[0, 0, 1]])
}

/// `φ_e: H_2(X) -> H_2(X'')`.
pub fn phi_e() -> LatticeMap {
    map("phi_e", x(), smoothing(), &[&[0, 1]])
}

fn class(label: &str, codim: u8, c_pairing: i64, image: &str) -> InsertionClass {
    InsertionClass { label: label.into(), codim, c_pairing, image: Some(image.into()) }
}

/// `1`, the hyperplane `H` (meeting `C` once) and a point on `X`.
pub fn insertions() -> InsertionRegistry {
    let mut r = InsertionRegistry::new("X");
    for c in [class("1", 0, 0, "1p"), class("H", 1, 1, "Hp"), class("pt", 3, 0, "ptp")] {
        r.add_class(c).expect("built-in insertion");
    }
    r.set_product("1", "1", "pt", int(1)).expect("built-in product");
    r.set_product("H", "H", "H", int(1)).expect("built-in product");
    r
}

/// The flop images; products are derived from those on `X`.
pub fn flopped_insertions() -> InsertionRegistry {
    let mut r = InsertionRegistry::new("Xp");
    for c in [class("1p", 0, 0, "1"), class("Hp", 1, -1, "H"), class("ptp", 3, 0, "pt")] {
        r.add_class(c).expect("built-in insertion");
    }
    r
}

/// Classes on `X''` with a counterpart on `X` away from `C`.
pub fn smoothing_insertions() -> InsertionRegistry {
    let mut r = InsertionRegistry::new("Xpp");
    for c in [class("1pp", 0, 0, "1"), class("ptpp", 3, 0, "pt")] {
        r.add_class(c).expect("built-in insertion");
    }
    r.set_product("1pp", "1pp", "ptpp", int(1)).expect("built-in product");
    r
}

pub fn flop_geometry() -> FlopGeometry {
    FlopGeometry::from_blowup(
        &blow_down(),
        &flopped_blow_down(),
        "E",
        [&fiber(), &flopped_fiber()],
        curve(),
        curve(),
        insertions(),
        flopped_insertions(),
    )
    .expect("built-in flop")
}

pub fn transition_geometry() -> TransitionGeometry {
    TransitionGeometry::new(phi_e(), blow_down(), contraction(), "E", curve(), insertions(), smoothing_insertions())
        .expect("built-in transition")
}

/// `X` degenerating to `X̃ ∪_E Y`.
pub fn blowup_degeneration() -> BlowupDegeneration {
    BlowupDegeneration::new(blow_down(), bundle_projection(), "E", "E", fiber(), CurveClass::new(vec![0, 1]))
        .expect("built-in degeneration")
}

/// `X''` degenerating to `X̃ ∪_E Q`.
pub fn conifold_degeneration() -> ConifoldDegeneration {
    ConifoldDegeneration::new(contraction(), "E", [flopped_fiber(), fiber()], quadric(), "E", CurveClass::new(vec![1]))
        .expect("built-in degeneration")
}

/// `A*(Y) = Q[v, w] / (v^2, w^3 - 2 v w^2)` with `∫ v w^2 = 1`.
pub fn bundle_chow_ring() -> RingPresentation {
    let mut w3 = Polynomial::new();
    w3.insert(vec![1, 2], int(2));
    let mut integrals = BTreeMap::new();
    integrals.insert(vec![1, 2], int(1));
    let generators: Vec<(String, u32)> = vec![("v".into(), 1), ("w".into(), 1)];
    RingPresentation::new(generators, vec![(vec![2, 0], Polynomial::new()), (vec![0, 3], w3)], 3, integrals)
        .expect("built-in ring")
}
