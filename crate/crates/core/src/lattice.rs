//! Curve-class lattices.
//!
//! A lattice stands for the free part of `H_2(X; Z)` of some 3-fold. It
//! carries semigroup generators of the effective cone, a set of divisor
//! classes (seen only through their pairing functionals) and the canonical
//! class. Lattice maps are integer matrices between lattices.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_integer::Integer;

use crate::{Error, Result};

/// Default bound for the bounded searches deciding cone membership.
pub const DEFAULT_SEARCH_BOUND: u64 = 64;

const PERCEPTRON_STEPS: usize = 10_000;

/// Integer coordinates of a curve class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveClass(Vec<i64>);

impl CurveClass {
    pub fn new(coords: Vec<i64>) -> Self {
        CurveClass(coords)
    }

    pub fn zero(rank: usize) -> Self {
        CurveClass(vec![0; rank])
    }

    pub fn unit(rank: usize, index: usize) -> Self {
        let mut coords = vec![0; rank];
        coords[index] = 1;
        CurveClass(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, factor: i64) -> Self {
        CurveClass(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn dot(&self, functional: &[i64]) -> i64 {
        self.0.iter().zip(functional).map(|(a, b)| a * b).sum()
    }

    /// Returns `m` with `self = m * base`, if any. `base` must be nonzero.
    pub fn multiple_of(&self, base: &CurveClass) -> Option<i64> {
        let pivot = base.0.iter().position(|&c| c != 0)?;
        let (m, rem) = self.0[pivot].div_rem(&base.0[pivot]);
        if rem != 0 {
            return None;
        }
        (base.scale(m) == *self).then_some(m)
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl Add for &CurveClass {
    type Output = CurveClass;
    fn add(self, rhs: &CurveClass) -> CurveClass {
        debug_assert_eq!(self.rank(), rhs.rank());
        CurveClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CurveClass {
    type Output = CurveClass;
    fn sub(self, rhs: &CurveClass) -> CurveClass {
        debug_assert_eq!(self.rank(), rhs.rank());
        CurveClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CurveClass {
    type Output = CurveClass;
    fn neg(self) -> CurveClass {
        self.scale(-1)
    }
}

/// A free lattice of curve classes with its effective cone and pairings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveClassLattice {
    name: String,
    generator_names: Vec<String>,
    effective: Vec<CurveClass>,
    divisors: BTreeMap<String, Vec<i64>>,
    canonical: Vec<i64>,
    grading: Vec<i64>,
}

impl CurveClassLattice {
    /// Validates the data and fixes a grading functional that is strictly
    /// positive on every effective generator. Failing to find one within
    /// the perceptron step budget means the cone is not strictly convex.
    pub fn new(
        name: impl Into<String>,
        generator_names: Vec<String>,
        effective: Vec<CurveClass>,
        divisors: BTreeMap<String, Vec<i64>>,
        canonical: Vec<i64>,
    ) -> Result<Self> {
        let name = name.into();
        let rank = generator_names.len();
        if rank == 0 {
            return Err(Error::InvalidLattice(format!("`{name}` has rank 0")));
        }
        for g in &effective {
            if g.rank() != rank {
                return Err(Error::RankMismatch { expected: rank, found: g.rank() });
            }
            if g.is_zero() {
                return Err(Error::InvalidLattice(format!("`{name}` lists the zero class as an effective generator")));
            }
        }
        for (label, functional) in &divisors {
            if functional.len() != rank {
                return Err(Error::InvalidLattice(format!(
                    "divisor `{label}` on `{name}` has length {} instead of {rank}",
                    functional.len()
                )));
            }
        }
        if canonical.len() != rank {
            return Err(Error::InvalidLattice(format!(
                "canonical functional on `{name}` has length {} instead of {rank}",
                canonical.len()
            )));
        }
        let mut effective = effective;
        effective.sort();
        effective.dedup();
        let grading = positive_functional(&effective, rank)
            .ok_or_else(|| Error::InvalidLattice(format!("effective cone of `{name}` is not strictly convex")))?;
        Ok(CurveClassLattice { name, generator_names, effective, divisors, canonical, grading })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.generator_names.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generator_names
    }

    pub fn effective_generators(&self) -> &[CurveClass] {
        &self.effective
    }

    pub fn divisors(&self) -> &BTreeMap<String, Vec<i64>> {
        &self.divisors
    }

    pub fn canonical(&self) -> &[i64] {
        &self.canonical
    }

    /// A functional strictly positive on all nonzero effective classes.
    pub fn grading(&self) -> &[i64] {
        &self.grading
    }

    pub fn degree(&self, class: &CurveClass) -> i64 {
        class.dot(&self.grading)
    }

    pub fn zero(&self) -> CurveClass {
        CurveClass::zero(self.rank())
    }

    pub fn class(&self, coords: Vec<i64>) -> Result<CurveClass> {
        let class = CurveClass::new(coords);
        self.check(&class)?;
        Ok(class)
    }

    pub fn check(&self, class: &CurveClass) -> Result<()> {
        if class.rank() != self.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), found: class.rank() });
        }
        Ok(())
    }

    pub fn divisor(&self, label: &str) -> Result<&[i64]> {
        self.divisors.get(label).map(Vec::as_slice).ok_or_else(|| Error::UnknownDivisor(label.to_string()))
    }

    /// Intersection number of a divisor with a curve class.
    pub fn pair(&self, label: &str, class: &CurveClass) -> Result<i64> {
        self.check(class)?;
        Ok(class.dot(self.divisor(label)?))
    }

    pub fn canonical_pair(&self, class: &CurveClass) -> Result<i64> {
        self.check(class)?;
        Ok(class.dot(&self.canonical))
    }

    pub fn is_effective(&self, class: &CurveClass) -> Result<bool> {
        self.is_effective_within(class, DEFAULT_SEARCH_BOUND)
    }

    /// Decides whether `class` is a non-negative integer combination of the
    /// effective generators. The search never uses more than `bound` copies
    /// of the cheapest generator; needing more is reported as undecided.
    pub fn is_effective_within(&self, class: &CurveClass, bound: u64) -> Result<bool> {
        self.check(class)?;
        cone_contains(&self.effective, &self.grading, class, bound)
    }

    /// All effective classes `x` such that `class - x` is effective too.
    pub fn effective_parts(&self, class: &CurveClass) -> Result<Vec<CurveClass>> {
        self.check(class)?;
        if !self.is_effective(class)? {
            return Ok(Vec::new());
        }
        let mut out = BTreeSet::new();
        for candidate in self.effective_up_to_degree(self.degree(class), DEFAULT_SEARCH_BOUND)? {
            if self.is_effective(&(class - &candidate))? {
                out.insert(candidate);
            }
        }
        Ok(out.into_iter().collect())
    }

    /// All effective classes whose grading degree is at most `max_degree`.
    pub fn effective_up_to_degree(&self, max_degree: i64, bound: u64) -> Result<Vec<CurveClass>> {
        let min = self.effective.iter().map(|g| self.degree(g)).min().unwrap_or(1);
        if max_degree > 0 && (max_degree / min) as u64 > bound {
            return Err(Error::Undecided(bound));
        }
        let mut found = BTreeSet::new();
        let mut stack = vec![(0usize, self.zero())];
        while let Some((start, class)) = stack.pop() {
            let degree = self.degree(&class);
            for (i, g) in self.effective.iter().enumerate().skip(start) {
                if degree + self.degree(g) <= max_degree {
                    stack.push((i, &class + g));
                }
            }
            found.insert(class);
        }
        Ok(found.into_iter().filter(|c| self.degree(c) <= max_degree).collect())
    }
}

/// Finds an integer functional strictly positive on every vector, by the
/// perceptron iteration; it terminates exactly when one exists.
pub fn positive_functional(vectors: &[CurveClass], rank: usize) -> Option<Vec<i64>> {
    let mut h = vec![0i64; rank];
    for _ in 0..PERCEPTRON_STEPS {
        match vectors.iter().find(|v| v.dot(&h) <= 0) {
            None => return Some(h),
            Some(v) => {
                for (hi, vi) in h.iter_mut().zip(v.coords()) {
                    *hi += vi;
                }
            }
        }
    }
    None
}

/// Cone membership by depth-first search over generator multiplicities,
/// using a grading positive on all generators to bound each multiplicity.
pub fn cone_contains(generators: &[CurveClass], grading: &[i64], class: &CurveClass, bound: u64) -> Result<bool> {
    let degree = class.dot(grading);
    if degree < 0 {
        return Ok(false);
    }
    if degree == 0 || generators.is_empty() {
        return Ok(class.is_zero());
    }
    let min = generators.iter().map(|g| g.dot(grading)).min().unwrap_or(1);
    if (degree / min) as u64 > bound {
        return Err(Error::Undecided(bound));
    }
    let mut dead = BTreeSet::new();
    Ok(search(generators, grading, 0, class.clone(), &mut dead))
}

fn search(
    generators: &[CurveClass],
    grading: &[i64],
    index: usize,
    rest: CurveClass,
    dead: &mut BTreeSet<(usize, CurveClass)>,
) -> bool {
    if rest.is_zero() {
        return true;
    }
    if index == generators.len() || dead.contains(&(index, rest.clone())) {
        return false;
    }
    let g = &generators[index];
    let step = g.dot(grading);
    let mut current = rest.clone();
    let mut used = 0;
    loop {
        if search(generators, grading, index + 1, current.clone(), dead) {
            return true;
        }
        used += step;
        if used > rest.dot(grading) {
            break;
        }
        current = &current - g;
    }
    dead.insert((index, rest));
    false
}

/// An integer matrix between two lattices, acting on coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeMap {
    name: String,
    source: Arc<CurveClassLattice>,
    target: Arc<CurveClassLattice>,
    matrix: Vec<Vec<i64>>,
}

impl LatticeMap {
    /// `matrix` has one row per target coordinate.
    pub fn new(
        name: impl Into<String>,
        source: Arc<CurveClassLattice>,
        target: Arc<CurveClassLattice>,
        matrix: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let name = name.into();
        if matrix.len() != target.rank() || matrix.iter().any(|row| row.len() != source.rank()) {
            return Err(Error::InvalidMap(format!("`{name}` must be a {}x{} matrix", target.rank(), source.rank())));
        }
        Ok(LatticeMap { name, source, target, matrix })
    }

    /// Builds the map sending the i-th source basis vector to `images[i]`.
    pub fn from_images(
        name: impl Into<String>,
        source: Arc<CurveClassLattice>,
        target: Arc<CurveClassLattice>,
        images: &[CurveClass],
    ) -> Result<Self> {
        let rows = (0..target.rank())
            .map(|r| images.iter().map(|img| img.coords().get(r).copied().unwrap_or(0)).collect())
            .collect();
        if images.len() != source.rank() || images.iter().any(|i| i.rank() != target.rank()) {
            return Err(Error::InvalidMap("image list does not match the ranks".into()));
        }
        Self::new(name, source, target, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<CurveClassLattice> {
        &self.source
    }

    pub fn target(&self) -> &Arc<CurveClassLattice> {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn apply(&self, class: &CurveClass) -> Result<CurveClass> {
        self.source.check(class)?;
        Ok(CurveClass::new(self.matrix.iter().map(|row| class.dot(row)).collect()))
    }

    /// `self` after `first`.
    pub fn after(&self, first: &LatticeMap, name: impl Into<String>) -> Result<LatticeMap> {
        if first.target.name() != self.source.name() {
            return Err(Error::LatticeMismatch {
                expected: self.source.name().to_string(),
                found: first.target.name().to_string(),
            });
        }
        let images = (0..first.source.rank())
            .map(|i| self.apply(&first.apply(&CurveClass::unit(first.source.rank(), i))?))
            .collect::<Result<Vec<_>>>()?;
        LatticeMap::from_images(name, first.source.clone(), self.target.clone(), &images)
    }

    /// Pulls a functional on the target back to the source.
    pub fn pull_back(&self, functional: &[i64]) -> Vec<i64> {
        (0..self.source.rank()).map(|j| self.matrix.iter().zip(functional).map(|(row, f)| row[j] * f).sum()).collect()
    }

    /// Effective generators of the source that the map contracts.
    pub fn contracted_generators(&self) -> Vec<CurveClass> {
        self.source
            .effective_generators()
            .iter()
            .filter(|g| self.matrix.iter().all(|row| g.dot(row) == 0))
            .cloned()
            .collect()
    }

    /// Some integer preimage, if the class lies in the image.
    pub fn preimage(&self, class: &CurveClass) -> Result<Option<CurveClass>> {
        self.target.check(class)?;
        Ok(solve_integer(&self.matrix, class.coords()).map(CurveClass::new))
    }

    /// The lift pairing to zero with `divisor`, moving along `fiber`.
    ///
    /// `fiber` must be contracted by the map and pair to `-1` or `1` with
    /// the divisor, which makes the result unique and linear in `class`.
    pub fn zero_pairing_lift(&self, class: &CurveClass, divisor: &str, fiber: &CurveClass) -> Result<CurveClass> {
        let e_fiber = self.source.pair(divisor, fiber)?;
        if e_fiber.abs() != 1 || !self.apply(fiber)?.is_zero() {
            return Err(Error::InvalidMap(format!(
                "fiber {fiber} must be contracted by `{}` and pair to ±1 with `{divisor}`",
                self.name
            )));
        }
        let base = self
            .preimage(class)?
            .ok_or_else(|| Error::NoLift(format!("{class} is not in the image of `{}`", self.name)))?;
        let shift = -self.source.pair(divisor, &base)? * e_fiber;
        Ok(&base + &fiber.scale(shift))
    }

    pub fn minimal_lift(&self, class: &CurveClass) -> Result<CurveClass> {
        self.minimal_lift_within(class, DEFAULT_SEARCH_BOUND)
    }

    /// The effective lift `m` such that every effective lift of `class`
    /// equals `m` plus a non-negative combination of contracted generators.
    pub fn minimal_lift_within(&self, class: &CurveClass, bound: u64) -> Result<CurveClass> {
        self.target.check(class)?;
        let contracted = self.contracted_generators();
        let movers: Vec<(CurveClass, CurveClass)> = self
            .source
            .effective_generators()
            .iter()
            .filter(|g| !contracted.contains(g))
            .map(|g| Ok((g.clone(), self.apply(g)?)))
            .collect::<Result<_>>()?;
        let lifts = effective_lifts(&movers, self.source.rank(), class, bound)?;
        if lifts.is_empty() {
            return Err(Error::NoLift(format!("{class} is not the image of an effective class under `{}`", self.name)));
        }
        let grading = self.source.grading();
        for candidate in &lifts {
            let mut below_all = true;
            for other in &lifts {
                if !cone_contains(&contracted, grading, &(other - candidate), bound)? {
                    below_all = false;
                    break;
                }
            }
            if below_all {
                return Ok(candidate.clone());
            }
        }
        Err(Error::NoLift(format!("{class} has no minimal lifting under `{}`", self.name)))
    }
}

/// Effective combinations of the non-contracted generators mapping to `class`.
fn effective_lifts(
    movers: &[(CurveClass, CurveClass)],
    source_rank: usize,
    class: &CurveClass,
    bound: u64,
) -> Result<BTreeSet<CurveClass>> {
    let mut out = BTreeSet::new();
    if class.is_zero() {
        out.insert(CurveClass::zero(source_rank));
        return Ok(out);
    }
    let images: Vec<CurveClass> = movers.iter().map(|(_, img)| img.clone()).collect();
    let Some(h) = positive_functional(&images, class.rank()) else {
        return Err(Error::NoLift("images of the effective generators are not in a pointed cone".into()));
    };
    let degree = class.dot(&h);
    if degree <= 0 {
        return Ok(out);
    }
    let min = images.iter().map(|i| i.dot(&h)).min().unwrap_or(1);
    if (degree / min) as u64 > bound {
        return Err(Error::Undecided(bound));
    }
    fn walk(
        movers: &[(CurveClass, CurveClass)],
        h: &[i64],
        index: usize,
        rest: CurveClass,
        lift: CurveClass,
        out: &mut BTreeSet<CurveClass>,
    ) {
        if rest.is_zero() {
            out.insert(lift);
            return;
        }
        if index == movers.len() || rest.dot(h) <= 0 {
            return;
        }
        let (gen, img) = &movers[index];
        let (mut rest, mut lift) = (rest, lift);
        loop {
            walk(movers, h, index + 1, rest.clone(), lift.clone(), out);
            rest = &rest - img;
            lift = &lift + gen;
            if rest.dot(h) < 0 {
                break;
            }
        }
    }
    walk(movers, &h, 0, class.clone(), CurveClass::zero(source_rank), &mut out);
    Ok(out)
}

/// Solves `matrix * x = rhs` over the integers by reducing the matrix to
/// column echelon form with unimodular column operations.
pub fn solve_integer(matrix: &[Vec<i64>], rhs: &[i64]) -> Option<Vec<i64>> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = matrix.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut col = 0;
    for row in 0..rows {
        if col == cols {
            break;
        }
        for j in col + 1..cols {
            let (x, y) = (a[row][col], a[row][j]);
            if y == 0 {
                continue;
            }
            let eg = x.extended_gcd(&y);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let (p, q) = (-y / g, x / g);
            let combine = |m: &mut Vec<Vec<i128>>| {
                for r in m.iter_mut() {
                    let (cx, cy) = (r[col], r[j]);
                    r[col] = s * cx + t * cy;
                    r[j] = p * cx + q * cy;
                }
            };
            combine(&mut a);
            combine(&mut u);
        }
        if a[row][col] != 0 {
            pivots.push((row, col));
            col += 1;
        }
    }
    let mut y = vec![0i128; cols];
    let mut next = 0;
    for row in 0..rows {
        let partial: i128 = (0..col).map(|k| a[row][k] * y[k]).sum();
        let residual = rhs[row] as i128 - partial;
        if next < pivots.len() && pivots[next].0 == row {
            let pc = pivots[next].1;
            if residual % a[row][pc] != 0 {
                return None;
            }
            y[pc] = residual / a[row][pc];
            next += 1;
        } else if residual != 0 {
            return None;
        }
    }
    (0..cols).map(|i| i64::try_from((0..cols).map(|k| u[i][k] * y[k]).sum::<i128>()).ok()).collect()
}
