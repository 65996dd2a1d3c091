//! Gromov-Witten tables and how they transform under a standard flop and a
//! small extremal transition.
//!
//! Insertion classes are labels carrying a codimension, the intersection
//! number with the exceptional curve `C`, an optional image label on the
//! other side, and the classical degree-0 triple products among them.

mod flop;
mod transition;

pub use flop::{
    flop_involution_check, flop_transform, triple_product_correction, wallcrossing_check, FlopGeometry, FlopOutcome,
    ProductCorrection, WallCrossing, FLOP_PROVENANCE,
};
pub use transition::{
    transition_index_set, transition_threepoint_check, transition_transform, transition_transform_fiber_sum,
    TransitionCheck, TransitionGeometry,
};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::lattice::{CurveClass, CurveClassLattice};
use crate::novikov::NovikovElement;
use crate::rational::int;
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertionClass {
    pub label: String,
    pub codim: u8,
    /// Intersection number `C·α` with the exceptional curve.
    pub c_pairing: i64,
    /// Label of the corresponding class on the other side, if any.
    pub image: Option<String>,
}

/// Insertion classes of one 3-fold with their classical triple products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertionRegistry {
    lattice: String,
    classes: BTreeMap<String, InsertionClass>,
    products: BTreeMap<[String; 3], Rational>,
}

fn sorted3(a: &str, b: &str, c: &str) -> [String; 3] {
    let mut key = [a.to_string(), b.to_string(), c.to_string()];
    key.sort();
    key
}

impl InsertionRegistry {
    pub fn new(lattice: impl Into<String>) -> Self {
        InsertionRegistry { lattice: lattice.into(), classes: BTreeMap::new(), products: BTreeMap::new() }
    }

    pub fn lattice(&self) -> &str {
        &self.lattice
    }

    /// Only divisors can meet `C` with nonzero intersection; higher
    /// codimension classes are assumed moved off `C`.
    pub fn add_class(&mut self, class: InsertionClass) -> Result<()> {
        if class.codim > 3 {
            return Err(Error::InvalidInsertion(format!("`{}` has codimension {}", class.label, class.codim)));
        }
        if class.codim != 1 && class.c_pairing != 0 {
            return Err(Error::InvalidInsertion(format!(
                "`{}` has codimension {} but meets C with intersection {}",
                class.label, class.codim, class.c_pairing
            )));
        }
        if self.classes.contains_key(&class.label) {
            return Err(Error::InvalidInsertion(format!("`{}` registered twice", class.label)));
        }
        self.classes.insert(class.label.clone(), class);
        Ok(())
    }

    pub fn class(&self, label: &str) -> Result<&InsertionClass> {
        self.classes
            .get(label)
            .ok_or_else(|| Error::InvalidInsertion(format!("unknown insertion `{label}` on `{}`", self.lattice)))
    }

    pub fn classes(&self) -> impl Iterator<Item = &InsertionClass> {
        self.classes.values()
    }

    pub fn products(&self) -> &BTreeMap<[String; 3], Rational> {
        &self.products
    }

    pub fn set_product(&mut self, a: &str, b: &str, c: &str, value: Rational) -> Result<()> {
        let codim: u8 = [a, b, c].iter().map(|l| self.class(l).map(|k| k.codim)).sum::<Result<u8>>()?;
        if codim != 3 {
            return Err(Error::InvalidInsertion(format!(
                "({a}, {b}, {c}) has total codimension {codim}; only codimension 3 has a degree-0 part"
            )));
        }
        self.products.insert(sorted3(a, b, c), value);
        Ok(())
    }

    pub fn has_product(&self, a: &str, b: &str, c: &str) -> bool {
        self.products.contains_key(&sorted3(a, b, c))
    }

    /// `(α1·α2·α3)_0`, zero unless the codimensions add up to 3.
    pub fn product(&self, a: &str, b: &str, c: &str) -> Result<Rational> {
        let codim: u8 = [a, b, c].iter().map(|l| self.class(l).map(|k| k.codim)).sum::<Result<u8>>()?;
        if codim != 3 {
            return Ok(Rational::zero());
        }
        self.products.get(&sorted3(a, b, c)).cloned().ok_or_else(|| Error::MissingProduct(format!("{a}, {b}, {c}")))
    }

    /// `(C·α1)(C·α2)(C·α3)`.
    pub fn c_product(&self, labels: [&str; 3]) -> Result<i64> {
        labels.iter().map(|l| self.class(l).map(|k| k.c_pairing)).product()
    }
}

/// Key of a GW invariant `Ψ_(g,n;β)(α1, ..., αn)`; `n` is the number of labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GwKey {
    pub genus: u32,
    pub beta: CurveClass,
    labels: Vec<String>,
}

impl GwKey {
    pub fn new(genus: u32, beta: CurveClass, labels: Vec<String>) -> Self {
        let mut labels = labels;
        labels.sort();
        GwKey { genus, beta, labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> usize {
        self.labels.len()
    }
}

/// Finitely many GW invariants of one 3-fold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwTable {
    lattice: Arc<CurveClassLattice>,
    entries: BTreeMap<GwKey, Rational>,
    /// Genus-0 invariants on multiples of `C` follow the `1/m^3` rule.
    pub multiple_cover: bool,
    /// Transformations applied so far, innermost first.
    pub provenance: Vec<String>,
}

impl GwTable {
    pub fn new(lattice: Arc<CurveClassLattice>) -> Self {
        GwTable { lattice, entries: BTreeMap::new(), multiple_cover: false, provenance: Vec::new() }
    }

    pub fn lattice(&self) -> &Arc<CurveClassLattice> {
        &self.lattice
    }

    pub fn insert(&mut self, key: GwKey, value: Rational) -> Result<()> {
        self.lattice.check(&key.beta)?;
        if !self.lattice.is_effective(&key.beta)? {
            return Err(Error::InvalidEntry(format!("class {} is not effective", key.beta)));
        }
        if self.entries.contains_key(&key) {
            return Err(Error::InvalidEntry(format!(
                "duplicate entry ({}, {}, {})",
                key.genus,
                key.points(),
                key.beta
            )));
        }
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn get(&self, key: &GwKey) -> Rational {
        self.entries.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> &BTreeMap<GwKey, Rational> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `a1 a2 a3 · q^C / (1 - q^C)`, the genus-0 multiple covers of `C`.
pub fn multiple_cover_tail(
    lattice: &Arc<CurveClassLattice>,
    a: [i64; 3],
    curve: &CurveClass,
) -> Result<NovikovElement> {
    let c = int(a[0] * a[1] * a[2]);
    if c.is_zero() {
        return Ok(NovikovElement::zero(lattice));
    }
    NovikovElement::tail(lattice, c, curve.clone(), curve.clone())
}

/// `Ψ(α1, α2, α3) = (α1·α2·α3)_0 + Σ_β Ψ_(0,3;β) q^β + tail`, where the sum
/// runs over the table's nonzero classes that are not multiples of
/// `curve`, and the tail is the multiple-cover series of `curve`.
pub fn three_point_function(
    table: &GwTable,
    registry: &InsertionRegistry,
    labels: [&str; 3],
    curve: Option<&CurveClass>,
) -> Result<NovikovElement> {
    let lattice = table.lattice();
    if registry.lattice() != lattice.name() {
        return Err(Error::LatticeMismatch { expected: lattice.name().into(), found: registry.lattice().into() });
    }
    let classical = registry.product(labels[0], labels[1], labels[2])?;
    let mut out = NovikovElement::constant(lattice, classical);
    let wanted = sorted3(labels[0], labels[1], labels[2]);
    for (key, value) in table.entries() {
        if key.genus != 0 || key.labels != wanted || key.beta.is_zero() || value.is_zero() {
            continue;
        }
        if let Some(c) = curve {
            if key.beta.multiple_of(c).is_some() {
                return Err(Error::InvalidEntry(format!(
                    "explicit 3-point invariant on {} conflicts with the multiple-cover series",
                    key.beta
                )));
            }
        }
        out = out.add(&NovikovElement::monomial(lattice, key.beta.clone(), value.clone())?)?;
    }
    if let Some(c) = curve {
        let mut a = [0; 3];
        for (slot, label) in a.iter_mut().zip(labels) {
            *slot = registry.class(label)?.c_pairing;
        }
        if a.iter().all(|&x| x != 0) {
            if !table.multiple_cover {
                return Err(Error::InvalidEntry(
                    "insertions meet C but the table carries no multiple-cover rule".into(),
                ));
            }
            out = out.add(&multiple_cover_tail(lattice, a, c)?)?;
        }
    }
    Ok(out)
}
