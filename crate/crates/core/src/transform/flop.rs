//! Standard flops: transport of GW tables and the wall-crossing of 3-point
//! functions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{three_point_function, GwKey, GwTable, InsertionRegistry};
use crate::lattice::{CurveClass, CurveClassLattice, LatticeMap};
use crate::novikov::NovikovElement;
use crate::rational::int;
use crate::{Error, Rational, Result};

/// Provenance tag written by `flop_transform`.
pub const FLOP_PROVENANCE: &str = "flop-invariance";

/// `X` and its flop `X'` along `C`, with `φ: H_2(X) -> H_2(X')` and the
/// insertion classes on both sides.
#[derive(Clone, Debug)]
pub struct FlopGeometry {
    phi: LatticeMap,
    phi_inverse: LatticeMap,
    curve: CurveClass,
    flopped_curve: CurveClass,
    insertions: InsertionRegistry,
    flopped_insertions: InsertionRegistry,
}

impl FlopGeometry {
    /// Checks `φ[C] = -[C']`, that `φ` and `φ^-1` are inverse, that each
    /// insertion image exists on the other side with the same codimension
    /// and opposite `C`-pairing, and fills in the triple products of `X'`
    /// that follow from those of `X`.
    pub fn new(
        phi: LatticeMap,
        phi_inverse: LatticeMap,
        curve: CurveClass,
        flopped_curve: CurveClass,
        insertions: InsertionRegistry,
        flopped_insertions: InsertionRegistry,
    ) -> Result<Self> {
        let (x, xp) = (phi.source().clone(), phi.target().clone());
        if phi_inverse.source().name() != xp.name() || phi_inverse.target().name() != x.name() {
            return Err(Error::InvalidGeometry("φ^-1 must map X' back to X".into()));
        }
        if insertions.lattice() != x.name() || flopped_insertions.lattice() != xp.name() {
            return Err(Error::InvalidGeometry("insertion registries are attached to the wrong lattices".into()));
        }
        for (lattice, class) in [(&x, &curve), (&xp, &flopped_curve)] {
            lattice.check(class)?;
            if class.is_zero() || !lattice.is_effective(class)? {
                return Err(Error::InvalidGeometry(format!("flopping curve {class} must be effective")));
            }
        }
        if phi.apply(&curve)? != -&flopped_curve || phi_inverse.apply(&flopped_curve)? != -&curve {
            return Err(Error::InvalidGeometry("φ must send [C] to -[C'] and back".into()));
        }
        let round = phi_inverse.after(&phi, "id")?;
        let round_back = phi.after(&phi_inverse, "id")?;
        let identity = |m: &LatticeMap| {
            m.matrix().iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, &v)| v == (i == j) as i64))
        };
        if !identity(&round) || !identity(&round_back) {
            return Err(Error::InvalidGeometry("φ^-1 is not inverse to φ".into()));
        }
        check_images(&insertions, &flopped_insertions)?;
        check_images(&flopped_insertions, &insertions)?;
        let mut geometry = FlopGeometry { phi, phi_inverse, curve, flopped_curve, insertions, flopped_insertions };
        geometry.complete_flopped_products()?;
        Ok(geometry)
    }

    /// Builds `φ` from the common blow-up `X̃` with projections to `X` and
    /// `X'`: a class is lifted to the unique preimage meeting `E` trivially
    /// and pushed down to the other side. `fibers` are the rulings of `E`
    /// contracted by `down` and `flopped_down` respectively.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blowup(
        down: &LatticeMap,
        flopped_down: &LatticeMap,
        divisor: &str,
        fibers: [&CurveClass; 2],
        curve: CurveClass,
        flopped_curve: CurveClass,
        insertions: InsertionRegistry,
        flopped_insertions: InsertionRegistry,
    ) -> Result<Self> {
        let transport = |from: &LatticeMap, to: &LatticeMap, fiber: &CurveClass, name: &str| -> Result<LatticeMap> {
            let rank = from.target().rank();
            let images = (0..rank)
                .map(|i| to.apply(&from.zero_pairing_lift(&CurveClass::unit(rank, i), divisor, fiber)?))
                .collect::<Result<Vec<_>>>()?;
            LatticeMap::from_images(name, from.target().clone(), to.target().clone(), &images)
        };
        let phi = transport(down, flopped_down, fibers[0], "phi")?;
        let phi_inverse = transport(flopped_down, down, fibers[1], "phi_inv")?;
        Self::new(phi, phi_inverse, curve, flopped_curve, insertions, flopped_insertions)
    }

    pub fn phi(&self) -> &LatticeMap {
        &self.phi
    }

    pub fn phi_inverse(&self) -> &LatticeMap {
        &self.phi_inverse
    }

    pub fn curve(&self) -> &CurveClass {
        &self.curve
    }

    pub fn flopped_curve(&self) -> &CurveClass {
        &self.flopped_curve
    }

    pub fn insertions(&self) -> &InsertionRegistry {
        &self.insertions
    }

    pub fn flopped_insertions(&self) -> &InsertionRegistry {
        &self.flopped_insertions
    }

    pub fn source(&self) -> &Arc<CurveClassLattice> {
        self.phi.source()
    }

    pub fn target(&self) -> &Arc<CurveClassLattice> {
        self.phi.target()
    }

    fn complete_flopped_products(&mut self) -> Result<()> {
        let products: Vec<([String; 3], Rational)> =
            self.insertions.products().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (labels, _) in products {
            if labels.iter().any(|l| self.insertions.class(l).map_or(true, |k| k.image.is_none())) {
                continue;
            }
            let correction = triple_product_correction([&labels[0], &labels[1], &labels[2]], self)?;
            let [a, b, c] = &correction.flopped_labels;
            if !self.flopped_insertions.has_product(a, b, c) {
                self.flopped_insertions.set_product(a, b, c, correction.flopped)?;
            }
        }
        Ok(())
    }

    /// Map, curves and registry for transport out of `lattice`.
    fn oriented(&self, lattice: &str) -> Result<Oriented<'_>> {
        if lattice == self.source().name() {
            Ok(Oriented {
                map: &self.phi,
                curve: &self.curve,
                target_curve: &self.flopped_curve,
                insertions: &self.insertions,
            })
        } else if lattice == self.target().name() {
            Ok(Oriented {
                map: &self.phi_inverse,
                curve: &self.flopped_curve,
                target_curve: &self.curve,
                insertions: &self.flopped_insertions,
            })
        } else {
            Err(Error::LatticeMismatch { expected: self.source().name().into(), found: lattice.into() })
        }
    }
}

struct Oriented<'a> {
    map: &'a LatticeMap,
    curve: &'a CurveClass,
    target_curve: &'a CurveClass,
    insertions: &'a InsertionRegistry,
}

fn check_images(from: &InsertionRegistry, to: &InsertionRegistry) -> Result<()> {
    for class in from.classes() {
        let Some(image) = &class.image else { continue };
        let target = to.class(image)?;
        if target.codim != class.codim || target.c_pairing != -class.c_pairing {
            return Err(Error::InvalidInsertion(format!(
                "`{}` and its image `{image}` must share codimension and have opposite C-pairings",
                class.label
            )));
        }
        if target.image.as_deref().is_some_and(|back| back != class.label) {
            return Err(Error::InvalidInsertion(format!("image of `{image}` is not `{}`", class.label)));
        }
    }
    Ok(())
}

fn image_label(registry: &InsertionRegistry, label: &str) -> Result<String> {
    registry
        .class(label)?
        .image
        .clone()
        .ok_or_else(|| Error::InvalidInsertion(format!("`{label}` has no image across the flop")))
}

/// `φ(α1)·φ(α2)·φ(α3) = α1·α2·α3 - (C·α1)(C·α2)(C·α3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCorrection {
    pub labels: [String; 3],
    pub flopped_labels: [String; 3],
    pub original: Rational,
    pub correction: Rational,
    pub flopped: Rational,
}

pub fn triple_product_correction(labels: [&str; 3], geometry: &FlopGeometry) -> Result<ProductCorrection> {
    let reg = &geometry.insertions;
    let original = reg.product(labels[0], labels[1], labels[2])?;
    let correction = -int(reg.c_product(labels)?);
    let flopped_labels = [image_label(reg, labels[0])?, image_label(reg, labels[1])?, image_label(reg, labels[2])?];
    Ok(ProductCorrection {
        labels: labels.map(|l| l.to_string()),
        flopped_labels,
        flopped: &original + &correction,
        original,
        correction,
    })
}

/// A flop-transformed table and the entries that could not be transported.
#[derive(Clone, Debug)]
pub struct FlopOutcome {
    pub table: GwTable,
    pub rejected: Vec<(GwKey, Error)>,
}

/// Transports every entry across the flop, in whichever direction the
/// table's lattice dictates. Classes off the ray of `C` move by `φ`;
/// `m[C]` with no insertions goes to `m[C']`. Entries on `m[C]` with
/// insertions, degree-0 entries and entries whose image is not effective
/// are rejected.
pub fn flop_transform(table: &GwTable, geometry: &FlopGeometry) -> Result<FlopOutcome> {
    let side = geometry.oriented(table.lattice().name())?;
    let target = side.map.target().clone();
    let mut out = GwTable::new(target.clone());
    out.multiple_cover = table.multiple_cover;
    out.provenance = table.provenance.clone();
    if out.provenance.last().map(String::as_str) == Some(FLOP_PROVENANCE) {
        out.provenance.pop();
    } else {
        out.provenance.push(FLOP_PROVENANCE.to_string());
    }
    let mut rejected = Vec::new();
    for (key, value) in table.entries() {
        match transport_entry(key, &side, &target) {
            Ok(new_key) => out.insert(new_key, value.clone())?,
            Err(e) => rejected.push((key.clone(), e)),
        }
    }
    Ok(FlopOutcome { table: out, rejected })
}

fn transport_entry(key: &GwKey, side: &Oriented<'_>, target: &CurveClassLattice) -> Result<GwKey> {
    if key.beta.is_zero() {
        return Err(Error::InvalidEntry("degree-0 invariants are not transported".into()));
    }
    if let Some(m) = key.beta.multiple_of(side.curve) {
        if key.points() > 0 {
            return Err(Error::InvalidEntry(format!(
                "{} is a multiple of the flopping curve and carries insertions",
                key.beta
            )));
        }
        return Ok(GwKey::new(key.genus, side.target_curve.scale(m), Vec::new()));
    }
    let beta = side.map.apply(&key.beta)?;
    if !target.is_effective(&beta)? {
        return Err(Error::InvalidEntry(format!("image {beta} of {} is not effective", key.beta)));
    }
    let labels = key.labels().iter().map(|l| image_label(side.insertions, l)).collect::<Result<Vec<_>>>()?;
    Ok(GwKey::new(key.genus, beta, labels))
}

/// Whether transporting twice returns the table unchanged.
pub fn flop_involution_check(table: &GwTable, geometry: &FlopGeometry) -> Result<bool> {
    let once = flop_transform(table, geometry)?;
    if !once.rejected.is_empty() {
        return Ok(false);
    }
    let twice = flop_transform(&once.table, geometry)?;
    Ok(twice.rejected.is_empty() && twice.table == *table)
}

#[derive(Clone, Debug)]
pub struct WallCrossing {
    /// `φ(Ψ^X(α))` after analytic continuation.
    pub transported: NovikovElement,
    /// `Ψ^X'(φα)`.
    pub flopped: NovikovElement,
    pub isomorphic: bool,
    /// Classical part of `Ψ^X'` minus that of `Ψ^X`.
    pub discrepancy: Rational,
    /// `-(C·α1)(C·α2)(C·α3)`, the constant produced by the continuation.
    pub expected_discrepancy: Rational,
}

impl WallCrossing {
    pub fn holds(&self) -> bool {
        self.isomorphic && self.discrepancy == self.expected_discrepancy
    }
}

/// Compares `φ(Ψ^X(α1, α2, α3))` with `Ψ^X'(φα1, φα2, φα3)`.
pub fn wallcrossing_check(
    table: &GwTable,
    flopped_table: &GwTable,
    labels: [&str; 3],
    geometry: &FlopGeometry,
) -> Result<WallCrossing> {
    if table.lattice().name() != geometry.source().name() {
        return Err(Error::LatticeMismatch {
            expected: geometry.source().name().into(),
            found: table.lattice().name().into(),
        });
    }
    let reg = &geometry.insertions;
    let images = [image_label(reg, labels[0])?, image_label(reg, labels[1])?, image_label(reg, labels[2])?];
    let images = [images[0].as_str(), images[1].as_str(), images[2].as_str()];
    let psi = three_point_function(table, reg, labels, Some(&geometry.curve))?;
    let transported = psi.substitute(&geometry.phi)?.analytic_continue()?;
    let flopped =
        three_point_function(flopped_table, &geometry.flopped_insertions, images, Some(&geometry.flopped_curve))?;
    let isomorphic = transported.isomorphic(&flopped)?;
    let discrepancy = geometry.flopped_insertions.product(images[0], images[1], images[2])?
        - reg.product(labels[0], labels[1], labels[2])?;
    let expected_discrepancy = -int(reg.c_product(labels)?);
    Ok(WallCrossing { transported, flopped, isomorphic, discrepancy, expected_discrepancy })
}
