//! Small extremal transitions: `C ⊂ X` is contracted to a node and smoothed
//! to `X''`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::Zero;

use super::{three_point_function, FlopGeometry, GwKey, GwTable, InsertionClass, InsertionRegistry};
use crate::lattice::{CurveClass, LatticeMap};
use crate::novikov::NovikovElement;
use crate::{Error, Rational, Result};

/// `φ_e: H_2(X) -> H_2(X'')` with kernel `Z[C]`, together with the blow-up
/// `X̃` mapping to both (`lift: X̃ -> X`, `contraction: X̃ -> X''`).
///
/// `φ^*(β)` is the image in `X` of the minimal lift of `β` to `X̃`.
/// Labels on `X''` whose `image` is set name the corresponding class on
/// `X`; only those can be inserted.
#[derive(Clone, Debug)]
pub struct TransitionGeometry {
    phi_e: LatticeMap,
    lift: LatticeMap,
    contraction: LatticeMap,
    divisor: String,
    curve: CurveClass,
    insertions: InsertionRegistry,
    target_insertions: InsertionRegistry,
}

impl TransitionGeometry {
    pub fn new(
        phi_e: LatticeMap,
        lift: LatticeMap,
        contraction: LatticeMap,
        divisor: impl Into<String>,
        curve: CurveClass,
        insertions: InsertionRegistry,
        target_insertions: InsertionRegistry,
    ) -> Result<Self> {
        let divisor = divisor.into();
        let (x, xpp, xt) = (phi_e.source(), phi_e.target(), lift.source());
        if lift.target().name() != x.name()
            || contraction.source().name() != xt.name()
            || contraction.target().name() != xpp.name()
        {
            return Err(Error::InvalidGeometry("maps do not form X̃ -> X -> X'' over X̃ -> X''".into()));
        }
        if phi_e.after(&lift, "composite")?.matrix() != contraction.matrix() {
            return Err(Error::InvalidGeometry("φ_e after the blow-down differs from the contraction".into()));
        }
        xt.divisor(&divisor)?;
        x.check(&curve)?;
        let primitive = curve.coords().iter().fold(0i64, |g, &c| g.gcd(&c)) == 1;
        if !primitive || !x.is_effective(&curve)? || !phi_e.apply(&curve)?.is_zero() || x.rank() != xpp.rank() + 1 {
            return Err(Error::InvalidGeometry(format!(
                "the kernel of φ_e must be spanned by the effective primitive class {curve}"
            )));
        }
        if insertions.lattice() != x.name() || target_insertions.lattice() != xpp.name() {
            return Err(Error::InvalidGeometry("insertion registries are attached to the wrong lattices".into()));
        }
        for class in target_insertions.classes() {
            let Some(image) = &class.image else { continue };
            if insertions.class(image)?.codim != class.codim {
                return Err(Error::InvalidInsertion(format!(
                    "`{}` and its image `{image}` have different codimension",
                    class.label
                )));
            }
        }
        Ok(TransitionGeometry { phi_e, lift, contraction, divisor, curve, insertions, target_insertions })
    }

    /// The same transition seen from the flop `X'`: `φ_e` becomes
    /// `φ_e ∘ φ^-1`, the blow-down is `flopped_lift: X̃ -> X'`, and every
    /// insertion is replaced by its flop image.
    pub fn through_flop(&self, flop: &FlopGeometry, flopped_lift: LatticeMap) -> Result<Self> {
        if flop.source().name() != self.phi_e.source().name() {
            return Err(Error::LatticeMismatch {
                expected: self.phi_e.source().name().into(),
                found: flop.source().name().into(),
            });
        }
        let phi_e = self.phi_e.after(flop.phi_inverse(), "phi_e_flopped")?;
        let mut target_insertions = InsertionRegistry::new(self.target_insertions.lattice());
        for class in self.target_insertions.classes() {
            let image = match &class.image {
                Some(label) => flop.insertions().class(label)?.image.clone(),
                None => None,
            };
            target_insertions.add_class(InsertionClass { image, ..class.clone() })?;
        }
        for (labels, value) in self.target_insertions.products() {
            target_insertions.set_product(&labels[0], &labels[1], &labels[2], value.clone())?;
        }
        Self::new(
            phi_e,
            flopped_lift,
            self.contraction.clone(),
            self.divisor.clone(),
            flop.flopped_curve().clone(),
            flop.flopped_insertions().clone(),
            target_insertions,
        )
    }

    pub fn phi_e(&self) -> &LatticeMap {
        &self.phi_e
    }

    pub fn lift(&self) -> &LatticeMap {
        &self.lift
    }

    pub fn contraction(&self) -> &LatticeMap {
        &self.contraction
    }

    pub fn divisor(&self) -> &str {
        &self.divisor
    }

    pub fn curve(&self) -> &CurveClass {
        &self.curve
    }

    pub fn insertions(&self) -> &InsertionRegistry {
        &self.insertions
    }

    pub fn target_insertions(&self) -> &InsertionRegistry {
        &self.target_insertions
    }

    /// `(φ^*(β), β̃⁰·E)`.
    fn pullback(&self, beta: &CurveClass) -> Result<(CurveClass, i64)> {
        let xpp = self.phi_e.target();
        xpp.check(beta)?;
        if beta.is_zero() {
            return Err(Error::ZeroClass);
        }
        if !xpp.is_effective(beta)? {
            return Err(Error::NoLift(format!("{beta} is not effective")));
        }
        let minimal = self.contraction.minimal_lift(beta)?;
        let e = self.lift.source().pair(&self.divisor, &minimal)?;
        if e < 0 {
            return Err(Error::InvalidGeometry(format!("minimal lift of {beta} meets E negatively")));
        }
        Ok((self.lift.apply(&minimal)?, e))
    }

    /// `φ^*(β)`.
    pub fn pull_back(&self, beta: &CurveClass) -> Result<CurveClass> {
        Ok(self.pullback(beta)?.0)
    }

    fn source_labels(&self, labels: &[&str]) -> Result<Vec<String>> {
        labels
            .iter()
            .map(|l| {
                let image = self.target_insertions.class(l)?.image.clone().ok_or_else(|| {
                    Error::InvalidInsertion(format!("`{l}` has no counterpart on `{}`", self.insertions.lattice()))
                })?;
                self.insertions.class(&image)?;
                Ok(image)
            })
            .collect()
    }

    fn check_table(&self, table: &GwTable) -> Result<()> {
        let x = self.phi_e.source();
        if table.lattice().name() != x.name() {
            return Err(Error::LatticeMismatch { expected: x.name().into(), found: table.lattice().name().into() });
        }
        Ok(())
    }
}

/// `I_β = {0, 1, ..., β̃⁰·E}`.
pub fn transition_index_set(beta: &CurveClass, geometry: &TransitionGeometry) -> Result<Vec<i64>> {
    let (_, e) = geometry.pullback(beta)?;
    Ok((0..=e).collect())
}

/// `Ψ^X''_(g,n;β)(α) = Σ_(l ∈ I_β) Ψ^X_(g,n;φ^*β + l[C])(ψ^*α)`.
pub fn transition_transform(
    table: &GwTable,
    genus: u32,
    beta: &CurveClass,
    labels: &[&str],
    geometry: &TransitionGeometry,
) -> Result<Rational> {
    geometry.check_table(table)?;
    let (base, e) = geometry.pullback(beta)?;
    let source_labels = geometry.source_labels(labels)?;
    let mut sum = Rational::zero();
    for l in 0..=e {
        sum += table.get(&GwKey::new(genus, &base + &geometry.curve.scale(l), source_labels.clone()));
    }
    Ok(sum)
}

/// The sum over the whole fiber `φ_e^-1(β)`, enumerated as
/// `φ^*β + k[C]` with `|k| <= cutoff`. A nonzero value outside `I_β` is
/// reported rather than summed.
pub fn transition_transform_fiber_sum(
    table: &GwTable,
    genus: u32,
    beta: &CurveClass,
    labels: &[&str],
    geometry: &TransitionGeometry,
    cutoff: u32,
) -> Result<Rational> {
    geometry.check_table(table)?;
    let (base, e) = geometry.pullback(beta)?;
    let source_labels = geometry.source_labels(labels)?;
    let cutoff = i64::from(cutoff);
    let mut sum = Rational::zero();
    for k in -cutoff..=cutoff {
        let class = &base + &geometry.curve.scale(k);
        let value = table.get(&GwKey::new(genus, class.clone(), source_labels.clone()));
        if value.is_zero() {
            continue;
        }
        if !(0..=e).contains(&k) {
            return Err(Error::VanishingViolation { class: format!("{class}") });
        }
        sum += value;
    }
    Ok(sum)
}

#[derive(Clone, Debug)]
pub struct TransitionCheck {
    /// `Ψ^X(ψ^*α)` with `q^β -> q^(φ_e β)`.
    pub transported: NovikovElement,
    /// `Ψ^X''(α)`.
    pub target: NovikovElement,
    pub holds: bool,
}

/// Compares `Ψ^X(ψ^*α1, ψ^*α2, ψ^*α3)` after `q^β -> q^(φ_e β)` with
/// `Ψ^X''(α1, α2, α3)`. The insertions must miss `C`.
pub fn transition_threepoint_check(
    table: &GwTable,
    target_table: &GwTable,
    labels: [&str; 3],
    geometry: &TransitionGeometry,
) -> Result<TransitionCheck> {
    geometry.check_table(table)?;
    let source_labels = geometry.source_labels(&labels)?;
    for label in &source_labels {
        if geometry.insertions.class(label)?.c_pairing != 0 {
            return Err(Error::InvalidInsertion(format!("`{label}` meets the contracted curve")));
        }
    }
    let source = [source_labels[0].as_str(), source_labels[1].as_str(), source_labels[2].as_str()];
    let psi = three_point_function(table, &geometry.insertions, source, Some(&geometry.curve))?;
    let transported = psi.substitute(&geometry.phi_e)?;
    let target = three_point_function(target_table, &geometry.target_insertions, labels, None)?;
    let holds = transported.isomorphic(&target)?;
    Ok(TransitionCheck { transported, target, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_p1;
    use crate::rational::int;
    use crate::transform::flop_transform;
    use alloc::string::ToString;
    use alloc::vec;

    fn cls(c: &[i64]) -> CurveClass {
        CurveClass::new(c.to_vec())
    }

    fn point_labels() -> Vec<String> {
        ["1", "1", "pt"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn index_sets() {
        let geom = local_p1::transition_geometry();
        assert_eq!(transition_index_set(&cls(&[1]), &geom).unwrap(), vec![0, 1]);
        assert_eq!(transition_index_set(&cls(&[2]), &geom).unwrap(), vec![0, 1, 2]);
        assert!(matches!(transition_index_set(&cls(&[0]), &geom), Err(Error::ZeroClass)));
        assert_eq!(geom.pull_back(&cls(&[3])).unwrap(), cls(&[0, 3]));
    }

    #[test]
    fn finite_sum_and_fiber_sum() {
        let geom = local_p1::transition_geometry();
        let mut table = GwTable::new(local_p1::x());
        table.insert(GwKey::new(0, cls(&[0, 1]), vec![]), int(3)).unwrap();
        table.insert(GwKey::new(0, cls(&[1, 1]), vec![]), int(4)).unwrap();
        let beta = cls(&[1]);
        assert_eq!(transition_transform(&table, 0, &beta, &[], &geom).unwrap(), int(7));
        assert_eq!(transition_transform_fiber_sum(&table, 0, &beta, &[], &geom, 10).unwrap(), int(7));
        assert!(transition_transform(&table, 0, &cls(&[0]), &[], &geom).is_err());
        let empty = GwTable::new(local_p1::x());
        assert_eq!(transition_transform_fiber_sum(&empty, 0, &beta, &[], &geom, 10).unwrap(), int(0));

        table.insert(GwKey::new(0, cls(&[2, 1]), vec![]), int(1)).unwrap();
        assert!(matches!(
            transition_transform_fiber_sum(&table, 0, &beta, &[], &geom, 10),
            Err(Error::VanishingViolation { .. })
        ));
        assert_eq!(transition_transform(&table, 0, &beta, &[], &geom).unwrap(), int(7));
    }

    #[test]
    fn three_point_round_trip() {
        let geom = local_p1::transition_geometry();
        let mut table = GwTable::new(local_p1::x());
        for (coords, v) in [([0, 1], 3), ([1, 1], 4), ([1, 2], 5)] {
            table.insert(GwKey::new(0, cls(&coords), point_labels()), int(v)).unwrap();
        }
        let target_labels = ["1pp", "1pp", "ptpp"];
        let mut target = GwTable::new(local_p1::smoothing());
        for d in 1..=2 {
            let v = transition_transform(&table, 0, &cls(&[d]), &target_labels, &geom).unwrap();
            target.insert(GwKey::new(0, cls(&[d]), target_labels.iter().map(|s| s.to_string()).collect()), v).unwrap();
        }
        assert!(transition_threepoint_check(&table, &target, target_labels, &geom).unwrap().holds);

        let mut perturbed = GwTable::new(local_p1::smoothing());
        perturbed
            .insert(GwKey::new(0, cls(&[1]), target_labels.iter().map(|s| s.to_string()).collect()), int(8))
            .unwrap();
        assert!(!transition_threepoint_check(&table, &perturbed, target_labels, &geom).unwrap().holds);
    }

    #[test]
    fn insertions_meeting_the_curve_are_rejected() {
        let mut target = local_p1::smoothing_insertions();
        target
            .add_class(InsertionClass { label: "hpp".into(), codim: 1, c_pairing: 0, image: Some("H".into()) })
            .unwrap();
        let geom = TransitionGeometry::new(
            local_p1::phi_e(),
            local_p1::blow_down(),
            local_p1::contraction(),
            "E",
            local_p1::curve(),
            local_p1::insertions(),
            target,
        )
        .unwrap();
        let empty = GwTable::new(local_p1::x());
        let r =
            transition_threepoint_check(&empty, &GwTable::new(local_p1::smoothing()), ["hpp", "1pp", "ptpp"], &geom);
        assert!(matches!(r, Err(Error::InvalidInsertion(_))));
    }

    #[test]
    fn commutes_with_the_flop() {
        let geom = local_p1::transition_geometry();
        let flop = local_p1::flop_geometry();
        let flopped_geom = geom.through_flop(&flop, local_p1::flopped_blow_down()).unwrap();
        let mut table = GwTable::new(local_p1::x());
        for (coords, v) in [([0, 1], 3), ([1, 1], 4), ([0, 2], 1), ([2, 2], 9)] {
            table.insert(GwKey::new(1, cls(&coords), point_labels()), int(v)).unwrap();
        }
        let flopped = flop_transform(&table, &flop).unwrap();
        assert!(flopped.rejected.is_empty());
        for d in 1..=2 {
            let beta = cls(&[d]);
            let labels = ["1pp", "1pp", "ptpp"];
            assert_eq!(
                transition_transform(&table, 1, &beta, &labels, &geom).unwrap(),
                transition_transform(&flopped.table, 1, &beta, &labels, &flopped_geom).unwrap()
            );
        }
    }
}
