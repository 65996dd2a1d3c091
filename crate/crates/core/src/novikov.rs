//! Closed-form elements of the Novikov ring `Q{{H_2}}`.
//!
//! An element is a Laurent polynomial in `q^beta` plus finitely many
//! geometric tails `c * q^beta / (1 - q^gamma)`. A tail whose numerator
//! class is zero is always split as `c + c * q^gamma / (1 - q^gamma)`, so
//! the canonical form carries no tail of the shape `c / (1 - q^gamma)`.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::lattice::{CurveClass, CurveClassLattice, LatticeMap};
use crate::rational::{parse_rational, Pq};
use crate::{Error, Rational, Result};

/// Coefficients of a finite expansion, keyed by exponent.
pub type Expansion = BTreeMap<CurveClass, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovikovElement {
    lattice: Arc<CurveClassLattice>,
    polynomial: Expansion,
    /// `(gamma, beta) -> c` stands for `c * q^beta / (1 - q^gamma)`.
    tails: BTreeMap<(CurveClass, CurveClass), Rational>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

impl NovikovElement {
    pub fn zero(lattice: &Arc<CurveClassLattice>) -> Self {
        NovikovElement { lattice: lattice.clone(), polynomial: Expansion::new(), tails: BTreeMap::new() }
    }

    pub fn constant(lattice: &Arc<CurveClassLattice>, c: Rational) -> Self {
        let mut out = Self::zero(lattice);
        bump(&mut out.polynomial, lattice.zero(), c);
        out
    }

    /// `c * q^beta`.
    pub fn monomial(lattice: &Arc<CurveClassLattice>, beta: CurveClass, c: Rational) -> Result<Self> {
        lattice.check(&beta)?;
        let mut out = Self::zero(lattice);
        bump(&mut out.polynomial, beta, c);
        Ok(out)
    }

    /// `c * q^beta / (1 - q^gamma)`.
    pub fn tail(lattice: &Arc<CurveClassLattice>, c: Rational, beta: CurveClass, gamma: CurveClass) -> Result<Self> {
        lattice.check(&beta)?;
        lattice.check(&gamma)?;
        if gamma.is_zero() {
            return Err(Error::ZeroClass);
        }
        let mut out = Self::zero(lattice);
        out.push_tail(c, beta, gamma);
        Ok(out)
    }

    fn push_tail(&mut self, c: Rational, beta: CurveClass, gamma: CurveClass) {
        if beta.is_zero() {
            bump(&mut self.polynomial, beta, c.clone());
            bump(&mut self.tails, (gamma.clone(), gamma), c);
        } else {
            bump(&mut self.tails, (gamma, beta), c);
        }
    }

    pub fn lattice(&self) -> &Arc<CurveClassLattice> {
        &self.lattice
    }

    pub fn polynomial(&self) -> &Expansion {
        &self.polynomial
    }

    /// Tails as `((gamma, beta), c)` for `c * q^beta / (1 - q^gamma)`.
    pub fn tails(&self) -> &BTreeMap<(CurveClass, CurveClass), Rational> {
        &self.tails
    }

    pub fn is_zero(&self) -> bool {
        self.polynomial.is_empty() && self.tails.is_empty()
    }

    fn same_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice.name() != other.lattice.name() {
            return Err(Error::LatticeMismatch {
                expected: self.lattice.name().into(),
                found: other.lattice.name().into(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_lattice(other)?;
        let mut out = self.clone();
        for (beta, c) in &other.polynomial {
            bump(&mut out.polynomial, beta.clone(), c.clone());
        }
        for ((gamma, beta), c) in &other.tails {
            bump(&mut out.tails, (gamma.clone(), beta.clone()), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.lattice);
        }
        NovikovElement {
            lattice: self.lattice.clone(),
            polynomial: self.polynomial.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            tails: self.tails.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Whether every exponent, numerator and denominator class is effective.
    pub fn is_effective_supported(&self) -> Result<bool> {
        for beta in self.polynomial.keys() {
            if !self.lattice.is_effective(beta)? {
                return Ok(false);
            }
        }
        for (gamma, beta) in self.tails.keys() {
            if !self.lattice.is_effective(gamma)? || !self.lattice.is_effective(beta)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Rewrites every tail with anti-effective denominator class through
    /// `q^beta / (1 - q^-gamma) = -q^(beta + gamma) / (1 - q^gamma)`.
    pub fn analytic_continue(&self) -> Result<Self> {
        let mut out = NovikovElement {
            lattice: self.lattice.clone(),
            polynomial: self.polynomial.clone(),
            tails: BTreeMap::new(),
        };
        for ((gamma, beta), c) in &self.tails {
            if self.lattice.is_effective(gamma)? {
                out.push_tail(c.clone(), beta.clone(), gamma.clone());
                continue;
            }
            let flipped = -gamma;
            if !self.lattice.is_effective(&flipped)? {
                return Err(Error::NotContinuable(format!(
                    "denominator class {gamma} is neither effective nor anti-effective"
                )));
            }
            out.push_tail(-c.clone(), beta - gamma, flipped);
        }
        Ok(out)
    }

    /// Equality as rational functions after analytic continuation: both
    /// sides are multiplied by the product of all distinct denominators and
    /// the resulting Laurent polynomials compared.
    pub fn isomorphic(&self, other: &Self) -> Result<bool> {
        self.same_lattice(other)?;
        let a = self.analytic_continue()?;
        let b = other.analytic_continue()?;
        if a == b {
            return Ok(true);
        }
        let mut gammas: Vec<CurveClass> = a.tails.keys().chain(b.tails.keys()).map(|(g, _)| g.clone()).collect();
        gammas.sort();
        gammas.dedup();
        Ok(a.cleared(&gammas) == b.cleared(&gammas))
    }

    fn cleared(&self, gammas: &[CurveClass]) -> Expansion {
        let denominator = |skip: Option<&CurveClass>| {
            let mut prod = Expansion::new();
            bump(&mut prod, self.lattice.zero(), Rational::one());
            for gamma in gammas.iter().filter(|g| Some(*g) != skip) {
                let mut next = Expansion::new();
                for (e, c) in &prod {
                    bump(&mut next, e.clone(), c.clone());
                    bump(&mut next, e + gamma, -c.clone());
                }
                prod = next;
            }
            prod
        };
        let mut out = Expansion::new();
        let full = denominator(None);
        for (beta, c) in &self.polynomial {
            for (e, d) in &full {
                bump(&mut out, beta + e, c * d);
            }
        }
        for ((gamma, beta), c) in &self.tails {
            for (e, d) in &denominator(Some(gamma)) {
                bump(&mut out, beta + e, c * d);
            }
        }
        out
    }

    /// Expands tails as geometric series and keeps every term whose degree
    /// under `ample` is at most `cutoff`.
    pub fn truncate(&self, ample: &[i64], cutoff: i64) -> Result<Expansion> {
        if ample.len() != self.lattice.rank() {
            return Err(Error::RankMismatch { expected: self.lattice.rank(), found: ample.len() });
        }
        if let Some(g) = self.lattice.effective_generators().iter().find(|g| g.dot(ample) <= 0) {
            return Err(Error::Divergent(format!("functional is not positive on the effective class {g}")));
        }
        let mut out = Expansion::new();
        for (beta, c) in &self.polynomial {
            if beta.dot(ample) <= cutoff {
                bump(&mut out, beta.clone(), c.clone());
            }
        }
        for ((gamma, beta), c) in &self.tails {
            let step = gamma.dot(ample);
            if step <= 0 {
                return Err(Error::Divergent(format!("denominator class {gamma} has degree {step}")));
            }
            let mut exponent = beta.clone();
            while exponent.dot(ample) <= cutoff {
                bump(&mut out, exponent.clone(), c.clone());
                exponent = &exponent + gamma;
            }
        }
        Ok(out)
    }

    /// Replaces every exponent by its image under `map`.
    pub fn substitute(&self, map: &LatticeMap) -> Result<Self> {
        if map.source().name() != self.lattice.name() {
            return Err(Error::LatticeMismatch {
                expected: map.source().name().into(),
                found: self.lattice.name().into(),
            });
        }
        let mut out = Self::zero(map.target());
        for (beta, c) in &self.polynomial {
            bump(&mut out.polynomial, map.apply(beta)?, c.clone());
        }
        for ((gamma, beta), c) in &self.tails {
            let image = map.apply(gamma)?;
            if image.is_zero() {
                return Err(Error::DegenerateSubstitution(format!(
                    "denominator class {gamma} maps to zero under `{}`",
                    map.name()
                )));
            }
            out.push_tail(c.clone(), map.apply(beta)?, image);
        }
        Ok(out)
    }

    /// Parses the canonical text form produced by `Display`.
    pub fn parse(lattice: &Arc<CurveClassLattice>, text: &str) -> Result<Self> {
        let mut out = Self::zero(lattice);
        let text = text.trim();
        if text == "0" {
            return Ok(out);
        }
        for term in text.split(" + ") {
            let (coeff, rest) =
                term.split_once(" * ").ok_or_else(|| Error::Parse(format!("term `{term}` lacks `c * q^[..]`")))?;
            let c = parse_rational(coeff)?;
            match rest.split_once(" / ") {
                None => bump(&mut out.polynomial, parse_power(lattice, rest)?, c),
                Some((num, den)) => {
                    let den = den
                        .trim()
                        .strip_prefix("(1 - ")
                        .and_then(|d| d.strip_suffix(')'))
                        .ok_or_else(|| Error::Parse(format!("malformed denominator in `{term}`")))?;
                    let beta = parse_power(lattice, num)?;
                    let gamma = parse_power(lattice, den)?;
                    if gamma.is_zero() {
                        return Err(Error::ZeroClass);
                    }
                    out.push_tail(c, beta, gamma);
                }
            }
        }
        Ok(out)
    }
}

fn parse_power(lattice: &CurveClassLattice, text: &str) -> Result<CurveClass> {
    let inner = text
        .trim()
        .strip_prefix("q^[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected `q^[..]`, found `{text}`")))?;
    let coords = inner
        .split(',')
        .map(|c| c.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad coordinate `{c}`"))))
        .collect::<Result<Vec<_>>>()?;
    lattice.class(coords)
}

impl fmt::Display for NovikovElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let deg = |c: &CurveClass| self.lattice.degree(c);
        let mut poly: Vec<_> = self.polynomial.iter().collect();
        poly.sort_by_key(|(b, _)| (deg(b), (*b).clone()));
        let mut tails: Vec<_> = self.tails.iter().collect();
        tails.sort_by_key(|((g, b), _)| (deg(g), g.clone(), deg(b), b.clone()));
        let mut parts: Vec<String> = poly.into_iter().map(|(b, c)| format!("{} * q^{b}", Pq(c))).collect();
        parts.extend(tails.into_iter().map(|((g, b), c)| format!("{} * q^{b} / (1 - q^{g})", Pq(c))));
        f.write_str(&parts.join(" + "))
    }
}

/// Product of two finite expansions, dropping terms above `cutoff`.
pub fn truncated_product(a: &Expansion, b: &Expansion, ample: &[i64], cutoff: i64) -> Expansion {
    let mut out = Expansion::new();
    for (x, cx) in a {
        for (y, cy) in b {
            let e = x + y;
            if e.dot(ample) <= cutoff {
                bump(&mut out, e, cx * cy);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use alloc::string::ToString;

    fn line() -> Arc<CurveClassLattice> {
        Arc::new(
            CurveClassLattice::new(
                "P",
                alloc::vec!["C".to_string()],
                alloc::vec![CurveClass::new(alloc::vec![1])],
                BTreeMap::new(),
                alloc::vec![0],
            )
            .unwrap(),
        )
    }

    fn q(k: i64) -> CurveClass {
        CurveClass::new(alloc::vec![k])
    }

    fn geometric(l: &Arc<CurveClassLattice>, c: i64, beta: i64, gamma: i64) -> NovikovElement {
        NovikovElement::tail(l, int(c), q(beta), q(gamma)).unwrap()
    }

    fn expansion(terms: &[(i64, i64)]) -> Expansion {
        terms.iter().map(|&(k, c)| (q(k), int(c))).collect()
    }

    #[test]
    fn like_tails_merge_and_cancel() {
        let l = line();
        let t = geometric(&l, 1, 1, 1);
        assert_eq!(t.add(&t).unwrap(), geometric(&l, 2, 1, 1));
        assert!(t.sub(&t).unwrap().is_zero());
        assert_eq!(t.add(&NovikovElement::zero(&l)).unwrap(), t);
    }

    #[test]
    fn truncation_of_tails() {
        let l = line();
        let t = geometric(&l, 1, 1, 1);
        assert_eq!(t.truncate(&[1], 3).unwrap(), expansion(&[(1, 1), (2, 1), (3, 1)]));
        let shifted = NovikovElement::constant(&l, int(-1)).sub(&t).unwrap();
        assert_eq!(shifted.truncate(&[1], 2).unwrap(), expansion(&[(0, -1), (1, -1), (2, -1)]));
        let bad = geometric(&l, 1, 0, -1);
        assert!(matches!(bad.truncate(&[1], 2), Err(Error::Divergent(_))));
    }

    #[test]
    fn continuation_of_the_inverted_tail() {
        let l = line();
        let inverted = geometric(&l, 1, -1, -1);
        let expected = NovikovElement::constant(&l, int(-1)).sub(&geometric(&l, 1, 1, 1)).unwrap();
        assert_eq!(inverted.analytic_continue().unwrap(), expected);
        assert!(inverted.isomorphic(&expected).unwrap());
        let t = geometric(&l, 1, 1, 1);
        assert_eq!(t.analytic_continue().unwrap(), t);
        assert!(!t.isomorphic(&geometric(&l, 2, 1, 1)).unwrap());
    }

    #[test]
    fn zero_numerator_is_split() {
        let l = line();
        let t = geometric(&l, 3, 0, 1);
        assert_eq!(t.to_string(), "3/1 * q^[0] + 3/1 * q^[1] / (1 - q^[1])");
    }

    #[test]
    fn shifted_numerators_are_isomorphic() {
        let l = line();
        let a = geometric(&l, 1, 2, 1);
        let b = geometric(&l, 1, 1, 1).sub(&NovikovElement::monomial(&l, q(1), int(1)).unwrap()).unwrap();
        assert!(a.isomorphic(&b).unwrap());
    }

    #[test]
    fn text_round_trip() {
        let l = line();
        let e = geometric(&l, 5, 2, 1)
            .add(&NovikovElement::monomial(&l, q(3), crate::rational::ratio(-1, 2)).unwrap())
            .unwrap();
        let text = e.to_string();
        assert_eq!(text, "-1/2 * q^[3] + 5/1 * q^[2] / (1 - q^[1])");
        assert_eq!(NovikovElement::parse(&l, &text).unwrap(), e);
        assert_eq!(NovikovElement::parse(&l, "0").unwrap(), NovikovElement::zero(&l));
    }
}
