//! Graded commutative quotient rings presented by monomial rewrite rules.
//!
//! A presentation lists generators with degrees, rules `monomial -> polynomial`
//! of matching degree, a top degree above which everything vanishes, and the
//! integrals of the top-degree normal monomials. Construction checks that
//! rewriting terminates and is confluent on every monomial up to the top
//! degree, so normal forms are well defined.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use num_traits::{One, Zero};

use crate::rational::{parse_rational, Pq};
use crate::{Error, Rational, Result};

/// Exponent vector over the generators of a presentation.
pub type Monomial = Vec<u32>;

/// Polynomial as a map from monomials to nonzero coefficients.
pub type Polynomial = BTreeMap<Monomial, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingPresentation {
    names: Vec<String>,
    degrees: Vec<u32>,
    rules: Vec<(Monomial, Polynomial)>,
    top_degree: u32,
    integrals: BTreeMap<Monomial, Rational>,
}

impl RingPresentation {
    pub fn new(
        generators: Vec<(String, u32)>,
        rules: Vec<(Monomial, Polynomial)>,
        top_degree: u32,
        integrals: BTreeMap<Monomial, Rational>,
    ) -> Result<Self> {
        let (names, degrees): (Vec<_>, Vec<_>) = generators.into_iter().unzip();
        if degrees.contains(&0) {
            return Err(Error::InvalidPresentation("generators need positive degree".into()));
        }
        let unique: BTreeSet<_> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidPresentation("repeated generator name".into()));
        }
        let mut ring = RingPresentation { names, degrees, rules: Vec::new(), top_degree, integrals };
        for (lhs, rhs) in rules {
            if lhs.len() != ring.names.len() || rhs.keys().any(|m| m.len() != ring.names.len()) {
                return Err(Error::InvalidPresentation("rule has the wrong arity".into()));
            }
            let d = ring.degree(&lhs);
            if d == 0 {
                return Err(Error::InvalidPresentation("rule rewrites the unit".into()));
            }
            if let Some(m) = rhs.keys().find(|m| ring.degree(m) != d) {
                return Err(Error::InvalidPresentation(format!(
                    "rule {} -> ... is not homogeneous at {}",
                    ring.monomial_name(&lhs),
                    ring.monomial_name(m)
                )));
            }
            let rhs = rhs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            ring.rules.push((lhs, rhs));
        }
        let monomials = ring.monomials_up_to_top();
        ring.check_termination(&monomials)?;
        ring.check_confluence(&monomials)?;
        for m in ring.integrals.keys() {
            if m.len() != ring.names.len() || ring.degree(m) != ring.top_degree {
                return Err(Error::InvalidPresentation(format!(
                    "integral declared on {} which is not of top degree",
                    ring.monomial_name(m)
                )));
            }
            if ring.applicable(m).next().is_some() {
                return Err(Error::InvalidPresentation(format!(
                    "integral declared on {} which is not in normal form",
                    ring.monomial_name(m)
                )));
            }
        }
        Ok(ring)
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    pub fn generator_degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn top_degree(&self) -> u32 {
        self.top_degree
    }

    pub fn rules(&self) -> &[(Monomial, Polynomial)] {
        &self.rules
    }

    pub fn integrals(&self) -> &BTreeMap<Monomial, Rational> {
        &self.integrals
    }

    pub fn degree(&self, m: &Monomial) -> u32 {
        m.iter().zip(&self.degrees).map(|(e, d)| e * d).sum()
    }

    pub fn unit_monomial(&self) -> Monomial {
        vec![0; self.names.len()]
    }

    pub fn generator(&self, name: &str) -> Result<Monomial> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Parse(format!("unknown ring generator `{name}`")))?;
        let mut m = self.unit_monomial();
        m[i] = 1;
        Ok(m)
    }

    /// Every monomial of degree at most the top degree.
    pub fn monomials_up_to_top(&self) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = self.unit_monomial();
        self.collect_monomials(0, 0, &mut current, &mut out);
        out.sort_by_key(|m| (self.degree(m), Reverse(m.clone())));
        out
    }

    fn collect_monomials(&self, i: usize, deg: u32, current: &mut Monomial, out: &mut Vec<Monomial>) {
        if i == self.names.len() {
            out.push(current.clone());
            return;
        }
        let mut e = 0;
        while deg + e * self.degrees[i] <= self.top_degree {
            current[i] = e;
            self.collect_monomials(i + 1, deg + e * self.degrees[i], current, out);
            e += 1;
        }
        current[i] = 0;
    }

    fn applicable<'a>(&'a self, m: &'a Monomial) -> impl Iterator<Item = usize> + 'a {
        self.rules
            .iter()
            .enumerate()
            .filter(move |(_, (lhs, _))| lhs.iter().zip(m).all(|(a, b)| a <= b))
            .map(|(i, _)| i)
    }

    /// One rewrite of `m` with rule `rule`; terms above the top degree drop.
    pub fn rewrite_once(&self, m: &Monomial, rule: usize) -> Polynomial {
        let (lhs, rhs) = &self.rules[rule];
        let quotient: Monomial = m.iter().zip(lhs).map(|(a, b)| a - b).collect();
        let mut out = Polynomial::new();
        for (r, c) in rhs {
            let product: Monomial = quotient.iter().zip(r).map(|(a, b)| a + b).collect();
            if self.degree(&product) <= self.top_degree {
                accumulate(&mut out, product, c.clone());
            }
        }
        out
    }

    /// Rules applicable to `m`, by index.
    pub fn applicable_rules(&self, m: &Monomial) -> Vec<usize> {
        self.applicable(m).collect()
    }

    fn check_termination(&self, monomials: &[Monomial]) -> Result<()> {
        // Depth-first search for a cycle in the one-step rewrite graph.
        let mut state: BTreeMap<Monomial, u8> = BTreeMap::new();
        for start in monomials {
            if state.contains_key(start) {
                continue;
            }
            let mut stack: Vec<(Monomial, Vec<Monomial>)> = vec![(start.clone(), self.successors(start))];
            state.insert(start.clone(), 1);
            while let Some((node, mut next)) = stack.pop() {
                match next.pop() {
                    None => {
                        state.insert(node, 2);
                    }
                    Some(succ) => {
                        stack.push((node, next));
                        match state.get(&succ) {
                            Some(1) => {
                                return Err(Error::InvalidPresentation(format!(
                                    "rewriting does not terminate at {}",
                                    self.monomial_name(&succ)
                                )))
                            }
                            Some(_) => {}
                            None => {
                                state.insert(succ.clone(), 1);
                                let s = self.successors(&succ);
                                stack.push((succ, s));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn successors(&self, m: &Monomial) -> Vec<Monomial> {
        let mut out = BTreeSet::new();
        for rule in self.applicable(m) {
            out.extend(self.rewrite_once(m, rule).into_keys());
        }
        out.into_iter().collect()
    }

    // With termination established, local confluence gives confluence.
    fn check_confluence(&self, monomials: &[Monomial]) -> Result<()> {
        for m in monomials {
            let rules: Vec<usize> = self.applicable(m).collect();
            if rules.len() < 2 {
                continue;
            }
            let first = self.reduce(&self.rewrite_once(m, rules[0]));
            for &rule in &rules[1..] {
                if self.reduce(&self.rewrite_once(m, rule)) != first {
                    return Err(Error::InvalidPresentation(format!(
                        "rewriting is not confluent at {}",
                        self.monomial_name(m)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Normal form by always applying the first applicable rule.
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        let mut done = Polynomial::new();
        let mut work: Polynomial =
            p.iter().filter(|(m, _)| self.degree(m) <= self.top_degree).map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = work.pop_last() {
            let rule = self.applicable(&m).next();
            match rule {
                None => accumulate(&mut done, m, c),
                Some(rule) => {
                    for (r, rc) in self.rewrite_once(&m, rule) {
                        accumulate(&mut work, r, rc * &c);
                    }
                }
            }
        }
        done
    }

    pub fn monomial_name(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (name, &e) in self.names.iter().zip(m) {
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Parses `x^a*y` style products, optionally containing rational factors.
    pub fn parse_term(&self, text: &str) -> Result<(Monomial, Rational)> {
        let mut m = self.unit_monomial();
        let mut coeff = Rational::one();
        for factor in text.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in `{text}`")));
            }
            if let Ok(c) = parse_rational(factor) {
                coeff *= c;
                continue;
            }
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (
                    n.trim(),
                    e.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
                ),
                None => (factor, 1),
            };
            let (negated, name) = match name.strip_prefix('-') {
                Some(rest) => (true, rest.trim()),
                None => (false, name),
            };
            if negated {
                coeff = -coeff;
            }
            let g = self.generator(name)?;
            let i = g.iter().position(|&e| e == 1).unwrap_or(0);
            m[i] += exp;
        }
        Ok((m, coeff))
    }

    /// Parses a sum of terms such as `2/1 * v*w^2 + -1 * w - v`.
    pub fn parse_polynomial(&self, text: &str) -> Result<Polynomial> {
        let mut out = Polynomial::new();
        let normalized = text.replace(" - ", " + -");
        for term in normalized.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in `{text}`")));
            }
            let (m, c) = self.parse_term(term)?;
            accumulate(&mut out, m, c);
        }
        Ok(out)
    }
}

fn accumulate(p: &mut Polynomial, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match p.entry(m) {
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

/// An element of a presented ring, kept in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElement {
    ring: Arc<RingPresentation>,
    terms: Polynomial,
}

impl RingElement {
    pub fn normal_form(ring: &Arc<RingPresentation>, p: &Polynomial) -> Result<Self> {
        if p.keys().any(|m| m.len() != ring.names.len()) {
            return Err(Error::Arity("monomial length differs from the generator count".into()));
        }
        Ok(RingElement { ring: ring.clone(), terms: ring.reduce(p) })
    }

    pub fn parse(ring: &Arc<RingPresentation>, text: &str) -> Result<Self> {
        Self::normal_form(ring, &ring.parse_polynomial(text)?)
    }

    pub fn zero(ring: &Arc<RingPresentation>) -> Self {
        RingElement { ring: ring.clone(), terms: Polynomial::new() }
    }

    pub fn one(ring: &Arc<RingPresentation>) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn constant(ring: &Arc<RingPresentation>, c: Rational) -> Self {
        let mut p = Polynomial::new();
        accumulate(&mut p, ring.unit_monomial(), c);
        RingElement { ring: ring.clone(), terms: p }
    }

    pub fn generator(ring: &Arc<RingPresentation>, name: &str) -> Result<Self> {
        let mut p = Polynomial::new();
        p.insert(ring.generator(name)?, Rational::one());
        Self::normal_form(ring, &p)
    }

    pub fn ring(&self) -> &Arc<RingPresentation> {
        &self.ring
    }

    pub fn terms(&self) -> &Polynomial {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::PresentationMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let mut p = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut p, m.clone(), c.clone());
        }
        Ok(RingElement { ring: self.ring.clone(), terms: p })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let terms =
            if c.is_zero() { Polynomial::new() } else { self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() };
        RingElement { ring: self.ring.clone(), terms }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let mut p = Polynomial::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let m: Monomial = a.iter().zip(b).map(|(x, y)| x + y).collect();
                accumulate(&mut p, m, ca * cb);
            }
        }
        Self::normal_form(&self.ring, &p)
    }

    /// Integral of the top-degree part against the declared integrals.
    pub fn integrate(&self) -> Result<Rational> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            if self.ring.degree(m) != self.ring.top_degree {
                continue;
            }
            let value = self.ring.integrals.get(m).ok_or_else(|| {
                Error::MissingIntegral(format!("no integral declared for {}", self.ring.monomial_name(m)))
            })?;
            total += c * value;
        }
        Ok(total)
    }

    /// The degree-0 part of the triple product `a * b * c`.
    pub fn triple_degree0(a: &Self, b: &Self, c: &Self) -> Result<Rational> {
        a.multiply(b)?.multiply(c)?.integrate()
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        keys.sort_by_key(|m| (self.ring.degree(m), Reverse((*m).clone())));
        for (i, m) in keys.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} * {}", Pq(&self.terms[m]), self.ring.monomial_name(m))?;
        }
        Ok(())
    }
}
