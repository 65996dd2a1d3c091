//! Numerical degeneration formula against tables of relative invariants.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{AdmissibleGraph, AdmissibleTriple};
use crate::{Error, Rational, Result};

/// A basis of `H*(D)` with its intersection pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyBasis {
    labels: Vec<String>,
    pairing: Vec<Vec<Rational>>,
}

impl CohomologyBasis {
    pub fn new(labels: Vec<String>, pairing: Vec<Vec<Rational>>) -> Result<Self> {
        let k = labels.len();
        if k == 0 || pairing.len() != k || pairing.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidBasis("pairing matrix must be square of the basis size".into()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::InvalidBasis("repeated basis label".into()));
        }
        for i in 0..k {
            for j in 0..i {
                if pairing[i][j] != pairing[j][i] {
                    return Err(Error::InvalidBasis("pairing matrix is not symmetric".into()));
                }
            }
        }
        if determinant(&pairing).is_zero() {
            return Err(Error::InvalidBasis("pairing matrix is degenerate".into()));
        }
        Ok(CohomologyBasis { labels, pairing })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn pairing(&self) -> &[Vec<Rational>] {
        &self.pairing
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidBasis(format!("unknown basis label `{label}`")))
    }
}

fn determinant(matrix: &[Vec<Rational>]) -> Rational {
    let mut m = matrix.to_vec();
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else { return Rational::zero() };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= &m[col][col];
        for r in col + 1..n {
            let factor = &m[r][col] / &m[col][col];
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Relative invariants `Ψ_Γ` keyed by canonical graph key and the basis
/// labels of the distinguished points, listed in the canonical root order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelativeGwTable {
    entries: BTreeMap<String, BTreeMap<Vec<String>, Rational>>,
}

impl RelativeGwTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a value for `graph` with `labels` given in the graph's own
    /// root order.
    pub fn insert(&mut self, graph: &AdmissibleGraph, labels: Vec<String>, value: Rational) -> Result<()> {
        if labels.len() != graph.roots().len() {
            return Err(Error::Arity(format!(
                "{} labels for a graph with {} roots",
                labels.len(),
                graph.roots().len()
            )));
        }
        let (canonical, perm) = graph.canonical()?;
        let labels = perm.iter().map(|&i| labels[i].clone()).collect();
        self.entries.entry(canonical.to_string()).or_default().insert(labels, value);
        Ok(())
    }

    /// Like `insert`, for a graph given by its text form.
    pub fn insert_text(&mut self, graph: &str, labels: Vec<String>, value: Rational) -> Result<()> {
        self.insert(&AdmissibleGraph::parse(graph)?, labels, value)
    }

    /// `(canonical graph key, labels, value)` in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&String, &Vec<String>, &Rational)> {
        self.entries.iter().flat_map(|(k, m)| m.iter().map(move |(l, v)| (k, l, v)))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries for `graph` with labels rearranged into its root order.
    fn lookup(&self, graph: &AdmissibleGraph) -> Result<Option<Vec<(Vec<String>, Rational)>>> {
        let (canonical, perm) = graph.canonical()?;
        let Some(found) = self.entries.get(&canonical.to_string()) else { return Ok(None) };
        let mut out = Vec::new();
        for (labels, value) in found {
            let mut ordered = alloc::vec![String::new(); labels.len()];
            for (position, &original) in perm.iter().enumerate() {
                ordered[original] = labels[position].clone();
            }
            out.push((ordered, value.clone()));
        }
        Ok(Some(out))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Rational,
    /// Keys of nonempty graphs absent from their table, counted as zero.
    pub missing: Vec<String>,
}

/// `Σ_η m(η)/|Eq(η)| · [Ψ_Γ1 • Ψ_Γ2]_0` with fundamental-class insertions.
///
/// The tables give each `Ψ_Γ` in the basis of `H*(D^r)` indexed by one
/// label per root; `•` pairs the two sides root by root through the
/// pairing matrix. An empty side contributes the factor 1.
pub fn evaluate_degeneration(
    triples: &[AdmissibleTriple],
    first: &RelativeGwTable,
    second: &RelativeGwTable,
    basis: &CohomologyBasis,
) -> Result<Evaluation> {
    let mut value = Rational::zero();
    let mut missing = Vec::new();
    for triple in triples {
        let r = triple.root_count();
        let mut sides = Vec::new();
        for (graph, table) in [(triple.first(), first), (triple.second(), second)] {
            if graph.is_empty() {
                sides.push(alloc::vec![(Vec::new(), Rational::one())]);
                continue;
            }
            match table.lookup(graph)? {
                Some(entries) => sides.push(entries),
                None => {
                    missing.push(graph.key()?);
                    sides.push(Vec::new());
                }
            }
        }
        let mut contraction = Rational::zero();
        for (a, va) in &sides[0] {
            for (b, vb) in &sides[1] {
                if a.len() != r || b.len() != r {
                    return Err(Error::Arity(format!("table entry has {} labels for {r} roots", a.len().max(b.len()))));
                }
                let mut term = va * vb;
                for (x, y) in a.iter().zip(b) {
                    term *= &basis.pairing[basis.index(x)?][basis.index(y)?];
                }
                contraction += term;
            }
        }
        let weight = Rational::new(triple.multiplicity().into(), triple.eq_count()?.into());
        value += weight * contraction;
    }
    missing.sort();
    missing.dedup();
    Ok(Evaluation { value, missing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degeneration::{Root, Vertex};
    use crate::lattice::CurveClass;
    use crate::rational::int;
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;

    fn point_line_basis() -> CohomologyBasis {
        CohomologyBasis::new(vec!["1".to_string(), "pt".to_string()], vec![vec![int(0), int(1)], vec![int(1), int(0)]])
            .unwrap()
    }

    fn single(coords: &[i64], weights: &[u32]) -> AdmissibleGraph {
        AdmissibleGraph::new(
            vec![Vertex { genus: 0, class: CurveClass::new(coords.to_vec()) }],
            vec![],
            weights.iter().map(|&weight| Root { vertex: 0, weight }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_side_contributes_one() {
        let g = single(&[1], &[]);
        let t = AdmissibleTriple::new(g.clone(), AdmissibleGraph::empty(), BTreeSet::new()).unwrap();
        let mut table = RelativeGwTable::new();
        table.insert(&g, vec![], int(5)).unwrap();
        let e = evaluate_degeneration(&[t], &table, &RelativeGwTable::new(), &point_line_basis()).unwrap();
        assert_eq!(e.value, int(5));
        assert!(e.missing.is_empty());
    }

    #[test]
    fn one_root_contraction() {
        let (g1, g2) = (single(&[1], &[2]), single(&[0, 1], &[2]));
        let t = AdmissibleTriple::new(g1.clone(), g2.clone(), BTreeSet::new()).unwrap();
        let (mut t1, mut t2) = (RelativeGwTable::new(), RelativeGwTable::new());
        t1.insert(&g1, vec!["pt".into()], int(3)).unwrap();
        t2.insert(&g2, vec!["1".into()], int(1)).unwrap();
        let e = evaluate_degeneration(std::slice::from_ref(&t), &t1, &t2, &point_line_basis()).unwrap();
        assert_eq!(e.value, int(6));
        let e = evaluate_degeneration(&[t], &t1, &RelativeGwTable::new(), &point_line_basis()).unwrap();
        assert_eq!(e.value, int(0));
        assert_eq!(e.missing, vec![g2.key().unwrap()]);
    }

    #[test]
    fn degenerate_basis_rejected() {
        let b = CohomologyBasis::new(vec!["a".into(), "b".into()], vec![vec![int(1), int(1)], vec![int(1), int(1)]]);
        assert!(matches!(b, Err(Error::InvalidBasis(_))));
    }
}
