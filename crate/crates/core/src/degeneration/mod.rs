//! Admissible weighted graphs and triples, and the degeneration formula.
//!
//! A graph has no edges: only vertices (genus and curve class), ordered
//! legs and ordered weighted roots. A triple glues the roots of a graph on
//! each side of a degenerate fiber `Y1 ∪_D Y2`.

mod enumerate;
mod evaluate;

pub use enumerate::{
    enumerate_blowup_triples, enumerate_conifold_triples, vdim_additivity, vdim_conifold_form, vdim_flop_form, Block,
    BlowupDegeneration, ConifoldDegeneration, Dimensions, EnumeratedTriple, EnumerationCaps, Side,
};
pub use evaluate::{evaluate_degeneration, CohomologyBasis, Evaluation, RelativeGwTable};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::lattice::CurveClass;
use crate::{Error, Result};

/// Root permutations are searched exhaustively up to this many roots.
pub const MAX_PERMUTED_ROOTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub genus: u32,
    pub class: CurveClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Root {
    pub vertex: usize,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdmissibleGraph {
    vertices: Vec<Vertex>,
    legs: Vec<usize>,
    roots: Vec<Root>,
}

impl AdmissibleGraph {
    /// `legs[i]` and `roots[j].vertex` are vertex indices.
    pub fn new(vertices: Vec<Vertex>, legs: Vec<usize>, roots: Vec<Root>) -> Result<Self> {
        let k = vertices.len();
        if k == 0 && !(legs.is_empty() && roots.is_empty()) {
            return Err(Error::InvalidGraph("legs or roots on an empty graph".into()));
        }
        if legs.iter().any(|&v| v >= k) || roots.iter().any(|r| r.vertex >= k) {
            return Err(Error::InvalidGraph("leg or root attached to a missing vertex".into()));
        }
        if roots.iter().any(|r| r.weight == 0) {
            return Err(Error::InvalidGraph("root weights must be positive".into()));
        }
        if let Some(rank) = vertices.first().map(|v| v.class.rank()) {
            if vertices.iter().any(|v| v.class.rank() != rank) {
                return Err(Error::InvalidGraph("vertex classes of different ranks".into()));
            }
        }
        let graph = AdmissibleGraph { vertices, legs, roots };
        if k > 1 && (0..k).any(|v| graph.roots_at(v).is_empty()) {
            return Err(Error::InvalidGraph("not relatively connected".into()));
        }
        Ok(graph)
    }

    pub fn empty() -> Self {
        AdmissibleGraph { vertices: Vec::new(), legs: Vec::new(), roots: Vec::new() }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn weights(&self) -> Vec<u32> {
        self.roots.iter().map(|r| r.weight).collect()
    }

    pub fn legs_at(&self, v: usize) -> Vec<usize> {
        (0..self.legs.len()).filter(|&i| self.legs[i] == v).collect()
    }

    pub fn roots_at(&self, v: usize) -> Vec<usize> {
        (0..self.roots.len()).filter(|&i| self.roots[i].vertex == v).collect()
    }

    /// Total class, or `None` for the empty graph.
    pub fn class(&self) -> Option<CurveClass> {
        let mut it = self.vertices.iter().map(|v| v.class.clone());
        let first = it.next()?;
        Some(it.fold(first, |acc, c| &acc + &c))
    }

    pub fn genus_sum(&self) -> u32 {
        self.vertices.iter().map(|v| v.genus).sum()
    }

    /// Arithmetic genus of the graph as a curve with its vertices joined
    /// only through the divisor: `sum g(v) - |V| + 1`.
    pub fn genus(&self) -> i64 {
        self.genus_sum() as i64 - self.vertices.len() as i64 + 1
    }

    pub fn degree(&self, functional: &[i64]) -> Result<i64> {
        let mut total = 0;
        for v in &self.vertices {
            if v.class.rank() != functional.len() {
                return Err(Error::RankMismatch { expected: functional.len(), found: v.class.rank() });
            }
            total += v.class.dot(functional);
        }
        Ok(total)
    }

    /// New root `i` is the old root `perm[i]`.
    pub fn permute_roots(&self, perm: &[usize]) -> Self {
        AdmissibleGraph {
            vertices: self.vertices.clone(),
            legs: self.legs.clone(),
            roots: perm.iter().map(|&i| self.roots[i]).collect(),
        }
    }

    /// Reorders vertices by (genus, class, legs, roots). With labelled
    /// legs and roots this is a canonical form for the graph.
    pub fn sorted_vertices(&self) -> Self {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by_key(|&v| (&self.vertices[v], self.legs_at(v), self.roots_at(v)));
        let mut position = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        AdmissibleGraph {
            vertices: order.iter().map(|&v| self.vertices[v].clone()).collect(),
            legs: self.legs.iter().map(|&v| position[v]).collect(),
            roots: self.roots.iter().map(|r| Root { vertex: position[r.vertex], weight: r.weight }).collect(),
        }
    }

    /// Canonical form up to reordering of the roots, with the permutation
    /// reaching it.
    pub fn canonical(&self) -> Result<(Self, Vec<usize>)> {
        let mut best: Option<(Self, Vec<usize>)> = None;
        for perm in permutations(self.roots.len())? {
            let candidate = self.permute_roots(&perm).sorted_vertices();
            if best.as_ref().is_none_or(|(b, _)| candidate < *b) {
                best = Some((candidate, perm));
            }
        }
        Ok(best.unwrap_or_else(|| (self.sorted_vertices(), Vec::new())))
    }

    /// Text key of the canonical form, used to index relative invariants.
    pub fn key(&self) -> Result<String> {
        Ok(self.canonical()?.0.to_string())
    }

    /// Parses the text form written by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "empty" {
            return Ok(Self::empty());
        }
        let bad = || Error::Parse(format!("malformed graph `{text}`"));
        let (vertex_part, root_part) = text.split_once('|').ok_or_else(bad)?;
        let mut vertices = Vec::new();
        let mut legs: Vec<(usize, usize)> = Vec::new();
        for (index, item) in vertex_part.split(';').enumerate() {
            let mut fields = item.splitn(3, ':');
            let (genus, class, leg_list) =
                (fields.next().ok_or_else(bad)?, fields.next().ok_or_else(bad)?, fields.next().ok_or_else(bad)?);
            let genus = genus.trim().parse::<u32>().map_err(|_| bad())?;
            let coords = class
                .trim()
                .strip_prefix('[')
                .and_then(|c| c.strip_suffix(']'))
                .ok_or_else(bad)?
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            let leg_list = leg_list.trim().strip_prefix('{').and_then(|l| l.strip_suffix('}')).ok_or_else(bad)?;
            for leg in leg_list.split(',').filter(|l| !l.trim().is_empty()) {
                legs.push((leg.trim().parse::<usize>().map_err(|_| bad())?, index));
            }
            vertices.push(Vertex { genus, class: CurveClass::new(coords) });
        }
        legs.sort();
        if legs.iter().enumerate().any(|(i, (leg, _))| *leg != i) {
            return Err(Error::Parse(format!("legs of `{text}` are not numbered 0..n")));
        }
        let mut roots = Vec::new();
        for item in root_part.split(',').filter(|r| !r.trim().is_empty()) {
            let (v, w) = item.split_once('^').ok_or_else(bad)?;
            roots.push(Root {
                vertex: v.trim().parse().map_err(|_| bad())?,
                weight: w.trim().parse().map_err(|_| bad())?,
            });
        }
        Self::new(vertices, legs.into_iter().map(|(_, v)| v).collect(), roots)
    }
}

impl fmt::Display for AdmissibleGraph {
    /// `genus:[class]:{legs};...|vertex^weight,...`, or `empty`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("empty");
        }
        for (v, vertex) in self.vertices.iter().enumerate() {
            if v > 0 {
                f.write_str(";")?;
            }
            let legs: Vec<String> = self.legs_at(v).iter().map(|l| l.to_string()).collect();
            write!(f, "{}:{}:{{{}}}", vertex.genus, vertex.class, legs.join(","))?;
        }
        f.write_str("|")?;
        for (i, r) in self.roots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}^{}", r.vertex, r.weight)?;
        }
        Ok(())
    }
}

/// All permutations of `0..r` in lexicographic order.
pub fn permutations(r: usize) -> Result<Vec<Vec<usize>>> {
    if r > MAX_PERMUTED_ROOTS {
        return Err(Error::TooManyRoots { roots: r, bound: MAX_PERMUTED_ROOTS });
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..r).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..r).rev().find(|&i| current[i - 1] < current[i]) else { break };
        let j = (i..r).rev().find(|&j| current[j] > current[i - 1]).unwrap_or(i);
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    Ok(out)
}

/// `(Γ1, Γ2, I)`: two graphs with matching roots and the set `I` of global
/// leg labels (1-based) carried by `Γ1`, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdmissibleTriple {
    first: AdmissibleGraph,
    second: AdmissibleGraph,
    first_legs: BTreeSet<usize>,
}

impl AdmissibleTriple {
    pub fn new(first: AdmissibleGraph, second: AdmissibleGraph, first_legs: BTreeSet<usize>) -> Result<Self> {
        if first.weights() != second.weights() {
            return Err(Error::InvalidTriple("root weights of the two sides differ".into()));
        }
        if first_legs.len() != first.legs.len() {
            return Err(Error::InvalidTriple("|I| differs from the number of legs of the first graph".into()));
        }
        let n = first.legs.len() + second.legs.len();
        if first_legs.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::InvalidTriple(format!("I must be a subset of 1..={n}")));
        }
        if !glued_connected(&first, &second) {
            return Err(Error::InvalidTriple("glued graph is not connected".into()));
        }
        Ok(AdmissibleTriple { first, second, first_legs })
    }

    pub fn first(&self) -> &AdmissibleGraph {
        &self.first
    }

    pub fn second(&self) -> &AdmissibleGraph {
        &self.second
    }

    pub fn first_legs(&self) -> &BTreeSet<usize> {
        &self.first_legs
    }

    pub fn marked_points(&self) -> usize {
        self.first.legs.len() + self.second.legs.len()
    }

    pub fn root_count(&self) -> usize {
        self.first.roots.len()
    }

    /// `g(η) = r + 1 - |V| + sum g(v)`.
    pub fn genus(&self) -> i64 {
        let vertices = (self.first.vertices.len() + self.second.vertices.len()) as i64;
        let genera = (self.first.genus_sum() + self.second.genus_sum()) as i64;
        self.root_count() as i64 + 1 - vertices + genera
    }

    /// `d(η)`: the two functionals summed over the vertices of each side.
    pub fn degree(&self, first: &[i64], second: &[i64]) -> Result<i64> {
        Ok(self.first.degree(first)? + self.second.degree(second)?)
    }

    /// `m(η)`: product of the root weights.
    pub fn multiplicity(&self) -> u64 {
        self.first.roots.iter().map(|r| r.weight as u64).product()
    }

    fn ordered_form(&self, perm: &[usize]) -> (AdmissibleGraph, AdmissibleGraph) {
        (self.first.permute_roots(perm).sorted_vertices(), self.second.permute_roots(perm).sorted_vertices())
    }

    /// `|Eq(η)|`: root permutations leaving the triple unchanged.
    pub fn eq_count(&self) -> Result<u64> {
        let identity: Vec<usize> = (0..self.root_count()).collect();
        let base = self.ordered_form(&identity);
        let mut count = 0;
        for perm in permutations(self.root_count())? {
            if self.ordered_form(&perm) == base {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Representative of the class of the triple under root reordering.
    pub fn canonical(&self) -> Result<Self> {
        let mut best: Option<(AdmissibleGraph, AdmissibleGraph)> = None;
        for perm in permutations(self.root_count())? {
            let candidate = self.ordered_form(&perm);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        let (first, second) = best.unwrap_or_else(|| self.ordered_form(&[]));
        Ok(AdmissibleTriple { first, second, first_legs: self.first_legs.clone() })
    }

    pub fn key(&self) -> Result<String> {
        Ok(self.canonical()?.to_string())
    }
}

impl fmt::Display for AdmissibleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let legs: Vec<String> = self.first_legs.iter().map(|l| l.to_string()).collect();
        write!(f, "{} # {} # {{{}}}", self.first, self.second, legs.join(","))
    }
}

pub(crate) fn glued_connected(first: &AdmissibleGraph, second: &AdmissibleGraph) -> bool {
    let k1 = first.vertices.len();
    let total = k1 + second.vertices.len();
    if total == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    if first.roots.len() == second.roots.len() {
        for (a, b) in first.roots.iter().zip(&second.roots) {
            let (ra, rb) = (find(&mut parent, a.vertex), find(&mut parent, k1 + b.vertex));
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 0);
    (1..total).all(|v| find(&mut parent, v) == root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertex(genus: u32, coords: &[i64]) -> Vertex {
        Vertex { genus, class: CurveClass::new(coords.to_vec()) }
    }

    fn root(vertex: usize, weight: u32) -> Root {
        Root { vertex, weight }
    }

    fn two_vertex_side(w: &[u32]) -> AdmissibleGraph {
        AdmissibleGraph::new(
            vec![vertex(0, &[1, 0]), vertex(0, &[0, 1])],
            vec![],
            w.iter().enumerate().map(|(i, &w)| root(i % 2, w)).collect(),
        )
        .unwrap()
    }

    fn single(genus: u32, weights: &[u32]) -> AdmissibleGraph {
        AdmissibleGraph::new(vec![vertex(genus, &[1, 0])], vec![], weights.iter().map(|&w| root(0, w)).collect())
            .unwrap()
    }

    #[test]
    fn genus_formula() {
        let t = AdmissibleTriple::new(single(0, &[1]), single(0, &[1]), BTreeSet::new()).unwrap();
        assert_eq!(t.genus(), 0);
        let t = AdmissibleTriple::new(single(0, &[1, 1]), single(0, &[1, 1]), BTreeSet::new()).unwrap();
        assert_eq!(t.genus(), 1);
        let t = AdmissibleTriple::new(single(1, &[1]), single(1, &[1]), BTreeSet::new()).unwrap();
        assert_eq!(t.genus(), 2);
    }

    #[test]
    fn multiplicity_and_symmetry() {
        let t = AdmissibleTriple::new(single(0, &[1, 2]), single(0, &[1, 2]), BTreeSet::new()).unwrap();
        assert_eq!(t.multiplicity(), 2);
        assert_eq!(t.eq_count().unwrap(), 1);
        let t = AdmissibleTriple::new(single(0, &[2, 2]), single(0, &[2, 2]), BTreeSet::new()).unwrap();
        assert_eq!(t.eq_count().unwrap(), 2);
        let t = AdmissibleTriple::new(single(0, &[2, 3]), single(0, &[2, 3]), BTreeSet::new()).unwrap();
        assert_eq!(t.multiplicity(), 6);
        let t = AdmissibleTriple::new(single(2, &[]), AdmissibleGraph::empty(), BTreeSet::new()).unwrap();
        assert_eq!((t.multiplicity(), t.eq_count().unwrap()), (1, 1));
    }

    #[test]
    fn rejects_malformed_triples() {
        assert!(AdmissibleTriple::new(single(0, &[1]), single(0, &[2]), BTreeSet::new()).is_err());
        assert!(AdmissibleTriple::new(single(0, &[]), single(0, &[]), BTreeSet::new()).is_err());
        assert!(AdmissibleGraph::new(vec![vertex(0, &[1, 0]), vertex(0, &[0, 1])], vec![], vec![root(0, 1)]).is_err());
        assert!(AdmissibleGraph::new(vec![vertex(0, &[1, 0])], vec![], vec![root(0, 0)]).is_err());
    }

    #[test]
    fn canonical_form_ignores_root_order() {
        let a = AdmissibleTriple::new(two_vertex_side(&[1, 2]), single(0, &[1, 2]), BTreeSet::new()).unwrap();
        let b = AdmissibleTriple::new(two_vertex_side(&[2, 1]), single(0, &[2, 1]), BTreeSet::new()).unwrap();
        let swapped = AdmissibleTriple::new(
            AdmissibleGraph::new(vec![vertex(0, &[1, 0]), vertex(0, &[0, 1])], vec![], vec![root(1, 2), root(0, 1)])
                .unwrap(),
            single(0, &[2, 1]),
            BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(a.key().unwrap(), swapped.key().unwrap());
        assert_ne!(a.key().unwrap(), b.key().unwrap());
    }

    #[test]
    fn graph_text_round_trip() {
        let g = AdmissibleGraph::new(
            vec![vertex(1, &[1, 0, -1]), vertex(0, &[0, 1, 0])],
            vec![1, 0, 1],
            vec![root(0, 2), root(1, 1)],
        )
        .unwrap();
        let text = g.to_string();
        assert_eq!(text, "1:[1,0,-1]:{1};0:[0,1,0]:{0,2}|0^2,1^1");
        assert_eq!(AdmissibleGraph::parse(&text).unwrap(), g);
        assert_eq!(AdmissibleGraph::parse("empty").unwrap(), AdmissibleGraph::empty());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(0).unwrap().len(), 1);
        assert_eq!(permutations(4).unwrap().len(), 24);
        assert!(matches!(permutations(9), Err(Error::TooManyRoots { .. })));
    }
}
