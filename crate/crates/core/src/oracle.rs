//! Brute-force ground truth: graph classes, domination numbers and the
//! variety of `I_sos` by exhaustive enumeration.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{Var, VarTable};
use crate::model::{
    build_fstar_in, build_ideal_ig, build_ideal_sos_in, subsets, GraphClassParams, IdealBasis, Side,
};

/// Largest ideal variable count accepted by [`enumerate_variety`].
pub const MAX_VARIETY_VARS: usize = 24;
/// Largest vertex count for which [`enumerate_class`] runs.
pub const MAX_CLASS_VERTICES: usize = 6;
/// Largest product graph the oracle builds.
pub const MAX_PRODUCT_VERTICES: usize = 16;
/// Largest graph accepted by [`domination_number`].
pub const MAX_GRAPH_VERTICES: usize = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("coefficients too large for exact integer evaluation")]
    Overflow,
}

/// Simple undirected graph on vertices `0..n` with bitmask adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledGraph {
    n: usize,
    adj: Vec<u32>,
}

impl LabeledGraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_GRAPH_VERTICES, "graph too large");
        LabeledGraph { n, adj: vec![0; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = LabeledGraph::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        LabeledGraph::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = LabeledGraph::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b && a < self.n && b < self.n, "invalid edge {a}-{b}");
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        (self.adj[a] >> b) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.adj
            .iter()
            .map(|r| r.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Closed neighbourhood of `v` as a bitmask.
    pub fn closed_neighborhood(&self, v: usize) -> u32 {
        self.adj[v] | (1 << v)
    }

    fn all(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// Vertices dominated by `set`.
    pub fn dominated_by(&self, set: u32) -> u32 {
        let mut out = 0;
        let mut s = set;
        while s != 0 {
            let v = s.trailing_zeros() as usize;
            s &= s - 1;
            out |= self.closed_neighborhood(v);
        }
        out
    }

    pub fn is_dominating(&self, set: u32) -> bool {
        self.dominated_by(set) == self.all()
    }
}

/// Exact domination number by cardinality-increasing search.
///
/// Some vertex of the closed neighbourhood of the first undominated vertex
/// must be in every dominating set, so the search branches on those.
pub fn domination_number(g: &LabeledGraph) -> Result<usize, OracleError> {
    if g.n == 0 {
        return Err(OracleError::SizeLimit("graph has no vertices".into()));
    }
    fn search(g: &LabeledGraph, covered: u32, budget: usize) -> bool {
        let all = g.all();
        if covered == all {
            return true;
        }
        if budget == 0 {
            return false;
        }
        let u = (!covered & all).trailing_zeros() as usize;
        let mut cand = g.closed_neighborhood(u);
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if search(g, covered | g.closed_neighborhood(w), budget - 1) {
                return true;
            }
        }
        false
    }
    Ok((1..=g.n)
        .find(|&k| search(g, 0, k))
        .expect("the full vertex set dominates"))
}

/// Number of dominating sets of any size.
pub fn count_dominating_sets(g: &LabeledGraph) -> Result<u64, OracleError> {
    if g.n > MAX_PRODUCT_VERTICES {
        return Err(OracleError::SizeLimit(format!(
            "{} vertices > {MAX_PRODUCT_VERTICES}",
            g.n
        )));
    }
    Ok((0..=g.all()).filter(|&s| g.is_dominating(s)).count() as u64)
}

/// `G□H` with vertex `(a, b)` at index `a·n_H + b`.
pub fn cartesian_product(g: &LabeledGraph, h: &LabeledGraph) -> LabeledGraph {
    let n = g.n * h.n;
    let mut p = LabeledGraph::empty(n);
    for a in 0..g.n {
        for b in 0..h.n {
            for a2 in 0..g.n {
                if g.has_edge(a, a2) {
                    p.adj[a * h.n + b] |= 1 << (a2 * h.n + b);
                }
            }
            for b2 in 0..h.n {
                if h.has_edge(b, b2) {
                    p.adj[a * h.n + b] |= 1 << (a * h.n + b2);
                }
            }
        }
    }
    p
}

/// All graphs on `n` vertices in which `{0..k-1}` dominates and no set of
/// `k − 1` vertices does. Ordered by edge subset, with edges indexed
/// lexicographically.
pub fn enumerate_class(n: usize, k: usize) -> Result<Vec<LabeledGraph>, OracleError> {
    if n > MAX_CLASS_VERTICES {
        return Err(OracleError::SizeLimit(format!(
            "class on {n} vertices > {MAX_CLASS_VERTICES}"
        )));
    }
    if k == 0 || k > n {
        return Err(OracleError::SizeLimit(format!("k={k} outside 1..={n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let d: u32 = (1u32 << k) - 1;
    let small: Vec<u32> = subsets(n, k - 1)
        .iter()
        .map(|s| s.iter().fold(0, |m, &v| m | (1 << v)))
        .collect();
    let mut out = Vec::new();
    for bits in 0u32..(1 << pairs.len()) {
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| (bits >> i) & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = LabeledGraph::from_edges(n, &edges);
        if g.is_dominating(d) && small.iter().all(|&s| !g.is_dominating(s)) {
            out.push(g);
        }
    }
    Ok(out)
}

/// A 0/1 assignment to all variables of a table, one bit per index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarietyPoint {
    pub bits: u64,
}

impl VarietyPoint {
    pub fn get(&self, idx: usize) -> bool {
        (self.bits >> idx) & 1 == 1
    }

    pub fn as_bools(&self, n: usize) -> Vec<bool> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// Decodes the edge bits into `G`, `H` and the vertex bits into a set of
    /// product vertices (index `g·n_H + h`).
    pub fn decode(&self, vars: &VarTable) -> (LabeledGraph, LabeledGraph, u32) {
        let p = vars.params();
        let mut g = LabeledGraph::empty(p.n_g);
        let mut h = LabeledGraph::empty(p.n_h);
        let mut set = 0u32;
        for (i, v) in vars.vars().iter().enumerate() {
            if !self.get(i) {
                continue;
            }
            match *v {
                Var::EdgeG { a, b } => g.add_edge(a, b),
                Var::EdgeH { a, b } => h.add_edge(a, b),
                Var::Vertex { g: a, h: b } => set |= 1 << (a * p.n_h + b),
            }
        }
        (g, h, set)
    }

    pub fn to_text(&self, vars: &VarTable) -> String {
        let on: Vec<String> = (0..vars.len())
            .filter(|&i| self.get(i))
            .map(|i| vars.name(i))
            .collect();
        format!("{{{}}}", on.join(" "))
    }
}

/// Generator scaled to integer coefficients, as `(support mask, coeff)`.
type IntPoly = Vec<(u64, i128)>;

fn integer_form(p: &crate::algebra::Polynomial) -> Result<IntPoly, OracleError> {
    let lcm = p
        .terms()
        .iter()
        .fold(num_bigint::BigInt::from(1), |acc, (_, c)| {
            acc.lcm(c.denom())
        });
    let mut out: Vec<(u64, i128)> = Vec::new();
    for (m, c) in p.terms() {
        let scaled = c.numer() * (&lcm / c.denom());
        let v = scaled.to_i128().ok_or(OracleError::Overflow)?;
        let mask = m.support_mask().ok_or(OracleError::Overflow)?;
        match out.iter_mut().find(|(k, _)| *k == mask) {
            Some(slot) => slot.1 = slot.1.checked_add(v).ok_or(OracleError::Overflow)?,
            None => out.push((mask, v)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    Ok(out)
}

fn eval_int(p: &IntPoly, bits: u64) -> i128 {
    p.iter()
        .filter(|(m, _)| m & bits == *m)
        .map(|(_, c)| c)
        .sum()
}

/// All 0/1 points of the basis's active variables on which every generator
/// vanishes; inactive variables are 0. Sorted by bit pattern.
pub fn enumerate_variety(basis: &IdealBasis) -> Result<Vec<VarietyPoint>, OracleError> {
    let vars = basis.vars();
    let active = basis.active_vars();
    if active.len() > MAX_VARIETY_VARS {
        return Err(OracleError::SizeLimit(format!(
            "{} variables > {MAX_VARIETY_VARS}",
            active.len()
        )));
    }
    // edges first: their constraints are strong and checked early
    let mut order: Vec<usize> = active.to_vec();
    order.sort_by_key(|&i| (matches!(vars.var(i), Var::Vertex { .. }), i));
    let pos: Vec<Option<usize>> = {
        let mut pos = vec![None; vars.len()];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = Some(k);
        }
        pos
    };
    // generators grouped by the depth at which all their variables are set
    let mut checks: Vec<Vec<IntPoly>> = vec![Vec::new(); order.len() + 1];
    for g in basis.generators() {
        let ip = integer_form(g)?;
        let support = ip.iter().fold(0u64, |a, (m, _)| a | m);
        let mut depth = 0;
        let mut s = support;
        while s != 0 {
            let v = s.trailing_zeros() as usize;
            s &= s - 1;
            let k = pos[v]
                .ok_or_else(|| OracleError::SizeLimit(format!("{} is not active", vars.name(v))))?;
            depth = depth.max(k + 1);
        }
        checks[depth].push(ip);
    }
    let mut out = Vec::new();
    fn dfs(
        depth: usize,
        bits: u64,
        order: &[usize],
        checks: &[Vec<IntPoly>],
        out: &mut Vec<VarietyPoint>,
    ) {
        if checks[depth].iter().any(|p| eval_int(p, bits) != 0) {
            return;
        }
        if depth == order.len() {
            out.push(VarietyPoint { bits });
            return;
        }
        dfs(depth + 1, bits, order, checks, out);
        dfs(depth + 1, bits | (1u64 << order[depth]), order, checks, out);
    }
    dfs(0, 0, &order, &checks, &mut out);
    out.sort();
    Ok(out)
}

/// Minimum of `f*` over the variety of `I_sos`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureCheck {
    pub min: i64,
    pub witness: VarietyPoint,
    pub points: usize,
}

pub fn check_conjecture_class(params: GraphClassParams) -> Result<ConjectureCheck, OracleError> {
    let vars = Arc::new(VarTable::new(params));
    let points = enumerate_variety(&build_ideal_sos_in(&vars))?;
    let fstar = integer_form(&build_fstar_in(&vars))?;
    let (min, witness) = points
        .iter()
        .map(|p| (eval_int(&fstar, p.bits) as i64, *p))
        .min()
        .ok_or_else(|| OracleError::SizeLimit("empty variety".into()))?;
    Ok(ConjectureCheck {
        min,
        witness,
        points: points.len(),
    })
}

/// Variety points where `f*` vanishes. Every Gram certificate `vᵀXv` has
/// `X·v(p) = 0` at these points.
pub fn fstar_zeros(params: GraphClassParams) -> Result<Vec<VarietyPoint>, OracleError> {
    let vars = Arc::new(VarTable::new(params));
    let points = enumerate_variety(&build_ideal_sos_in(&vars))?;
    let fstar = integer_form(&build_fstar_in(&vars))?;
    Ok(points
        .into_iter()
        .filter(|p| eval_int(&fstar, p.bits) == 0)
        .collect())
}

fn edge_set(g: &LabeledGraph) -> Vec<(usize, usize)> {
    g.edges()
}

/// Checks that the varieties of `I_G`, `I_H` and `I_sos` encode exactly the
/// graph classes and the dominating sets of their products.
pub fn check_bijection(params: GraphClassParams) -> Result<bool, OracleError> {
    let vars = Arc::new(VarTable::new(params));
    for side in [Side::G, Side::H] {
        let (n, k) = params.side(side);
        let class: BTreeSet<_> = enumerate_class(n, k)?.iter().map(edge_set).collect();
        let points = enumerate_variety(&build_ideal_ig(params, side))?;
        let decoded: BTreeSet<_> = points
            .iter()
            .map(|p| {
                let (g, h, _) = p.decode(&vars);
                edge_set(if side == Side::G { &g } else { &h })
            })
            .collect();
        if points.len() != class.len() || decoded != class {
            return Ok(false);
        }
    }
    if params.n_g * params.n_h > MAX_PRODUCT_VERTICES {
        return Err(OracleError::SizeLimit("product graph too large".into()));
    }
    let gs = enumerate_class(params.n_g, params.k_g)?;
    let hs = enumerate_class(params.n_h, params.k_h)?;
    let gset: BTreeSet<_> = gs.iter().map(edge_set).collect();
    let hset: BTreeSet<_> = hs.iter().map(edge_set).collect();
    let points = enumerate_variety(&build_ideal_sos_in(&vars))?;
    for p in &points {
        let (g, h, d) = p.decode(&vars);
        if !gset.contains(&edge_set(&g)) || !hset.contains(&edge_set(&h)) {
            return Ok(false);
        }
        if !cartesian_product(&g, &h).is_dominating(d) {
            return Ok(false);
        }
    }
    // distinct points decode to distinct triples, so equal counts give the
    // converse direction
    let mut expected = 0u64;
    for g in &gs {
        for h in &hs {
            expected += count_dominating_sets(&cartesian_product(g, h))?;
        }
    }
    Ok(expected == points.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rat;

    fn params(a: usize, b: usize, c: usize, d: usize) -> GraphClassParams {
        GraphClassParams::new(a, b, c, d).unwrap()
    }

    #[test]
    fn domination_examples() {
        let c4 = LabeledGraph::cycle(4);
        assert_eq!(domination_number(&c4).unwrap(), 2);
        assert_eq!(domination_number(&LabeledGraph::empty(1)).unwrap(), 1);
        let prod = cartesian_product(&c4, &c4);
        assert_eq!(prod.edge_count(), 32);
        assert_eq!(domination_number(&prod).unwrap(), 4);
        assert_eq!(domination_number(&LabeledGraph::empty(5)).unwrap(), 5);
        assert_eq!(domination_number(&LabeledGraph::complete(5)).unwrap(), 1);
        assert!(domination_number(&LabeledGraph::empty(0)).is_err());
    }

    #[test]
    fn product_examples() {
        let h = LabeledGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(cartesian_product(&LabeledGraph::empty(1), &h), h);
        let k2 = LabeledGraph::complete(2);
        let sq = cartesian_product(&k2, &k2);
        assert_eq!(sq.edge_count(), 4);
        assert!((0..4).all(|v| sq.adj[v].count_ones() == 2));
    }

    #[test]
    fn class_examples() {
        let c = enumerate_class(3, 2).unwrap();
        assert_eq!(c.len(), 2);
        let edges: Vec<_> = c.iter().map(|g| g.edges()).collect();
        assert!(edges.contains(&vec![(0, 2)]) && edges.contains(&vec![(1, 2)]));
        assert_eq!(
            enumerate_class(2, 1).unwrap(),
            vec![LabeledGraph::complete(2)]
        );
        assert_eq!(enumerate_class(1, 1).unwrap(), vec![LabeledGraph::empty(1)]);
        assert_eq!(enumerate_class(5, 5).unwrap(), vec![LabeledGraph::empty(5)]);
        assert!(enumerate_class(7, 2).is_err());
        for n in 1..=5 {
            for k in 1..=n {
                for g in enumerate_class(n, k).unwrap() {
                    assert_eq!(domination_number(&g).unwrap(), k);
                }
            }
        }
    }

    #[test]
    fn variety_examples() {
        let p = params(3, 2, 3, 2);
        let pts = enumerate_variety(&build_ideal_ig(p, Side::G)).unwrap();
        assert_eq!(pts.len(), 2);
        let vars = Arc::new(VarTable::new(params(1, 1, 1, 1)));
        let pts = enumerate_variety(&build_ideal_sos_in(&vars)).unwrap();
        assert_eq!(pts, vec![VarietyPoint { bits: 1 }]);
    }

    #[test]
    fn conjecture_minima() {
        let c = check_conjecture_class(params(3, 2, 3, 2)).unwrap();
        assert_eq!(c.min, 1);
        let k2k1 = LabeledGraph::from_edges(3, &[(0, 2)]);
        assert_eq!(
            domination_number(&cartesian_product(&k2k1, &k2k1)).unwrap(),
            5
        );
        assert_eq!(check_conjecture_class(params(1, 1, 1, 1)).unwrap().min, 0);
        assert!(check_conjecture_class(params(2, 2, 3, 2)).unwrap().min >= 0);
    }

    #[test]
    fn bijections() {
        assert!(check_bijection(params(3, 2, 3, 2)).unwrap());
        assert!(check_bijection(params(2, 1, 2, 1)).unwrap());
        assert!(check_bijection(params(1, 1, 1, 1)).unwrap());
        assert!(check_bijection(params(2, 2, 3, 2)).unwrap());
    }

    #[test]
    fn point_semantics() {
        for p in [params(3, 2, 3, 2), params(2, 2, 3, 2), params(2, 1, 3, 2)] {
            let vars = Arc::new(VarTable::new(p));
            let basis = build_ideal_sos_in(&vars);
            let fstar = build_fstar_in(&vars);
            for pt in enumerate_variety(&basis).unwrap() {
                let point = pt.as_bools(vars.len());
                for g in basis.generators() {
                    assert!(g.eval_bool(&point).unwrap().is_zero());
                }
                let (g, h, d) = pt.decode(&vars);
                let value = fstar.eval_bool(&point).unwrap();
                assert_eq!(
                    value,
                    Rat::from(d.count_ones() as i64 - (p.k_g * p.k_h) as i64)
                );
                let gp = domination_number(&cartesian_product(&g, &h)).unwrap();
                assert!(
                    gp >= domination_number(&g)
                        .unwrap()
                        .max(domination_number(&h).unwrap())
                );
            }
        }
    }
}
