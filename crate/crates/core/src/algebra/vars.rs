use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::model::GraphClassParams;

use super::AlgebraError;

/// A ring variable.
///
/// Edge pairs are stored with the smaller label first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// `x[g,h]`: vertex `(g,h)` of the product is in the dominating set.
    Vertex { g: usize, h: usize },
    /// `eG[a,b]`: edge `{a,b}` is present in `G`.
    EdgeG { a: usize, b: usize },
    /// `eH[a,b]`: edge `{a,b}` is present in `H`.
    EdgeH { a: usize, b: usize },
}

impl Var {
    pub fn edge_g(a: usize, b: usize) -> Var {
        Var::EdgeG {
            a: a.min(b),
            b: a.max(b),
        }
    }

    pub fn edge_h(a: usize, b: usize) -> Var {
        Var::EdgeH {
            a: a.min(b),
            b: a.max(b),
        }
    }

    pub fn vertex(g: usize, h: usize) -> Var {
        Var::Vertex { g, h }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::Vertex { g, h } => write!(f, "x[{g},{h}]"),
            Var::EdgeG { a, b } => write!(f, "eG[{a},{b}]"),
            Var::EdgeH { a, b } => write!(f, "eH[{a},{b}]"),
        }
    }
}

impl FromStr for Var {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::Parse(format!("invalid variable `{s}`"));
        let (head, rest) = s.split_once('[').ok_or_else(bad)?;
        let inner = rest.strip_suffix(']').ok_or_else(bad)?;
        let (i, j) = inner.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let j: usize = j.trim().parse().map_err(|_| bad())?;
        match head {
            "x" => Ok(Var::vertex(i, j)),
            "eG" if i != j => Ok(Var::edge_g(i, j)),
            "eH" if i != j => Ok(Var::edge_h(i, j)),
            _ => Err(bad()),
        }
    }
}

/// Index assignment for all variables of `P = K[e_G ∪ e_H ∪ x]`.
///
/// Index order is the variable precedence of the monomial order (index 0 is
/// the highest): vertex variables lexicographically by `(g,h)`, then `G`
/// edges lexicographically by pair, then `H` edges.
#[derive(Clone, Debug)]
pub struct VarTable {
    params: GraphClassParams,
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
}

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl Eq for VarTable {}

impl VarTable {
    pub fn new(params: GraphClassParams) -> Self {
        let mut vars = Vec::with_capacity(params.num_variables());
        for g in 0..params.n_g {
            for h in 0..params.n_h {
                vars.push(Var::vertex(g, h));
            }
        }
        for a in 0..params.n_g {
            for b in a + 1..params.n_g {
                vars.push(Var::edge_g(a, b));
            }
        }
        for a in 0..params.n_h {
            for b in a + 1..params.n_h {
                vars.push(Var::edge_h(a, b));
            }
        }
        let index = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        VarTable {
            params,
            vars,
            index,
        }
    }

    pub fn params(&self) -> GraphClassParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, idx: usize) -> Var {
        self.vars[idx]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Index of `v`; panics if the variable is outside the table.
    pub fn idx(&self, v: Var) -> usize {
        self.index_of(v)
            .unwrap_or_else(|| panic!("variable {v} not in table for {}", self.params))
    }

    pub fn vertex(&self, g: usize, h: usize) -> usize {
        self.idx(Var::vertex(g, h))
    }

    pub fn edge_g(&self, a: usize, b: usize) -> usize {
        self.idx(Var::edge_g(a, b))
    }

    pub fn edge_h(&self, a: usize, b: usize) -> usize {
        self.idx(Var::edge_h(a, b))
    }

    pub fn edge_g_indices(&self) -> Vec<usize> {
        self.filter(|v| matches!(v, Var::EdgeG { .. }))
    }

    pub fn edge_h_indices(&self) -> Vec<usize> {
        self.filter(|v| matches!(v, Var::EdgeH { .. }))
    }

    pub fn vertex_indices(&self) -> Vec<usize> {
        self.filter(|v| matches!(v, Var::Vertex { .. }))
    }

    fn filter(&self, pred: impl Fn(&Var) -> bool) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| pred(v))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn name(&self, idx: usize) -> String {
        self.vars[idx].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        let t = VarTable::new(GraphClassParams::new(3, 2, 3, 2).unwrap());
        assert_eq!(t.len(), 15);
        assert_eq!(t.var(0), Var::vertex(0, 0));
        assert_eq!(t.var(8), Var::vertex(2, 2));
        assert_eq!(t.var(9), Var::edge_g(0, 1));
        assert_eq!(t.var(12), Var::edge_h(0, 1));
        assert_eq!(t.edge_g(2, 1), t.edge_g(1, 2));
        for n_g in 1..=5 {
            for n_h in 1..=5 {
                let p = GraphClassParams::new(n_g, 1, n_h, 1).unwrap();
                let t = VarTable::new(p);
                assert_eq!(
                    t.len(),
                    n_g * (n_g - 1) / 2 + n_h * (n_h - 1) / 2 + n_g * n_h
                );
            }
        }
    }

    #[test]
    fn names_round_trip() {
        let t = VarTable::new(GraphClassParams::new(3, 2, 3, 2).unwrap());
        for (i, v) in t.vars().iter().enumerate() {
            let parsed: Var = t.name(i).parse().unwrap();
            assert_eq!(parsed, *v);
        }
        assert_eq!("eG[2,0]".parse::<Var>().unwrap(), Var::edge_g(0, 2));
        assert!("eG[1,1]".parse::<Var>().is_err());
        assert!("y[0,0]".parse::<Var>().is_err());
    }
}
