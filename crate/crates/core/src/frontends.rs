//! Problem ingestion: DIMACS graphs for clique and independent set, and
//! sparse QUBO triplet files.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::{BqpInstance, BqpSource};

/// Simple undirected graph on vertices `1..=V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    vertices: usize,
    /// Stored as `(u, v)` with `u < v`.
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self { vertices, edges: BTreeSet::new() };
        for &(u, v) in edges {
            g.check_edge(u, v).map_err(Error::Instance)?;
            g.edges.insert((u.min(v), u.max(v)));
        }
        Ok(g)
    }

    pub fn complete(vertices: usize) -> Self {
        let edges = (1..=vertices).flat_map(|u| (u + 1..=vertices).map(move |v| (u, v))).collect();
        Self { vertices, edges }
    }

    fn check_edge(&self, u: usize, v: usize) -> std::result::Result<(), String> {
        if u == v {
            return Err(format!("self-loop at vertex {u}"));
        }
        for w in [u, v] {
            if w == 0 || w > self.vertices {
                return Err(format!("vertex {w} outside 1..={}", self.vertices));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Whether the vertices selected by `bits` (index `i` is vertex `i + 1`)
    /// are pairwise adjacent.
    pub fn is_clique(&self, bits: &[u8]) -> bool {
        let chosen: Vec<usize> = (0..bits.len()).filter(|&i| bits[i] != 0).map(|i| i + 1).collect();
        chosen.iter().enumerate().all(|(a, &u)| chosen[a + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    pub fn is_independent(&self, bits: &[u8]) -> bool {
        let chosen: Vec<usize> = (0..bits.len()).filter(|&i| bits[i] != 0).map(|i| i + 1).collect();
        chosen.iter().enumerate().all(|(a, &u)| chosen[a + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGraph {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse { line, message: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, message: format!("bad {what} '{tok}'") })
}

/// Reads `p edge V E` / `e u v` files. Comment lines start with `c`.
/// Duplicate edges are dropped with a warning; self-loops are errors.
pub fn parse_dimacs(text: &str) -> Result<ParsedGraph> {
    let mut graph: Option<Graph> = None;
    let mut declared = 0usize;
    let mut warnings = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        let kind = toks.next();
        match kind {
            None | Some("c") => continue,
            Some("p") => {
                if graph.is_some() {
                    return Err(Error::Parse { line, message: "second problem line".into() });
                }
                let format: String = parse_num(toks.next(), line, "format")?;
                if format != "edge" && format != "col" {
                    return Err(Error::Parse { line, message: format!("unsupported format '{format}'") });
                }
                let v: usize = parse_num(toks.next(), line, "vertex count")?;
                declared = parse_num(toks.next(), line, "edge count")?;
                graph = Some(Graph { vertices: v, edges: BTreeSet::new() });
            }
            Some("e") => {
                let g = graph
                    .as_mut()
                    .ok_or_else(|| Error::Parse { line, message: "edge before the problem line".into() })?;
                let u: usize = parse_num(toks.next(), line, "vertex")?;
                let v: usize = parse_num(toks.next(), line, "vertex")?;
                g.check_edge(u, v).map_err(|message| Error::Parse { line, message })?;
                if !g.edges.insert((u.min(v), u.max(v))) {
                    warnings.push(format!("line {line}: duplicate edge {u} {v} ignored"));
                }
            }
            Some(other) if other.starts_with('c') => continue,
            Some(other) => return Err(Error::Parse { line, message: format!("unknown line type '{other}'") }),
        }
        if toks.next().is_some() {
            return Err(Error::Parse { line, message: "trailing tokens".into() });
        }
    }
    let graph = graph.ok_or(Error::Parse { line: 0, message: "no problem line".into() })?;
    if graph.edge_count() != declared {
        warnings.push(format!("problem line declares {declared} edges, found {}", graph.edge_count()));
    }
    Ok(ParsedGraph { graph, warnings })
}

/// Divides by the largest absolute entry so that every entry lies in
/// `[-1, 1]`; returns the divisor as the scale.
fn normalized(m: DMatrix<f64>, source: BqpSource) -> Result<BqpInstance> {
    let sym = (&m + m.transpose()) * 0.5;
    let max = sym.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if max > 0.0 { max } else { 1.0 };
    BqpInstance::with_source(sym / scale, scale, source)
}

fn pair_penalty(g: &Graph, penalty: f64, penalize_edges: bool, source: BqpSource) -> Result<BqpInstance> {
    let v = g.vertices();
    if v == 0 {
        return Err(Error::Instance("graph has no vertices".into()));
    }
    if !(penalty.is_finite() && penalty > 1.0) {
        return Err(Error::Instance(format!("penalty must exceed 1, got {penalty}")));
    }
    let mut m = DMatrix::zeros(v, v);
    for i in 0..v {
        m[(i, i)] = -1.0;
        for j in i + 1..v {
            if g.has_edge(i + 1, j + 1) == penalize_edges {
                m[(i, j)] = penalty / 2.0;
                m[(j, i)] = penalty / 2.0;
            }
        }
    }
    normalized(m, source)
}

/// `min -sum_i b_i + penalty sum_{non-edges i<j} b_i b_j`; the minimum is
/// minus the clique number.
pub fn clique_to_bqp(g: &Graph, penalty: f64) -> Result<BqpInstance> {
    let source = BqpSource::Clique { vertices: g.vertices(), edges: g.edge_count(), penalty };
    pair_penalty(g, penalty, false, source)
}

/// Same with edges penalized; the minimum is minus the independence number.
pub fn independent_set_to_bqp(g: &Graph, penalty: f64) -> Result<BqpInstance> {
    let source = BqpSource::IndependentSet { vertices: g.vertices(), edges: g.edge_count(), penalty };
    pair_penalty(g, penalty, true, source)
}

/// Reads `i j value` triplets (1-based) describing `sum a_ij b_i b_j`. An
/// optional `p qubo V` line fixes the number of variables, otherwise the
/// largest index does. Lines starting with `#` or `c` are comments.
pub fn parse_qubo(text: &str) -> Result<BqpInstance> {
    let mut declared: Option<usize> = None;
    let mut entries: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let cleaned = raw.replace('\u{2212}', "-");
        let mut toks = cleaned.split_whitespace();
        let Some(first) = toks.next() else { continue };
        if first.starts_with('#') || first == "c" {
            continue;
        }
        if first == "p" {
            let format: String = parse_num(toks.next(), line, "format")?;
            if format != "qubo" {
                return Err(Error::Parse { line, message: format!("unsupported format '{format}'") });
            }
            declared = Some(parse_num(toks.next(), line, "variable count")?);
            continue;
        }
        let i: usize = parse_num(Some(first), line, "row index")?;
        let j: usize = parse_num(toks.next(), line, "column index")?;
        let v: f64 = parse_num(toks.next(), line, "value")?;
        if toks.next().is_some() {
            return Err(Error::Parse { line, message: "trailing tokens".into() });
        }
        if !v.is_finite() {
            return Err(Error::Parse { line, message: format!("non-finite value {v}") });
        }
        if i == 0 || j == 0 {
            return Err(Error::Parse { line, message: "indices are 1-based".into() });
        }
        entries.push((i, j, v, line));
    }
    let size = declared.unwrap_or_else(|| entries.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0));
    if size == 0 {
        return Err(Error::Parse { line: 0, message: "no variables".into() });
    }
    let mut a = DMatrix::zeros(size, size);
    for (i, j, v, line) in entries {
        if i > size || j > size {
            return Err(Error::Parse { line, message: format!("index ({i}, {j}) outside 1..={size}") });
        }
        a[(i - 1, j - 1)] += v;
    }
    normalized(a, BqpSource::Qubo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::bqp_min;

    #[test]
    fn triangle() {
        let p = parse_dimacs("c tiny\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(p.graph, Graph::complete(3));
        assert!(p.warnings.is_empty());
        let r = bqp_min(&clique_to_bqp(&p.graph, 2.0).unwrap()).unwrap();
        assert_eq!(r.argmins, vec![vec![1, 1, 1]]);
    }

    #[test]
    fn dimacs_errors_and_warnings() {
        let dup = parse_dimacs("p edge 2 2\ne 1 2\ne 2 1\n").unwrap();
        assert_eq!(dup.graph.edge_count(), 1);
        assert_eq!(dup.warnings.len(), 2);
        match parse_dimacs("p edge 2 1\ne 1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_dimacs("e 1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dimacs("p edge 2 1\ne 1 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_graph_picks_one_vertex() {
        let g = Graph::new(3, &[]).unwrap();
        let r = bqp_min(&clique_to_bqp(&g, 2.0).unwrap()).unwrap();
        assert!(r.argmins.iter().all(|b| b.iter().map(|&x| x as usize).sum::<usize>() == 1));
        assert!(clique_to_bqp(&Graph::new(0, &[]).unwrap(), 2.0).is_err());
        assert!(clique_to_bqp(&g, 1.0).is_err());
    }

    #[test]
    fn independent_set_of_a_path() {
        let g = Graph::new(3, &[(1, 2), (2, 3)]).unwrap();
        let bqp = independent_set_to_bqp(&g, 2.0).unwrap();
        let r = bqp_min(&bqp).unwrap();
        assert_eq!(r.argmins, vec![vec![1, 0, 1]]);
        assert_eq!(bqp.unscaled(r.value), -2.0);
    }

    #[test]
    fn qubo_files() {
        let one = parse_qubo("1 1 \u{2212}1.0\n").unwrap();
        assert_eq!(one.matrix()[(0, 0)], -1.0);
        assert!(matches!(parse_qubo("p qubo 2\n3 1 1.0\n"), Err(Error::Parse { line: 2, .. })));
        let asym = parse_qubo("p qubo 2\n1 2 1.0\n2 1 0.0\n1 1 -0.5\n").unwrap();
        assert_eq!(asym.matrix()[(0, 1)], asym.matrix()[(1, 0)]);
        assert_eq!(asym.matrix()[(0, 1)], 0.5 / 0.5);
        assert_eq!(asym.scale(), 0.5);
    }
}
