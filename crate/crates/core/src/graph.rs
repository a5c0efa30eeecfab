//! Graph machinery for junction trees: DAG validation, moralization and
//! elimination-game triangulation.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A directed acyclic graph over named nodes.
#[derive(Debug, Clone)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// Build from `(node, parents)` pairs; rejects unknown parent references
    /// and directed cycles.
    pub fn new<S: AsRef<str>>(decls: &[(S, Vec<S>)]) -> Result<Dag> {
        let nodes: Vec<String> = decls.iter().map(|(n, _)| n.as_ref().to_string()).collect();
        for (i, n) in nodes.iter().enumerate() {
            if nodes[..i].contains(n) {
                return Err(Error::InvalidDomain(format!("duplicate node '{n}'")));
            }
        }
        let index = |name: &str| -> Result<usize> {
            nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownLabel(name.to_string()))
        };
        let mut parents = Vec::with_capacity(nodes.len());
        for (_, ps) in decls {
            let mut row = Vec::with_capacity(ps.len());
            for p in ps {
                let pi = index(p.as_ref())?;
                if row.contains(&pi) {
                    return Err(Error::InvalidDomain(format!(
                        "duplicate parent '{}'",
                        p.as_ref()
                    )));
                }
                row.push(pi);
            }
            parents.push(row);
        }
        let dag = Dag { nodes, parents };
        dag.topological_order()?;
        Ok(dag)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    /// Kahn topological sort; an unsortable remainder means a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut remaining_parents: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: Vec<usize> = (0..n).filter(|&i| remaining_parents[i] == 0).collect();
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                remaining_parents[c] -= 1;
                if remaining_parents[c] == 0 {
                    ready.push(c);
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).find(|&i| remaining_parents[i] > 0).unwrap();
            return Err(Error::Cycle(self.nodes[stuck].clone()));
        }
        Ok(order)
    }

    /// Drop arc directions and marry co-parents: the moral graph has an edge
    /// u - v iff u - v is an arc or u and v share a child.
    pub fn moralize(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.nodes.clone());
        for (child, ps) in self.parents.iter().enumerate() {
            for (i, &p) in ps.iter().enumerate() {
                g.add_edge(child, p);
                for &q in &ps[i + 1..] {
                    g.add_edge(p, q);
                }
            }
        }
        g
    }
}

/// Simple undirected graph with symmetric, irreflexive adjacency.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    nodes: Vec<String>,
    adj: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    pub fn new(nodes: Vec<String>) -> UndirectedGraph {
        let n = nodes.len();
        UndirectedGraph { nodes, adj: vec![BTreeSet::new(); n] }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, u: usize) -> &BTreeSet<usize> {
        &self.adj[u]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Chordality test: run a maximum-cardinality search and verify that the
    /// resulting ordering is a perfect elimination ordering (zero fill-in).
    pub fn is_chordal(&self) -> bool {
        let n = self.nodes.len();
        // selection time per node, chosen by max count of selected neighbors,
        // ties by lexicographically smallest name
        let mut selected = vec![false; n];
        let mut weight = vec![0usize; n];
        let mut sel_time = vec![0usize; n];
        for t in 0..n {
            let best = (0..n)
                .filter(|&v| !selected[v])
                .min_by(|&a, &b| {
                    weight[b]
                        .cmp(&weight[a])
                        .then_with(|| self.nodes[a].cmp(&self.nodes[b]))
                })
                .unwrap();
            selected[best] = true;
            sel_time[best] = t;
            for &nb in &self.adj[best] {
                if !selected[nb] {
                    weight[nb] += 1;
                }
            }
        }
        // the reverse selection order is a perfect elimination ordering iff
        // for every v, its earlier-selected neighbors minus the latest such
        // neighbor are all adjacent to that neighbor
        for v in 0..n {
            let earlier: Vec<usize> = self.adj[v]
                .iter()
                .copied()
                .filter(|&u| sel_time[u] < sel_time[v])
                .collect();
            let Some(&anchor) = earlier.iter().max_by_key(|&&u| sel_time[u]) else {
                continue;
            };
            for &u in &earlier {
                if u != anchor && !self.has_edge(u, anchor) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    /// Eliminate the node whose elimination adds the fewest fill edges.
    MinFill,
    /// Eliminate the node with the fewest remaining neighbors, fill count as
    /// tie-break.
    MinNei,
}

impl std::str::FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Heuristic> {
        match s {
            "min_fill" => Ok(Heuristic::MinFill),
            "min_nei" => Ok(Heuristic::MinNei),
            other => Err(Error::UnknownHeuristic(other.to_string())),
        }
    }
}

impl std::fmt::Display for Heuristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Heuristic::MinFill => "min_fill",
            Heuristic::MinNei => "min_nei",
        })
    }
}

/// Result of triangulating a graph by the elimination game.
#[derive(Debug, Clone)]
pub struct Triangulation {
    graph: UndirectedGraph,
    fill_edges: Vec<(String, String)>,
    cliques: Vec<BTreeSet<usize>>,
    statespace: Vec<u64>,
    elimination_order: Vec<String>,
}

impl Triangulation {
    /// The triangulated (chordal) graph: input plus fill edges.
    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn fill_edges(&self) -> &[(String, String)] {
        &self.fill_edges
    }

    /// Maximal cliques as sorted node-index sets, in discovery order.
    pub fn cliques(&self) -> &[BTreeSet<usize>] {
        &self.cliques
    }

    pub fn clique_names(&self, i: usize) -> Vec<&str> {
        self.cliques[i]
            .iter()
            .map(|&v| self.graph.nodes()[v].as_str())
            .collect()
    }

    /// Dense cell count per clique.
    pub fn statespace(&self) -> &[u64] {
        &self.statespace
    }

    pub fn elimination_order(&self) -> &[String] {
        &self.elimination_order
    }
}

/// Triangulate by the elimination game: repeatedly score the remaining
/// nodes, eliminate the best one (ties to the lexicographically smallest
/// name), connect its remaining neighbors and record the closed neighborhood
/// as a clique candidate. `sizes` gives each node's state-space cardinality,
/// aligned with `g.nodes()`.
pub fn triangulate(g: &UndirectedGraph, sizes: &[u64], heuristic: Heuristic) -> Result<Triangulation> {
    let n = g.nodes().len();
    if sizes.len() != n {
        return Err(Error::InvalidDomain(format!(
            "{} state-space sizes for {n} nodes",
            sizes.len()
        )));
    }
    let mut work = g.clone();
    let mut triangulated = g.clone();
    let mut alive = vec![true; n];
    let mut fill_edges = Vec::new();
    let mut candidates: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    let mut elimination_order = Vec::with_capacity(n);

    let fill_count = |work: &UndirectedGraph, v: usize| -> usize {
        let nbrs: Vec<usize> = work.neighbors(v).iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !work.has_edge(a, b) {
                    missing += 1;
                }
            }
        }
        missing
    };

    for _ in 0..n {
        let best = (0..n)
            .filter(|&v| alive[v])
            .min_by(|&a, &b| {
                let score = |v: usize| -> (usize, usize) {
                    match heuristic {
                        Heuristic::MinFill => (fill_count(&work, v), 0),
                        Heuristic::MinNei => (work.neighbors(v).len(), fill_count(&work, v)),
                    }
                };
                score(a)
                    .cmp(&score(b))
                    .then_with(|| g.nodes()[a].cmp(&g.nodes()[b]))
            })
            .unwrap();

        let nbrs: Vec<usize> = work.neighbors(best).iter().copied().collect();
        let mut clique: BTreeSet<usize> = nbrs.iter().copied().collect();
        clique.insert(best);
        candidates.push(clique);
        elimination_order.push(g.nodes()[best].clone());

        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !work.has_edge(a, b) {
                    work.add_edge(a, b);
                    triangulated.add_edge(a, b);
                    fill_edges.push((g.nodes()[a].clone(), g.nodes()[b].clone()));
                }
            }
        }
        alive[best] = false;
        for nb in nbrs {
            work.adj[nb].remove(&best);
        }
        work.adj[best].clear();
    }

    // keep only maximal candidates, first occurrence wins among duplicates
    let mut cliques: Vec<BTreeSet<usize>> = Vec::new();
    for (i, cand) in candidates.iter().enumerate() {
        let dominated = candidates.iter().enumerate().any(|(j, other)| {
            if i == j {
                return false;
            }
            if cand == other {
                return j < i;
            }
            cand.is_subset(other)
        });
        if !dominated {
            cliques.push(cand.clone());
        }
    }

    let mut statespace = Vec::with_capacity(cliques.len());
    for c in &cliques {
        let mut cells: u64 = 1;
        for &v in c {
            cells = cells
                .checked_mul(sizes[v])
                .ok_or_else(|| Error::Capacity("clique state space exceeds u64".into()))?;
        }
        statespace.push(cells);
    }

    Ok(Triangulation { graph: triangulated, fill_edges, cliques, statespace, elimination_order })
}

/// Top cliques by dense cell count: `(clique names, cells, bytes)` with
/// bytes following the 8-bytes-per-cell dense model. Ties break on the
/// lexicographically smallest member list.
pub fn statespace_report(t: &Triangulation, top: usize) -> Vec<(Vec<String>, u64, u64)> {
    let mut rows: Vec<(Vec<String>, u64, u64)> = t
        .cliques()
        .iter()
        .zip(t.statespace().iter())
        .map(|(c, &cells)| {
            let names: Vec<String> =
                c.iter().map(|&v| t.graph().nodes()[v].to_string()).collect();
            (names, cells, cells.saturating_mul(8))
        })
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(top);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The five-node example DAG: c -> a, a -> b, c -> d, c -> e, d -> b, d -> e.
    fn example_dag() -> Dag {
        Dag::new(&[
            ("a", vec!["c"]),
            ("b", vec!["a", "d"]),
            ("c", vec![]),
            ("d", vec!["c"]),
            ("e", vec!["c", "d"]),
        ])
        .unwrap()
    }

    fn names(g: &UndirectedGraph, set: &BTreeSet<usize>) -> Vec<String> {
        set.iter().map(|&v| g.nodes()[v].clone()).collect()
    }

    #[test]
    fn moralization_marries_coparents_only() {
        let g = example_dag().moralize();
        let a = g.node_index("a").unwrap();
        let d = g.node_index("d").unwrap();
        let b = g.node_index("b").unwrap();
        let c = g.node_index("c").unwrap();
        let e = g.node_index("e").unwrap();
        // arcs become edges
        for (u, v) in [(c, a), (a, b), (c, d), (c, e), (d, b), (d, e)] {
            assert!(g.has_edge(u, v));
        }
        // the parents of b get married; the parents of e are already adjacent
        assert!(g.has_edge(a, d));
        assert_eq!(g.edge_count(), 7);
        assert!(!g.has_edge(b, c));
    }

    #[test]
    fn chain_has_no_moral_edges() {
        let dag = Dag::new(&[("a", vec![]), ("b", vec!["a"]), ("c", vec!["b"])]).unwrap();
        let g = dag.moralize();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn edgeless_dag_moralizes_to_edgeless_graph() {
        let dag = Dag::new(&[("a", vec![]), ("b", vec![])]).unwrap();
        assert_eq!(dag.moralize().edge_count(), 0);
    }

    #[test]
    fn cycle_is_rejected() {
        let err = Dag::new(&[("a", vec!["b"]), ("b", vec!["a"])]);
        assert!(matches!(err, Err(Error::Cycle(_))));
    }

    #[test]
    fn example_graph_triangulates_without_fill() {
        let g = example_dag().moralize();
        let t = triangulate(&g, &[2; 5], Heuristic::MinFill).unwrap();
        assert!(t.fill_edges().is_empty());
        let got: Vec<Vec<String>> = t.cliques().iter().map(|c| names(t.graph(), c)).collect();
        assert_eq!(
            got,
            vec![
                vec!["a".to_string(), "b".into(), "d".into()],
                vec!["a".to_string(), "c".into(), "d".into()],
                vec!["c".to_string(), "d".into(), "e".into()],
            ]
        );
        assert_eq!(t.statespace(), [8, 8, 8]);
        assert!(t.graph().is_chordal());
    }

    #[test]
    fn four_cycle_needs_exactly_one_chord() {
        let mut g = UndirectedGraph::new(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            g.add_edge(u, v);
        }
        assert!(!g.is_chordal());
        let t = triangulate(&g, &[2; 4], Heuristic::MinFill).unwrap();
        assert_eq!(t.fill_edges().len(), 1);
        let (u, v) = &t.fill_edges()[0];
        let chord = (u.as_str(), v.as_str());
        assert!(
            chord == ("b", "d") || chord == ("d", "b") || chord == ("a", "c") || chord == ("c", "a")
        );
        assert!(t.graph().is_chordal());
    }

    #[test]
    fn complete_graph_is_a_single_clique() {
        let mut g = UndirectedGraph::new((0..4).map(|i| format!("n{i}")).collect());
        for u in 0..4 {
            for v in u + 1..4 {
                g.add_edge(u, v);
            }
        }
        let t = triangulate(&g, &[3; 4], Heuristic::MinNei).unwrap();
        assert!(t.fill_edges().is_empty());
        assert_eq!(t.cliques().len(), 1);
        assert_eq!(t.cliques()[0].len(), 4);
        assert_eq!(t.statespace(), [81]);
    }

    #[test]
    fn report_sorts_and_truncates() {
        let g = example_dag().moralize();
        let t = triangulate(&g, &[2, 2, 3, 2, 3], Heuristic::MinFill).unwrap();
        let rows = statespace_report(&t, 2);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].1 >= rows[1].1);
        assert_eq!(rows[0].2, rows[0].1 * 8);
        assert!(statespace_report(&t, 0).is_empty());
    }

    #[test]
    fn determinism_of_elimination() {
        let g = example_dag().moralize();
        let t1 = triangulate(&g, &[2; 5], Heuristic::MinFill).unwrap();
        let t2 = triangulate(&g, &[2; 5], Heuristic::MinFill).unwrap();
        assert_eq!(t1.elimination_order(), t2.elimination_order());
        assert_eq!(t1.cliques(), t2.cliques());
    }

    #[test]
    fn elimination_covers_every_edge() {
        let g = example_dag().moralize();
        let t = triangulate(&g, &[2; 5], Heuristic::MinFill).unwrap();
        for u in 0..5 {
            for &v in t.graph().neighbors(u) {
                assert!(
                    t.cliques().iter().any(|c| c.contains(&u) && c.contains(&v)),
                    "edge {u}-{v} not covered"
                );
            }
        }
        // no clique contains another
        for (i, a) in t.cliques().iter().enumerate() {
            for (j, b) in t.cliques().iter().enumerate() {
                assert!(i == j || !a.is_subset(b));
            }
        }
    }
}
