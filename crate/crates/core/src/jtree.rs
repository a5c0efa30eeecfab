//! Rooted junction trees over the maximal cliques of a triangulated graph.
//!
//! The tree is a maximum-weight spanning tree of the clique graph weighted
//! by separator size, which guarantees the running intersection property for
//! chordal clique sets. Disconnected components are joined by zero-weight
//! edges with empty separators so one propagation pass covers everything.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::Triangulation;

#[derive(Debug, Clone)]
pub struct JunctionTreeSkeleton {
    nodes: Vec<String>,
    cliques: Vec<BTreeSet<usize>>,
    root: usize,
    /// Parent clique per clique; `None` for the root.
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// Separator with the parent clique (empty for the root and across
    /// joined components).
    separator: Vec<BTreeSet<usize>>,
    /// Cliques in breadth-first order from the root.
    bfs_order: Vec<usize>,
}

impl JunctionTreeSkeleton {
    /// Build a rooted junction tree. When `root_node` is given the root is
    /// the first clique containing it; otherwise the first recorded clique
    /// (the closed neighborhood of the first eliminated node) is the root.
    pub fn build(t: &Triangulation, root_node: Option<&str>) -> Result<JunctionTreeSkeleton> {
        let cliques = t.cliques().to_vec();
        let m = cliques.len();
        let nodes: Vec<String> = t.graph().nodes().to_vec();

        let root = match root_node {
            None => 0,
            Some(name) => {
                let v = t
                    .graph()
                    .node_index(name)
                    .ok_or_else(|| Error::RootNotFound(name.to_string()))?;
                cliques
                    .iter()
                    .position(|c| c.contains(&v))
                    .ok_or_else(|| Error::RootNotFound(name.to_string()))?
            }
        };

        // candidate edges sorted by separator size descending, index pairs
        // ascending for determinism
        let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let w = cliques[i].intersection(&cliques[j]).count();
                if w > 0 {
                    candidates.push((w, i, j));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut uf = UnionFind::new(m);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (_, i, j) in candidates {
            if uf.union(i, j) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        // join remaining components through their smallest clique indices
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..m {
            if uf.find(i) == i {
                reps.push(i);
            }
        }
        reps.sort_unstable();
        for pair in reps.windows(2) {
            uf.union(pair[0], pair[1]);
            adj[pair[0]].push(pair[1]);
            adj[pair[1]].push(pair[0]);
        }
        for a in &mut adj {
            a.sort_unstable();
        }

        // root the tree
        let mut parent = vec![None; m];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut bfs_order = Vec::with_capacity(m);
        let mut visited = vec![false; m];
        let mut queue = std::collections::VecDeque::from([root]);
        visited[root] = true;
        while let Some(c) = queue.pop_front() {
            bfs_order.push(c);
            for &nb in &adj[c] {
                if !visited[nb] {
                    visited[nb] = true;
                    parent[nb] = Some(c);
                    children[c].push(nb);
                    queue.push_back(nb);
                }
            }
        }
        debug_assert_eq!(bfs_order.len(), m);

        let separator: Vec<BTreeSet<usize>> = (0..m)
            .map(|c| match parent[c] {
                Some(p) => cliques[c].intersection(&cliques[p]).copied().collect(),
                None => BTreeSet::new(),
            })
            .collect();

        Ok(JunctionTreeSkeleton { nodes, cliques, root, parent, children, separator, bfs_order })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn cliques(&self) -> &[BTreeSet<usize>] {
        &self.cliques
    }

    pub fn n_cliques(&self) -> usize {
        self.cliques.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, clique: usize) -> Option<usize> {
        self.parent[clique]
    }

    pub fn children(&self, clique: usize) -> &[usize] {
        &self.children[clique]
    }

    /// Variable names of a clique, in node order.
    pub fn clique_vars(&self, clique: usize) -> Vec<&str> {
        self.cliques[clique].iter().map(|&v| self.nodes[v].as_str()).collect()
    }

    /// Variable names of the separator between `clique` and its parent.
    pub fn separator_vars(&self, clique: usize) -> Vec<&str> {
        self.separator[clique].iter().map(|&v| self.nodes[v].as_str()).collect()
    }

    /// First clique (in recording order) containing the node.
    pub fn clique_containing(&self, node_idx: usize) -> Option<usize> {
        self.cliques.iter().position(|c| c.contains(&node_idx))
    }

    /// Edges as `(child, parent)` pairs ordered so every clique fires after
    /// all of its children: the inward pass.
    pub fn collect_edges(&self) -> Vec<(usize, usize)> {
        self.bfs_order
            .iter()
            .rev()
            .filter_map(|&c| self.parent[c].map(|p| (c, p)))
            .collect()
    }

    /// Edges as `(parent, child)` pairs ordered so every clique fires after
    /// its parent: the outward pass.
    pub fn distribute_edges(&self) -> Vec<(usize, usize)> {
        self.bfs_order
            .iter()
            .filter_map(|&c| self.parent[c].map(|p| (p, c)))
            .collect()
    }

    /// Exhaustive running-intersection check: for every clique pair, the
    /// intersection must be contained in every clique on the tree path
    /// between them.
    pub fn verify_rip(&self) -> bool {
        let m = self.cliques.len();
        for i in 0..m {
            for j in i + 1..m {
                let inter: BTreeSet<usize> =
                    self.cliques[i].intersection(&self.cliques[j]).copied().collect();
                if inter.is_empty() {
                    continue;
                }
                for k in self.path(i, j) {
                    if !inter.is_subset(&self.cliques[k]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Cliques on the tree path between `i` and `j`, inclusive.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let depth = |mut c: usize| {
            let mut d = 0;
            while let Some(p) = self.parent[c] {
                c = p;
                d += 1;
            }
            d
        };
        let (mut a, mut b) = (i, j);
        let (mut da, mut db) = (depth(a), depth(b));
        let mut left = vec![a];
        let mut right = vec![b];
        while da > db {
            a = self.parent[a].unwrap();
            left.push(a);
            da -= 1;
        }
        while db > da {
            b = self.parent[b].unwrap();
            right.push(b);
            db -= 1;
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
            left.push(a);
            right.push(b);
        }
        right.pop();
        right.reverse();
        left.extend(right);
        left
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // attach the larger root index under the smaller for determinism
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{triangulate, Dag, Heuristic};

    fn example_tree(root: Option<&str>) -> JunctionTreeSkeleton {
        let dag = Dag::new(&[
            ("a", vec!["c"]),
            ("b", vec!["a", "d"]),
            ("c", vec![]),
            ("d", vec!["c"]),
            ("e", vec!["c", "d"]),
        ])
        .unwrap();
        let t = triangulate(&dag.moralize(), &[2; 5], Heuristic::MinFill).unwrap();
        JunctionTreeSkeleton::build(&t, root).unwrap()
    }

    #[test]
    fn example_tree_is_the_expected_chain() {
        let jt = example_tree(None);
        assert_eq!(jt.n_cliques(), 3);
        // default root: the clique of the first eliminated node
        assert_eq!(jt.clique_vars(jt.root()), ["a", "b", "d"]);
        // chain {c,d,e} - {a,c,d} - {a,b,d}
        assert_eq!(jt.collect_edges(), vec![(2, 1), (1, 0)]);
        assert_eq!(jt.distribute_edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(jt.separator_vars(1), ["a", "d"]);
        assert_eq!(jt.separator_vars(2), ["c", "d"]);
        assert!(jt.verify_rip());
    }

    #[test]
    fn root_forcing_picks_a_containing_clique() {
        let jt = example_tree(Some("e"));
        assert!(jt.clique_vars(jt.root()).contains(&"e"));
        assert!(jt.verify_rip());
        assert!(matches!(
            JunctionTreeSkeleton::build(
                &triangulate(
                    &Dag::new(&[("a", Vec::<&str>::new())]).unwrap().moralize(),
                    &[2],
                    Heuristic::MinFill
                )
                .unwrap(),
                Some("zzz")
            ),
            Err(Error::RootNotFound(_))
        ));
    }

    #[test]
    fn single_clique_tree() {
        let dag = Dag::new(&[("a", vec![]), ("b", vec!["a"])]).unwrap();
        let t = triangulate(&dag.moralize(), &[2; 2], Heuristic::MinFill).unwrap();
        let jt = JunctionTreeSkeleton::build(&t, None).unwrap();
        assert_eq!(jt.n_cliques(), 1);
        assert!(jt.collect_edges().is_empty());
        assert!(jt.distribute_edges().is_empty());
    }

    #[test]
    fn disconnected_components_join_with_empty_separators() {
        let dag = Dag::new(&[("a", vec![]), ("b", vec![]), ("c", vec!["b"])]).unwrap();
        let t = triangulate(&dag.moralize(), &[2; 3], Heuristic::MinFill).unwrap();
        let jt = JunctionTreeSkeleton::build(&t, None).unwrap();
        assert_eq!(jt.n_cliques(), 2);
        let empty_seps = (0..jt.n_cliques())
            .filter(|&c| jt.parent(c).is_some() && jt.separator_vars(c).is_empty())
            .count();
        assert_eq!(empty_seps, 1);
        assert!(jt.verify_rip());
    }
}
