//! Compilation of a network onto a junction tree and collect/distribute
//! message passing with evidence.
//!
//! Evidence is entered by slicing before potentials are formed, and it is
//! entered into every table mentioning an observed variable: the observed
//! variables stay in the domains as degenerate rows, so queries on them work
//! like any other query while the supports only ever shrink.
//!
//! Clique potentials are the products of their assigned (sliced) tables and
//! keep whatever variable subset those tables cover; cliques with no table
//! carry a unity marker that the first incoming message replaces. The inward
//! pass divides each sender by its own message, so after the root is
//! normalized the charge holds conditionals; the outward pass multiplies
//! each receiver by the parent's separator marginal, after which every
//! clique and separator potential is a conditional marginal given the
//! evidence.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::graph::{triangulate, Heuristic, Triangulation};
use crate::jtree::JunctionTreeSkeleton;
use crate::network::{Evidence, NetworkSpec};
use crate::sparse::SparseTable;

/// A clique or separator potential: a materialized table or the implicit
/// all-ones table.
#[derive(Debug, Clone)]
pub enum Slot {
    Unity,
    Table(SparseTable),
}

impl Slot {
    pub fn is_unity(&self) -> bool {
        matches!(self, Slot::Unity)
    }

    pub fn as_table(&self) -> Option<&SparseTable> {
        match self {
            Slot::Unity => None,
            Slot::Table(t) => Some(t),
        }
    }
}

/// Clique and separator potentials of a junction tree. Separators are
/// indexed by the child clique of their edge; the root slot stays unused.
#[derive(Debug, Clone)]
pub struct Charge {
    cliques: Vec<Slot>,
    separators: Vec<Slot>,
}

impl Charge {
    pub fn n_cliques(&self) -> usize {
        self.cliques.len()
    }

    pub fn clique(&self, i: usize) -> &Slot {
        &self.cliques[i]
    }

    /// Separator potential on the edge between clique `i` and its parent.
    pub fn separator(&self, i: usize) -> &Slot {
        &self.separators[i]
    }

    /// Stored cells summed over all clique potentials.
    pub fn total_clique_cells(&self) -> usize {
        self.cliques
            .iter()
            .map(|s| s.as_table().map_or(0, SparseTable::n_cells))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initialized,
    Collected,
    Distributed,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Initialized => "initialized",
            Phase::Collected => "collected",
            Phase::Distributed => "distributed",
        })
    }
}

/// A compiled junction tree: skeleton, charge and propagation phase.
#[derive(Debug, Clone)]
pub struct JunctionTreeState {
    skeleton: JunctionTreeSkeleton,
    domain: Domain,
    triangulation_fill_edges: usize,
    charge: Charge,
    /// The freshly initialized charge, kept for evidence resets.
    pristine: Charge,
    /// Evidence already applied to `pristine` at compile time.
    compile_evidence: Evidence,
    /// All evidence currently entered (compile evidence plus later additions).
    evidence: Evidence,
    phase: Phase,
    log_p_evidence: Option<f64>,
}

/// One node's conditional distribution, aligned with its state list.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMarginal {
    pub node: String,
    pub states: Vec<String>,
    pub probs: Vec<f64>,
}

/// Compile a network: slice every table by the evidence, moralize,
/// triangulate with the chosen heuristic, build the rooted junction tree and
/// assign each sliced table to the first clique covering its variables.
pub fn compile(
    spec: &NetworkSpec,
    evidence: &Evidence,
    heuristic: Heuristic,
    root_node: Option<&str>,
) -> Result<JunctionTreeState> {
    evidence.validate(spec.domain())?;
    let triangulation = triangulate_network(spec, heuristic)?;
    compile_with_triangulation(spec, evidence, &triangulation, root_node)
}

/// Moral graph of the network's directed structure plus per-node state-space
/// sizes, triangulated.
pub fn triangulate_network(spec: &NetworkSpec, heuristic: Heuristic) -> Result<Triangulation> {
    let moral = spec.dag().moralize();
    let sizes: Vec<u64> =
        (0..spec.domain().len()).map(|i| spec.domain().cardinality(i) as u64).collect();
    triangulate(&moral, &sizes, heuristic)
}

/// Compile against an already computed triangulation of the same network.
pub fn compile_with_triangulation(
    spec: &NetworkSpec,
    evidence: &Evidence,
    triangulation: &Triangulation,
    root_node: Option<&str>,
) -> Result<JunctionTreeState> {
    evidence.validate(spec.domain())?;
    let skeleton = JunctionTreeSkeleton::build(triangulation, root_node)?;

    let mut cliques: Vec<Slot> = vec![Slot::Unity; skeleton.n_cliques()];
    for cpt in spec.cpts() {
        let sliced = cpt.slice(&evidence.restricted_to(cpt.domain()), false)?;
        let members: Vec<usize> = sliced
            .domain()
            .labels()
            .iter()
            .map(|l| spec.domain().label_index(l).expect("table variable in network domain"))
            .collect();
        let home = skeleton
            .cliques()
            .iter()
            .position(|c| members.iter().all(|v| c.contains(v)))
            .expect("moralization puts every family inside a clique");
        cliques[home] = match &cliques[home] {
            Slot::Unity => Slot::Table(sliced),
            Slot::Table(t) => Slot::Table(t.mult(&sliced)?),
        };
    }

    let charge =
        Charge { cliques, separators: vec![Slot::Unity; skeleton.n_cliques()] };
    Ok(JunctionTreeState {
        skeleton,
        domain: spec.domain().clone(),
        triangulation_fill_edges: triangulation.fill_edges().len(),
        pristine: charge.clone(),
        charge,
        compile_evidence: evidence.clone(),
        evidence: evidence.clone(),
        phase: Phase::Initialized,
        log_p_evidence: None,
    })
}

impl JunctionTreeState {
    pub fn skeleton(&self) -> &JunctionTreeSkeleton {
        &self.skeleton
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn charge(&self) -> &Charge {
        &self.charge
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn fill_edge_count(&self) -> usize {
        self.triangulation_fill_edges
    }

    /// Natural log of the evidence mass, available once collected.
    pub fn log_p_evidence(&self) -> Option<f64> {
        self.log_p_evidence
    }

    /// The inward pass: every clique sends its separator marginal to its
    /// parent and divides itself by the sent message; the root is normalized
    /// at the end and the pre-normalization mass recorded as the probability
    /// of the entered evidence.
    pub fn propagate_collect(&mut self) -> Result<()> {
        self.propagate_collect_with(|_, _| {})
    }

    /// [`propagate_collect`](Self::propagate_collect) with an observer called
    /// after every message (and after the final normalization) with the
    /// current charge and the mass factor recorded so far.
    pub fn propagate_collect_with<F>(&mut self, mut observer: F) -> Result<()>
    where
        F: FnMut(&Charge, f64),
    {
        if self.phase != Phase::Initialized {
            return Err(Error::Phase {
                phase: self.phase.to_string(),
                detail: "collect runs once, from the initialized state".into(),
            });
        }
        for (child, parent) in self.skeleton.collect_edges() {
            let message = match &self.charge.cliques[child] {
                // an unreplaced unity sends nothing
                Slot::Unity => continue,
                Slot::Table(t) => {
                    let sep = self.skeleton.separator_vars(child);
                    let kept: Vec<&str> = sep
                        .iter()
                        .copied()
                        .filter(|l| t.domain().contains(l))
                        .collect();
                    if kept.is_empty() {
                        SparseTable::scalar(t.sum())
                    } else {
                        let drop: Vec<&str> = t
                            .domain()
                            .labels()
                            .iter()
                            .map(String::as_str)
                            .filter(|l| !kept.contains(l))
                            .collect();
                        if drop.is_empty() {
                            t.clone()
                        } else {
                            t.marg(&drop)?
                        }
                    }
                }
            };
            let Slot::Table(sender) = &self.charge.cliques[child] else { unreachable!() };
            let updated_sender = sender.div(&message)?;
            self.charge.cliques[parent] = match &self.charge.cliques[parent] {
                Slot::Unity => Slot::Table(message),
                Slot::Table(p) => Slot::Table(p.mult(&message)?),
            };
            self.charge.cliques[child] = Slot::Table(updated_sender);
            observer(&self.charge, 1.0);
        }

        let root = self.skeleton.root();
        let Slot::Table(root_table) = &self.charge.cliques[root] else {
            unreachable!("the root holds a table once all messages are in")
        };
        let mass = root_table.sum();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::ImpossibleEvidence);
        }
        self.charge.cliques[root] = Slot::Table(root_table.scale(1.0 / mass));
        self.log_p_evidence = Some(mass.ln());
        self.phase = Phase::Collected;
        observer(&self.charge, mass);
        Ok(())
    }

    /// The outward pass: every clique is multiplied by its parent's
    /// separator marginal, which also becomes the stored separator
    /// potential. Afterwards every clique potential is the conditional
    /// marginal over its variables given the evidence.
    pub fn propagate_distribute(&mut self) -> Result<()> {
        self.propagate_distribute_with(|_, _| {})
    }

    /// [`propagate_distribute`](Self::propagate_distribute) with a
    /// per-message observer, as in
    /// [`propagate_collect_with`](Self::propagate_collect_with).
    pub fn propagate_distribute_with<F>(&mut self, mut observer: F) -> Result<()>
    where
        F: FnMut(&Charge, f64),
    {
        if self.phase != Phase::Collected {
            return Err(Error::Phase {
                phase: self.phase.to_string(),
                detail: "distribute requires a collected tree".into(),
            });
        }
        let mass = self.log_p_evidence.map(f64::exp).unwrap_or(1.0);
        for (parent, child) in self.skeleton.distribute_edges() {
            let sep = self.skeleton.separator_vars(child);
            if sep.is_empty() {
                // joined forest components exchange only unit mass
                continue;
            }
            let Slot::Table(parent_table) = &self.charge.cliques[parent] else {
                unreachable!("parents are materialized after collect")
            };
            let drop: Vec<&str> = parent_table
                .domain()
                .labels()
                .iter()
                .map(String::as_str)
                .filter(|l| !sep.contains(l))
                .collect();
            let message =
                if drop.is_empty() { parent_table.clone() } else { parent_table.marg(&drop)? };
            self.charge.cliques[child] = match &self.charge.cliques[child] {
                Slot::Unity => Slot::Table(message.clone()),
                Slot::Table(c) => Slot::Table(c.mult(&message)?),
            };
            self.charge.separators[child] = Slot::Table(message);
            observer(&self.charge, mass);
        }
        self.phase = Phase::Distributed;
        Ok(())
    }

    /// Collect and distribute in one call.
    pub fn propagate(&mut self) -> Result<()> {
        self.propagate_collect()?;
        self.propagate_distribute()
    }

    /// Probability of the entered evidence, available once collected.
    pub fn prob_of_evidence(&self) -> Result<f64> {
        match self.log_p_evidence {
            Some(log_p) => Ok(log_p.exp()),
            None => Err(Error::Phase {
                phase: self.phase.to_string(),
                detail: "evidence mass is recorded by collect".into(),
            }),
        }
    }

    /// Conditional marginal of each queried node given the evidence.
    ///
    /// After distribute any node can be queried; after collect only, queries
    /// are restricted to nodes of the root clique.
    pub fn query_marginal<S: AsRef<str>>(&self, nodes: &[S]) -> Result<Vec<NodeMarginal>> {
        nodes.iter().map(|n| self.node_marginal(n.as_ref())).collect()
    }

    fn node_marginal(&self, node: &str) -> Result<NodeMarginal> {
        let idx = self
            .domain
            .label_index(node)
            .ok_or_else(|| Error::UnknownLabel(node.to_string()))?;
        let clique = match self.phase {
            Phase::Distributed => self
                .skeleton
                .clique_containing(idx)
                .expect("every variable lies in some clique"),
            Phase::Collected => {
                let root = self.skeleton.root();
                if !self.skeleton.cliques()[root].contains(&idx) {
                    return Err(Error::Phase {
                        phase: self.phase.to_string(),
                        detail: format!(
                            "'{node}' is outside the root clique; distribute first"
                        ),
                    });
                }
                root
            }
            Phase::Initialized => {
                return Err(Error::Phase {
                    phase: self.phase.to_string(),
                    detail: "queries need at least a collected tree".into(),
                })
            }
        };
        let Slot::Table(potential) = self.charge.clique(clique) else {
            unreachable!("queried cliques are materialized")
        };
        let table = self.marginal_over(potential, &[node])?;
        let states = self.domain.states(idx).to_vec();
        let probs: Vec<f64> = states
            .iter()
            .map(|s| table.get_val(&[(node, s.as_str())]))
            .collect::<Result<_>>()?;
        Ok(NodeMarginal { node: node.to_string(), states, probs })
    }

    /// Conditional joint over nodes that share a clique, after distribute.
    pub fn query_joint<S: AsRef<str>>(&self, nodes: &[S]) -> Result<SparseTable> {
        if self.phase != Phase::Distributed {
            return Err(Error::Phase {
                phase: self.phase.to_string(),
                detail: "joint queries need a distributed tree".into(),
            });
        }
        let mut indices = Vec::with_capacity(nodes.len());
        for n in nodes {
            let idx = self
                .domain
                .label_index(n.as_ref())
                .ok_or_else(|| Error::UnknownLabel(n.as_ref().to_string()))?;
            if !indices.contains(&idx) {
                indices.push(idx);
            }
        }
        if indices.is_empty() {
            return Err(Error::InvalidTable("joint query over no variables".into()));
        }
        let clique = self
            .skeleton
            .cliques()
            .iter()
            .position(|c| indices.iter().all(|v| c.contains(v)))
            .ok_or_else(|| {
                Error::NoCliqueContains(
                    indices.iter().map(|&v| self.domain.labels()[v].clone()).collect(),
                )
            })?;
        let Slot::Table(potential) = self.charge.clique(clique) else {
            unreachable!("cliques are materialized after distribute")
        };
        let keep: Vec<&str> = indices.iter().map(|&v| self.domain.labels()[v].as_str()).collect();
        self.marginal_over(potential, &keep)
    }

    fn marginal_over(&self, potential: &SparseTable, keep: &[&str]) -> Result<SparseTable> {
        for k in keep {
            assert!(
                potential.domain().contains(k),
                "potential covers its clique after propagation"
            );
        }
        let drop: Vec<&str> = potential
            .domain()
            .labels()
            .iter()
            .map(String::as_str)
            .filter(|l| !keep.contains(l))
            .collect();
        if drop.is_empty() {
            Ok(potential.clone())
        } else {
            potential.marg(&drop)
        }
    }

    /// Enter additional evidence by re-slicing the initialized charge, and
    /// reset the phase so the tree can be propagated again. Initialization
    /// work is never repeated; conflicting observations are rejected.
    pub fn set_evidence(&mut self, extra: &Evidence) -> Result<()> {
        extra.validate(&self.domain)?;
        let mut merged = self.evidence.clone();
        merged.merge(extra)?;
        let to_apply: Vec<(&str, &str)> =
            merged.iter().filter(|(v, _)| self.compile_evidence.get(v).is_none()).collect();
        let mut cliques = Vec::with_capacity(self.pristine.n_cliques());
        for slot in &self.pristine.cliques {
            cliques.push(match slot {
                Slot::Unity => Slot::Unity,
                Slot::Table(t) => {
                    let local: Vec<(&str, &str)> = to_apply
                        .iter()
                        .copied()
                        .filter(|(v, _)| t.domain().contains(v))
                        .collect();
                    Slot::Table(t.slice(&local, false)?)
                }
            });
        }
        self.charge =
            Charge { cliques, separators: vec![Slot::Unity; self.pristine.n_cliques()] };
        self.evidence = merged;
        self.phase = Phase::Initialized;
        self.log_p_evidence = None;
        Ok(())
    }
}
