//! Sparse discrete probability tables and exact inference in Bayesian
//! networks over junction trees.
//!
//! The table layer stores only non-zero cells and implements the full
//! algebra needed for message passing (product, division, marginal, slice,
//! conditioning, normalization) as hash joins and streaming accumulations
//! over level tuples. A dense implementation of the same algebra doubles as
//! correctness oracle and benchmark baseline.
//!
//! On top of the tables: moralization, elimination-game triangulation,
//! junction tree construction, and collect/distribute propagation with
//! evidence entered by slicing, plus marginal, joint and
//! probability-of-evidence queries.

pub mod bench;
pub mod dense;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod graph;
pub mod index;
pub mod inference;
pub mod jtree;
pub mod mem;
pub mod network;
pub mod sparse;

pub use dense::DenseTable;
pub use domain::Domain;
pub use error::{Error, Result};
pub use graph::{Dag, Heuristic, Triangulation, UndirectedGraph};
pub use inference::{compile, Charge, JunctionTreeState, NodeMarginal, Phase, Slot};
pub use jtree::JunctionTreeSkeleton;
pub use mem::{mem_estimate, MemoryKind};
pub use network::{validate_cpt_list, Evidence, NetworkSpec};
pub use sparse::{SparseTable, UnityTable};
