//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A label or state name violates domain construction rules.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// Two tables disagree on the state list of a shared variable.
    #[error("domain conflict on variable '{label}': {detail}")]
    DomainConflict { label: String, detail: String },

    /// A variable name was not found where it was required.
    #[error("unknown variable '{0}'")]
    UnknownLabel(String),

    /// A state name is not valid for the given variable.
    #[error("unknown state '{state}' for variable '{label}'")]
    UnknownState { label: String, state: String },

    /// A table construction or operation received malformed cells/values.
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// Division where the divisor's variables are not a subset of the dividend's.
    #[error("division requires the divisor variables to be a subset of the dividend variables; '{0}' is not")]
    NotSubset(String),

    /// Marginalizing away every variable of a table.
    #[error("cannot marginalize out all variables; use sum() for a full collapse")]
    FullCollapse,

    /// Normalizing a table with no mass.
    #[error("cannot normalize a table with total mass {0}")]
    Normalization(f64),

    /// A dense cell count or byte count does not fit in 64 bits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An index (column, clique, ...) is out of range.
    #[error("index {index} out of range ({len} available)")]
    IndexOutOfRange { index: usize, len: usize },

    /// Unrecognized triangulation heuristic name.
    #[error("unknown heuristic '{0}' (expected 'min_fill' or 'min_nei')")]
    UnknownHeuristic(String),

    /// A requested root variable is not contained in any clique.
    #[error("root variable '{0}' is not contained in any clique")]
    RootNotFound(String),

    /// The directed structure contains a cycle.
    #[error("directed structure contains a cycle involving '{0}'")]
    Cycle(String),

    /// Two tables declare the same child variable.
    #[error("duplicate conditional table for variable '{0}'")]
    DuplicateChild(String),

    /// A conditional table does not sum to one for some parent configuration.
    #[error("conditional table for '{child}' sums to {total} for a parent configuration (expected 1)")]
    CptNotNormalized { child: String, total: f64 },

    /// Malformed evidence token on the command line.
    #[error("malformed evidence '{0}' (expected var=state)")]
    MalformedEvidence(String),

    /// The same variable was observed twice.
    #[error("conflicting evidence for variable '{0}'")]
    DuplicateEvidence(String),

    /// The entered evidence has probability zero.
    #[error("evidence has probability 0")]
    ImpossibleEvidence,

    /// A propagation or query was attempted in the wrong phase.
    #[error("operation not allowed in phase {phase}: {detail}")]
    Phase { phase: String, detail: String },

    /// Joint query over variables that share no clique.
    #[error("variables {0:?} are not jointly contained in any clique")]
    NoCliqueContains(Vec<String>),

    /// Network file could not be parsed.
    #[error("network parse error: {0}")]
    Parse(String),

    /// The network file declares the wrong number of values for a table.
    #[error("table for '{child}' declares {got} values, expected {expected}")]
    WrongValueCount {
        child: String,
        expected: u64,
        got: usize,
    },

    /// A benchmark sparsity band could not be hit by rejection sampling.
    #[error("could not generate a table pair with product sparsity in ({lo}, {hi}] under {max_cells} cells")]
    BandUnsatisfiable { lo: f64, hi: f64, max_cells: u64 },

    /// Sparse and dense results disagreed during benchmarking.
    #[error("benchmark cross-validation failed for {op}: {detail}")]
    CrossValidation { op: String, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
