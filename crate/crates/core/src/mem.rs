//! Byte-cost model for dense and sparse storage.
//!
//! A dense array with `x` cells costs `8x` bytes (one f64 per cell). A
//! sparse table with `y` stored cells over `k` variables costs `y(4k + 8)`
//! bytes: k 4-byte levels plus one 8-byte value per column. Domain metadata
//! is ignored on both sides.

use crate::domain::Domain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryKind {
    Dense,
    Sparse,
}

/// Estimated bytes for a table over `domain` with `n_nonzero` stored cells.
/// `n_nonzero` is ignored for dense storage.
pub fn mem_estimate(domain: &Domain, n_nonzero: u64, kind: MemoryKind) -> Result<u64> {
    match kind {
        MemoryKind::Dense => dense_bytes(domain.statespace_size()?),
        MemoryKind::Sparse => sparse_bytes(domain.len() as u64, n_nonzero),
    }
}

/// `8x` bytes for `x` dense cells.
pub fn dense_bytes(cells: u64) -> Result<u64> {
    cells
        .checked_mul(8)
        .ok_or_else(|| Error::Capacity("dense byte count exceeds u64".into()))
}

/// `y(4k + 8)` bytes for `y` stored cells over `k` variables.
pub fn sparse_bytes(k: u64, y: u64) -> Result<u64> {
    let per_column = k
        .checked_mul(4)
        .and_then(|b| b.checked_add(8))
        .ok_or_else(|| Error::Capacity("sparse column cost exceeds u64".into()))?;
    y.checked_mul(per_column)
        .ok_or_else(|| Error::Capacity("sparse byte count exceeds u64".into()))
}
