//! Lookup structures backing the sparse table algebra.
//!
//! Both structures key on the restriction of a column to a subset of the
//! table's variables. Keys are encoded as a mixed-radix integer when the
//! subset's state space fits in 64 bits, otherwise as the raw level tuple;
//! either way the encoding is exact, so distinct restrictions never collide.

use indexmap::IndexMap;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::sparse::SparseTable;

/// Exact key for a level tuple over a variable subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SepKey {
    Packed(u64),
    Wide(Box<[u32]>),
}

/// Encodes column restrictions of one table into [`SepKey`]s.
///
/// Two codecs built over the same labels (in the same order, with the same
/// state lists) produce comparable keys even when the labels sit at
/// different row positions in their tables.
#[derive(Debug, Clone)]
pub(crate) struct KeyCodec {
    /// Row positions of the key variables inside the table's domain.
    rows: Vec<usize>,
    /// Mixed-radix strides; empty when the key does not pack into u64.
    strides: Vec<u64>,
    packed: bool,
}

impl KeyCodec {
    /// Codec for `labels` (all of which must exist in `domain`).
    pub(crate) fn new(domain: &Domain, labels: &[&str]) -> Result<KeyCodec> {
        let mut rows = Vec::with_capacity(labels.len());
        for l in labels {
            let idx = domain
                .label_index(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            rows.push(idx);
        }
        let mut strides = Vec::with_capacity(rows.len());
        let mut acc: u64 = 1;
        let mut packed = true;
        for &r in &rows {
            strides.push(acc);
            match acc.checked_mul(domain.cardinality(r) as u64) {
                Some(next) => acc = next,
                None => {
                    packed = false;
                    break;
                }
            }
        }
        if !packed {
            strides.clear();
        }
        Ok(KeyCodec { rows, strides, packed })
    }

    pub(crate) fn key(&self, column: &[u32]) -> SepKey {
        if self.packed {
            let mut acc = 0u64;
            for (&r, &s) in self.rows.iter().zip(self.strides.iter()) {
                acc += column[r] as u64 * s;
            }
            SepKey::Packed(acc)
        } else {
            SepKey::Wide(self.rows.iter().map(|&r| column[r]).collect())
        }
    }

    pub(crate) fn rows(&self) -> &[usize] {
        &self.rows
    }
}

/// Groups the columns of a table by their restriction to separator labels.
#[derive(Debug)]
pub struct SeparatorIndex {
    groups: IndexMap<SepKey, Vec<u32>>,
}

impl SeparatorIndex {
    /// Index `table` by its restriction to `sep` (order significant: the
    /// same order must be used for the table on the other side of a join).
    pub fn build(table: &SparseTable, sep: &[&str]) -> Result<SeparatorIndex> {
        let codec = KeyCodec::new(table.domain(), sep)?;
        let mut groups: IndexMap<SepKey, Vec<u32>> = IndexMap::new();
        for j in 0..table.n_cells() {
            let key = codec.key(table.column(j));
            groups.entry(key).or_default().push(j as u32);
        }
        Ok(SeparatorIndex { groups })
    }

    pub fn lookup(&self, key: &SepKey) -> Option<&[u32]> {
        self.groups.get(key).map(|v| v.as_slice())
    }

    /// Keys in first-occurrence order with their column groups.
    pub fn iter(&self) -> impl Iterator<Item = (&SepKey, &[u32])> {
        self.groups.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Number of distinct keys.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Streaming accumulator for marginalization: per kept-variable key, one
/// witness column plus the running value sum. The restricted cell matrix is
/// never materialized.
#[derive(Debug)]
pub struct MarginalIndex {
    codec: KeyCodec,
    entries: IndexMap<SepKey, (u32, f64)>,
}

impl MarginalIndex {
    /// Accumulate `table` over the kept labels `keep`.
    pub fn build(table: &SparseTable, keep: &[&str]) -> Result<MarginalIndex> {
        let codec = KeyCodec::new(table.domain(), keep)?;
        let mut entries: IndexMap<SepKey, (u32, f64)> = IndexMap::new();
        for j in 0..table.n_cells() {
            let key = codec.key(table.column(j));
            let val = table.vals()[j];
            entries
                .entry(key)
                .and_modify(|(w, acc)| {
                    *w = j as u32;
                    *acc += val;
                })
                .or_insert((j as u32, val));
        }
        Ok(MarginalIndex { codec, entries })
    }

    /// Entries in first-occurrence order: `(witness column, accumulated value)`.
    pub fn iter(&self) -> impl Iterator<Item = (&SepKey, u32, f64)> {
        self.entries.iter().map(|(k, &(w, v))| (k, w, v))
    }

    pub fn lookup(&self, key: &SepKey) -> Option<(u32, f64)> {
        self.entries.get(key).copied()
    }

    /// Number of distinct keys, i.e. the column count of the marginal.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn codec(&self) -> &KeyCodec {
        &self.codec
    }
}
