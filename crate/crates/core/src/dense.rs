//! Dense tables over the full cell space.
//!
//! Serves as the brute-force reference for the sparse operations and as the
//! baseline implementation in the benchmark harness. Values are stored flat
//! with the first listed variable varying fastest.

use crate::domain::Domain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTable {
    domain: Domain,
    values: Vec<f64>,
}

impl DenseTable {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        let expected = domain.statespace_size()?;
        if values.len() as u64 != expected {
            return Err(Error::InvalidTable(format!(
                "expected {expected} values for the domain, got {}",
                values.len()
            )));
        }
        Ok(DenseTable { domain, values })
    }

    pub fn zeros(domain: Domain) -> Result<Self> {
        let n = domain.statespace_size()?;
        let n = usize::try_from(n).map_err(|_| Error::Capacity("dense table too large".into()))?;
        Ok(DenseTable { domain, values: vec![0.0; n] })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scale(&self, factor: f64) -> DenseTable {
        DenseTable {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Decode a linear index into a 0-based level tuple.
    pub(crate) fn levels_at(&self, linear: usize, out: &mut Vec<u32>) {
        out.clear();
        let mut rest = linear as u64;
        for i in 0..self.domain.len() {
            let card = self.domain.cardinality(i) as u64;
            out.push((rest % card) as u32);
            rest /= card;
        }
    }

    /// Linear index of a 0-based level tuple.
    pub(crate) fn linear_of(&self, levels: &[u32]) -> usize {
        let strides = self.domain.strides();
        levels
            .iter()
            .zip(strides.iter())
            .map(|(&l, &s)| l as u64 * s)
            .sum::<u64>() as usize
    }

    /// Value at a fully named cell.
    pub fn value_at(&self, cell: &[(&str, &str)]) -> Result<f64> {
        let levels = named_cell_levels(&self.domain, cell)?;
        Ok(self.values[self.linear_of(&levels)])
    }

    /// Cell-wise product over the union of the two domains, this table's
    /// variables first.
    pub fn mult(&self, other: &DenseTable) -> Result<DenseTable> {
        self.broadcast(other, |a, b| a * b)
    }

    /// Cell-wise quotient with the potential convention: any cell where the
    /// divisor is zero yields zero.
    pub fn div(&self, other: &DenseTable) -> Result<DenseTable> {
        self.broadcast(other, |a, b| if b == 0.0 { 0.0 } else { a / b })
    }

    fn broadcast(&self, other: &DenseTable, f: impl Fn(f64, f64) -> f64) -> Result<DenseTable> {
        let domain = self.domain.union(&other.domain)?;
        let mut out = DenseTable::zeros(domain)?;
        // positions of each operand variable inside the result domain
        let a_pos: Vec<usize> = self
            .domain
            .labels()
            .iter()
            .map(|l| out.domain.label_index(l).unwrap())
            .collect();
        let b_pos: Vec<usize> = other
            .domain
            .labels()
            .iter()
            .map(|l| out.domain.label_index(l).unwrap())
            .collect();
        let a_strides = self.domain.strides();
        let b_strides = other.domain.strides();
        let mut levels = Vec::with_capacity(out.domain.len());
        for linear in 0..out.values.len() {
            out.levels_at(linear, &mut levels);
            let ai: u64 = a_pos
                .iter()
                .zip(a_strides.iter())
                .map(|(&p, &s)| levels[p] as u64 * s)
                .sum();
            let bi: u64 = b_pos
                .iter()
                .zip(b_strides.iter())
                .map(|(&p, &s)| levels[p] as u64 * s)
                .sum();
            out.values[linear] = f(self.values[ai as usize], other.values[bi as usize]);
        }
        Ok(out)
    }

    /// Sum out the variables in `drop`.
    pub fn marg<S: AsRef<str>>(&self, drop: &[S]) -> Result<DenseTable> {
        let drop_idx = label_indices(&self.domain, drop)?;
        let keep: Vec<usize> = (0..self.domain.len()).filter(|i| !drop_idx.contains(i)).collect();
        if keep.is_empty() && !self.domain.is_empty() {
            return Err(Error::FullCollapse);
        }
        let mut out = DenseTable::zeros(self.domain.project(&keep))?;
        let out_strides = out.domain.strides();
        let mut levels = Vec::with_capacity(self.domain.len());
        for linear in 0..self.values.len() {
            self.levels_at(linear, &mut levels);
            let oi: u64 = keep
                .iter()
                .zip(out_strides.iter())
                .map(|(&p, &s)| levels[p] as u64 * s)
                .sum();
            out.values[oi as usize] += self.values[linear];
        }
        Ok(out)
    }

    /// Zero every cell inconsistent with `assignment`; when `drop_sliced` the
    /// assigned variables are removed from the domain instead.
    pub fn slice<S: AsRef<str>>(&self, assignment: &[(S, S)], drop_sliced: bool) -> Result<DenseTable> {
        let mut pinned: Vec<Option<u32>> = vec![None; self.domain.len()];
        for (label, state) in assignment {
            let idx = self
                .domain
                .label_index(label.as_ref())
                .ok_or_else(|| Error::UnknownLabel(label.as_ref().to_string()))?;
            pinned[idx] = Some(self.domain.level_of(idx, state.as_ref())?);
        }
        let mut levels = Vec::with_capacity(self.domain.len());
        if !drop_sliced {
            let mut out = self.clone();
            for linear in 0..out.values.len() {
                out.levels_at(linear, &mut levels);
                let consistent = pinned
                    .iter()
                    .zip(levels.iter())
                    .all(|(p, &l)| p.map_or(true, |want| want == l));
                if !consistent {
                    out.values[linear] = 0.0;
                }
            }
            Ok(out)
        } else {
            let keep: Vec<usize> =
                (0..self.domain.len()).filter(|&i| pinned[i].is_none()).collect();
            let mut out = DenseTable::zeros(self.domain.project(&keep))?;
            let out_strides = out.domain.strides();
            for linear in 0..self.values.len() {
                self.levels_at(linear, &mut levels);
                let consistent = pinned
                    .iter()
                    .zip(levels.iter())
                    .all(|(p, &l)| p.map_or(true, |want| want == l));
                if consistent {
                    let oi: u64 = keep
                        .iter()
                        .zip(out_strides.iter())
                        .map(|(&p, &s)| levels[p] as u64 * s)
                        .sum();
                    out.values[oi as usize] = self.values[linear];
                }
            }
            Ok(out)
        }
    }

    /// Reorder variables; the cell values move with their coordinates.
    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<DenseTable> {
        let perm = label_indices(&self.domain, labels)?;
        if perm.len() != self.domain.len() {
            return Err(Error::InvalidTable("reorder must mention every variable".into()));
        }
        let mut out = DenseTable::zeros(self.domain.project(&perm))?;
        let out_strides = out.domain.strides();
        let mut levels = Vec::with_capacity(self.domain.len());
        for linear in 0..self.values.len() {
            self.levels_at(linear, &mut levels);
            let oi: u64 = perm
                .iter()
                .zip(out_strides.iter())
                .map(|(&p, &s)| levels[p] as u64 * s)
                .sum();
            out.values[oi as usize] = self.values[linear];
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &DenseTable) -> Option<f64> {
        if self.domain != other.domain {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Resolve label names to indices, rejecting unknowns and duplicates.
pub(crate) fn label_indices<S: AsRef<str>>(domain: &Domain, labels: &[S]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(labels.len());
    for l in labels {
        let idx = domain
            .label_index(l.as_ref())
            .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))?;
        if out.contains(&idx) {
            return Err(Error::InvalidTable(format!("duplicate variable '{}'", l.as_ref())));
        }
        out.push(idx);
    }
    Ok(out)
}

/// Resolve a fully named cell to a 0-based level tuple in domain order.
pub(crate) fn named_cell_levels(domain: &Domain, cell: &[(&str, &str)]) -> Result<Vec<u32>> {
    if cell.len() != domain.len() {
        return Err(Error::InvalidTable(format!(
            "cell names {} variables, domain has {}",
            cell.len(),
            domain.len()
        )));
    }
    let mut levels = vec![u32::MAX; domain.len()];
    for (label, state) in cell {
        let idx = domain
            .label_index(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if levels[idx] != u32::MAX {
            return Err(Error::InvalidTable(format!("variable '{label}' named twice")));
        }
        levels[idx] = domain.level_of(idx, state)?;
    }
    Ok(levels)
}
