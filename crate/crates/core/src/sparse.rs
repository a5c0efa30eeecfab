//! Sparse tables: the non-zero cells of a discrete table as a level-tuple
//! matrix plus a value vector.
//!
//! A table over k variables with N non-zero cells stores a k-row, N-column
//! matrix of levels (column-major) and the N values. Zero cells are
//! represented by absence; no operation ever stores an exact zero.
//! Multiplication is a hash join on the shared variables, marginalization a
//! streaming accumulation — neither touches cells outside the support.

use crate::dense::{label_indices, named_cell_levels, DenseTable};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::index::{KeyCodec, MarginalIndex, SeparatorIndex};

#[derive(Debug, Clone)]
pub struct SparseTable {
    domain: Domain,
    /// Column-major level matrix: column j lives at `cells[j*k..(j+1)*k]`,
    /// entries are 0-based levels.
    cells: Vec<u32>,
    vals: Vec<f64>,
}

/// The implicit all-ones table over a domain; only the domain is stored.
#[derive(Debug, Clone)]
pub struct UnityTable {
    domain: Domain,
}

impl SparseTable {
    /// Build a table from 1-based level columns, validating all invariants:
    /// levels in range, unique columns, non-zero values.
    pub fn new(domain: Domain, columns: &[Vec<u32>], vals: &[f64]) -> Result<Self> {
        if columns.len() != vals.len() {
            return Err(Error::InvalidTable(format!(
                "{} columns but {} values",
                columns.len(),
                vals.len()
            )));
        }
        let k = domain.len();
        let mut cells = Vec::with_capacity(k * columns.len());
        for col in columns {
            if col.len() != k {
                return Err(Error::InvalidTable(format!(
                    "column has {} levels, domain has {k} variables",
                    col.len()
                )));
            }
            for (i, &level) in col.iter().enumerate() {
                if level < 1 || level as usize > domain.cardinality(i) {
                    return Err(Error::InvalidTable(format!(
                        "level {level} out of range for variable '{}'",
                        domain.labels()[i]
                    )));
                }
                cells.push(level - 1);
            }
        }
        for &v in vals {
            if v == 0.0 {
                return Err(Error::InvalidTable("explicit zero value".into()));
            }
        }
        let table = SparseTable { domain, cells, vals: vals.to_vec() };
        // uniqueness of columns
        let mut seen = std::collections::HashSet::with_capacity(table.n_cells());
        for j in 0..table.n_cells() {
            if !seen.insert(table.column(j).to_vec()) {
                return Err(Error::InvalidTable("duplicate cell".into()));
            }
        }
        Ok(table)
    }

    /// Table with no support over `domain`.
    pub fn empty(domain: Domain) -> Self {
        SparseTable { domain, cells: Vec::new(), vals: Vec::new() }
    }

    /// Scalar table: no variables, a single cell holding `value`
    /// (or empty support when `value` is zero).
    pub fn scalar(value: f64) -> Self {
        if value == 0.0 {
            SparseTable::empty(Domain::scalar())
        } else {
            SparseTable { domain: Domain::scalar(), cells: Vec::new(), vals: vec![value] }
        }
    }

    /// Collect the non-zero cells of a dense table.
    pub fn from_dense(dense: &DenseTable) -> SparseTable {
        let k = dense.domain().len();
        let mut cells = Vec::new();
        let mut vals = Vec::new();
        let mut levels = Vec::with_capacity(k);
        for (linear, &v) in dense.values().iter().enumerate() {
            if v != 0.0 {
                dense.levels_at(linear, &mut levels);
                cells.extend_from_slice(&levels);
                vals.push(v);
            }
        }
        SparseTable { domain: dense.domain().clone(), cells, vals }
    }

    /// Expand to the full cell space; absent cells become zero.
    pub fn to_dense(&self) -> Result<DenseTable> {
        let mut out = DenseTable::zeros(self.domain.clone())?;
        for j in 0..self.n_cells() {
            let linear = out.linear_of(self.column(j));
            out.values_mut()[linear] = self.vals[j];
        }
        Ok(out)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of stored (non-zero) cells.
    pub fn n_cells(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    /// 0-based level column `j`.
    pub(crate) fn column(&self, j: usize) -> &[u32] {
        let k = self.domain.len();
        &self.cells[j * k..(j + 1) * k]
    }

    /// 1-based level tuple of column `j`.
    pub fn level_tuple(&self, j: usize) -> Result<Vec<u32>> {
        self.check_col(j)?;
        Ok(self.column(j).iter().map(|&l| l + 1).collect())
    }

    /// Named cell of column `j` as `(variable, state)` pairs in domain order.
    pub fn get_cell_name(&self, j: usize) -> Result<Vec<(&str, &str)>> {
        self.check_col(j)?;
        Ok(self
            .column(j)
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                (self.domain.labels()[i].as_str(), self.domain.states(i)[l as usize].as_str())
            })
            .collect())
    }

    fn check_col(&self, j: usize) -> Result<()> {
        if j >= self.n_cells() {
            return Err(Error::IndexOutOfRange { index: j, len: self.n_cells() });
        }
        Ok(())
    }

    /// Value at a fully named cell; absent cells read as zero.
    pub fn get_val(&self, cell: &[(&str, &str)]) -> Result<f64> {
        let levels = named_cell_levels(&self.domain, cell)?;
        for j in 0..self.n_cells() {
            if self.column(j) == levels.as_slice() {
                return Ok(self.vals[j]);
            }
        }
        Ok(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.vals.iter().sum()
    }

    pub fn max(&self) -> Option<f64> {
        self.vals.iter().copied().reduce(f64::max)
    }

    pub fn min(&self) -> Option<f64> {
        self.vals.iter().copied().reduce(f64::min)
    }

    /// Column index of the maximum value; the lowest index wins ties.
    pub fn which_max_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &v) in self.vals.iter().enumerate() {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Column index of the minimum value; the lowest index wins ties.
    pub fn which_min_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &v) in self.vals.iter().enumerate() {
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Fraction of the dense cell space that is zero.
    pub fn sparsity(&self) -> f64 {
        1.0 - self.n_cells() as f64 / self.domain.statespace_size_f64()
    }

    /// Identical domains and identical support with values equal within
    /// `tol`, ignoring column order.
    pub fn equiv(&self, other: &SparseTable, tol: f64) -> bool {
        if self.domain != other.domain || self.n_cells() != other.n_cells() {
            return false;
        }
        let mut lookup = std::collections::HashMap::with_capacity(other.n_cells());
        for j in 0..other.n_cells() {
            lookup.insert(other.column(j), other.vals[j]);
        }
        (0..self.n_cells()).all(|j| {
            lookup
                .get(self.column(j))
                .map_or(false, |&v| (v - self.vals[j]).abs() <= tol)
        })
    }

    /// Permute the variable order; `labels` must mention every variable once.
    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<SparseTable> {
        let perm = label_indices(&self.domain, labels)?;
        if perm.len() != self.domain.len() {
            return Err(Error::InvalidTable("reorder must mention every variable".into()));
        }
        let domain = self.domain.project(&perm);
        let k = perm.len();
        let mut cells = Vec::with_capacity(self.cells.len());
        for j in 0..self.n_cells() {
            let col = self.column(j);
            cells.extend(perm.iter().map(|&p| col[p]));
        }
        debug_assert_eq!(cells.len(), k * self.n_cells());
        Ok(SparseTable { domain, cells, vals: self.vals.clone() })
    }

    /// Multiply all values by a non-zero factor.
    pub fn scale(&self, factor: f64) -> SparseTable {
        let mut out = SparseTable {
            domain: self.domain.clone(),
            cells: Vec::with_capacity(self.cells.len()),
            vals: Vec::with_capacity(self.vals.len()),
        };
        let k = self.domain.len();
        for j in 0..self.n_cells() {
            let v = self.vals[j] * factor;
            if v != 0.0 {
                out.cells.extend_from_slice(&self.cells[j * k..(j + 1) * k]);
                out.vals.push(v);
            }
        }
        out
    }

    /// Hash-join product. The result ranges over this table's variables
    /// followed by the other table's remaining variables; its column count is
    /// the sum over mutual separator keys of the group size products, so the
    /// output is allocated exactly once and zero cells never materialize.
    pub fn mult(&self, other: &SparseTable) -> Result<SparseTable> {
        let domain = self.domain.union(&other.domain)?;
        let sep: Vec<&str> = self
            .domain
            .labels()
            .iter()
            .filter(|l| other.domain.contains(l))
            .map(|l| l.as_str())
            .collect();
        let a_idx = SeparatorIndex::build(self, &sep)?;
        let b_idx = SeparatorIndex::build(other, &sep)?;
        // rows of `other` that extend the result beyond this table
        let b_extra: Vec<usize> = other
            .domain
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| !self.domain.contains(l))
            .map(|(i, _)| i)
            .collect();

        let mut n: u64 = 0;
        for (key, a_cols) in a_idx.iter() {
            if let Some(b_cols) = b_idx.lookup(key) {
                n += a_cols.len() as u64 * b_cols.len() as u64;
            }
        }
        let k = domain.len();
        let n_usize = usize::try_from(n)
            .ok()
            .and_then(|n| n.checked_mul(k))
            .ok_or_else(|| Error::Capacity("product support too large".into()))?;

        let mut cells = Vec::with_capacity(n_usize);
        let mut vals = Vec::with_capacity(n as usize);
        for (key, a_cols) in a_idx.iter() {
            let Some(b_cols) = b_idx.lookup(key) else { continue };
            for &j in a_cols {
                let a_col = self.column(j as usize);
                let a_val = self.vals[j as usize];
                for &j2 in b_cols {
                    let v = a_val * other.vals[j2 as usize];
                    if v == 0.0 {
                        continue;
                    }
                    let b_col = other.column(j2 as usize);
                    cells.extend_from_slice(a_col);
                    cells.extend(b_extra.iter().map(|&r| b_col[r]));
                    vals.push(v);
                }
            }
        }
        Ok(SparseTable { domain, cells, vals })
    }

    /// Cell-wise quotient. The divisor's variables must be a subset of this
    /// table's variables (the message-passing case). Cells whose restriction
    /// is absent from the divisor are dropped (0/0 reads as 0).
    pub fn div(&self, other: &SparseTable) -> Result<SparseTable> {
        self.domain.check_compatible(&other.domain)?;
        for l in other.domain.labels() {
            if !self.domain.contains(l) {
                return Err(Error::NotSubset(l.clone()));
            }
        }
        let sep: Vec<&str> = other.domain.labels().iter().map(|l| l.as_str()).collect();
        let b_idx = SeparatorIndex::build(other, &sep)?;
        let codec = KeyCodec::new(&self.domain, &sep)?;
        let k = self.domain.len();
        let mut cells = Vec::new();
        let mut vals = Vec::new();
        for j in 0..self.n_cells() {
            let key = codec.key(self.column(j));
            let Some(b_cols) = b_idx.lookup(&key) else { continue };
            debug_assert_eq!(b_cols.len(), 1);
            let v = self.vals[j] / other.vals[b_cols[0] as usize];
            if v != 0.0 {
                cells.extend_from_slice(&self.cells[j * k..(j + 1) * k]);
                vals.push(v);
            }
        }
        Ok(SparseTable { domain: self.domain.clone(), cells, vals })
    }

    /// Sum out the variables in `drop`, streaming over the columns.
    pub fn marg<S: AsRef<str>>(&self, drop: &[S]) -> Result<SparseTable> {
        let drop_idx = label_indices(&self.domain, drop)?;
        if drop_idx.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> =
            (0..self.domain.len()).filter(|i| !drop_idx.contains(i)).collect();
        if keep.is_empty() {
            return Err(Error::FullCollapse);
        }
        let keep_labels: Vec<&str> = keep.iter().map(|&i| self.domain.labels()[i].as_str()).collect();
        let h = MarginalIndex::build(self, &keep_labels)?;
        let domain = self.domain.project(&keep);
        let mut cells = Vec::with_capacity(keep.len() * h.len());
        let mut vals = Vec::with_capacity(h.len());
        for (_, witness, acc) in h.iter() {
            if acc == 0.0 {
                continue;
            }
            let col = self.column(witness as usize);
            cells.extend(h.codec().rows().iter().map(|&r| col[r]));
            vals.push(acc);
        }
        Ok(SparseTable { domain, cells, vals })
    }

    /// Drop the columns inconsistent with `assignment`. With `drop_sliced`
    /// the assigned variables are removed from the domain as well; otherwise
    /// they stay as degenerate rows (the evidence form).
    pub fn slice<S: AsRef<str>>(&self, assignment: &[(S, S)], drop_sliced: bool) -> Result<SparseTable> {
        let mut pinned: Vec<(usize, u32)> = Vec::with_capacity(assignment.len());
        for (label, state) in assignment {
            let idx = self
                .domain
                .label_index(label.as_ref())
                .ok_or_else(|| Error::UnknownLabel(label.as_ref().to_string()))?;
            if pinned.iter().any(|&(i, _)| i == idx) {
                return Err(Error::InvalidTable(format!(
                    "variable '{}' sliced twice",
                    label.as_ref()
                )));
            }
            pinned.push((idx, self.domain.level_of(idx, state.as_ref())?));
        }
        if pinned.is_empty() {
            return Ok(self.clone());
        }
        let keep_rows: Vec<usize> = if drop_sliced {
            (0..self.domain.len())
                .filter(|i| !pinned.iter().any(|&(p, _)| p == *i))
                .collect()
        } else {
            (0..self.domain.len()).collect()
        };
        let domain = if drop_sliced { self.domain.project(&keep_rows) } else { self.domain.clone() };
        let mut cells = Vec::new();
        let mut vals = Vec::new();
        for j in 0..self.n_cells() {
            let col = self.column(j);
            if pinned.iter().all(|&(i, want)| col[i] == want) {
                cells.extend(keep_rows.iter().map(|&r| col[r]));
                vals.push(self.vals[j]);
            }
        }
        Ok(SparseTable { domain, cells, vals })
    }

    /// Multiply by a unity table: every column is replicated once per level
    /// combination of the unity's new variables, values copied unchanged.
    pub fn mult_unity(&self, unity: &UnityTable) -> Result<SparseTable> {
        self.extend_by_unity(unity, |v| v)
    }

    fn extend_by_unity(&self, unity: &UnityTable, f: impl Fn(f64) -> f64) -> Result<SparseTable> {
        let domain = self.domain.union(&unity.domain)?;
        let new_rows: Vec<usize> = unity
            .domain
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| !self.domain.contains(l))
            .map(|(i, _)| i)
            .collect();
        let combos: u64 = new_rows
            .iter()
            .map(|&r| unity.domain.cardinality(r) as u64)
            .product();
        let n = self.n_cells() as u64 * combos;
        let k = domain.len();
        let n_usize = usize::try_from(n)
            .ok()
            .and_then(|n| n.checked_mul(k))
            .ok_or_else(|| Error::Capacity("unity extension too large".into()))?;
        let mut cells = Vec::with_capacity(n_usize);
        let mut vals = Vec::with_capacity(n as usize);
        let mut tuple = vec![0u32; new_rows.len()];
        for j in 0..self.n_cells() {
            let col = self.column(j);
            let v = f(self.vals[j]);
            if v == 0.0 {
                continue;
            }
            tuple.iter_mut().for_each(|t| *t = 0);
            loop {
                cells.extend_from_slice(col);
                cells.extend_from_slice(&tuple);
                vals.push(v);
                // advance mixed-radix, first variable fastest
                let mut i = 0;
                loop {
                    if i == tuple.len() {
                        break;
                    }
                    tuple[i] += 1;
                    if (tuple[i] as usize) < unity.domain.cardinality(new_rows[i]) {
                        break;
                    }
                    tuple[i] = 0;
                    i += 1;
                }
                if i == tuple.len() {
                    break;
                }
            }
        }
        Ok(SparseTable { domain, cells, vals })
    }

    /// Rescale so the values sum to one.
    pub fn normalize(&self) -> Result<SparseTable> {
        let total = self.sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Normalization(total));
        }
        Ok(self.scale(1.0 / total))
    }

    /// Divide each value by the marginal over `given` at the cell's
    /// `given`-restriction: a conditional probability table given `given`.
    pub fn as_cpt<S: AsRef<str>>(&self, given: &[S]) -> Result<SparseTable> {
        let given_idx = label_indices(&self.domain, given)?;
        if given_idx.is_empty() {
            return self.normalize();
        }
        let drop: Vec<&str> = (0..self.domain.len())
            .filter(|i| !given_idx.contains(i))
            .map(|i| self.domain.labels()[i].as_str())
            .collect();
        let conditional_marginal = self.marg(&drop)?;
        self.div(&conditional_marginal)
    }
}

impl UnityTable {
    pub fn new(domain: Domain) -> Self {
        UnityTable { domain }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Divide the unity table by a sparse table: the unity extension of the
    /// reciprocal values over the table's support.
    pub fn div(&self, table: &SparseTable) -> Result<SparseTable> {
        table.extend_by_unity(self, |v| 1.0 / v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dense_f, dense_g, sparse_f, sparse_g};

    const TOL: f64 = 1e-12;

    #[test]
    fn from_dense_collects_nonzeros_in_linear_order() {
        let f = sparse_f();
        assert_eq!(f.n_cells(), 4);
        assert_eq!(f.vals(), &[5.0, 4.0, 7.0, 9.0]);
        assert_eq!(f.level_tuple(0).unwrap(), vec![1, 1, 1]);
        assert_eq!(f.level_tuple(1).unwrap(), vec![2, 1, 1]);
        assert_eq!(f.level_tuple(2).unwrap(), vec![2, 2, 1]);
        assert_eq!(f.level_tuple(3).unwrap(), vec![2, 1, 2]);
        let g = sparse_g();
        assert_eq!(g.vals(), &[7.0, 6.0, 6.0, 9.0]);
    }

    #[test]
    fn from_dense_of_all_zero_is_empty() {
        let d = Domain::new(vec![("A", vec!["a1", "a2"]), ("B", vec!["b1", "b2"])]).unwrap();
        let zero = DenseTable::zeros(d.clone()).unwrap();
        let s = SparseTable::from_dense(&zero);
        assert_eq!(s.n_cells(), 0);
        assert_eq!(s.to_dense().unwrap(), zero);
    }

    #[test]
    fn roundtrip_to_dense() {
        let f = dense_f();
        assert_eq!(SparseTable::from_dense(&f).to_dense().unwrap(), f);
        let g = dense_g();
        assert_eq!(SparseTable::from_dense(&g).to_dense().unwrap(), g);
    }

    #[test]
    fn mult_reproduces_worked_product() {
        let p = sparse_f().mult(&sparse_g()).unwrap();
        assert_eq!(p.domain().labels(), ["X", "Y", "Z", "W"]);
        assert_eq!(p.n_cells(), 4);
        let expect = [
            ([("X", "x1"), ("Y", "y1"), ("Z", "z1"), ("W", "w1")], 35.0),
            ([("X", "x2"), ("Y", "y1"), ("Z", "z1"), ("W", "w1")], 28.0),
            ([("X", "x2"), ("Y", "y2"), ("Z", "z1"), ("W", "w1")], 42.0),
            ([("X", "x2"), ("Y", "y1"), ("Z", "z2"), ("W", "w2")], 81.0),
        ];
        for (cell, v) in expect {
            assert_eq!(p.get_val(&cell).unwrap(), v);
        }
    }

    #[test]
    fn mult_agrees_with_dense_product() {
        let p = sparse_f().mult(&sparse_g()).unwrap();
        let dp = dense_f().mult(&dense_g()).unwrap();
        assert!(p.equiv(&SparseTable::from_dense(&dp), TOL));
    }

    #[test]
    fn mult_with_disjoint_domain_is_cartesian() {
        let a = sparse_f();
        let b_domain = Domain::new(vec![("W", vec!["w1", "w2"])]).unwrap();
        let all_ones =
            SparseTable::new(b_domain.clone(), &[vec![1], vec![2]], &[1.0, 1.0]).unwrap();
        let p = a.mult(&all_ones).unwrap();
        let u = a.mult_unity(&UnityTable::new(b_domain)).unwrap();
        assert!(p.equiv(&u, 0.0));
        assert_eq!(p.n_cells(), 8);
    }

    #[test]
    fn mult_rejects_state_conflicts() {
        let a = sparse_f();
        let d = Domain::new(vec![("X", vec!["x2", "x1"])]).unwrap();
        let b = SparseTable::new(d, &[vec![1]], &[1.0]).unwrap();
        assert!(matches!(a.mult(&b), Err(Error::DomainConflict { .. })));
    }

    #[test]
    fn div_by_own_marginal_is_conditional() {
        let f = sparse_f();
        let m = f.marg(&["X"]).unwrap();
        let q = f.div(&m).unwrap();
        assert_eq!(q.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1")]).unwrap(), 5.0 / 9.0);
        assert_eq!(q.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z1")]).unwrap(), 4.0 / 9.0);
        assert_eq!(q.get_val(&[("X", "x2"), ("Y", "y2"), ("Z", "z1")]).unwrap(), 1.0);
        assert_eq!(q.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z2")]).unwrap(), 1.0);
    }

    #[test]
    fn div_self_is_ones_on_support() {
        let f = sparse_f();
        let q = f.div(&f).unwrap();
        assert_eq!(q.n_cells(), 4);
        assert!(q.vals().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn div_drops_cells_missing_from_divisor() {
        let f = sparse_f();
        // divisor over Z with only z1 present: the z2 cell of f must vanish
        let d = Domain::new(vec![("Z", vec!["z1", "z2"])]).unwrap();
        let b = SparseTable::new(d, &[vec![1]], &[2.0]).unwrap();
        let q = f.div(&b).unwrap();
        assert_eq!(q.n_cells(), 3);
        assert_eq!(q.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z2")]).unwrap(), 0.0);
        assert_eq!(q.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1")]).unwrap(), 2.5);
    }

    #[test]
    fn div_rejects_non_subset() {
        let f = sparse_f();
        let g = sparse_g();
        assert!(matches!(f.div(&g), Err(Error::NotSubset(_))));
    }

    #[test]
    fn marg_matches_worked_values() {
        let m = sparse_f().marg(&["X"]).unwrap();
        assert_eq!(m.domain().labels(), ["Y", "Z"]);
        assert_eq!(m.n_cells(), 3);
        assert_eq!(m.get_val(&[("Y", "y1"), ("Z", "z1")]).unwrap(), 9.0);
        assert_eq!(m.get_val(&[("Y", "y2"), ("Z", "z1")]).unwrap(), 7.0);
        assert_eq!(m.get_val(&[("Y", "y1"), ("Z", "z2")]).unwrap(), 9.0);

        let mg = sparse_g().marg(&["Y"]).unwrap();
        assert_eq!(mg.n_cells(), 3);
        assert_eq!(mg.get_val(&[("Z", "z1"), ("W", "w1")]).unwrap(), 13.0);
        assert_eq!(mg.get_val(&[("Z", "z2"), ("W", "w1")]).unwrap(), 6.0);
        assert_eq!(mg.get_val(&[("Z", "z2"), ("W", "w2")]).unwrap(), 9.0);
    }

    #[test]
    fn marg_nothing_is_identity() {
        let f = sparse_f();
        let m = f.marg::<&str>(&[]).unwrap();
        assert!(m.equiv(&f, 0.0));
    }

    #[test]
    fn marg_everything_is_rejected() {
        let f = sparse_f();
        assert!(matches!(f.marg(&["X", "Y", "Z"]), Err(Error::FullCollapse)));
    }

    #[test]
    fn slice_keeps_or_drops_rows() {
        let f = sparse_f();
        let kept = f.slice(&[("X", "x1")], false).unwrap();
        assert_eq!(kept.domain().labels(), ["X", "Y", "Z"]);
        assert_eq!(kept.n_cells(), 1);
        assert_eq!(kept.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1")]).unwrap(), 5.0);

        let dropped = f.slice(&[("X", "x1")], true).unwrap();
        assert_eq!(dropped.domain().labels(), ["Y", "Z"]);
        assert_eq!(dropped.get_val(&[("Y", "y1"), ("Z", "z1")]).unwrap(), 5.0);
    }

    #[test]
    fn slice_empty_assignment_is_identity() {
        let f = sparse_f();
        assert!(f.slice::<&str>(&[], false).unwrap().equiv(&f, 0.0));
    }

    #[test]
    fn slice_unknown_names_error() {
        let f = sparse_f();
        assert!(f.slice(&[("Q", "q1")], false).is_err());
        assert!(matches!(
            f.slice(&[("X", "nope")], false),
            Err(Error::UnknownState { .. })
        ));
    }

    #[test]
    fn as_cpt_matches_worked_values() {
        let cpt = sparse_f().as_cpt(&["Z"]).unwrap();
        assert!((cpt.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1")]).unwrap() - 0.3125).abs() < TOL);
        assert!((cpt.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z1")]).unwrap() - 0.25).abs() < TOL);
        assert!((cpt.get_val(&[("X", "x2"), ("Y", "y2"), ("Z", "z1")]).unwrap() - 0.4375).abs() < TOL);
        assert!((cpt.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z2")]).unwrap() - 1.0).abs() < TOL);

        let sliced = cpt.slice(&[("Z", "z1")], false).unwrap();
        assert_eq!(sliced.n_cells(), 3);
    }

    #[test]
    fn as_cpt_on_nothing_is_normalize() {
        let f = sparse_f();
        let a = f.as_cpt::<&str>(&[]).unwrap();
        let b = f.normalize().unwrap();
        assert!(a.equiv(&b, 0.0));
        assert_eq!(b.vals(), &[0.2, 0.16, 0.28, 0.36]);
    }

    #[test]
    fn as_cpt_with_single_cell_slices() {
        let cpt = sparse_g().as_cpt(&["Y", "Z"]).unwrap();
        assert_eq!(cpt.n_cells(), 4);
        assert!(cpt.vals().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn cpt_slices_sum_to_one() {
        let cpt = sparse_f().as_cpt(&["Z"]).unwrap();
        let sums = cpt.marg(&["X", "Y"]).unwrap();
        for &v in sums.vals() {
            assert!((v - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn normalize_handles_edge_cases() {
        let single = SparseTable::new(
            Domain::new(vec![("A", vec!["a1", "a2"])]).unwrap(),
            &[vec![1]],
            &[7.0],
        )
        .unwrap();
        assert_eq!(single.normalize().unwrap().vals(), &[1.0]);
        let n = sparse_f().normalize().unwrap();
        assert!(n.normalize().unwrap().equiv(&n, TOL));
        let empty = SparseTable::empty(Domain::new(vec![("A", vec!["a1"])]).unwrap());
        assert!(matches!(empty.normalize(), Err(Error::Normalization(_))));
    }

    #[test]
    fn mult_unity_replicates_columns() {
        let f = sparse_f();
        let w = UnityTable::new(Domain::new(vec![("W", vec!["w1", "w2"])]).unwrap());
        let p = f.mult_unity(&w).unwrap();
        assert_eq!(p.n_cells(), 8);
        assert_eq!(p.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1"), ("W", "w1")]).unwrap(), 5.0);
        assert_eq!(p.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1"), ("W", "w2")]).unwrap(), 5.0);
        // against the dense oracle: multiply by a table of ones
        let ones = DenseTable::new(w.domain().clone(), vec![1.0, 1.0]).unwrap();
        let dp = dense_f().mult(&ones).unwrap();
        assert!(p.equiv(&SparseTable::from_dense(&dp), TOL));
    }

    #[test]
    fn mult_unity_with_covered_domain_is_identity() {
        let f = sparse_f();
        let u = UnityTable::new(
            Domain::new(vec![("Y", vec!["y1", "y2"]), ("Z", vec!["z1", "z2"])]).unwrap(),
        );
        assert!(f.mult_unity(&u).unwrap().equiv(&f, 0.0));
    }

    #[test]
    fn mult_unity_of_empty_is_empty() {
        let empty = SparseTable::empty(Domain::new(vec![("A", vec!["a1"])]).unwrap());
        let u = UnityTable::new(Domain::new(vec![("W", vec!["w1", "w2"])]).unwrap());
        assert_eq!(empty.mult_unity(&u).unwrap().n_cells(), 0);
    }

    #[test]
    fn div_unity_takes_reciprocals() {
        let f = sparse_f();
        let u = UnityTable::new(f.domain().clone());
        let q = u.div(&f).unwrap();
        assert_eq!(q.n_cells(), 4);
        assert_eq!(q.get_val(&[("X", "x1"), ("Y", "y1"), ("Z", "z1")]).unwrap(), 1.0 / 5.0);
        assert_eq!(q.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z2")]).unwrap(), 1.0 / 9.0);

        let wide = UnityTable::new(
            Domain::new(vec![
                ("X", vec!["x1", "x2"]),
                ("Y", vec!["y1", "y2"]),
                ("Z", vec!["z1", "z2"]),
                ("W", vec!["w1", "w2"]),
            ])
            .unwrap(),
        );
        let qw = wide.div(&f).unwrap();
        assert_eq!(qw.n_cells(), 8);
        assert_eq!(qw.get_val(&[("X", "x2"), ("Y", "y2"), ("Z", "z1"), ("W", "w2")]).unwrap(), 1.0 / 7.0);
    }

    #[test]
    fn div_unity_of_ones_is_ones() {
        let d = Domain::new(vec![("A", vec!["a1", "a2"])]).unwrap();
        let ones = SparseTable::new(d.clone(), &[vec![1], vec![2]], &[1.0, 1.0]).unwrap();
        let q = UnityTable::new(d).div(&ones).unwrap();
        assert_eq!(q.n_cells(), 2);
        assert!(q.vals().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn cell_name_and_absent_lookup() {
        let f = sparse_f();
        assert_eq!(
            f.get_cell_name(1).unwrap(),
            vec![("X", "x2"), ("Y", "y1"), ("Z", "z1")]
        );
        assert!(f.get_cell_name(4).is_err());
        assert_eq!(f.get_val(&[("X", "x1"), ("Y", "y2"), ("Z", "z2")]).unwrap(), 0.0);
    }

    #[test]
    fn sparsity_and_extrema() {
        let f = sparse_f();
        assert_eq!(f.sparsity(), 0.5);
        assert_eq!(f.sum(), 25.0);
        assert_eq!(f.max(), Some(9.0));
        assert_eq!(f.min(), Some(4.0));
        assert_eq!(f.which_max_cell(), Some(3));
        assert_eq!(f.which_min_cell(), Some(1));
        // ties resolve to the lowest column index
        let d = Domain::new(vec![("A", vec!["a1", "a2", "a3"])]).unwrap();
        let t = SparseTable::new(d, &[vec![1], vec![2], vec![3]], &[2.0, 2.0, 1.0]).unwrap();
        assert_eq!(t.which_max_cell(), Some(0));
    }

    #[test]
    fn equiv_ignores_column_order_only() {
        let f = sparse_f();
        let d = f.domain().clone();
        let reordered = SparseTable::new(
            d,
            &[vec![2, 1, 2], vec![1, 1, 1], vec![2, 2, 1], vec![2, 1, 1]],
            &[9.0, 5.0, 7.0, 4.0],
        )
        .unwrap();
        assert!(f.equiv(&reordered, 0.0));
        let other_vals = reordered.scale(2.0);
        assert!(!f.equiv(&other_vals, 1e-9));
    }

    #[test]
    fn reorder_permutes_rows() {
        let f = sparse_f();
        let r = f.reorder(&["Z", "X", "Y"]).unwrap();
        assert_eq!(r.domain().labels(), ["Z", "X", "Y"]);
        assert_eq!(r.get_val(&[("X", "x2"), ("Y", "y1"), ("Z", "z2")]).unwrap(), 9.0);
        assert!(r.reorder(&["X", "Y", "Z"]).unwrap().equiv(&f, 0.0));
    }

    #[test]
    fn constructor_rejects_invalid_tables() {
        let d = Domain::new(vec![("A", vec!["a1", "a2"])]).unwrap();
        assert!(SparseTable::new(d.clone(), &[vec![3]], &[1.0]).is_err());
        assert!(SparseTable::new(d.clone(), &[vec![0]], &[1.0]).is_err());
        assert!(SparseTable::new(d.clone(), &[vec![1]], &[0.0]).is_err());
        assert!(SparseTable::new(d.clone(), &[vec![1], vec![1]], &[1.0, 2.0]).is_err());
        assert!(SparseTable::new(d, &[vec![1, 2]], &[1.0]).is_err());
    }

    #[test]
    fn scalar_tables_compose() {
        let two = SparseTable::scalar(2.0);
        let f = sparse_f();
        let doubled = f.mult(&two).unwrap();
        assert!(doubled.equiv(&f.scale(2.0), TOL));
        let halved = f.div(&two).unwrap();
        assert!(halved.equiv(&f.scale(0.5), TOL));
        assert_eq!(SparseTable::scalar(0.0).n_cells(), 0);
    }
}
