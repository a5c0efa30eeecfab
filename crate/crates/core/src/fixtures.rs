//! Small bundled tables and networks used in documentation and tests.

use crate::dense::DenseTable;
use crate::domain::Domain;
use crate::sparse::SparseTable;

/// The worked 2x2x2 example table `f` over X, Y, Z.
///
/// Flat layout (X fastest): 5, 4, 0, 7, 0, 9, 0, 0.
pub fn dense_f() -> DenseTable {
    let d = Domain::new(vec![
        ("X", vec!["x1", "x2"]),
        ("Y", vec!["y1", "y2"]),
        ("Z", vec!["z1", "z2"]),
    ])
    .unwrap();
    DenseTable::new(d, vec![5.0, 4.0, 0.0, 7.0, 0.0, 9.0, 0.0, 0.0]).unwrap()
}

/// The worked 2x2x2 example table `g` over Y, Z, W.
///
/// Flat layout (Y fastest): 7, 6, 0, 6, 0, 0, 9, 0.
pub fn dense_g() -> DenseTable {
    let d = Domain::new(vec![
        ("Y", vec!["y1", "y2"]),
        ("Z", vec!["z1", "z2"]),
        ("W", vec!["w1", "w2"]),
    ])
    .unwrap();
    DenseTable::new(d, vec![7.0, 6.0, 0.0, 6.0, 0.0, 0.0, 9.0, 0.0]).unwrap()
}

/// Sparse form of [`dense_f`]: four cells with values 5, 4, 7, 9.
pub fn sparse_f() -> SparseTable {
    SparseTable::from_dense(&dense_f())
}

/// Sparse form of [`dense_g`]: four cells with values 7, 6, 6, 9.
pub fn sparse_g() -> SparseTable {
    SparseTable::from_dense(&dense_g())
}

/// The eight-variable chest-clinic network with its standard parameters,
/// in the crate's JSON network format.
pub const ASIA_JSON: &str = include_str!("../fixtures/asia.json");
