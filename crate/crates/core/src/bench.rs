//! Sparse-versus-dense measurement harness.
//!
//! Generates random table pairs under a product-size cap and target sparsity
//! bands, times multiplication and marginalization in both implementations
//! on identical inputs, cross-validates every sparse result against the
//! dense one before recording it, and emits CSV rows. A separate CSV traces
//! the analytic byte-cost curves of the memory model.

use std::io::Write;
use std::time::Instant;

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dense::DenseTable;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::index::SeparatorIndex;
use crate::mem::{dense_bytes, sparse_bytes};
use crate::sparse::SparseTable;

/// A target interval for the sparsity of the generated product.
///
/// `0:0` demands fully dense products; any other `lo:hi` accepts sparsity
/// `s` with `lo < s <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Band> {
        if !(0.0..1.0).contains(&lo) || !(0.0..1.0).contains(&hi) || hi < lo {
            return Err(Error::InvalidDomain(format!("invalid sparsity band {lo}:{hi}")));
        }
        Ok(Band { lo, hi })
    }

    pub fn contains(&self, sparsity: f64) -> bool {
        if self.lo == self.hi {
            sparsity == self.lo
        } else {
            sparsity > self.lo && sparsity <= self.hi
        }
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Band> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidDomain(format!("band '{s}' is not lo:hi")))?;
        let parse = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::InvalidDomain(format!("band bound '{x}' is not a number")))
        };
        Band::new(parse(lo)?, parse(hi)?)
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Cap on the dense cell count of the generated product.
    pub max_product_cells: u64,
    pub sparsity_bands: Vec<Band>,
    /// Table pairs generated per band.
    pub reps: u32,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            max_product_cells: 1_000_000,
            sparsity_bands: vec![
                Band { lo: 0.0, hi: 0.0 },
                Band { lo: 0.0, hi: 0.75 },
                Band { lo: 0.75, hi: 0.99 },
            ],
            reps: 3,
            seed: 42,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_product_cells == 0 || self.reps == 0 || self.sparsity_bands.is_empty() {
            return Err(Error::InvalidDomain(
                "benchmark needs a positive cell cap, at least one band and reps >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchOp {
    Mult,
    Marg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchImpl {
    Sparse,
    Dense,
}

/// One timed measurement. `dense_product_cells` and `achieved_sparsity`
/// describe the multiplication product of the pair the row belongs to, for
/// both operations, so rows group naturally by pair.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub op: BenchOp,
    #[serde(rename = "impl")]
    pub implementation: BenchImpl,
    pub dense_product_cells: u64,
    pub achieved_sparsity: f64,
    pub elapsed_seconds: f64,
    pub result_bytes: u64,
}

/// Table shapes: 1-2 shared variables, 1-3 extra on the left operand,
/// 0-3 on the right, 2-5 states each, resampled until the product fits the
/// cap.
fn sample_shapes(
    rng: &mut ChaCha8Rng,
    max_product_cells: u64,
) -> Option<(Domain, Domain, Vec<String>)> {
    for _ in 0..200 {
        let n_shared = rng.random_range(1..=2usize);
        let n_a_extra = rng.random_range(1..=3usize);
        let n_b_extra = rng.random_range(0..=3usize);
        let card = |rng: &mut ChaCha8Rng| *[2usize, 3, 4, 5].choose(rng).unwrap();
        let var = |name: String, k: usize| (name, (1..=k).map(|i| format!("s{i}")).collect());

        let mut a_pairs: Vec<(String, Vec<String>)> = Vec::new();
        let mut b_pairs: Vec<(String, Vec<String>)> = Vec::new();
        let mut shared = Vec::new();
        for i in 0..n_shared {
            let k = card(rng);
            let name = format!("s{i}");
            shared.push(name.clone());
            a_pairs.push(var(name.clone(), k));
            b_pairs.push(var(name, k));
        }
        for i in 0..n_a_extra {
            a_pairs.push(var(format!("a{i}"), card(rng)));
        }
        for i in 0..n_b_extra {
            b_pairs.push(var(format!("b{i}"), card(rng)));
        }
        let a = Domain::new(a_pairs).expect("generated names are unique");
        let b = Domain::new(b_pairs).expect("generated names are unique");
        let product_cells = a.union(&b).expect("shared states match").statespace_size().ok()?;
        if product_cells <= max_product_cells {
            return Some((a, b, shared));
        }
    }
    None
}

/// Random table over `domain` with `support` stored cells and values
/// uniform in (0, 1].
fn random_table(rng: &mut ChaCha8Rng, domain: &Domain, support: usize) -> SparseTable {
    let dense_size = domain.statespace_size().expect("generator domains are small") as usize;
    let mut picked = rand::seq::index::sample(rng, dense_size, support).into_vec();
    picked.sort_unstable();
    let strides = domain.strides();
    let columns: Vec<Vec<u32>> = picked
        .iter()
        .map(|&linear| {
            (0..domain.len())
                .map(|i| ((linear as u64 / strides[i]) % domain.cardinality(i) as u64) as u32 + 1)
                .collect()
        })
        .collect();
    let vals: Vec<f64> = (0..support).map(|_| 1.0 - rng.random::<f64>()).collect();
    SparseTable::new(domain.clone(), &columns, &vals).expect("sampled cells are unique")
}

/// Stored-cell count of the product, from the two separator indexes alone.
fn product_support(a: &SparseTable, b: &SparseTable, shared: &[String]) -> Result<u64> {
    let sep: Vec<&str> = shared.iter().map(String::as_str).collect();
    let ia = SeparatorIndex::build(a, &sep)?;
    let ib = SeparatorIndex::build(b, &sep)?;
    Ok(ia
        .iter()
        .filter_map(|(k, cols)| ib.lookup(k).map(|o| cols.len() as u64 * o.len() as u64))
        .sum())
}

/// Deterministically generate a table pair whose product meets the size cap
/// and lands in the sparsity band. The pair shares at least one variable and
/// the left operand keeps at least one private variable.
pub fn gen_table_pair(
    seed: u64,
    band: &Band,
    max_product_cells: u64,
) -> Result<(SparseTable, SparseTable)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..60 {
        let Some((da, db, shared)) = sample_shapes(&mut rng, max_product_cells) else {
            break;
        };
        let a_size = da.statespace_size()? as usize;
        let b_size = db.statespace_size()? as usize;
        let product_cells = da.union(&db)?.statespace_size()?;

        if band.lo == band.hi && band.lo == 0.0 {
            let a = random_table(&mut rng, &da, a_size);
            let b = random_table(&mut rng, &db, b_size);
            return Ok((a, b));
        }

        let target = (band.lo + band.hi) / 2.0;
        let base_density = (1.0 - target).sqrt();
        for _ in 0..80 {
            let jitter = 0.7 + 0.6 * rng.random::<f64>();
            let density = (base_density * jitter).clamp(0.02, 1.0);
            let ma = ((a_size as f64 * density).round() as usize).clamp(1, a_size);
            let mb = ((b_size as f64 * density).round() as usize).clamp(1, b_size);
            let a = random_table(&mut rng, &da, ma);
            let b = random_table(&mut rng, &db, mb);
            let support = product_support(&a, &b, &shared)?;
            let sparsity = 1.0 - support as f64 / product_cells as f64;
            if support > 0 && band.contains(sparsity) {
                return Ok((a, b));
            }
        }
    }
    Err(Error::BandUnsatisfiable { lo: band.lo, hi: band.hi, max_cells: max_product_cells })
}

/// Run the harness: per band and repetition, generate a pair, time sparse
/// and dense multiplication and marginalization on identical inputs, verify
/// the results against each other and record one row per (op, impl).
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let mut records = Vec::new();
    for (band_idx, band) in config.sparsity_bands.iter().enumerate() {
        for rep in 0..config.reps {
            let pair_seed = config
                .seed
                .wrapping_add(band_idx as u64 * 1_000_003)
                .wrapping_add(rep as u64 * 7_919);
            let (a, b) = gen_table_pair(pair_seed, band, config.max_product_cells)?;
            let da = a.to_dense()?;
            let db = b.to_dense()?;

            // multiplication
            let t0 = Instant::now();
            let sparse_prod = a.mult(&b)?;
            let sparse_mult_s = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let dense_prod = da.mult(&db)?;
            let dense_mult_s = t1.elapsed().as_secs_f64();
            cross_validate("mult", &sparse_prod, &dense_prod)?;

            let product_cells = dense_prod.domain().statespace_size()?;
            let sparsity = sparse_prod.sparsity();
            records.push(BenchRecord {
                op: BenchOp::Mult,
                implementation: BenchImpl::Sparse,
                dense_product_cells: product_cells,
                achieved_sparsity: sparsity,
                elapsed_seconds: sparse_mult_s,
                result_bytes: sparse_bytes(
                    sparse_prod.domain().len() as u64,
                    sparse_prod.n_cells() as u64,
                )?,
            });
            records.push(BenchRecord {
                op: BenchOp::Mult,
                implementation: BenchImpl::Dense,
                dense_product_cells: product_cells,
                achieved_sparsity: sparsity,
                elapsed_seconds: dense_mult_s,
                result_bytes: dense_bytes(product_cells)?,
            });

            // marginalization of the left operand over the shared variables
            let shared: Vec<&str> = a
                .domain()
                .labels()
                .iter()
                .filter(|l| b.domain().contains(l))
                .map(String::as_str)
                .collect();
            let t2 = Instant::now();
            let sparse_marg = a.marg(&shared)?;
            let sparse_marg_s = t2.elapsed().as_secs_f64();
            let t3 = Instant::now();
            let dense_marg = da.marg(&shared)?;
            let dense_marg_s = t3.elapsed().as_secs_f64();
            cross_validate("marg", &sparse_marg, &dense_marg)?;

            records.push(BenchRecord {
                op: BenchOp::Marg,
                implementation: BenchImpl::Sparse,
                dense_product_cells: product_cells,
                achieved_sparsity: sparsity,
                elapsed_seconds: sparse_marg_s,
                result_bytes: sparse_bytes(
                    sparse_marg.domain().len() as u64,
                    sparse_marg.n_cells() as u64,
                )?,
            });
            records.push(BenchRecord {
                op: BenchOp::Marg,
                implementation: BenchImpl::Dense,
                dense_product_cells: product_cells,
                achieved_sparsity: sparsity,
                elapsed_seconds: dense_marg_s,
                result_bytes: dense_bytes(dense_marg.domain().statespace_size()?)?,
            });
        }
    }
    Ok(records)
}

fn cross_validate(op: &str, sparse: &SparseTable, dense: &DenseTable) -> Result<()> {
    let densified = SparseTable::from_dense(dense);
    if sparse.equiv(&densified, 1e-12) {
        return Ok(());
    }
    Err(Error::CrossValidation {
        op: op.to_string(),
        detail: format!(
            "sparse result has {} cells and sum {}, dense has {} cells and sum {}",
            sparse.n_cells(),
            sparse.sum(),
            densified.n_cells(),
            densified.sum()
        ),
    })
}

pub fn write_records_csv<W: Write>(records: &[BenchRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Grid parameters of the memory-model CSV.
pub const MODEL_VARIABLE_COUNTS: [u64; 3] = [4, 6, 8];
pub const MODEL_SPARSITIES: [f64; 4] = [0.5, 0.75, 0.9, 0.99];
pub const MODEL_DENSE_CELLS: [u64; 7] =
    [100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000];

/// Analytic storage-cost curves: for each variable count, sparsity level and
/// dense size `x`, the bytes of the dense table (`8x`) and of the sparse
/// table holding the `(1 - sparsity) * x` surviving cells.
pub fn write_memory_model_csv<W: Write>(writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "sparsity", "dense_cells", "sparse_bytes", "dense_bytes"])?;
    for &k in &MODEL_VARIABLE_COUNTS {
        for &s in &MODEL_SPARSITIES {
            for &x in &MODEL_DENSE_CELLS {
                let y = ((1.0 - s) * x as f64).round() as u64;
                let row = [
                    k.to_string(),
                    s.to_string(),
                    x.to_string(),
                    sparse_bytes(k, y)?.to_string(),
                    dense_bytes(x)?.to_string(),
                ];
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_band_yields_fully_dense_product() {
        let band = Band { lo: 0.0, hi: 0.0 };
        let (a, b) = gen_table_pair(7, &band, 10_000).unwrap();
        let p = a.mult(&b).unwrap();
        assert_eq!(p.sparsity(), 0.0);
    }

    #[test]
    fn high_band_lands_in_interval() {
        let band = Band { lo: 0.75, hi: 0.99 };
        let (a, b) = gen_table_pair(11, &band, 10_000).unwrap();
        let p = a.mult(&b).unwrap();
        let d = a.to_dense().unwrap().mult(&b.to_dense().unwrap()).unwrap();
        let dense_sparsity = 1.0
            - SparseTable::from_dense(&d).n_cells() as f64
                / d.domain().statespace_size().unwrap() as f64;
        assert!(band.contains(p.sparsity()));
        assert!((p.sparsity() - dense_sparsity).abs() < 1e-12);
    }

    #[test]
    fn same_seed_reproduces_pair() {
        let band = Band { lo: 0.0, hi: 0.75 };
        let (a1, b1) = gen_table_pair(99, &band, 5_000).unwrap();
        let (a2, b2) = gen_table_pair(99, &band, 5_000).unwrap();
        assert!(a1.equiv(&a2, 0.0));
        assert!(b1.equiv(&b2, 0.0));
    }

    #[test]
    fn run_bench_emits_schema_and_model_bytes() {
        let config = BenchConfig {
            max_product_cells: 1_000,
            sparsity_bands: vec![Band { lo: 0.0, hi: 0.75 }],
            reps: 1,
            seed: 3,
        };
        let records = run_bench(&config).unwrap();
        assert_eq!(records.len(), 4);
        let mut out = Vec::new();
        write_records_csv(&records, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "op,impl,dense_product_cells,achieved_sparsity,elapsed_seconds,result_bytes"
        );
        for r in &records {
            match r.implementation {
                BenchImpl::Dense => {
                    if r.op == BenchOp::Mult {
                        assert_eq!(r.result_bytes, 8 * r.dense_product_cells);
                    }
                }
                BenchImpl::Sparse => assert!(r.result_bytes % 4 == 0),
            }
        }
    }

    #[test]
    fn memory_model_rows_follow_the_formula() {
        let mut out = Vec::new();
        write_memory_model_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let k: u64 = fields[0].parse().unwrap();
            let s: f64 = fields[1].parse().unwrap();
            let x: u64 = fields[2].parse().unwrap();
            let sparse: u64 = fields[3].parse().unwrap();
            let dense: u64 = fields[4].parse().unwrap();
            // the grid keeps (1 - s) * x integral, so the curve is exact
            let y = (1.0 - s) * x as f64;
            assert!((y - y.round()).abs() < 1e-6);
            assert_eq!(sparse, y.round() as u64 * (4 * k + 8));
            assert_eq!(dense, 8 * x);
        }
    }

    #[test]
    fn band_parsing() {
        let b: Band = "0.75:0.99".parse().unwrap();
        assert_eq!(b, Band { lo: 0.75, hi: 0.99 });
        assert!(b.contains(0.8));
        assert!(!b.contains(0.75));
        assert!(b.contains(0.99));
        assert!("1.2:0.5".parse::<Band>().is_err());
        assert!("nope".parse::<Band>().is_err());
        let zero: Band = "0:0".parse().unwrap();
        assert!(zero.contains(0.0));
        assert!(!zero.contains(0.1));
    }
}
