//! p-stable locality-sensitive hashing for Euclidean space.
//!
//! Each of the `L` tables hashes a point with `k` functions
//! `h(v) = floor((a·v + b) / w)`, where `a` has i.i.d. standard normal
//! coordinates and `b` is uniform in `[0, w)`. The `k` values form the
//! bucket key verbatim, so two points share a bucket only if all `k` hashes
//! agree. Queries re-rank the colliding points by true L2 distance.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::neighbors::{exact_nn_set, FLOAT_TIE_TOL};
use crate::rng::RngStream;
use crate::space::{l2_unchecked, Dataset, DistanceRecord};
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshParams {
    /// Hash functions concatenated per table (`k`).
    pub hashes_per_table: usize,
    /// Number of tables (`L`).
    pub num_tables: usize,
    /// Quantization width `w`.
    pub bucket_width: f64,
    pub seed: u64,
}

impl LshParams {
    pub fn validate(&self) -> Result<()> {
        if self.hashes_per_table == 0 {
            return Err(invalid("hashes_per_table", "must be at least 1"));
        }
        if self.num_tables == 0 {
            return Err(invalid("num_tables", "must be at least 1"));
        }
        if !(self.bucket_width.is_finite() && self.bucket_width > 0.0) {
            return Err(invalid("bucket_width", format!("must be finite and > 0, got {}", self.bucket_width)));
        }
        Ok(())
    }

    /// Candidate cap used when none is given: `4·L`.
    pub fn default_max_candidates(&self) -> usize {
        4 * self.num_tables
    }
}

/// `floor((direction·v + offset) / w)`.
pub fn hash_point(v: &[f64], direction: &[f64], offset: f64, w: f64) -> Result<i64> {
    if v.len() != direction.len() {
        return Err(Error::DimensionMismatch {
            expected: direction.len(),
            found: v.len(),
        });
    }
    Ok(hash_unchecked(v, direction, offset, w))
}

#[inline]
fn hash_unchecked(v: &[f64], direction: &[f64], offset: f64, w: f64) -> i64 {
    let dot: f64 = v.iter().zip(direction).map(|(x, a)| x * a).sum();
    ((dot + offset) / w).floor() as i64
}

type BucketKey = Box<[i64]>;

/// Immutable multi-table LSH index over a borrowed dataset.
#[derive(Debug)]
pub struct LshIndex<'a> {
    params: LshParams,
    data: &'a Dataset,
    /// `L·k` directions, table-major.
    directions: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    tables: Vec<HashMap<BucketKey, Vec<usize>>>,
}

/// Result of one query plus the work it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshAnswer {
    pub best: Option<DistanceRecord>,
    pub candidates: usize,
}

impl<'a> LshIndex<'a> {
    /// Draws the hash functions from `params.seed` and inserts every point
    /// into every table.
    pub fn build(data: &'a Dataset, params: LshParams) -> Result<Self> {
        params.validate()?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = data.dim();
        let total = params.num_tables * params.hashes_per_table;
        let mut rng = RngStream::new(params.seed, 0).derive("lsh-projections", &[]).rng();
        let mut directions = Vec::with_capacity(total);
        let mut offsets = Vec::with_capacity(total);
        for _ in 0..total {
            directions.push((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
            offsets.push(rng.random::<f64>() * params.bucket_width);
        }
        let mut index = Self {
            params,
            data,
            directions,
            offsets,
            tables: vec![HashMap::new(); params.num_tables],
        };
        for t in 0..params.num_tables {
            let mut table = HashMap::new();
            for (i, p) in data.points().enumerate() {
                table.entry(index.key(t, p)).or_insert_with(Vec::new).push(i);
            }
            index.tables[t] = table;
        }
        Ok(index)
    }

    fn key(&self, table: usize, v: &[f64]) -> BucketKey {
        let k = self.params.hashes_per_table;
        (table * k..(table + 1) * k)
            .map(|j| hash_unchecked(v, &self.directions[j], self.offsets[j], self.params.bucket_width))
            .collect()
    }

    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn dataset(&self) -> &Dataset {
        self.data
    }

    /// Bucket contents of one table, sorted by key.
    pub fn buckets(&self, table: usize) -> Vec<(Vec<i64>, Vec<usize>)> {
        let mut out: Vec<_> = self.tables[table]
            .iter()
            .map(|(k, v)| (k.to_vec(), v.clone()))
            .collect();
        out.sort();
        out
    }

    /// Unions `q`'s bucket across all tables in table order, stops after
    /// `max_candidates` distinct points and returns the closest by true
    /// distance (lowest index on ties).
    pub fn query_with_stats(&self, q: &[f64], max_candidates: usize) -> Result<LshAnswer> {
        self.data.check_query(q)?;
        let mut seen = HashSet::new();
        let mut best: Option<DistanceRecord> = None;
        'tables: for t in 0..self.params.num_tables {
            let Some(bucket) = self.tables[t].get(&self.key(t, q)) else {
                continue;
            };
            for &i in bucket {
                if seen.len() >= max_candidates {
                    break 'tables;
                }
                if !seen.insert(i) {
                    continue;
                }
                let distance = l2_unchecked(self.data.point(i), q);
                let better = match best {
                    None => true,
                    Some(b) => distance < b.distance || (distance == b.distance && i < b.index),
                };
                if better {
                    best = Some(DistanceRecord { index: i, distance });
                }
            }
        }
        Ok(LshAnswer {
            best,
            candidates: seen.len(),
        })
    }
}

/// Closest colliding point to `q`, or `None` when no bucket holds anything.
pub fn lsh_query(index: &LshIndex<'_>, q: &[f64], max_candidates: usize) -> Result<Option<DistanceRecord>> {
    Ok(index.query_with_stats(q, max_candidates)?.best)
}

/// Points sampled by [`default_bucket_width`].
pub const DEFAULT_WIDTH_SAMPLE: usize = 100;

/// Default `w`: the median nearest-neighbor distance of the first
/// [`DEFAULT_WIDTH_SAMPLE`] points.
pub fn default_bucket_width(ds: &Dataset) -> Result<f64> {
    median_nn_distance(ds, DEFAULT_WIDTH_SAMPLE)
}

/// Median exact nearest-neighbor distance from the first `sample` points
/// to the rest of the dataset (each point excluded from its own query).
pub fn median_nn_distance(ds: &Dataset, sample: usize) -> Result<f64> {
    if ds.len() < 2 {
        return Err(invalid("dataset", "need at least two points to estimate a NN distance"));
    }
    let m = sample.min(ds.len()).max(1);
    let mut nn: Vec<f64> = (0..m)
        .map(|i| {
            let q = ds.point(i);
            ds.points()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| l2_unchecked(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&nn, 0.5))
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: LshParams,
    pub max_candidates: usize,
    /// Fraction of queries whose answer is an exact nearest neighbor.
    pub recall_at_1: f64,
    pub mean_candidates: f64,
    /// Mean of answer distance over exact nearest distance, over answered
    /// queries; NaN when no query was answered.
    pub mean_distance_ratio: f64,
    /// Per answered query, `distance/rho - 1`.
    pub empirical_epsilons: Vec<f64>,
}

/// Builds one index per parameter setting and measures it against the
/// brute-force answer for every query. `max_candidates = None` uses each
/// setting's default.
pub fn lsh_recall_sweep(
    ds: &Dataset,
    queries: &[Vec<f64>],
    grid: &[LshParams],
    max_candidates: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if queries.is_empty() {
        return Err(invalid("queries", "need at least one query"));
    }
    let exact = queries
        .iter()
        .map(|q| exact_nn_set(ds, q, FLOAT_TIE_TOL))
        .collect::<Result<Vec<_>>>()?;
    grid.iter()
        .map(|&params| {
            let index = LshIndex::build(ds, params)?;
            let cap = max_candidates.unwrap_or_else(|| params.default_max_candidates());
            let (mut hits, mut cand_total) = (0usize, 0usize);
            let mut eps = Vec::new();
            for (q, truth) in queries.iter().zip(&exact) {
                let ans = index.query_with_stats(q, cap)?;
                cand_total += ans.candidates;
                if let Some(b) = ans.best {
                    if truth.contains(b.index) {
                        hits += 1;
                    }
                    let ratio = if truth.rho == 0.0 {
                        if b.distance == 0.0 { 1.0 } else { f64::INFINITY }
                    } else {
                        b.distance / truth.rho
                    };
                    eps.push(ratio - 1.0);
                }
            }
            let nq = queries.len() as f64;
            let mean_distance_ratio = if eps.is_empty() {
                f64::NAN
            } else {
                1.0 + eps.iter().sum::<f64>() / eps.len() as f64
            };
            Ok(SweepRow {
                params,
                max_candidates: cap,
                recall_at_1: hits as f64 / nq,
                mean_candidates: cand_total as f64 / nq,
                mean_distance_ratio,
                empirical_epsilons: eps,
            })
        })
        .collect()
}
