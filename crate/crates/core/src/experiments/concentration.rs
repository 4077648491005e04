//! Distance concentration: how the farthest/nearest distance ratio from a
//! Gaussian query to a Gaussian database shrinks toward 1 with dimension.
//!
//! Databases are generated point by point and only their distances to the
//! query are kept, so memory is `O(n + d)` for every cell. Each run draws
//! the query first and then the `n` points, the same order
//! [`gaussian_point`](crate::generate::gaussian_point) followed by
//! [`gaussian_dataset`](crate::generate::gaussian_dataset) would use.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::space::Precision;
use crate::stats::summarize;

/// Distances from a fresh Gaussian query to `n` fresh Gaussian points.
///
/// In 32-bit mode coordinates are rounded to `f32` and the distance is
/// accumulated in `f32`.
pub fn query_distances<R: Rng + ?Sized>(n: usize, d: usize, precision: Precision, rng: &mut R) -> Vec<f64> {
    let mut draw = || rng.sample::<f64, _>(StandardNormal);
    match precision {
        Precision::F64 => {
            let q: Vec<f64> = (0..d).map(|_| draw()).collect();
            (0..n)
                .map(|_| {
                    q.iter()
                        .map(|&qi| {
                            let t = draw() - qi;
                            t * t
                        })
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        }
        Precision::F32 => {
            let q: Vec<f32> = (0..d).map(|_| draw() as f32).collect();
            (0..n)
                .map(|_| {
                    let s: f32 = q
                        .iter()
                        .map(|&qi| {
                            let t = draw() as f32 - qi;
                            t * t
                        })
                        .sum();
                    f64::from(s.sqrt())
                })
                .collect()
        }
    }
}

/// `max/min` of a set of distances.
pub fn extreme_ratio(distances: &[f64]) -> Result<f64> {
    let (min, max) = distances
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if distances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if min == 0.0 {
        return Err(Error::DegenerateDistance);
    }
    Ok(max / min)
}

/// Fraction of distances within `(1+epsilon)` of the smallest.
pub fn coverage_fraction(distances: &[f64], epsilon: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let limit = (1.0 + epsilon) * min;
    let inside = distances.iter().filter(|&&d| d <= limit).count();
    Ok(inside as f64 / distances.len() as f64)
}

/// Farthest-to-nearest distance ratio for one fresh database and query.
pub fn distance_ratio_run<R: Rng + ?Sized>(n: usize, d: usize, precision: Precision, rng: &mut R) -> Result<f64> {
    check_cell(n, d)?;
    extreme_ratio(&query_distances(n, d, precision, rng))
}

fn check_cell(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "database size must be at least 1"));
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationConfig {
    pub dims: Vec<usize>,
    pub sizes: Vec<usize>,
    pub runs: usize,
    /// Run count for cells with `n·d >= large_cell_elements`.
    pub large_cell_runs: usize,
    pub large_cell_elements: u64,
    /// Cells with `n·d` above this are not run.
    pub max_cell_elements: u64,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            dims: vec![100, 1000, 10_000],
            sizes: vec![100, 1000, 10_000],
            runs: 100,
            large_cell_runs: 20,
            large_cell_elements: 100_000_000,
            max_cell_elements: 100_000_000,
            seed: 0,
            precision: Precision::F64,
        }
    }
}

impl ConcentrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.sizes.is_empty() {
            return Err(invalid("dims/sizes", "must be non-empty"));
        }
        if self.dims.contains(&0) {
            return Err(invalid("dims", "every dimension must be at least 1"));
        }
        if self.sizes.contains(&0) {
            return Err(invalid("sizes", "every size must be at least 1"));
        }
        if self.runs == 0 || self.large_cell_runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        Ok(())
    }

    pub fn runs_for(&self, n: usize, d: usize) -> usize {
        if cell_elements(n, d) >= self.large_cell_elements {
            self.runs.min(self.large_cell_runs)
        } else {
            self.runs
        }
    }
}

fn cell_elements(n: usize, d: usize) -> u64 {
    (n as u64).saturating_mul(d as u64)
}

/// Summary of the ratio over the runs of one `(n, d)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub n: usize,
    pub d: usize,
    pub runs: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Stats(RatioStats),
    Skipped { n: usize, d: usize, reason: String },
}

/// Runs every `(n, d)` cell, sizes outermost. Each run has its own stream
/// keyed by `(n, d, run)`.
pub fn concentration_experiment(config: &ConcentrationConfig) -> Result<Vec<CellOutcome>> {
    config.validate()?;
    let root = RngStream::new(config.seed, 0);
    let mut jobs = Vec::new();
    let mut plan = Vec::new();
    for &n in &config.sizes {
        for &d in &config.dims {
            let elements = cell_elements(n, d);
            if elements > config.max_cell_elements {
                plan.push((n, d, None));
                continue;
            }
            let runs = config.runs_for(n, d);
            plan.push((n, d, Some(runs)));
            jobs.extend((0..runs).map(|run| (n, d, run)));
        }
    }
    let ratios: Vec<f64> = jobs
        .par_iter()
        .map(|&(n, d, run)| {
            let mut rng = root.derive("concentration", &[n as u64, d as u64, run as u64]).rng();
            distance_ratio_run(n, d, config.precision, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut offset = 0;
    Ok(plan
        .into_iter()
        .map(|(n, d, runs)| match runs {
            None => CellOutcome::Skipped {
                n,
                d,
                reason: format!(
                    "n*d={} exceeds max_cell_elements={}",
                    cell_elements(n, d),
                    config.max_cell_elements
                ),
            },
            Some(runs) => {
                let s = summarize(&ratios[offset..offset + runs]);
                offset += runs;
                CellOutcome::Stats(RatioStats {
                    n,
                    d,
                    runs,
                    min: s.min,
                    q1: s.q1,
                    median: s.median,
                    q3: s.q3,
                    max: s.max,
                    mean: s.mean,
                })
            }
        })
        .collect())
}

/// Stream used by run `run` of the coverage measurement for `(n, d)`.
pub fn coverage_stream(seed: u64, n: usize, d: usize, run: usize) -> RngStream {
    RngStream::new(seed, 0).derive("coverage", &[n as u64, d as u64, run as u64])
}

/// Mean over runs of the fraction of the database that is an
/// epsilon-approximate nearest neighbor of the query.
pub fn epsilon_coverage(
    n: usize,
    d: usize,
    epsilon: f64,
    runs: usize,
    precision: Precision,
    seed: u64,
) -> Result<f64> {
    check_cell(n, d)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if runs == 0 {
        return Err(invalid("runs", "must be at least 1"));
    }
    let fractions: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = coverage_stream(seed, n, d, run).rng();
            coverage_fraction(&query_distances(n, d, precision, &mut rng), epsilon)
        })
        .collect::<Result<_>>()?;
    Ok(fractions.iter().sum::<f64>() / runs as f64)
}
