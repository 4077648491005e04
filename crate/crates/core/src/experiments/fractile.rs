//! Candidate-set sizes under the epsilon definition and under a rank
//! fractile, as the dimension grows.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::experiments::concentration::query_distances;
use crate::neighbors::NeighborQueryResult;
use crate::rng::RngStream;
use crate::space::Precision;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractileRow {
    pub d: usize,
    pub n: usize,
    pub epsilon: f64,
    pub fractile: f64,
    pub mean_eps_candidates: f64,
    pub fractile_candidates: f64,
}

pub fn fractile_vs_epsilon_comparison(
    dims: &[usize],
    n: usize,
    epsilon: f64,
    fractile: f64,
    runs: usize,
    precision: Precision,
    seed: u64,
) -> Result<Vec<FractileRow>> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if runs == 0 {
        return Err(invalid("runs", "must be at least 1"));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(invalid("dims", "need at least one dimension, each >= 1"));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", "must be finite and >= 0"));
    }
    let root = RngStream::new(seed, 0);
    dims.iter()
        .map(|&d| {
            let sizes: Vec<(usize, usize)> = (0..runs)
                .into_par_iter()
                .map(|run| {
                    let mut rng = root.derive("fractile-compare", &[n as u64, d as u64, run as u64]).rng();
                    let dist = query_distances(n, d, precision, &mut rng);
                    let eps = NeighborQueryResult::within_factor(&dist, 1.0 + epsilon)?;
                    let frac = NeighborQueryResult::fractile(&dist, fractile)?;
                    Ok((eps.k_eps(), frac.k_eps()))
                })
                .collect::<Result<_>>()?;
            let mean = |f: fn(&(usize, usize)) -> usize| sizes.iter().map(|s| f(s) as f64).sum::<f64>() / runs as f64;
            Ok(FractileRow {
                d,
                n,
                epsilon,
                fractile,
                mean_eps_candidates: mean(|s| s.0),
                fractile_candidates: mean(|s| s.1),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbors::fractile_size;

    #[test]
    fn fractile_column_is_constant() {
        let rows = fractile_vs_epsilon_comparison(&[2, 20, 200], 300, 0.1, 0.05, 5, Precision::F64, 3).unwrap();
        for r in &rows {
            assert_eq!(r.fractile_candidates, fractile_size(300, 0.05) as f64);
            assert_eq!(r.fractile_candidates, 15.0);
        }
        assert!(rows[0].mean_eps_candidates < rows[2].mean_eps_candidates);
        assert!(fractile_vs_epsilon_comparison(&[2], 300, 0.1, 1.5, 5, Precision::F64, 3).is_err());
    }

    #[test]
    fn epsilon_column_grows_with_dimension() {
        let dims = [2, 8, 32, 128, 512, 2048];
        let rows = fractile_vs_epsilon_comparison(&dims, 1000, 0.1, 0.01, 20, Precision::F64, 0).unwrap();
        assert!(rows.windows(2).all(|w| w[0].mean_eps_candidates <= w[1].mean_eps_candidates), "{rows:?}");
        let top = fractile_vs_epsilon_comparison(&[10_000], 1000, 0.1, 0.01, 5, Precision::F64, 0).unwrap();
        assert!(top[0].mean_eps_candidates >= 990.0, "{top:?}");
        assert_eq!(top[0].fractile_candidates, 10.0);
    }
}
