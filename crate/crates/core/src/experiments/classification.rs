//! Nearest-neighbor classification on a two-class Gaussian mixture, with
//! the exact neighbor and with a representative chosen from the
//! epsilon-approximate candidate set by a selection policy.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::generate::{gaussian_mixture, mixture_point};
use crate::neighbors::{select_representative, NeighborQueryResult, PolicyKind, SelectionPolicy, FLOAT_TIE_TOL};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2eConfig {
    pub dim: usize,
    pub n_train: usize,
    /// Distance between the two class means.
    pub separation: f64,
    pub epsilon: f64,
    pub n_queries: usize,
}

impl Default for E2eConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            n_train: 2000,
            separation: 2.0,
            epsilon: 0.5,
            n_queries: 2000,
        }
    }
}

impl E2eConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if self.n_train < 2 {
            return Err(invalid("n_train", "need at least two training points"));
        }
        if self.n_queries == 0 {
            return Err(invalid("n_queries", "must be at least 1"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(invalid("epsilon", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2eResult {
    pub policy: PolicyKind,
    /// Error rate with the exact nearest neighbor, ties broken uniformly.
    pub exact_error: f64,
    /// Error rate with the policy's pick from the epsilon candidate set.
    pub approx_error: f64,
    pub exact_errors: u64,
    pub approx_errors: u64,
    pub n_queries: usize,
    /// Mean size of the epsilon candidate set.
    pub mean_k_eps: f64,
}

/// Runs several policies over one shared training set and query set, so
/// rows are paired: `exact_error` is the same for every policy.
pub fn e2e_classification_multi(
    config: &E2eConfig,
    policies: &[PolicyKind],
    stream: &RngStream,
) -> Result<Vec<E2eResult>> {
    config.validate()?;
    let train = gaussian_mixture(config.n_train, config.dim, config.separation, &mut stream.child("e2e-train").rng())?;
    let labels = train.labels().expect("mixture is labeled");
    let mut qrng = stream.child("e2e-queries").rng();
    let queries: Vec<_> = (0..config.n_queries)
        .map(|_| mixture_point(config.dim, config.separation, &mut qrng))
        .collect();

    // Per query: exact-pick error, then per policy: approx-pick error, k_eps.
    let per_query: Vec<(bool, Vec<bool>, usize)> = queries
        .par_iter()
        .enumerate()
        .map(|(qi, (q, truth))| {
            let dist = train.distances_to(q)?;
            let exact = NeighborQueryResult::within_factor(&dist, 1.0 + FLOAT_TIE_TOL)?;
            let approx = NeighborQueryResult::within_factor(&dist, 1.0 + config.epsilon)?;
            let mut erng = stream.child_at("e2e-exact-pick", qi as u64).rng();
            let e = select_representative(&exact, SelectionPolicy::RandomUniform, Some(labels), &mut erng)?;
            let approx_wrong = policies
                .iter()
                .map(|p| {
                    let pick = stream.child_at("e2e-approx-pick", qi as u64);
                    let mut arng = pick.child_at(p.name(), 0).rng();
                    let i = select_representative(&approx, p.bind(Some(*truth))?, Some(labels), &mut arng)?;
                    Ok(labels[i] != *truth)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((labels[e] != *truth, approx_wrong, approx.k_eps()))
        })
        .collect::<Result<_>>()?;

    let nq = config.n_queries as f64;
    let exact_errors = per_query.iter().filter(|r| r.0).count() as u64;
    let mean_k_eps = per_query.iter().map(|r| r.2 as f64).sum::<f64>() / nq;
    Ok(policies
        .iter()
        .enumerate()
        .map(|(pi, &policy)| {
            let approx_errors = per_query.iter().filter(|r| r.1[pi]).count() as u64;
            E2eResult {
                policy,
                exact_error: exact_errors as f64 / nq,
                approx_error: approx_errors as f64 / nq,
                exact_errors,
                approx_errors,
                n_queries: config.n_queries,
                mean_k_eps,
            }
        })
        .collect())
}

/// Exact and approximate error rates for a single policy.
pub fn e2e_classification(config: &E2eConfig, policy: PolicyKind, stream: &RngStream) -> Result<(f64, f64)> {
    let r = e2e_classification_multi(config, &[policy], stream)?;
    Ok((r[0].exact_error, r[0].approx_error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_zero_collapses_to_exact() {
        let cfg = E2eConfig {
            dim: 4,
            n_train: 300,
            epsilon: 0.0,
            n_queries: 300,
            ..Default::default()
        };
        let (exact, approx) = e2e_classification(&cfg, PolicyKind::RandomUniform, &RngStream::new(3, 0)).unwrap();
        assert_eq!(exact, approx);
        assert!(exact > 0.0 && exact < 0.5);
    }

    #[test]
    fn rejects_bad_config() {
        let s = RngStream::new(0, 0);
        let bad = E2eConfig { n_train: 1, ..Default::default() };
        assert!(e2e_classification(&bad, PolicyKind::RandomUniform, &s).is_err());
        let bad = E2eConfig { n_queries: 0, ..Default::default() };
        assert!(e2e_classification(&bad, PolicyKind::RandomUniform, &s).is_err());
    }

    #[test]
    fn rows_are_paired_and_farthest_is_supported() {
        let cfg = E2eConfig {
            dim: 3,
            n_train: 200,
            epsilon: 0.3,
            n_queries: 100,
            ..Default::default()
        };
        let rows = e2e_classification_multi(&cfg, &PolicyKind::ALL, &RngStream::new(1, 1)).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.exact_error == rows[0].exact_error));
        assert!(rows[0].mean_k_eps >= 1.0);
        // A row does not depend on which other policies ran alongside it.
        let alone = e2e_classification_multi(&cfg, &[PolicyKind::WrongClass], &RngStream::new(1, 1)).unwrap();
        assert_eq!(alone[0], rows[3]);
    }

    #[test]
    fn default_config_policy_ordering() {
        let cfg = E2eConfig::default();
        let policies = [PolicyKind::RandomUniform, PolicyKind::MinorityClass, PolicyKind::WrongClass];
        let rows = e2e_classification_multi(&cfg, &policies, &RngStream::new(0, 0)).unwrap();
        let (r, m, w) = (rows[0].approx_error, rows[1].approx_error, rows[2].approx_error);
        assert!(r <= m && m <= w, "{r} {m} {w}");
        let n = cfg.n_queries as f64;
        let sigma = ((w * (1.0 - w) + r * (1.0 - r)) / n).sqrt();
        assert!(w - r > 4.0 * sigma, "wrong-class {w} vs random {r}");
    }
}
