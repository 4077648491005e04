//! Error rates of a nearest-neighbor classifier in the large-sample limit,
//! where the labels of the query and of its `k` admissible neighbors are
//! i.i.d. draws from the local two-class posterior.
//!
//! `e` is the minority posterior at the query (the Bayes error) and `k` the
//! number of admissible neighbors. The closed forms here are derived from
//! that model directly. The `printed_*` functions carry the expressions as
//! they appear in the original note, which disagree with the model in three
//! places; [`simulate_local`] decides between them.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::neighbors::PolicyKind;
use crate::rng::RngStream;
use crate::stats::binomial_half_width;

/// Local posterior and neighborhood size at one query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalModel {
    e: f64,
    k: usize,
}

impl LocalModel {
    pub fn new(e: f64, k: usize) -> Result<Self> {
        check_e(e)?;
        if k == 0 {
            return Err(invalid("k", "neighborhood size must be at least 1"));
        }
        Ok(Self { e, k })
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

fn check_e(e: f64) -> Result<()> {
    if (0.0..=0.5).contains(&e) {
        Ok(())
    } else {
        Err(invalid("E", format!("must lie in [0, 0.5], got {e}")))
    }
}

fn check_model(e: f64, k: usize) -> Result<()> {
    LocalModel::new(e, k).map(|_| ())
}

/// Error with a randomly chosen neighbor: `(1-E)E + E(1-E)`.
pub fn closed_form_random(e: f64) -> Result<f64> {
    check_e(e)?;
    Ok((1.0 - e) * e + e * (1.0 - e))
}

/// Probability that at least one of `k` neighbors is from the minority
/// class: `1 - (1-E)^k`, evaluated as `E·Σ_{j<k} (1-E)^j` so that `k = 1`
/// gives `E` exactly.
pub fn neighborhood_hit_prob(e: f64, k: usize) -> Result<f64> {
    check_model(e, k)?;
    let q = 1.0 - e;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..k {
        sum += term;
        term *= q;
    }
    Ok(e * sum)
}

/// Error when the selector returns a minority-class neighbor whenever one
/// is admissible: `H(1-E) + (1-H)E`.
pub fn closed_form_minority(e: f64, k: usize) -> Result<f64> {
    let h = neighborhood_hit_prob(e, k)?;
    Ok(h * (1.0 - e) + (1.0 - h) * e)
}

/// Error when the selector returns a neighbor of the other class whenever
/// one is admissible: `E(1-E^k) + (1-E)(1-(1-E)^k)`.
pub fn closed_form_wrongclass(e: f64, k: usize) -> Result<f64> {
    check_model(e, k)?;
    let k = k as i32;
    Ok(e * (1.0 - e.powi(k)) + (1.0 - e) * (1.0 - (1.0 - e).powi(k)))
}

/// The printed simplification `2E - E²` of the random-selection rate.
pub fn printed_random(e: f64) -> Result<f64> {
    check_e(e)?;
    Ok(2.0 * e - e * e)
}

/// The printed large-`k` value `1 - E - 2E²` of the minority-picker rate.
pub fn printed_minority(e: f64) -> Result<f64> {
    check_e(e)?;
    Ok(1.0 - e - 2.0 * e * e)
}

/// The printed wrong-class rate `E(1-(1-E)^k) + (1-E)(1-E^k)`.
pub fn printed_wrongclass(e: f64, k: usize) -> Result<f64> {
    check_model(e, k)?;
    let k = k as i32;
    Ok(e * (1.0 - (1.0 - e).powi(k)) + (1.0 - e) * (1.0 - e.powi(k)))
}

/// Model-derived rate for a policy.
pub fn closed_form(policy: PolicyKind, model: LocalModel) -> Result<f64> {
    match policy {
        PolicyKind::RandomUniform | PolicyKind::FirstIndex => closed_form_random(model.e),
        PolicyKind::MinorityClass => closed_form_minority(model.e, model.k),
        PolicyKind::WrongClass => closed_form_wrongclass(model.e, model.k),
        PolicyKind::Farthest => Err(Error::UnsupportedPolicy("farthest")),
    }
}

/// The original note's printed expression for a policy.
pub fn printed_form(policy: PolicyKind, model: LocalModel) -> Result<f64> {
    match policy {
        PolicyKind::RandomUniform | PolicyKind::FirstIndex => printed_random(model.e),
        PolicyKind::MinorityClass => printed_minority(model.e),
        PolicyKind::WrongClass => printed_wrongclass(model.e, model.k),
        PolicyKind::Farthest => Err(Error::UnsupportedPolicy("farthest")),
    }
}

/// Monte Carlo error frequency with a 4-sigma binomial half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub rate: f64,
    pub errors: u64,
    pub trials: u64,
    pub half_width: f64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        let rate = errors as f64 / trials as f64;
        Self {
            rate,
            errors,
            trials,
            half_width: binomial_half_width(rate, trials),
        }
    }
}

const MAJORITY: bool = false;
const MINORITY: bool = true;

/// Simulates the local model: per trial the query and `k` neighbor labels
/// are drawn i.i.d. (minority with probability `E`), the policy picks one
/// neighbor, and an error is counted when its label differs from the
/// query's.
pub fn simulate_local<R: Rng + ?Sized>(
    model: LocalModel,
    policy: PolicyKind,
    trials: u64,
    rng: &mut R,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    if policy == PolicyKind::Farthest {
        return Err(Error::UnsupportedPolicy("farthest"));
    }
    let LocalModel { e, k } = model;
    let mut neighbors = vec![MAJORITY; k];
    let mut errors = 0u64;
    for _ in 0..trials {
        let query = rng.random_bool(e);
        for n in neighbors.iter_mut() {
            *n = rng.random_bool(e);
        }
        let chosen = match policy {
            PolicyKind::RandomUniform => neighbors[rng.random_range(0..k)],
            PolicyKind::FirstIndex => neighbors[0],
            PolicyKind::MinorityClass => {
                if neighbors.contains(&MINORITY) { MINORITY } else { MAJORITY }
            }
            // The other class if any neighbor has it, else the query's own.
            PolicyKind::WrongClass => {
                if neighbors.contains(&!query) { !query } else { query }
            }
            PolicyKind::Farthest => unreachable!(),
        };
        if chosen != query {
            errors += 1;
        }
    }
    Ok(ErrorEstimate::from_counts(errors, trials))
}

/// One `(E, k, policy)` cell of [`error_rate_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub e: f64,
    pub k: usize,
    pub policy: PolicyKind,
    pub closed_form: f64,
    pub printed_form: f64,
    pub estimate: ErrorEstimate,
    pub agree: bool,
}

impl ErrorRow {
    /// Whether the Monte Carlo estimate is within tolerance of `value`.
    pub fn matches(&self, value: f64) -> bool {
        within_tolerance(value, &self.estimate)
    }
}

/// `|value - estimate| <= max(h_obs, h_value)`, where `h_obs` is the
/// estimate's own 4-sigma half-width and `h_value` the 4-sigma half-width
/// under `value` as the true rate. The second term keeps the test
/// meaningful when the observed rate is exactly 0 or 1.
pub fn within_tolerance(value: f64, estimate: &ErrorEstimate) -> bool {
    let h_value = binomial_half_width(value.clamp(0.0, 1.0), estimate.trials);
    (value - estimate.rate).abs() <= estimate.half_width.max(h_value)
}

/// Evaluates every `(E, k, policy)` combination against its Monte Carlo
/// estimate. Each cell draws from its own stream keyed by the cell's values,
/// so a row does not depend on grid order or on parallel scheduling.
pub fn error_rate_table(
    e_grid: &[f64],
    k_grid: &[usize],
    policies: &[PolicyKind],
    trials: u64,
    rng: &RngStream,
) -> Result<Vec<ErrorRow>> {
    if e_grid.is_empty() || k_grid.is_empty() || policies.is_empty() {
        return Err(invalid("grid", "E, k and policy grids must be non-empty"));
    }
    let mut cells = Vec::new();
    for &e in e_grid {
        for &k in k_grid {
            let model = LocalModel::new(e, k)?;
            for &policy in policies {
                closed_form(policy, model)?;
                let pi = PolicyKind::ALL.iter().position(|&p| p == policy).expect("listed policy");
                cells.push((model, policy, [e.to_bits(), k as u64, pi as u64]));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(model, policy, idx)| {
            let mut r = rng.derive("local-sim", &idx).rng();
            let estimate = simulate_local(model, policy, trials, &mut r)?;
            let closed_form = closed_form(policy, model)?;
            Ok(ErrorRow {
                e: model.e,
                k: model.k,
                policy,
                closed_form,
                printed_form: printed_form(policy, model)?,
                agree: within_tolerance(closed_form, &estimate),
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_GRID: [f64; 4] = [0.05, 0.1, 0.3, 0.5];

    #[test]
    fn random_edges() {
        assert_eq!(closed_form_random(0.0).unwrap(), 0.0);
        assert_eq!(closed_form_random(0.5).unwrap(), 0.5);
        assert!((closed_form_random(0.1).unwrap() - 0.18).abs() < 1e-15);
        assert!(closed_form_random(0.6).is_err());
        assert!(closed_form_random(-0.01).is_err());
    }

    #[test]
    fn hit_probability() {
        assert_eq!(neighborhood_hit_prob(0.3, 1).unwrap(), 0.3);
        assert_eq!(neighborhood_hit_prob(0.0, 7).unwrap(), 0.0);
        assert!((neighborhood_hit_prob(0.1, 5).unwrap() - 0.40951).abs() < 1e-12);
        assert!(neighborhood_hit_prob(0.1, 0).is_err());
        for e in E_GRID {
            for k in [1, 2, 5, 10, 20, 200] {
                let direct = 1.0 - (1.0 - e).powi(k);
                assert!((neighborhood_hit_prob(e, k as usize).unwrap() - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn minority_values() {
        for e in E_GRID {
            assert_eq!(closed_form_minority(e, 1).unwrap(), closed_form_random(e).unwrap());
            assert!((closed_form_minority(e, 2000).unwrap() - (1.0 - e)).abs() < 1e-12 || e == 0.0);
        }
        assert!((closed_form_minority(0.1, 5).unwrap() - 0.427608).abs() < 1e-12);
    }

    #[test]
    fn wrongclass_values() {
        for e in E_GRID {
            assert!((closed_form_wrongclass(e, 1).unwrap() - closed_form_random(e).unwrap()).abs() < 1e-15);
        }
        // 0.3(1 - 0.3^10) + 0.7(1 - 0.7^10)
        assert!((closed_form_wrongclass(0.3, 10).unwrap() - 0.980_224_961_1).abs() < 1e-9);
        let v: Vec<f64> = [1, 5, 10, 20].iter().map(|&k| closed_form_wrongclass(0.3, k).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]) && v[3] < 1.0, "{v:?}");
    }

    #[test]
    fn printed_variants() {
        assert!((printed_random(0.1).unwrap() - 0.19).abs() < 1e-15);
        assert!((printed_minority(0.3).unwrap() - 0.52).abs() < 1e-15);
        assert!((printed_wrongclass(0.3, 10).unwrap() - 0.991_521_609_1).abs() < 1e-9);
        // The two wrong-class pairings coincide only for symmetric posteriors.
        assert!((printed_wrongclass(0.5, 7).unwrap() - closed_form_wrongclass(0.5, 7).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn adversaries_only_hurt() {
        for e in E_GRID {
            let r = closed_form_random(e).unwrap();
            let mut prev = (r, r);
            for k in 1..=40 {
                let m = closed_form_minority(e, k).unwrap();
                let w = closed_form_wrongclass(e, k).unwrap();
                assert!(r <= m + 1e-15 && m <= w + 1e-15, "e={e} k={k}");
                assert!(m >= prev.0 - 1e-15 && w >= prev.1 - 1e-15);
                prev = (m, w);
            }
        }
    }

    #[test]
    fn zero_error_simulates_to_zero() {
        let model = LocalModel::new(0.0, 5).unwrap();
        for p in [PolicyKind::RandomUniform, PolicyKind::FirstIndex, PolicyKind::MinorityClass, PolicyKind::WrongClass] {
            let est = simulate_local(model, p, 10_000, &mut RngStream::new(0, 1).rng()).unwrap();
            assert_eq!(est.rate, 0.0);
            assert_eq!(est.half_width, 0.0);
        }
        assert!(simulate_local(model, PolicyKind::Farthest, 10, &mut RngStream::new(0, 1).rng()).is_err());
        assert!(simulate_local(model, PolicyKind::RandomUniform, 0, &mut RngStream::new(0, 1).rng()).is_err());
    }

    #[test]
    fn oracle_matches_random_and_hit_probability() {
        let est = simulate_local(
            LocalModel::new(0.1, 1).unwrap(),
            PolicyKind::RandomUniform,
            1_000_000,
            &mut RngStream::new(3, 0).rng(),
        )
        .unwrap();
        assert!((est.rate - 0.18).abs() <= 0.0016, "{}", est.rate);

        // Bernoulli-sampling oracle for H, independent of the formulas above.
        let mut rng = RngStream::new(3, 1).rng();
        let trials = 1_000_000u64;
        let hits = (0..trials)
            .filter(|_| (0..5).any(|_| rng.random::<f64>() < 0.1))
            .count() as u64;
        let est = ErrorEstimate::from_counts(hits, trials);
        assert!(within_tolerance(neighborhood_hit_prob(0.1, 5).unwrap(), &est));
    }

    #[test]
    fn oracle_matches_adversaries() {
        let est = simulate_local(
            LocalModel::new(0.3, 10).unwrap(),
            PolicyKind::WrongClass,
            1_000_000,
            &mut RngStream::new(4, 0).rng(),
        )
        .unwrap();
        assert!((est.rate - 0.9802).abs() <= 0.0006, "{}", est.rate);
        let est = simulate_local(
            LocalModel::new(0.1, 5).unwrap(),
            PolicyKind::MinorityClass,
            1_000_000,
            &mut RngStream::new(4, 1).rng(),
        )
        .unwrap();
        assert!(within_tolerance(0.427608, &est), "{}", est.rate);
    }

    #[test]
    fn first_index_matches_random_uniform() {
        for (i, (e, k)) in [(0.1, 5), (0.3, 10), (0.5, 2)].into_iter().enumerate() {
            let model = LocalModel::new(e, k).unwrap();
            let a = simulate_local(model, PolicyKind::RandomUniform, 200_000, &mut RngStream::new(9, i as u64).rng()).unwrap();
            let b = simulate_local(model, PolicyKind::FirstIndex, 200_000, &mut RngStream::new(9, 100 + i as u64).rng()).unwrap();
            let p = crate::stats::two_proportion_p_value(a.errors, a.trials, b.errors, b.trials);
            assert!(p > 1e-3, "e={e} k={k} p={p}");
        }
    }

    #[test]
    fn tolerance_handles_degenerate_rates() {
        let est = ErrorEstimate::from_counts(1_000_000, 1_000_000);
        assert_eq!(est.half_width, 0.0);
        assert!(within_tolerance(1.0 - 1e-6, &est));
        assert!(!within_tolerance(0.99, &est));
    }

    #[test]
    fn single_cell_table() {
        let rows = error_rate_table(&[0.0], &[3], &[PolicyKind::WrongClass], 1000, &RngStream::new(0, 0)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].closed_form, 0.0);
        assert_eq!(rows[0].estimate.rate, 0.0);
        assert!(rows[0].agree);
        assert!(error_rate_table(&[], &[1], &[PolicyKind::RandomUniform], 10, &RngStream::new(0, 0)).is_err());
        assert!(error_rate_table(&[0.1], &[1], &[PolicyKind::Farthest], 10, &RngStream::new(0, 0)).is_err());
    }
}
