//! Tie randomization by grid perturbation, and why it does not carry over
//! to epsilon-approximate queries.
//!
//! The instance places `duplicates` copies of the query's grid point in the
//! database. Copy 0 carries the globally rarest label. Two further grid
//! points at `e₁` and `2e₁` carry the common label. Exact search with a
//! first-index tie-break after perturbation should pick each copy equally
//! often; a minority-seeking selector over the epsilon candidate set keeps
//! returning copy 0.

use crate::error::{invalid, Error, Result};
use crate::neighbors::{
    epsilon_candidate_set, exact_nn_set, perturb_grid_dataset, perturb_point, select_representative,
    SelectionPolicy,
};
use crate::rng::RngStream;
use crate::space::{Dataset, Label};
use crate::stats::chi_square_uniform;

/// Significance level of the uniformity test.
pub const UNIFORMITY_ALPHA: f64 = 1e-3;

pub const MINORITY: Label = 1;
pub const MAJORITY: Label = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    pub duplicates: usize,
    pub draws: usize,
    pub amplitude: f64,
    /// Dimension of the grid instance.
    pub dim: usize,
    /// Epsilon of the companion approximate query.
    pub companion_epsilon: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            duplicates: 2,
            draws: 10_000,
            amplitude: 0.2,
            dim: 32,
            companion_epsilon: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationCheck {
    /// How often each copy won the exact query, per copy.
    pub counts: Vec<usize>,
    pub chi_square: f64,
    pub p_value: f64,
    pub pass: bool,
    /// The same tallies for the approximate query with the minority picker.
    pub companion_counts: Vec<usize>,
    /// Companion picks that were not one of the copies.
    pub companion_other: usize,
    pub companion_chi_square: f64,
    pub companion_p_value: f64,
    pub companion_pass: bool,
    /// Fraction of draws in which the companion query returned copy 0.
    pub companion_minority_frequency: f64,
}

impl PerturbationCheck {
    pub fn frequencies(&self) -> Vec<f64> {
        let total: usize = self.counts.iter().sum();
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

/// Grid instance with `duplicates` exact ties at the query (the origin).
pub fn tied_grid_instance(duplicates: usize, dim: usize) -> Result<(Dataset, Vec<f64>)> {
    if duplicates < 2 {
        return Err(invalid("duplicates", "need at least two tied points"));
    }
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    let origin = vec![0.0; dim];
    let mut points = vec![origin.clone(); duplicates];
    let mut labels = vec![MAJORITY; duplicates];
    labels[0] = MINORITY;
    for step in [1.0, 2.0] {
        let mut p = origin.clone();
        p[0] = step;
        points.push(p);
        labels.push(MAJORITY);
    }
    Ok((Dataset::from_points(dim, &points, Some(labels))?, origin))
}

pub fn perturbation_uniformity_check(config: &PerturbationConfig, stream: &RngStream) -> Result<PerturbationCheck> {
    let PerturbationConfig {
        duplicates,
        draws,
        amplitude,
        dim,
        companion_epsilon,
    } = *config;
    if draws == 0 {
        return Err(invalid("draws", "must be at least 1"));
    }
    let (ds, q) = tied_grid_instance(duplicates, dim)?;
    let labels = ds.labels();
    let mut rng = stream.rng();
    let mut counts = vec![0usize; duplicates];
    let mut companion_counts = vec![0usize; duplicates];
    let mut companion_other = 0;
    for _ in 0..draws {
        let pds = perturb_grid_dataset(&ds, amplitude, &mut rng)?;
        let pq = perturb_point(&q, amplitude, &mut rng)?;

        let exact = exact_nn_set(&pds, &pq, 0.0)?;
        let winner = select_representative(&exact, SelectionPolicy::FirstIndex, labels, &mut rng)?;
        if winner >= duplicates {
            // Impossible while displacements stay below 1/4.
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("perturbation moved the nearest neighbor off the tied cell (index {winner})"),
            });
        }
        counts[winner] += 1;

        let approx = epsilon_candidate_set(&pds, &pq, companion_epsilon)?;
        let pick = select_representative(&approx, SelectionPolicy::MinorityClass, labels, &mut rng)?;
        match companion_counts.get_mut(pick) {
            Some(c) => *c += 1,
            None => companion_other += 1,
        }
    }
    let (chi_square, p_value) = chi_square_uniform(&counts);
    let (companion_chi_square, companion_p_value) = chi_square_uniform(&companion_counts);
    Ok(PerturbationCheck {
        counts,
        chi_square,
        p_value,
        pass: p_value > UNIFORMITY_ALPHA,
        companion_minority_frequency: companion_counts[0] as f64 / draws as f64,
        companion_counts,
        companion_other,
        companion_chi_square,
        companion_p_value,
        companion_pass: companion_p_value > UNIFORMITY_ALPHA,
    })
}
