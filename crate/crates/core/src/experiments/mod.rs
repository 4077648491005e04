//! Reproducible experiment drivers. Every driver is a pure function of its
//! configuration and seed.

pub mod classification;
pub mod concentration;
pub mod fractile;
pub mod perturbation;

pub use classification::{e2e_classification, e2e_classification_multi, E2eConfig, E2eResult};
pub use concentration::{
    concentration_experiment, distance_ratio_run, epsilon_coverage, CellOutcome, ConcentrationConfig, RatioStats,
};
pub use fractile::{fractile_vs_epsilon_comparison, FractileRow};
pub use perturbation::{perturbation_uniformity_check, PerturbationCheck, PerturbationConfig};
