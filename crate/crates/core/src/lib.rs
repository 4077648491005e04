//! Exact and epsilon-approximate nearest-neighbor search with explicit
//! representative-selection policies, a p-stable LSH index, closed-form
//! error models for adversarial selection, and seeded experiment drivers
//! that write CSV reports.

pub mod analysis;
pub mod cli;
pub mod dataset_io;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod lsh;
pub mod neighbors;
pub mod report;
pub mod rng;
pub mod space;
pub mod stats;

pub use error::{Error, Result};
pub use neighbors::{
    epsilon_candidate_set, exact_nn_set, fractile_candidate_set, select_representative, NeighborQueryResult,
    PolicyKind, SelectionPolicy,
};
pub use rng::RngStream;
pub use space::{Dataset, DistanceRecord, Label, Precision};
