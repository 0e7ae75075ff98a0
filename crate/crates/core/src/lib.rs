//! Size-bounded community creation and refinement for bipartite membership
//! data.
//!
//! The pipeline: load `(entity, section)` rows ([`enrollnet`]), build the
//! connectivity network, create communities with hyperedge coarsening or
//! best-choice clustering ([`coarsen`]), score them ([`quality`]), and refine
//! them with simulated annealing ([`anneal`]). [`lab`] runs parameter sweeps
//! over the stochastic stages.

pub mod anneal;
pub mod coarsen;
pub mod community;
pub mod enrollnet;
pub mod error;
pub mod format;
pub mod lab;
pub mod quality;
pub mod rng;
pub mod stats;
pub mod synthetic;

pub use anneal::{anneal, anneal_from_temperature, AnnealOutcome, AnnealTrace, SaParams};
pub use coarsen::{
    best_choice, hyperedge_coarsen, modified_hyperedge_coarsen, monte_carlo_best_choice, BestChoiceParams, ScoreFn,
};
pub use community::CommunitySet;
pub use enrollnet::{build_network, load_enrollment, read_enrollment_csv, EnrollmentNetwork, EnrollmentTable};
pub use error::{Error, Result};
pub use quality::{score, QualityReport};
