//! Learning mixtures of linear dynamical systems from short, unlabeled
//! trajectories.
//!
//! The library implements a two-stage approach:
//!
//! 1. **Coarse estimation** — estimate per-coordinate autocovariance
//!    subspaces ([`subspace`]), test every pair of trajectories for
//!    same-model membership and partition the similarity graph
//!    ([`clustering`]), then fit each cluster by least squares
//!    ([`estimation`]).
//! 2. **Refinement** — classify additional trajectories against the coarse
//!    models by Gaussian likelihood loss ([`classification`]) and refit the
//!    enlarged clusters.
//!
//! [`model`] holds the LDS representation and its stationary
//! autocovariances, [`sim`] generates synthetic mixed datasets with
//! reproducible counter-based seeding, [`pipeline`] wires the stages
//! together and runs the evaluation sweeps, and [`io`] covers the on-disk
//! formats.

pub mod classification;
pub mod clustering;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod sim;
pub mod subspace;

pub use error::{Error, Result};
pub use linalg::spectral_radius;
pub use model::{
    a_error, recover_model, separation_report, w_relative_error, Autocovariances, LdsModel,
    SeparationReport,
};
pub use sim::{
    empirical_autocov, generate_benchmark_models, simulate_dataset, InitMode, LabelMode, MixedDataset,
    MixtureSpec, ModelConstruction, Subset, SubsetPlan, Trajectory,
};
