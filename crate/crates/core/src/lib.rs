//! Stochastic energy descent for the Sherrington-Kirkpatrick spin glass,
//! interpolating between greedy and reluctant single-spin-flip dynamics
//! through one parameter `lambda`.
//!
//! - [`sk_model`]: instances, energies and incremental local fields.
//! - [`dynamics`]: the lambda-parameterized move rule and single trajectories.
//! - [`experiment`]: fixed-restart and fixed-budget protocols, scaling fits,
//!   and whole campaigns.
//! - [`oracle`]: exhaustive ground states and stability checks for small `n`.
//! - [`cli_io`]: config parsing and CSV/JSON result tables for the CLI.

pub mod cli_io;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod seed;
pub mod sk_model;

pub use dynamics::{
    random_config, run_trajectory, sample_depth, select_site, step, LambdaParam, RunRecord,
    StepOutcome, Trajectory,
};
pub use error::{Error, Result};
pub use experiment::{
    fit_scaling, protocol_fixed_budget, protocol_fixed_starts, run_campaign, CampaignResult,
    EnergyStats, ExperimentConfig, GaussianInstances, InstanceSource, Protocol, ScalingFit, Starts,
};
pub use oracle::{brute_force_ground_state, is_one_flip_stable, GroundTruth};
pub use seed::Stream;
pub use sk_model::{
    apply_flip, delta_spectrum, energy, generate_couplings, init_state, CouplingMatrix,
    DynamicsState, SpinConfig, GENERATOR_VERSION,
};
