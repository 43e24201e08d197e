//! Deterministic simulator of a decentralized cognitive radar network whose
//! nodes learn center frequencies and waveforms online.
//!
//! Layout, bottom up: [`model`] (mappings, utility, optimal matching),
//! [`waveform`] (sub-band library and ambiguity checks), [`rf`] (power
//! budget and collision detector), [`bandit`] (learners), [`environment`]
//! (reward engine), [`tracking`], [`metrics`], then [`config`] and [`sim`]
//! which drive whole experiments.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod config;
pub mod environment;
pub mod metrics;
pub mod model;
pub mod output;
pub mod rf;
pub mod sim;
pub mod tracking;
pub mod waveform;

pub use bandit::{ActionPair, BandPolicyKind, Feedback, PolicyParams, TwoLevelNode, WaveformPolicyKind};
pub use config::{load_config, parse_str, ConfigError, Scenario, SimConfig};
pub use environment::{Environment, EnvironmentSpec, RewardParams, StepOutcome};
pub use metrics::RegretLedger;
pub use model::{optimal_matching, BandId, Mapping, Matching, RadarId, RewardMatrix, SinrMatrix};
pub use output::{report, write_results, OutputError, Summary};
pub use sim::{monte_carlo, run_scenario, MonteCarlo, RunLog, SimError};
