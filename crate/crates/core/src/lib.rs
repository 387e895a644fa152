//! Discrete-round simulator for clustered wireless sensor networks running
//! LEACH and its base-station-distance adaptive variant.
//!
//! * [`radio`]: first-order radio energy model.
//! * [`topology`]: deployment and distances.
//! * [`election`]: cluster-head election and the network energy estimate.
//! * [`engine`]: one run, round by round.
//! * [`metrics`]: run summaries and multi-seed comparison.
//! * [`cli`]: config files, CSV output and the command-line front end.

pub mod cli;
pub mod election;
pub mod engine;
pub mod metrics;
pub mod radio;
pub mod topology;

pub use election::{ElectionMode, EnergyEstimator};
pub use engine::{run, RoundRecord, SimConfig, Simulation};
pub use metrics::{compare, summarize, ComparisonReport, RunSummary};
pub use radio::RadioParams;
pub use topology::{FieldSpec, Node, Point};
