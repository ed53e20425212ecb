//! Online learning of joint resource allocation and hyper-parameter choices
//! for AI training slices.

pub mod analytics;
pub mod baselines;
pub mod env;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod scenario;
pub mod space;

pub use analytics::{OpCounters, RunSettings, RunTrace};
pub use baselines::{fa_policy, oa_oracle, oa_track, OracleResult};
pub use env::{AccuracyCoeffs, AllocationDecision, Environment, ModelAllocation, ModelSpec, ResourcePool};
pub use error::{Result, SliceError};
pub use learner::{InitScheme, LearnerState};
pub use space::{build_space, Algorithm, DecisionSpace, Grids, ModelGrid};
