//! Optimal mode-switching synthesis for discrete-time jump linear systems
//! whose initial state is Gaussian.
//!
//! Performance is measured by the squared 2-Wasserstein distance between the
//! state PDF and the Dirac measure at the origin, summed over time. The main
//! entry point is [`synthesis::synthesize_receding_horizon`]; pointwise,
//! single-mode and exhaustive baselines share its report type.

pub mod analysis;
pub mod config;
pub mod error;
pub mod examples;
pub mod quadrotor;
pub mod run;
pub mod synthesis;
pub mod system_model;
pub mod wasserstein;

pub use error::{Error, Result};
pub use synthesis::{synthesize, Strategy, SwitchingSchedule, SynthesisConfig, SynthesisReport};
pub use system_model::{GaussianBelief, JumpSystem, PlantWithControllers};
pub use wasserstein::W2Trace;
