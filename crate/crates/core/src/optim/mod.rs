//! Gradient methods for semi-private training and their baselines.

pub mod config;
pub mod dump;
pub mod erm;
pub mod ldp;
pub mod loss;
pub mod sgd;

pub use config::{noise_floor, SgdConfig, StepSchedule};
pub use dump::ModelDump;
pub use erm::{throwaway_erm, warm_start_init};
pub use ldp::{ldp_sgd_baseline, semi_ldp_sgd};
pub use loss::{LossKind, LossModel};
pub use sgd::{clip, dp_sgd_baseline, project, semi_dp_sgd, SamplingLog, TrainOutput};
