//! The stochastic iteration, its Monte Carlo ensembles and the mean dynamics.

mod config;
mod ensemble;
mod martingale;
mod mean;
mod recursion;
mod trajectory;

pub use config::{IterationConfig, Schedule, DEFAULT_SCHEDULE_RATIO, DIVERGENCE_THRESHOLD};
pub use ensemble::{ensemble, EnsembleStats};
pub use martingale::{martingale_diagnostic, martingale_h, MartingaleStats};
pub use mean::{mean_iterate, mean_iterate_phi};
pub use recursion::{recursion_check, RecursionCheck};
pub use trajectory::{sgd_trajectory, TrajectoryRecord};
