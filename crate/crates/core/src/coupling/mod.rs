//! Partitioned interface coupling.

mod driver;
mod field;
mod iqn;

pub use driver::{couple_step, predictor, CouplingConfig, CouplingError, IterationLog, Scheme, StepOutcome, Update};
pub use field::{aitken_omega, converged, residual, static_relax, InterfaceField};
pub use iqn::{CouplingHistory, IqnUpdate};
