//! Load-stepped aneurysm scenarios in solid-only and coupled modes.

mod fsge;
mod gr;
mod insult;
pub mod interp;
mod scenario;

pub use fsge::{propagate_wss, run, run_fsge, FsgeDriver};
pub use gr::run_gr;
pub use insult::{apply_insult, insult_factor, InsultParams};
pub use scenario::{Mode, Scenario, SimulationError, StepRecord};
