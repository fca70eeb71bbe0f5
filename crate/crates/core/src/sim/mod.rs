//! Closed-loop simulation: scenarios, the per-repetition runner, batch
//! execution, performance indicators and aggregation.

mod indicators;
mod record;
mod runner;
mod scenario;
mod seeds;

pub use indicators::{aggregate, compute_indicators, AggregateSummary, Indicators, TrajectoryBand};
pub use record::{CgmRow, MinuteRow, SimulationRecord};
pub use runner::{run_batch, run_closed_loop, BatchResult, ControllerKind, EstimatorKind, RunSpec};
pub use scenario::{scenario_library, PlantSampling, RealizedEvent, Scenario, TubeSource};
pub use seeds::RunSeeds;

/// Substep used to integrate the plant inside the closed loop. Finer than
/// the 0.5-min prediction-model substep: the plant trajectory is the
/// ground truth every indicator derives from, and the exercise-uptake and
/// gut-flux switching points cost an order of accuracy at coarse steps.
/// 1/16 min keeps minute boundaries exact in binary arithmetic.
pub const PLANT_SUBSTEP_MIN: f64 = 0.0625;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("plant error: {0}")]
    Plant(#[from] crate::plant::PlantError),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("record: {0}")]
    Record(String),
    #[error("simulation aborted at t = {t_min} min: {reason}")]
    Aborted { t_min: u32, reason: String },
}
