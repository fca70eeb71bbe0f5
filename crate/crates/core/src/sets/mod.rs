//! Uncertainty-set machinery: box sets with order-statistic probabilistic
//! guarantees, time-varying uncertainty tubes for (D_G, MM, O2) derived
//! from event distributions or from data, bootstrap thresholds and k-means
//! pre-clustering.

mod boxset;
mod events;
mod kmeans;
mod samples_io;
mod tube;

pub use boxset::{
    bootstrap_threshold, box_from_samples, order_statistic_index, raw_order_statistic_index,
    BoxSet, CoordSummary,
};
pub use events::{expected_u_at, Dist, EventKind, EventSpec};
pub use kmeans::{kmeans_cluster, KmeansResult};
pub use samples_io::{read_event_samples_csv, EventSampleRow};
pub use tube::{tube_from_event_specs, StepBounds, UncertaintyTube, DEFAULT_TUBE_STEP_MIN};

#[derive(Debug, thiserror::Error)]
pub enum SetsError {
    #[error("invalid probability level: {0}")]
    InvalidLevel(String),
    #[error("sample size too small: no valid order-statistic index for S = {sample_size}")]
    SampleSizeTooSmall { sample_size: usize },
    #[error("insufficient samples in coordinates {coords:?}")]
    InsufficientCoordinates { coords: Vec<usize> },
    #[error("empty sample set")]
    EmptySamples,
    #[error("tube step {step} min does not divide horizon {horizon} min")]
    StepHorizonMismatch { step: u32, horizon: u32 },
    #[error("event specification: {0}")]
    BadEventSpec(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("k-means: {0}")]
    Kmeans(String),
}
