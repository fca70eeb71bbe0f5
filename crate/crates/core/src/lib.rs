//! glucoloop-core: a closed-loop insulin-delivery simulation toolkit.
//!
//! The crate wires a nonlinear gluco-regulatory plant to a robust minimax
//! model-predictive controller, a moving-horizon state estimator, and
//! data-driven uncertainty tubes, and provides the scenario engine and
//! batch harness used to evaluate the closed loop in silico.
//!
//! Module map:
//! - [`plant`]: the 14-state patient ODE, measurement model, steady-state
//!   initialization and feasibility checks;
//! - [`sets`]: box uncertainty sets from samples, time-varying uncertainty
//!   tubes from event distributions, clustering and bootstrap utilities;
//! - [`solve`]: bound-constrained quasi-Newton minimization and the nested
//!   minimax driver;
//! - [`control`]: robust, hybrid closed-loop and perfect-information MPC;
//! - [`estimate`]: moving-horizon estimation and the EKF baseline;
//! - [`sim`]: scenarios, the closed-loop runner, indicators and batch
//!   aggregation.

pub mod plant;
