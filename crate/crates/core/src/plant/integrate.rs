//! Fixed-step classical Runge-Kutta integration of the plant ODE.
//!
//! Deterministic by construction: a step of `dt` minutes is split into
//! equal substeps no longer than 0.5 min, negative components are clamped
//! to zero after each substep (counted, not rejected), and any component
//! exceeding 1e9 in magnitude aborts with a divergence error.

use super::{rhs_unchecked, PatientParams, PlantError, PlantState, UncertaintyInput, N_STATES};

pub const MAX_SUBSTEP_MIN: f64 = 0.5;
const DIVERGENCE_LIMIT: f64 = 1e9;

/// Result of one integration step.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOutcome {
    pub state: PlantState,
    /// Number of state components clamped to zero during the step.
    pub clamp_events: u32,
    /// Largest magnitude clamped away, i.e. the most negative pre-clamp
    /// component seen during the step.
    pub max_clamp_magnitude: f64,
}

#[inline]
fn axpy(s: &PlantState, h: f64, d: &PlantState) -> PlantState {
    let a = s.to_array();
    let b = d.to_array();
    let mut out = [0.0; N_STATES];
    for i in 0..N_STATES {
        out[i] = a[i] + h * b[i];
    }
    PlantState::from_array(out)
}

/// Advance the plant by `dt` minutes under constant insulin and
/// disturbance inputs.
pub fn integrate_step(
    state: &PlantState,
    insulin: f64,
    u: &UncertaintyInput,
    params: &PatientParams,
    dt: f64,
) -> Result<IntegrationOutcome, PlantError> {
    integrate_step_at(state, insulin, u, params, dt, 0.0)
}

/// As [`integrate_step`], with `t0` used only to report the absolute time
/// of a divergence.
pub fn integrate_step_at(
    state: &PlantState,
    insulin: f64,
    u: &UncertaintyInput,
    params: &PatientParams,
    dt: f64,
    t0: f64,
) -> Result<IntegrationOutcome, PlantError> {
    assert!(dt > 0.0, "dt must be positive");
    if !state.is_finite() {
        return Err(PlantError::NonFinite("state"));
    }
    if !insulin.is_finite() || !u.dg.is_finite() || !u.mm.is_finite() || !u.o2.is_finite() {
        return Err(PlantError::NonFinite("inputs"));
    }
    if insulin < 0.0 {
        return Err(PlantError::NegativeInsulin(insulin));
    }

    let n_sub = (dt / MAX_SUBSTEP_MIN).ceil().max(1.0) as usize;
    let h = dt / n_sub as f64;

    let mut s = *state;
    let mut clamp_events = 0u32;
    let mut max_clamp_magnitude = 0.0f64;
    for k in 0..n_sub {
        let k1 = rhs_unchecked(&s, insulin, u, params);
        let k2 = rhs_unchecked(&axpy(&s, 0.5 * h, &k1), insulin, u, params);
        let k3 = rhs_unchecked(&axpy(&s, 0.5 * h, &k2), insulin, u, params);
        let k4 = rhs_unchecked(&axpy(&s, h, &k3), insulin, u, params);

        let a = s.to_array();
        let d1 = k1.to_array();
        let d2 = k2.to_array();
        let d3 = k3.to_array();
        let d4 = k4.to_array();
        let mut next = [0.0; N_STATES];
        for i in 0..N_STATES {
            let mut v = a[i] + h / 6.0 * (d1[i] + 2.0 * d2[i] + 2.0 * d3[i] + d4[i]);
            if v < 0.0 {
                max_clamp_magnitude = max_clamp_magnitude.max(-v);
                v = 0.0;
                clamp_events += 1;
            }
            next[i] = v;
        }
        for (i, v) in next.iter().enumerate() {
            if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
                return Err(PlantError::Diverged {
                    time_min: t0 + (k + 1) as f64 * h,
                    component: super::STATE_NAMES[i],
                    limit: DIVERGENCE_LIMIT,
                });
            }
        }
        s = PlantState::from_array(next);
    }

    Ok(IntegrationOutcome {
        state: s,
        clamp_events,
        max_clamp_magnitude,
    })
}
