//! Steady-state initialization and physiologic feasibility checks.
//!
//! At rest (no meal, no exercise, O2 at its basal 8%) the gut, exercise
//! and insulin chains decouple, so a full steady state reduces to scalar
//! root finds: the insulin compartments are eliminated analytically given
//! the infusion rate, and the glucose balance closes either over the
//! basal rate (given a target BG) or over BG (given a fixed rate).

use super::{ode_rhs, PatientParams, PlantError, PlantState, UncertaintyInput};

/// Residual tolerance on the infinity norm of the state derivative.
pub const STEADY_TOL: f64 = 1e-8;

const MAX_NEWTON_ITERS: usize = 200;

/// High-dose insulin rate used by the feasibility check: 15 U/h.
pub const HIGH_DOSE_MU_PER_MIN: f64 = 250.0;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FeasibilityReport {
    /// Steady-state BG with the pump off, in mg/dL; must exceed 300.
    pub zero_insulin_bg_mgdl: f64,
    /// Steady-state BG under 15 U/h, in mg/dL; must fall below 100.
    pub high_dose_bg_mgdl: f64,
    pub zero_insulin_ok: bool,
    pub high_dose_ok: bool,
}

impl FeasibilityReport {
    pub fn pass(&self) -> bool {
        self.zero_insulin_ok && self.high_dose_ok
    }
}

/// Steady subcutaneous insulin mass for one pathway: solves
/// `k_ia * q + vmax * q / (km + q) = inflow` for q >= 0.
fn steady_pathway_mass(inflow: f64, k_ia: f64, vmax: f64, km: f64) -> f64 {
    if inflow <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = inflow / k_ia;
    let f = |q: f64| k_ia * q + vmax * q / (km + q) - inflow;
    let mut q = hi * 0.5;
    for _ in 0..MAX_NEWTON_ITERS {
        let fq = f(q);
        if fq.abs() <= 1e-14 * inflow.max(1.0) {
            return q;
        }
        if fq > 0.0 {
            hi = q;
        } else {
            lo = q;
        }
        let df = k_ia + vmax * km / ((km + q) * (km + q));
        let mut next = q - fq / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        q = next;
    }
    q
}

/// Remote insulin effects (x1, x2, x3) and the full insulin chain at a
/// constant infusion rate, at rest (unit exercise multipliers).
fn rest_insulin_chain(insulin: f64, p: &PatientParams) -> (f64, f64, f64, f64, f64, f64, f64) {
    let q1a = steady_pathway_mass(p.k_split * insulin, p.k_ia1, p.vmax_ld, p.km_ld);
    let q1b = steady_pathway_mass((1.0 - p.k_split) * insulin, p.k_ia2, p.vmax_ld, p.km_ld);
    let q2i = q1a;
    let q3 = (p.k_ia1 * q2i + p.k_ia2 * q1b) / p.k_e;
    let i = q3 / p.vi;
    (q1a, q1b, q2i, q3, p.s_it * i, p.s_id * i, p.s_ie * i)
}

/// Glucose-balance residual at concentration `g` given remote effects.
fn glucose_balance(g: f64, x1: f64, x2: f64, x3: f64, p: &PatientParams) -> f64 {
    let f01c = if g >= p.f01_thr {
        p.f01
    } else {
        p.f01 * g / p.f01_thr
    };
    let fr = if g >= p.r_thr {
        p.r_cl * (g - p.r_thr) * p.vg
    } else {
        0.0
    };
    -f01c - x1 * g * p.vg * x2 / (p.k12 + x2) - fr + p.egp0 * (1.0 - x3)
}

fn assemble_rest_state(g: f64, insulin: f64, p: &PatientParams) -> PlantState {
    let (q1a, q1b, q2i, q3, x1, x2, x3) = rest_insulin_chain(insulin, p);
    let q1 = g * p.vg;
    let q2 = x1 * q1 / (p.k12 + x2);
    let ua = (p.a_ua_o2 * 64.0 + p.b_ua_o2 * 8.0 + p.c_ua_o2).max(0.0);
    PlantState {
        q1,
        q2,
        c: g,
        g1: 0.0,
        g2: 0.0,
        q1a,
        q1b,
        q2i,
        q3,
        x1,
        x2,
        x3,
        ua,
        o2m: super::O2_REST,
    }
}

/// Find the rest steady state holding BG at `target_bg`, together with
/// the basal insulin rate that sustains it.
pub fn find_steady_state(
    target_bg: f64,
    params: &PatientParams,
) -> Result<(PlantState, f64), PlantError> {
    params.validate()?;
    assert!(
        target_bg > params.f01_thr,
        "target BG must exceed the F01 threshold"
    );

    let residual = |iota: f64| -> f64 {
        let (_, _, _, _, x1, x2, x3) = rest_insulin_chain(iota, params);
        glucose_balance(target_bg, x1, x2, x3, params)
    };

    // The balance is strictly decreasing in the infusion rate; bracket the
    // root, then polish with damped Newton (numerical derivative).
    let r0 = residual(0.0);
    if r0 <= 0.0 {
        return Err(PlantError::SteadyStateNoConvergence {
            residual: r0,
            iterations: 0,
        });
    }
    let mut hi = 1.0;
    let mut iters = 0;
    while residual(hi) > 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 60 {
            return Err(PlantError::SteadyStateNoConvergence {
                residual: residual(hi),
                iterations: iters,
            });
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    let mut iota = 0.5 * (lo + hi);
    for k in 0..MAX_NEWTON_ITERS {
        let r = residual(iota);
        if r.abs() <= 1e-13 {
            break;
        }
        if r > 0.0 {
            lo = iota;
        } else {
            hi = iota;
        }
        let h = 1e-6 * iota.max(1.0);
        let dr = (residual(iota + h) - residual(iota - h)) / (2.0 * h);
        let mut next = if dr != 0.0 { iota - r / dr } else { 0.5 * (lo + hi) };
        // Damping: stay inside the bracket.
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        iota = next;
        if k + 1 == MAX_NEWTON_ITERS {
            return Err(PlantError::SteadyStateNoConvergence {
                residual: r,
                iterations: MAX_NEWTON_ITERS,
            });
        }
    }

    let state = assemble_rest_state(target_bg, iota, params);
    let deriv = ode_rhs(&state, iota, &UncertaintyInput::rest(), params)?;
    let resid = deriv
        .to_array()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if resid > STEADY_TOL {
        return Err(PlantError::SteadyStateNoConvergence {
            residual: resid,
            iterations: MAX_NEWTON_ITERS,
        });
    }
    Ok((state, iota))
}

/// Rest steady state under a fixed infusion rate. Returns the state and
/// its BG in mmol/L; BG clamps to zero when insulin action drives the
/// interior equilibrium negative (boundary equilibrium of the clamped
/// plant).
pub fn steady_state_at_insulin(
    insulin: f64,
    params: &PatientParams,
) -> Result<(PlantState, f64), PlantError> {
    params.validate()?;
    assert!(insulin >= 0.0, "insulin must be non-negative");
    let (_, _, _, _, x1, x2, x3) = rest_insulin_chain(insulin, params);

    let bal = |g: f64| glucose_balance(g, x1, x2, x3, params);
    let g = if bal(0.0) <= 0.0 {
        0.0
    } else {
        let mut hi = params.r_thr.max(1.0);
        let mut iters = 0;
        while bal(hi) > 0.0 {
            hi *= 2.0;
            iters += 1;
            if iters > 60 {
                return Err(PlantError::SteadyStateNoConvergence {
                    residual: bal(hi),
                    iterations: iters,
                });
            }
        }
        let mut lo = 0.0;
        let mut g = 0.5 * hi;
        for _ in 0..MAX_NEWTON_ITERS {
            let r = bal(g);
            if r.abs() <= 1e-13 {
                break;
            }
            if r > 0.0 {
                lo = g;
            } else {
                hi = g;
            }
            let h = 1e-7 * g.max(1.0);
            let dr = (bal(g + h) - bal(g - h)) / (2.0 * h);
            let mut next = if dr != 0.0 { g - r / dr } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            g = next;
        }
        g
    };

    Ok((assemble_rest_state(g, insulin, params), g))
}

/// Physiologic feasibility of the parameterization: without insulin the
/// plant must settle above 300 mg/dL, and under 15 U/h below 100 mg/dL.
pub fn check_physiologic_feasibility(
    params: &PatientParams,
) -> Result<FeasibilityReport, PlantError> {
    let (_, g_zero) = steady_state_at_insulin(0.0, params)?;
    let (_, g_high) = steady_state_at_insulin(HIGH_DOSE_MU_PER_MIN, params)?;
    let zero_mgdl = g_zero * super::MGDL_PER_MMOL_L;
    let high_mgdl = g_high * super::MGDL_PER_MMOL_L;
    Ok(FeasibilityReport {
        zero_insulin_bg_mgdl: zero_mgdl,
        high_dose_bg_mgdl: high_mgdl,
        zero_insulin_ok: zero_mgdl > 300.0,
        high_dose_ok: high_mgdl < 100.0,
    })
}
