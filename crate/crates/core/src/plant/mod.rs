//! Gluco-regulatory plant: a 14-state nonlinear ODE model of glucose and
//! insulin dynamics in a virtual type-1-diabetes patient, extended with the
//! effect of physical activity.
//!
//! Subsystems: glucose kinetics (`Q1`, `Q2`), interstitial glucose (`C`),
//! gut absorption (`G1`, `G2`), subcutaneous insulin kinetics
//! (`Q1a`, `Q1b`, `Q2i`, `Q3`), insulin action (`x1`, `x2`, `x3`) and
//! exercise (`UA`, `O2m`). Inputs are the insulin infusion rate (mU/min)
//! and the disturbance vector [`UncertaintyInput`] = (D_G, MM, O2).
//!
//! Units: glucose in mmol and mmol/L, insulin in mU and mU/L, time in
//! minutes. mg/dL appears only at report boundaries via [`MGDL_PER_MMOL_L`].

mod integrate;
mod params;
mod steady;

pub use integrate::{integrate_step, IntegrationOutcome};
pub use params::{PatientParams, PatientParamsFile};
pub use steady::{
    check_physiologic_feasibility, find_steady_state, steady_state_at_insulin, FeasibilityReport,
};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// 1 mmol/L of glucose = 18.016 mg/dL.
pub const MGDL_PER_MMOL_L: f64 = 18.016;

/// Grams of carbohydrate to mmol of glucose (molar mass 180.16 g/mol).
pub const MMOL_PER_G_CHO: f64 = 1000.0 / 180.16;

/// Oxygen consumption at rest, in percent of maximum (O2 basal value).
pub const O2_REST: f64 = 8.0;

/// Default CGM noise variance q, (mmol/L)^2; std 0.39 mmol/L is 5% of the
/// 7.8 mmol/L operating point.
pub const DEFAULT_NOISE_VAR_Q: f64 = 0.1521;

pub const N_STATES: usize = 14;

#[derive(Debug, thiserror::Error)]
pub enum PlantError {
    #[error("non-finite numeric input: {0}")]
    NonFinite(&'static str),
    #[error("negative insulin infusion rate: {0}")]
    NegativeInsulin(f64),
    #[error("invalid patient parameter: {0}")]
    InvalidParams(String),
    #[error("integration diverged at t = {time_min} min (|{component}| > {limit:e})")]
    Diverged {
        time_min: f64,
        component: &'static str,
        limit: f64,
    },
    #[error("steady-state solve failed: residual {residual:e} after {iterations} iterations")]
    SteadyStateNoConvergence { residual: f64, iterations: usize },
    #[error("patient file: {0}")]
    ParamsFile(String),
}

/// Disturbance inputs: CHO ingestion rate D_G (mmol/min), active muscular
/// mass fraction MM in [0,1], and target oxygen consumption O2 in percent
/// of maximum. Rest values are (0, 0, 8).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyInput {
    pub dg: f64,
    pub mm: f64,
    pub o2: f64,
}

impl UncertaintyInput {
    pub const fn new(dg: f64, mm: f64, o2: f64) -> Self {
        Self { dg, mm, o2 }
    }

    /// Rest conditions: no meal, no exercise, basal oxygen consumption.
    pub const fn rest() -> Self {
        Self::new(0.0, 0.0, O2_REST)
    }

    pub fn is_valid(&self) -> bool {
        self.dg.is_finite()
            && self.mm.is_finite()
            && self.o2.is_finite()
            && self.dg >= 0.0
            && (0.0..=1.0).contains(&self.mm)
            && (0.0..=100.0).contains(&self.o2)
    }
}

/// The 14-dimensional plant state.
///
/// Compartment masses in mmol (glucose) or mU (insulin); `c` is the
/// interstitial glucose concentration seen by the CGM (mmol/L); `x1`,
/// `x2` (1/min) and `x3` (unitless) are remote insulin effects; `ua`
/// (mg/min) and `o2m` (percent) track exercise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub q1: f64,
    pub q2: f64,
    pub c: f64,
    pub g1: f64,
    pub g2: f64,
    pub q1a: f64,
    pub q1b: f64,
    pub q2i: f64,
    pub q3: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub ua: f64,
    pub o2m: f64,
}

pub const STATE_NAMES: [&str; N_STATES] = [
    "Q1", "Q2", "C", "G1", "G2", "Q1a", "Q1b", "Q2i", "Q3", "x1", "x2", "x3", "UA", "O2m",
];

impl PlantState {
    pub fn zeroed() -> Self {
        Self::from_array([0.0; N_STATES])
    }

    pub fn from_array(v: [f64; N_STATES]) -> Self {
        Self {
            q1: v[0],
            q2: v[1],
            c: v[2],
            g1: v[3],
            g2: v[4],
            q1a: v[5],
            q1b: v[6],
            q2i: v[7],
            q3: v[8],
            x1: v[9],
            x2: v[10],
            x3: v[11],
            ua: v[12],
            o2m: v[13],
        }
    }

    pub fn to_array(self) -> [f64; N_STATES] {
        [
            self.q1, self.q2, self.c, self.g1, self.g2, self.q1a, self.q1b, self.q2i, self.q3,
            self.x1, self.x2, self.x3, self.ua, self.o2m,
        ]
    }

    /// Blood glucose concentration G = Q1 / V_G (mmol/L).
    #[inline]
    pub fn glucose(&self, params: &PatientParams) -> f64 {
        self.q1 / params.vg
    }

    /// Plasma insulin concentration I = Q3 / V_I (mU/L).
    #[inline]
    pub fn insulin_conc(&self, params: &PatientParams) -> f64 {
        self.q3 / params.vi
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn is_valid(&self) -> bool {
        let a = self.to_array();
        a.iter().all(|v| v.is_finite() && *v >= 0.0) && self.o2m <= 100.0
    }
}

/// Right-hand side of the plant ODE, without input validation.
///
/// Piecewise terms follow the threshold parameterization: non-insulin
/// uptake F01c saturates above `f01_thr`, renal clearance FR activates
/// above `r_thr`, the gut time constant is floored at `tmax_lower` so the
/// gut flux never exceeds `ug_ceil`, and the steady-state exercise uptake
/// quadratic is clamped at zero (it is slightly negative at rest).
#[inline]
pub(crate) fn rhs_unchecked(
    s: &PlantState,
    insulin: f64,
    u: &UncertaintyInput,
    p: &PatientParams,
) -> PlantState {
    let g = s.q1 / p.vg;
    let i = s.q3 / p.vi;

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

    let tmax = (s.g2 / p.ug_ceil).max(p.tmax_lower);
    let ug = s.g2 / tmax;

    let ua_target = (p.a_ua_o2 * s.o2m * s.o2m + p.b_ua_o2 * s.o2m + p.c_ua_o2).max(0.0);
    let m_pgu = 1.0 + s.ua * u.mm / p.k_mpgu;
    let m_piu = 1.0 + p.k_piu * u.mm;
    let m_hpg = 1.0 + s.ua * u.mm / p.k_hpg;

    let ld_a = p.vmax_ld * s.q1a / (p.km_ld + s.q1a);
    let ld_b = p.vmax_ld * s.q1b / (p.km_ld + s.q1b);

    PlantState {
        q1: -f01c - s.x1 * s.q1 + p.k12 * s.q2 - fr + ug + p.egp0 * (1.0 - s.x3),
        q2: s.x1 * s.q1 - p.k12 * s.q2 - s.x2 * s.q2,
        c: p.k_a_int * (g - s.c),
        g1: -s.g1 / tmax + p.ag * u.dg,
        g2: (s.g1 - s.g2) / tmax,
        q1a: p.k_split * insulin - p.k_ia1 * s.q1a - ld_a,
        q1b: (1.0 - p.k_split) * insulin - p.k_ia2 * s.q1b - ld_b,
        q2i: p.k_ia1 * s.q1a - p.k_ia1 * s.q2i,
        q3: p.k_ia1 * s.q2i + p.k_ia2 * s.q1b - p.k_e * s.q3,
        x1: p.k_a1 * (-s.x1 + m_pgu * m_piu * p.s_it * i),
        x2: p.k_a2 * (-s.x2 + m_pgu * m_piu * p.s_id * i),
        x3: p.k_a3 * (-s.x3 + m_hpg * p.s_ie * i),
        ua: p.k_ua * (ua_target - s.ua),
        o2m: p.k_o2 * (u.o2 - s.o2m),
    }
}

/// Time derivative of the plant state under the given insulin infusion
/// rate (mU/min) and disturbance input.
pub fn ode_rhs(
    state: &PlantState,
    insulin: f64,
    u: &UncertaintyInput,
    params: &PatientParams,
) -> Result<PlantState, PlantError> {
    if !state.is_finite() {
        return Err(PlantError::NonFinite("state"));
    }
    if !insulin.is_finite() {
        return Err(PlantError::NonFinite("insulin"));
    }
    if !(u.dg.is_finite() && u.mm.is_finite() && u.o2.is_finite()) {
        return Err(PlantError::NonFinite("uncertainty input"));
    }
    if insulin < 0.0 {
        return Err(PlantError::NegativeInsulin(insulin));
    }
    Ok(rhs_unchecked(state, insulin, u, params))
}

/// CGM measurement: interstitial glucose plus additive Gaussian noise,
/// clamped at zero.
pub fn measure<R: Rng + ?Sized>(state: &PlantState, noise_std: f64, rng: &mut R) -> f64 {
    assert!(
        noise_std.is_finite() && noise_std >= 0.0,
        "noise_std must be finite and non-negative"
    );
    let v = if noise_std > 0.0 {
        Normal::new(0.0, noise_std).expect("valid normal").sample(rng)
    } else {
        0.0
    };
    (state.c + v).max(0.0)
}

#[cfg(test)]
mod tests;
