//! Time-varying box bounds on the disturbance vector.
//!
//! Per-minute rule for one event with start support [ts_lo, ts_hi] and
//! duration support [d_lo, d_hi]: the upper bound is active on the
//! *possible* window [ts_lo, ts_hi + d_hi], the lower bound on the
//! *guaranteed* window [ts_hi, ts_lo + d_lo] (empty when the start spread
//! exceeds the duration). Uniform parameter distributions contribute their
//! exact support; normal ones their mean +/- k_sigma band. Outside any
//! possible window the bounds collapse to rest: D_G and MM to (0, 0), O2
//! to (8, 8).
//!
//! Events with occurrence probability below one contribute to upper
//! bounds only (the worst case must cover the event not happening).
//! Where possible windows of meals overlap, their D_G upper bounds add
//! (carbohydrate fluxes are additive); exercise bounds combine by
//! interval union. A tube with a step coarser than one minute takes the
//! per-minute union over each block, so every realization stays inside.

use super::events::{Dist, EventKind, EventSpec};
use super::SetsError;
use crate::plant::{UncertaintyInput, MMOL_PER_G_CHO, O2_REST};
use serde::{Deserialize, Serialize};

/// Matches the controller's uncertainty-knot period.
pub const DEFAULT_TUBE_STEP_MIN: u32 = 30;

/// Box bounds for (D_G, MM, O2) over one tube step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepBounds {
    pub dg_lo: f64,
    pub dg_hi: f64,
    pub mm_lo: f64,
    pub mm_hi: f64,
    pub o2_lo: f64,
    pub o2_hi: f64,
}

impl StepBounds {
    pub fn rest() -> Self {
        Self {
            dg_lo: 0.0,
            dg_hi: 0.0,
            mm_lo: 0.0,
            mm_hi: 0.0,
            o2_lo: O2_REST,
            o2_hi: O2_REST,
        }
    }

    pub fn is_rest(&self) -> bool {
        *self == Self::rest()
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Self) -> Self {
        Self {
            dg_lo: self.dg_lo.min(other.dg_lo),
            dg_hi: self.dg_hi.max(other.dg_hi),
            mm_lo: self.mm_lo.min(other.mm_lo),
            mm_hi: self.mm_hi.max(other.mm_hi),
            o2_lo: self.o2_lo.min(other.o2_lo),
            o2_hi: self.o2_hi.max(other.o2_hi),
        }
    }

    pub fn contains(&self, u: &UncertaintyInput, tol: f64) -> bool {
        u.dg >= self.dg_lo - tol
            && u.dg <= self.dg_hi + tol
            && u.mm >= self.mm_lo - tol
            && u.mm <= self.mm_hi + tol
            && u.o2 >= self.o2_lo - tol
            && u.o2 <= self.o2_hi + tol
    }

    pub fn midpoint(&self) -> UncertaintyInput {
        UncertaintyInput::new(
            0.5 * (self.dg_lo + self.dg_hi),
            0.5 * (self.mm_lo + self.mm_hi),
            0.5 * (self.o2_lo + self.o2_hi),
        )
    }
}

/// Time-indexed box bounds for the disturbance vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyTube {
    pub step_min: u32,
    pub bounds: Vec<StepBounds>,
}

impl UncertaintyTube {
    /// A tube pinned at rest values over the whole horizon.
    pub fn rest(horizon_min: u32, step_min: u32) -> Self {
        let n = horizon_min.div_ceil(step_min) as usize;
        Self {
            step_min,
            bounds: vec![StepBounds::rest(); n],
        }
    }

    pub fn horizon_min(&self) -> u32 {
        self.step_min * self.bounds.len() as u32
    }

    /// Bounds covering the given minute; rest beyond the defined horizon.
    pub fn at_minute(&self, t_min: u32) -> StepBounds {
        let idx = (t_min / self.step_min) as usize;
        self.bounds.get(idx).copied().unwrap_or_else(StepBounds::rest)
    }

    /// Union of the bounds over the half-open minute window [t0, t1).
    pub fn union_over(&self, t0_min: u32, t1_min: u32) -> StepBounds {
        assert!(t1_min > t0_min, "empty window");
        let first = (t0_min / self.step_min) as usize;
        let last = ((t1_min - 1) / self.step_min) as usize;
        let mut acc: Option<StepBounds> = None;
        for idx in first..=last {
            let b = self
                .bounds
                .get(idx)
                .copied()
                .unwrap_or_else(StepBounds::rest);
            acc = Some(match acc {
                None => b,
                Some(a) => a.union(&b),
            });
        }
        acc.expect("non-empty window")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SetsError> {
        serde_json::from_str(text).map_err(|e| SetsError::Csv(e.to_string()))
    }
}

struct EventWindows {
    start_lo: f64,
    start_hi: f64,
    dur_lo: f64,
    dur_hi: f64,
    kind: ResolvedKind,
    guaranteed: bool,
}

enum ResolvedKind {
    Meal { rate_lo: f64, rate_hi: f64 },
    Exercise { mm: (f64, f64), o2: (f64, f64) },
}

fn resolve(e: &EventSpec, k_sigma: f64) -> Result<EventWindows, SetsError> {
    e.validate()?;
    let (start_lo, start_hi) = e.start_min.support(k_sigma);
    let (dur_lo, dur_hi) = e.duration_min.support(k_sigma);
    if dur_lo <= 0.0 {
        return Err(SetsError::BadEventSpec(
            "event duration support must be positive".into(),
        ));
    }
    let kind = match e.kind {
        EventKind::Meal { cho_g } => {
            let (cho_lo, cho_hi) = cho_g.support(k_sigma);
            ResolvedKind::Meal {
                rate_lo: (cho_lo * MMOL_PER_G_CHO / dur_hi).max(0.0),
                rate_hi: (cho_hi * MMOL_PER_G_CHO / dur_lo).max(0.0),
            }
        }
        EventKind::Exercise { mm_frac, o2_pct } => {
            let mm = mm_frac.support(k_sigma);
            let o2 = o2_pct.support(k_sigma);
            ResolvedKind::Exercise {
                mm: (mm.0.clamp(0.0, 1.0), mm.1.clamp(0.0, 1.0)),
                o2: (o2.0.clamp(0.0, 100.0), o2.1.clamp(0.0, 100.0)),
            }
        }
    };
    Ok(EventWindows {
        start_lo,
        start_hi,
        dur_lo,
        dur_hi,
        kind,
        guaranteed: e.occurrence_prob >= 1.0,
    })
}

fn minute_bounds(events: &[EventWindows], t: f64) -> StepBounds {
    let mut b = StepBounds::rest();
    for w in events {
        let possible = t >= w.start_lo && t <= w.start_hi + w.dur_hi;
        let guaranteed = w.guaranteed && t >= w.start_hi && t <= w.start_lo + w.dur_lo;
        if !possible {
            continue;
        }
        match w.kind {
            ResolvedKind::Meal { rate_lo, rate_hi } => {
                b.dg_hi += rate_hi;
                if guaranteed {
                    b.dg_lo = b.dg_lo.max(rate_lo);
                }
            }
            ResolvedKind::Exercise { mm, o2 } => {
                b.mm_hi = b.mm_hi.max(mm.1);
                b.o2_hi = b.o2_hi.max(o2.1).max(O2_REST);
                if guaranteed {
                    b.mm_lo = b.mm_lo.max(mm.0);
                    b.o2_lo = b.o2_lo.max(o2.0.min(b.o2_hi));
                }
            }
        }
    }
    // The lower bound can never exceed the upper (a guaranteed event window
    // nested in another event's possible window keeps intervals ordered).
    b.dg_lo = b.dg_lo.min(b.dg_hi);
    b.mm_lo = b.mm_lo.min(b.mm_hi);
    b.o2_lo = b.o2_lo.min(b.o2_hi);
    b
}

/// Build a tube over `horizon_min` minutes at the given step from event
/// specifications; normal distributions are truncated at `k_sigma`.
pub fn tube_from_event_specs(
    events: &[EventSpec],
    horizon_min: u32,
    step_min: u32,
    k_sigma: f64,
) -> Result<UncertaintyTube, SetsError> {
    if step_min == 0 || horizon_min == 0 || horizon_min % step_min != 0 {
        return Err(SetsError::StepHorizonMismatch {
            step: step_min,
            horizon: horizon_min,
        });
    }
    let resolved: Vec<EventWindows> = events
        .iter()
        .map(|e| resolve(e, k_sigma))
        .collect::<Result<_, _>>()?;

    let n = (horizon_min / step_min) as usize;
    let mut bounds = Vec::with_capacity(n);
    for block in 0..n {
        let t0 = block as u32 * step_min;
        let mut acc = minute_bounds(&resolved, t0 as f64);
        for t in (t0 + 1)..(t0 + step_min) {
            acc = acc.union(&minute_bounds(&resolved, t as f64));
        }
        bounds.push(acc);
    }
    Ok(UncertaintyTube { step_min, bounds })
}
