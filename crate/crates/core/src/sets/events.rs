//! Meal and exercise event specifications: the stochastic description of
//! a patient's day from which uncertainty tubes, realized disturbances and
//! expected-disturbance profiles all derive.

use crate::plant::{UncertaintyInput, MMOL_PER_G_CHO, O2_REST};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Scalar distribution for an uncertain event parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Dist {
    Point { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Dist {
    pub fn point(value: f64) -> Self {
        Dist::Point { value }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "uniform bounds out of order");
        Dist::Uniform { lo, hi }
    }

    pub fn normal(mean: f64, sd: f64) -> Self {
        assert!(sd >= 0.0, "negative standard deviation");
        Dist::Normal { mean, sd }
    }

    /// Bounded support used for set construction: exact for point and
    /// uniform, mean +/- k_sigma standard deviations for normal.
    pub fn support(&self, k_sigma: f64) -> (f64, f64) {
        match *self {
            Dist::Point { value } => (value, value),
            Dist::Uniform { lo, hi } => (lo, hi),
            Dist::Normal { mean, sd } => (mean - k_sigma * sd, mean + k_sigma * sd),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Point { value } => value,
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
            Dist::Normal { mean, .. } => mean,
        }
    }

    /// Draw from the distribution itself.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Point { value } => value,
            Dist::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..hi)
                }
            }
            Dist::Normal { mean, sd } => {
                mean + sd * rand_distr::StandardNormal.sample(rng)
            }
        }
    }

    /// Draw from the tails: |z| uniform in [z_lo, z_hi], sign equiprobable.
    /// Uniform and point distributions are unaffected (they have no tails).
    pub fn sample_tails<R: Rng + ?Sized>(&self, rng: &mut R, z_lo: f64, z_hi: f64) -> f64 {
        match *self {
            Dist::Normal { mean, sd } => {
                let z = rng.random_range(z_lo..z_hi);
                let sign = if rng.random_range(0..2u8) == 0 { -1.0 } else { 1.0 };
                mean + sign * z * sd
            }
            other => other.sample(rng),
        }
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Dist::Point { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            Dist::Uniform { lo, hi } => {
                if hi == lo {
                    if x >= lo {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                }
            }
            Dist::Normal { mean, sd } => {
                if sd == 0.0 {
                    if x >= mean {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    Normal::new(mean, sd).expect("valid normal").cdf(x)
                }
            }
        }
    }
}

use rand_distr::Distribution as _;

/// What the event delivers: carbohydrates or a workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Meal {
        cho_g: Dist,
    },
    Exercise {
        mm_frac: Dist,
        o2_pct: Dist,
    },
}

/// One stochastic meal or exercise episode.
///
/// `chained` marks a follow-up phase that starts when the previous event
/// ends and inherits its realized duration and muscular-mass draw (the
/// declared start/duration/MM distributions of a chained event describe
/// the derived windows and are kept consistent by the scenario builder).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    #[serde(flatten)]
    pub kind: EventKind,
    pub start_min: Dist,
    pub duration_min: Dist,
    pub occurrence_prob: f64,
    #[serde(default)]
    pub chained: bool,
}

impl EventSpec {
    pub fn meal(start_min: Dist, cho_g: Dist, duration_min: f64, occurrence_prob: f64) -> Self {
        Self {
            kind: EventKind::Meal { cho_g },
            start_min,
            duration_min: Dist::point(duration_min),
            occurrence_prob,
            chained: false,
        }
    }

    pub fn exercise(start_min: Dist, duration_min: Dist, mm_frac: Dist, o2_pct: Dist) -> Self {
        Self {
            kind: EventKind::Exercise { mm_frac, o2_pct },
            start_min,
            duration_min,
            occurrence_prob: 1.0,
            chained: false,
        }
    }

    pub fn validate(&self) -> Result<(), super::SetsError> {
        let ordered = |d: &Dist| match *d {
            Dist::Uniform { lo, hi } => lo <= hi,
            Dist::Normal { sd, .. } => sd >= 0.0,
            Dist::Point { .. } => true,
        };
        let dists: Vec<&Dist> = match &self.kind {
            EventKind::Meal { cho_g } => vec![cho_g, &self.start_min, &self.duration_min],
            EventKind::Exercise { mm_frac, o2_pct } => {
                vec![mm_frac, o2_pct, &self.start_min, &self.duration_min]
            }
        };
        if !dists.iter().all(|d| ordered(d)) {
            return Err(super::SetsError::BadEventSpec(
                "distribution bounds out of order".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.occurrence_prob) {
            return Err(super::SetsError::BadEventSpec(format!(
                "occurrence probability {} outside [0,1]",
                self.occurrence_prob
            )));
        }
        Ok(())
    }
}

/// Per-minute expectation of the disturbance vector under the event
/// specifications (activity windows weighted by their probability).
/// Chained starts and uncertain durations enter through their means.
pub fn expected_u_at(events: &[EventSpec], t_min: f64) -> UncertaintyInput {
    let mut dg = 0.0;
    let mut mm = 0.0;
    let mut o2 = O2_REST;
    for e in events {
        let d_mean = e.duration_min.mean();
        // P(start <= t < start + d)
        let p_active = (e.start_min.cdf(t_min) - e.start_min.cdf(t_min - d_mean)).max(0.0)
            * e.occurrence_prob;
        match e.kind {
            EventKind::Meal { cho_g } => {
                if d_mean > 0.0 {
                    dg += cho_g.mean() * MMOL_PER_G_CHO / d_mean * p_active;
                }
            }
            EventKind::Exercise { mm_frac, o2_pct } => {
                mm += mm_frac.mean() * p_active;
                o2 += (o2_pct.mean() - O2_REST) * p_active;
            }
        }
    }
    UncertaintyInput::new(dg, mm.min(1.0), o2.clamp(0.0, 100.0))
}
