//! Patient parameterization: the model constants, body-weight scaling of
//! volumes and production/uptake rates, and the strict JSON loader.

use super::PlantError;
use serde::{Deserialize, Serialize};

/// Physiological constants of the virtual patient.
///
/// Rate constants in 1/min, volumes in L, glucose fluxes in mmol/min,
/// insulin quantities in mU. `f01`, `egp0`, `vg`, `vi` and `ug_ceil`
/// scale linearly with body weight in the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientParams {
    pub body_weight_kg: f64,
    /// Non-insulin mediated glucose uptake (mmol/min).
    pub f01: f64,
    /// Glucose threshold below which F01 scales down (mmol/L).
    pub f01_thr: f64,
    /// Endogenous glucose production at zero insulin (mmol/min).
    pub egp0: f64,
    /// Transfer rate from the non-accessible glucose compartment (1/min).
    pub k12: f64,
    /// Glucose distribution volume (L).
    pub vg: f64,
    /// Renal clearance threshold (mmol/L).
    pub r_thr: f64,
    /// Renal clearance rate (1/min).
    pub r_cl: f64,
    /// Fraction of infused insulin routed to the slow pathway.
    pub k_split: f64,
    /// Slow insulin compartment rate (1/min).
    pub k_ia1: f64,
    /// Fast insulin compartment rate (1/min).
    pub k_ia2: f64,
    /// Plasma insulin elimination rate (1/min).
    pub k_e: f64,
    /// Local insulin degradation saturation level (mU/min).
    pub vmax_ld: f64,
    /// Michaelis constant for local insulin degradation (mU).
    pub km_ld: f64,
    /// Remote insulin action rates (1/min).
    pub k_a1: f64,
    pub k_a2: f64,
    pub k_a3: f64,
    /// Insulin sensitivities: transport, disposal (1/min per mU/L) and
    /// EGP suppression (L/mU).
    pub s_it: f64,
    pub s_id: f64,
    pub s_ie: f64,
    /// Insulin distribution volume (L).
    pub vi: f64,
    /// Carbohydrate bio-availability (fraction absorbed).
    pub ag: f64,
    /// Maximum glucose flux from the gut (mmol/min).
    pub ug_ceil: f64,
    /// Lower bound for the gut time-of-maximum-appearance (min).
    pub tmax_lower: f64,
    /// Interstitial glucose equilibration rate (1/min).
    pub k_a_int: f64,
    /// Exercise glucose-uptake dynamics rate (1/min).
    pub k_ua: f64,
    /// Oxygen-consumption tracking rate (1/min).
    pub k_o2: f64,
    /// Basal peripheral glucose uptake (mg/min); divides UA*MM in M_PGU.
    pub k_mpgu: f64,
    /// Basal hepatic glucose production (mg/min); divides UA*MM in M_HPG.
    pub k_hpg: f64,
    /// Peripheral insulin uptake factor (unitless).
    pub k_piu: f64,
    /// Quadratic law for steady-state exercise uptake vs O2m (mg/min).
    pub a_ua_o2: f64,
    pub b_ua_o2: f64,
    pub c_ua_o2: f64,
}

impl PatientParams {
    /// Weight-scaled default patient. The fixed constants are the published
    /// model values; F01, EGP0, V_G, V_I and the gut flux ceiling scale
    /// with body weight.
    pub fn for_body_weight(bw_kg: f64) -> Self {
        Self {
            body_weight_kg: bw_kg,
            f01: 0.0104 * bw_kg,
            f01_thr: 4.5,
            egp0: 0.0158 * bw_kg,
            k12: 0.0793,
            vg: 0.1797 * bw_kg,
            r_thr: 9.0,
            r_cl: 0.003,
            k_split: 0.7958,
            k_ia1: 0.0113,
            k_ia2: 0.0197,
            k_e: 0.1735,
            vmax_ld: 2.9639,
            km_ld: 47.5305,
            k_a1: 0.007,
            k_a2: 0.0331,
            k_a3: 0.0308,
            s_it: 0.0046,
            s_id: 0.0006,
            s_ie: 0.0384,
            vi: 0.1443 * bw_kg,
            ag: 0.8121,
            ug_ceil: 0.0275 * bw_kg,
            tmax_lower: 48.8385,
            k_a_int: 0.025,
            k_ua: 1.0 / 30.0,
            k_o2: 5.0 / 3.0,
            k_mpgu: 35.0,
            k_hpg: 155.0,
            k_piu: 2.4,
            a_ua_o2: 0.006,
            b_ua_o2: 1.2264,
            c_ua_o2: -10.1958,
        }
    }

    /// Reference 75 kg patient used throughout the experiments.
    pub fn default_75kg() -> Self {
        Self::for_body_weight(75.0)
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let fields: [(&str, f64); 32] = [
            ("body_weight_kg", self.body_weight_kg),
            ("f01", self.f01),
            ("f01_thr", self.f01_thr),
            ("egp0", self.egp0),
            ("k12", self.k12),
            ("vg", self.vg),
            ("r_thr", self.r_thr),
            ("r_cl", self.r_cl),
            ("k_split", self.k_split),
            ("k_ia1", self.k_ia1),
            ("k_ia2", self.k_ia2),
            ("k_e", self.k_e),
            ("vmax_ld", self.vmax_ld),
            ("km_ld", self.km_ld),
            ("k_a1", self.k_a1),
            ("k_a2", self.k_a2),
            ("k_a3", self.k_a3),
            ("s_it", self.s_it),
            ("s_id", self.s_id),
            ("s_ie", self.s_ie),
            ("vi", self.vi),
            ("ag", self.ag),
            ("ug_ceil", self.ug_ceil),
            ("tmax_lower", self.tmax_lower),
            ("k_a_int", self.k_a_int),
            ("k_ua", self.k_ua),
            ("k_o2", self.k_o2),
            ("k_mpgu", self.k_mpgu),
            ("k_hpg", self.k_hpg),
            ("k_piu", self.k_piu),
            ("a_ua_o2", self.a_ua_o2),
            ("b_ua_o2", self.b_ua_o2),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(PlantError::InvalidParams(format!("{name} is not finite")));
            }
        }
        if !self.c_ua_o2.is_finite() {
            return Err(PlantError::InvalidParams("c_ua_o2 is not finite".into()));
        }
        // Sensitivities may be zeroed for infeasibility experiments; every
        // rate, volume and threshold must be strictly positive.
        let strictly_positive: [(&str, f64); 22] = [
            ("body_weight_kg", self.body_weight_kg),
            ("f01", self.f01),
            ("f01_thr", self.f01_thr),
            ("k12", self.k12),
            ("vg", self.vg),
            ("r_thr", self.r_thr),
            ("r_cl", self.r_cl),
            ("k_ia1", self.k_ia1),
            ("k_ia2", self.k_ia2),
            ("k_e", self.k_e),
            ("vmax_ld", self.vmax_ld),
            ("km_ld", self.km_ld),
            ("k_a1", self.k_a1),
            ("k_a2", self.k_a2),
            ("k_a3", self.k_a3),
            ("vi", self.vi),
            ("ug_ceil", self.ug_ceil),
            ("tmax_lower", self.tmax_lower),
            ("k_a_int", self.k_a_int),
            ("k_ua", self.k_ua),
            ("k_o2", self.k_o2),
            ("k_piu", self.k_piu),
        ];
        for (name, v) in strictly_positive {
            if v <= 0.0 {
                return Err(PlantError::InvalidParams(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("egp0", self.egp0),
            ("s_it", self.s_it),
            ("s_id", self.s_id),
            ("s_ie", self.s_ie),
            ("ag", self.ag),
            ("k_mpgu", self.k_mpgu),
            ("k_hpg", self.k_hpg),
        ] {
            if v < 0.0 {
                return Err(PlantError::InvalidParams(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.k_split) {
            return Err(PlantError::InvalidParams(format!(
                "k_split must lie in [0,1], got {}",
                self.k_split
            )));
        }
        if self.f01_thr >= self.r_thr {
            return Err(PlantError::InvalidParams(format!(
                "f01_thr ({}) must be below r_thr ({})",
                self.f01_thr, self.r_thr
            )));
        }
        if self.k_mpgu == 0.0 || self.k_hpg == 0.0 {
            return Err(PlantError::InvalidParams(
                "k_mpgu and k_hpg must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Flat key/value patient file with explicit units in the key names.
/// Unknown keys and missing keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientParamsFile {
    pub body_weight_kg: f64,
    pub f01_mmol_per_min: f64,
    pub f01_thr_mmol_per_l: f64,
    pub egp0_mmol_per_min: f64,
    pub k12_per_min: f64,
    pub vg_l: f64,
    pub r_thr_mmol_per_l: f64,
    pub r_cl_per_min: f64,
    pub k_split_frac: f64,
    pub k_ia1_per_min: f64,
    pub k_ia2_per_min: f64,
    pub k_e_per_min: f64,
    pub vmax_ld_mu_per_min: f64,
    pub km_ld_mu: f64,
    pub k_a1_per_min: f64,
    pub k_a2_per_min: f64,
    pub k_a3_per_min: f64,
    pub s_it_per_min_per_mu_l: f64,
    pub s_id_per_min_per_mu_l: f64,
    pub s_ie_l_per_mu: f64,
    pub vi_l: f64,
    pub ag_frac: f64,
    pub ug_ceil_mmol_per_min: f64,
    pub tmax_lower_min: f64,
    pub k_a_int_per_min: f64,
    pub k_ua_per_min: f64,
    pub k_o2_per_min: f64,
    pub k_mpgu_mg_per_min: f64,
    pub k_hpg_mg_per_min: f64,
    pub k_piu_frac: f64,
    pub a_ua_o2_mg_per_min: f64,
    pub b_ua_o2_mg_per_min: f64,
    pub c_ua_o2_mg_per_min: f64,
}

impl From<&PatientParams> for PatientParamsFile {
    fn from(p: &PatientParams) -> Self {
        Self {
            body_weight_kg: p.body_weight_kg,
            f01_mmol_per_min: p.f01,
            f01_thr_mmol_per_l: p.f01_thr,
            egp0_mmol_per_min: p.egp0,
            k12_per_min: p.k12,
            vg_l: p.vg,
            r_thr_mmol_per_l: p.r_thr,
            r_cl_per_min: p.r_cl,
            k_split_frac: p.k_split,
            k_ia1_per_min: p.k_ia1,
            k_ia2_per_min: p.k_ia2,
            k_e_per_min: p.k_e,
            vmax_ld_mu_per_min: p.vmax_ld,
            km_ld_mu: p.km_ld,
            k_a1_per_min: p.k_a1,
            k_a2_per_min: p.k_a2,
            k_a3_per_min: p.k_a3,
            s_it_per_min_per_mu_l: p.s_it,
            s_id_per_min_per_mu_l: p.s_id,
            s_ie_l_per_mu: p.s_ie,
            vi_l: p.vi,
            ag_frac: p.ag,
            ug_ceil_mmol_per_min: p.ug_ceil,
            tmax_lower_min: p.tmax_lower,
            k_a_int_per_min: p.k_a_int,
            k_ua_per_min: p.k_ua,
            k_o2_per_min: p.k_o2,
            k_mpgu_mg_per_min: p.k_mpgu,
            k_hpg_mg_per_min: p.k_hpg,
            k_piu_frac: p.k_piu,
            a_ua_o2_mg_per_min: p.a_ua_o2,
            b_ua_o2_mg_per_min: p.b_ua_o2,
            c_ua_o2_mg_per_min: p.c_ua_o2,
        }
    }
}

impl From<&PatientParamsFile> for PatientParams {
    fn from(f: &PatientParamsFile) -> Self {
        Self {
            body_weight_kg: f.body_weight_kg,
            f01: f.f01_mmol_per_min,
            f01_thr: f.f01_thr_mmol_per_l,
            egp0: f.egp0_mmol_per_min,
            k12: f.k12_per_min,
            vg: f.vg_l,
            r_thr: f.r_thr_mmol_per_l,
            r_cl: f.r_cl_per_min,
            k_split: f.k_split_frac,
            k_ia1: f.k_ia1_per_min,
            k_ia2: f.k_ia2_per_min,
            k_e: f.k_e_per_min,
            vmax_ld: f.vmax_ld_mu_per_min,
            km_ld: f.km_ld_mu,
            k_a1: f.k_a1_per_min,
            k_a2: f.k_a2_per_min,
            k_a3: f.k_a3_per_min,
            s_it: f.s_it_per_min_per_mu_l,
            s_id: f.s_id_per_min_per_mu_l,
            s_ie: f.s_ie_l_per_mu,
            vi: f.vi_l,
            ag: f.ag_frac,
            ug_ceil: f.ug_ceil_mmol_per_min,
            tmax_lower: f.tmax_lower_min,
            k_a_int: f.k_a_int_per_min,
            k_ua: f.k_ua_per_min,
            k_o2: f.k_o2_per_min,
            k_mpgu: f.k_mpgu_mg_per_min,
            k_hpg: f.k_hpg_mg_per_min,
            k_piu: f.k_piu_frac,
            a_ua_o2: f.a_ua_o2_mg_per_min,
            b_ua_o2: f.b_ua_o2_mg_per_min,
            c_ua_o2: f.c_ua_o2_mg_per_min,
        }
    }
}

impl PatientParams {
    /// Parse a patient parameter JSON document. Unknown or missing keys
    /// are errors; the resulting parameters are validated.
    pub fn from_json(text: &str) -> Result<Self, PlantError> {
        let file: PatientParamsFile =
            serde_json::from_str(text).map_err(|e| PlantError::ParamsFile(e.to_string()))?;
        let params = Self::from(&file);
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PatientParamsFile::from(self)).expect("serializable")
    }
}
