use super::*;
use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn params() -> PatientParams {
    PatientParams::default_75kg()
}

fn max_abs(s: &PlantState) -> f64 {
    s.to_array().iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[test]
fn rest_steady_state_has_zero_derivatives() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    assert!(basal > 0.0, "basal insulin must be positive");
    assert_relative_eq!(x0.glucose(&p), 7.8, epsilon = 1e-12);
    assert_eq!(x0.q1, 7.8 * p.vg);
    let d = ode_rhs(&x0, basal, &UncertaintyInput::rest(), &p).unwrap();
    assert!(max_abs(&d) <= 1e-8, "residual {}", max_abs(&d));
}

// Golden basal rate for the 75 kg reference patient, cross-checked below
// by a 5000-minute open-loop settling run.
const BASAL_75KG: f64 = 16.014609643827654;

#[test]
fn basal_rate_golden_value_and_settling() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    assert_relative_eq!(basal, BASAL_75KG, max_relative = 1e-9);

    // Perturb BG by +10% and let the plant settle under constant basal.
    let mut s = x0;
    s.q1 *= 1.1;
    for _ in 0..5000 {
        s = integrate_step(&s, basal, &UncertaintyInput::rest(), &p, 1.0)
            .unwrap()
            .state;
    }
    assert!(
        (s.glucose(&p) - 7.8).abs() < 1e-3,
        "settled at {}",
        s.glucose(&p)
    );
}

#[test]
fn gut_chain_topology_under_fresh_meal() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let dg = 10.0;
    let fed = ode_rhs(&x0, basal, &UncertaintyInput::new(dg, 0.0, O2_REST), &p).unwrap();
    let rest = ode_rhs(&x0, basal, &UncertaintyInput::rest(), &p).unwrap();
    assert_relative_eq!(fed.g1, p.ag * dg, max_relative = 1e-12);
    assert_eq!(fed.g2, 0.0);
    assert_eq!(fed.q1, rest.q1, "Q1 must not see the meal before the gut does");
}

#[test]
fn zero_insulin_drives_glucose_to_hyperglycemic_equilibrium() {
    let p = params();
    let (mut s, _) = find_steady_state(7.8, &p).unwrap();
    for _ in 0..5000 {
        s = integrate_step(&s, 0.0, &UncertaintyInput::rest(), &p, 1.0)
            .unwrap()
            .state;
    }
    let g = s.glucose(&p);
    assert!(g * MGDL_PER_MMOL_L > 300.0, "BG settled at {g} mmol/L");
    assert!(s.insulin_conc(&p) < 1e-6);
    // Cross-check against the analytic fixed-insulin steady state (the
    // settling run is still creeping along the slowest mode at 5000 min).
    let (_, g_analytic) = steady_state_at_insulin(0.0, &p).unwrap();
    assert_relative_eq!(g, g_analytic, epsilon = 1e-4);
}

#[test]
fn measure_zero_noise_is_identity() {
    let p = params();
    let (x0, _) = find_steady_state(7.8, &p).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    assert_eq!(measure(&x0, 0.0, &mut rng), x0.c);
}

#[test]
fn measure_noise_std_matches_monte_carlo() {
    let p = params();
    let (x0, _) = find_steady_state(7.8, &p).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let std = DEFAULT_NOISE_VAR_Q.sqrt();
    let n = 10_000;
    let samples: Vec<f64> = (0..n).map(|_| measure(&x0, std, &mut rng)).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    assert!(
        (sd - std).abs() / std < 0.05,
        "sample std {sd} vs nominal {std}"
    );
}

#[test]
fn measure_clamps_at_zero() {
    let mut s = PlantState::zeroed();
    s.c = 0.1;
    // Large noise makes negative draws certain to appear quickly.
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let mut saw_zero = false;
    for _ in 0..1000 {
        let y = measure(&s, 50.0, &mut rng);
        assert!(y >= 0.0);
        if y == 0.0 {
            saw_zero = true;
        }
    }
    assert!(saw_zero, "clamping never triggered");
}

#[test]
fn rk4_step_is_consistent_with_euler_to_second_order() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let mut s = x0;
    s.g1 = 100.0; // off-equilibrium so derivatives are nonzero
    s.q1 *= 1.05;
    let u = UncertaintyInput::new(5.0, 0.0, O2_REST);
    let err_at = |dt: f64| -> f64 {
        let rk = integrate_step(&s, basal, &u, &p, dt).unwrap().state;
        let d = ode_rhs(&s, basal, &u, &p).unwrap();
        let euler = PlantState::from_array(std::array::from_fn(|i| {
            s.to_array()[i] + dt * d.to_array()[i]
        }));
        rk.to_array()
            .iter()
            .zip(euler.to_array())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    };
    let e1 = err_at(0.4);
    let e2 = err_at(0.2);
    let e3 = err_at(0.1);
    assert!(e1 > 0.0);
    // O(dt^2) difference: halving dt shrinks it by ~4.
    assert!(e1 / e2 > 3.0 && e1 / e2 < 5.0, "ratio {}", e1 / e2);
    assert!(e2 / e3 > 3.0 && e2 / e3 < 5.0, "ratio {}", e2 / e3);
}

#[test]
fn halving_plant_substep_leaves_trajectories_unchanged_to_1e6() {
    // At the plant integration resolution, halving the substep must not
    // move any 300-min BG trajectory by more than 1e-6 mmol/L. Exercised
    // on a plain meal and on the harsher large-meal-plus-exercise mix
    // (both cross the gut-flux and exercise-uptake kinks).
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let traj = |h: f64, cho_g: f64, with_exercise: bool| -> Vec<f64> {
        let mut s = x0;
        let n_per_min = (1.0 / h).round() as usize;
        let mut out = Vec::with_capacity(300);
        for t in 0..300u32 {
            let dg = if (60..80).contains(&t) {
                cho_g * MMOL_PER_G_CHO / 20.0
            } else {
                0.0
            };
            let (mm, o2) = if with_exercise && (150..180).contains(&t) {
                (0.35, 75.0)
            } else {
                (0.0, O2_REST)
            };
            let u = UncertaintyInput::new(dg, mm, o2);
            for _ in 0..n_per_min {
                s = integrate_step(&s, basal, &u, &p, h).unwrap().state;
            }
            out.push(s.glucose(&p));
        }
        out
    };
    for (cho, ex) in [(60.0, false), (110.0, true)] {
        let a = traj(crate::sim::PLANT_SUBSTEP_MIN, cho, ex);
        let b = traj(crate::sim::PLANT_SUBSTEP_MIN / 2.0, cho, ex);
        let worst = a
            .iter()
            .zip(&b)
            .fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
        assert!(worst <= 1e-6, "cho={cho} exercise={ex}: deviation {worst}");
    }
}

#[test]
fn zeroed_plant_keeps_linear_subsystems_at_zero() {
    let p = params();
    let mut s = PlantState::zeroed();
    for _ in 0..200 {
        s = integrate_step(&s, 0.0, &UncertaintyInput::rest(), &p, 1.0)
            .unwrap()
            .state;
    }
    for (name, v) in [
        ("G1", s.g1),
        ("G2", s.g2),
        ("Q1a", s.q1a),
        ("Q1b", s.q1b),
        ("Q2i", s.q2i),
        ("Q3", s.q3),
        ("x1", s.x1),
        ("x2", s.x2),
        ("x3", s.x3),
        ("UA", s.ua),
    ] {
        assert_eq!(v, 0.0, "{name} drifted to {v}");
    }
    assert_relative_eq!(s.o2m, O2_REST, epsilon = 1e-6);
}

#[test]
fn feasibility_default_patient_passes() {
    let report = check_physiologic_feasibility(&params()).unwrap();
    assert!(report.pass(), "{report:?}");
    assert!(report.zero_insulin_bg_mgdl > 300.0);
    assert!(report.high_dose_bg_mgdl < 100.0);
}

#[test]
fn feasibility_fails_without_insulin_sensitivity() {
    let mut p = params();
    p.s_it = 0.0;
    p.s_id = 0.0;
    p.s_ie = 0.0;
    let report = check_physiologic_feasibility(&p).unwrap();
    assert!(!report.high_dose_ok);
    assert!(!report.pass());
}

#[test]
fn feasibility_fails_without_endogenous_production() {
    let mut p = params();
    p.egp0 = 0.0;
    let report = check_physiologic_feasibility(&p).unwrap();
    assert!(!report.zero_insulin_ok);
    assert!(!report.pass());
}

#[test]
fn trajectories_never_go_meaningfully_negative() {
    // Randomized closed-box runs: random meals, exercise and insulin; the
    // pre-clamp undershoot must stay within integration tolerance.
    use rand::Rng;
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let meal_start: u32 = rng.random_range(0..200);
        let meal_rate = rng.random_range(0.0..25.0);
        let ex_start: u32 = rng.random_range(0..250);
        let ex_dur: u32 = rng.random_range(10..40);
        let mm = rng.random_range(0.0..0.5);
        let o2 = rng.random_range(8.0..90.0);
        let insulin = rng.random_range(0.0..3.0) * basal;
        let mut s = x0;
        for t in 0..300u32 {
            let dg = if (meal_start..meal_start + 20).contains(&t) {
                meal_rate
            } else {
                0.0
            };
            let (m, o) = if (ex_start..ex_start + ex_dur).contains(&t) {
                (mm, o2)
            } else {
                (0.0, O2_REST)
            };
            let out =
                integrate_step(&s, insulin, &UncertaintyInput::new(dg, m, o), &p, 1.0).unwrap();
            worst = worst.max(out.max_clamp_magnitude);
            s = out.state;
        }
    }
    assert!(worst <= 1e-6, "worst pre-clamp undershoot {worst}");
}

#[test]
fn gut_mass_balance_conserves_ingested_cho() {
    let mut p = params();
    p.ag = 1.0; // full bio-availability for the balance check
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let cho_mmol = 60.0 * MMOL_PER_G_CHO;
    let rate = cho_mmol / 20.0;
    let mut s = x0;
    let mut absorbed = 0.0;
    let dt = 0.5;
    let mut t = 0.0;
    while t < 2000.0 {
        let u = if t < 20.0 {
            UncertaintyInput::new(rate, 0.0, O2_REST)
        } else {
            UncertaintyInput::rest()
        };
        // Trapezoid on Ug = G2 / Tmax across the substep.
        let ug_before = s.g2 / (s.g2 / p.ug_ceil).max(p.tmax_lower);
        s = integrate_step(&s, basal, &u, &p, dt).unwrap().state;
        let ug_after = s.g2 / (s.g2 / p.ug_ceil).max(p.tmax_lower);
        absorbed += 0.5 * (ug_before + ug_after) * dt;
        t += dt;
    }
    assert!(
        (absorbed - cho_mmol).abs() / cho_mmol < 1e-3,
        "absorbed {absorbed} of {cho_mmol} mmol"
    );
}

#[test]
fn insulin_mass_is_non_increasing_after_bolus_ends() {
    let p = params();
    let mut s = PlantState::zeroed();
    s.o2m = O2_REST;
    // 10-minute bolus, then pump off.
    for _ in 0..10 {
        s = integrate_step(&s, 1000.0, &UncertaintyInput::rest(), &p, 1.0)
            .unwrap()
            .state;
    }
    let mut total = s.q1a + s.q1b + s.q2i + s.q3;
    for _ in 0..600 {
        s = integrate_step(&s, 0.0, &UncertaintyInput::rest(), &p, 1.0)
            .unwrap()
            .state;
        let next = s.q1a + s.q1b + s.q2i + s.q3;
        assert!(next <= total + 1e-12, "insulin mass rose: {next} > {total}");
        total = next;
    }
}

#[test]
fn steady_glucose_decreases_with_insulin() {
    let p = params();
    let (_, g1) = steady_state_at_insulin(5.0, &p).unwrap();
    let (_, g2) = steady_state_at_insulin(15.0, &p).unwrap();
    let (_, g3) = steady_state_at_insulin(30.0, &p).unwrap();
    assert!(g1 > g2 && g2 > g3, "({g1}, {g2}, {g3})");
}

#[test]
fn exercise_pulse_lowers_glucose() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let run = |with_exercise: bool| -> f64 {
        let mut s = x0;
        let mut min_g = f64::INFINITY;
        for t in 0..300u32 {
            let u = if with_exercise && (60..90).contains(&t) {
                UncertaintyInput::new(0.0, 0.25, 60.0)
            } else {
                UncertaintyInput::rest()
            };
            s = integrate_step(&s, basal, &u, &p, 1.0).unwrap().state;
            min_g = min_g.min(s.glucose(&p));
        }
        min_g
    };
    assert!(run(true) < run(false));
}

#[test]
fn resting_exercise_uptake_quadratic_is_nearly_zero() {
    let p = params();
    let q = p.a_ua_o2 * 64.0 + p.b_ua_o2 * 8.0 + p.c_ua_o2;
    assert!(q.abs() < 1e-2, "quadratic at rest O2 is {q}");
    assert!(q < 0.0, "clamp at zero must be active at rest");
}

#[test]
fn ode_rhs_rejects_bad_inputs() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let mut bad = x0;
    bad.q1 = f64::NAN;
    assert!(matches!(
        ode_rhs(&bad, basal, &UncertaintyInput::rest(), &p),
        Err(PlantError::NonFinite(_))
    ));
    assert!(matches!(
        ode_rhs(&x0, -1.0, &UncertaintyInput::rest(), &p),
        Err(PlantError::NegativeInsulin(_))
    ));
    assert!(matches!(
        ode_rhs(&x0, f64::INFINITY, &UncertaintyInput::rest(), &p),
        Err(PlantError::NonFinite(_))
    ));
}

#[test]
fn integration_divergence_is_reported() {
    let p = params();
    let (x0, basal) = find_steady_state(7.8, &p).unwrap();
    let huge_meal = UncertaintyInput::new(1e12, 0.0, O2_REST);
    let mut s = x0;
    let mut diverged = false;
    for _ in 0..100 {
        match integrate_step(&s, basal, &huge_meal, &p, 1.0) {
            Ok(out) => s = out.state,
            Err(PlantError::Diverged { component, .. }) => {
                assert!(component == "G1" || component == "G2");
                diverged = true;
                break;
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(diverged);
}

#[test]
fn patient_file_round_trips_and_rejects_bad_keys() {
    let p = params();
    let text = p.to_json();
    let back = PatientParams::from_json(&text).unwrap();
    assert_eq!(p, back);

    let with_unknown = text.replacen('{', "{\n  \"mystery_key\": 1.0,", 1);
    assert!(PatientParams::from_json(&with_unknown).is_err());

    let missing = text.replace("\"k12_per_min\"", "\"_k12_per_min\"");
    assert!(PatientParams::from_json(&missing).is_err());
}

#[test]
fn params_validation_catches_violations() {
    let mut p = params();
    p.k12 = -0.1;
    assert!(p.validate().is_err());

    let mut p = params();
    p.k_split = 1.5;
    assert!(p.validate().is_err());

    let mut p = params();
    p.f01_thr = 10.0; // above r_thr
    assert!(p.validate().is_err());
}
