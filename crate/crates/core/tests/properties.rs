use proptest::prelude::*;

use qbath::analytic::{
    blp_analytic, c_dot, c_t, classify_regime, increase_intervals, rate_turns_negative,
    time_local_rate, Regime, CRITICAL_BAND,
};
use qbath::lindblad::{build_generator, evolve_expm, evolve_ode, propagator, OdeMethod};
use qbath::markovianity::{
    blp_numeric, choi_min_eigenvalue, evolved_trace_distance, intermediate_map, system_map,
    trace_distance, trace_distance_eig, BlpOptions,
};
use qbath::operator_space::{devectorize2q, min_eigenvalue, partial_trace_bath, vectorize2q};
use qbath::verify::witness_verdicts;
use qbath::{BlochVector, CoherenceVector16, ModelParams, QubitState, StatePair, TimeGrid};

fn bloch_ball() -> impl Strategy<Value = BlochVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("inside ball", |(x, y, z)| x * x + y * y + z * z <= 1.0)
        .prop_map(|(x, y, z)| BlochVector::new(x, y, z))
}

fn state() -> impl Strategy<Value = QubitState> {
    bloch_ball().prop_map(|b| QubitState::from_bloch(b).unwrap())
}

fn params() -> impl Strategy<Value = ModelParams> {
    (-2.0..2.0f64, 0.0..20.0f64).prop_map(|(xi, k)| ModelParams::new(xi, k).unwrap())
}

fn markovian_params() -> impl Strategy<Value = ModelParams> {
    (0.05..2.0f64, 1.0..3.0f64).prop_map(|(xi, r)| ModelParams::new(xi, 8.0 * xi * r).unwrap())
}

fn underdamped_params() -> impl Strategy<Value = ModelParams> {
    (0.1..2.0f64, 0.05..0.9f64).prop_map(|(xi, r)| ModelParams::new(xi, 8.0 * xi * r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vectorization_round_trip(coeffs in prop::array::uniform16(-1.0..1.0f64)) {
        let v = CoherenceVector16::from_array(coeffs);
        let back = vectorize2q(&devectorize2q(&v)).unwrap();
        prop_assert!(v.max_abs_diff(&back) < 1e-15);
    }

    #[test]
    fn propagation_is_linear(p in params(), a in bloch_ball(), b in bloch_ball(), t in 0.0..5.0f64, s in -2.0..2.0f64) {
        let gen = build_generator(p).unwrap();
        let (va, vb) = (CoherenceVector16::initial(a), CoherenceVector16::initial(b));
        let combined = CoherenceVector16(va.0 + vb.0 * s);
        let lhs = evolve_expm(&gen, &combined, t).unwrap();
        let rhs = CoherenceVector16(evolve_expm(&gen, &va, t).unwrap().0 + evolve_expm(&gen, &vb, t).unwrap().0 * s);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn trace_and_positivity_preserved(p in params(), b in bloch_ball(), t in 0.0..10.0f64) {
        let gen = build_generator(p).unwrap();
        let v = evolve_expm(&gen, &CoherenceVector16::initial(b), t).unwrap();
        prop_assert!((4.0 * v.0[0] - 1.0).abs() < 1e-12);
        prop_assert!(min_eigenvalue(&v) > -1e-10);
        let r = partial_trace_bath(&v).to_bloch();
        prop_assert!((r.x - b.x).abs() < 1e-10);
        prop_assert!((r.y - c_t(p, t) * b.y).abs() < 1e-9);
    }

    #[test]
    fn ode_tracks_propagator(p in params(), b in bloch_ball()) {
        let gen = build_generator(p).unwrap();
        let v0 = CoherenceVector16::initial(b);
        let grid = TimeGrid::new(0.0, 3.0, 7).unwrap();
        let states = evolve_ode(&gen, &v0, &grid, OdeMethod::default()).unwrap();
        for (t, v) in grid.times().into_iter().zip(&states) {
            let exact = CoherenceVector16(propagator(&gen, t).unwrap() * v0.0);
            prop_assert!(v.max_abs_diff(&exact) < 1e-8);
        }
    }

    #[test]
    fn coherence_factor_bounded(p in params(), t in 0.0..50.0f64) {
        prop_assert!(c_t(p, t).abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn derivative_matches_difference_quotient(p in params(), t in 0.05..8.0f64) {
        let h = 1e-6;
        prop_assume!(c_t(p, t).abs() > 1e-3);
        let fd = (c_t(p, t + h) - c_t(p, t - h)) / (2.0 * h);
        let d = c_dot(p, t);
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "{fd} vs {d}");
    }

    #[test]
    fn continuous_across_threshold(xi in 0.1..2.0f64, t in 0.0..10.0f64) {
        let k = 8.0 * xi;
        let at = c_t(ModelParams::new(xi, k).unwrap(), t);
        for dk in [-1e-10, 1e-10] {
            prop_assert!((c_t(ModelParams::new(xi, k + dk).unwrap(), t) - at).abs() < 1e-9);
        }
    }

    #[test]
    fn maps_compose(p in params(), s in 0.0..5.0f64, ds in 0.0..5.0f64) {
        let u = s + ds;
        prop_assume!(c_t(p, s).abs() > 1e-6);
        let composed = intermediate_map(p, s, u).unwrap().compose(&intermediate_map(p, 0.0, s).unwrap());
        prop_assert!((composed.0 - system_map(p, u).0).abs().max() < 1e-12);
    }

    #[test]
    fn trace_distance_routes_agree(a in state(), b in state()) {
        prop_assert!((trace_distance(&a, &b) - trace_distance_eig(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn evolved_distance_matches_mapped_states(p in params(), a in state(), b in state(), t in 0.0..10.0f64) {
        let m = system_map(p, t);
        let ea = QubitState::from_bloch(m.apply_bloch(a.bloch())).unwrap();
        let eb = QubitState::from_bloch(m.apply_bloch(b.bloch())).unwrap();
        let pair = StatePair::new(a, b);
        prop_assert!((evolved_trace_distance(p, &pair, t) - trace_distance(&ea, &eb)).abs() < 1e-12);
    }

    #[test]
    fn contractive_above_threshold(p in markovian_params(), a in state(), b in state()) {
        let pair = StatePair::new(a, b);
        let mut prev = evolved_trace_distance(p, &pair, 0.0);
        for k in 1..=1000 {
            let d = evolved_trace_distance(p, &pair, 0.01 * k as f64);
            prop_assert!(d <= prev + 1e-15);
            prev = d;
        }
    }

    #[test]
    fn increases_lie_in_predicted_windows(p in underdamped_params()) {
        let est = blp_numeric(p, &BlpOptions { n_pairs: 0, ..Default::default() }).unwrap();
        let predicted = increase_intervals(p, est.increase_windows.len() + 1).unwrap();
        for w in &est.increase_windows {
            prop_assert!(predicted.iter().any(|iv| w.t_lo >= iv.t_lo - 1e-8 && w.t_hi <= iv.t_hi + 1e-8), "{w:?}");
        }
    }

    #[test]
    fn choi_sign_matches_rate(p in underdamped_params(), t in 0.05..10.0f64) {
        let Ok(rate) = time_local_rate(p, t) else { return Ok(()) };
        prop_assume!(rate.abs() > 1e-2 && c_t(p, t).abs() > 1e-6 && c_t(p, t + 1e-4).abs() > 1e-6);
        let ev = choi_min_eigenvalue(&intermediate_map(p, t, t + 1e-4).unwrap());
        prop_assert_eq!(ev < -1e-8, rate < 0.0);
    }

    #[test]
    fn optimal_pair_dominates(p in underdamped_params(), seed in any::<u64>()) {
        let est = blp_numeric(p, &BlpOptions { n_pairs: 8, seed, ..Default::default() }).unwrap();
        prop_assert!(est.max_random_value <= est.optimal_pair_value + 1e-9);
    }

    #[test]
    fn regime_matches_sign_of_discriminant(p in params()) {
        let r = classify_regime(p, CRITICAL_BAND);
        let d = p.kappa() * p.kappa() - 64.0 * p.xi() * p.xi();
        match r {
            Regime::Underdamped => prop_assert!(d < 0.0),
            Regime::Overdamped => prop_assert!(d > 0.0),
            Regime::Critical => prop_assert!(d.abs() <= 1e-8 * p.kappa().powi(2).max(64.0 * p.xi().powi(2)).max(1.0)),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_agree_off_the_band(xi in 0.1..2.0f64, r in prop_oneof![0.02..0.95f64, 1.0..2.5f64]) {
        let p = ModelParams::new(xi, 8.0 * xi * r).unwrap();
        let markovian = r >= 1.0;
        let (cp, rate, blp) = witness_verdicts(p, 1).unwrap();
        prop_assert_eq!(cp, markovian);
        prop_assert_eq!(rate, markovian);
        prop_assert_eq!(blp, markovian);
    }
}

#[test]
fn blp_decreases_with_cooling() {
    for xi in [0.3, 1.0, 2.5] {
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let kappa = 8.0 * xi * k as f64 / 200.0;
            let v = blp_analytic(ModelParams::new(xi, kappa).unwrap())
                .unwrap()
                .as_f64();
            assert!(v < prev);
            prev = v;
        }
    }
}

/// Just below threshold the backflow is real but tiny: a `blp < 1e−6` cut
/// calls these points Markovian while the rate and CP witnesses do not.
#[test]
fn near_threshold_backflow_is_below_the_cut() {
    for r in [0.98, 0.99, 0.999] {
        let p = ModelParams::new(1.0, 8.0 * r).unwrap();
        let blp = blp_analytic(p).unwrap().as_f64();
        assert!(blp > 0.0 && blp < 1e-6, "r = {r}: {blp:e}");
        assert!(rate_turns_negative(p));
        let (cp, rate, blp_verdict) = witness_verdicts(p, 0).unwrap();
        assert!(!cp && !rate && blp_verdict);
    }
    let p = ModelParams::new(1.0, 8.0 * 0.95).unwrap();
    assert!(blp_analytic(p).unwrap().as_f64() > 1e-6);
}
