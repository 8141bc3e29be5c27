use proptest::prelude::*;
use stabflow::flow::{
    c2_const, c_iter_const, check_lemma_bounds, delta_kappa, delta_kappa_tilde, delta_kappas, epsilon_star, epsilon_zero_search,
    flow_step, kappa_m, order_condition_lhs, order_condition_rhs, run_flow, stability_certificate, stopping_order, FlowConstants,
    FlowError, FlowState,
};

const M_CHECK: usize = 10_000;

fn consts(c_f_prime: f64) -> FlowConstants {
    FlowConstants {
        kappa1: 1.0,
        delta: 5,
        c_f_prime,
        c_f_dblprime: 1.0,
        alpha: 1.0,
        c_tilde_f_dblprime: 2.0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Largest point of a geometric grid below the cap where every order
/// condition holds.
fn scan_epsilon0(k1: f64, c: f64, cap: f64) -> f64 {
    let rhs = order_condition_rhs(k1, c);
    let mut e = cap;
    while e > 1e-15 {
        if (2..=M_CHECK).all(|m| order_condition_lhs(k1, c, e, m) <= rhs) {
            return e;
        }
        e *= 0.999;
    }
    0.0
}

#[test]
fn kappa_schedule_examples() {
    assert_eq!(kappa_m(1.0, 1), 1.0);
    assert_eq!(kappa_m(2.5, 1), 2.5);
    assert!((kappa_m(1.0, 2) - 0.795_308_1).abs() < 1e-7);
    let far = kappa_m(1.0, 1_000_000_000);
    assert!(far > 0.5 && far < 0.55);
}

#[test]
fn kappa_decrements_meet_their_lower_bounds() {
    for k1 in [0.5, 1.0, 3.0] {
        let mut prev = f64::INFINITY;
        for m in 1..=M_CHECK {
            let (dk, dkt) = delta_kappas(k1, m);
            let mf = m as f64;
            assert!(dk >= k1 / (6.0 * mf * mf), "κ₁ = {k1}, m = {m}");
            assert!(dkt >= k1 / (5.0 * (1.0 + mf.ln()).powi(2)), "κ₁ = {k1}, m = {m}");
            assert!(dk > 0.0 && dk < prev);
            prev = dk;
        }
    }
}

#[test]
fn zero_perturbation_stays_zero() {
    let traj = run_flow(&consts(0.5), 0.0, 50);
    assert_eq!(traj.len(), 50);
    assert!(traj.iter().all(|s| s.v == 0.0 && s.v_tilde == 0.0 && s.d == 0.0 && s.d_tilde == 0.0));
}

#[test]
fn first_step_matches_hand_unrolling() {
    for eps in [1e-3, 1e-5, 0.02] {
        let c = consts(0.5);
        let s2 = flow_step(&FlowState::initial(1.0, eps), &c);
        let (k2, dk1) = (kappa_m(1.0, 2), delta_kappa(1.0, 1));
        assert_eq!(s2.m, 2);
        assert!(rel(s2.v_tilde, 27.0 * eps * eps / (k2 * dk1)) < 1e-12);
        // With 𝕕₁ = 𝕕̃₁ = 0 only the shared tail survives, so v₂ = ṽ₂.
        assert!(rel(s2.v, 27.0 * eps * eps / (k2 * dk1)) < 1e-12);
        assert_eq!(s2.d_tilde, 0.0);
        let growth = 2.0 * (0.5 / delta_kappa_tilde(1.0, 1)).exp();
        assert!(rel(s2.d, growth * eps) < 1e-12);
    }
}

#[test]
fn c_iter_reference_values() {
    let dk1 = delta_kappa(1.0, 1);
    let floor = 27.0 / (kappa_m(1.0, 2) * dk1) * dk1.max(1.0);
    for (cfp, want) in [(0.1, 165.85464141755986), (0.5, 3390617.6726260316), (1.0, 2.171899727726253e16)] {
        let ci = c_iter_const(&consts(cfp)).unwrap();
        assert!(rel(ci.c_iter, want) < 1e-10, "c_f′ = {cfp}: {}", ci.c_iter);
        assert!(ci.c_iter >= floor);
        assert!(ci.truncated_at > 2 && ci.truncated_at < 10_000);
    }
}

#[test]
fn epsilon_zero_reference_values() {
    for (cfp, want) in [(0.1, 9.353073388297402e-05), (0.5, 7.37328782358334e-08)] {
        let e0 = epsilon_zero_search(&consts(cfp), M_CHECK).unwrap();
        let c = e0.c_iter.c_iter;
        assert!(rel(e0.epsilon0, want) < 1e-9, "c_f′ = {cfp}: {}", e0.epsilon0);
        assert!(c * e0.epsilon0 <= 0.25);
        let scanned = scan_epsilon0(1.0, c, e0.cap);
        assert!(scanned <= e0.epsilon0 && e0.epsilon0 <= scanned / 0.999);
        for m in [2, 3, 10, 100] {
            assert!(order_condition_lhs(1.0, c, e0.epsilon0 / 2.0, m) < order_condition_lhs(1.0, c, e0.epsilon0, m));
        }
        assert!(e0.tail_decreasing);
    }
}

#[test]
fn reference_constants_admit_no_epsilon_zero() {
    assert!(matches!(epsilon_zero_search(&consts(1.0), M_CHECK), Err(FlowError::Infeasible { .. })));
}

#[test]
fn lemma_bounds_hold_at_epsilon_zero() {
    for cfp in [0.1, 0.5] {
        let c = consts(cfp);
        let e0 = epsilon_zero_search(&c, M_CHECK).unwrap();
        let traj = run_flow(&c, e0.epsilon0, 200);
        let check = check_lemma_bounds(&traj, 1.0, e0.c_iter.c_iter, e0.epsilon0, 1e-10);
        assert!(check.holds, "c_f′ = {cfp}: {:?}", check.worst);
        for s in &traj {
            assert!(s.v_tilde <= delta_kappa(1.0, s.m) / 3.0);
        }
    }
}

#[test]
fn lemma_bounds_fail_well_above_epsilon_zero() {
    let c = consts(0.1);
    let e0 = epsilon_zero_search(&c, M_CHECK).unwrap();
    let traj = run_flow(&c, 50.0 * e0.epsilon0, 200);
    assert!(!check_lemma_bounds(&traj, 1.0, e0.c_iter.c_iter, 50.0 * e0.epsilon0, 1e-10).holds);
}

#[test]
fn stopping_order_examples() {
    let direct = |c: f64, eps: f64, d_s: usize| {
        (1usize..)
            .find(|&m| 6.0 * (m * m) as f64 * (c * eps).powi(m as i32 - 1) <= (-(d_s as f64) / 2.0).exp())
            .unwrap()
    };
    assert_eq!(stopping_order(1.0, 1.0, 0.25, 20).unwrap(), direct(1.0, 0.25, 20));
    for d_s in [5, 10, 20, 40] {
        assert!(stopping_order(1.0, 1.0, 0.25, 2 * d_s).unwrap() > stopping_order(1.0, 1.0, 0.25, d_s).unwrap());
    }
    let ratios: Vec<f64> = (1..=10)
        .map(|i| {
            let d_s = 10 * i;
            stopping_order(1.0, 1.0, 0.25, d_s).unwrap() as f64 / d_s as f64
        })
        .collect();
    let limit = 0.5 / 4f64.ln();
    assert!((ratios[9] - limit).abs() < (ratios[0] - limit).abs());
    assert!((ratios[9] - limit).abs() < 0.1);
    assert!(matches!(stopping_order(1.0, 4.0, 0.25, 10), Err(FlowError::NoStoppingOrder(_))));
}

#[test]
fn certificate_examples() {
    assert_eq!(c2_const(1.0), 24.0);
    assert_eq!(c2_const(6.0), 4.0);
    assert!(rel(epsilon_star(3.0, 13, 3, 1e-3), 8.0 * 13.0 * 1e-3 * (-4.5f64).exp()) < 1e-14);

    let c = consts(0.1);
    let zero = stability_certificate(&c, 13, 3, 0.0, 1.0, M_CHECK).unwrap();
    assert_eq!(zero.epsilon_star, 0.0);
    assert_eq!(zero.low_interval, (0.0, 0.0));
    assert_eq!(zero.high_interval.0, 1.0);
    assert!(zero.valid && zero.gap_lower_bound >= 0.5);

    let e0 = epsilon_zero_search(&c, M_CHECK).unwrap().epsilon0;
    let ok = stability_certificate(&c, 100, 40, e0 / 2.0, 1.0, M_CHECK).unwrap();
    assert!(ok.valid, "{:?}", ok.reasons);
    assert!(ok.low_interval.1 < ok.high_interval.0);
    assert_eq!(ok.splitting_bound, 2.0 * ok.epsilon_star);
    assert!(ok.m_star.is_some());

    let too_big = stability_certificate(&c, 100, 40, 2.0 * e0, 1.0, M_CHECK).unwrap();
    assert!(!too_big.valid);
}

proptest! {
    #[test]
    fn epsilon_star_is_monotone(n in 1usize..1000, d_s in 1usize..60, eps in 1e-8f64..1e-1, k1 in 0.2f64..4.0) {
        let base = epsilon_star(k1, n, d_s, eps);
        prop_assert!(epsilon_star(k1, n + 1, d_s, eps) > base);
        prop_assert!(epsilon_star(k1, n, d_s, eps * 1.5) > base);
        prop_assert!(epsilon_star(k1, n, d_s + 1, eps) < base);
    }

    #[test]
    fn kappa_is_decreasing_and_bounded(k1 in 0.1f64..10.0, m in 1usize..100_000) {
        let (a, b) = (kappa_m(k1, m), kappa_m(k1, m + 1));
        prop_assert!(b < a && b > k1 / 2.0);
    }
}
