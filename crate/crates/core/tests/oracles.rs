//! Independent numerical oracles for derived quantities.

use std::ops::ControlFlow;

use proptest::prelude::*;

use merit_dynamics::allocation::{allocate_real, check_properties};
use merit_dynamics::bounds::{
    empirical_hitting_times, f_const, normal_sf, separation_prob_ps, time_to_separation_bound, HittingMode,
};
use merit_dynamics::meanfield::{evaluate, step_ea, MapKind};
use merit_dynamics::model::{GroupState, ModelParams};
use merit_dynamics::stochastic::{run_ensemble, simulate_run, SimConfig};

/// Composite Simpson integral of `f` over `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper normal tail by quadrature; negative arguments go through the lower tail.
fn tail_quadrature(x: f64) -> f64 {
    if x >= 0.0 {
        simpson(density, x, x + 40.0, 40_000)
    } else {
        1.0 - simpson(density, -x, -x + 40.0, 40_000)
    }
}

#[test]
fn normal_tail_matches_quadrature() {
    let mut worst = 0.0f64;
    for k in 0..=160 {
        let x = -8.0 + 0.1 * k as f64;
        worst = worst.max((normal_sf(x) - tail_quadrature(x)).abs());
    }
    assert!(worst <= 1e-10, "max deviation {worst:e}");
}

#[test]
fn separation_probability_matches_quadrature() {
    let (alpha, p, q, n, delta) = (0.3f64, 0.9f64, 0.4f64, 100u64, 0.05f64);
    let params = ModelParams::new(alpha, p, q, 0.0, n).unwrap();
    let ps = separation_prob_ps(delta, &params).unwrap();
    assert!(ps > 0.0 && ps < 1.0);

    let scale = (n as f64).sqrt() / (2.0 * alpha * p * (1.0 - p)).sqrt();
    let x1 = scale * (1.0 + delta - p * (1.0 - alpha));
    let x2 = scale * (1.0 + delta - q - alpha * (p - q));
    // far-tail quadrature: integrate the density from the argument outwards
    let tail = |x: f64| simpson(density, x, x + 20.0, 200_000);
    let expected = 2.0 * tail(x1).min(tail(x2));
    let rel = ((ps - expected) / expected).abs();
    assert!(rel < 1e-8, "p_s {ps:e} vs quadrature {expected:e}");
}

#[test]
fn separation_bound_holds_in_simulation() {
    let (alpha, p, q, n, delta, omega) = (0.1, 0.9, 0.4, 10u64, 0.1, 0.05);
    let params = ModelParams::new(alpha, p, q, 0.0, n).unwrap();
    let bound = time_to_separation_bound(delta, omega, &params).unwrap().as_f64();
    let config = SimConfig::from_fractions(params, MapKind::Ea, 0.1, 0.1, 200, 5, 500).unwrap();
    let ensemble = run_ensemble(&config).unwrap();
    let stats = empirical_hitting_times(&ensemble, delta, HittingMode::OneStepSeparation);
    let within = stats
        .times
        .iter()
        .filter(|t| t.is_some_and(|t| (t as f64) <= bound))
        .count();
    assert!(within as f64 >= 0.95 * stats.n_runs() as f64, "{within} of {} within {bound}", stats.n_runs());
}

#[test]
fn f_const_by_hand() {
    let f = f_const(0.3, 0.9, 0.4).unwrap();
    assert!((f - (0.3 * 0.1 + 0.7 * 0.24 / 0.9)).abs() < 1e-15);
}

/// Direct per-type expectation of the EA transition, written independently of the library.
fn ea_expectation(xa: f64, xb: f64, alpha: f64, p: f64, q: f64) -> (f64, f64) {
    let x = xa + xb;
    let c = 2.0 * alpha;
    let next = |own: f64| {
        if x >= c {
            let seats = c * own / x;
            seats * p + (own - seats) * q
        } else {
            let low_seats = (c - x) * (1.0 - own) / (2.0 - x);
            (own + low_seats) * p
        }
    };
    (next(xa), next(xb))
}

proptest! {
    #[test]
    fn ea_map_matches_direct_expectation(xa in 0.0f64..=1.0, xb in 0.0f64..=1.0, alpha in 0.01f64..0.49,
                                         p in 0.05f64..=1.0, qf in 0.0f64..1.0) {
        prop_assume!(xa + xb > 0.0);
        let q = qf * p * 0.999;
        let params = ModelParams::new(alpha, p, q, 0.0, 1).unwrap();
        let next = step_ea(&GroupState::new(xa, xb).unwrap(), &params);
        let (ea, eb) = ea_expectation(xa, xb, alpha, p, q);
        prop_assert!((next.x_a() - ea).abs() < 1e-12 && (next.x_b() - eb).abs() < 1e-12);
    }

    #[test]
    fn allocation_is_continuous_at_the_boundary(share in 0.0f64..=1.0, alpha in 0.01f64..0.49, k in 1u32..8) {
        let params = ModelParams::new(alpha, 0.9, 0.4, 0.0, 1000).unwrap();
        let x = 2.0 * alpha;
        let h = 10f64.powi(-(k as i32) - 4);
        let at = |total: f64| {
            let s = GroupState::new(total * share, total * (1.0 - share)).unwrap();
            allocate_real(&s, &params).unwrap()
        };
        let (lo, hi) = (at(x - h), at(x + h));
        for i in 0..2 {
            prop_assert!((lo.high[i] - hi.high[i]).abs() < 1e4 * h * 2000.0);
            prop_assert!((lo.low[i] - hi.low[i]).abs() < 1e4 * h * 2000.0);
        }
        let s = GroupState::new(x * share, x * (1.0 - share)).unwrap();
        prop_assert!(check_properties(&s, &allocate_real(&s, &params).unwrap(), &params).all());
    }

    #[test]
    fn residual_uses_the_map(xa in 0.0f64..=1.0, xb in 0.0f64..=1.0) {
        prop_assume!(xa + xb > 0.0);
        let params = ModelParams::new(0.3, 0.9, 0.4, 0.0, 1).unwrap();
        let s = GroupState::new(xa, xb).unwrap();
        let point = evaluate(MapKind::Ea, &s, &params);
        let (ea, eb) = ea_expectation(xa, xb, 0.3, 0.9, 0.4);
        prop_assert!((point.residual - (ea - xa).abs().max((eb - xb).abs())).abs() < 1e-12);
    }
}

#[test]
fn ensemble_separation_decays_like_a_supermartingale() {
    let (alpha, p, q, n, eta) = (0.3, 0.9, 0.4, 2000u64, 0.01);
    let params = ModelParams::new(alpha, p, q, 0.0, n).unwrap();
    let config = SimConfig::from_fractions(params, MapKind::Ea, 0.9, 0.1, 40, 99, 400).unwrap();
    let horizon = config.horizon as usize;
    let mut sums = vec![0.0; horizon + 1];
    for run in 0..config.n_runs {
        simulate_run(&config, run, |s| {
            sums[s.t as usize] += s.state.delta().abs();
            ControlFlow::Continue(())
        })
        .unwrap();
    }
    let means: Vec<f64> = sums.iter().map(|s| s / config.n_runs as f64).collect();
    let slack = f_const(alpha, p, q).unwrap() / (n as f64 * eta);
    for t in 1..=horizon {
        assert!(
            means[t] <= p * means[t - 1] + slack,
            "t={t}: {} > {} * {} + {slack}",
            means[t],
            p,
            means[t - 1]
        );
    }
}
