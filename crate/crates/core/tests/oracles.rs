//! Independent numerical oracles for the solver, the control constant and SSIM.

mod common;

use common::{random_u8_image, rk4_quadratic_alpha2, ssim_brute};
use hjb_restore::metrics::ssim;
use hjb_restore::radial::{constant_a, solve_radial};
use hjb_restore::{Convention, ModelParams, StateCost};

#[test]
fn boundary_value_matches_fixed_step_rk4() {
    for r_step in [0.1, 0.01] {
        let p = ModelParams {
            r_step,
            ..Default::default()
        };
        let sol = solve_radial(&p, &StateCost::Quadratic).unwrap();
        let r_end = *sol.r.last().unwrap();
        let oracle = rk4_quadratic_alpha2(&p, r_end, 1e-5);
        let scale = oracle.abs().max(1.0);
        assert!(
            (sol.g_at_r_end - oracle).abs() <= 1e-5 * scale,
            "r_step {r_step}: {} vs {oracle}",
            sol.g_at_r_end
        );
    }
}

/// `-min_{p >= 0} (p^alpha - p)` by golden-section search.
fn a_by_minimisation(alpha: f64) -> f64 {
    let phi = |p: f64| p.powf(alpha) - p;
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if phi(a) < phi(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    -phi(0.5 * (lo + hi))
}

#[test]
fn control_constant_equals_hamiltonian_minimum() {
    for k in 0..20 {
        let alpha = 1.05 + 0.05 * k as f64;
        let a = constant_a(alpha).unwrap();
        let m = a_by_minimisation(alpha);
        assert!(
            (a - m).abs() <= 1e-12 * a.max(1e-3),
            "alpha {alpha}: {a} vs {m}"
        );
    }
    assert_eq!(constant_a(2.0).unwrap(), 0.25);
}

#[test]
fn manufactured_profile_is_recovered() {
    let p = ModelParams {
        convention: Convention::Derived,
        sigma: 1.0,
        big_r: 1.0,
        r0: 0.01,
        initial_derivative: -0.01,
        r_step: 0.01,
        ..Default::default()
    };
    let h = StateCost::manufactured(&p).unwrap();
    assert!((h.eval(0.6) - (0.36 / 4.0 - 1.0)).abs() < 1e-15);
    let sol = solve_radial(&p, &h).unwrap();
    let err = sol
        .r
        .iter()
        .zip(&sol.v)
        .map(|(r, v)| (r - v).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn ssim_matches_brute_force() {
    for s in 0..20u64 {
        let a = random_u8_image(2 * s, 8, 8);
        let b = random_u8_image(2 * s + 1, 8, 8);
        let got = ssim(&a, &b, 3, 255.0).unwrap();
        let want = ssim_brute(&a, &b);
        assert!((got - want).abs() <= 1e-12, "pair {s}: {got} vs {want}");
    }
}
