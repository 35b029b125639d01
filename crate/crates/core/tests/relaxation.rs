mod common;

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use spinpair::relax::{
    bell_initial_conditions, correlation_decay, default_tau_grid, eigenmodes, fit_exponential_rates,
    fit_initial_exponential, initial_rate, relax_evolve, relaxation_rhs, simulate_decay, simulate_decay_with, DecayCurve,
    RateMatrix,
};
use spinpair::spectra::Acquisition;
use spinpair::{BellKind, Error, Execution, SpinSystem};

/// Roots of the characteristic cubic of a real symmetric 3×3 matrix by the
/// trigonometric method, ascending.
fn cubic_eigenvalues(r: &RateMatrix) -> [f64; 3] {
    let m = [
        [r.mu1, r.sigma12, r.delta1],
        [r.sigma12, r.mu2, r.delta2],
        [r.delta1, r.delta2, r.mu12],
    ];
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // λ = x + tr/3 turns λ³ − tr λ² + minors λ − det into x³ + p x + q
    let p = minors - tr * tr / 3.0;
    let q = -2.0 * tr.powi(3) / 27.0 + tr * minors / 3.0 - det;
    let amp = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q / (p * amp)).clamp(-1.0, 1.0)).acos() / 3.0;
    let mut roots = [0, 1, 2].map(|k| tr / 3.0 + amp * (arg - 2.0 * PI * k as f64 / 3.0).cos());
    roots.sort_by(f64::total_cmp);
    roots
}

#[test]
fn eigenvalues_match_the_characteristic_cubic() {
    let mut rng = common::rng(21);
    for _ in 0..200 {
        let r = common::random_rates(&mut rng);
        let modes = eigenmodes(&r).unwrap();
        let oracle = cubic_eigenvalues(&r);
        for (a, b) in modes.values.iter().zip(oracle) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {oracle:?}", modes.values);
        }
        let v = modes.vectors;
        let back = v * Matrix3::from_diagonal(&Vector3::from(modes.values)) * v.transpose();
        assert!((back - r.matrix()).abs().max() < 1e-12);
        assert!((v.transpose() * v - Matrix3::identity()).abs().max() < 1e-12);
    }
}

#[test]
fn s0_and_t0_curves_coincide_as_do_psi_curves() {
    let sys = SpinSystem::default();
    let rates = RateMatrix::calibrated(&sys);
    let taus = default_tau_grid();
    let curve = |k| simulate_decay(k, &rates, &sys, &taus).unwrap();
    assert_eq!(curve(BellKind::S0), curve(BellKind::T0));
    assert_eq!(curve(BellKind::PsiPlus), curve(BellKind::PsiMinus));
}

#[test]
fn sequential_and_parallel_grids_are_identical() {
    let sys = SpinSystem::default();
    let rates = RateMatrix::calibrated(&sys);
    let taus = default_tau_grid();
    let acq = Acquisition::default();
    let a = simulate_decay_with(BellKind::S0, &rates, &sys, &taus, &acq, Execution::Sequential).unwrap();
    let b = simulate_decay_with(BellKind::S0, &rates, &sys, &taus, &acq, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn uncoupled_curve_is_log_linear() {
    let sys = SpinSystem::default();
    let rates = RateMatrix::uncoupled(0.3, 0.25, 0.375);
    let taus = default_tau_grid();
    let curve = simulate_decay(BellKind::PsiPlus, &rates, &sys, &taus).unwrap();
    assert_eq!(curve.values[0], 1.0);
    for (t, v) in curve.times.iter().zip(&curve.values) {
        assert!((v.ln() + 0.375 * t).abs() < 1e-9, "t = {t}: {}", v.ln() + 0.375 * t);
    }
    let fit = fit_initial_exponential(&curve, 6.0).unwrap();
    assert!((fit.tau - 1.0 / 0.375).abs() < 1e-6);
    assert!(fit.rms_residual < 1e-9);
}

#[test]
fn calibrated_singlet_curve_is_visibly_multiexponential() {
    let sys = SpinSystem::default();
    let rates = RateMatrix::calibrated(&sys);
    let taus = default_tau_grid();
    let bend = |kind| {
        let curve = simulate_decay(kind, &rates, &sys, &taus).unwrap();
        let fit = fit_initial_exponential(&curve, 16.0).unwrap();
        fit.rms_residual
    };
    let (s0, psi) = (bend(BellKind::S0), bend(BellKind::PsiPlus));
    assert!(s0 > 3.0 * psi, "S0 residual {s0}, psi+ residual {psi}");
    assert!(psi < 0.01, "psi+ residual {psi}");
}

#[test]
fn three_mode_fit_recovers_the_rate_eigenvalues() {
    let sys = SpinSystem::default();
    let mut rng = common::rng(31);
    let mut resolved = 0;
    for _ in 0..20 {
        let rates = common::random_rates(&mut rng);
        let taus: Vec<f64> = (0..120).map(|k| 0.1 * k as f64).collect();
        // the signed correlation relaxes to zero, so it is a pure sum of modes
        let curve = correlation_decay(BellKind::S0, &rates, &sys, &taus).unwrap();
        let fitted = fit_exponential_rates(&curve, 3);
        let exact = eigenmodes(&rates).unwrap().values;
        // modes that barely couple into the correlation cannot be resolved
        let Ok(fitted) = fitted else { continue };
        for (f, e) in fitted.iter().zip(exact) {
            assert!((f - e).abs() < 1e-3 * e, "{fitted:?} vs {exact:?}");
        }
        resolved += 1;
    }
    assert!(resolved >= 15, "only {resolved} of 20 curves resolved into three modes");
}

#[test]
fn three_mode_fit_with_all_modes_coupled() {
    // the calibrated defaults leave ⟨S₂z⟩ decoupled (δ₂ = σ₁₂ = 0), so the
    // third mode is switched on here through σ₁₂ and δ₂
    let sys = SpinSystem::default();
    let rates = RateMatrix {
        mu1: 0.2,
        mu2: 0.6,
        sigma12: 0.08,
        delta2: 0.05,
        ..RateMatrix::calibrated(&sys)
    };
    let taus: Vec<f64> = (0..160).map(|k| 0.1 * k as f64).collect();
    let curve = correlation_decay(BellKind::S0, &rates, &sys, &taus).unwrap();
    let fitted = fit_exponential_rates(&curve, 3).unwrap();
    let exact = eigenmodes(&rates).unwrap().values;
    for (f, e) in fitted.iter().zip(exact) {
        assert!((f - e).abs() < 1e-3 * e, "{fitted:?} vs {exact:?}");
    }
}

#[test]
fn fit_on_negative_values_is_a_domain_error() {
    let curve = DecayCurve::from_csv("tau_s,ga\n0,1\n1,0.4\n2,-0.1\n3,0.05\n").unwrap();
    assert!(matches!(fit_initial_exponential(&curve, 6.0), Err(Error::FitDomain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn initial_rate_identities(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let sys = common::random_system(&mut rng);
        let r = common::random_rates(&mut rng);
        let k0 = initial_rate(&r, &bell_initial_conditions(BellKind::S0, &sys), &sys).unwrap();
        let kp = initial_rate(&r, &bell_initial_conditions(BellKind::PsiPlus, &sys), &sys).unwrap();
        let (e1, e2) = (sys.epsilon1(), sys.epsilon2());
        let scale = r.mu12 + 16.0 * (r.delta1.abs() * e1 + r.delta2.abs() * e2) / (e1 + e2);
        prop_assert!((k0 + kp - 2.0 * r.mu12).abs() < 64.0 * f64::EPSILON * scale);
        prop_assert!((k0 - kp - 16.0 * (r.delta1 * e1 + r.delta2 * e2) / (e1 + e2)).abs() < 64.0 * f64::EPSILON * scale);
    }

    #[test]
    fn numerical_initial_rate_matches(seed in any::<u64>(), k in 0usize..4) {
        let mut rng = common::rng(seed);
        let sys = common::random_system(&mut rng);
        let r = common::random_rates(&mut rng);
        let obs0 = bell_initial_conditions(BellKind::ALL[k], &sys);
        // second-order one-sided difference; τ < 0 is outside the domain
        let h = 1e-6;
        let at = |t| relax_evolve(&obs0, &r, &sys, t).unwrap().s1zs2z;
        let numeric = (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h) / obs0.s1zs2z;
        let exact = -initial_rate(&r, &obs0, &sys).unwrap();
        prop_assert!((numeric - exact).abs() < 1e-5 * exact.abs(), "{numeric} vs {exact}");
    }

    #[test]
    fn evolution_composes(seed in any::<u64>(), t1 in 0.0f64..8.0, t2 in 0.0f64..8.0) {
        let mut rng = common::rng(seed);
        let sys = common::random_system(&mut rng);
        let r = common::random_rates(&mut rng);
        let obs0 = bell_initial_conditions(BellKind::T0, &sys);
        let direct = relax_evolve(&obs0, &r, &sys, t1 + t2).unwrap();
        let stepped = relax_evolve(&relax_evolve(&obs0, &r, &sys, t1).unwrap(), &r, &sys, t2).unwrap();
        let scale = sys.epsilon1();
        prop_assert!((direct.s1z - stepped.s1z).abs() < 1e-12 * scale);
        prop_assert!((direct.s2z - stepped.s2z).abs() < 1e-12 * scale);
        prop_assert!((direct.s1zs2z - stepped.s1zs2z).abs() < 1e-12 * scale);
        let d = relaxation_rhs(&obs0, &r, &sys);
        prop_assert!(d.s1zs2z.is_finite());
    }
}
