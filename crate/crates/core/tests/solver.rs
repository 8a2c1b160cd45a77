use pbh_core::pressure::{d_mu, grad_q, grad_rho, pressure_tl, sigma_gap, OrderPoint, ThermoPoint};
use pbh_core::solver::*;
use pbh_core::{Model, ProfileKind};

fn model(u: f64) -> Model {
    Model::standard(u, 1.0, ProfileKind::Gaussian { a: 0.5 }).unwrap()
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// `ζ(3/2)` by direct summation with an Euler–Maclaurin tail.
fn zeta_three_halves() -> f64 {
    let s = 1.5;
    let n = 2000.0f64;
    let head: f64 = (1..2000).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

#[test]
fn critical_density_matches_zeta_series() {
    let zeta = zeta_three_halves();
    assert!((zeta - 2.612_375_348_685_488).abs() < 1e-13);
    let m = model(0.0);
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let exact = zeta * (m.mass() / (2.0 * std::f64::consts::PI * beta)).powf(1.5);
        let rho_c = critical_density(&m, beta, &cfg().quad).unwrap();
        assert!(((rho_c - exact) / exact).abs() < 1e-8, "beta = {beta}: {rho_c} vs {exact}");
    }
    let base = critical_density(&m, 1.0, &cfg().quad).unwrap();
    let scaled = critical_density(&m, 3.0, &cfg().quad).unwrap();
    assert!((scaled / base - 3f64.powf(-1.5)).abs() < 1e-9);
}

#[test]
fn inner_minimum_reproduces_mean_field_density() {
    let m = model(0.0);
    let tp = ThermoPoint::new(1.0, -0.2).unwrap();
    let inner = inf_rho(&m, &tp, 0.0, 0.0, &cfg()).unwrap();
    let rho_hat = mf_density(&m, &tp, &cfg().quad).unwrap();
    assert!((inner.rho_bar - rho_hat).abs() < 1e-10);
    let (r1, r2) = el_residuals(&m, &tp, &OrderPoint::new(0.0, rho_hat, 0.0).unwrap(), &cfg().quad).unwrap();
    assert!(r1.abs() < 1e-10 && r2 == 0.0);
}

#[test]
fn inner_minimum_is_stationary_with_source() {
    let m = model(0.3);
    let tp = ThermoPoint::new(1.0, -0.4).unwrap();
    let (q, eta) = (0.2, 0.05);
    let inner = inf_rho(&m, &tp, q, eta, &cfg()).unwrap();
    assert!(!inner.boundary);
    let quad = cfg().quad;
    let op = OrderPoint::new(q, inner.rho_bar, eta).unwrap();
    assert!(grad_rho(&m, &tp, &op, &quad).unwrap().abs() < 1e-10);
    let h = 1e-3;
    let at = |rho: f64| pressure_tl(&m, &tp, &OrderPoint { rho, ..op }, &quad).unwrap();
    assert!(at(inner.rho_bar + h) + at(inner.rho_bar - h) - 2.0 * at(inner.rho_bar) >= 0.0);
}

#[test]
fn condensed_minimizer_approaches_boundary() {
    let m = model(0.0);
    let tp = ThermoPoint::new(1.0, 0.3).unwrap();
    let inner = inf_rho(&m, &tp, 0.0, 1e-6, &cfg()).unwrap();
    assert!((inner.rho_bar - tp.mu / m.v()).abs() < 1e-5);
}

#[test]
fn zero_source_repulsion_has_no_pairing() {
    for u in [0.0, -0.5] {
        let m = model(u);
        let tp = ThermoPoint::new(1.0, -0.3).unwrap();
        let solved = outer_opt(&m, &tp, 0.0, &cfg()).unwrap();
        assert_eq!(solved.q_bar, 0.0);
        let mf = mf_pressure(&m, &tp, &cfg().quad).unwrap();
        assert!((solved.pressure - mf).abs() < 1e-10);
    }
}

#[test]
fn attraction_with_source_pairs_and_satisfies_euler_lagrange() {
    let m = model(0.3);
    let tp = ThermoPoint::new(1.0, -0.5).unwrap();
    let solved = outer_opt(&m, &tp, 0.05, &cfg()).unwrap();
    assert_eq!(solved.status, SolveStatus::Converged);
    assert!(solved.q_bar > 0.0);
    assert!(solved.residual_el1.abs() <= 1e-8 && solved.residual_el2.abs() <= 1e-8);
    let op = OrderPoint::new(solved.q_bar, solved.rho_bar, solved.eta).unwrap();
    let quad = cfg().quad;
    // d_mu = ρ − (1/v) ∂p/∂ρ, so at the optimum it returns ρ̄
    assert!((d_mu(&m, &tp, &op, &quad).unwrap() - solved.rho_bar).abs() < 1e-8);
}

#[test]
fn residuals_agree_with_derivatives() {
    let quad = cfg().quad;
    for (u, q, rho, eta) in [(0.3, 0.2, 0.6, 0.05), (-0.4, 0.1, 0.3, 0.2), (0.7, 0.5, 0.9, 0.0)] {
        let m = model(u);
        let tp = ThermoPoint::new(1.3, -0.2).unwrap();
        let op = OrderPoint::new(q, rho, eta).unwrap();
        let (r1, r2) = el_residuals(&m, &tp, &op, &quad).unwrap();
        let g_rho = grad_rho(&m, &tp, &op, &quad).unwrap();
        let g_q = grad_q(&m, &tp, &op, &quad).unwrap();
        assert!((r1 - g_rho / m.v()).abs() < 1e-10, "{r1} vs {}", g_rho / m.v());
        assert!((r2 + g_q / u).abs() < 1e-10, "{r2} vs {}", -g_q / u);
    }
}

#[test]
fn sup_inf_dominance() {
    let m = model(0.3);
    let tp = ThermoPoint::new(1.0, -0.5).unwrap();
    let eta = 0.05;
    let solved = outer_opt(&m, &tp, eta, &cfg()).unwrap();
    let quad = cfg().quad;
    for factor in [0.5, 0.9, 1.1, 2.0] {
        let q = solved.q_bar * factor;
        let inner = inf_rho(&m, &tp, q, eta, &cfg()).unwrap();
        assert!(inner.value <= solved.pressure + 1e-12);
    }
    let op = OrderPoint::new(solved.q_bar, solved.rho_bar, eta).unwrap();
    for shift in [-0.05, 0.05, 0.3] {
        let shifted = OrderPoint { rho: solved.rho_bar + shift, ..op };
        if sigma_gap(&m, &tp, &shifted) > 0.0 {
            assert!(pressure_tl(&m, &tp, &shifted, &quad).unwrap() >= solved.pressure - 1e-12);
        }
    }
}

#[test]
fn mean_field_below_condensation() {
    let m = model(0.0);
    let tp = ThermoPoint::new(1.0, -0.1).unwrap();
    let run = eta_continuation(&m, &tp, &cfg()).unwrap();
    let mf = mf_pressure(&m, &tp, &cfg().quad).unwrap();
    assert!((run.limits.pressure.value - mf).abs() < 1e-8);
    assert!(run.limits.q_limit.value <= 1e-6);
    assert!(run.limits.m0.value <= 1e-6);
    assert_eq!(classify_phase(&m, &tp, &run, &cfg()).unwrap(), PhaseLabel::Normal);
}

#[test]
fn repulsive_pairing_bound_along_continuation() {
    let m = model(-0.5);
    let tp = ThermoPoint::new(1.0, 0.3).unwrap();
    let run = eta_continuation(&m, &tp, &cfg()).unwrap();
    let w: f64 = 0.5;
    for step in &run.steps {
        assert!(step.q_bar < step.eta.powf(2.0 / 3.0) / (2.0 * w).powf(2.0 / 3.0), "{step:?}");
    }
    let mf = mf_pressure(&m, &tp, &cfg().quad).unwrap();
    assert!((run.limits.pressure.value - mf).abs() < 1e-8);
    assert!(run.limits.q_limit.value <= 1e-6);
    assert_eq!(classify_phase(&m, &tp, &run, &cfg()).unwrap(), PhaseLabel::MfCondensed);
}

#[test]
fn attractive_condensate_is_gapless() {
    let m = model(0.5);
    let tp = ThermoPoint::new(1.0, 1.0).unwrap();
    let run = eta_continuation(&m, &tp, &cfg()).unwrap();
    assert!(run.limits.m0.value > cfg().m0_tol);
    for pair in run.steps.windows(2) {
        assert!(pair[1].gap <= pair[0].gap);
    }
    assert!(run.limits.gap_limit.value <= 1e-4);
    assert_eq!(classify_phase(&m, &tp, &run, &cfg()).unwrap(), PhaseLabel::Condensed);

    let spectrum = excitation_spectrum(&m, &tp, &run, &[0.0, 0.5, 30.0]);
    assert!(spectrum[0].e_excit <= cfg().gap_tol);
    let f_far = m.epsilon_radial(30.0) - tp.mu + m.v() * run.limits.rho_limit.value;
    assert!((spectrum[2].e_excit / f_far - 1.0).abs() < 1e-12);
}

#[test]
fn unpaired_spectrum_is_shifted_free_dispersion() {
    let m = model(0.0);
    let tp = ThermoPoint::new(1.0, -0.1).unwrap();
    let run = eta_continuation(&m, &tp, &cfg()).unwrap();
    let rho = run.limits.rho_limit.value;
    for point in excitation_spectrum(&m, &tp, &run, &[0.0, 0.3, 1.0, 4.0]) {
        let f = m.epsilon_radial(point.k) - tp.mu + m.v() * rho;
        assert!((point.e_excit - f).abs() < 1e-10);
    }
}

#[test]
fn pair_only_label_needs_pairing_without_condensate() {
    let m = model(0.5);
    let tp = ThermoPoint::new(1.0, 0.2).unwrap();
    let mut run = eta_continuation(&m, &tp, &cfg()).unwrap();
    run.limits.m0.value = 0.0;
    run.limits.q_limit.value = 0.3;
    assert_eq!(classify_phase(&m, &tp, &run, &cfg()).unwrap(), PhaseLabel::PairOnly);
    run.limits.q_limit.value = 0.0;
    assert_eq!(classify_phase(&m, &tp, &run, &cfg()).unwrap(), PhaseLabel::Normal);
}
