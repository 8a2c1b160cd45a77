use num_complex::Complex64;
use pbh_core::oracle::*;
use pbh_core::pressure::{OrderPoint, ThermoPoint};
use pbh_core::{CouplingProfile, Model, ProfileKind};
use proptest::prelude::*;

fn line_model(u: f64, a: f64) -> Model {
    Model::new(1, 0.5, u, 1.0, CouplingProfile::with_default_decay(ProfileKind::Gaussian { a }, 1).unwrap()).unwrap()
}

fn fock(n_max: u32, l: f64) -> Fock {
    Fock::new(FockSpec::new(FockSpec::axis_modes(l, 1), n_max)).unwrap()
}

#[test]
fn desk_instance_passes_every_check() {
    for u in [0.5, -0.5] {
        let report = run_suite(&OracleInstance::desk(u).unwrap()).unwrap();
        assert!(report.passed, "u = {u}: {report:?}");
        assert!(report.decomposition.full_minus_parts <= IDENTITY_TOL);
        assert!(report.decomposition.approx_difference <= IDENTITY_TOL);
    }
}

#[test]
fn corrupted_residual_sign_is_caught() {
    let mut instance = OracleInstance::desk(0.5).unwrap();
    instance.corrupt_residual_sign = true;
    assert!(!run_suite(&instance).unwrap().passed);
}

#[test]
fn closed_form_agrees_with_trace() {
    let model = line_model(0.5, 1.0);
    let modes = FockSpec::axis_modes(std::f64::consts::TAU, 1);
    let tp = ThermoPoint::new(1.0, -1.0).unwrap();
    let op = OrderPoint::new(0.3, 0.4, 0.1).unwrap();
    let rows = truncation_study(&model, &modes, &[6, 9, 12], &tp, 2.0, &op).unwrap();
    let errors: Vec<f64> = rows.iter().map(|r| r.rel_error.unwrap()).collect();
    assert!(errors[2] <= 1e-4);
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

#[test]
fn chain_at_gibbs_pairing_is_near_tight() {
    let instance = OracleInstance::desk(0.5).unwrap();
    let report = run_suite(&instance).unwrap();
    let chain = &report.chain;
    assert!(chain.slack_at_gibbs_q >= -INEQUALITY_TOL);
    assert!(chain.slack_at_gibbs_q <= chain.min_first_slack + 1e-6);
}

#[test]
fn repulsive_residual_flips_sign() {
    let f = fock(4, 3.0);
    let model = line_model(-0.6, 0.4);
    let points = residual_report(&f, &model, 1.7, &[0.0, 0.2, 0.9], ResidualSign::NonNegative).unwrap();
    assert!(points.iter().all(|p| p.passed));
    let flipped = residual_report(&f, &model, 1.7, &[0.2], ResidualSign::NonPositive).unwrap();
    assert!(!flipped[0].passed);
}

#[test]
fn truncated_space_above_gap_edge_keeps_growing() {
    let model = line_model(0.5, 1.0);
    let modes = FockSpec::axis_modes(std::f64::consts::TAU, 1);
    let tp = ThermoPoint::new(1.0, -1.0).unwrap();
    let op = OrderPoint::new(4.0, 0.4, 0.1).unwrap();
    let rows = truncation_study(&model, &modes, &[4, 6, 8], &tp, 2.0, &op).unwrap();
    assert!(rows.iter().all(|r| r.closed_form.is_none()));
    assert!(rows[0].trace_pressure < rows[1].trace_pressure && rows[1].trace_pressure < rows[2].trace_pressure);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, .. ProptestConfig::default() })]

    #[test]
    fn gauge_covariance(u in -0.8f64..0.8, a in 0.1f64..2.0, q in 0.0f64..1.0, eta in 0.0f64..0.5, phi in -3.0f64..3.0) {
        let f = fock(4, 4.0);
        let model = line_model(u, a);
        let tp = ThermoPoint::new(0.8, -0.3).unwrap();
        let b = Builder::new(&f, &model, 2.5).unwrap();
        let eta_r = Complex64::from_polar(eta, phi);
        let q_r = Complex64::from_polar(q, 2.0 * phi);
        let plain = b.pressure(HamiltonianKind::approx1(q, eta), &tp).unwrap();
        let rotated = b.pressure(HamiltonianKind::Approx1 { q: q_r, eta: eta_r, nu: Complex64::new(0.0, 0.0) }, &tp).unwrap();
        prop_assert!((plain - rotated).abs() < 1e-12);
        let plain = b.pressure(HamiltonianKind::full(eta), &tp).unwrap();
        let rotated = b.pressure(HamiltonianKind::Full { eta: eta_r, nu: Complex64::new(0.0, 0.0) }, &tp).unwrap();
        prop_assert!((plain - rotated).abs() < 1e-12);
    }

    #[test]
    fn inequality_chain(u in 0.05f64..0.9, a in 0.1f64..2.0, beta in 0.3f64..3.0, mu in -1.5f64..1.0, volume in 0.5f64..6.0) {
        let f = fock(4, 3.0);
        let model = line_model(u, a);
        let tp = ThermoPoint::new(beta, mu).unwrap();
        let report = variational_chain(&f, &model, &tp, volume, &[0.0, 0.3, 1.0], &[0.0, 0.5, 2.0], 0.2).unwrap();
        prop_assert!(report.passed, "{:?}", report);
        let repulsive = line_model(-u, a);
        let flipped = variational_chain(&f, &repulsive, &tp, volume, &[0.0, 0.3, 1.0], &[0.5], 0.2).unwrap();
        prop_assert_eq!(flipped.first_direction, ResidualSign::NonNegative);
        prop_assert!(flipped.passed, "{:?}", flipped);
    }

    #[test]
    fn superstability_bounds(u in 0.05f64..0.95, a in 0.05f64..2.0, volume in 0.3f64..5.0, n_max in 2u32..6) {
        let f = fock(n_max, 2.0);
        let report = check_superstability(&f, &line_model(u, a), volume).unwrap();
        prop_assert!(report.passed, "{:?}", report);
    }

    #[test]
    fn hermitian_builds(u in -0.8f64..0.8, q in 0.0f64..1.0, rho in 0.0f64..2.0, eta in 0.0f64..0.5) {
        let f = fock(3, 2.0);
        let model = line_model(u, 0.7);
        for kind in [
            HamiltonianKind::full(eta),
            HamiltonianKind::approx1(q, eta),
            HamiltonianKind::approx2(q, rho, eta),
            HamiltonianKind::residual(q),
            HamiltonianKind::MeanField,
        ] {
            prop_assert!(build_hamiltonian(&f, kind, &model, 1.3).unwrap().hermiticity_error() <= 1e-12);
        }
    }

    #[test]
    fn traces_nondecreasing_in_cutoff(u in -0.8f64..0.8, mu in -1.0f64..0.5, eta in 0.0f64..0.4) {
        let model = line_model(u, 0.6);
        let tp = ThermoPoint::new(1.0, mu).unwrap();
        let mut previous = f64::NEG_INFINITY;
        for n_max in [2, 3, 4] {
            let f = fock(n_max, 3.0);
            let p = Builder::new(&f, &model, 2.0).unwrap().pressure(HamiltonianKind::full(eta), &tp).unwrap();
            prop_assert!(p >= previous - 1e-13);
            previous = p;
        }
    }
}
