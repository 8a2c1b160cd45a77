use pbh_core::pressure::{
    d2_mu, d_mu, d_mu_with, grad_q, grad_rho, pressure_tl, MuSourceReading, OrderPoint, ThermoPoint,
};
use pbh_core::quad::QuadratureConfig;
use pbh_core::{Model, ProfileKind};
use proptest::prelude::*;

fn tight() -> QuadratureConfig {
    QuadratureConfig::with_tol(1e-13, 1e-15)
}

fn first_difference(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
}

fn second_difference(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-g(x + 2.0 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2.0 * h)) / (12.0 * h * h)
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    u: f64,
    a: f64,
    beta: f64,
    mu: f64,
    q: f64,
    sigma: f64,
    eta: f64,
}

fn sample() -> impl Strategy<Value = Sample> {
    (
        -0.8f64..0.8,
        0.2f64..2.0,
        0.5f64..3.0,
        -1.0f64..0.5,
        0.05f64..1.0,
        0.2f64..1.5,
        0.0f64..0.5,
    )
        .prop_map(|(u, a, beta, mu, q, sigma, eta)| Sample { u, a, beta, mu, q, sigma, eta })
}

fn setup(s: &Sample) -> (Model, ThermoPoint, OrderPoint) {
    let model = Model::standard(s.u, 1.0, ProfileKind::Gaussian { a: s.a }).unwrap();
    let tp = ThermoPoint::new(s.beta, s.mu).unwrap();
    let rho = (s.mu + s.u.abs() * s.q + s.sigma).max(0.0) + 0.01;
    (model, tp, OrderPoint::new(s.q, rho, s.eta).unwrap())
}

fn close(analytic: f64, numeric: f64, tol: f64) -> bool {
    (analytic - numeric).abs() <= tol * numeric.abs().max(1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn derivatives_match_finite_differences(s in sample()) {
        let (model, tp, op) = setup(&s);
        let quad = tight();
        let p_rho = |rho: f64| pressure_tl(&model, &tp, &OrderPoint { rho, ..op }, &quad).unwrap();
        let p_q = |q: f64| pressure_tl(&model, &tp, &OrderPoint { q, ..op }, &quad).unwrap();
        let p_mu = |mu: f64| pressure_tl(&model, &ThermoPoint { mu, ..tp }, &op, &quad).unwrap();

        let scale = pbh_core::pressure::source_denominator(&model, &tp, &op).min(1.0);
        let fd = first_difference(p_rho, op.rho, 1e-3 * scale);
        let an = grad_rho(&model, &tp, &op, &quad).unwrap();
        prop_assert!(close(an, fd, 1e-6), "grad_rho {an} vs {fd}");

        let fd = first_difference(p_q, op.q, 1e-3 * op.q);
        let an = grad_q(&model, &tp, &op, &quad).unwrap();
        prop_assert!(close(an, fd, 1e-6), "grad_q {an} vs {fd}");

        let fd = first_difference(p_mu, tp.mu, 1e-3 * scale);
        let an = d_mu(&model, &tp, &op, &quad).unwrap();
        prop_assert!(close(an, fd, 1e-6), "d_mu {an} vs {fd}");

        let fd = second_difference(p_mu, tp.mu, 1e-2 * scale);
        let an = d2_mu(&model, &tp, &op, &quad).unwrap();
        prop_assert!(close(an, fd, 1e-6), "d2_mu {an} vs {fd}");
    }

    #[test]
    fn bogoliubov_identities(s in sample(), r in 0.0f64..6.0) {
        let (model, tp, op) = setup(&s);
        let e = pbh_core::pressure::spectral(&model, &tp, &op, &[r, 0.0, 0.0]).unwrap();
        prop_assert!((e.e * e.e + e.h_abs * e.h_abs - e.f * e.f).abs() <= 1e-12 * e.f * e.f);
        prop_assert!((e.x_sq - e.y_sq - 1.0).abs() <= 1e-12 * e.x_sq);
        if s.u > 0.0 {
            let denom = pbh_core::pressure::source_denominator(&model, &tp, &op);
            prop_assert!(e.e * e.e >= denom * s.u * op.q * (1.0 - 1e-12));
        }
    }

    #[test]
    fn pressure_nondecreasing_in_eta(s in sample(), extra in 0.0f64..0.5) {
        let (model, tp, op) = setup(&s);
        let quad = QuadratureConfig::default();
        let lower = pressure_tl(&model, &tp, &op, &quad).unwrap();
        let upper = pressure_tl(&model, &tp, &OrderPoint { eta: op.eta + extra, ..op }, &quad).unwrap();
        prop_assert!(upper >= lower - 1e-12 * lower.abs());
    }

    #[test]
    fn densities_nonnegative(s in sample()) {
        let (model, tp, op) = setup(&s);
        let quad = QuadratureConfig::default();
        prop_assert!(d_mu(&model, &tp, &op, &quad).unwrap() >= 0.0);
        prop_assert!(d2_mu(&model, &tp, &op, &quad).unwrap() >= 0.0);
    }
}

#[test]
fn printed_mu_source_reading_fails_for_v_not_one() {
    let model = Model::standard(0.3, 2.0, ProfileKind::Gaussian { a: 0.5 }).unwrap();
    let tp = ThermoPoint::new(1.0, -0.4).unwrap();
    let op = OrderPoint::new(0.3, 0.5, 0.3).unwrap();
    let quad = tight();
    let numeric = first_difference(
        |mu| pressure_tl(&model, &ThermoPoint { mu, ..tp }, &op, &quad).unwrap(),
        tp.mu,
        1e-4,
    );
    let consistent = d_mu_with(&model, &tp, &op, &quad, MuSourceReading::Consistent).unwrap();
    let printed = d_mu_with(&model, &tp, &op, &quad, MuSourceReading::AsPrinted).unwrap();
    assert!(close(consistent, numeric, 1e-8));
    assert!(!close(printed, numeric, 1e-3));
}
