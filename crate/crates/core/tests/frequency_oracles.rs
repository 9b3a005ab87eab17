use proptest::prelude::*;
use signorini::exact::{LewyType, ProfileSpec};
use signorini::frequency::{
    ball_integrals, default_radii, estimate_mu, frequency_profile, monotonicity_report,
};
use signorini::quadrature::sphere_area;
use signorini::{Direction, Grid, ScalarField};

fn sampled(dim: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> ScalarField {
    ScalarField::sample(Grid::new(dim, m, 1.0).unwrap(), f).unwrap()
}

fn mu_of(u: &ScalarField) -> f64 {
    let center = vec![0.0; u.grid().dim()];
    let report = frequency_profile(u, &center, &default_radii(u.grid(), &center)).unwrap();
    let mono = monotonicity_report(&report, 0.0).unwrap();
    assert!(mono.is_clean(), "{:?} {mono:?}", report.samples.iter().map(|s| s.d_r).collect::<Vec<_>>());
    estimate_mu(&report).unwrap().mu
}

#[test]
fn homogeneous_fields_recover_their_degree() {
    let cases = [
        (ProfileSpec::DerivativeW { axis: Direction::axis(2, 0) }, 0.03),
        (ProfileSpec::regular(2), 0.03),
        (ProfileSpec::Lewy2D { k: 1, kind: LewyType::Even }, 0.03),
        (ProfileSpec::Lewy2D { k: 2, kind: LewyType::HalfInteger }, 0.03),
    ];
    for (spec, tol) in cases {
        let u = sampled(2, 129, |p| spec.evaluate(p));
        let mu = mu_of(&u);
        assert!((mu - spec.homogeneity()).abs() <= tol, "{spec:?}: {mu}");
    }
    let linear = sampled(2, 129, |p| p[0]);
    assert!((mu_of(&linear) - 1.0).abs() <= 0.02);
}

#[test]
fn sphere_integral_matches_closed_form() {
    // x_1^2 averages to r^4/5 of x_1^4 over a sphere in 3D
    let u = sampled(3, 65, |p| p[0] * p[0]);
    let r = 0.4;
    let b = ball_integrals(&u, &[0.0, 0.0, 0.0], r).unwrap();
    let exact = sphere_area(3, r) * r.powi(4) / 5.0;
    assert!(((b.s_r - exact) / exact).abs() < 5e-3, "{} {exact}", b.s_r);
    // Dirichlet energy of x_1^2 over B_r is 4 * (4 pi r^5 / 15)
    let exact_v = 16.0 * std::f64::consts::PI * r.powi(5) / 15.0;
    assert!(((b.v_r - exact_v) / exact_v).abs() < 1e-2, "{} {exact_v}", b.v_r);
}

#[test]
fn frequency_error_shrinks_with_resolution() {
    let spec = ProfileSpec::regular(2);
    let at = |m: usize| {
        let u = sampled(2, m, |p| spec.evaluate(p));
        let report = frequency_profile(&u, &[0.0, 0.0], &[0.25]).unwrap();
        (report.samples[0].d_r.unwrap() - 1.5).abs()
    };
    let (coarse, fine) = (at(33), at(129));
    assert!(fine < coarse, "{coarse} {fine}");
    assert!(fine < 5e-3, "{fine}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scale_invariant(c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let spec = ProfileSpec::regular(2);
        let u = sampled(2, 65, |p| spec.evaluate(p));
        let radii = [0.2, 0.3];
        let a = frequency_profile(&u, &[0.0, 0.0], &radii).unwrap();
        let b = frequency_profile(&u.scaled(c), &[0.0, 0.0], &radii).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            let (dx, dy) = (x.d_r.unwrap(), y.d_r.unwrap());
            prop_assert!((dx - dy).abs() < 1e-12 * dx.abs());
        }
    }
}
