use proptest::prelude::*;
use signorini::blowup::{fit_profile, rescale, BlowupClass, BlowupOptions};
use signorini::exact::{lewy_family, regular_profile, LewyType};
use signorini::frequency::{default_radii, estimate_mu, frequency_profile};
use signorini::{Direction, Grid, ScalarField};

fn sampled(dim: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> ScalarField {
    ScalarField::sample(Grid::new(dim, m, 1.0).unwrap(), f).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rescaled_fields_have_unit_sphere_norm(
        scale in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
        cx in -0.3f64..0.3,
        r in 0.05f64..0.3,
    ) {
        let axis = Direction::axis(2, 0);
        let u = sampled(2, 65, |p| scale * (regular_profile(p, &axis) + 0.3 * p[0]));
        let v = rescale(&u, &[cx, 0.0], r, 2.0, 33).unwrap();
        prop_assert!((v.unit_sphere_norm().unwrap() - 1.0).abs() <= 1e-3);
    }
}

#[test]
fn homogeneous_profiles_are_fixed_points() {
    // v_r of a homogeneous u is u / |u|_{L2(dB_1)} for every r
    let u = sampled(2, 129, |p| lewy_family(2, LewyType::HalfInteger, p));
    let a = rescale(&u, &[0.0, 0.0], 0.1, 2.0, 65).unwrap();
    let b = rescale(&u, &[0.0, 0.0], 0.2, 2.0, 65).unwrap();
    let scale = a.normalization() / b.normalization();
    assert!((scale - 2f64.powf(-2.5)).abs() < 1e-2 * scale, "{scale}");
    let diff = a
        .field()
        .values()
        .iter()
        .zip(b.field().values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let size = a.field().max_abs();
    assert!(diff < 1e-2 * size, "{diff} of {size}");
}

#[test]
fn profile_mu_agrees_with_source_frequency() {
    let axis = Direction::axis(3, 1);
    let u = sampled(3, 129, |p| regular_profile(p, &axis));
    let center = [0.0, 0.0, 0.0];
    let source = estimate_mu(&frequency_profile(&u, &center, &default_radii(u.grid(), &center)).unwrap())
        .unwrap()
        .mu;
    let options = BlowupOptions::default();
    let v = rescale(&u, &center, 0.125, options.outer_radius, options.nodes).unwrap();
    let fit = fit_profile(&v, &options).unwrap();
    assert_eq!(fit.class, BlowupClass::Regular);
    assert!((fit.mu.unwrap().mu - source).abs() <= 0.05);
}
