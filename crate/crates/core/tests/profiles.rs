use proptest::prelude::*;
use signorini::exact::{derivative_w, lewy_family, regular_profile, LewyType, ProfileSpec};
use signorini::{Direction, Grid, ScalarField};

fn all_profiles() -> Vec<ProfileSpec> {
    vec![
        ProfileSpec::regular(3),
        ProfileSpec::Regular {
            axis: Direction::new(&[0.6, 0.8, 0.0]).unwrap(),
        },
        ProfileSpec::DerivativeW {
            axis: Direction::axis(3, 0),
        },
        ProfileSpec::Lewy2D { k: 1, kind: LewyType::HalfInteger },
        ProfileSpec::Lewy2D { k: 3, kind: LewyType::HalfInteger },
        ProfileSpec::Lewy2D { k: 2, kind: LewyType::Even },
        ProfileSpec::Quadratic { a: vec![0.25, 0.75], c: 1.0 },
    ]
}

fn point(dim: usize, v: [f64; 3]) -> Vec<f64> {
    v[..dim].to_vec()
}

proptest! {
    #[test]
    fn homogeneity(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        for spec in all_profiles() {
            let dim = spec.dim().unwrap();
            let p = point(dim, [x, y, z]);
            let mu = spec.homogeneity();
            for lambda in [0.5, 2.0] {
                let scaled: Vec<f64> = p.iter().map(|c| lambda * c).collect();
                let expect = lambda.powf(mu) * spec.evaluate(&p);
                prop_assert!((spec.evaluate(&scaled) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn even_in_the_normal_variable(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        for spec in all_profiles() {
            let dim = spec.dim().unwrap();
            let p = point(dim, [x, y, z]);
            let mut q = p.clone();
            q[dim - 1] = -q[dim - 1];
            prop_assert_eq!(spec.evaluate(&p), spec.evaluate(&q));
        }
    }

    #[test]
    fn w_is_nonnegative(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, angle in 0.0f64..6.3) {
        let axis = Direction::in_plane(3, angle);
        prop_assert!(derivative_w(&[x, y, z], &axis) >= 0.0);
    }

    #[test]
    fn regular_profile_obstacle_holds_on_the_plane(s in -1.0f64..1.0, angle in 0.0f64..6.3) {
        let axis = Direction::in_plane(3, angle);
        let p = [s * axis.components()[0], s * axis.components()[1], 0.0];
        let v = regular_profile(&p, &axis);
        prop_assert!(v >= -1e-15);
        if s < 0.0 {
            prop_assert!(v.abs() < 1e-15);
        }
    }
}

/// Largest `|Delta_h u|` over interior nodes at least `min_dist` from the
/// profile's non-smooth set `{x_1 <= 0, x_n = 0}`.
fn laplacian_defect(spec: &ProfileSpec, m: usize, min_dist: f64) -> f64 {
    let dim = spec.dim().unwrap();
    let grid = Grid::new(dim, m, 1.0).unwrap();
    let u = ScalarField::sample(grid, |p| spec.evaluate(p)).unwrap();
    let mut worst: f64 = 0.0;
    for index in 0..grid.node_count() {
        let multi = grid.multi_index(index);
        if grid.is_boundary(&multi[..dim]) {
            continue;
        }
        let p = grid.position(index);
        let normal = p[dim - 1].abs();
        let dist = if p[0] <= 0.0 { normal } else { p[0].hypot(normal) };
        if dist >= min_dist {
            worst = worst.max(u.discrete_laplacian(index).abs());
        }
    }
    worst
}

#[test]
fn discrete_laplacian_is_second_order_off_the_slit() {
    let specs = [
        ProfileSpec::Regular { axis: Direction::axis(3, 0) },
        // w has its kink on the ray where it vanishes, opposite to its axis
        ProfileSpec::DerivativeW { axis: Direction::new(&[-1.0, 0.0]).unwrap() },
        ProfileSpec::Lewy2D { k: 2, kind: LewyType::HalfInteger },
    ];
    for spec in &specs {
        let coarse = laplacian_defect(spec, 33, 0.25);
        let fine = laplacian_defect(spec, 65, 0.25);
        let h = 1.0 / 32.0;
        // the defect is h^2 / 12 times fourth derivatives of size
        // rho^(mu - 4), so bounded by C h^2 at a fixed distance and by
        // C h^2 (4h)^(mu - 4) next to the singular set
        let mu = spec.homogeneity();
        assert!(fine <= 0.5 * h * h * 0.25f64.powf(mu - 4.0), "{spec:?}: {fine}");
        assert!(coarse / fine > 3.5, "{spec:?}: {coarse} {fine}");
        let near = laplacian_defect(spec, 65, 4.0 * h);
        assert!(near <= 0.5 * h * h * (4.0 * h).powf(mu - 4.0), "{spec:?}: {near}");
    }
    let quadratic = ProfileSpec::Quadratic { a: vec![1.0, 1.0], c: 2.0 };
    assert!(laplacian_defect(&quadratic, 33, 0.0) < 1e-12);
}

#[test]
fn lewy_solutions_vanish_on_the_slit() {
    for k in 1..5 {
        let v = lewy_family(k, LewyType::HalfInteger, &[-0.7, 0.0]);
        assert!(v.abs() < 1e-12, "k={k}: {v}");
    }
}
