use proptest::prelude::*;
use signorini::exact::{regular_profile, ProfileSpec};
use signorini::free_boundary::{extract_contact, extract_free_boundary};
use signorini::solver::{solve, BoundaryData, ProblemSpec};
use signorini::{Direction, ScalarField};

fn max_error(u: &ScalarField, f: impl Fn(&[f64]) -> f64) -> f64 {
    let g = u.grid();
    (0..g.node_count())
        .map(|i| {
            let p = g.position(i);
            (u.values()[i] - f(&p[..g.dim()])).abs()
        })
        .fold(0.0, f64::max)
}

fn regular_2d(m: usize) -> ScalarField {
    let spec = ProblemSpec::new(2, m, BoundaryData::Profile(ProfileSpec::regular(2)));
    solve(&spec).unwrap().field
}

#[test]
fn manufactured_regular_profile_converges() {
    let axis = Direction::axis(2, 0);
    let exact = |p: &[f64]| regular_profile(p, &axis);
    let coarse = max_error(&regular_2d(65), exact);
    let fine = max_error(&regular_2d(129), exact);
    assert!(fine <= 2e-2, "error {fine}");
    assert!(coarse / fine >= 1.5, "ratio {}", coarse / fine);
}

#[test]
fn energy_never_increases_with_plain_gauss_seidel() {
    let mut spec = ProblemSpec::new(2, 65, BoundaryData::Profile(ProfileSpec::regular(2)));
    spec.nested_start = false;
    let r = solve(&spec).unwrap();
    for pair in r.energy_history.windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "{} -> {}", pair[0], pair[1]);
    }
}

#[test]
fn reflection_symmetric_data_gives_symmetric_solution() {
    let spec = ProblemSpec::new(
        2,
        65,
        BoundaryData::Custom(std::sync::Arc::new(|p: &[f64]| p[0] * p[0] - 0.3)),
    );
    let u = solve(&spec).unwrap().field;
    let g = *u.grid();
    let m = g.m();
    for i in 0..m {
        for j in 0..m {
            let a = u.values()[g.index(&[i, j])];
            let b = u.values()[g.index(&[m - 1 - i, j])];
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
    }
    // and symmetric in x_n by construction
    assert!(u.is_symmetric());
}

#[test]
fn three_dimensional_contact_is_a_graph() {
    let mut spec = ProblemSpec::default_scenario();
    spec.m = 33;
    let r = solve(&spec).unwrap();
    assert!(r.complementarity_within_tolerance());
    let fb = extract_free_boundary(&extract_contact(&r.field, None)).unwrap();
    let graph = fb.graph.unwrap();
    assert!(graph.samples.iter().filter(|s| !s.untrusted).all(|s| s.value.is_some()));
    // the contact set sits strictly below the line x_2 = 0 where g changes sign
    assert!(graph.points().iter().all(|p| p[1] < 0.0));
}

fn bounds(u: &ScalarField) -> (f64, f64) {
    u.values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounded_by_data_and_obstacle(a in -1.0f64..1.0, b in -0.5f64..0.5) {
        let spec = ProblemSpec::new(2, 17, BoundaryData::Shifted(Box::new(BoundaryData::Linear(vec![a])), b));
        let r = solve(&spec).unwrap();
        let (lo, hi) = bounds(&r.field);
        let g_min = -a.abs() + b;
        let g_max = a.abs() + b;
        prop_assert!(lo >= g_min.min(0.0) - 1e-9);
        prop_assert!(hi <= g_max.max(0.0) + 1e-9);
        // the obstacle holds up to the sweep tolerance
        prop_assert!(r.complementarity.max_violation_u <= 1e-8);
    }

    #[test]
    fn larger_data_gives_larger_solution(a in -1.0f64..1.0, b in -0.5f64..0.5, lift in 0.0f64..0.3) {
        let base = BoundaryData::Shifted(Box::new(BoundaryData::Linear(vec![a])), b);
        let low = solve(&ProblemSpec::new(2, 17, base.clone())).unwrap().field;
        let high = solve(&ProblemSpec::new(2, 17, BoundaryData::Shifted(Box::new(base), lift))).unwrap().field;
        for (x, y) in low.values().iter().zip(high.values()) {
            prop_assert!(x <= &(y + 1e-8));
        }
    }
}

#[test]
fn comparison_in_three_dimensions() {
    let g = BoundaryData::last_tangential(3);
    let mut low = ProblemSpec::new(3, 17, g.clone());
    low.eps_sweep = Some(1e-12);
    let mut high = low.clone();
    high.boundary = BoundaryData::Shifted(Box::new(g), 0.1);
    let (u, v) = (solve(&low).unwrap().field, solve(&high).unwrap().field);
    assert!(u.values().iter().zip(v.values()).all(|(a, b)| a <= &(b + 1e-10)));
    let shift = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max);
    assert!(shift <= 0.1 + 1e-10);
}
