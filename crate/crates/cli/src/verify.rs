//! The built-in verification suite: closed-form oracles, the solved
//! default and degenerate scenarios, and the invariants of every module.
//!
//! Checks are grouped under ten numbered criteria; group 10 also holds the
//! cheap per-module invariants and the total runtime bound.

use std::f64::consts::FRAC_PI_3;
use std::fmt;
use std::time::Instant;

use serde::Serialize;
use signorini::blowup::{classify_point, fit_profile, probe_points, rescale, BlowupClass, PointClassification};
use signorini::exact::{derivative_w, lewy_family, regular_profile, regular_profile_gradient, LewyType, ProfileSpec};
use signorini::free_boundary::{
    barrier_check, barrier_delta, cone_monotonicity, extract_contact, extract_free_boundary, measure_c0,
    quotient_diagnostic,
};
use signorini::frequency::{default_radii, estimate_mu, frequency_profile, monotonicity_report, FrequencyReport};
use signorini::io::{read_field, write_field};
use signorini::quadrature::SphereRule;
use signorini::solver::{solve, BoundaryData, ProblemSpec, SolveResult};
use signorini::{Direction, Grid, ScalarField};

use crate::error::Result;
use crate::pipeline::{self, SEMICONVEXITY_C};
use crate::scenario::Scenario;

/// Wall-clock budget of the whole suite in seconds.
pub const RUNTIME_BUDGET: f64 = 300.0;
/// Wall-clock budget of one frequency oracle in seconds.
pub const ORACLE_BUDGET: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {:>2} {}: {}", self.criterion, self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub elapsed: f64,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn criterion(&self, k: u8) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.criterion == k)
    }

    /// A criterion passes when it has checks and all of them pass.
    pub fn criterion_passes(&self, k: u8) -> bool {
        let mut any = false;
        for c in self.criterion(k) {
            any = true;
            if !c.pass {
                return false;
            }
        }
        any
    }

    pub fn to_text(&self) -> String {
        let mut out: String = self.checks.iter().map(|c| format!("{c}\n")).collect();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), self.failures()));
        out
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn check(&mut self, criterion: u8, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            criterion,
            name: name.into(),
            detail,
            pass,
        });
    }

    /// Records an error as a failed check instead of aborting the suite.
    fn attempt<T, E: fmt::Display>(&mut self, criterion: u8, name: &str, result: std::result::Result<T, E>) -> Option<T> {
        match result {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(criterion, name, false, format!("error: {e}"));
                None
            }
        }
    }
}

fn sampled(dim: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> signorini::Result<ScalarField> {
    ScalarField::sample(Grid::new(dim, m, 1.0)?, f)
}

fn origin(dim: usize) -> Vec<f64> {
    vec![0.0; dim]
}

fn solve_partial(spec: &ProblemSpec) -> signorini::Result<SolveResult> {
    match solve(spec) {
        Err(signorini::Error::NotConverged(r)) => Ok(*r),
        other => other,
    }
}

fn energy_monotone(r: &SolveResult) -> bool {
    r.energy_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn max_error(u: &ScalarField, f: impl Fn(&[f64]) -> f64) -> f64 {
    let g = u.grid();
    (0..g.node_count())
        .map(|i| {
            let p = g.position(i);
            (u.values()[i] - f(&p[..g.dim()])).abs()
        })
        .fold(0.0, f64::max)
}

fn monotonicity_detail(report: &FrequencyReport, eps: f64) -> (bool, String) {
    match monotonicity_report(report, eps) {
        Ok(m) => (
            m.is_clean(),
            format!(
                "{} freq / {} phi / {} doubling violations at tol {:.4}",
                m.freq_violations.len(),
                m.phi_violations.len(),
                m.doubling_violations.len(),
                m.tol_mono
            ),
        ),
        Err(e) => (false, format!("error: {e}")),
    }
}

/// Runs the suite on `main` (normally the default scenario) and
/// `degenerate`. Oracles always run at `m = 129`.
pub fn verify(main: &Scenario, degenerate: &Scenario) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut s = Suite { checks: Vec::new() };
    let eps = main.doubling_eps;

    // 1 and 2: frequency oracles
    type Oracle = (&'static str, usize, Box<dyn Fn(&[f64]) -> f64>, f64, f64);
    let axis3 = Direction::axis(3, 1);
    let oracles: Vec<Oracle> = vec![
        ("regular profile", 3, Box::new(move |p: &[f64]| regular_profile(p, &axis3)), 1.5, 0.03),
        ("u = x_1", 3, Box::new(|p: &[f64]| p[0]), 1.0, 0.02),
        ("quadratic profile", 3, Box::new(|p: &[f64]| p[0] * p[0] + p[1] * p[1] - 2.0 * p[2] * p[2]), 2.0, 0.03),
        ("Lewy degree 5/2", 2, Box::new(|p: &[f64]| lewy_family(2, LewyType::HalfInteger, p)), 2.5, 0.03),
    ];
    for (name, dim, f, expected, tol) in &oracles {
        let t = Instant::now();
        let center = origin(*dim);
        let report = sampled(*dim, 129, f).and_then(|u| frequency_profile(&u, &center, &default_radii(u.grid(), &center)));
        let secs = t.elapsed().as_secs_f64();
        let Some(report) = s.attempt(1, name, report) else { continue };
        let mu = report.mu.map_or(f64::NAN, |m| m.mu);
        s.check(
            1,
            name,
            (mu - expected).abs() <= *tol && secs <= ORACLE_BUDGET,
            format!("mu {mu:.4} (expected {expected} +- {tol}), {secs:.1} s"),
        );
        let (clean, detail) = monotonicity_detail(&report, eps);
        s.check(2, name, clean, detail);
    }

    // 4: manufactured 2D solve
    let exact_axis = Direction::axis(2, 0);
    let exact = |p: &[f64]| regular_profile(p, &exact_axis);
    let manufactured = |m| solve_partial(&ProblemSpec::new(2, m, BoundaryData::Profile(ProfileSpec::regular(2))));
    if let (Some(coarse), Some(fine)) = (
        s.attempt(4, "manufactured m = 65", manufactured(65)),
        s.attempt(4, "manufactured m = 129", manufactured(129)),
    ) {
        let (e65, e129) = (max_error(&coarse.field, exact), max_error(&fine.field, exact));
        s.check(4, "manufactured error", e129 <= 2e-2, format!("max error {e129:.3e} at m = 129 (bound 2e-2)"));
        s.check(4, "manufactured ratio", e65 / e129 >= 1.5, format!("error ratio {:.3} between m = 65 and 129", e65 / e129));
        s.check(
            4,
            "energy monotone",
            energy_monotone(&coarse) && energy_monotone(&fine),
            format!("{} + {} sweeps at relaxation 1", coarse.sweeps, fine.sweeps),
        );
    }

    // the solved default scenario
    let main_run = s.attempt(10, "solve main scenario", solve_partial(&main.problem()));
    if let Some(run) = &main_run {
        default_scenario_checks(&mut s, main, run);
    }

    // 5 and 6 on the degenerate scenario
    if let Some(run) = s.attempt(5, "solve degenerate scenario", solve_partial(&degenerate.problem())) {
        let u = &run.field;
        let center = origin(degenerate.dim);
        if let Some(pc) = s.attempt(5, "degenerate origin", classify_point(u, &center, &degenerate.blowup)) {
            let (pass, detail) = match pc.finest() {
                Some(f) => {
                    let q = &f.quadratic;
                    let ratio = q.a[0] / q.a[q.a.len() - 1];
                    let c_ratio = q.c / q.a[0];
                    (
                        f.class == BlowupClass::DegenerateQuadratic
                            && (ratio - 1.0).abs() <= 0.05
                            && (c_ratio / 2.0 - 1.0).abs() <= 0.05,
                        format!("class {:?}, a_1/a_2 {ratio:.4}, C/a_1 {c_ratio:.4} (expected 1, 2 within 5%)", f.class),
                    )
                }
                None => (false, "no admissible radius".into()),
            };
            s.check(5, "degenerate origin", pass && run.converged, detail);
            normalization_checks(&mut s, u, &[pc], degenerate);
        }
    }

    // 8: barrier on the regular profile
    let axis = Direction::axis(3, 1);
    if let Some(hfield) = s.attempt(8, "barrier field", sampled(3, 129, |p| regular_profile_gradient(p, &axis)[1])) {
        let z = origin(3);
        let result = measure_c0(&hfield, &z).and_then(|c0| barrier_check(&hfield, &z, barrier_delta(3, c0), 0.05, None).map(|r| (c0, r)));
        if let Some((c0, r)) = s.attempt(8, "barrier on regular profile", result) {
            s.check(
                8,
                "barrier on regular profile",
                r.pass,
                format!("c0 {c0:.4}, delta {:.4}, min on dQ {:.3e}", r.delta, r.min_boundary()),
            );
            s.check(8, "barrier Laplacian 3D", r.laplacian_defect < 1e-9, format!("max |Delta_h P| {:.2e}", r.laplacian_defect));
        }
    }
    if let Some(h2) = s.attempt(8, "barrier Laplacian 2D", sampled(2, 129, |_| 1.0)) {
        if let Some(r) = s.attempt(8, "barrier Laplacian 2D", barrier_check(&h2, &[0.1, 0.0], 1.0, 0.05, None)) {
            s.check(8, "barrier Laplacian 2D", r.laplacian_defect < 1e-9, format!("max |Delta_h P| {:.2e}", r.laplacian_defect));
        }
    }

    // 9: quotient on the regular profile
    if let Some(u) = s.attempt(9, "regular quotient", sampled(3, 129, |p| regular_profile(p, &axis))) {
        let contact = extract_contact(&u, None);
        let tau = Direction::new(&[1.0, 1.0, 0.0])?;
        let q = extract_free_boundary(&contact).and_then(|fb| quotient_diagnostic(&u, &tau, &axis, 0.25, &contact, &fb, None));
        if let Some(q) = s.attempt(9, "regular quotient", q) {
            let pass = q.constant_quotient || (q.alpha.is_some_and(|a| a >= 0.5) && q.residual <= 0.2);
            let detail = if q.constant_quotient {
                format!("constant quotient over {} probes (alpha unbounded)", q.probes)
            } else {
                format!("alpha {:?}, residual {:.3}", q.alpha, q.residual)
            };
            s.check(9, "regular quotient", pass, detail);
        }
    }

    module_invariants(&mut s, main_run.as_ref())?;

    let failures = s.checks.iter().filter(|c| !c.pass).count();
    let elapsed = start.elapsed().as_secs_f64();
    s.check(
        10,
        "suite",
        failures == 0 && elapsed <= RUNTIME_BUDGET,
        format!("{failures} other check(s) failed, {elapsed:.0} s (budget {RUNTIME_BUDGET:.0} s)"),
    );
    Ok(VerifyReport {
        checks: s.checks,
        elapsed,
    })
}

fn default_scenario_checks(s: &mut Suite, scenario: &Scenario, run: &SolveResult) {
    let u = &run.field;
    let grid = u.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    s.check(10, "main solve converged", run.converged, format!("{} sweeps, max update {:.2e}", run.sweeps, run.max_update));
    s.check(10, "energy monotone (main scenario)", energy_monotone(run), format!("{} sweeps", run.sweeps));
    s.check(
        10,
        "complementarity",
        run.complementarity_within_tolerance(),
        format!("max violation {:.3e} (eps_comp {:.3e})", run.complementarity.max(), run.eps_comp),
    );

    let Some((contact, fb)) = s.attempt(3, "free boundary", {
        let contact = extract_contact(u, scenario.contact_tol);
        extract_free_boundary(&contact).map(|fb| (contact, fb))
    }) else {
        return;
    };

    // 2 and 3: frequency at detected free-boundary points
    let points: Vec<Vec<f64>> = fb
        .points()
        .into_iter()
        .filter(|p| default_radii(grid, p).len() >= 8)
        .step_by(4)
        .collect();
    let mut d_min = f64::INFINITY;
    let (mut mu_lo, mut mu_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut dirty = Vec::new();
    for p in &points {
        let Some(report) = s.attempt(3, "frequency at free boundary", frequency_profile(u, p, &default_radii(grid, p))) else {
            continue;
        };
        d_min = report.samples.iter().filter_map(|x| x.d_r).fold(d_min, f64::min);
        let mu = report.mu.map_or(f64::NAN, |m| m.mu);
        mu_lo = mu_lo.min(mu);
        mu_hi = mu_hi.max(mu);
        let (clean, detail) = monotonicity_detail(&report, scenario.doubling_eps);
        if !clean {
            dirty.push(format!("{p:.3?}: {detail}"));
        }
    }
    s.check(
        2,
        "main scenario",
        !points.is_empty() && dirty.is_empty(),
        if dirty.is_empty() {
            format!("{} free-boundary points, no violations", points.len())
        } else {
            dirty.join("; ")
        },
    );
    s.check(3, "D_r lower bound", d_min >= 1.45, format!("min D_r {d_min:.4} over {} free-boundary points (bound 1.45)", points.len()));
    s.check(
        3,
        "mu at free boundary",
        mu_lo >= 1.45 && mu_hi <= 1.60,
        format!("mu in [{mu_lo:.4}, {mu_hi:.4}] (expected within [1.45, 1.60])"),
    );

    // 5 and 6: blow-ups at trusted probe points
    let probes = probe_points(u, &fb, &scenario.blowup, scenario.probe_stride);
    let Some(summary) = s.attempt(5, "blow-ups", pipeline::classify_centers(u, &probes, scenario)) else {
        return;
    };
    let good = summary
        .points
        .iter()
        .filter(|p| p.class == Some(BlowupClass::Regular) && p.axis_error.is_some_and(|e| e <= 0.1))
        .count();
    let total = summary.points.len();
    s.check(
        5,
        "regular blow-ups",
        total > 0 && good as f64 >= 0.8 * total as f64,
        format!(
            "{good} of {total} probe points Regular with axis within 0.1 rad (largest error {:.4})",
            summary.max_axis_error.unwrap_or(f64::NAN)
        ),
    );
    let margins_ok = summary.points.iter().all(|p| {
        p.per_radius
            .iter()
            .filter(|r| r.classification.class == BlowupClass::Regular)
            .all(|r| r.classification.cone_margin > 0.0)
    });
    s.check(10, "Regular implies positive cone margin", margins_ok, format!("{total} probe points"));
    let classified: Vec<PointClassification> = summary
        .points
        .iter()
        .map(|p| PointClassification {
            center: p.center.clone(),
            per_radius: p.per_radius.clone(),
            class: p.class,
            unstable: p.unstable,
        })
        .collect();
    normalization_checks(s, u, &classified, scenario);

    // 7: monotone cone about e_{n-1} near the regular point closest to the origin
    let tangential_norm = |p: &[f64]| p[..dim - 1].iter().map(|x| x * x).sum::<f64>();
    if let Some(center) = fb.points().into_iter().min_by(|a, b| tangential_norm(a).total_cmp(&tangential_norm(b))) {
        let class = classify_point(u, &center, &scenario.blowup).ok().and_then(|c| c.class);
        let axis = Direction::axis(dim, dim - 2);
        let radius = 0.25 * grid.half_width();
        if let Some(cone) = s.attempt(7, "monotone cone", cone_monotonicity(u, &axis, FRAC_PI_3, &center, radius)) {
            s.check(
                7,
                "monotone cone",
                class == Some(BlowupClass::Regular) && cone.min >= -5e-3 * cone.max_gradient,
                format!(
                    "min D_tau u {:.3e} vs -5e-3 max|grad u| = {:.3e} at {center:.3?} (class {class:?})",
                    cone.min,
                    -5e-3 * cone.max_gradient
                ),
            );
            let lip = fb.graph.as_ref().map_or(f64::NAN, |g| g.lipschitz_within(&center[..dim - 2], radius));
            let bound = (std::f64::consts::FRAC_PI_2 - FRAC_PI_3).tan() + 2.0 * h;
            s.check(7, "cone and graph", cone.min < 0.0 || lip <= bound, format!("graph Lipschitz {lip:.4} (bound {bound:.4})"));
        }
        // 9: quotient on the solved field
        let mut t = vec![0.0; dim];
        t[0] += 1.0;
        t[dim - 2] += 1.0;
        if let Ok(tau) = Direction::new(&t) {
            let q = quotient_diagnostic(u, &tau, &axis, 0.25 * grid.half_width(), &contact, &fb, Some((&center, radius)));
            if let Some(q) = s.attempt(9, "solver quotient", q) {
                s.check(
                    9,
                    "solver quotient",
                    q.alpha.is_some_and(|a| a >= 0.1) && q.residual <= 0.2,
                    format!("alpha {:?}, residual {:.4}, {} probes", q.alpha, q.residual, q.probes),
                );
            }
        }
    }

    // solver invariants on the main scenario
    let (lo, hi) = u.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (g_lo, g_hi) = boundary_range(scenario, grid);
    s.check(
        10,
        "maximum principle",
        lo >= g_lo.min(0.0) - 1e-9 && hi <= g_hi + 1e-9,
        format!("u in [{lo:.4}, {hi:.4}], g in [{g_lo:.4}, {g_hi:.4}]"),
    );
    s.check(10, "reflection symmetry", reflection_exact(u), "u(x', -x_n) = u(x', x_n) at every node".into());
    let reg = signorini::solver::regularity_diagnostics(u);
    s.check(
        10,
        "semiconvexity regression",
        reg.tangential_semiconvexity_min >= -SEMICONVEXITY_C * reg.l2_norm,
        format!("min second difference {:.4} >= -{SEMICONVEXITY_C} |u|_L2 = {:.4}", reg.tangential_semiconvexity_min, -SEMICONVEXITY_C * reg.l2_norm),
    );
    let wider = extract_contact(u, Some(2.0 * contact.tolerance()));
    let superset = contact.mask().iter().zip(wider.mask()).all(|(a, b)| !a || *b);
    s.check(10, "contact monotone in tolerance", superset, format!("{} -> {} nodes", contact.contact_count(), wider.contact_count()));
}

fn boundary_range(scenario: &Scenario, grid: &Grid) -> (f64, f64) {
    let data = scenario.problem().boundary;
    let dim = grid.dim();
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..grid.node_count() {
        if grid.is_boundary(&grid.multi_index(i)[..dim]) {
            let v = data.evaluate(&grid.position(i)[..dim]);
            range = (range.0.min(v), range.1.max(v));
        }
    }
    range
}

fn reflection_exact(u: &ScalarField) -> bool {
    let g = u.grid();
    let dim = g.dim();
    let m = g.m();
    (0..g.node_count()).all(|i| {
        let mut multi = g.multi_index(i);
        multi[dim - 1] = m - 1 - multi[dim - 1];
        u.values()[i] == u.values()[g.index(&multi[..dim])]
    })
}

/// Criterion 6: every blow-up field produced by the classifications has a
/// unit sphere norm.
fn normalization_checks(s: &mut Suite, u: &ScalarField, points: &[PointClassification], scenario: &Scenario) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in points {
        for r in &p.per_radius {
            match rescale(u, &p.center, r.r, r.outer_radius, scenario.blowup.nodes).and_then(|v| v.unit_sphere_norm()) {
                Ok(norm) => {
                    worst = worst.max((norm - 1.0).abs());
                    count += 1;
                }
                Err(e) => {
                    s.check(6, "normalization", false, format!("error: {e}"));
                    return;
                }
            }
        }
    }
    s.check(
        6,
        &format!("normalization ({})", scenario.name),
        count > 0 && worst <= 1e-3,
        format!("{count} blow-up fields, largest | |v|_L2(dB_1) - 1 | = {worst:.2e}"),
    );
}

fn module_invariants(s: &mut Suite, main: Option<&SolveResult>) -> Result<()> {
    // grid: multilinear reproduction, quadratic gradients, nodal identity
    let trilinear = |p: &[f64]| 0.3 + p[0] - 0.5 * p[1] * p[2] + 2.0 * p[0] * p[1] * p[2];
    if let Some(f) = s.attempt(10, "grid", sampled(3, 17, trilinear)) {
        let pts = [[0.13, -0.71, 0.05], [-0.99, 0.42, -0.33], [0.5, 0.5, 0.0]];
        let err = pts
            .iter()
            .map(|p| f.interpolate(p).map_or(f64::INFINITY, |v| (v - trilinear(p)).abs()))
            .fold(0.0, f64::max);
        s.check(10, "multilinear interpolation exact", err < 1e-12, format!("max error {err:.1e}"));
        let nodal = (0..f.grid().node_count())
            .all(|i| f.interpolate(&f.grid().position(i)).is_ok_and(|v| v == f.values()[i]));
        s.check(10, "interpolation reproduces nodes", nodal, "all nodes of a 17^3 grid".into());
    }
    let quad = |p: &[f64]| p[0] * p[0] - 0.5 * p[0] * p[1] + 0.25 * p[1] * p[1];
    if let Some(f) = s.attempt(10, "grid", sampled(2, 33, quad)) {
        let p = [0.3, -0.2];
        let exact = [2.0 * p[0] - 0.5 * p[1], -0.5 * p[0] + 0.5 * p[1]];
        let err = f.gradient(&p).map_or(f64::INFINITY, |g| (g[0] - exact[0]).abs().max((g[1] - exact[1]).abs()));
        s.check(10, "gradient of quadratics exact", err < 1e-12, format!("error {err:.1e}"));
    }

    // solver comparison principle
    let spec = ProblemSpec::new(2, 33, BoundaryData::Linear(vec![1.0]));
    let raised = ProblemSpec {
        boundary: BoundaryData::Shifted(Box::new(BoundaryData::Linear(vec![1.0])), 0.1),
        ..spec.clone()
    };
    if let (Some(a), Some(b)) = (s.attempt(10, "comparison", solve(&spec)), s.attempt(10, "comparison", solve(&raised))) {
        let ok = a.field.values().iter().zip(b.field.values()).all(|(x, y)| *y >= x - 1e-9);
        s.check(10, "comparison principle", ok, "g and g + 0.1 on a 33^2 grid".into());
    }
    if main.is_none() {
        s.check(10, "main scenario invariants", false, "main scenario unavailable".into());
    }

    // frequency: scale invariance, half-integer oracle, quadrature refinement
    let axis2 = Direction::axis(2, 0);
    if let Some(u) = s.attempt(10, "frequency", sampled(2, 65, |p| regular_profile(p, &axis2))) {
        let c = [0.0, 0.0];
        let radii = default_radii(u.grid(), &c);
        let pair = frequency_profile(&u, &c, &radii).and_then(|a| frequency_profile(&u.scaled(-3.7), &c, &radii).map(|b| (a, b)));
        if let Some((a, b)) = s.attempt(10, "frequency scale invariance", pair) {
            let err = a
                .samples
                .iter()
                .zip(&b.samples)
                .filter_map(|(x, y)| Some((x.d_r? - y.d_r?).abs() / x.d_r?))
                .fold(0.0, f64::max);
            s.check(10, "frequency scale invariance", err < 1e-12, format!("max relative change {err:.1e}"));
        }
    }
    if let Some(u) = s.attempt(10, "frequency", sampled(2, 129, |p| derivative_w(p, &axis2))) {
        let c = [0.0, 0.0];
        if let Some(report) = s.attempt(10, "homogeneous mu 1/2", frequency_profile(&u, &c, &default_radii(u.grid(), &c))) {
            let mu = report.mu.map_or(f64::NAN, |m| m.mu);
            s.check(10, "homogeneous mu 1/2", (mu - 0.5).abs() <= 0.03, format!("mu {mu:.4}"));
        }
    }
    let smooth = |p: &[f64]| (0.3 * p[0] + 0.7 * p[1] - 0.2 * p[2]).exp();
    let avg = |n: usize| {
        let rule = SphereRule::new(3, n);
        rule.points(&[0.1, 0.0, 0.0], 0.4).map(|p| smooth(&p)).sum::<f64>() / rule.len() as f64
    };
    let (a, b) = (avg(1 << 14), avg(1 << 15));
    s.check(10, "quadrature refinement", ((a - b) / b).abs() < 1e-6, format!("relative change {:.1e}", ((a - b) / b).abs()));

    // blow-ups: fixed point and agreement with the source frequency
    if let Some(u) = s.attempt(10, "blow-up", sampled(2, 129, |p| regular_profile(p, &axis2))) {
        let pair = rescale(&u, &[0.0, 0.0], 0.2, 2.0, 129).and_then(|a| rescale(&u, &[0.0, 0.0], 0.1, 2.0, 129).map(|b| (a, b)));
        if let Some((a, b)) = s.attempt(10, "blow-up fixed point", pair) {
            let rule = SphereRule::new(2, 256);
            let diffs: Vec<f64> = rule
                .points(&[0.0, 0.0], 1.0)
                .filter_map(|p| Some(a.field().interpolate(&p[..2]).ok()? - b.field().interpolate(&p[..2]).ok()?))
                .collect();
            let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
            s.check(10, "blow-up fixed point", diffs.len() == rule.len() && rms < 2e-2, format!("trace difference {rms:.2e}"));
        }
    }
    let axis3 = Direction::axis(3, 1);
    if let Some(u) = s.attempt(10, "blow-up", sampled(3, 129, |p| regular_profile(p, &axis3))) {
        let c = origin(3);
        let source = frequency_profile(&u, &c, &default_radii(u.grid(), &c)).and_then(|r| estimate_mu(&r));
        let options = signorini::blowup::BlowupOptions::default();
        let fit = rescale(&u, &c, 0.125, options.outer_radius, options.nodes).and_then(|v| fit_profile(&v, &options));
        if let (Some(src), Some(fit)) = (s.attempt(10, "blow-up mu", source), s.attempt(10, "blow-up mu", fit)) {
            let mu = fit.mu.map_or(f64::NAN, |m| m.mu);
            s.check(
                10,
                "blow-up mu matches source",
                (mu - src.mu).abs() <= 0.05,
                format!("blow-up {mu:.4}, source {:.4}", src.mu),
            );
        }
    }

    // free boundary: regular-profile graph, cone antisymmetry
    if let Some(u) = s.attempt(10, "free boundary", sampled(3, 65, |p| regular_profile(p, &axis3))) {
        let fb = extract_free_boundary(&extract_contact(&u, Some(1e-12)));
        if let Some(fb) = s.attempt(10, "regular-profile graph", fb) {
            let h = u.grid().spacing();
            let (flat, lip) = fb.graph.as_ref().map_or((f64::INFINITY, f64::INFINITY), |g| {
                let dev = g.points().iter().map(|p| p[1].abs()).fold(0.0, f64::max);
                (dev, g.lipschitz)
            });
            s.check(10, "regular-profile graph", flat <= h && lip <= 1.0, format!("|f| <= {flat:.2e}, Lipschitz {lip:.2e}"));
        }
    }
    if let Some(u) = s.attempt(10, "cone antisymmetry", sampled(3, 33, |p| regular_profile(p, &axis3) + 0.2 * p[0] * p[1])) {
        let c = [0.1, 0.0, 0.0];
        let pair = cone_monotonicity(&u, &axis3, FRAC_PI_3, &c, 0.3)
            .and_then(|a| cone_monotonicity(&u.scaled(-1.0), &axis3, FRAC_PI_3, &c, 0.3).map(|b| (a, b)));
        if let Some((up, down)) = s.attempt(10, "cone antisymmetry", pair) {
            s.check(
                10,
                "cone antisymmetry",
                down.min == -up.max && down.max == -up.min,
                format!("min {:.4} / max {:.4}", up.min, up.max),
            );
        }
    }

    // exact solutions: homogeneity, w >= 0, discrete harmonicity of quadratics
    let specs = [
        ProfileSpec::regular(3),
        ProfileSpec::DerivativeW { axis: axis3 },
        ProfileSpec::Lewy2D { k: 2, kind: LewyType::HalfInteger },
        ProfileSpec::Lewy2D { k: 1, kind: LewyType::Even },
        ProfileSpec::Quadratic { a: vec![1.0, 1.0], c: 2.0 },
    ];
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let dim = spec.dim().unwrap_or(3);
        let p: Vec<f64> = [0.31, -0.47, 0.22][3 - dim..].to_vec();
        for lambda in [0.5, 2.0] {
            let scaled: Vec<f64> = p.iter().map(|x| lambda * x).collect();
            let lhs = spec.evaluate(&scaled);
            let rhs = lambda.powf(spec.homogeneity()) * spec.evaluate(&p);
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
        }
    }
    s.check(10, "profile homogeneity", worst < 1e-12, format!("max relative defect {worst:.1e}"));
    if let Some(w) = s.attempt(10, "w >= 0", sampled(3, 33, |p| derivative_w(p, &axis3))) {
        let min = w.values().iter().copied().fold(f64::INFINITY, f64::min);
        s.check(10, "w >= 0", min >= 0.0, format!("min {min:.2e}"));
    }
    if let Some(q) = s.attempt(10, "quadratic harmonic", sampled(3, 33, |p| p[0] * p[0] + p[1] * p[1] - 2.0 * p[2] * p[2])) {
        let g = *q.grid();
        let defect = (0..g.node_count())
            .filter(|&i| !g.is_boundary(&g.multi_index(i)[..3]))
            .map(|i| q.discrete_laplacian(i).abs())
            .fold(0.0, f64::max);
        s.check(10, "quadratic discretely harmonic", defect < 1e-9, format!("max |Delta_h q| {defect:.1e}"));
    }

    // field format round trip
    if let Some(f) = s.attempt(10, "field round trip", sampled(2, 9, |p| (p[0] * 7.1).sin() + p[1] / 3.0)) {
        let mut bytes = Vec::new();
        let back = write_field(&f, &mut bytes).and_then(|()| read_field(bytes.as_slice()));
        if let Some(back) = s.attempt(10, "field round trip", back) {
            s.check(10, "field round trip", back.values() == f.values(), "bit-identical values".into());
        }
    }
    Ok(())
}
