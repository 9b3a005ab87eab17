//! Blow-up rescalings `v_r(x) = u(c + r x) / phi_avg(r)^{1/2}` and their
//! classification against the half-space profile and harmonic quadratics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::regular_profile;
use crate::free_boundary::FreeBoundaryResult;
use crate::frequency::{ball_integrals, default_radii, estimate_mu, frequency_profile, MuEstimate};
use crate::grid::{Direction, Grid, ScalarField, MAX_DIM};
use crate::quadrature::SphereRule;
use crate::solver::tangential_offsets;

/// Unit-sphere mean square of a blow-up must be 1 within this before fitting.
const NORMALIZATION_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupOptions {
    /// Radius `R` of the ball the rescaled field covers.
    pub outer_radius: f64,
    /// Nodes per axis of the rescaled grid.
    pub nodes: usize,
    pub delta_mu: f64,
    pub rho_fit: f64,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        Self {
            outer_radius: 2.0,
            nodes: 129,
            delta_mu: 0.1,
            rho_fit: 0.1,
        }
    }
}

/// A rescaled field on `[-R, R]^n` with its provenance.
#[derive(Debug, Clone)]
pub struct BlowupField {
    field: ScalarField,
    center: Vec<f64>,
    r: f64,
    normalization: f64,
}

impl BlowupField {
    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn outer_radius(&self) -> f64 {
        self.field.grid().half_width()
    }

    /// `sqrt(phi_avg(r))` of the source field.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Root mean square over the unit sphere.
    pub fn unit_sphere_norm(&self) -> Result<f64> {
        let trace = sphere_trace(&self.field)?;
        Ok((trace.values.iter().map(|v| v * v).sum::<f64>() / trace.values.len() as f64).sqrt())
    }
}

/// `v_r` on a fresh grid with `nodes` points per axis covering `B_R`.
/// Box corners outside the source domain sample the nearest source point.
pub fn rescale(u: &ScalarField, center: &[f64], r: f64, outer_radius: f64, nodes: usize) -> Result<BlowupField> {
    let grid = u.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    if center.len() != dim {
        return Err(Error::InvalidArgument("center dimension mismatch".into()));
    }
    let max = grid.distance_to_boundary(center) - 2.0 * h;
    if !(r > 0.0 && r * outer_radius <= max + 1e-12 * grid.half_width()) {
        return Err(Error::InvalidRadius {
            radius: r,
            min: 0.0,
            max: max / outer_radius,
        });
    }
    let normalization = ball_integrals_unchecked(u, center, r)?.sqrt();
    if !(normalization > 0.0) || normalization <= 1e-14 * u.max_abs() {
        return Err(Error::Degenerate(format!(
            "sphere average of u^2 vanishes at radius {r}"
        )));
    }
    let l = grid.half_width();
    let target = Grid::new(dim, nodes, outer_radius)?;
    let field = ScalarField::sample(target, |x| {
        let mut p = [0.0; MAX_DIM];
        for a in 0..dim {
            p[a] = (center[a] + r * x[a]).clamp(-l, l);
        }
        u.interpolate(&p[..dim]).map_or(f64::NAN, |v| v / normalization)
    })?;
    Ok(BlowupField {
        field,
        center: center.to_vec(),
        r,
        normalization,
    })
}

/// `phi_avg(r)` without the frequency window check (blow-ups may use
/// radii below `4h`).
fn ball_integrals_unchecked(u: &ScalarField, center: &[f64], r: f64) -> Result<f64> {
    let grid = u.grid();
    if r >= 4.0 * grid.spacing() {
        return ball_integrals(u, center, r).map(|b| b.phi_avg);
    }
    let rule = SphereRule::for_radius(grid.dim(), r, grid.spacing());
    rule.average(center, r, |p, _| u.interpolate(p).map(|v| v * v))
}

struct SphereTrace {
    rule: SphereRule,
    values: Vec<f64>,
}

fn sphere_trace(v: &ScalarField) -> Result<SphereTrace> {
    let grid = v.grid();
    let dim = grid.dim();
    let rule = SphereRule::for_radius(dim, 1.0, grid.spacing());
    let origin = [0.0; MAX_DIM];
    let values = rule
        .points(&origin[..dim], 1.0)
        .map(|p| v.interpolate(&p[..dim]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SphereTrace { rule, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlowupClass {
    Regular,
    DegenerateQuadratic,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticFit {
    /// Tangential coefficients `a_i >= 0`.
    pub a: Vec<f64>,
    /// `C = sum a_i`.
    pub c: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupClassification {
    pub mu: Option<MuEstimate>,
    pub class: BlowupClass,
    /// Best-fit half-space profile axis, a unit vector in `Pi`.
    pub axis: Vec<f64>,
    /// RMS distance on the unit sphere to the normalized regular profile.
    pub profile_residual: f64,
    pub quadratic: QuadraticFit,
    pub convexity_min: f64,
    /// [`cone_bound_check`] with `alpha = 1`, `eta = 0.25` about `axis`.
    pub cone_margin: f64,
}

fn profile_residual(trace: &SphereTrace, dim: usize, axis: &Direction) -> f64 {
    let profile: Vec<f64> = trace
        .rule
        .directions()
        .iter()
        .map(|d| regular_profile(&d[..dim], axis))
        .collect();
    let n = profile.len() as f64;
    let norm = (profile.iter().map(|p| p * p).sum::<f64>() / n).sqrt();
    (trace
        .values
        .iter()
        .zip(&profile)
        .map(|(v, p)| (v - p / norm).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Axis in `Pi` minimizing the profile residual: both signs of `e_1` in
/// 2D, a 5 degree scan refined by golden section to `1e-3` rad in 3D.
fn fit_axis(trace: &SphereTrace, dim: usize) -> (Direction, f64) {
    if dim == 2 {
        return [Direction::axis(2, 0), Direction::new(&[-1.0, 0.0]).unwrap()]
            .into_iter()
            .map(|d| (d, profile_residual(trace, 2, &d)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
    }
    let cost = |angle: f64| profile_residual(trace, dim, &Direction::in_plane(dim, angle));
    let step = 5f64.to_radians();
    let best = (0..72)
        .map(|k| k as f64 * step)
        .map(|a| (a, cost(a)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;
    let angle = golden_section(cost, best - step, best + step, 1e-3);
    let mut angle = angle.rem_euclid(2.0 * std::f64::consts::PI);
    if angle > std::f64::consts::PI {
        angle -= 2.0 * std::f64::consts::PI;
    }
    let axis = Direction::in_plane(dim, angle);
    (axis, cost(angle))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Nonnegative least squares for `sum a_i (x_i^2 - x_n^2)` on the trace.
fn fit_quadratic(trace: &SphereTrace, dim: usize) -> QuadraticFit {
    let k = dim - 1;
    let basis: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            trace
                .rule
                .directions()
                .iter()
                .map(|d| d[i] * d[i] - d[dim - 1] * d[dim - 1])
                .collect()
        })
        .collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let residual = |a: &[f64]| {
        let n = trace.values.len();
        ((0..n)
            .map(|j| {
                let fit: f64 = (0..k).map(|i| a[i] * basis[i][j]).sum();
                (trace.values[j] - fit).powi(2)
            })
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };
    let gram: Vec<Vec<f64>> = basis.iter().map(|b| basis.iter().map(|c| dot(b, c)).collect()).collect();
    let rhs: Vec<f64> = basis.iter().map(|b| dot(b, &trace.values)).collect();
    // active sets: every subset of the (at most two) coefficients
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0..(1usize << k) {
        let free: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let mut a = vec![0.0; k];
        match free.len() {
            0 => {}
            1 => a[free[0]] = rhs[free[0]] / gram[free[0]][free[0]],
            _ => {
                let (i, j) = (free[0], free[1]);
                let det = gram[i][i] * gram[j][j] - gram[i][j] * gram[j][i];
                a[i] = (rhs[i] * gram[j][j] - rhs[j] * gram[i][j]) / det;
                a[j] = (rhs[j] * gram[i][i] - rhs[i] * gram[j][i]) / det;
            }
        }
        if a.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            continue;
        }
        let res = residual(&a);
        if best.as_ref().is_none_or(|b| res < b.1) {
            best = Some((a, res));
        }
    }
    let (a, residual) = best.unwrap_or_else(|| (vec![0.0; k], residual(&vec![0.0; k])));
    QuadraticFit {
        c: a.iter().sum(),
        a,
        residual,
    }
}

/// Frequency fit, profile and quadratic fits, convexity and cone margin.
pub fn fit_profile(v: &BlowupField, options: &BlowupOptions) -> Result<BlowupClassification> {
    let grid = v.field.grid();
    let dim = grid.dim();
    let trace = sphere_trace(&v.field)?;
    let norm = (trace.values.iter().map(|x| x * x).sum::<f64>() / trace.values.len() as f64).sqrt();
    if (norm - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(Error::InvalidInput(format!(
            "blow-up has unit-sphere norm {norm}, expected 1"
        )));
    }
    let origin = vec![0.0; dim];
    let report = frequency_profile(&v.field, &origin, &default_radii(grid, &origin))?;
    let mu = estimate_mu(&report).ok();
    let (axis, profile_residual) = fit_axis(&trace, dim);
    let quadratic = fit_quadratic(&trace, dim);
    let class = match mu {
        Some(m)
            if m.mu >= 1.5 - options.delta_mu
                && m.mu <= 2.0 - options.delta_mu
                && profile_residual <= options.rho_fit =>
        {
            BlowupClass::Regular
        }
        Some(m) if (m.mu - 2.0).abs() <= options.delta_mu && quadratic.residual <= options.rho_fit => {
            BlowupClass::DegenerateQuadratic
        }
        _ => BlowupClass::Other,
    };
    Ok(BlowupClassification {
        mu,
        class,
        axis: axis.components().to_vec(),
        profile_residual,
        quadratic,
        convexity_min: convexity_check(v),
        cone_margin: cone_bound_check(v, &axis, 1.0, 0.25)?,
    })
}

/// Smallest tangential second difference `(v(x+h t) - 2v(x) + v(x-h t)) / (h |t|)^2`
/// over tangential axes and diagonals, at nodes in the unit ball.
pub fn convexity_check(v: &BlowupField) -> f64 {
    let field = &v.field;
    let grid = field.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    let values = field.values();
    let offsets = tangential_offsets(dim);
    let mut min = f64::INFINITY;
    for index in 0..grid.node_count() {
        let p = grid.position(index);
        if p[..dim].iter().map(|x| x * x).sum::<f64>() > 1.0 {
            continue;
        }
        let multi = grid.multi_index(index);
        for off in &offsets {
            let mut shift: isize = 0;
            let mut len2 = 0.0;
            let mut inside = true;
            for a in 0..dim {
                let o = off[a] as isize;
                let i = multi[a] as isize;
                if i + o < 0 || i - o < 0 || i + o >= grid.m() as isize || i - o >= grid.m() as isize {
                    inside = false;
                }
                shift += o * grid.stride(a) as isize;
                len2 += (o * o) as f64;
            }
            if !inside {
                continue;
            }
            let i = index as isize;
            let second = values[(i + shift) as usize] - 2.0 * values[index] + values[(i - shift) as usize];
            min = min.min(second / (h * h * len2));
        }
    }
    min
}

/// Smallest `D_tau v / eta^{1/2}` over nodes in `B_{5/6}` with `|x_n| >= eta`
/// and directions `tau = alpha e + beta e_perp` (`e_perp` tangential,
/// orthogonal to `e`, `alpha^2 + beta^2 = 1`; in 2D only `tau = e`).
pub fn cone_bound_check(v: &BlowupField, axis: &Direction, alpha: f64, eta: f64) -> Result<f64> {
    let field = &v.field;
    let grid = field.grid();
    let dim = grid.dim();
    let e = axis.components();
    let directions: Vec<Direction> = if dim == 2 {
        vec![*axis]
    } else {
        let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
        let perp = [-e[1], e[0], 0.0];
        [beta, -beta]
            .iter()
            .map(|b| Direction::new(&[alpha * e[0] + b * perp[0], alpha * e[1] + b * perp[1], 0.0]))
            .collect::<Result<_>>()?
    };
    let mut min = f64::INFINITY;
    for index in 0..grid.node_count() {
        let p = grid.position(index);
        let p = &p[..dim];
        if p.iter().map(|x| x * x).sum::<f64>() > (5.0f64 / 6.0).powi(2) || p[dim - 1].abs() < eta {
            continue;
        }
        for tau in &directions {
            min = min.min(field.directional_derivative(p, tau)?);
        }
    }
    Ok(min / eta.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusClassification {
    pub r: f64,
    pub outer_radius: f64,
    pub normalization: f64,
    pub classification: BlowupClassification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointClassification {
    pub center: Vec<f64>,
    pub per_radius: Vec<RadiusClassification>,
    /// Class at the smallest radius, the closest to the blow-up limit.
    pub class: Option<BlowupClass>,
    /// The class differs between radii.
    pub unstable: bool,
}

impl PointClassification {
    /// Classification at the smallest radius.
    pub fn finest(&self) -> Option<&BlowupClassification> {
        self.per_radius.first().map(|c| &c.classification)
    }
}

/// Classifies a point at `r in {8h, 16h, 32h}`. The outer radius shrinks to
/// fit the source box and radii leaving less than `1.1` are skipped.
pub fn classify_point(u: &ScalarField, center: &[f64], options: &BlowupOptions) -> Result<PointClassification> {
    let grid = u.grid();
    let h = grid.spacing();
    let room = grid.distance_to_boundary(center) - 2.0 * h;
    let mut per_radius = Vec::new();
    for k in [8.0, 16.0, 32.0] {
        let r = k * h;
        let outer = options.outer_radius.min(room / r);
        if outer < 1.1 {
            continue;
        }
        let v = rescale(u, center, r, outer, options.nodes)?;
        let classification = fit_profile(&v, options)?;
        per_radius.push(RadiusClassification {
            r,
            outer_radius: outer,
            normalization: v.normalization,
            classification,
        });
    }
    if per_radius.is_empty() {
        return Err(Error::InvalidRadius {
            radius: 8.0 * h,
            min: 0.0,
            max: room / 1.1,
        });
    }
    let class = per_radius.first().map(|c| c.classification.class);
    let unstable = per_radius.windows(2).any(|w| w[0].classification.class != w[1].classification.class);
    Ok(PointClassification {
        center: center.to_vec(),
        per_radius,
        class,
        unstable,
    })
}

/// Trusted free-boundary points where the finest blow-up (`r = 8h` with
/// the full outer radius) fits in the box, every `stride`-th one.
pub fn probe_points(u: &ScalarField, free_boundary: &FreeBoundaryResult, options: &BlowupOptions, stride: usize) -> Vec<Vec<f64>> {
    let grid = u.grid();
    let h = grid.spacing();
    free_boundary
        .points()
        .into_iter()
        .filter(|p| grid.distance_to_boundary(p) - 2.0 * h >= 8.0 * h * options.outer_radius)
        .step_by(stride.max(1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{lewy_family, LewyType};
    use approx::assert_relative_eq;

    fn source(dim: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        ScalarField::sample(Grid::new(dim, m, 1.0).unwrap(), f).unwrap()
    }

    fn small() -> BlowupOptions {
        BlowupOptions {
            nodes: 65,
            ..BlowupOptions::default()
        }
    }

    #[test]
    fn regular_profile_is_a_fixed_point() {
        let axis = Direction::axis(2, 0);
        let u = source(2, 129, |p| 3.0 * regular_profile(p, &axis));
        let a = rescale(&u, &[0.0, 0.0], 0.2, 2.0, 129).unwrap();
        let b = rescale(&u, &[0.0, 0.0], 0.1, 2.0, 129).unwrap();
        assert_relative_eq!(a.unit_sphere_norm().unwrap(), 1.0, epsilon = 1e-3);
        let ta = sphere_trace(a.field()).unwrap().values;
        let tb = sphere_trace(b.field()).unwrap().values;
        let diff = (ta.iter().zip(&tb).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / ta.len() as f64).sqrt();
        assert!(diff < 2e-2, "{diff}");
        let c = fit_profile(&a, &BlowupOptions::default()).unwrap();
        assert_eq!(c.class, BlowupClass::Regular);
        assert!(c.profile_residual < 1e-2, "{c:?}");
        assert_eq!(c.axis, vec![1.0, 0.0]);
        assert!(c.cone_margin > 0.0);
    }

    #[test]
    fn normalization_removes_scale() {
        let u = source(2, 65, |p| p[0] + 0.3 * p[0] * p[1]);
        let a = rescale(&u, &[0.1, 0.0], 0.2, 2.0, 33).unwrap();
        let b = rescale(&u.scaled(-4.0), &[0.1, 0.0], 0.2, 2.0, 33).unwrap();
        for (x, y) in a.field().values().iter().zip(b.field().values()) {
            assert_relative_eq!(*x, -*y, max_relative = 1e-12);
        }
    }

    #[test]
    fn rescale_rejects_bad_windows() {
        let u = source(2, 33, |p| p[0]);
        assert!(matches!(rescale(&u, &[0.0, 0.0], 0.5, 2.0, 33), Err(Error::InvalidRadius { .. })));
        let z = source(2, 33, |_| 0.0);
        assert!(matches!(rescale(&z, &[0.0, 0.0], 0.2, 2.0, 33), Err(Error::Degenerate(_))));
    }

    #[test]
    fn three_dimensional_regular_axis() {
        let axis = Direction::in_plane(3, 0.3);
        let u = source(3, 65, |p| regular_profile(p, &axis));
        let v = rescale(&u, &[0.0, 0.0, 0.0], 0.25, 2.0, 65).unwrap();
        let c = fit_profile(&v, &small()).unwrap();
        let dot: f64 = c.axis.iter().zip(axis.components()).map(|(a, b)| a * b).sum();
        assert!(dot.clamp(-1.0, 1.0).acos() < 1e-2, "{c:?}");
        assert!(c.profile_residual < 1e-2);
    }

    #[test]
    fn quadratic_coefficients_recovered() {
        let u = source(3, 65, |p| p[0] * p[0] + p[1] * p[1] - 2.0 * p[2] * p[2]);
        let v = rescale(&u, &[0.0, 0.0, 0.0], 0.25, 2.0, 129).unwrap();
        let c = fit_profile(&v, &BlowupOptions::default()).unwrap();
        assert_eq!(c.class, BlowupClass::DegenerateQuadratic, "{c:?}");
        let q = &c.quadratic;
        assert_relative_eq!(q.a[0] / q.a[1], 1.0, max_relative = 2e-2);
        assert_relative_eq!(q.c / q.a[0], 2.0, max_relative = 2e-2);
    }

    #[test]
    fn even_lewy_is_quadratic() {
        let u = source(2, 129, |p| lewy_family(1, LewyType::Even, p));
        let v = rescale(&u, &[0.0, 0.0], 0.2, 2.0, 129).unwrap();
        let c = fit_profile(&v, &BlowupOptions::default()).unwrap();
        assert_eq!(c.class, BlowupClass::DegenerateQuadratic);
    }

    #[test]
    fn convexity_of_signed_squares() {
        let u = source(2, 65, |p| p[0] * p[0] + 0.1 * p[0]);
        let v = rescale(&u, &[0.0, 0.0], 0.25, 2.0, 33).unwrap();
        // v = (r^2 x1^2 + 0.1 r x1) / norm has second difference 2 r^2 / norm
        let expected = 2.0 * 0.25f64.powi(2) / v.normalization();
        assert_relative_eq!(convexity_check(&v), expected, max_relative = 1e-9);
        let w = rescale(&u.scaled(-1.0), &[0.0, 0.0], 0.25, 2.0, 33).unwrap();
        assert_relative_eq!(convexity_check(&w), -expected, max_relative = 1e-9);
    }

    #[test]
    fn regular_profile_is_tangentially_convex() {
        let axis = Direction::axis(3, 1);
        let u = source(3, 65, |p| regular_profile(p, &axis));
        let v = rescale(&u, &[0.0, 0.0, 0.0], 0.25, 2.0, 65).unwrap();
        assert!(convexity_check(&v) >= -0.02);
    }

    #[test]
    fn cone_margin_shrinks_with_alpha_and_flips_with_sign() {
        let axis = Direction::axis(3, 1);
        let u = source(3, 65, |p| regular_profile(p, &axis));
        let v = rescale(&u, &[0.0, 0.0, 0.0], 0.25, 2.0, 65).unwrap();
        let full = cone_bound_check(&v, &axis, 1.0, 0.25).unwrap();
        let half = cone_bound_check(&v, &axis, 0.5, 0.1).unwrap();
        assert!(full > 0.0 && half > 0.0 && half < full, "{full} {half}");
        let w = rescale(&u.scaled(-1.0), &[0.0, 0.0, 0.0], 0.25, 2.0, 65).unwrap();
        assert!(cone_bound_check(&w, &axis, 1.0, 0.25).unwrap() < 0.0);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(|t| (t - 0.37).powi(2), 0.0, 1.0, 1e-6);
        assert!((x - 0.37).abs() < 1e-6);
    }
}
