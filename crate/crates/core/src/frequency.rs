//! Almgren's frequency `D_r = r V_r / S_r`, sphere averages of `u^2`,
//! and the monotonicity, doubling and Rellich checks built on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, MAX_DIM};
use crate::quadrature::{sphere_area, SphereRule};

/// Relative size below which `S_r` counts as zero.
const DEGENERATE_PHI: f64 = 1e-28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallIntegrals {
    /// `int_{dB_r} u^2`
    pub s_r: f64,
    /// `int_{B_r} |grad u|^2`
    pub v_r: f64,
    /// Mean of `u^2` over `dB_r`.
    pub phi_avg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusSample {
    pub r: f64,
    pub s_r: f64,
    pub v_r: f64,
    /// `None` where `S_r` vanishes.
    pub d_r: Option<f64>,
    pub phi_avg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuEstimate {
    pub mu: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub radii_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub center: Vec<f64>,
    pub spacing: f64,
    pub half_width: f64,
    pub samples: Vec<RadiusSample>,
    pub mu: Option<MuEstimate>,
    /// Every radius has vanishing `S_r`.
    pub degenerate: bool,
    /// `u(center) != 0`: the frequency formula's premise fails there.
    pub hypothesis_violated: bool,
}

impl FrequencyReport {
    pub fn max_frequency(&self) -> Option<f64> {
        self.samples
            .iter()
            .filter_map(|s| s.d_r)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
    }

    /// Comma-separated table `r,S_r,V_r,D_r,phi_avg`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,S_r,V_r,D_r,phi_avg\n");
        for s in &self.samples {
            let d = s.d_r.map_or_else(|| "nan".to_string(), |d| format!("{d:?}"));
            out.push_str(&format!("{:?},{:?},{:?},{},{:?}\n", s.r, s.s_r, s.v_r, d, s.phi_avg));
        }
        out
    }
}

/// `[4h, dist(center, boundary) - 2h]`.
pub fn admissible_window(grid: &Grid, center: &[f64]) -> (f64, f64) {
    let h = grid.spacing();
    (4.0 * h, grid.distance_to_boundary(center) - 2.0 * h)
}

fn check_center(grid: &Grid, center: &[f64]) -> Result<()> {
    if center.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "center has {} coordinates, grid has dimension {}",
            center.len(),
            grid.dim()
        )));
    }
    if center[grid.dim() - 1].abs() > 1e-12 {
        return Err(Error::InvalidArgument("frequency centers must lie on x_n = 0".into()));
    }
    Ok(())
}

fn check_radius(grid: &Grid, center: &[f64], r: f64) -> Result<()> {
    let (min, max) = admissible_window(grid, center);
    let slack = 1e-12 * grid.half_width();
    if r < min - slack || r > max + slack {
        return Err(Error::InvalidRadius { radius: r, min, max });
    }
    Ok(())
}

/// Radii `4h, 5h, ...` up to `min(0.25 L, dist - 2h)`.
pub fn default_radii(grid: &Grid, center: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let (_, max) = admissible_window(grid, center);
    let cap = max.min(0.25 * grid.half_width()) + 1e-12 * h;
    (4..).map(|k| k as f64 * h).take_while(|&r| r <= cap).collect()
}

/// `S_r` by sphere quadrature of the interpolated `u^2`.
fn surface_u2(u: &ScalarField, center: &[f64], r: f64) -> Result<f64> {
    let grid = u.grid();
    let rule = SphereRule::for_radius(grid.dim(), r, grid.spacing());
    let mean = rule.average(center, r, |p, _| u.interpolate_cubic(p).map(|v| v * v))?;
    Ok(mean * sphere_area(grid.dim(), r))
}

/// Bisection depth for cells cut by a sphere in 2D and 3D (leaves are
/// `h / 2^depth`).
const CUT_DEPTH: [u32; 2] = [7, 3];

/// Nodal gradient estimates at the `2^n` corners of one cell, one row per
/// component; corner `mask` has bit `a` set for the upper node along `a`.
type CornerGradients = [[f64; 1 << MAX_DIM]; MAX_DIM];

/// Second-order difference of `u` along `axis` at node `multi`. Normal
/// differences never reach across `Pi`, where the solution may kink:
/// nodes on `Pi` take the one-sided formula towards `side_up`'s half.
fn nodal_derivative(u: &ScalarField, multi: &[usize], index: usize, axis: usize, side_up: bool) -> f64 {
    let g = u.grid();
    let v = u.values();
    let s = g.stride(axis);
    let h = g.spacing();
    let j = multi[axis];
    let forward = |i: usize| (-3.0 * v[i] + 4.0 * v[i + s] - v[i + 2 * s]) / (2.0 * h);
    let backward = |i: usize| (3.0 * v[i] - 4.0 * v[i - s] + v[i - 2 * s]) / (2.0 * h);
    if axis == g.dim() - 1 && j == g.pi_layer() {
        return if side_up { forward(index) } else { backward(index) };
    }
    if j == 0 {
        forward(index)
    } else if j + 1 == g.m() {
        backward(index)
    } else {
        (v[index + s] - v[index - s]) / (2.0 * h)
    }
}

/// Multilinear interpolation of the corner gradients at local coordinates
/// `t` in `[0, 1]^n`.
fn cell_gradient(dim: usize, c: &CornerGradients, t: &[f64]) -> [f64; MAX_DIM] {
    let mut w = [0.0; 1 << MAX_DIM];
    for (mask, wm) in w.iter_mut().enumerate().take(1 << dim) {
        *wm = (0..dim)
            .map(|a| if mask >> a & 1 == 1 { t[a] } else { 1.0 - t[a] })
            .product();
    }
    let mut out = [0.0; MAX_DIM];
    for (a, o) in out.iter_mut().enumerate().take(dim) {
        *o = (0..1 << dim).map(|mask| w[mask] * c[a][mask]).sum();
    }
    out
}

/// Two-point Gauss rule for `|grad u|^2` on the sub-box `lo + [0, size]^n`
/// of a cell (local coordinates), times the sub-box volume.
fn gauss_energy(dim: usize, corners: &CornerGradients, lo: &[f64], size: f64, h: f64) -> f64 {
    let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
    let mut t = [0.0; MAX_DIM];
    let mut e = 0.0;
    for q in 0..(1usize << dim) {
        for (a, ta) in t.iter_mut().enumerate().take(dim) {
            *ta = lo[a] + size * gauss[(q >> a) & 1];
        }
        let g = cell_gradient(dim, corners, &t);
        e += g[..dim].iter().map(|x| x * x).sum::<f64>();
    }
    e / (1usize << dim) as f64 * (size * h).powi(dim as i32)
}

/// Energy of the part of a cell inside `B_r(center)`, by bisecting
/// sub-boxes the sphere cuts; `origin` is the cell's lower corner
/// relative to the center.
fn cut_energy(dim: usize, corners: &CornerGradients, origin: &[f64], lo: &[f64], size: f64, h: f64, r: f64, depth: u32) -> f64 {
    let (mut near, mut far) = (0.0, 0.0);
    let mut mid = 0.0;
    for a in 0..dim {
        let x0 = origin[a] + lo[a] * h;
        let x1 = x0 + size * h;
        let n = if x0 > 0.0 { x0 } else if x1 < 0.0 { -x1 } else { 0.0 };
        near += n * n;
        far += x0.abs().max(x1.abs()).powi(2);
        mid += (0.5 * (x0 + x1)).powi(2);
    }
    if far.sqrt() <= r {
        return gauss_energy(dim, corners, lo, size, h);
    }
    if near.sqrt() >= r {
        return 0.0;
    }
    if depth == 0 {
        if mid.sqrt() > r {
            return 0.0;
        }
        let t: Vec<f64> = (0..dim).map(|a| lo[a] + 0.5 * size).collect();
        let g = cell_gradient(dim, corners, &t);
        return g[..dim].iter().map(|x| x * x).sum::<f64>() * (size * h).powi(dim as i32);
    }
    let half = 0.5 * size;
    let mut child = [0.0; MAX_DIM];
    let mut total = 0.0;
    for q in 0..(1usize << dim) {
        for a in 0..dim {
            child[a] = lo[a] + half * ((q >> a) & 1) as f64;
        }
        total += cut_energy(dim, corners, origin, &child[..dim], half, h, r, depth - 1);
    }
    total
}

/// `V_r` for each sorted radius: the integral of `|G u|^2`, where `G u` is
/// the multilinear interpolant of second-order nodal difference gradients
/// (exact for quadratics). Two-point Gauss on cells and bisected sub-boxes
/// inside the ball, midpoint rule on the finest cut sub-boxes.
fn energy_profile(u: &ScalarField, center: &[f64], radii: &[f64]) -> Vec<f64> {
    let Some(&r_max) = radii.last() else {
        return Vec::new();
    };
    let grid = u.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    let l = grid.half_width();
    let cells = grid.m() - 1;
    let corner_count = 1usize << dim;
    let pi = grid.pi_layer();

    let mut full = vec![0.0; radii.len() + 1];
    let mut partial = vec![0.0; radii.len()];
    let mut corners: CornerGradients = [[0.0; 1 << MAX_DIM]; MAX_DIM];
    let ranges: Vec<_> = (0..dim)
        .map(|a| {
            let lo = ((center[a] - r_max + l) / h).floor().max(0.0) as usize;
            let hi = (((center[a] + r_max + l) / h).ceil() as usize).min(cells);
            lo..hi
        })
        .collect();
    let mut idx = [0usize; MAX_DIM];
    let total: usize = ranges.iter().map(|r| r.len()).product();
    for flat in 0..total {
        let mut rest = flat;
        for a in (0..dim).rev() {
            let len = ranges[a].len();
            idx[a] = ranges[a].start + rest % len;
            rest /= len;
        }
        let (mut near, mut far) = (0.0, 0.0);
        for a in 0..dim {
            let lo = -l + idx[a] as f64 * h - center[a];
            let hi = lo + h;
            let n = if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
            near += n * n;
            far += lo.abs().max(hi.abs()).powi(2);
        }
        let (near, far) = (near.sqrt(), far.sqrt());
        if near > r_max {
            continue;
        }
        let side_up = idx[dim - 1] >= pi;
        for mask in 0..corner_count {
            let mut node = [0usize; MAX_DIM];
            for a in 0..dim {
                node[a] = idx[a] + (mask >> a & 1);
            }
            let index = grid.index(&node[..dim]);
            for (a, row) in corners.iter_mut().enumerate().take(dim) {
                row[mask] = nodal_derivative(u, &node[..dim], index, a, side_up);
            }
        }
        let first_full = radii.partition_point(|&r| r < far);
        let zero = [0.0; MAX_DIM];
        if first_full < radii.len() {
            full[first_full] += gauss_energy(dim, &corners, &zero[..dim], 1.0, h);
        }
        let first_cut = radii.partition_point(|&r| r <= near);
        if first_cut < first_full {
            let mut origin = [0.0; MAX_DIM];
            for a in 0..dim {
                origin[a] = -l + idx[a] as f64 * h - center[a];
            }
            for k in first_cut..first_full {
                partial[k] += cut_energy(dim, &corners, &origin[..dim], &zero[..dim], 1.0, h, radii[k], CUT_DEPTH[dim - 2]);
            }
        }
    }
    let mut acc = 0.0;
    (0..radii.len())
        .map(|k| {
            acc += full[k];
            acc + partial[k]
        })
        .collect()
}

pub fn ball_integrals(u: &ScalarField, center: &[f64], r: f64) -> Result<BallIntegrals> {
    let grid = u.grid();
    check_center(grid, center)?;
    check_radius(grid, center, r)?;
    let s_r = surface_u2(u, center, r)?;
    let v_r = energy_profile(u, center, &[r])[0];
    Ok(BallIntegrals {
        s_r,
        v_r,
        phi_avg: s_r / sphere_area(grid.dim(), r),
    })
}

/// Frequency and sphere averages at each radius, plus the `mu` fit when
/// enough radii fall in the fit window.
pub fn frequency_profile(u: &ScalarField, center: &[f64], radii: &[f64]) -> Result<FrequencyReport> {
    let grid = u.grid();
    check_center(grid, center)?;
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    for &r in &radii {
        check_radius(grid, center, r)?;
    }
    let volumes = energy_profile(u, center, &radii);
    let scale = u.max_abs().powi(2);
    let mut samples = Vec::with_capacity(radii.len());
    for (&r, &v_r) in radii.iter().zip(&volumes) {
        let s_r = surface_u2(u, center, r)?;
        let phi_avg = s_r / sphere_area(grid.dim(), r);
        let d_r = (phi_avg > DEGENERATE_PHI * scale && s_r > 0.0).then(|| r * v_r / s_r);
        samples.push(RadiusSample { r, s_r, v_r, d_r, phi_avg });
    }
    let degenerate = samples.iter().all(|s| s.d_r.is_none());
    let at_center = u.interpolate(center)?;
    let mut report = FrequencyReport {
        center: center.to_vec(),
        spacing: grid.spacing(),
        half_width: grid.half_width(),
        samples,
        mu: None,
        degenerate,
        hypothesis_violated: at_center.abs() > grid.spacing() * u.max_abs(),
    };
    report.mu = estimate_mu(&report).ok();
    Ok(report)
}

/// `mu` as half the least-squares slope of `log phi_avg` against `log r`
/// over `[max(8h, r_first), min(L/4, r_last)]`.
pub fn estimate_mu(report: &FrequencyReport) -> Result<MuEstimate> {
    let first = report.samples.first().map_or(0.0, |s| s.r);
    let last = report.samples.last().map_or(0.0, |s| s.r);
    let r_min = (8.0 * report.spacing).max(first);
    let r_max = (0.25 * report.half_width).min(last);
    estimate_mu_in(report, r_min, r_max)
}

/// [`estimate_mu`] over an explicit window.
pub fn estimate_mu_in(report: &FrequencyReport, r_min: f64, r_max: f64) -> Result<MuEstimate> {
    let slack = 1e-9 * report.spacing;
    let points: Vec<(f64, f64)> = report
        .samples
        .iter()
        .filter(|s| s.r >= r_min - slack && s.r <= r_max + slack && s.d_r.is_some())
        .map(|s| (s.r.ln(), s.phi_avg.ln()))
        .collect();
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable radii in [{r_min:.4}, {r_max:.4}], need 4",
            points.len()
        )));
    }
    let (slope, intercept) = least_squares_line(&points);
    let residual = (points
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(MuEstimate {
        mu: 0.5 * slope,
        r_min,
        r_max,
        residual,
        radii_used: points.len(),
    })
}

pub(crate) fn least_squares_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub tol_mono: f64,
    /// Exponent used for the `r^{-2 mu} phi` test: the fitted `mu`, capped
    /// by `D_r` at the smallest radius (the frequency at the point bounds
    /// every `D_r` from below, a window fit need not).
    pub mu_phi: f64,
    /// Consecutive radius pairs with `D_{r_{i+1}} < D_{r_i} - tol`.
    pub freq_violations: Vec<(f64, f64)>,
    /// Consecutive pairs where `r^{-2 mu} phi_avg` drops by more than `tol`.
    pub phi_violations: Vec<(f64, f64)>,
    /// Pairs `r < R` in the fit window breaking the doubling bound.
    pub doubling_violations: Vec<(f64, f64)>,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.freq_violations.is_empty()
            && self.phi_violations.is_empty()
            && self.doubling_violations.is_empty()
    }
}

/// Checks `D_r` nondecreasing, `r^{-2 mu} phi(r)` nondecreasing, and
/// `phi(R) <= (R/r)^{2(mu + eps)} phi(r)` with `tol = 5e-3 (1 + max D_r)`.
/// The `phi` test uses [`MonotonicityReport::mu_phi`].
pub fn monotonicity_report(report: &FrequencyReport, eps: f64) -> Result<MonotonicityReport> {
    let mu = report
        .mu
        .ok_or_else(|| Error::InsufficientData("report carries no mu estimate".into()))?;
    let tol = 5e-3 * (1.0 + report.max_frequency().unwrap_or(0.0));
    let live: Vec<&RadiusSample> = report.samples.iter().filter(|s| s.d_r.is_some()).collect();
    let mu_phi = live.first().and_then(|s| s.d_r).map_or(mu.mu, |d0| d0.min(mu.mu));
    let mut out = MonotonicityReport {
        tol_mono: tol,
        mu_phi,
        freq_violations: Vec::new(),
        phi_violations: Vec::new(),
        doubling_violations: Vec::new(),
    };
    for pair in live.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.d_r.unwrap() < a.d_r.unwrap() - tol {
            out.freq_violations.push((a.r, b.r));
        }
        let qa = a.r.powf(-2.0 * mu_phi) * a.phi_avg;
        let qb = b.r.powf(-2.0 * mu_phi) * b.phi_avg;
        if qb < qa * (1.0 - tol) {
            out.phi_violations.push((a.r, b.r));
        }
    }
    let slack = 1e-9 * report.spacing;
    let window: Vec<&&RadiusSample> = live
        .iter()
        .filter(|s| s.r >= mu.r_min - slack && s.r <= mu.r_max + slack)
        .collect();
    for (i, small) in window.iter().enumerate() {
        for large in &window[i + 1..] {
            let bound = (large.r / small.r).powf(2.0 * (mu.mu + eps)) * small.phi_avg;
            if large.phi_avg > bound * (1.0 + tol) {
                out.doubling_violations.push((small.r, large.r));
            }
        }
    }
    Ok(out)
}

/// Relative defect of the Rellich identity
/// `(n-2) V_r = r int_{dB_r} |grad u|^2 - 2 r int_{dB_r} u_nu^2`.
pub fn rellich_check(u: &ScalarField, center: &[f64], r: f64) -> Result<f64> {
    let grid = u.grid();
    let dim = grid.dim();
    let ball = ball_integrals(u, center, r)?;
    if ball.v_r <= 0.0 {
        return Err(Error::Degenerate("V_r vanishes".into()));
    }
    let rule = SphereRule::for_radius(dim, r, grid.spacing());
    let area = sphere_area(dim, r);
    let mut grad_sq = 0.0;
    let mut normal_sq = 0.0;
    for (p, d) in rule.points(center, r).zip(rule.directions()) {
        let g = u.gradient(&p[..dim])?;
        grad_sq += g[..dim].iter().map(|x| x * x).sum::<f64>();
        let un: f64 = g[..dim].iter().zip(&d[..dim]).map(|(a, b)| a * b).sum();
        normal_sq += un * un;
    }
    let w = area / rule.len() as f64;
    let lhs = (dim as f64 - 2.0) * ball.v_r;
    let rhs = r * w * (grad_sq - 2.0 * normal_sq);
    Ok((lhs - rhs).abs() / ball.v_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{lewy_family, regular_profile, LewyType};
    use crate::grid::Direction;
    use crate::quadrature::ball_volume;
    use approx::assert_relative_eq;

    fn field(dim: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        ScalarField::sample(Grid::new(dim, m, 1.0).unwrap(), f).unwrap()
    }

    #[test]
    fn constant_field() {
        let u = field(3, 33, |_| 1.0);
        let b = ball_integrals(&u, &[0.0, 0.0, 0.0], 0.5).unwrap();
        assert_relative_eq!(b.s_r, sphere_area(3, 0.5), max_relative = 1e-6);
        assert_eq!(b.v_r, 0.0);
        assert_relative_eq!(b.phi_avg, 1.0, max_relative = 1e-6);
        assert!(matches!(rellich_check(&u, &[0.0, 0.0, 0.0], 0.5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn linear_field_closed_forms() {
        let u = field(3, 65, |p| p[0]);
        let r = 0.5;
        let b = ball_integrals(&u, &[0.0, 0.0, 0.0], r).unwrap();
        assert_relative_eq!(b.phi_avg, r * r / 3.0, max_relative = 1e-3);
        assert_relative_eq!(b.v_r, ball_volume(3, r), max_relative = 1e-2);
    }

    #[test]
    fn rejects_bad_radii_and_centers() {
        let u = field(2, 33, |p| p[0]);
        let h = u.grid().spacing();
        assert!(matches!(
            ball_integrals(&u, &[0.0, 0.0], 2.0 * h),
            Err(Error::InvalidRadius { .. })
        ));
        assert!(matches!(
            ball_integrals(&u, &[0.0, 0.0], 0.95),
            Err(Error::InvalidRadius { .. })
        ));
        assert!(ball_integrals(&u, &[0.0, 0.1], 0.3).is_err());
    }

    #[test]
    fn insufficient_radii() {
        let u = field(2, 65, |p| p[0]);
        let report = frequency_profile(&u, &[0.0, 0.0], &[0.15, 0.2, 0.25]).unwrap();
        assert!(report.mu.is_none());
        assert!(matches!(estimate_mu(&report), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn frequency_is_scale_invariant() {
        let axis = Direction::axis(2, 0);
        let u = field(2, 65, |p| regular_profile(p, &axis) + 0.1 * p[0]);
        let center = [0.0, 0.0];
        let radii = default_radii(u.grid(), &center);
        let a = frequency_profile(&u, &center, &radii).unwrap();
        for c in [-3.0, 0.25, 7.5] {
            let b = frequency_profile(&u.scaled(c), &center, &radii).unwrap();
            for (x, y) in a.samples.iter().zip(&b.samples) {
                assert_relative_eq!(x.d_r.unwrap(), y.d_r.unwrap(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn zero_field_is_degenerate() {
        let u = field(2, 33, |_| 0.0);
        let report = frequency_profile(&u, &[0.0, 0.0], &[0.3, 0.35]).unwrap();
        assert!(report.degenerate);
        assert!(report.samples.iter().all(|s| s.d_r.is_none()));
    }

    #[test]
    fn off_zero_center_is_flagged() {
        let u = field(2, 65, |p| 1.0 + p[0]);
        let report = frequency_profile(&u, &[0.0, 0.0], &[0.2, 0.25]).unwrap();
        assert!(report.hypothesis_violated);
        let v = field(2, 65, |p| p[0]);
        let report = frequency_profile(&v, &[0.0, 0.0], &[0.2, 0.25]).unwrap();
        assert!(!report.hypothesis_violated);
    }

    #[test]
    fn constructed_frequency_drop_is_reported() {
        // D_r of x_1 is 1; a report whose frequency dips by 0.1 must be flagged
        let u = field(2, 129, |p| p[0]);
        let center = [0.0, 0.0];
        let mut report = frequency_profile(&u, &center, &default_radii(u.grid(), &center)).unwrap();
        assert!(monotonicity_report(&report, 0.05).unwrap().freq_violations.is_empty());
        let k = report.samples.len() / 2;
        let dropped = report.samples[k].r;
        let s = &mut report.samples[k + 1];
        s.d_r = s.d_r.map(|d| d - 0.1);
        let mono = monotonicity_report(&report, 0.05).unwrap();
        assert_eq!(mono.freq_violations.first().map(|p| p.0), Some(dropped));
    }

    #[test]
    fn phi_test_uses_frequency_at_the_point() {
        // D_r grows from 1 with r, so a window fit overshoots the small radii
        let u = field(2, 129, |p| p[0] + 2.0 * (p[0] * p[0] - p[1] * p[1]));
        let center = [0.0, 0.0];
        let mut report = frequency_profile(&u, &center, &default_radii(u.grid(), &center)).unwrap();
        let first = report.samples[0].d_r.unwrap();
        let mono = monotonicity_report(&report, 0.05).unwrap();
        assert!(report.mu.unwrap().mu > first);
        assert_eq!(mono.mu_phi, first);
        assert!(mono.phi_violations.is_empty(), "{mono:?}");
        // a genuine drop in phi is still caught
        report.samples[3].phi_avg *= 0.9;
        let mono = monotonicity_report(&report, 0.05).unwrap();
        assert_eq!(mono.phi_violations.first().map(|p| p.0), Some(report.samples[2].r));
    }

    #[test]
    fn lewy_half_integer_mu() {
        let u = field(2, 129, |p| lewy_family(2, LewyType::HalfInteger, p));
        let center = [0.0, 0.0];
        let report = frequency_profile(&u, &center, &default_radii(u.grid(), &center)).unwrap();
        let mu = report.mu.unwrap();
        assert!((mu.mu - 2.5).abs() <= 0.03, "{mu:?}");
    }

    #[test]
    fn rellich_identity_for_harmonic_polynomials() {
        let u = field(2, 129, |p| p[0] * p[0] - p[1] * p[1]);
        assert!(rellich_check(&u, &[0.0, 0.0], 0.4).unwrap() < 1e-2);
        let u = field(3, 65, |p| p[0] * p[1] + 0.5 * p[0] - p[2] * p[2] + 0.5 * (p[0] * p[0] + p[1] * p[1]));
        assert!(rellich_check(&u, &[0.0, 0.0, 0.0], 0.4).unwrap() < 1e-2);
    }
}
