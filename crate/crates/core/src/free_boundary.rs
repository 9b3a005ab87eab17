//! Contact set and free boundary on `Pi`, monotone cones, the barrier
//! comparison and the Hölder diagnostic for directional quotients.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::least_squares_line;
use crate::grid::{Direction, Grid, ScalarField, MAX_DIM};

/// Free-boundary cells closer than this many spacings to the box edge are untrusted.
const EDGE_CELLS: f64 = 2.0;

/// Contact mask on the `Pi` layer, in `Grid::pi_nodes` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSet {
    grid: Grid,
    mask: Vec<bool>,
    tol: f64,
    trace: Option<Vec<f64>>,
}

impl ContactSet {
    /// A mask without field values; crossings fall back to cell midpoints.
    pub fn from_mask(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        let expected = grid.m().pow(grid.dim() as u32 - 1);
        if mask.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "mask has {} entries, the Pi layer has {expected}",
                mask.len()
            )));
        }
        Ok(Self {
            grid,
            mask,
            tol: 0.0,
            trace: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn contact_count(&self) -> usize {
        self.mask.iter().filter(|&&c| c).count()
    }

    /// Position of `Pi` node `k` (the `x_n` entry is zero).
    pub fn position(&self, k: usize) -> [f64; MAX_DIM] {
        let g = &self.grid;
        g.position(k * g.m() + g.pi_layer())
    }

    /// Whether the `Pi` node nearest to `p` is in contact.
    pub fn contains(&self, p: &[f64]) -> bool {
        let g = &self.grid;
        let l = g.half_width();
        let h = g.spacing();
        let k = (0..g.dim() - 1).fold(0, |acc, a| {
            let i = ((p[a] + l) / h).round().clamp(0.0, (g.m() - 1) as f64) as usize;
            acc * g.m() + i
        });
        self.mask[k]
    }

    /// Contact node positions, one row per node.
    pub fn contact_points(&self) -> Vec<Vec<f64>> {
        let dim = self.grid.dim();
        (0..self.mask.len())
            .filter(|&k| self.mask[k])
            .map(|k| self.position(k)[..dim].to_vec())
            .collect()
    }
}

/// Contact where `u(x', 0) <= tol`, default `tol = h max|u|`.
pub fn extract_contact(u: &ScalarField, tol: Option<f64>) -> ContactSet {
    let grid = *u.grid();
    let tol = tol.unwrap_or(grid.spacing() * u.max_abs());
    let trace = u.pi_trace();
    ContactSet {
        grid,
        mask: trace.iter().map(|&v| v <= tol).collect(),
        tol,
        trace: Some(trace),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceCell {
    /// Lower-corner index of the cell in the `Pi` layer (`n - 1` entries).
    pub corner: Vec<usize>,
    /// Cell center, `x_n = 0` included.
    pub center: Vec<f64>,
    pub untrusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSample {
    /// `x_1 .. x_{n-2}` (empty in 2D).
    pub transverse: Vec<f64>,
    /// Crossing location in `x_{n-1}`; `None` without a single crossing.
    pub value: Option<f64>,
    pub multi_crossing: bool,
    pub untrusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphFit {
    pub samples: Vec<GraphSample>,
    /// Largest slope between consecutive trusted samples.
    pub lipschitz: f64,
}

impl GraphFit {
    /// Points `(x', f(x'), 0)` of trusted samples.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .filter(|s| !s.untrusted)
            .filter_map(|s| {
                s.value.map(|f| {
                    let mut p = s.transverse.clone();
                    p.push(f);
                    p.push(0.0);
                    p
                })
            })
            .collect()
    }

    /// Lipschitz constant of trusted consecutive samples whose transverse
    /// coordinates lie within `radius` of `center`.
    pub fn lipschitz_within(&self, center: &[f64], radius: f64) -> f64 {
        let inside = |s: &GraphSample| {
            s.transverse
                .iter()
                .zip(center)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                <= radius
        };
        slopes(&self.samples, inside)
    }

    /// Unit normal in `Pi` pointing towards increasing `x_{n-1}` (away from
    /// the contact set when it lies below the graph), from the least-squares
    /// slope of trusted samples within `radius` of `transverse`. 2D graphs
    /// return `e_1`.
    pub fn normal_at(&self, transverse: &[f64], radius: f64) -> Option<Vec<f64>> {
        let Some(&t0) = transverse.first() else {
            return Some(vec![1.0, 0.0]);
        };
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| !s.untrusted && (s.transverse[0] - t0).abs() <= radius)
            .filter_map(|s| s.value.map(|f| (s.transverse[0], f)))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let (slope, _) = least_squares_line(&pts);
        let norm = (1.0 + slope * slope).sqrt();
        Some(vec![-slope / norm, 1.0 / norm, 0.0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_transverse,f\n");
        for s in &self.samples {
            if let (Some(f), false) = (s.value, s.untrusted) {
                let t = s.transverse.first().copied().unwrap_or(0.0);
                out.push_str(&format!("{t:?},{f:?}\n"));
            }
        }
        out
    }
}

fn slopes(samples: &[GraphSample], keep: impl Fn(&GraphSample) -> bool) -> f64 {
    let mut max: f64 = 0.0;
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.untrusted || b.untrusted || !keep(a) || !keep(b) {
            continue;
        }
        if let (Some(fa), Some(fb)) = (a.value, b.value) {
            let dx = (b.transverse[0] - a.transverse[0]).abs();
            max = max.max((fb - fa).abs() / dx);
        }
    }
    max
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeBoundaryResult {
    pub interface_cells: Vec<InterfaceCell>,
    /// `None` when no transverse line has a single crossing.
    pub graph: Option<GraphFit>,
}

impl FreeBoundaryResult {
    pub fn lipschitz(&self) -> Option<f64> {
        self.graph.as_ref().map(|g| g.lipschitz)
    }

    /// Trusted free-boundary points: graph crossings when available,
    /// otherwise interface cell centers.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match &self.graph {
            Some(g) => g.points(),
            None => self
                .interface_cells
                .iter()
                .filter(|c| !c.untrusted)
                .map(|c| c.center.clone())
                .collect(),
        }
    }

    pub fn untrusted_count(&self) -> usize {
        self.interface_cells.iter().filter(|c| c.untrusted).count()
    }
}

/// Interface cells and, for graph-like sets, `x_{n-1} = f(x_1, .., x_{n-2})`.
pub fn extract_free_boundary(contact: &ContactSet) -> Result<FreeBoundaryResult> {
    let count = contact.contact_count();
    if count == 0 || count == contact.mask.len() {
        return Err(Error::NoFreeBoundary(if count == 0 {
            "contact set is empty".into()
        } else {
            "contact set covers the whole layer".into()
        }));
    }
    Ok(FreeBoundaryResult {
        interface_cells: interface_cells(contact),
        graph: graph_fit(contact),
    })
}

fn untrusted(grid: &Grid, p: &[f64]) -> bool {
    let limit = grid.half_width() - EDGE_CELLS * grid.spacing() * (1.0 + 1e-9);
    p.iter().any(|x| x.abs() > limit)
}

fn interface_cells(contact: &ContactSet) -> Vec<InterfaceCell> {
    let g = &contact.grid;
    let m = g.m();
    let h = g.spacing();
    let k_dim = g.dim() - 1;
    let cells = m - 1;
    let mut out = Vec::new();
    for flat in 0..cells.pow(k_dim as u32) {
        let corner: Vec<usize> = if k_dim == 1 {
            vec![flat]
        } else {
            vec![flat / cells, flat % cells]
        };
        let mut seen = [false; 2];
        let mut far_edge = false;
        for mask in 0..(1usize << k_dim) {
            let idx: Vec<usize> = (0..k_dim).map(|a| corner[a] + ((mask >> a) & 1)).collect();
            let k = idx.iter().fold(0, |acc, &i| acc * m + i);
            seen[usize::from(contact.mask[k])] = true;
            let p: Vec<f64> = idx.iter().map(|&i| g.coord(i)).collect();
            far_edge |= untrusted(g, &p);
        }
        if seen[0] && seen[1] {
            let mut center: Vec<f64> = corner.iter().map(|&i| g.coord(i) + 0.5 * h).collect();
            center.push(0.0);
            out.push(InterfaceCell {
                corner,
                center,
                untrusted: far_edge,
            });
        }
    }
    out
}

/// Crossing between positions `j` and `j+1` of `line`. With field values,
/// `u^{2/3}` is extrapolated linearly from the first two non-contact
/// nodes (exact for `u = d^{3/2}`); otherwise the midpoint.
fn crossing(grid: &Grid, line: &[usize], mask: &[bool], trace: Option<&[f64]>, j: usize) -> f64 {
    let x = |i: usize| grid.coord(i);
    let mid = 0.5 * (x(j) + x(j + 1));
    let Some(trace) = trace else {
        return mid;
    };
    // a, b step into the non-contact side; back steps the other way
    let (a, b, forward) = if mask[line[j]] {
        (j + 1, j + 2, true)
    } else {
        if j == 0 {
            return mid;
        }
        (j, j - 1, false)
    };
    if b >= line.len() || mask[line[b]] {
        return mid;
    }
    let wa = trace[line[a]].max(0.0).powf(2.0 / 3.0);
    let wb = trace[line[b]].max(0.0).powf(2.0 / 3.0);
    if wb <= wa {
        return mid;
    }
    // the zero lies near the last flagged node with u <= 0
    let mut zero_node = if forward { j } else { j + 1 };
    loop {
        if trace[line[zero_node]] <= 0.0 || !mask[line[zero_node]] {
            break;
        }
        let next = if forward { zero_node.checked_sub(1) } else { Some(zero_node + 1) };
        match next {
            Some(k) if k < line.len() && mask[line[k]] => zero_node = k,
            _ => break,
        }
    }
    // the discrete solution reaches zero up to one cell before the
    // continuum extrapolation does, so allow one extra cell
    let zero = x(a) - wa * (x(b) - x(a)) / (wb - wa);
    let h = grid.spacing();
    let (lo, hi) = if x(zero_node) < x(a) {
        (x(zero_node) - h, x(a))
    } else {
        (x(a), x(zero_node) + h)
    };
    zero.clamp(lo, hi)
}

fn graph_fit(contact: &ContactSet) -> Option<GraphFit> {
    let g = &contact.grid;
    let m = g.m();
    let k_dim = g.dim() - 1;
    let lines = if k_dim == 1 { 1 } else { m };
    let trace = contact.trace.as_deref();
    let mut samples = Vec::with_capacity(lines);
    for t in 0..lines {
        let line: Vec<usize> = (0..m).map(|j| t * m + j).collect();
        let flips: Vec<usize> = (0..m - 1)
            .filter(|&j| contact.mask[line[j]] != contact.mask[line[j + 1]])
            .collect();
        let transverse = if k_dim == 1 { Vec::new() } else { vec![g.coord(t)] };
        let value = (flips.len() == 1).then(|| crossing(g, &line, &contact.mask, trace, flips[0]));
        let mut probe = transverse.clone();
        probe.push(value.unwrap_or(0.0));
        samples.push(GraphSample {
            untrusted: untrusted(g, &probe),
            transverse,
            value,
            multi_crossing: flips.len() > 1,
        });
    }
    if !samples.iter().any(|s| s.value.is_some()) {
        return None;
    }
    let lipschitz = slopes(&samples, |_| true);
    Some(GraphFit { samples, lipschitz })
}

/// Tangential unit vector orthogonal to `e` (3D only).
fn perpendicular(e: &Direction) -> Option<[f64; 3]> {
    let c = e.components();
    (c.len() == 3).then(|| [-c[1], c[0], 0.0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeReport {
    /// Smallest `D_tau u` over probes and cone directions.
    pub min: f64,
    /// Largest `D_tau u` over the same probes and directions.
    pub max: f64,
    /// Largest `|grad u|` over grid nodes in the region.
    pub max_gradient: f64,
    pub probes: usize,
}

/// `D_tau u` on `Pi` nodes within `radius` of `center` (at least `2h`
/// inside the box) for `tau` on the axis and the boundary of the
/// tangential cone of half-opening `theta` about `axis`.
pub fn cone_monotonicity(
    u: &ScalarField,
    axis: &Direction,
    theta: f64,
    center: &[f64],
    radius: f64,
) -> Result<ConeReport> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("cone half-opening {theta} outside (0, pi/2]")));
    }
    let grid = u.grid();
    let dim = grid.dim();
    let e = axis.components();
    let mut directions = vec![*axis];
    if let Some(perp) = perpendicular(axis) {
        for s in [1.0, -1.0] {
            let v: Vec<f64> = (0..3).map(|a| theta.cos() * e[a] + s * theta.sin() * perp[a]).collect();
            directions.push(Direction::new(&v)?);
        }
    }
    let inside = |p: &[f64]| {
        p.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= radius * radius
            && !untrusted(grid, &p[..dim])
    };
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut probes = 0;
    for k in grid.pi_nodes() {
        let p = grid.position(k);
        if !inside(&p[..dim]) {
            continue;
        }
        probes += 1;
        for tau in &directions {
            let d = u.directional_derivative(&p[..dim], tau)?;
            min = min.min(d);
            max = max.max(d);
        }
    }
    let mut max_gradient: f64 = 0.0;
    for index in 0..grid.node_count() {
        let p = grid.position(index);
        if inside(&p[..dim]) {
            let g = u.gradient(&p[..dim])?;
            max_gradient = max_gradient.max(g[..dim].iter().map(|x| x * x).sum::<f64>().sqrt());
        }
    }
    if probes == 0 {
        return Err(Error::InsufficientData("no Pi nodes in the cone region".into()));
    }
    Ok(ConeReport {
        min,
        max,
        max_gradient,
        probes,
    })
}

/// `|x' - z'|^2 - (n - 1) x_n^2`.
pub fn barrier_polynomial(p: &[f64], z: &[f64]) -> f64 {
    let n = p.len();
    let tangential: f64 = (0..n - 1).map(|a| (p[a] - z[a]).powi(2)).sum();
    tangential - (n - 1) as f64 * p[n - 1] * p[n - 1]
}

/// Half-height `1 / (4(n-1))` of the comparison box.
pub fn barrier_half_height(dim: usize) -> f64 {
    1.0 / (4.0 * (dim - 1) as f64)
}

/// Largest admissible barrier weight `16 (n-1) c0`.
pub fn barrier_delta(dim: usize, c0: f64) -> f64 {
    16.0 * (dim - 1) as f64 * c0
}

/// `min h` over nodes of `Q` with `|x_n| >= 1 / (8(n-1))`.
pub fn measure_c0(hfield: &ScalarField, z: &[f64]) -> Result<f64> {
    let grid = hfield.grid();
    let dim = grid.dim();
    let top = barrier_half_height(dim);
    let mut c0 = f64::INFINITY;
    for index in 0..grid.node_count() {
        let p = grid.position(index);
        let t: f64 = (0..dim - 1).map(|a| (p[a] - z[a]).powi(2)).sum::<f64>().sqrt();
        let xn = p[dim - 1].abs();
        if t <= 1.0 / 3.0 && xn >= 0.5 * top && xn <= top {
            c0 = c0.min(hfield.values()[index]);
        }
    }
    if c0.is_infinite() {
        return Err(Error::InsufficientData("no nodes in the upper part of Q".into()));
    }
    Ok(c0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierReport {
    pub delta: f64,
    pub sigma: f64,
    /// `min (h + delta P)` on the caps `|x_n| = 1/(4(n-1))`.
    pub min_caps: f64,
    /// Same on the lateral side with `|x_n| >= sigma`.
    pub min_lateral: f64,
    /// Same on the lateral side inside the strip `|x_n| < sigma`.
    pub min_strip: f64,
    /// Same on contact nodes in `Q`; `None` without a contact set or contact there.
    pub min_contact: Option<f64>,
    /// Largest `|Delta_h P|` over interior nodes.
    pub laplacian_defect: f64,
    /// `h + delta P >= 0` on `dQ` and `Lambda` within round-off.
    pub pass: bool,
}

impl BarrierReport {
    pub fn min_boundary(&self) -> f64 {
        self.min_caps.min(self.min_lateral).min(self.min_strip)
    }
}

/// Evaluates `v = h + delta P` on the boundary of
/// `Q = {|x' - z'| <= 1/3, |x_n| < 1/(4(n-1))}` and on contact nodes in `Q`.
pub fn barrier_check(
    hfield: &ScalarField,
    z: &[f64],
    delta: f64,
    sigma: f64,
    contact: Option<&ContactSet>,
) -> Result<BarrierReport> {
    let grid = hfield.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    let top = barrier_half_height(dim);
    if z.len() != dim {
        return Err(Error::InvalidArgument("barrier center dimension mismatch".into()));
    }
    let reach = (0..dim - 1).map(|a| z[a].abs()).fold(0.0, f64::max) + 1.0 / 3.0;
    if reach > grid.half_width() || top > grid.half_width() {
        return Err(Error::InvalidArgument("barrier box Q leaves the grid".into()));
    }
    let v = |p: &[f64]| hfield.interpolate(p).map(|x| x + delta * barrier_polynomial(p, z));

    // tangential sample of the disk |x' - z'| <= 1/3 and its rim
    let rim_count = ((2.0 * std::f64::consts::PI / 3.0 / h).ceil() as usize * 2).max(64);
    let mut rim = Vec::new();
    let mut disk = Vec::new();
    if dim == 2 {
        rim.push(vec![z[0] - 1.0 / 3.0]);
        rim.push(vec![z[0] + 1.0 / 3.0]);
        let steps = (2.0 / 3.0 / (0.5 * h)).ceil() as usize;
        disk.extend((0..=steps).map(|k| vec![z[0] - 1.0 / 3.0 + k as f64 * (2.0 / 3.0) / steps as f64]));
    } else {
        for k in 0..rim_count {
            let a = 2.0 * std::f64::consts::PI * k as f64 / rim_count as f64;
            rim.push(vec![z[0] + a.cos() / 3.0, z[1] + a.sin() / 3.0]);
        }
        let rings = (1.0 / 3.0 / (0.5 * h)).ceil() as usize;
        disk.push(vec![z[0], z[1]]);
        for ring in 1..=rings {
            let rho = ring as f64 / rings as f64 / 3.0;
            let count = ((2.0 * std::f64::consts::PI * rho / (0.5 * h)).ceil() as usize).max(8);
            for k in 0..count {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                disk.push(vec![z[0] + rho * a.cos(), z[1] + rho * a.sin()]);
            }
        }
    }
    let with_xn = |t: &[f64], xn: f64| {
        let mut p = t.to_vec();
        p.push(xn);
        p
    };

    let mut min_caps = f64::INFINITY;
    for t in &disk {
        for xn in [top, -top] {
            min_caps = min_caps.min(v(&with_xn(t, xn))?);
        }
    }
    let heights = (2.0 * top / (0.5 * h)).ceil() as usize;
    let (mut min_lateral, mut min_strip) = (f64::INFINITY, f64::INFINITY);
    for t in &rim {
        for k in 0..=heights {
            let xn = -top + 2.0 * top * k as f64 / heights as f64;
            let value = v(&with_xn(t, xn))?;
            if xn.abs() < sigma {
                min_strip = min_strip.min(value);
            } else {
                min_lateral = min_lateral.min(value);
            }
        }
    }
    let min_contact = contact.and_then(|c| {
        c.contact_points()
            .into_iter()
            .filter(|p| (0..dim - 1).map(|a| (p[a] - z[a]).powi(2)).sum::<f64>() <= 1.0 / 9.0)
            .filter_map(|p| v(&p).ok())
            .reduce(f64::min)
    });

    let poly = ScalarField::sample(*grid, |p| barrier_polynomial(p, z))?;
    let mut laplacian_defect: f64 = 0.0;
    for index in 0..grid.node_count() {
        if !grid.is_boundary(&grid.multi_index(index)[..dim]) {
            laplacian_defect = laplacian_defect.max(poly.discrete_laplacian(index).abs());
        }
    }

    let slack = 1e-12 * (1.0 + hfield.max_abs());
    let min_boundary = min_caps.min(min_lateral).min(min_strip);
    let pass = min_boundary >= -slack && min_contact.is_none_or(|c| c >= -slack);
    Ok(BarrierReport {
        delta,
        sigma,
        min_caps,
        min_lateral,
        min_strip,
        min_contact,
        laplacian_defect,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientEstimate {
    /// Fitted exponent; `None` for a constant quotient.
    pub alpha: Option<f64>,
    pub constant_quotient: bool,
    pub residual: f64,
    pub probes: usize,
    /// `(d, osc)` pairs used in the fit.
    pub oscillation: Vec<(f64, f64)>,
}

/// Hölder exponent of `q = D_tau u / D_e u` near the free boundary.
///
/// Probes are non-contact `Pi` nodes within `band` of a free-boundary
/// point (and within `region` of `center` when given) where
/// `|D_e u| >= 1e-3 max|grad u|`. Both derivatives are taken from the
/// centered gradient. `osc(d)` is the largest `|q(x) - q(y)|` over probe
/// pairs with `|x - y| <= d`; `alpha` is the log-log slope over
/// `d in [2h, band]`.
pub fn quotient_diagnostic(
    u: &ScalarField,
    tau: &Direction,
    axis: &Direction,
    band: f64,
    contact: &ContactSet,
    free_boundary: &FreeBoundaryResult,
    region: Option<(&[f64], f64)>,
) -> Result<QuotientEstimate> {
    let grid = u.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    let fb = free_boundary.points();
    let mut grads = Vec::new();
    let mut max_grad: f64 = 0.0;
    for k in grid.pi_nodes() {
        let p = grid.position(k);
        let p = &p[..dim];
        if untrusted(grid, p) {
            continue;
        }
        if let Some((c, r)) = region {
            if p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() > r * r {
                continue;
            }
        }
        let g = u.gradient(p)?;
        max_grad = max_grad.max(g[..dim].iter().map(|x| x * x).sum::<f64>().sqrt());
        if contact.contains(p) {
            continue;
        }
        let near = fb
            .iter()
            .map(|f| f.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        if near <= band {
            grads.push((p.to_vec(), g));
        }
    }
    let eps_den = 1e-3 * max_grad;
    let probes: Vec<(Vec<f64>, f64)> = grads
        .into_iter()
        .filter_map(|(p, g)| {
            let den = axis.dot(&g[..dim]);
            (den.abs() >= eps_den && den != 0.0).then(|| (p, tau.dot(&g[..dim]) / den))
        })
        .collect();
    if probes.len() < 2 {
        return Err(Error::InsufficientData(
            "no probe point has a denominator above 1e-3 max|grad u|".into(),
        ));
    }
    let bins = (band / h).floor() as usize;
    let mut osc = vec![0.0f64; bins + 1];
    for (i, (p, qp)) in probes.iter().enumerate() {
        for (q, qq) in &probes[i + 1..] {
            let d = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let bin = (d / h - 1e-9).ceil() as usize;
            if bin <= bins {
                osc[bin] = osc[bin].max((qp - qq).abs());
            }
        }
    }
    // cumulative maximum: pairs at distance <= d
    for k in 1..osc.len() {
        osc[k] = osc[k].max(osc[k - 1]);
    }
    let q_scale = probes.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1.0);
    let oscillation: Vec<(f64, f64)> = (2..=bins).map(|k| (k as f64 * h, osc[k])).collect();
    if oscillation.iter().all(|&(_, o)| o <= 1e-12 * q_scale) {
        return Ok(QuotientEstimate {
            alpha: None,
            constant_quotient: true,
            residual: 0.0,
            probes: probes.len(),
            oscillation,
        });
    }
    let points: Vec<(f64, f64)> = oscillation
        .iter()
        .filter(|&&(_, o)| o > 1e-12 * q_scale)
        .map(|&(d, o)| (d.ln(), o.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distances in [2h, band] carry oscillation, need 3",
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
    Ok(QuotientEstimate {
        alpha: Some(slope),
        constant_quotient: false,
        residual,
        probes: probes.len(),
        oscillation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{regular_profile, regular_profile_gradient};
    use approx::assert_relative_eq;

    fn field(dim: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        ScalarField::sample(Grid::new(dim, m, 1.0).unwrap(), f).unwrap()
    }

    #[test]
    fn constant_field_has_no_contact() {
        let u = field(2, 33, |_| 1.0);
        let c = extract_contact(&u, Some(u.grid().spacing()));
        assert_eq!(c.contact_count(), 0);
        assert!(matches!(extract_free_boundary(&c), Err(Error::NoFreeBoundary(_))));
    }

    #[test]
    fn regular_profile_contact_is_half_plane() {
        let axis = Direction::axis(3, 1);
        let u = field(3, 33, |p| regular_profile(p, &axis));
        let h = u.grid().spacing();
        // a round-off tolerance recovers the half-plane exactly
        let exact = extract_contact(&u, Some(1e-12));
        for (k, &inside) in exact.mask().iter().enumerate() {
            assert_eq!(inside, exact.position(k)[1] <= 0.0);
        }
        // the default tolerance h max|u| widens it by at most tol^{2/3}
        let c = extract_contact(&u, None);
        let reach = c.tolerance().powf(2.0 / 3.0) + h;
        for (k, &inside) in c.mask().iter().enumerate() {
            let x = c.position(k)[1];
            if x <= 0.0 {
                assert!(inside);
            } else if x > reach {
                assert!(!inside);
            }
        }
        let fb = extract_free_boundary(&c).unwrap();
        let graph = fb.graph.as_ref().unwrap();
        for s in graph.samples.iter().filter(|s| !s.untrusted) {
            assert!(s.value.unwrap().abs() < 1e-12);
        }
        assert!(fb.lipschitz().unwrap() < 1e-12);
    }

    #[test]
    fn tolerance_monotone() {
        let axis = Direction::axis(2, 0);
        let u = field(2, 65, |p| regular_profile(p, &axis) + 0.01 * p[1].abs());
        let a = extract_contact(&u, Some(1e-3));
        let b = extract_contact(&u, Some(1e-2));
        assert!(a.mask().iter().zip(b.mask()).all(|(x, y)| !x || *y));
    }

    #[test]
    fn sloped_interface() {
        let u = field(3, 65, |p| (p[1] - 0.3 * p[0]).max(0.0).powf(1.5));
        let c = extract_contact(&u, None);
        let fb = extract_free_boundary(&c).unwrap();
        let lip = fb.lipschitz().unwrap();
        assert!((lip - 0.3).abs() <= u.grid().spacing(), "{lip}");
        for cell in &fb.interface_cells {
            assert!(cell.center[1] - 0.3 * cell.center[0] > -2.0 * u.grid().spacing());
        }
    }

    #[test]
    fn midpoint_fallback_for_bare_masks() {
        let grid = Grid::new(2, 9, 1.0).unwrap();
        let mask = (0..9).map(|i| i <= 3).collect();
        let c = ContactSet::from_mask(grid, mask).unwrap();
        let fb = extract_free_boundary(&c).unwrap();
        let graph = fb.graph.unwrap();
        assert_eq!(graph.samples[0].value, Some(-0.125));
        assert_eq!(fb.interface_cells.len(), 1);
    }

    #[test]
    fn single_point_contact_has_no_graph() {
        let u = field(3, 33, |p| p[0] * p[0] + p[1] * p[1] - 2.0 * p[2] * p[2]);
        let c = extract_contact(&u, Some(0.0));
        assert_eq!(c.contact_count(), 1);
        let fb = extract_free_boundary(&c).unwrap();
        assert!(fb.graph.is_none());
        assert_eq!(fb.interface_cells.len(), 4);
    }

    #[test]
    fn cone_monotonicity_signs() {
        let axis = Direction::axis(3, 1);
        let u = field(3, 65, |p| regular_profile(p, &axis));
        let center = [0.0, 0.0, 0.0];
        let report = cone_monotonicity(&u, &axis, std::f64::consts::FRAC_PI_3, &center, 0.25).unwrap();
        assert!(report.min >= 0.0, "{report:?}");
        let neg = cone_monotonicity(&u.scaled(-1.0), &axis, std::f64::consts::FRAC_PI_3, &center, 0.25).unwrap();
        assert!(neg.min < 0.0);
        let lin = field(3, 33, |p| -p[1]);
        let r = cone_monotonicity(&lin, &axis, std::f64::consts::FRAC_PI_3, &center, 0.25).unwrap();
        assert_relative_eq!(r.min, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn barrier_polynomial_is_discretely_harmonic() {
        for dim in [2, 3] {
            let z = vec![0.1; dim - 1].into_iter().chain([0.0]).collect::<Vec<_>>();
            let h = field(dim, 33, |_| 1.0);
            let r = barrier_check(&h, &z, 1.0, 0.05, None).unwrap();
            assert!(r.laplacian_defect < 1e-9, "{}", r.laplacian_defect);
        }
    }

    #[test]
    fn negative_field_fails_barrier() {
        let h = field(3, 33, |_| -1.0);
        let r = barrier_check(&h, &[0.0, 0.0, 0.0], 0.1, 0.05, None).unwrap();
        assert!(!r.pass);
        // P bottoms out at -(n-1)/(16(n-1)^2) = -1/32 on the caps
        assert_relative_eq!(r.min_boundary(), -1.0 - 0.1 / 32.0, epsilon = 1e-12);
    }

    #[test]
    fn barrier_rejects_box_outside_grid() {
        let h = field(2, 33, |_| 1.0);
        assert!(barrier_check(&h, &[0.9, 0.0], 0.1, 0.05, None).is_err());
    }

    #[test]
    fn constant_quotient_for_regular_profile() {
        let axis = Direction::axis(3, 1);
        let u = field(3, 65, |p| regular_profile(p, &axis));
        let c = extract_contact(&u, None);
        let fb = extract_free_boundary(&c).unwrap();
        let tau = Direction::new(&[1.0, 1.0, 0.0]).unwrap();
        let q = quotient_diagnostic(&u, &tau, &axis, 0.25, &c, &fb, None).unwrap();
        assert!(q.constant_quotient);
    }

    #[test]
    fn quotient_recovers_interface_regularity() {
        // interface x_2 = phi(x_1) with phi' = c |x_1|^beta: the quotient
        // D_tau u / D_2 u = (1 - phi') / sqrt(2) is exactly beta-Hölder at 0
        let alpha_for = |beta: f64| {
            let phi = move |x: f64| 0.5 * x.abs().powf(1.0 + beta) * x.signum();
            let u = field(3, 129, |p| (p[1] - phi(p[0])).max(0.0).powf(1.5));
            let axis = Direction::axis(3, 1);
            let c = extract_contact(&u, None);
            let fb = extract_free_boundary(&c).unwrap();
            let tau = Direction::new(&[1.0, 1.0, 0.0]).unwrap();
            let center = [0.0, 0.0, 0.0];
            let q = quotient_diagnostic(&u, &tau, &axis, 0.25, &c, &fb, Some((&center, 0.3))).unwrap();
            assert!(q.residual < 0.1, "{q:?}");
            q.alpha.unwrap()
        };
        // centered differences smooth phi' over one cell, which biases the
        // rough case upwards
        let rough = alpha_for(0.5);
        let smooth = alpha_for(1.0);
        assert!((0.4..=0.8).contains(&rough), "{rough}");
        assert!((smooth - 1.0).abs() < 0.1, "{smooth}");
    }

    #[test]
    fn analytic_gradient_feeds_barrier() {
        let axis = Direction::axis(3, 1);
        let h = field(3, 65, |p| regular_profile_gradient(p, &axis)[1]);
        let z = [0.0, 0.0, 0.0];
        let c0 = measure_c0(&h, &z).unwrap();
        assert!(c0 > 0.0);
        let r = barrier_check(&h, &z, barrier_delta(3, c0), 0.05, None).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
