//! Projected Gauss-Seidel / SOR for the discrete thin obstacle problem.
//!
//! Only the upper half box `x_n >= 0` is stored while iterating. Nodes on
//! `x_n = 0` use the reflected stencil (the `x_n` neighbour counted twice)
//! and are projected onto `[0, inf)`; this is exact coordinate descent on
//! the Dirichlet energy of the even extension.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ProfileSpec;
use crate::grid::{Grid, ScalarField, MAX_DIM};

/// Closed-form boundary data `g`, even in `x_n`.
#[derive(Clone)]
pub enum BoundaryData {
    Constant(f64),
    /// `g(x) = sum_i c_i x_i` over tangential coordinates.
    Linear(Vec<f64>),
    Profile(ProfileSpec),
    /// `g + offset`.
    Shifted(Box<BoundaryData>, f64),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Linear(c) => f.debug_tuple("Linear").field(c).finish(),
            Self::Profile(p) => f.debug_tuple("Profile").field(p).finish(),
            Self::Shifted(g, c) => f.debug_tuple("Shifted").field(g).field(c).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl BoundaryData {
    pub fn evaluate(&self, p: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Linear(coeffs) => coeffs.iter().zip(p).map(|(c, x)| c * x).sum(),
            Self::Profile(spec) => spec.evaluate(p),
            Self::Shifted(inner, offset) => inner.evaluate(p) + offset,
            Self::Custom(f) => f(p),
        }
    }

    /// `x_{n-1}` in dimension `dim`.
    pub fn last_tangential(dim: usize) -> Self {
        let mut c = vec![0.0; dim - 1];
        c[dim - 2] = 1.0;
        Self::Linear(c)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::Linear(c) if c.len() > dim - 1 => Err(Error::InvalidArgument(
                "linear boundary data may only depend on tangential coordinates".into(),
            )),
            Self::Profile(spec) => {
                spec.validate()?;
                match spec.dim() {
                    Some(d) if d != dim => Err(Error::InvalidArgument(format!(
                        "profile lives in dimension {d}, grid in {dim}"
                    ))),
                    _ => Ok(()),
                }
            }
            Self::Shifted(inner, _) => inner.validate(dim),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub dim: usize,
    pub m: usize,
    pub half_width: f64,
    pub boundary: BoundaryData,
    /// Relaxation factor in `(0, 2)`; 1 is plain Gauss-Seidel.
    pub relaxation: f64,
    /// Stop when the largest nodal update of a sweep falls below this.
    /// Defaults to `1e-10 max|g|`.
    pub eps_sweep: Option<f64>,
    /// Complementarity tolerance, default `10 h max|g|`.
    pub eps_comp: Option<f64>,
    pub max_sweeps: usize,
    /// Start from the interpolated solution on the grid with `(m+1)/2`
    /// nodes (recursively) instead of a constant guess.
    pub nested_start: bool,
}

impl ProblemSpec {
    pub fn new(dim: usize, m: usize, boundary: BoundaryData) -> Self {
        Self {
            dim,
            m,
            half_width: 1.0,
            boundary,
            relaxation: 1.0,
            eps_sweep: None,
            eps_comp: None,
            max_sweeps: 200_000,
            nested_start: true,
        }
    }

    /// The default scenario: `n = 3`, `g = x_{n-1}`, `m = 129`.
    pub fn default_scenario() -> Self {
        Self::new(3, 129, BoundaryData::last_tangential(3))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.m, self.half_width)
    }

    fn validate(&self) -> Result<Grid> {
        let grid = self.grid()?;
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "relaxation factor {} outside (0, 2)",
                self.relaxation
            )));
        }
        for (name, eps) in [("eps_sweep", self.eps_sweep), ("eps_comp", self.eps_comp)] {
            if let Some(e) = eps {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(Error::InvalidArgument(format!("{name} must be positive")));
                }
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be positive".into()));
        }
        self.boundary.validate(self.dim)?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplementarityReport {
    /// `max (-u)_+` over interior nodes of `x_n = 0`.
    pub max_violation_u: f64,
    /// `max (delta_n u)_+` over contact nodes.
    pub max_violation_flux: f64,
    /// `max u |delta_n u|` over non-contact nodes.
    pub max_violation_product: f64,
}

impl ComplementarityReport {
    pub fn max(&self) -> f64 {
        self.max_violation_u
            .max(self.max_violation_flux)
            .max(self.max_violation_product)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: ScalarField,
    pub sweeps: usize,
    pub max_update: f64,
    pub converged: bool,
    pub complementarity: ComplementarityReport,
    /// Discrete Dirichlet energy of the full field after each sweep.
    pub energy_history: Vec<f64>,
    /// Largest nodal update of each sweep.
    pub update_history: Vec<f64>,
    pub eps_sweep: f64,
    pub eps_comp: f64,
}

impl SolveResult {
    pub fn complementarity_within_tolerance(&self) -> bool {
        self.complementarity.max() <= self.eps_comp
    }
}

/// Solves the discrete problem. A run that exhausts `max_sweeps` returns
/// [`Error::NotConverged`] carrying the partial result.
pub fn solve(spec: &ProblemSpec) -> Result<SolveResult> {
    let grid = spec.validate()?;
    let mut half = HalfBox::new(grid, &spec.boundary)?;
    let g_max = half.boundary_max_abs();
    let eps_sweep = spec.eps_sweep.unwrap_or(1e-10 * g_max).max(f64::MIN_POSITIVE);
    let eps_comp = spec.eps_comp.unwrap_or(10.0 * grid.spacing() * g_max);

    let coarse_m = spec.m.div_ceil(2);
    if spec.nested_start && coarse_m >= 9 && coarse_m % 2 == 1 {
        let coarse_spec = ProblemSpec {
            m: coarse_m,
            nested_start: true,
            ..spec.clone()
        };
        let coarse = match solve(&coarse_spec) {
            Ok(r) => r,
            Err(Error::NotConverged(r)) => *r,
            Err(e) => return Err(e),
        };
        half.prolongate_from(&coarse.field)?;
    } else {
        half.fill_interior(half.boundary_mean());
    }

    let mut energy_history = Vec::new();
    let mut update_history = Vec::new();
    let mut max_update = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < spec.max_sweeps {
        max_update = half.sweep(spec.relaxation);
        sweeps += 1;
        energy_history.push(half.energy());
        update_history.push(max_update);
        if max_update < eps_sweep {
            break;
        }
    }
    let converged = max_update < eps_sweep;
    let field = half.to_full();
    let complementarity = complementarity_report(&field);
    let result = SolveResult {
        field,
        sweeps,
        max_update,
        converged,
        complementarity,
        energy_history,
        update_history,
        eps_sweep,
        eps_comp,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}

/// Working storage for the upper half box: tangential indices in storage
/// order, then `k = i_n - pi_layer` fastest.
struct HalfBox {
    grid: Grid,
    depth: usize,
    values: Vec<f64>,
    fixed: Vec<bool>,
    columns: Vec<usize>,
    tangential_strides: [usize; MAX_DIM - 1],
}

impl HalfBox {
    fn new(grid: Grid, boundary: &BoundaryData) -> Result<Self> {
        let dim = grid.dim();
        let m = grid.m();
        let depth = grid.pi_layer() + 1;
        let ncols = m.pow(dim as u32 - 1);
        let mut values = vec![0.0; ncols * depth];
        let mut fixed = vec![false; ncols * depth];
        let mut columns = Vec::new();
        let mut tangential_strides = [0; MAX_DIM - 1];
        for (axis, s) in tangential_strides.iter_mut().enumerate().take(dim - 1) {
            *s = m.pow((dim - 2 - axis) as u32) * depth;
        }

        let mut p = [0.0; MAX_DIM];
        let mut mirror = [0.0; MAX_DIM];
        for col in 0..ncols {
            let mut rest = col;
            let mut tang = [0usize; MAX_DIM - 1];
            for axis in (0..dim - 1).rev() {
                tang[axis] = rest % m;
                rest /= m;
            }
            let on_side = tang[..dim - 1].iter().any(|&i| i == 0 || i == m - 1);
            if !on_side {
                columns.push(col * depth);
            }
            for axis in 0..dim - 1 {
                p[axis] = grid.coord(tang[axis]);
                mirror[axis] = p[axis];
            }
            for k in 0..depth {
                let top = k == depth - 1;
                if !(on_side || top) {
                    continue;
                }
                let i_n = grid.pi_layer() + k;
                p[dim - 1] = grid.coord(i_n);
                mirror[dim - 1] = grid.coord(m - 1 - i_n);
                let v = boundary.evaluate(&p[..dim]);
                let w = boundary.evaluate(&mirror[..dim]);
                if !v.is_finite() {
                    return Err(Error::Sampling {
                        index: grid.index(&[&tang[..dim - 1], &[i_n][..]].concat()),
                        value: v,
                    });
                }
                if (v - w).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "boundary data not even in x_n at {:?}",
                        &p[..dim]
                    )));
                }
                let idx = col * depth + k;
                // the constraint wins where g < 0 on the rim of x_n = 0
                values[idx] = if k == 0 { v.max(0.0) } else { v };
                fixed[idx] = true;
            }
        }
        Ok(Self {
            grid,
            depth,
            values,
            fixed,
            columns,
            tangential_strides,
        })
    }

    fn boundary_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.fixed)
            .filter(|(_, &f)| f)
            .map(|(v, _)| *v)
    }

    fn boundary_max_abs(&self) -> f64 {
        self.boundary_values().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    fn boundary_mean(&self) -> f64 {
        let (sum, count) = self
            .boundary_values()
            .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        sum / count as f64
    }

    fn fill_interior(&mut self, value: f64) {
        for (i, v) in self.values.iter_mut().enumerate() {
            if !self.fixed[i] {
                *v = if i % self.depth == 0 { value.max(0.0) } else { value };
            }
        }
    }

    fn prolongate_from(&mut self, coarse: &ScalarField) -> Result<()> {
        let dim = self.grid.dim();
        let m = self.grid.m();
        for &base in &self.columns {
            let col = base / self.depth;
            let mut rest = col;
            let mut p = [0.0; MAX_DIM];
            for axis in (0..dim - 1).rev() {
                p[axis] = self.grid.coord(rest % m);
                rest /= m;
            }
            for k in 0..self.depth - 1 {
                p[dim - 1] = self.grid.coord(self.grid.pi_layer() + k);
                let v = coarse.interpolate(&p[..dim])?;
                self.values[base + k] = if k == 0 { v.max(0.0) } else { v };
            }
        }
        Ok(())
    }

    /// One lexicographic sweep; returns the largest nodal update.
    fn sweep(&mut self, omega: f64) -> f64 {
        match self.grid.dim() {
            2 => self.sweep_impl::<1>(omega),
            _ => self.sweep_impl::<2>(omega),
        }
    }

    fn sweep_impl<const NT: usize>(&mut self, omega: f64) -> f64 {
        let mut strides = [0usize; NT];
        strides.copy_from_slice(&self.tangential_strides[..NT]);
        let inv = 1.0 / (2.0 * (NT + 1) as f64);
        let top = self.depth - 1;
        let plain = omega == 1.0;
        let u = &mut self.values;
        let mut max_update: f64 = 0.0;
        for &base in &self.columns {
            // the x_n neighbour below is carried in `prev` so the recurrence
            // along the column stays in registers
            let mut prev = 0.0;
            for k in 0..top {
                let i = base + k;
                let mut s = u[i + 1];
                for &st in &strides {
                    s += u[i + st] + u[i - st];
                }
                let old = u[i];
                let mut new = if k == 0 {
                    // reflected stencil on x_n = 0
                    (s + u[i + 1]) * inv
                } else {
                    (s + prev) * inv
                };
                if !plain {
                    new = old + omega * (new - old);
                }
                if k == 0 {
                    new = new.max(0.0);
                }
                max_update = max_update.max((new - old).abs());
                u[i] = new;
                prev = new;
            }
        }
        max_update
    }

    /// `sum_edges w (u_i - u_j)^2 h^{n-2}` of the even extension; edges
    /// inside `x_n = 0` count once, all others twice.
    fn energy(&self) -> f64 {
        let dim = self.grid.dim();
        let m = self.grid.m();
        let depth = self.depth;
        let u = &self.values;
        let ncols = u.len() / depth;
        let mut total = Neumaier::default();
        for col in 0..ncols {
            let base = col * depth;
            let column = &u[base..base + depth];
            let mut acc = 0.0;
            for pair in column.windows(2) {
                let d = pair[1] - pair[0];
                acc += 2.0 * d * d;
            }
            // tangential edges towards the next node along each axis
            let mut rest = col;
            for axis in (0..dim - 1).rev() {
                let i = rest % m;
                rest /= m;
                if i + 1 == m {
                    continue;
                }
                let st = self.tangential_strides[axis];
                let next = &u[base + st..base + st + depth];
                let d = next[0] - column[0];
                acc += d * d;
                for (a, b) in column[1..].iter().zip(&next[1..]) {
                    let d = b - a;
                    acc += 2.0 * d * d;
                }
            }
            total.add(acc);
        }
        total.sum() * self.grid.spacing().powi(dim as i32 - 2)
    }

    fn to_full(&self) -> ScalarField {
        let grid = self.grid;
        let m = grid.m();
        let c = grid.pi_layer();
        let ncols = self.values.len() / self.depth;
        let mut values = vec![0.0; grid.node_count()];
        for col in 0..ncols {
            for i_n in 0..m {
                let k = i_n.abs_diff(c);
                values[col * m + i_n] = self.values[col * self.depth + k];
            }
        }
        ScalarField::from_values(grid, values, true).expect("mirror image is even by construction")
    }
}

/// Compensated summation.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Discrete complementarity residuals over interior nodes of `x_n = 0`.
///
/// A node counts as contact when `u <= 1e-12 max|u|`.
pub fn complementarity_report(u: &ScalarField) -> ComplementarityReport {
    let g = u.grid();
    let h = g.spacing();
    let up = g.stride(g.dim() - 1);
    let contact_tol = 1e-12 * u.max_abs();
    let vals = u.values();
    let mut report = ComplementarityReport {
        max_violation_u: 0.0,
        max_violation_flux: 0.0,
        max_violation_product: 0.0,
    };
    for i in g.pi_nodes() {
        if g.is_boundary(&g.multi_index(i)[..g.dim()]) {
            continue;
        }
        let v = vals[i];
        let flux = (vals[i + up] - v) / h;
        if -v > report.max_violation_u {
            report.max_violation_u = -v;
        }
        if v <= contact_tol {
            report.max_violation_flux = report.max_violation_flux.max(flux);
        } else {
            report.max_violation_product = report.max_violation_product.max(v * flux.abs());
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityDiagnostics {
    pub lipschitz_seminorm: f64,
    pub tangential_semiconvexity_min: f64,
    pub c_half_seminorm: f64,
    /// Discrete `L^2` norm of `u` on the full box.
    pub l2_norm: f64,
    pub lipschitz_ratio: f64,
    pub semiconvexity_ratio: f64,
    pub c_half_ratio: f64,
}

/// Largest index offset used for the difference quotients (`4h`).
const PAIR_RADIUS: i64 = 4;

/// Lipschitz, tangential semiconvexity and one-sided `C^{1,1/2}` quotients
/// over the concentric half-size box.
pub fn regularity_diagnostics(u: &ScalarField) -> RegularityDiagnostics {
    let g = *u.grid();
    let dim = g.dim();
    let h = g.spacing();
    let vals = u.values();
    let inner = |multi: &[usize]| {
        multi[..dim]
            .iter()
            .all(|&i| g.coord(i).abs() <= 0.5 * g.half_width() * (1.0 + 1e-12))
    };
    let offsets = pair_offsets(dim);
    let shift = |multi: &[usize; MAX_DIM], off: &[i64]| -> Option<[usize; MAX_DIM]> {
        let mut out = *multi;
        for axis in 0..dim {
            let j = multi[axis] as i64 + off[axis];
            if j < 0 || j >= g.m() as i64 {
                return None;
            }
            out[axis] = j as usize;
        }
        Some(out)
    };

    let mut lipschitz: f64 = 0.0;
    let mut semiconvex = f64::INFINITY;
    let mut c_half: f64 = 0.0;
    let tangential_dirs = tangential_offsets(dim);
    let c = g.pi_layer();

    let one_sided_gradient = |multi: &[usize; MAX_DIM]| -> Option<[f64; MAX_DIM]> {
        if multi[dim - 1] < c + 1 || multi[dim - 1] + 1 >= g.m() {
            return None;
        }
        if multi[..dim - 1].iter().any(|&i| i == 0 || i + 1 >= g.m()) {
            return None;
        }
        let i = g.index(&multi[..dim]);
        let mut grad = [0.0; MAX_DIM];
        for (axis, slot) in grad.iter_mut().enumerate().take(dim) {
            let s = g.stride(axis);
            *slot = (vals[i + s] - vals[i - s]) / (2.0 * h);
        }
        Some(grad)
    };

    for index in 0..g.node_count() {
        let multi = g.multi_index(index);
        if !inner(&multi) {
            continue;
        }
        let ux = vals[index];
        let grad_x = one_sided_gradient(&multi);
        for off in &offsets {
            let Some(other) = shift(&multi, off) else { continue };
            if !inner(&other) {
                continue;
            }
            let dist = h * off.iter().map(|&o| (o * o) as f64).sum::<f64>().sqrt();
            let uy = vals[g.index(&other[..dim])];
            lipschitz = lipschitz.max((ux - uy).abs() / dist);
            if let (Some(gx), Some(gy)) = (grad_x, one_sided_gradient(&other)) {
                let diff = (0..dim)
                    .map(|a| (gx[a] - gy[a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                c_half = c_half.max(diff / dist.sqrt());
            }
        }
        for dir in &tangential_dirs {
            let neg: Vec<i64> = dir.iter().map(|d| -d).collect();
            let (Some(plus), Some(minus)) = (shift(&multi, dir), shift(&multi, &neg)) else {
                continue;
            };
            let len2 = dir.iter().map(|&d| (d * d) as f64).sum::<f64>();
            let second = (vals[g.index(&plus[..dim])] - 2.0 * ux + vals[g.index(&minus[..dim])])
                / (h * h * len2);
            semiconvex = semiconvex.min(second);
        }
    }
    let l2 = u.l2_norm();
    let ratio = |x: f64| if l2 > 0.0 { x / l2 } else { f64::NAN };
    RegularityDiagnostics {
        lipschitz_seminorm: lipschitz,
        tangential_semiconvexity_min: semiconvex,
        c_half_seminorm: c_half,
        l2_norm: l2,
        lipschitz_ratio: ratio(lipschitz),
        semiconvexity_ratio: ratio(semiconvex),
        c_half_ratio: ratio(c_half),
    }
}

/// Lexicographically positive offsets with length at most `PAIR_RADIUS`.
fn pair_offsets(dim: usize) -> Vec<Vec<i64>> {
    let r = PAIR_RADIUS;
    let mut out = Vec::new();
    let range = || -r..=r;
    let mut push = |off: Vec<i64>| {
        let len2: i64 = off.iter().map(|o| o * o).sum();
        let positive = off.iter().find(|&&o| o != 0).is_some_and(|&o| o > 0);
        if positive && len2 <= r * r {
            out.push(off);
        }
    };
    for a in range() {
        for b in range() {
            if dim == 2 {
                push(vec![a, b]);
            } else {
                for c in range() {
                    push(vec![a, b, c]);
                }
            }
        }
    }
    out
}

/// Tangential axes and diagonals as index offsets.
pub(crate) fn tangential_offsets(dim: usize) -> Vec<Vec<i64>> {
    if dim == 2 {
        vec![vec![1, 0]]
    } else {
        vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![1, -1, 0]]
    }
}
