//! Uniform Cartesian grid on `[-L, L]^n` with the hyperplane `x_n = 0`
//! as a nodal layer, plus nodal fields, multilinear interpolation and
//! centered differences.
//!
//! Nodes are stored row-major with the last axis (`x_n`) fastest.

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Relative slack used when deciding whether a point lies in the closed box.
const BOX_SLACK: f64 = 1e-12;

/// Snap threshold for interpolation weights so nodal points reproduce
/// nodal values bit for bit.
const SNAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    m: usize,
    half_width: f64,
    spacing: f64,
}

impl Grid {
    /// Builds the grid `[-L, L]^n` with `m` nodes per axis.
    ///
    /// `m` must be odd (so `x_n = 0` is a nodal layer) and at least 9.
    pub fn new(dim: usize, m: usize, half_width: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if m.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "node count {m} is even: x_n = 0 would not be a nodal layer"
            )));
        }
        if m < 9 {
            return Err(Error::InvalidArgument(format!(
                "node count {m} below minimum of 9"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(Self {
            dim,
            m,
            half_width,
            spacing: 2.0 * half_width / (m - 1) as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Uniform node spacing `h`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    /// Index along the last axis of the layer `x_n = 0`.
    pub fn pi_layer(&self) -> usize {
        (self.m - 1) / 2
    }

    /// Coordinate of node `i` along any axis. Exact at `-L`, `0` and `L`,
    /// and exactly antisymmetric: `coord(m-1-i) == -coord(i)`.
    pub fn coord(&self, i: usize) -> f64 {
        let twice = 2 * i as i64 - (self.m as i64 - 1);
        self.half_width * twice as f64 / (self.m - 1) as f64
    }

    /// Stride of axis `axis` in the flat node array.
    pub fn stride(&self, axis: usize) -> usize {
        self.m.pow((self.dim - 1 - axis) as u32)
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim);
        multi.iter().fold(0, |acc, &i| acc * self.m + i)
    }

    pub fn multi_index(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = index % self.m;
            index /= self.m;
        }
        out
    }

    /// Position of a node; entries past `dim` are zero.
    pub fn position(&self, index: usize) -> [f64; MAX_DIM] {
        let multi = self.multi_index(index);
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            p[axis] = self.coord(multi[axis]);
        }
        p
    }

    pub fn is_boundary(&self, multi: &[usize]) -> bool {
        multi[..self.dim].iter().any(|&i| i == 0 || i == self.m - 1)
    }

    /// Whether `p` lies in the closed box.
    pub fn contains(&self, p: &[f64]) -> bool {
        let lim = self.half_width * (1.0 + BOX_SLACK);
        p[..self.dim].iter().all(|x| x.abs() <= lim)
    }

    /// Distance from `p` to the box boundary (negative outside).
    pub fn distance_to_boundary(&self, p: &[f64]) -> f64 {
        p[..self.dim]
            .iter()
            .map(|x| self.half_width - x.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Iterates over node indices of the `x_n = 0` layer in storage order.
    pub fn pi_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        let layer = self.pi_layer();
        (0..self.m.pow(self.dim as u32 - 1)).map(move |k| k * self.m + layer)
    }
}

/// A unit vector; `tangential` when its `x_n` component vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    components: [f64; MAX_DIM],
    dim: usize,
}

impl Direction {
    /// Normalizes `v` (length `dim`) into a direction.
    pub fn new(v: &[f64]) -> Result<Self> {
        let dim = v.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "direction must have 2 or 3 components, got {dim}"
            )));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("zero or non-finite direction".into()));
        }
        // keep vectors that are unit up to rounding as given, so that
        // normalizing twice changes nothing
        let norm = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON { 1.0 } else { norm };
        let mut components = [0.0; MAX_DIM];
        for (c, x) in components.iter_mut().zip(v) {
            *c = x / norm;
        }
        Ok(Self { components, dim })
    }

    /// Coordinate axis `axis` in dimension `dim`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut components = [0.0; MAX_DIM];
        components[axis] = 1.0;
        Self { components, dim }
    }

    /// Tangential direction at angle `angle` from `e_{n-1}` towards `e_1`
    /// (3D only; in 2D this is `±e_1`).
    pub fn in_plane(dim: usize, angle: f64) -> Self {
        let mut components = [0.0; MAX_DIM];
        if dim == 2 {
            components[0] = if angle.cos() >= 0.0 { 1.0 } else { -1.0 };
        } else {
            components[1] = angle.cos();
            components[0] = angle.sin();
        }
        Self { components, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components[..self.dim]
    }

    pub fn is_tangential(&self) -> bool {
        self.components[self.dim - 1] == 0.0
    }

    pub fn dot(&self, p: &[f64]) -> f64 {
        self.components().iter().zip(p).map(|(a, b)| a * b).sum()
    }
}

/// Nodal values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    symmetric: bool,
}

impl ScalarField {
    /// Wraps raw values. When `symmetric` is set the values must satisfy
    /// `v(x', -x_n) == v(x', x_n)` exactly.
    pub fn from_values(grid: Grid, values: Vec<f64>, symmetric: bool) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        let field = Self {
            grid,
            values,
            symmetric: false,
        };
        if symmetric {
            field.into_symmetric()
        } else {
            Ok(field)
        }
    }

    /// Samples `f` at every node.
    pub fn sample<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut values = Vec::with_capacity(grid.node_count());
        for index in 0..grid.node_count() {
            let p = grid.position(index);
            let v = f(&p[..grid.dim()]);
            if !v.is_finite() {
                return Err(Error::Sampling { index, value: v });
            }
            values.push(v);
        }
        Ok(Self {
            grid,
            values,
            symmetric: false,
        })
    }

    /// Marks the field as even in `x_n`, checking the reflection exactly.
    pub fn into_symmetric(mut self) -> Result<Self> {
        if let Some(index) = self.first_asymmetric_node() {
            return Err(Error::InvalidArgument(format!(
                "field is not even in x_n at node {index}"
            )));
        }
        self.symmetric = true;
        Ok(self)
    }

    fn first_asymmetric_node(&self) -> Option<usize> {
        let m = self.grid.m();
        (0..self.values.len()).find(|&index| {
            let k = index % m;
            let mirror = index - k + (m - 1 - k);
            self.values[index] != self.values[mirror]
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.symmetric = false;
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Returns `c * self`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            symmetric: self.symmetric,
        }
    }

    /// Values on the `x_n = 0` layer, in `pi_nodes` order.
    pub fn pi_trace(&self) -> Vec<f64> {
        self.grid.pi_nodes().map(|i| self.values[i]).collect()
    }

    /// Multilinear interpolation from the `2^n` surrounding nodes.
    pub fn interpolate(&self, p: &[f64]) -> Result<f64> {
        let g = &self.grid;
        if p.len() < g.dim() || !g.contains(p) {
            return Err(Error::OutOfDomain(p.to_vec()));
        }
        let h = g.spacing();
        let last = g.m() - 2;
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for axis in 0..g.dim() {
            let t = ((p[axis] + g.half_width()) / h).max(0.0);
            let mut i = (t.floor() as usize).min(last);
            let mut f = (t - i as f64).clamp(0.0, 1.0);
            if f > 1.0 - SNAP {
                if i < last {
                    i += 1;
                    f = 0.0;
                } else {
                    f = 1.0;
                }
            } else if f < SNAP {
                f = 0.0;
            }
            base[axis] = i;
            frac[axis] = f;
        }
        let origin = g.index(&base[..g.dim()]);
        let mut acc = 0.0;
        for corner in 0..(1usize << g.dim()) {
            let mut w = 1.0;
            let mut offset = 0;
            for axis in 0..g.dim() {
                if corner >> axis & 1 == 1 {
                    w *= frac[axis];
                    offset += g.stride(axis);
                } else {
                    w *= 1.0 - frac[axis];
                }
            }
            if w != 0.0 {
                acc += w * self.values[origin + offset];
            }
        }
        Ok(acc)
    }

    /// Tensor-product four-point Lagrange interpolation, exact for
    /// polynomials of degree three in each variable. Stencils shift inwards
    /// next to the box faces, and `x_n` stencils stay on the side of `Pi`
    /// containing `p` so that a kink across `Pi` is not smeared.
    pub fn interpolate_cubic(&self, p: &[f64]) -> Result<f64> {
        let g = &self.grid;
        if p.len() < g.dim() || !g.contains(p) || g.m() < 4 {
            return Err(Error::OutOfDomain(p.to_vec()));
        }
        let h = g.spacing();
        let mut base = [0usize; MAX_DIM];
        let mut weights = [[0.0; 4]; MAX_DIM];
        for axis in 0..g.dim() {
            let t = ((p[axis] + g.half_width()) / h).max(0.0);
            let mut start = (t.floor() as usize).saturating_sub(1).min(g.m() - 4);
            if axis == g.dim() - 1 {
                let c = g.pi_layer();
                start = if p[axis] >= 0.0 { start.max(c) } else { start.min(c - 3) };
            }
            let s = t - start as f64;
            // nodes at local offsets 0, 1, 2, 3
            weights[axis] = [
                -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
                s * (s - 2.0) * (s - 3.0) / 2.0,
                -s * (s - 1.0) * (s - 3.0) / 2.0,
                s * (s - 1.0) * (s - 2.0) / 6.0,
            ];
            base[axis] = start;
        }
        let origin = g.index(&base[..g.dim()]);
        let mut acc = 0.0;
        match g.dim() {
            2 => {
                let s0 = g.stride(0);
                for (a, wa) in weights[0].iter().enumerate() {
                    let row = origin + a * s0;
                    let inner: f64 = (0..4).map(|b| weights[1][b] * self.values[row + b]).sum();
                    acc += wa * inner;
                }
            }
            _ => {
                let (s0, s1) = (g.stride(0), g.stride(1));
                for (a, wa) in weights[0].iter().enumerate() {
                    for (b, wb) in weights[1].iter().enumerate() {
                        let row = origin + a * s0 + b * s1;
                        let inner: f64 = (0..4).map(|c| weights[2][c] * self.values[row + c]).sum();
                        acc += wa * wb * inner;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Centered difference `(I(p + step v) - I(p - step v)) / (2 step)`.
    pub fn directional_difference(&self, p: &[f64], v: &[f64], step: f64) -> Result<f64> {
        let dim = self.grid.dim();
        let mut plus = [0.0; MAX_DIM];
        let mut minus = [0.0; MAX_DIM];
        for axis in 0..dim {
            plus[axis] = p[axis] + step * v[axis];
            minus[axis] = p[axis] - step * v[axis];
        }
        let hi = self.interpolate(&plus[..dim])?;
        let lo = self.interpolate(&minus[..dim])?;
        Ok((hi - lo) / (2.0 * step))
    }

    /// `D_tau u` at `p` with step `h` along `tau`.
    pub fn directional_derivative(&self, p: &[f64], tau: &Direction) -> Result<f64> {
        self.directional_difference(p, tau.components(), self.grid.spacing())
    }

    /// Centered-difference gradient with step `h` on every axis.
    pub fn gradient(&self, p: &[f64]) -> Result<[f64; MAX_DIM]> {
        let dim = self.grid.dim();
        let mut out = [0.0; MAX_DIM];
        for (axis, slot) in out.iter_mut().enumerate().take(dim) {
            let e = Direction::axis(dim, axis);
            *slot = self.directional_derivative(p, &e)?;
        }
        Ok(out)
    }

    /// Discrete `(2n+1)`-point Laplacian at an interior node.
    pub fn discrete_laplacian(&self, index: usize) -> f64 {
        let g = &self.grid;
        let h2 = g.spacing() * g.spacing();
        let center = self.values[index];
        let mut acc = 0.0;
        for axis in 0..g.dim() {
            let s = g.stride(axis);
            acc += self.values[index + s] + self.values[index - s] - 2.0 * center;
        }
        acc / h2
    }

    /// Discrete `L^2` norm over the whole box, `sqrt(sum v^2 h^n)`.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }
}
