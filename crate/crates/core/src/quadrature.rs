//! Equal-weight rules on circles and spheres.
//!
//! 2D uses equally spaced angles (the trapezoid rule, spectrally accurate
//! for smooth periodic integrands). 3D uses a Fibonacci lattice with the
//! polar axis along `x_n`: `z_k = 1 - (2k+1)/N`, azimuth `k` times the
//! golden angle, weight `4 pi / N` each.

use std::f64::consts::PI;

use crate::grid::MAX_DIM;

#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    directions: Vec<[f64; MAX_DIM]>,
}

impl SphereRule {
    pub fn new(dim: usize, count: usize) -> Self {
        let count = count.max(1);
        let directions = if dim == 2 {
            (0..count)
                .map(|k| {
                    let theta = 2.0 * PI * k as f64 / count as f64;
                    [theta.cos(), theta.sin(), 0.0]
                })
                .collect()
        } else {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                    let ring = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    [ring * phi.cos(), ring * phi.sin(), z]
                })
                .collect()
        };
        Self { dim, directions }
    }

    /// Rule with `max(64, ceil(2 pi r / h))` angles in 2D or
    /// `max(256, ceil(4 pi r^2 / h^2))` lattice points in 3D.
    pub fn for_radius(dim: usize, r: f64, h: f64) -> Self {
        let count = if dim == 2 {
            ((2.0 * PI * r / h).ceil() as usize).max(64)
        } else {
            ((4.0 * PI * r * r / (h * h)).ceil() as usize).max(256)
        };
        Self::new(dim, count)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Unit directions, `dim` leading entries meaningful.
    pub fn directions(&self) -> &[[f64; MAX_DIM]] {
        &self.directions
    }

    /// Quadrature nodes on the sphere of radius `r` about `center`.
    pub fn points<'a>(&'a self, center: &'a [f64], r: f64) -> impl Iterator<Item = [f64; MAX_DIM]> + 'a {
        let dim = self.dim;
        self.directions.iter().map(move |d| {
            let mut p = [0.0; MAX_DIM];
            for axis in 0..dim {
                p[axis] = center[axis] + r * d[axis];
            }
            p
        })
    }

    /// Weight of each node on the sphere of radius `r`.
    pub fn weight(&self, r: f64) -> f64 {
        sphere_area(self.dim, r) / self.len() as f64
    }

    /// Mean of `f` over the sphere, stopping at the first error.
    pub fn average<E, F>(&self, center: &[f64], r: f64, mut f: F) -> Result<f64, E>
    where
        F: FnMut(&[f64], &[f64]) -> Result<f64, E>,
    {
        let mut sum = 0.0;
        for (p, d) in self.points(center, r).zip(&self.directions) {
            sum += f(&p[..self.dim], &d[..self.dim])?;
        }
        Ok(sum / self.len() as f64)
    }
}

/// `|dB_r|`: `2 pi r` in 2D, `4 pi r^2` in 3D.
pub fn sphere_area(dim: usize, r: f64) -> f64 {
    if dim == 2 {
        2.0 * PI * r
    } else {
        4.0 * PI * r * r
    }
}

/// `|B_r|`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    if dim == 2 {
        PI * r * r
    } else {
        4.0 / 3.0 * PI * r * r * r
    }
}
