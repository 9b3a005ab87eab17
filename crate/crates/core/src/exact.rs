//! Closed-form global solutions of the thin obstacle problem and related
//! homogeneous profiles.
//!
//! Profiles built on a tangential `axis` use `s = p . axis`, `t = |p_n|`,
//! `rho = sqrt(s^2 + t^2)` and `psi = atan2(t, s)` in `[0, pi]`, so every
//! profile is even in `x_n` and its contact ray sits at `psi = pi`.

use crate::error::{Error, Result};
use crate::grid::Direction;

/// Tolerance of the harmonicity constraint `sum a_i = C`.
const HARMONIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LewyType {
    /// `rho^{k+1/2} cos((k+1/2) theta)`
    HalfInteger,
    /// `rho^{2k} cos(2k theta)`
    Even,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Regular { axis: Direction },
    DerivativeW { axis: Direction },
    Lewy2D { k: u32, kind: LewyType },
    Quadratic { a: Vec<f64>, c: f64 },
}

impl ProfileSpec {
    /// The regular profile on axis `e_{n-1}`.
    pub fn regular(dim: usize) -> Self {
        Self::Regular {
            axis: Direction::axis(dim, dim - 2),
        }
    }

    /// Checks the invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Regular { axis } | Self::DerivativeW { axis } => {
                if !axis.is_tangential() {
                    return Err(Error::InvalidSpec("profile axis must lie in x_n = 0".into()));
                }
            }
            Self::Lewy2D { k, .. } => {
                if *k < 1 {
                    return Err(Error::InvalidSpec("Lewy index k must be >= 1".into()));
                }
            }
            Self::Quadratic { a, c } => {
                if a.iter().any(|&ai| ai < 0.0) {
                    return Err(Error::InvalidSpec("quadratic coefficients must be >= 0".into()));
                }
                let sum: f64 = a.iter().sum();
                if (sum - c).abs() > HARMONIC_TOL * c.abs().max(1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "harmonicity requires sum a_i = C, got {sum} vs {c}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dimension the profile lives in, when it is fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Regular { axis } | Self::DerivativeW { axis } => Some(axis.dim()),
            Self::Lewy2D { .. } => Some(2),
            Self::Quadratic { a, .. } => Some(a.len() + 1),
        }
    }

    /// Homogeneity degree.
    pub fn homogeneity(&self) -> f64 {
        match self {
            Self::Regular { .. } => 1.5,
            Self::DerivativeW { .. } => 0.5,
            Self::Lewy2D { k, kind } => lewy_degree(*k, *kind),
            Self::Quadratic { .. } => 2.0,
        }
    }

    /// Evaluates the profile. Quadratic specs are assumed validated.
    pub fn evaluate(&self, p: &[f64]) -> f64 {
        match self {
            Self::Regular { axis } => regular_profile(p, axis),
            Self::DerivativeW { axis } => derivative_w(p, axis),
            Self::Lewy2D { k, kind } => lewy_family(*k, *kind, p),
            Self::Quadratic { a, c } => quadratic_value(a, *c, p),
        }
    }
}

fn lewy_degree(k: u32, kind: LewyType) -> f64 {
    match kind {
        LewyType::HalfInteger => k as f64 + 0.5,
        LewyType::Even => 2.0 * k as f64,
    }
}

/// `(rho, psi)` of `p` relative to a tangential axis.
pub fn axis_polar(p: &[f64], axis: &Direction) -> (f64, f64) {
    let s = axis.dot(p);
    let t = p[p.len() - 1].abs();
    (s.hypot(t), t.atan2(s))
}

/// `rho^{3/2} cos(3 psi / 2)`.
pub fn regular_profile(p: &[f64], axis: &Direction) -> f64 {
    let (rho, psi) = axis_polar(p, axis);
    if rho == 0.0 {
        return 0.0;
    }
    rho.powf(1.5) * (1.5 * psi).cos()
}

/// `rho^{1/2} sin(psi / 2)`, nonnegative everywhere.
pub fn derivative_w(p: &[f64], axis: &Direction) -> f64 {
    let (rho, psi) = axis_polar(p, axis);
    rho.sqrt() * (0.5 * psi).sin()
}

/// Analytic gradient of [`regular_profile`] away from `rho = 0`.
///
/// Along the axis the derivative is `(3/2) rho^{1/2} cos(psi/2)`; along
/// `x_n` it is `-(3/2) rho^{1/2} sin(psi/2) sign(x_n)`.
pub fn regular_profile_gradient(p: &[f64], axis: &Direction) -> Vec<f64> {
    let (rho, psi) = axis_polar(p, axis);
    let dim = p.len();
    let mut out = vec![0.0; dim];
    if rho == 0.0 {
        return out;
    }
    let root = rho.sqrt();
    let ds = 1.5 * root * (0.5 * psi).cos();
    for (o, a) in out.iter_mut().zip(axis.components()) {
        *o = ds * a;
    }
    let xn = p[dim - 1];
    let sign = if xn > 0.0 {
        1.0
    } else if xn < 0.0 {
        -1.0
    } else {
        0.0
    };
    out[dim - 1] = -1.5 * root * (0.5 * psi).sin() * sign;
    out
}

/// Two-dimensional Lewy solutions with `theta = atan2(x_n, x_1)` in `(-pi, pi]`.
pub fn lewy_family(k: u32, kind: LewyType, p: &[f64]) -> f64 {
    let (x, y) = (p[0], p[p.len() - 1]);
    let rho = x.hypot(y);
    if rho == 0.0 {
        return 0.0;
    }
    let mut theta = y.atan2(x);
    if theta == -std::f64::consts::PI {
        theta = std::f64::consts::PI;
    }
    let degree = lewy_degree(k, kind);
    rho.powf(degree) * (degree * theta).cos()
}

/// `sum_{i<n} a_i x_i^2 - C x_n^2` after checking `sum a_i = C`.
pub fn quadratic_profile(spec: &ProfileSpec, p: &[f64]) -> Result<f64> {
    match spec {
        ProfileSpec::Quadratic { a, c } => {
            spec.validate()?;
            if p.len() != a.len() + 1 {
                return Err(Error::InvalidSpec(format!(
                    "point has {} coordinates, profile expects {}",
                    p.len(),
                    a.len() + 1
                )));
            }
            Ok(quadratic_value(a, *c, p))
        }
        _ => Err(Error::InvalidSpec("not a quadratic profile".into())),
    }
}

fn quadratic_value(a: &[f64], c: f64, p: &[f64]) -> f64 {
    let n = p.len();
    let tangential: f64 = a.iter().zip(p).map(|(ai, xi)| ai * xi * xi).sum();
    tangential - c * p[n - 1] * p[n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn e2() -> Direction {
        Direction::axis(2, 0)
    }

    #[test]
    fn regular_profile_values() {
        assert_relative_eq!(regular_profile(&[1.0, 0.0], &e2()), 1.0, epsilon = 1e-15);
        assert!(regular_profile(&[-1.0, 0.0], &e2()).abs() < 1e-15);
        assert_relative_eq!(regular_profile(&[0.0, 1.0], &e2()), -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(regular_profile(&[0.0, 0.0], &e2()), 0.0);
        // ignores coordinates orthogonal to {axis, e_n}
        let ax = Direction::axis(3, 1);
        assert_eq!(
            regular_profile(&[0.3, 0.2, -0.1], &ax),
            regular_profile(&[-0.7, 0.2, 0.1], &ax)
        );
    }

    #[test]
    fn derivative_w_values() {
        assert_eq!(derivative_w(&[1.0, 0.0], &e2()), 0.0);
        assert_relative_eq!(derivative_w(&[-1.0, 0.0], &e2()), 1.0, epsilon = 1e-15);
        assert_relative_eq!(derivative_w(&[0.0, 1.0], &e2()), FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn lewy_values() {
        assert_relative_eq!(lewy_family(1, LewyType::HalfInteger, &[1.0, 0.0]), 1.0);
        assert!(lewy_family(1, LewyType::HalfInteger, &[-1.0, 0.0]).abs() < 1e-15);
        assert!(lewy_family(1, LewyType::HalfInteger, &[-1.0, -0.0]).abs() < 1e-15);
        assert_relative_eq!(lewy_family(1, LewyType::Even, &[0.6, 0.8]), -0.28, epsilon = 1e-14);
    }

    #[test]
    fn quadratic_values_and_validation() {
        let q = ProfileSpec::Quadratic { a: vec![1.0, 1.0], c: 2.0 };
        assert_eq!(quadratic_profile(&q, &[0.0, 0.0, 1.0]).unwrap(), -2.0);
        assert_eq!(quadratic_profile(&q, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        let line = ProfileSpec::Quadratic { a: vec![1.0, 0.0], c: 1.0 };
        for x1 in [-0.5, 0.0, 0.25] {
            let v = quadratic_profile(&line, &[x1, 0.7, 0.0]).unwrap();
            assert_eq!(v, x1 * x1);
        }
        let bad = ProfileSpec::Quadratic { a: vec![1.0, 1.0], c: 1.0 };
        assert!(matches!(quadratic_profile(&bad, &[0.0, 0.0, 1.0]), Err(Error::InvalidSpec(_))));
        let negative = ProfileSpec::Quadratic { a: vec![2.0, -1.0], c: 1.0 };
        assert!(negative.validate().is_err());
    }

    #[test]
    fn axis_must_be_tangential() {
        let tilted = ProfileSpec::Regular {
            axis: Direction::new(&[0.0, 1.0, 1.0]).unwrap(),
        };
        assert!(tilted.validate().is_err());
    }

    #[test]
    fn homogeneity_to_machine_precision() {
        let specs = [
            ProfileSpec::regular(3),
            ProfileSpec::DerivativeW { axis: Direction::axis(3, 1) },
            ProfileSpec::Lewy2D { k: 1, kind: LewyType::HalfInteger },
            ProfileSpec::Lewy2D { k: 2, kind: LewyType::HalfInteger },
            ProfileSpec::Lewy2D { k: 1, kind: LewyType::Even },
            ProfileSpec::Quadratic { a: vec![0.5, 1.5], c: 2.0 },
        ];
        let points3 = [[0.3, -0.2, 0.4], [-0.1, -0.6, -0.05], [0.2, 0.1, 0.0]];
        for spec in &specs {
            let mu = spec.homogeneity();
            for p in &points3 {
                let p: &[f64] = if spec.dim() == Some(2) { &p[1..] } else { p };
                let v = spec.evaluate(p);
                for lambda in [0.5, 2.0] {
                    let scaled: Vec<f64> = p.iter().map(|x| lambda * x).collect();
                    let w = spec.evaluate(&scaled);
                    assert_relative_eq!(w, lambda.powf(mu) * v, epsilon = 1e-14, max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn derivative_w_nonnegative_and_matches_normal_derivative() {
        let axis = Direction::axis(3, 1);
        for i in 0..40 {
            for j in 0..40 {
                let p = [0.1, -1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0];
                assert!(derivative_w(&p, &axis) >= 0.0);
            }
        }
        // on x_n = 0+ the normal derivative is -(3/2) w
        for s in [-0.8, -0.3, 0.2, 0.7] {
            let p = [0.0, s, 1e-300];
            let grad = regular_profile_gradient(&p, &axis);
            assert_relative_eq!(grad[2], -1.5 * derivative_w(&[0.0, s, 0.0], &axis), epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let axis = Direction::new(&[0.6, 0.8, 0.0]).unwrap();
        let p = [0.2, -0.35, 0.15];
        let grad = regular_profile_gradient(&p, &axis);
        let eps = 1e-6;
        for d in 0..3 {
            let mut a = p;
            let mut b = p;
            a[d] += eps;
            b[d] -= eps;
            let fd = (regular_profile(&a, &axis) - regular_profile(&b, &axis)) / (2.0 * eps);
            assert_relative_eq!(grad[d], fd, epsilon = 1e-8);
        }
    }
}
