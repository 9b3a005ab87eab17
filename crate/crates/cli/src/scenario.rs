//! Scenario files: flat `key = value` lines with dotted sections.
//!
//! ```text
//! # the default scenario
//! name = default
//! grid.dim = 3
//! grid.m = 129
//! boundary.kind = linear
//! boundary.coefficients = 0, 1
//! output.dir = out/default
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors so
//! typos do not pass silently. [`Scenario::emit`] writes every resolved
//! value back, and parsing the emitted text yields the same scenario.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use signorini::blowup::BlowupOptions;
use signorini::exact::{LewyType, ProfileSpec};
use signorini::solver::{BoundaryData, ProblemSpec};
use signorini::Direction;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Constant(f64),
    /// Coefficients of the tangential coordinates.
    Linear(Vec<f64>),
    Profile(ProfileSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Centers {
    /// Free-boundary probe points of the solved field.
    Auto,
    List(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub m: usize,
    pub half_width: f64,
    pub boundary: Boundary,
    pub boundary_offset: f64,
    pub relaxation: f64,
    pub max_sweeps: usize,
    pub eps_sweep: Option<f64>,
    pub eps_comp: Option<f64>,
    pub nested_start: bool,
    pub centers: Centers,
    /// Every `probe_stride`-th free-boundary point is probed.
    pub probe_stride: usize,
    /// Fit window for `mu`; `None` uses the default window.
    pub mu_window: Option<(f64, f64)>,
    /// Slack `eps` of the doubling check.
    pub doubling_eps: f64,
    pub blowup: BlowupOptions,
    /// Contact tolerance; `None` means `h max|u|`.
    pub contact_tol: Option<f64>,
    pub cone_theta: f64,
    /// Cone and quotient region radius as a fraction of `L`.
    pub region_fraction: f64,
    /// Quotient band as a fraction of `L`.
    pub band_fraction: f64,
    pub output_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            dim: 3,
            m: 129,
            half_width: 1.0,
            boundary: Boundary::Linear(vec![0.0, 1.0]),
            boundary_offset: 0.0,
            relaxation: 1.0,
            max_sweeps: 200_000,
            eps_sweep: None,
            eps_comp: None,
            nested_start: true,
            centers: Centers::Auto,
            probe_stride: 8,
            mu_window: None,
            doubling_eps: 0.05,
            blowup: BlowupOptions::default(),
            contact_tol: None,
            cone_theta: std::f64::consts::FRAC_PI_3,
            region_fraction: 0.25,
            band_fraction: 0.25,
            output_dir: PathBuf::from("out/default"),
        }
    }
}

impl Scenario {
    /// The degenerate scenario: `g = x_1^2 + x_2^2 - 2 x_3^2`, whose solution
    /// touches the obstacle at the origin only.
    pub fn degenerate() -> Self {
        Self {
            name: "degenerate".into(),
            boundary: Boundary::Profile(ProfileSpec::Quadratic {
                a: vec![1.0, 1.0],
                c: 2.0,
            }),
            centers: Centers::List(vec![vec![0.0, 0.0, 0.0]]),
            output_dir: PathBuf::from("out/degenerate"),
            ..Self::default()
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.m - 1) as f64
    }

    pub fn problem(&self) -> ProblemSpec {
        let data = match &self.boundary {
            Boundary::Constant(c) => BoundaryData::Constant(*c),
            Boundary::Linear(c) => BoundaryData::Linear(c.clone()),
            Boundary::Profile(p) => BoundaryData::Profile(p.clone()),
        };
        let data = if self.boundary_offset != 0.0 {
            BoundaryData::Shifted(Box::new(data), self.boundary_offset)
        } else {
            data
        };
        ProblemSpec {
            dim: self.dim,
            m: self.m,
            half_width: self.half_width,
            boundary: data,
            relaxation: self.relaxation,
            eps_sweep: self.eps_sweep,
            eps_comp: self.eps_comp,
            max_sweeps: self.max_sweeps,
            nested_start: self.nested_start,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_error(number + 1, format!("expected `key = value`, got {line:?}")));
            };
            let key = key.trim().to_string();
            if entries.insert(key.clone(), (number + 1, value.trim().to_string())).is_some() {
                return Err(parse_error(number + 1, format!("duplicate key {key:?}")));
            }
        }
        let mut reader = Reader { entries };
        let scenario = reader.scenario()?;
        if let Some((key, (line, _))) = reader.entries.into_iter().next() {
            return Err(parse_error(line, format!("unknown key {key:?}")));
        }
        Ok(scenario)
    }

    /// Canonical text with every resolved value.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("name", self.name.clone());
        put("grid.dim", self.dim.to_string());
        put("grid.m", self.m.to_string());
        put("grid.half_width", num(self.half_width));
        match &self.boundary {
            Boundary::Constant(c) => {
                put("boundary.kind", "constant".into());
                put("boundary.value", num(*c));
            }
            Boundary::Linear(c) => {
                put("boundary.kind", "linear".into());
                put("boundary.coefficients", list(c));
            }
            Boundary::Profile(p) => {
                put("boundary.kind", "profile".into());
                match p {
                    ProfileSpec::Regular { axis } => {
                        put("profile.kind", "regular".into());
                        put("profile.axis", list(axis.components()));
                    }
                    ProfileSpec::DerivativeW { axis } => {
                        put("profile.kind", "derivative_w".into());
                        put("profile.axis", list(axis.components()));
                    }
                    ProfileSpec::Lewy2D { k, kind } => {
                        put("profile.kind", "lewy".into());
                        put("profile.k", k.to_string());
                        let parity = match kind {
                            LewyType::HalfInteger => "half_integer",
                            LewyType::Even => "even",
                        };
                        put("profile.parity", parity.into());
                    }
                    ProfileSpec::Quadratic { a, c } => {
                        put("profile.kind", "quadratic".into());
                        put("profile.a", list(a));
                        put("profile.c", num(*c));
                    }
                }
            }
        }
        put("boundary.offset", num(self.boundary_offset));
        put("solver.relaxation", num(self.relaxation));
        put("solver.max_sweeps", self.max_sweeps.to_string());
        put("solver.eps_sweep", auto(self.eps_sweep));
        put("solver.eps_comp", auto(self.eps_comp));
        put("solver.nested_start", self.nested_start.to_string());
        let centers = match &self.centers {
            Centers::Auto => "auto".to_string(),
            Centers::List(points) => points.iter().map(|p| list(p)).collect::<Vec<_>>().join("; "),
        };
        put("probe.centers", centers);
        put("probe.stride", self.probe_stride.to_string());
        let window = match self.mu_window {
            None => "auto".to_string(),
            Some((a, b)) => list(&[a, b]),
        };
        put("frequency.mu_window", window);
        put("frequency.doubling_eps", num(self.doubling_eps));
        put("blowup.outer_radius", num(self.blowup.outer_radius));
        put("blowup.nodes", self.blowup.nodes.to_string());
        put("blowup.delta_mu", num(self.blowup.delta_mu));
        put("blowup.rho_fit", num(self.blowup.rho_fit));
        put("free_boundary.contact_tol", auto(self.contact_tol));
        put("free_boundary.cone_theta", num(self.cone_theta));
        put("free_boundary.region_fraction", num(self.region_fraction));
        put("free_boundary.band_fraction", num(self.band_fraction));
        put("output.dir", self.output_dir.display().to_string());
        out
    }
}

fn parse_error(line: usize, message: String) -> CliError {
    CliError::Parse { line, message }
}

/// Shortest round-tripping decimal.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")
}

fn auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), num)
}

struct Reader {
    entries: BTreeMap<String, (usize, String)>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn value<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some((line, text)) => {
                parse(&text).ok_or_else(|| parse_error(line, format!("bad value {text:?} for {key}")))
            }
        }
    }

    fn float(&mut self, key: &str, default: f64) -> Result<f64> {
        self.value(key, default, |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize> {
        self.value(key, default, |s| s.parse().ok())
    }

    fn auto_float(&mut self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        self.value(key, default, |s| {
            if s == "auto" {
                Some(None)
            } else {
                s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Some)
            }
        })
    }

    fn floats(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.value(key, None, |s| parse_list(s).map(Some))
    }

    fn required_floats(&mut self, key: &str, context: usize) -> Result<Vec<f64>> {
        self.floats(key)?
            .ok_or_else(|| parse_error(context, format!("missing {key}")))
    }

    fn scenario(&mut self) -> Result<Scenario> {
        let d = Scenario::default();
        let name = self.value("name", d.name.clone(), |s| Some(s.to_string()))?;
        let dim = self.count("grid.dim", d.dim)?;
        let m = self.count("grid.m", d.m)?;
        let half_width = self.float("grid.half_width", d.half_width)?;
        let (kind_line, kind) = self.take("boundary.kind").unwrap_or((0, "linear".into()));
        let boundary = match kind.as_str() {
            "constant" => Boundary::Constant(self.float("boundary.value", 0.0)?),
            "linear" => {
                let mut default = vec![0.0; dim.saturating_sub(1)];
                if let Some(last) = default.last_mut() {
                    *last = 1.0;
                }
                Boundary::Linear(self.floats("boundary.coefficients")?.unwrap_or(default))
            }
            "profile" => Boundary::Profile(self.profile(dim, kind_line)?),
            other => return Err(parse_error(kind_line, format!("unknown boundary kind {other:?}"))),
        };
        let boundary_offset = self.float("boundary.offset", 0.0)?;
        let relaxation = self.float("solver.relaxation", d.relaxation)?;
        let max_sweeps = self.count("solver.max_sweeps", d.max_sweeps)?;
        let eps_sweep = self.auto_float("solver.eps_sweep", None)?;
        let eps_comp = self.auto_float("solver.eps_comp", None)?;
        let nested_start = self.value("solver.nested_start", true, |s| s.parse().ok())?;
        let centers = self.value("probe.centers", Centers::Auto, |s| {
            if s == "auto" {
                return Some(Centers::Auto);
            }
            s.split(';')
                .map(|p| parse_list(p).filter(|v| v.len() == dim))
                .collect::<Option<Vec<_>>>()
                .map(Centers::List)
        })?;
        let probe_stride = self.count("probe.stride", d.probe_stride)?;
        let mu_window = self.value("frequency.mu_window", None, |s| {
            if s == "auto" {
                return Some(None);
            }
            match parse_list(s)?.as_slice() {
                [a, b] if a < b => Some(Some((*a, *b))),
                _ => None,
            }
        })?;
        let doubling_eps = self.float("frequency.doubling_eps", d.doubling_eps)?;
        let blowup = BlowupOptions {
            outer_radius: self.float("blowup.outer_radius", d.blowup.outer_radius)?,
            nodes: self.count("blowup.nodes", d.blowup.nodes)?,
            delta_mu: self.float("blowup.delta_mu", d.blowup.delta_mu)?,
            rho_fit: self.float("blowup.rho_fit", d.blowup.rho_fit)?,
        };
        let contact_tol = self.auto_float("free_boundary.contact_tol", None)?;
        let cone_theta = self.float("free_boundary.cone_theta", d.cone_theta)?;
        let region_fraction = self.float("free_boundary.region_fraction", d.region_fraction)?;
        let band_fraction = self.float("free_boundary.band_fraction", d.band_fraction)?;
        let output_dir = self.value("output.dir", PathBuf::from(format!("out/{name}")), |s| Some(PathBuf::from(s)))?;
        Ok(Scenario {
            name,
            dim,
            m,
            half_width,
            boundary,
            boundary_offset,
            relaxation,
            max_sweeps,
            eps_sweep,
            eps_comp,
            nested_start,
            centers,
            probe_stride,
            mu_window,
            doubling_eps,
            blowup,
            contact_tol,
            cone_theta,
            region_fraction,
            band_fraction,
            output_dir,
        })
    }

    fn profile(&mut self, dim: usize, context: usize) -> Result<ProfileSpec> {
        let (line, kind) = self
            .take("profile.kind")
            .ok_or_else(|| parse_error(context, "missing profile.kind".into()))?;
        let axis = |reader: &mut Self| -> Result<Direction> {
            let v = match reader.floats("profile.axis")? {
                Some(v) => v,
                None => return Ok(Direction::axis(dim, dim - 2)),
            };
            Direction::new(&v).map_err(|e| parse_error(line, e.to_string()))
        };
        let spec = match kind.as_str() {
            "regular" => ProfileSpec::Regular { axis: axis(self)? },
            "derivative_w" => ProfileSpec::DerivativeW { axis: axis(self)? },
            "lewy" => {
                let k = self.value("profile.k", 1u32, |s| s.parse().ok())?;
                let kind = self.value("profile.parity", LewyType::HalfInteger, |s| match s {
                    "half_integer" => Some(LewyType::HalfInteger),
                    "even" => Some(LewyType::Even),
                    _ => None,
                })?;
                ProfileSpec::Lewy2D { k, kind }
            }
            "quadratic" => {
                let a = self.required_floats("profile.a", line)?;
                let c = self.float("profile.c", a.iter().sum())?;
                ProfileSpec::Quadratic { a, c }
            }
            other => return Err(parse_error(line, format!("unknown profile kind {other:?}"))),
        };
        spec.validate().map_err(|e| parse_error(line, e.to_string()))?;
        Ok(spec)
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    let values: Option<Vec<f64>> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    values.filter(|v| !v.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_default_scenario() {
        assert_eq!(Scenario::parse("").unwrap(), Scenario::default());
    }

    #[test]
    fn degenerate_round_trips() {
        let s = Scenario::degenerate();
        assert_eq!(Scenario::parse(&s.emit()).unwrap(), s);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Scenario::parse("name = x\n\ngrid.m = nine\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = Scenario::parse("grid.mm = 9").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }));
        let err = Scenario::parse("boundary.kind = profile\nprofile.kind = quadratic\nprofile.a = 1, 1\nprofile.c = 3").unwrap_err();
        assert!(err.to_string().contains("harmonicity"), "{err}");
    }

    #[test]
    fn comments_and_centers() {
        let s = Scenario::parse("grid.dim = 2 # inline\nboundary.coefficients = 1\nprobe.centers = 0, 0; 0.5, 0\n").unwrap();
        assert_eq!(s.centers, Centers::List(vec![vec![0.0, 0.0], vec![0.5, 0.0]]));
        assert_eq!(s.boundary, Boundary::Linear(vec![1.0]));
    }
}
