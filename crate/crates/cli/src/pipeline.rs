//! The `solve`, `frequency`, `blowup` and `freeboundary` stages. Each stage
//! reads what earlier stages wrote to the output directory and writes its
//! own artifacts there (see `docs/FORMATS.md`).

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use signorini::blowup::{classify_point, probe_points, BlowupClass, BlowupOptions, RadiusClassification};
use signorini::free_boundary::{
    barrier_check, barrier_delta, cone_monotonicity, extract_contact, extract_free_boundary, measure_c0,
    quotient_diagnostic, BarrierReport, ConeReport, ContactSet, FreeBoundaryResult, QuotientEstimate,
};
use signorini::frequency::{
    default_radii, estimate_mu_in, frequency_profile, monotonicity_report, FrequencyReport, MonotonicityReport,
    MuEstimate,
};
use signorini::io::{read_field, write_field};
use signorini::solver::{regularity_diagnostics, ComplementarityReport, RegularityDiagnostics, SolveResult};
use signorini::{Direction, ScalarField};

use crate::error::{CliError, Result};
use crate::plot::{self, Heatmap, Series};
use crate::scenario::{Centers, Scenario};

pub const FIELD: &str = "field.txt";
pub const CONVERGENCE: &str = "convergence.csv";
pub const SOLVE_JSON: &str = "solve.json";
pub const FREQUENCY_JSON: &str = "frequency.json";
pub const BLOWUP_JSON: &str = "blowup.json";
pub const BLOWUP_CSV: &str = "blowup.csv";
pub const CONTACT: &str = "contact.txt";
pub const INTERFACE: &str = "interface.txt";
pub const GRAPH: &str = "graph.csv";
pub const FREE_BOUNDARY_JSON: &str = "freeboundary.json";
pub const HEATMAP_PPM: &str = "heatmap.ppm";
pub const HEATMAP_SVG: &str = "heatmap.svg";

/// Frozen semiconvexity regression constant: the tangential second
/// differences must stay above `-C |u|_{L^2}`. Calibrated once on the
/// default scenario (ratio -0.78 at m = 129).
pub const SEMICONVEXITY_C: f64 = 1.0;

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_m: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) {
        if let Some(m) = self.grid_m {
            scenario.m = m;
        }
        if let Some(dir) = &self.output_dir {
            scenario.output_dir.clone_from(dir);
        }
    }
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_error(path))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub(crate) fn require(dir: &Path, name: &str, producer: &'static str) -> Result<PathBuf> {
    let path = dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact { path, producer })
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_error(path))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))
}

pub fn load_field(dir: &Path) -> Result<ScalarField> {
    let path = require(dir, FIELD, "solve")?;
    let file = fs::File::open(&path).map_err(io_error(&path))?;
    Ok(read_field(BufReader::new(file))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub name: String,
    pub dim: usize,
    pub m: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub relaxation: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub max_update: f64,
    pub eps_sweep: f64,
    pub eps_comp: f64,
    pub complementarity: ComplementarityReport,
    pub complementarity_ok: bool,
    pub min_value: f64,
    pub max_value: f64,
    pub regularity: RegularityDiagnostics,
    pub semiconvexity_constant: f64,
    pub semiconvexity_ok: bool,
}

pub fn summarize_solve(scenario: &Scenario, result: &SolveResult) -> SolveSummary {
    let values = result.field.values();
    let regularity = regularity_diagnostics(&result.field);
    SolveSummary {
        name: scenario.name.clone(),
        dim: scenario.dim,
        m: scenario.m,
        half_width: scenario.half_width,
        spacing: scenario.spacing(),
        relaxation: scenario.relaxation,
        sweeps: result.sweeps,
        converged: result.converged,
        max_update: result.max_update,
        eps_sweep: result.eps_sweep,
        eps_comp: result.eps_comp,
        complementarity: result.complementarity,
        complementarity_ok: result.complementarity_within_tolerance(),
        min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        regularity,
        semiconvexity_constant: SEMICONVEXITY_C,
        semiconvexity_ok: regularity.tangential_semiconvexity_min >= -SEMICONVEXITY_C * regularity.l2_norm,
    }
}

/// Solves and writes the field, the convergence log and the summary. A
/// run that hits `max_sweeps` still writes everything before failing.
pub fn solve(scenario: &Scenario) -> Result<(SolveResult, SolveSummary)> {
    let dir = &scenario.output_dir;
    prepare(dir)?;
    let result = match signorini::solver::solve(&scenario.problem()) {
        Ok(r) => r,
        Err(signorini::Error::NotConverged(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    let path = dir.join(FIELD);
    let file = fs::File::create(&path).map_err(io_error(&path))?;
    let mut out = BufWriter::new(file);
    write_field(&result.field, &mut out)?;
    out.flush().map_err(io_error(&path))?;

    let mut log = String::from("sweep,max_update,energy\n");
    for (k, (du, e)) in result.update_history.iter().zip(&result.energy_history).enumerate() {
        log.push_str(&format!("{},{du:?},{e:?}\n", k + 1));
    }
    write_bytes(&dir.join(CONVERGENCE), log.as_bytes())?;
    let summary = summarize_solve(scenario, &result);
    write_json(&dir.join(SOLVE_JSON), &summary)?;
    if !result.converged {
        return Err(CliError::NotConverged {
            sweeps: result.sweeps,
            max_update: result.max_update,
        });
    }
    Ok((result, summary))
}

/// Contact set and free boundary; `None` when the contact set is empty or
/// covers all of `Pi`.
pub fn free_boundary_of(u: &ScalarField, scenario: &Scenario) -> Result<(ContactSet, Option<FreeBoundaryResult>)> {
    let contact = extract_contact(u, scenario.contact_tol);
    match extract_free_boundary(&contact) {
        Ok(fb) => Ok((contact, Some(fb))),
        Err(signorini::Error::NoFreeBoundary(_)) => Ok((contact, None)),
        Err(e) => Err(e.into()),
    }
}

/// Scenario centers, or every `probe_stride`-th trusted free-boundary
/// point with room for the finest blow-up.
pub fn centers(u: &ScalarField, scenario: &Scenario) -> Result<Vec<Vec<f64>>> {
    match &scenario.centers {
        Centers::List(points) => Ok(points.clone()),
        Centers::Auto => {
            let (_, fb) = free_boundary_of(u, scenario)?;
            Ok(fb
                .map(|fb| probe_points(u, &fb, &scenario.blowup, scenario.probe_stride))
                .unwrap_or_default())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyPoint {
    pub index: usize,
    pub center: Vec<f64>,
    pub mu: Option<MuEstimate>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub radii: usize,
    pub degenerate: bool,
    pub hypothesis_violated: bool,
    pub monotonicity: Option<MonotonicityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencySummary {
    pub doubling_eps: f64,
    pub points: Vec<FrequencyPoint>,
    pub all_monotone: bool,
    pub min_frequency: Option<f64>,
}

/// Frequency profile at `center` over the default radii, with the fit
/// window of the scenario.
pub fn frequency_at(u: &ScalarField, center: &[f64], scenario: &Scenario) -> Result<FrequencyReport> {
    let mut report = frequency_profile(u, center, &default_radii(u.grid(), center))?;
    if let Some((a, b)) = scenario.mu_window {
        report.mu = estimate_mu_in(&report, a, b).ok();
    }
    Ok(report)
}

pub fn summarize_frequency(index: usize, report: &FrequencyReport, eps: f64) -> Result<FrequencyPoint> {
    let d = report.samples.iter().filter_map(|s| s.d_r);
    let monotonicity = if report.mu.is_some() {
        Some(monotonicity_report(report, eps)?)
    } else {
        None
    };
    Ok(FrequencyPoint {
        index,
        center: report.center.clone(),
        mu: report.mu,
        d_min: d.clone().reduce(f64::min),
        d_max: d.reduce(f64::max),
        radii: report.samples.len(),
        degenerate: report.degenerate,
        hypothesis_violated: report.hypothesis_violated,
        monotonicity,
    })
}

pub fn frequency(scenario: &Scenario) -> Result<FrequencySummary> {
    let dir = &scenario.output_dir;
    let u = load_field(dir)?;
    let mut points = Vec::new();
    for (index, center) in centers(&u, scenario)?.iter().enumerate() {
        let report = frequency_at(&u, center, scenario)?;
        write_bytes(&dir.join(format!("frequency_{index}.csv")), report.to_csv().as_bytes())?;
        let point = summarize_frequency(index, &report, scenario.doubling_eps)?;
        write_frequency_plots(dir, index, &rows_of(&report), point.mu.as_ref())?;
        points.push(point);
    }
    let summary = FrequencySummary {
        doubling_eps: scenario.doubling_eps,
        all_monotone: points
            .iter()
            .all(|p| p.monotonicity.as_ref().is_some_and(MonotonicityReport::is_clean)),
        min_frequency: points.iter().filter_map(|p| p.d_min).reduce(f64::min),
        points,
    };
    write_json(&dir.join(FREQUENCY_JSON), &summary)?;
    Ok(summary)
}

/// `(r, D_r, phi_avg)` rows of a frequency table.
pub type FrequencyRows = Vec<(f64, Option<f64>, f64)>;

fn rows_of(report: &FrequencyReport) -> FrequencyRows {
    report.samples.iter().map(|s| (s.r, s.d_r, s.phi_avg)).collect()
}

/// Parses a `frequency_<k>.csv` table.
pub fn parse_frequency_csv(path: &Path) -> Result<FrequencyRows> {
    let text = read_text(path)?;
    let bad = |line: usize| CliError::Parse {
        line,
        message: format!("malformed row in {}", path.display()),
    };
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(bad(k + 1));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(k + 1));
        let d = num(cols[3])?;
        rows.push((num(cols[0])?, d.is_finite().then_some(d), num(cols[4])?));
    }
    Ok(rows)
}

/// `frequency_<k>_dr.svg` and `frequency_<k>_logphi.svg`.
pub fn write_frequency_plots(dir: &Path, index: usize, rows: &FrequencyRows, mu: Option<&MuEstimate>) -> Result<()> {
    let d: Vec<(f64, f64)> = rows.iter().filter_map(|&(r, d, _)| d.map(|d| (r, d))).collect();
    let dr = plot::line_plot(
        &format!("Frequency D_r, center {index}"),
        "r",
        "D_r",
        &[Series {
            label: "D_r".into(),
            points: d,
            color: "steelblue",
            dashed: false,
        }],
    );
    write_bytes(&dir.join(format!("frequency_{index}_dr.svg")), dr.as_bytes())?;

    let logs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(_, _, phi)| phi > 0.0)
        .map(|&(r, _, phi)| (r.ln(), phi.ln()))
        .collect();
    let mut series = vec![Series {
        label: "log phi_avg".into(),
        points: logs.clone(),
        color: "steelblue",
        dashed: false,
    }];
    if let Some(mu) = mu {
        // intercept by least squares at the fitted slope 2 mu
        let slack = 1e-9 * mu.r_min;
        let window: Vec<&(f64, f64)> = logs
            .iter()
            .filter(|(x, _)| x.exp() >= mu.r_min - slack && x.exp() <= mu.r_max + slack)
            .collect();
        if !window.is_empty() {
            let slope = 2.0 * mu.mu;
            let b = window.iter().map(|(x, y)| y - slope * x).sum::<f64>() / window.len() as f64;
            let (x0, x1) = (mu.r_min.ln(), mu.r_max.ln());
            series.push(Series {
                label: format!("fit, slope 2 mu = {:.4}", slope),
                points: vec![(x0, slope * x0 + b), (x1, slope * x1 + b)],
                color: "firebrick",
                dashed: true,
            });
        }
    }
    let svg = plot::line_plot(&format!("log phi_avg vs log r, center {index}"), "log r", "log phi_avg", &series);
    write_bytes(&dir.join(format!("frequency_{index}_logphi.svg")), svg.as_bytes())
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupPoint {
    pub index: usize,
    pub center: Vec<f64>,
    pub class: Option<BlowupClass>,
    pub unstable: bool,
    pub per_radius: Vec<RadiusClassification>,
    /// Interface normal from the graph fit near the center.
    pub expected_normal: Option<Vec<f64>>,
    /// Angle between the fitted axis at the smallest radius and the normal.
    pub axis_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupSummary {
    pub options: BlowupOptions,
    pub points: Vec<BlowupPoint>,
    pub regular_fraction: Option<f64>,
    pub max_axis_error: Option<f64>,
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

pub fn classify_centers(u: &ScalarField, points: &[Vec<f64>], scenario: &Scenario) -> Result<BlowupSummary> {
    let h = u.grid().spacing();
    let dim = u.grid().dim();
    let (_, fb) = free_boundary_of(u, scenario)?;
    let graph = fb.as_ref().and_then(|fb| fb.graph.as_ref());
    let mut out = Vec::new();
    for (index, center) in points.iter().enumerate() {
        let c = classify_point(u, center, &scenario.blowup)?;
        let expected_normal = graph.and_then(|g| g.normal_at(&center[..dim - 2], 8.0 * h));
        let axis_error = match (&expected_normal, c.finest()) {
            (Some(n), Some(f)) if f.class == BlowupClass::Regular => Some(angle(n, &f.axis)),
            _ => None,
        };
        out.push(BlowupPoint {
            index,
            center: c.center,
            class: c.class,
            unstable: c.unstable,
            per_radius: c.per_radius,
            expected_normal,
            axis_error,
        });
    }
    let regular = out.iter().filter(|p| p.class == Some(BlowupClass::Regular)).count();
    Ok(BlowupSummary {
        options: scenario.blowup,
        regular_fraction: (!out.is_empty()).then(|| regular as f64 / out.len() as f64),
        max_axis_error: out.iter().filter_map(|p| p.axis_error).reduce(f64::max),
        points: out,
    })
}

pub fn blowup(scenario: &Scenario) -> Result<BlowupSummary> {
    let dir = &scenario.output_dir;
    let u = load_field(dir)?;
    let points = centers(&u, scenario)?;
    let summary = classify_centers(&u, &points, scenario)?;
    let mut csv = String::from("index,center,class,unstable,mu,axis,profile_residual,quadratic_a,quadratic_c,axis_error\n");
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    for p in &summary.points {
        let class = p.class.map_or_else(|| "none".to_string(), |c| format!("{c:?}"));
        let finest = p.per_radius.first().map(|r| &r.classification);
        let mu = finest.and_then(|f| f.mu).map_or("nan".into(), |m| format!("{:?}", m.mu));
        let (axis, residual, qa, qc) = finest.map_or_else(
            || (String::new(), "nan".into(), String::new(), "nan".into()),
            |f| {
                (
                    join(&f.axis),
                    format!("{:?}", f.profile_residual),
                    join(&f.quadratic.a),
                    format!("{:?}", f.quadratic.c),
                )
            },
        );
        let err = p.axis_error.map_or("nan".into(), |e| format!("{e:?}"));
        csv.push_str(&format!(
            "{},{},{class},{},{mu},{axis},{residual},{qa},{qc},{err}\n",
            p.index,
            join(&p.center),
            p.unstable
        ));
    }
    write_bytes(&dir.join(BLOWUP_CSV), csv.as_bytes())?;
    write_json(&dir.join(BLOWUP_JSON), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeSection {
    pub axis: Vec<f64>,
    pub theta: f64,
    pub radius: f64,
    pub report: ConeReport,
    /// `min >= -5e-3 max|grad u|`.
    pub monotone: bool,
    pub graph_lipschitz: Option<f64>,
    /// `tan(pi/2 - theta) + 2h`.
    pub lipschitz_bound: f64,
    /// A monotone cone comes with a graph below the bound.
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierSection {
    pub c0: f64,
    pub report: BarrierReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeBoundarySummary {
    pub contact_tol: f64,
    pub contact_count: usize,
    pub pi_nodes: usize,
    pub interface_cells: usize,
    pub untrusted_cells: usize,
    pub graph_available: bool,
    pub lipschitz: Option<f64>,
    /// Free-boundary point nearest the tangential origin.
    pub center: Option<Vec<f64>>,
    pub cone: Option<ConeSection>,
    pub barrier: Option<BarrierSection>,
    pub quotient: Option<QuotientEstimate>,
    pub notes: Vec<String>,
}

/// Nodal centered difference of `u` along coordinate `axis`, one-sided on
/// the box faces.
pub fn derivative_field(u: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = *u.grid();
    let h = grid.spacing();
    let s = grid.stride(axis);
    let v = u.values();
    let values = (0..grid.node_count())
        .map(|i| {
            let k = grid.multi_index(i)[axis];
            if k == 0 {
                (v[i + s] - v[i]) / h
            } else if k + 1 == grid.m() {
                (v[i] - v[i - s]) / h
            } else {
                (v[i + s] - v[i - s]) / (2.0 * h)
            }
        })
        .collect();
    Ok(ScalarField::from_values(grid, values, false)?)
}

pub fn analyze_free_boundary(u: &ScalarField, scenario: &Scenario) -> Result<(ContactSet, Option<FreeBoundaryResult>, FreeBoundarySummary)> {
    let grid = u.grid();
    let dim = grid.dim();
    let h = grid.spacing();
    let l = grid.half_width();
    let (contact, fb) = free_boundary_of(u, scenario)?;
    let mut summary = FreeBoundarySummary {
        contact_tol: contact.tolerance(),
        contact_count: contact.contact_count(),
        pi_nodes: contact.mask().len(),
        interface_cells: 0,
        untrusted_cells: 0,
        graph_available: false,
        lipschitz: None,
        center: None,
        cone: None,
        barrier: None,
        quotient: None,
        notes: Vec::new(),
    };
    let Some(fbr) = &fb else {
        summary.notes.push("no free boundary: contact set empty or full".into());
        return Ok((contact, fb, summary));
    };
    summary.interface_cells = fbr.interface_cells.len();
    summary.untrusted_cells = fbr.untrusted_count();
    summary.graph_available = fbr.graph.is_some();
    summary.lipschitz = fbr.lipschitz();
    let tangential_norm = |p: &[f64]| p[..dim - 1].iter().map(|x| x * x).sum::<f64>();
    let Some(center) = fbr
        .points()
        .into_iter()
        .min_by(|a, b| tangential_norm(a).total_cmp(&tangential_norm(b)))
    else {
        summary.notes.push("no trusted free-boundary point".into());
        return Ok((contact, fb, summary));
    };
    summary.center = Some(center.clone());

    let axis = Direction::axis(dim, dim - 2);
    let radius = scenario.region_fraction * l;
    match cone_monotonicity(u, &axis, scenario.cone_theta, &center, radius) {
        Ok(report) => {
            let graph_lipschitz = fbr.graph.as_ref().map(|g| g.lipschitz_within(&center[..dim - 2], radius));
            let lipschitz_bound = (std::f64::consts::FRAC_PI_2 - scenario.cone_theta).tan() + 2.0 * h;
            let monotone = report.min >= -5e-3 * report.max_gradient;
            summary.cone = Some(ConeSection {
                axis: axis.components().to_vec(),
                theta: scenario.cone_theta,
                radius,
                report,
                monotone,
                graph_lipschitz,
                lipschitz_bound,
                consistent: !monotone || graph_lipschitz.is_none_or(|lip| lip <= lipschitz_bound),
            });
        }
        Err(e) => summary.notes.push(format!("cone: {e}")),
    }

    let hfield = derivative_field(u, dim - 2)?;
    let barrier = measure_c0(&hfield, &center).and_then(|c0| {
        barrier_check(&hfield, &center, barrier_delta(dim, c0), 0.05, Some(&contact)).map(|report| BarrierSection { c0, report })
    });
    match barrier {
        Ok(b) => summary.barrier = Some(b),
        Err(e) => summary.notes.push(format!("barrier: {e}")),
    }

    let mut t = vec![0.0; dim];
    t[0] += 1.0;
    t[dim - 2] += 1.0;
    let tau = Direction::new(&t)?;
    let band = scenario.band_fraction * l;
    match quotient_diagnostic(u, &tau, &axis, band, &contact, fbr, Some((&center, radius))) {
        Ok(q) => summary.quotient = Some(q),
        Err(e) => summary.notes.push(format!("quotient: {e}")),
    }
    Ok((contact, fb, summary))
}

pub fn heatmap(u: &ScalarField, fb: Option<&FreeBoundaryResult>) -> Heatmap {
    let grid = u.grid();
    let m = grid.m();
    let dim = grid.dim();
    let index_of = |x: f64| (x + grid.half_width()) / grid.spacing();
    let overlay = fb.map_or_else(Vec::new, |fb| {
        fb.points()
            .iter()
            .map(|p| {
                if dim == 2 {
                    (index_of(p[0]), 0.0)
                } else {
                    (index_of(p[0]), index_of(p[1]))
                }
            })
            .collect()
    });
    let (nx, ny) = if dim == 2 { (m, 1) } else { (m, m) };
    Heatmap {
        nx,
        ny,
        values: u.pi_trace(),
        overlay,
    }
}

pub fn write_heatmaps(dir: &Path, map: &Heatmap) -> Result<()> {
    write_bytes(&dir.join(HEATMAP_PPM), &map.to_ppm())?;
    write_bytes(&dir.join(HEATMAP_SVG), map.to_svg().as_bytes())
}

fn coordinates(points: &[Vec<f64>]) -> String {
    points
        .iter()
        .map(|p| p.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

pub fn free_boundary(scenario: &Scenario) -> Result<FreeBoundarySummary> {
    let dir = &scenario.output_dir;
    let u = load_field(dir)?;
    let (contact, fb, summary) = analyze_free_boundary(&u, scenario)?;
    let mut text = format!("# contact points, tol {:?}\n", contact.tolerance());
    text.push_str(&coordinates(&contact.contact_points()));
    write_bytes(&dir.join(CONTACT), text.as_bytes())?;
    let mut cells = String::from("# interface cell centers, untrusted flag last\n");
    let mut graph = String::from("x_transverse,f\n");
    if let Some(fb) = &fb {
        for c in &fb.interface_cells {
            let coords: Vec<String> = c.center.iter().map(|x| format!("{x:?}")).collect();
            cells.push_str(&format!("{} {}\n", coords.join(" "), u8::from(c.untrusted)));
        }
        if let Some(g) = &fb.graph {
            graph = g.to_csv();
        }
    }
    write_bytes(&dir.join(INTERFACE), cells.as_bytes())?;
    write_bytes(&dir.join(GRAPH), graph.as_bytes())?;
    write_heatmaps(dir, &heatmap(&u, fb.as_ref()))?;
    write_json(&dir.join(FREE_BOUNDARY_JSON), &summary)?;
    Ok(summary)
}
