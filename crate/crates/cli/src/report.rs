//! The `report` stage: plots and a Markdown summary rebuilt from the
//! artifacts of the earlier stages.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;
use signorini::blowup::BlowupClass;
use signorini::frequency::MuEstimate;

use crate::error::Result;
use crate::pipeline::{
    self, parse_frequency_csv, read_text, require, write_bytes, BLOWUP_JSON, FREE_BOUNDARY_JSON, FREQUENCY_JSON,
    SOLVE_JSON,
};

pub const REPORT: &str = "report.md";

fn load(dir: &Path, name: &str, producer: &'static str) -> Result<Value> {
    let path = require(dir, name, producer)?;
    Ok(serde_json::from_str(&read_text(&path)?)?)
}

fn mu_of(point: &Value) -> Option<MuEstimate> {
    let mu = point.get("mu")?;
    Some(MuEstimate {
        mu: mu.get("mu")?.as_f64()?,
        r_min: mu.get("r_min")?.as_f64()?,
        r_max: mu.get("r_max")?.as_f64()?,
        residual: mu.get("residual")?.as_f64()?,
        radii_used: mu.get("radii_used")?.as_u64()? as usize,
    })
}

/// Rebuilds every plot from the tables and the field on disk.
pub fn emit_plots(dir: &Path) -> Result<()> {
    let frequency = load(dir, FREQUENCY_JSON, "frequency")?;
    for point in frequency["points"].as_array().into_iter().flatten() {
        let index = point["index"].as_u64().unwrap_or(0) as usize;
        let path = require(dir, &format!("frequency_{index}.csv"), "frequency")?;
        let rows = parse_frequency_csv(&path)?;
        pipeline::write_frequency_plots(dir, index, &rows, mu_of(point).as_ref())?;
    }
    let u = pipeline::load_field(dir)?;
    let scenario = crate::scenario::Scenario {
        contact_tol: load(dir, FREE_BOUNDARY_JSON, "freeboundary")?["contact_tol"].as_f64(),
        ..Default::default()
    };
    let (_, fb) = pipeline::free_boundary_of(&u, &scenario)?;
    pipeline::write_heatmaps(dir, &pipeline::heatmap(&u, fb.as_ref()))
}

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) => format!("{x:.3e}"),
        Some(x) => format!("{x:.4}"),
        None if v.is_boolean() => v.to_string(),
        None => "n/a".into(),
    }
}

pub fn report(dir: &Path) -> Result<String> {
    let solve = load(dir, SOLVE_JSON, "solve")?;
    let frequency = load(dir, FREQUENCY_JSON, "frequency")?;
    let blowup = load(dir, BLOWUP_JSON, "blowup")?;
    let fb = load(dir, FREE_BOUNDARY_JSON, "freeboundary")?;
    emit_plots(dir)?;

    let mut md = String::new();
    let _ = writeln!(md, "# Scenario `{}`\n", solve["name"].as_str().unwrap_or("?"));
    let _ = writeln!(md, "## Solve\n");
    let _ = writeln!(md, "| quantity | value |\n|---|---|");
    for (label, key) in [
        ("dimension", "dim"),
        ("nodes per axis", "m"),
        ("spacing", "spacing"),
        ("relaxation", "relaxation"),
        ("sweeps", "sweeps"),
        ("converged", "converged"),
        ("final max update", "max_update"),
        ("complementarity within tolerance", "complementarity_ok"),
        ("min u", "min_value"),
        ("max u", "max_value"),
    ] {
        let v = &solve[key];
        let text = if v.is_u64() { v.to_string() } else { num(v) };
        let _ = writeln!(md, "| {label} | {text} |");
    }
    let reg = &solve["regularity"];
    let _ = writeln!(
        md,
        "| semiconvexity ratio | {} (bound -{}, {}) |",
        num(&reg["semiconvexity_ratio"]),
        num(&solve["semiconvexity_constant"]),
        if solve["semiconvexity_ok"].as_bool() == Some(true) { "ok" } else { "violated" }
    );
    let _ = writeln!(md, "| Lipschitz ratio | {} |", num(&reg["lipschitz_ratio"]));
    let _ = writeln!(md, "| C^(1,1/2) ratio | {} |", num(&reg["c_half_ratio"]));

    let _ = writeln!(md, "\n## Frequency\n");
    let _ = writeln!(md, "| center | mu | min D_r | max D_r | monotone |\n|---|---|---|---|---|");
    for p in frequency["points"].as_array().into_iter().flatten() {
        let clean = p["monotonicity"].as_object().is_some_and(|m| {
            ["freq_violations", "phi_violations", "doubling_violations"]
                .iter()
                .all(|k| m.get(*k).and_then(Value::as_array).is_some_and(Vec::is_empty))
        });
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            coords(&p["center"]),
            num(&p["mu"]["mu"]),
            num(&p["d_min"]),
            num(&p["d_max"]),
            if clean { "yes" } else { "no" }
        );
    }
    let _ = writeln!(md, "\nPlots: `frequency_<k>_dr.svg`, `frequency_<k>_logphi.svg`.");

    let _ = writeln!(md, "\n## Blow-ups\n");
    let _ = writeln!(
        md,
        "Regular fraction {}, largest axis error {} rad.\n",
        num(&blowup["regular_fraction"]),
        num(&blowup["max_axis_error"])
    );
    let _ = writeln!(md, "| center | class | unstable | axis error |\n|---|---|---|---|");
    for p in blowup["points"].as_array().into_iter().flatten() {
        let class = p["class"].as_str().unwrap_or("none");
        let _ = writeln!(
            md,
            "| {} | {class} | {} | {} |",
            coords(&p["center"]),
            p["unstable"],
            num(&p["axis_error"])
        );
    }
    let degenerate = blowup["points"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|p| p["class"].as_str() == Some(&format!("{:?}", BlowupClass::DegenerateQuadratic)))
        .count();
    if degenerate > 0 {
        let _ = writeln!(md, "\n{degenerate} point(s) blow up to a harmonic quadratic.");
    }

    let _ = writeln!(md, "\n## Free boundary\n");
    let _ = writeln!(md, "| quantity | value |\n|---|---|");
    let _ = writeln!(md, "| contact nodes | {} of {} |", fb["contact_count"], fb["pi_nodes"]);
    let _ = writeln!(md, "| interface cells | {} ({} untrusted) |", fb["interface_cells"], fb["untrusted_cells"]);
    let _ = writeln!(md, "| graph Lipschitz constant | {} |", num(&fb["lipschitz"]));
    let _ = writeln!(md, "| cone minimum | {} |", num(&fb["cone"]["report"]["min"]));
    let _ = writeln!(md, "| cone max gradient | {} |", num(&fb["cone"]["report"]["max_gradient"]));
    let _ = writeln!(md, "| cone/graph consistent | {} |", num(&fb["cone"]["consistent"]));
    let _ = writeln!(md, "| barrier verdict | {} |", num(&fb["barrier"]["report"]["pass"]));
    let _ = writeln!(md, "| quotient exponent | {} |", num(&fb["quotient"]["alpha"]));
    let _ = writeln!(md, "| quotient residual | {} |", num(&fb["quotient"]["residual"]));
    for note in fb["notes"].as_array().into_iter().flatten() {
        let _ = writeln!(md, "\nNote: {}", note.as_str().unwrap_or(""));
    }
    let _ = writeln!(md, "\nHeatmap of u on the plane: `heatmap.ppm`, `heatmap.svg`.");
    write_bytes(&dir.join(REPORT), md.as_bytes())?;
    Ok(md)
}

fn coords(v: &Value) -> String {
    let parts: Vec<String> = v
        .as_array()
        .into_iter()
        .flatten()
        .map(|x| format!("{:.4}", x.as_f64().unwrap_or(f64::NAN)))
        .collect();
    format!("({})", parts.join(", "))
}
