//! Command-line front end of the thin obstacle laboratory: scenario files,
//! the solve / frequency / blow-up / free-boundary pipeline, plots, the
//! Markdown report and the verification suite.

pub mod error;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod scenario;
pub mod verify;

pub use error::{CliError, Result};
pub use scenario::Scenario;

use pipeline::{write_bytes, write_json, Overrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Frequency,
    Blowup,
    FreeBoundary,
    Verify,
    Report,
}

/// Runs one subcommand and returns a short human-readable summary.
pub fn run(command: Command, scenario: &Scenario, overrides: &Overrides) -> Result<String> {
    let mut scenario = scenario.clone();
    overrides.apply(&mut scenario);
    let dir = scenario.output_dir.clone();
    match command {
        Command::Solve => {
            let (_, s) = pipeline::solve(&scenario)?;
            Ok(format!(
                "solved {} at m = {}: {} sweeps, complementarity {}, semiconvexity ratio {:.4}",
                s.name,
                s.m,
                s.sweeps,
                if s.complementarity_ok { "ok" } else { "violated" },
                s.regularity.semiconvexity_ratio
            ))
        }
        Command::Frequency => {
            let s = pipeline::frequency(&scenario)?;
            let mut out = String::new();
            for p in &s.points {
                let mu = p.mu.map_or_else(|| "n/a".to_string(), |m| format!("{:.4}", m.mu));
                out.push_str(&format!("center {:.4?}: mu {mu}, min D_r {:.4}\n", p.center, p.d_min.unwrap_or(f64::NAN)));
            }
            out.push_str(&format!("{} center(s), monotone: {}", s.points.len(), s.all_monotone));
            Ok(out)
        }
        Command::Blowup => {
            let s = pipeline::blowup(&scenario)?;
            let mut out = String::new();
            for p in &s.points {
                out.push_str(&format!("center {:.4?}: {:?}{}\n", p.center, p.class, if p.unstable { " (unstable)" } else { "" }));
            }
            out.push_str(&format!("{} point(s), regular fraction {:?}", s.points.len(), s.regular_fraction));
            Ok(out)
        }
        Command::FreeBoundary => {
            let s = pipeline::free_boundary(&scenario)?;
            Ok(format!(
                "{} contact nodes, {} interface cells, Lipschitz {:?}, cone min {:?}, barrier {:?}, quotient alpha {:?}",
                s.contact_count,
                s.interface_cells,
                s.lipschitz,
                s.cone.as_ref().map(|c| c.report.min),
                s.barrier.as_ref().map(|b| b.report.pass),
                s.quotient.as_ref().and_then(|q| q.alpha)
            ))
        }
        Command::Verify => {
            let mut degenerate = Scenario::degenerate();
            overrides.apply(&mut degenerate);
            let report = verify::verify(&scenario, &degenerate)?;
            std::fs::create_dir_all(&dir).map_err(pipeline::io_error(&dir))?;
            let text = report.to_text();
            write_bytes(&dir.join("verify.txt"), text.as_bytes())?;
            write_json(&dir.join("verify.json"), &report.checks)?;
            let failures = report.failures();
            if failures > 0 {
                eprint!("{text}");
                return Err(CliError::VerificationFailed(failures));
            }
            Ok(format!("{text}total {:.0} s", report.elapsed))
        }
        Command::Report => {
            report::report(&dir)?;
            Ok(format!("wrote {}", dir.join(report::REPORT).display()))
        }
    }
}
