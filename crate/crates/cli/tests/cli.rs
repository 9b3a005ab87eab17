use std::fs;
use std::path::Path;
use std::process::Command as Process;

use proptest::prelude::*;
use signorini::blowup::BlowupOptions;
use signorini::exact::{LewyType, ProfileSpec};
use signorini::Direction;
use signorini_cli::pipeline::Overrides;
use signorini_cli::scenario::{Boundary, Centers};
use signorini_cli::{run, CliError, Command, Scenario};

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_signorini"))
}

fn regular_2d(dir: &Path) -> Scenario {
    Scenario::parse(&format!(
        "name = regular2d\ngrid.dim = 2\ngrid.m = 129\nboundary.kind = profile\nprofile.kind = regular\n\
         probe.centers = 0.0, 0.0\noutput.dir = {}\n",
        dir.display()
    ))
    .unwrap()
}

fn pipeline(scenario: &Scenario) {
    for command in [Command::Solve, Command::Frequency, Command::Blowup, Command::FreeBoundary, Command::Report] {
        run(command, scenario, &Overrides::default()).unwrap();
    }
}

#[test]
fn full_pipeline_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(&regular_2d(a.path()));
    pipeline(&regular_2d(b.path()));
    let mut compared = 0;
    for entry in fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let first = fs::read(a.path().join(&name)).unwrap();
        let second = fs::read(b.path().join(&name)).unwrap();
        assert!(first == second, "{name:?} differs between runs");
        compared += 1;
    }
    for name in [
        "field.txt",
        "convergence.csv",
        "solve.json",
        "frequency_0.csv",
        "frequency_0_dr.svg",
        "frequency_0_logphi.svg",
        "frequency.json",
        "blowup.json",
        "blowup.csv",
        "contact.txt",
        "interface.txt",
        "graph.csv",
        "freeboundary.json",
        "heatmap.ppm",
        "heatmap.svg",
        "report.md",
    ] {
        assert!(a.path().join(name).is_file(), "missing {name}");
    }
    assert!(compared >= 16);

    // the regular profile reproduces itself: flat D_r near 3/2, class Regular
    let freq: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("frequency.json")).unwrap()).unwrap();
    let point = &freq["points"][0];
    assert!((point["mu"]["mu"].as_f64().unwrap() - 1.5).abs() < 0.03, "{point}");
    assert!(point["d_min"].as_f64().unwrap() > 1.45 && point["d_max"].as_f64().unwrap() < 1.55);
    let blowup: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("blowup.json")).unwrap()).unwrap();
    assert_eq!(blowup["points"][0]["class"], "Regular");
    let report = fs::read_to_string(a.path().join("report.md")).unwrap();
    assert!(report.contains("# Scenario `regular2d`"));
}

#[test]
fn empty_contact_set_gives_plain_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::parse(&format!(
        "grid.dim = 2\ngrid.m = 17\nboundary.kind = constant\nboundary.value = 1.0\noutput.dir = {}\n",
        dir.path().display()
    ))
    .unwrap();
    run(Command::Solve, &s, &Overrides::default()).unwrap();
    run(Command::FreeBoundary, &s, &Overrides::default()).unwrap();
    let svg = fs::read_to_string(dir.path().join("heatmap.svg")).unwrap();
    assert!(!svg.contains("stroke=\"red\""));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("freeboundary.json")).unwrap()).unwrap();
    assert_eq!(summary["contact_count"], 0);
    assert!(summary["cone"].is_null());
}

#[test]
fn grid_override_reaches_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::parse("grid.dim = 2\ngrid.m = 129\n").unwrap();
    let overrides = Overrides {
        grid_m: Some(17),
        output_dir: Some(dir.path().to_path_buf()),
    };
    run(Command::Solve, &s, &overrides).unwrap();
    let header = fs::read_to_string(dir.path().join("field.txt")).unwrap();
    assert!(header.starts_with("2 17 1 1\n"), "{}", &header[..20]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.scn");
    fs::write(&scenario, "grid.dim = 2\ngrid.m = many\n").unwrap();
    let out = binary().arg("solve").arg(&scenario).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = binary().args(["report", "--out"]).arg(dir.path().join("nothing")).output().unwrap();
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solve.json"));

    let out = binary().args(["frequency", "--out"]).arg(dir.path().join("nothing")).output().unwrap();
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field.txt"));

    // one sweep cannot converge; the partial field is still written
    let slow = dir.path().join("slow.scn");
    let out_dir = dir.path().join("slow");
    fs::write(
        &slow,
        format!("grid.dim = 2\ngrid.m = 33\nsolver.max_sweeps = 1\nsolver.nested_start = false\noutput.dir = {}\n", out_dir.display()),
    )
    .unwrap();
    let out = binary().arg("solve").arg(&slow).arg("--seedless").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out_dir.join("field.txt").is_file());
    let log = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);

    assert_eq!(CliError::VerificationFailed(1).exit_code(), 4);
    let out = binary().arg("explode").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_files_in_repo_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let default = Scenario::parse(&fs::read_to_string(root.join("default.scn")).unwrap()).unwrap();
    assert_eq!(default, Scenario::default());
    let degenerate = Scenario::parse(&fs::read_to_string(root.join("degenerate.scn")).unwrap()).unwrap();
    assert_eq!(degenerate, Scenario::degenerate());
    Scenario::parse(&fs::read_to_string(root.join("lewy2d.scn")).unwrap()).unwrap();
}

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

fn boundary() -> impl Strategy<Value = (usize, Boundary)> {
    prop_oneof![
        (2usize..=3, finite(-2.0, 2.0)).prop_map(|(d, c)| (d, Boundary::Constant(c))),
        prop::collection::vec(finite(-2.0, 2.0), 2).prop_map(|c| (3, Boundary::Linear(c))),
        (finite(-3.0, 3.0), finite(0.1, 3.0)).prop_map(|(a, b)| {
            let axis = Direction::new(&[a, b, 0.0]).unwrap();
            (3, Boundary::Profile(ProfileSpec::Regular { axis }))
        }),
        (1u32..4, any::<bool>()).prop_map(|(k, even)| {
            let kind = if even { LewyType::Even } else { LewyType::HalfInteger };
            (2, Boundary::Profile(ProfileSpec::Lewy2D { k, kind }))
        }),
        (finite(0.0, 2.0), finite(0.0, 2.0)).prop_map(|(a, b)| (3, Boundary::Profile(ProfileSpec::Quadratic { a: vec![a, b], c: a + b }))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emit_then_parse_is_identity(
        (dim, boundary) in boundary(),
        m in (4usize..40).prop_map(|k| 2 * k + 1),
        relaxation in finite(0.5, 1.95),
        eps in prop::option::of(finite(1e-12, 1e-3)),
        window in prop::option::of((finite(0.01, 0.1), finite(0.1, 0.5))),
        theta in finite(0.2, 1.5),
        offset in finite(-1.0, 1.0),
        centers in prop::option::of(prop::collection::vec(finite(-0.5, 0.5), 1..4)),
        nodes in 9usize..200,
        name in "[a-z][a-z0-9_]{0,12}",
    ) {
        let s = Scenario {
            name,
            dim,
            m,
            boundary,
            boundary_offset: offset,
            relaxation,
            eps_sweep: eps,
            mu_window: window,
            cone_theta: theta,
            centers: centers.map_or(Centers::Auto, |xs| {
                Centers::List(xs.iter().map(|&x| {
                    let mut p = vec![0.0; dim];
                    p[0] = x;
                    p
                }).collect())
            }),
            blowup: BlowupOptions { nodes, ..BlowupOptions::default() },
            ..Scenario::default()
        };
        let text = s.emit();
        let back = Scenario::parse(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.emit(), text);
    }
}
