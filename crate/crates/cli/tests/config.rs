use std::path::PathBuf;

use nlhelm_cli::config::{apply_override, parse_override, Format, Nonlinearity, Preset};
use nlhelm_cli::error::exit;
use nlhelm_cli::{CliError, RunConfig};
use serde_json::{json, Value};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const MINIMAL: &str = r#"{
  "problem": { "n": 3, "lambda": 1.0 },
  "discretization": { "r_min": 1.0, "r_max": 60.0, "radial_count": 1024, "max_degree": 4 }
}"#;

fn minimal(overrides: &[&str]) -> Result<RunConfig, CliError> {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::parse(MINIMAL, &o)
}

#[test]
fn shipped_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let cfg = RunConfig::load(&path, &[]).unwrap();
        cfg.validate()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let text = cfg.emit();
        let back = RunConfig::parse(&text, &[]).unwrap();
        assert_eq!(back, cfg, "{}", path.display());
        assert_eq!(back.emit(), text);
        seen += 1;
    }
    assert!(seen >= 4);
}

#[test]
fn defaults_are_filled_in() {
    let cfg = minimal(&[]).unwrap();
    assert_eq!(cfg.discretization.r0, 2.0);
    assert_eq!(
        cfg.nonlinearity,
        Nonlinearity::GaugePower {
            alpha: num_complex::Complex64::new(1.0, 0.0),
            p: 5
        }
    );
    assert!(cfg.outputs.wants(Format::Csv) && cfg.outputs.wants(Format::Field));
    assert_eq!(cfg.flow.starts, 100);
    assert_eq!(cfg.probe.scales.len(), 5);
    cfg.validate().unwrap();
}

#[test]
fn overrides_reach_nested_keys() {
    let cfg = minimal(&[
        "problem.lambda=2.5",
        "solver.tol_step=1e-9",
        "incoming_data.preset={\"kind\":\"zonal\",\"l\":2}",
        "incoming_data.modes=[{\"l\":1,\"m\":0,\"re\":1}]",
        "incoming_data.modes.0.im=-0.5",
        "outputs.directory=runs/a b",
        "farfield.window=[20,50]",
    ])
    .unwrap();
    assert_eq!(cfg.problem.lambda, 2.5);
    assert_eq!(cfg.solver.tol_step, 1e-9);
    assert_eq!(cfg.incoming_data.preset, Some(Preset::Zonal { l: 2 }));
    assert_eq!(cfg.incoming_data.modes[0].im, -0.5);
    assert_eq!(cfg.outputs.directory, PathBuf::from("runs/a b"));
    assert_eq!(cfg.farfield.window, Some((20.0, 50.0)));
}

#[test]
fn later_overrides_win() {
    let cfg = minimal(&["problem.lambda=2", "problem.lambda=3"]).unwrap();
    assert_eq!(cfg.problem.lambda, 3.0);
}

#[test]
fn override_creates_missing_sections() {
    let mut doc = json!({});
    apply_override(&mut doc, "a.b.c", "4").unwrap();
    assert_eq!(doc, json!({"a": {"b": {"c": 4}}}));
}

#[test]
fn malformed_overrides_are_rejected() {
    assert!(parse_override("problem.lambda").is_err());
    assert_eq!(parse_override("a=b=c").unwrap(), ("a", "b=c"));
    let mut doc: Value = serde_json::from_str(MINIMAL).unwrap();
    for (path, raw) in [
        ("problem..n", "3"),
        ("problem.n.deeper", "1"),
        ("incoming_data", "7"),
    ] {
        let mut d = doc.clone();
        if let Err(e) = apply_override(&mut d, path, raw) {
            assert_eq!(e.exit_code(), exit::CONFIG);
        } else {
            assert!(RunConfig::from_value(d).is_err(), "{path}");
        }
    }
    doc["x"] = json!([1, 2]);
    assert!(apply_override(&mut doc, "x.5", "0").is_err());
    assert!(apply_override(&mut doc, "x.first", "0").is_err());
}

#[test]
fn unknown_keys_are_rejected() {
    for o in [
        "problem.lamda=1",
        "solver.tolerance=1",
        "bogus=1",
        "flow.weight.extra=1",
    ] {
        let err = minimal(&[o]).unwrap_err();
        assert_eq!(err.exit_code(), exit::CONFIG, "{o}");
    }
}

#[test]
fn cross_constraints_are_checked() {
    for o in [
        "problem.n=1",
        "problem.lambda=0",
        "problem.lambda=-1",
        "discretization.r0=40",
        "discretization.radial_count=50",
        "discretization.r_max=0.5",
        "incoming_data.size=-1",
        "incoming_data.modes=[{\"l\":7,\"m\":0,\"re\":1}]",
        "incoming_data.modes=[{\"l\":2,\"m\":3,\"re\":1}]",
        "incoming_data.preset={\"kind\":\"random\",\"max_degree\":9,\"seed\":0}",
        "farfield.window=[50,20]",
        "farfield.window=[20,90]",
        "flow.horizon=0",
        "flow.x_max=1",
        "flow.weight={\"kind\":\"interpolated\",\"delta\":0.05,\"flat\":1.0,\"reversed\":false}",
        "probe.scales=[]",
        "probe.scales=[1,-2]",
    ] {
        let err = minimal(&[o]).and_then(|c| c.validate()).expect_err(o);
        assert_eq!(err.exit_code(), exit::CONFIG, "{o}: {err}");
    }
}

#[test]
fn incoming_data_is_rescaled() {
    let cfg = minimal(&[
        "incoming_data.preset={\"kind\":\"random\",\"max_degree\":3,\"seed\":7}",
        "incoming_data.size=0.25",
        "solver.k=2",
    ])
    .unwrap();
    let raw = cfg.raw_incoming().unwrap();
    let f = cfg.incoming().unwrap();
    assert_eq!(raw.max_degree(), f.max_degree());
    assert!((f.sobolev_norm(4.0) - 0.25).abs() < 1e-12);
    let again = cfg.raw_incoming().unwrap();
    assert_eq!(raw.coeffs, again.coeffs);
}

#[test]
fn solver_section_carries_r0() {
    let cfg = minimal(&["discretization.r0=3", "solver.anderson=2"]).unwrap();
    let s = cfg.solver_config();
    assert_eq!(s.r0, 3.0);
    assert_eq!(s.anderson, 2);
}
