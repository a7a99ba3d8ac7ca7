mod support;

use std::collections::BTreeMap;

use ncphi4::dimreg::locate_poles;
use ncphi4::exact::Rational;
use ncphi4::parametric::hu_extract;
use ncphi4::ribbon::{topology, RibbonGraph};
use ncphi4_cli::report::{AnalyzeReport, Envelope, HuReport, MatrixbaseReport, PolesReport, Render};
use support::{graph, invocations, ncphi4, run};

fn args(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn stdout(v: &[&str]) -> String {
    let out = run(&args(v));
    assert!(out.status.success(), "{v:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn machine<T: Render>(v: &[&str]) -> Envelope<T> {
    let mut a: Vec<&str> = v.to_vec();
    a.extend(["--format", "machine"]);
    let text = stdout(&a);
    let env: Envelope<T> = serde_json::from_str(&text).unwrap();
    // parsing and emitting again reproduces the output byte for byte
    assert_eq!(env.emit(), text);
    env
}

fn load(name: &str) -> RibbonGraph {
    RibbonGraph::parse(&std::fs::read_to_string(graph(name)).unwrap()).unwrap()
}

#[test]
fn every_subcommand_is_deterministic() {
    let n = support::determinism().unwrap();
    assert_eq!(n, 2 * invocations().len());
}

#[test]
fn analyze_tadpole_text() {
    assert_eq!(
        stdout(&["analyze", &graph("tadpole.graph")]),
        "# ncphi4 analyze seed=20071\nN=1 L=1 Ne=2 F=2 B=1 g=0 omega=1 class=divergent\n"
    );
    assert!(stdout(&["analyze", &graph("double_tadpole.graph")]).contains("B=0 g=1 omega=0 class=vacuum"));
}

#[test]
fn exit_codes() {
    let code = |v: &[&str]| run(&args(v)).status.code().unwrap();
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["analyze", "/definitely/not/here.graph"]), 2);
    assert_eq!(code(&["moyal", "propagator", "--x", "1,2,3", "--y", "0,0,0,0"]), 2);

    let dir = std::env::temp_dir().join(format!("ncphi4-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.graph");
    std::fs::write(&bad, "root = \"v0\"\nlines = [[\"v0a\", \"v0b\"]]\n[[vertices]]\nid = \"v0\"\ncorners = [\"v0a\", \"v0b\", \"v0c\"]\n").unwrap();
    let out = run(&args(&["analyze", bad.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(1));
    let syntax = dir.join("syntax.graph");
    std::fs::write(&syntax, "vertex v0 a b c\n").unwrap();
    let out = run(&args(&["analyze", syntax.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1, column"));

    let out = run(&args(&["analyze", &graph("tadpole.graph"), "--s", "2", "--omega", "1"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s·Ω ≠ 1"));
    assert_eq!(code(&["analyze", &graph("tadpole.graph"), "--s", "4", "--omega", "0.25"]), 0);
    // the tadpole already diverges at D = 2
    assert_eq!(code(&["amplitude", &graph("tadpole.graph"), "--dimension", "3"]), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn configuration_file_and_flags() {
    let dir = std::env::temp_dir().join(format!("ncphi4-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "omega = 0.25\ntheta = 2.0\nseed = 7\nformat = \"machine\"\n").unwrap();
    let from_env = ncphi4().env("NCPHI4_CONFIG", &cfg).args(["analyze", &graph("tadpole.graph")]).output().unwrap();
    let env: Envelope<AnalyzeReport> = serde_json::from_slice(&from_env.stdout).unwrap();
    assert_eq!((env.seed, env.config.omega, env.config.theta, env.config.s), (7, 0.25, 2.0, 4.0));
    let flagged = ncphi4()
        .env("NCPHI4_CONFIG", &cfg)
        .args(["analyze", &graph("tadpole.graph"), "--omega", "0.5", "--seed", "9"])
        .output()
        .unwrap();
    let env: Envelope<AnalyzeReport> = serde_json::from_slice(&flagged.stdout).unwrap();
    assert_eq!((env.seed, env.config.omega, env.config.theta), (9, 0.5, 2.0));
    let explicit = run(&args(&["analyze", &graph("tadpole.graph"), "--config", cfg.to_str().unwrap()]));
    assert_eq!(explicit.stdout, from_env.stdout);

    std::fs::write(&cfg, "omgea = 0.5\n").unwrap();
    let out = run(&args(&["analyze", &graph("tadpole.graph"), "--config", cfg.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn analyze_round_trip() {
    for name in ["tadpole.graph", "crossed_tadpole.graph", "bubble.graph", "bubble_in_two_point.graph"] {
        let env: Envelope<AnalyzeReport> = machine(&["analyze", &graph(name)]);
        let t = topology(&load(name));
        let r = env.report;
        assert_eq!((r.n, r.l, r.ne, r.f, r.b, r.g, r.omega), (t.n, t.l, t.ne, t.f, t.b, t.g, t.omega));
    }
}

#[test]
fn hu_round_trip() {
    for name in ["bubble.graph", "bubble_in_two_point.graph", "double_tadpole.graph"] {
        let env: Envelope<HuReport> = machine(&["hu", &graph(name)]);
        let parsed: BTreeMap<(u32, Vec<u32>), Rational> =
            env.report.terms.iter().map(|t| ((t.s, t.t.clone()), t.coefficient.parse().unwrap())).collect();
        let hu = hu_extract(&load(name)).unwrap();
        let expected: BTreeMap<(u32, Vec<u32>), Rational> =
            hu.terms.iter().map(|(m, c)| ((m.s, m.t.iter().map(|&e| e as u32).collect()), c.clone())).collect();
        assert_eq!(parsed, expected, "{name}");
    }
    let a = stdout(&["hu", &graph("bubble.graph"), "--format", "machine"]);
    let b = stdout(&["hu", &graph("bubble.graph"), "--format", "machine"]);
    assert_eq!(a, b);
}

#[test]
fn poles_round_trip() {
    let env: Envelope<PolesReport> = machine(&["dimreg", "poles", &graph("bubble_in_two_point.graph"), "--sectors"]);
    let poles = locate_poles(&load("bubble_in_two_point.graph")).unwrap();
    assert_eq!(env.report.superficial.as_deref(), Some("10/3"));
    assert_eq!(env.report.superficial, poles.superficial.map(|d| d.to_string()));
    assert_eq!(env.report.sectors.unwrap().len(), 120);
    let bubble: Envelope<PolesReport> = machine(&["dimreg", "poles", &graph("bubble.graph")]);
    assert_eq!(bubble.report.poles[0].dimension, "4");
}

#[test]
fn matrixbase_round_trip() {
    let env: Envelope<MatrixbaseReport> = machine(&["moyal", "matrixbase", "--cutoff", "6", "--omega", "0.8"]);
    assert_eq!((env.report.cutoff, env.report.dim), (6, 1296));
    assert!(env.report.residual <= 1e-8);
}
