//! Running the built binary from integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn graphs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs")
}

pub fn graph(name: &str) -> String {
    graphs().join(name).to_string_lossy().into_owned()
}

/// The binary with a clean configuration environment.
pub fn ncphi4() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ncphi4"));
    c.env_remove("NCPHI4_CONFIG");
    c
}

pub fn run(args: &[String]) -> Output {
    ncphi4().args(args).output().expect("binary runs")
}

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// One invocation of every subcommand, small enough for repeated runs.
pub fn invocations() -> Vec<Vec<String>> {
    let g = graph;
    vec![
        owned(&["analyze", &g("tadpole.graph")]),
        owned(&["analyze", &g("double_tadpole.graph")]),
        owned(&["rosette", &g("bubble_in_two_point.graph"), "--moyality"]),
        owned(&["rosette", &g("bubble.graph"), "--tree", "2"]),
        owned(&["hu", &g("bubble_in_two_point.graph")]),
        owned(&["hu", &g("bubble_in_two_point.graph"), "--variant", "smeared"]),
        owned(&["amplitude", &g("tadpole.graph"), "--dimension", "1.5", "--x", "0.1,0.2,0,0", "--x", "0,0,0.3,0"]),
        owned(&["amplitude", &g("bubble.graph"), "--t", "0.3,0.6", "--p", "0.1,0,0.2,0"]),
        owned(&["dimreg", "poles", &g("bubble_in_two_point.graph"), "--sectors"]),
        owned(&["dimreg", "factcheck", &g("bubble_in_two_point.graph"), "--subgraph", "4,5"]),
        owned(&["dimreg", "subtract", &g("bubble.graph"), "--subgraph", "1,2"]),
        owned(&["moyal", "star", &g("gaussian.toml"), &g("plane_wave.toml"), "--at", "0.1,0.2,0.3,0.4"]),
        owned(&["moyal", "propagator", "--x", "0.1,0,0,0", "--y", "0,0.2,0,0", "--slices", "2"]),
        owned(&["moyal", "matrixbase", "--cutoff", "6", "--omega", "0.8"]),
    ]
}

/// Runs every invocation in both formats, three times with one thread and
/// once with eight, and reports the first difference.
pub fn determinism() -> Result<usize, String> {
    let mut checked = 0;
    for base in invocations() {
        for format in ["text", "machine"] {
            let with = |threads: &str| -> Vec<String> {
                let mut a = base.clone();
                a.extend(["--format".into(), format.into(), "--threads".into(), threads.into()]);
                a
            };
            let reference = run(&with("1"));
            if !reference.status.success() {
                return Err(format!("{base:?} failed: {}", String::from_utf8_lossy(&reference.stderr)));
            }
            for threads in ["1", "1", "8"] {
                let again = run(&with(threads));
                if again.stdout != reference.stdout || again.status.code() != reference.status.code() {
                    return Err(format!("{base:?} --format {format} differs with --threads {threads}"));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}
