//! Acceptance suite: every criterion at its stated tolerance, one line each.
//!
//! Runs without the libtest harness so the report always prints; the process
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use ionbell_cli::validate::{self, Check};

const SEED: u64 = 20_240_611;

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .expect("output directory")
        .map(|e| {
            let e = e.expect("entry");
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).expect("artifact"))
        })
        .collect()
}

/// Runs the binary twice per mode into separate directories and compares the
/// files it wrote.
fn binary_determinism() -> Result<String, String> {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let record = work.path().join("signal.csv");
    let mut files = 0;
    for (name, text) in validate::determinism_configs(SEED, &record.to_string_lossy()) {
        let cfg_path = work.path().join(format!("{name}.toml"));
        fs::write(&cfg_path, text).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for (run, threads) in [("a", "1"), ("b", "3")] {
            let out_dir = work.path().join(format!("{name}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ionbell"))
                .args(["--config", &cfg_path.to_string_lossy(), "--out", &out_dir.to_string_lossy(), "--threads", threads, "--quiet"])
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{name}: exit status {status}"));
            }
            outputs.push(read_dir(&out_dir));
        }
        if name == "tomo-synth" {
            fs::copy(work.path().join("tomo-synth-a/signal.csv"), &record).map_err(|e| e.to_string())?;
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name}: files differ between runs"));
        }
        files += outputs[0].len();
    }
    Ok(format!("binary: {files} files byte-identical across two runs per mode"))
}

fn main() -> ExitCode {
    let mut checks = validate::run_all(SEED);
    if let Some(det) = checks.iter_mut().find(|c| c.id == 10) {
        match binary_determinism() {
            Ok(detail) => det.detail = format!("{}; {detail}", det.detail),
            Err(e) => {
                det.passed = false;
                det.detail = format!("{}; binary: {e}", det.detail);
            }
        }
    }
    println!();
    println!("acceptance criteria (seed {SEED})");
    for c in &checks {
        println!("{}", c.line());
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    println!("{} passed, {} failed", checks.len() - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
