//! The batch pipeline, verb by verb.
//!
//! Drives the same dispatcher the `chainspill` binary wraps — synth,
//! build, describe, estimate, report — against a scratch data directory,
//! with a small TOML config keeping runtimes demo-friendly. Each verb
//! reads only what the previous stage wrote, and `estimate` refuses to
//! run on build products older than their inputs.
//!
//! Run with: `cargo run --example full_pipeline`

use std::fs;

const CONFIG: &str = r#"
[garch]
p = [1, 1]
o = [1, 1]
q = [1, 1]
restarts = 2

[arima]
p_max = 1
d_max = 1
q_max = 1

[study]
variants = ["linear_baseline"]
seed = 11

[synth]
seed = 11
n_half_days = 400
"#;

fn main() {
    let tmp = tempfile::tempdir().expect("scratch directory");
    let config = tmp.path().join("chainspill.toml");
    fs::write(&config, CONFIG).expect("config write");
    let data = tmp.path().join("data");

    for verb in ["synth", "build", "describe", "estimate", "report"] {
        println!("==> chainspill {verb}");
        let code = chainspill::cli::dispatch([
            "chainspill",
            "--config",
            config.to_str().unwrap(),
            "--data-dir",
            data.to_str().unwrap(),
            verb,
        ]);
        assert_eq!(code, 0, "`{verb}` exited {code}");
    }

    println!("\nartifacts under {}:", data.display());
    for rel in [
        "canonical/assets.jsonl",
        "canonical/prices.csv",
        "canonical/caps.csv",
        "canonical/series.csv",
        "build/panel.csv",
        "build/covariates.csv",
        "build/arima_report.csv",
        "report/describe.csv",
        "report/report.csv",
        "report/report.md",
    ] {
        let len = fs::metadata(data.join(rel)).map(|m| m.len()).unwrap_or(0);
        println!("  {rel:<26} {len:>8} bytes");
    }

    let md = fs::read_to_string(data.join("report/report.md")).expect("rendered report");
    let preview: Vec<&str> = md.lines().take(18).collect();
    println!("\nreport/report.md, first lines:\n");
    for line in preview {
        println!("  {line}");
    }
}
