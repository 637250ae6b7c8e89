use std::process::ExitCode;

use concentrator_core::certify::{run_all, CertifyOptions};

fn main() -> ExitCode {
    let workers = std::env::var("CONCENTRATOR_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1);
    let opts = CertifyOptions {
        workers,
        ..CertifyOptions::default()
    };
    let results = run_all(&opts);
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
