//! Runs every acceptance check, prints one line per check and exits nonzero
//! if any fails. Uses a plain `main` so the report is never captured.

use std::process::ExitCode;

use bf_core::validation::{run, ValidationConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = ValidationConfig::default();
    let mut failed = 0;
    for id in 1..=CRITERIA.len() {
        let outcome = run(id, &cfg);
        println!("{outcome}");
        failed += usize::from(!outcome.passed);
    }

    let mutated = ValidationConfig {
        flip_e22_sign: true,
        ..cfg
    };
    let caught = !run(2, &mutated).passed;
    println!("[{}] mutation: flipped e22 sign is detected", if caught { "PASS" } else { "FAIL" });
    failed += usize::from(!caught);

    println!("acceptance: {}/{} checks passed", CRITERIA.len() + 1 - failed, CRITERIA.len() + 1);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
