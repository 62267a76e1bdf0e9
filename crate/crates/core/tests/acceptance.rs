//! Acceptance run: all nine criteria at full scale, one PASS/FAIL line per
//! criterion. Failing checks are listed under their criterion.
//!
//! Set `PRIOAGE_ACCEPTANCE_QUICK=1` for the reduced-size suite.

use std::process::ExitCode;

use prioage::validate::{self, Scale};

fn main() -> ExitCode {
    // libtest flags such as --nocapture or a name filter are accepted and ignored
    let quick = std::env::var_os("PRIOAGE_ACCEPTANCE_QUICK").is_some_and(|v| v != "0");
    let scale = if quick { Scale::Quick } else { Scale::Full };
    println!("acceptance ({scale:?} scale, seed {})", validate::DEFAULT_SEED);

    let mut failed = 0;
    for id in 1..=9 {
        match validate::run_criterion(id, scale, validate::DEFAULT_SEED) {
            Ok(report) => {
                println!("{}", report.summary_line());
                for check in report.checks.iter().filter(|c| !c.passed) {
                    println!("    {check}");
                }
                if !report.passed() {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("FAIL criterion {id}: {} (error: {e})", validate::TITLES[id as usize - 1]);
                failed += 1;
            }
        }
    }
    println!("acceptance: {}/9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
