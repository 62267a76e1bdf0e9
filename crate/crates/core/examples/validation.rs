//! Runs the cross-check suite at the quick scale and prints one line per
//! criterion. `cargo run --release --example validation`

use prioage::validate::{self, Scale};

fn main() -> prioage::Result<()> {
    let report = validate::run_suite(Scale::Quick, validate::DEFAULT_SEED)?;
    for c in &report.criteria {
        println!("{}", c.summary_line());
    }
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
