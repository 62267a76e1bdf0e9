//! Truncated-generator oracle: how the boundary mass and E[N] settle as the
//! truncation level grows, close to the stability boundary.

use prioage::{analytic, ctmc, ModelParams};

fn main() -> prioage::Result<()> {
    let p = ModelParams::new(2.0, 18.0, 10.0, 5.0)?;
    let exact = analytic::expected_queue_length(&p)?;
    println!("E[N] closed form {exact:.10}");
    println!("{:>6} {:>12} {:>16} {:>10}", "K", "boundary", "E[N]", "flag");
    for k in [16, 32, 64, 128, 256, 512, ctmc::default_truncation(&p)] {
        let s = ctmc::solve(&p, k)?;
        println!(
            "{k:>6} {:>12.3e} {:>16.10} {:>10}",
            s.boundary_mass,
            s.expected_n(),
            if s.non_vanishing_tail { "tail" } else { "" }
        );
    }

    let g = ctmc::build_generator(&p, 3)?;
    println!("\ngenerator at K = 3 (states q0 q1 q2 q3 q'1 q'2 q'3):");
    for row in g.to_dense() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:6.1}")).collect();
        println!("  {}", cells.join(" "));
    }
    Ok(())
}
