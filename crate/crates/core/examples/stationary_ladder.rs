//! The stationary ladder three ways: spectral closed form, iteration of the
//! level recursion, and a linear solve of the truncated generator.

use prioage::{analytic, ctmc, ModelParams};

fn main() -> prioage::Result<()> {
    let p = ModelParams::new(2.0, 5.0, 10.0, 5.0)?;
    let sd = analytic::spectral(&p)?;
    println!("eigenvalues l1 = {:.6}, l2 = {:.6}", sd.l1, sd.l2);

    let spectral = analytic::stationary_default(&p)?;
    let recursion = analytic::stationary_by_recursion(&p, 12)?;
    let chain = ctmc::solve(&p, 200)?;
    println!("ladder length {} (tail mass {:.1e})", spectral.i_max(), spectral.tail_mass);
    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "i", "pi_i", "pi'_i", "recursion", "chain");
    for i in 0..=12 {
        println!(
            "{i:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            spectral.pi(i),
            spectral.pi_prime(i),
            recursion.pi(i),
            chain.pi(i)
        );
    }
    let worst = (1..=50)
        .map(|i| (spectral.pi(i) - chain.pi(i)).abs().max((spectral.pi_prime(i) - chain.pi_prime(i)).abs()))
        .fold(0.0, f64::max);
    println!("max gap to the truncated chain over i <= 50: {worst:.1e}");
    Ok(())
}
