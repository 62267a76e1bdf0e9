//! Sweeps the priority arrival rate with the ordinary stream fixed at
//! `lambda1 = 2, mu1 = 10, mu2 = 5` and prints the bracket, the simulated
//! age and the priority-stream age at each point.
//!
//! `cargo run --release --example priority_sweep [deliveries]`

use prioage::sim::{self, SimConfig};
use prioage::{age, analytic, ModelParams};
use rayon::prelude::*;

fn main() -> prioage::Result<()> {
    let deliveries: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);
    let grid: Vec<f64> = (1..=38).map(|k| 0.5 * k as f64).collect();
    let rows: Vec<_> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &l2)| -> prioage::Result<_> {
            let p = ModelParams::new(2.0, l2, 10.0, 5.0)?;
            let (lb, peak) = age::age_bracket(&p)?;
            let cfg = SimConfig::new(sim::mix_seed(1, idx as u64), deliveries);
            let r = sim::run(&p, &cfg)?;
            let se = r.stderr.map_or(f64::NAN, |s| s.age_1);
            Ok((l2, lb, r.avg_age_1, se, peak, analytic::priority_age(&p)?))
        })
        .collect::<prioage::Result<_>>()?;

    let reference = analytic::reference_mm1_age(2.0, 10.0)?;
    println!("reference M/M/1 age {reference:.5}");
    println!("{:>6} {:>9} {:>9} {:>8} {:>9} {:>9}", "l2", "lb", "sim", "se", "peak", "age_u2");
    for (l2, lb, s, se, peak, u2) in rows {
        println!("{l2:>6.1} {lb:>9.5} {s:>9.5} {se:>8.5} {peak:>9.5} {u2:>9.5}");
    }
    Ok(())
}
