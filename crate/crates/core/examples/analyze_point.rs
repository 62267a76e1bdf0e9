//! Closed-form report for one parameter point.
//!
//! `cargo run --example analyze_point -- 2 5 10 5` (lambda1 lambda2 mu1 mu2)

use prioage::{age, analytic, ModelParams};

fn main() -> prioage::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let [l1, l2, m1, m2] = match args[..] {
        [a, b, c, d] => [a, b, c, d],
        _ => [2.0, 5.0, 10.0, 5.0],
    };
    let p = ModelParams::new(l1, l2, m1, m2)?;

    let st = analytic::check_stability(&p);
    println!("lambda1={l1} lambda2={l2} mu1={m1} mu2={m2}");
    println!("stability margin {:.6}", st.margin);
    if !st.is_stable {
        println!("unstable: stream 1 queue grows without bound");
        return Ok(());
    }

    let (lb, peak) = age::age_bracket(&p)?;
    println!("pi0                 {:.6}", st.pi0.unwrap());
    println!("E[N]                {:.6}", analytic::expected_queue_length(&p)?);
    println!("age of stream 1 in  [{lb:.6}, {peak:.6}]");
    if l2 > 0.0 {
        println!("age of stream 2     {:.6}", analytic::priority_age(&p)?);
    }
    if let Ok(reference) = analytic::reference_mm1_age(l1, m1) {
        println!("M/M/1 age without stream 2 {reference:.6} (lower bound is {:.1}% above)",
            100.0 * (lb / reference - 1.0));
    }
    Ok(())
}
