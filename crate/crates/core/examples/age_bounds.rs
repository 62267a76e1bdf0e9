//! The ingredients of the lower bound: the virtual service law, the
//! fictitious system-time density, and the overlap term, each next to an
//! independent numerical estimate.

use prioage::{age, oracle, ModelParams};

fn main() -> prioage::Result<()> {
    let p = ModelParams::new(2.0, 5.0, 10.0, 5.0)?;

    let law = age::virtual_service_moments(&p)?;
    println!("race probabilities a={:.4} b={:.4} u={:.4} v={:.4}", law.a, law.b, law.u, law.v);
    println!("E[Y] = {:.6}  E[Y'] = {:.6}  E[Z] = {:.6}", law.mean_y, law.mean_yp, law.mean_z);
    for s in [-1.0, 0.0, 0.5] {
        println!(
            "  phi_Y({s:>4}) closed {:.12}  detour {:.12}",
            age::mgf_y(&p, s)?,
            age::mgf_y_via_detour(&p, s)?
        );
    }

    let t = age::system_time_lb(&p)?;
    println!(
        "\nsystem time density: {:.4} e^(-{:.4} t) + {:.4} e^(-{:.4} t), mean {:.6}",
        -t.c1, t.alpha1, -t.c2, t.alpha2, t.mean()
    );

    let overlap = age::expected_overlap(&p)?;
    let quad = oracle::overlap_by_quadrature(&p)?;
    let mc = oracle::overlap_by_monte_carlo(&p, 5_000_000, 1);
    println!("\nE[X (T - X)^+]");
    println!("  closed form  {overlap:.8}");
    println!("  quadrature   {quad:.8}");
    println!("  Monte Carlo  {:.8} ± {:.8}", mc.overlap, mc.overlap_stderr);

    let (lb, peak) = age::age_bracket(&p)?;
    println!("\nstream-1 age between {lb:.6} and {peak:.6}");
    Ok(())
}
