//! One simulation run in each mode, compared with the closed forms, plus the
//! first few lines of the event log.

use prioage::sim::{self, Mode, SimConfig};
use prioage::{age, analytic, ModelParams};

fn main() -> prioage::Result<()> {
    let p = ModelParams::new(2.0, 5.0, 10.0, 5.0)?;
    let (lb, peak) = age::age_bracket(&p)?;

    for mode in [Mode::TrueSystem, Mode::FictitiousSystem] {
        let r = sim::run(&p, &SimConfig::new(7, 500_000).with_mode(mode))?;
        let se = r.stderr.expect("enough deliveries for batch means");
        println!("{mode:?}");
        println!("  age 1      {:.5} ± {:.5}   (bracket [{lb:.5}, {peak:.5}])", r.avg_age_1, se.age_1);
        println!("  peak age 1 {:.5} ± {:.5}   (true system {peak:.5})", r.avg_peak_1, se.peak_1);
        println!("  age 2      {:.5}", r.avg_age_2);
        println!("  E[N]       {:.5}           (true system {:.5})", r.time_avg_n, analytic::expected_queue_length(&p)?);
        let occ = sim::occupancy_report(&r, &p, 10);
        println!("  occupancy max deviation {:.4}", occ.max_deviation);
    }

    let (_, log) = sim::run_traced(&p, &SimConfig::new(7, 5).with_warmup(0))?;
    println!("\nevent log:");
    let mut out = std::io::stdout().lock();
    sim::write_event_log(&log[..log.len().min(12)], &mut out).expect("stdout");
    Ok(())
}
