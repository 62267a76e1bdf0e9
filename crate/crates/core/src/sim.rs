//! Event-driven simulation of the two-stream queue.
//!
//! Three clocks compete: the next stream-1 arrival, the next stream-2
//! arrival and the completion of whatever is in service. Arrival clocks are
//! redrawn when they fire; the service clock is set when a packet enters or
//! re-enters service. A stream-2 arrival always takes the server: an
//! in-service stream-2 packet is discarded, an in-service stream-1 packet is
//! pushed back to the head of its FIFO with its remaining requirement
//! frozen.
//!
//! In [`Mode::FictitiousSystem`] a stream-1 arrival that finds a stream-2
//! packet in service and no stream-1 packet in the system discards the
//! stream-2 packet and starts service at once.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, StationaryDistribution};
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TrueSystem,
    FictitiousSystem,
}

/// What happens to a preempted stream-1 packet's service requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreemptionRule {
    /// Resume with the frozen remainder.
    Resume,
    /// Draw a fresh requirement on resumption.
    Resample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Stream-1 deliveries observed after warm-up.
    pub target_deliveries: u64,
    pub warmup_deliveries: u64,
    pub mode: Mode,
    pub preemption: PreemptionRule,
    /// Highest level `i` whose `q_i` / `q'_i` occupancy is tracked
    /// individually; time above it is pooled.
    pub occupancy_levels: usize,
}

pub const DEFAULT_WARMUP: u64 = 1_000;
pub const DEFAULT_DELIVERIES: u64 = 1_000_000;
const BATCHES: usize = 20;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            target_deliveries: DEFAULT_DELIVERIES,
            warmup_deliveries: DEFAULT_WARMUP,
            mode: Mode::TrueSystem,
            preemption: PreemptionRule::Resume,
            occupancy_levels: 64,
        }
    }
}

impl SimConfig {
    pub fn new(seed: u64, target_deliveries: u64) -> Self {
        Self {
            seed,
            target_deliveries,
            ..Self::default()
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup_deliveries = warmup;
        self
    }

    pub fn with_preemption(mut self, rule: PreemptionRule) -> Self {
        self.preemption = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_deliveries == 0 {
            return Err(Error::InvalidConfig(
                "target_deliveries must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer applied to `seed` offset by `index`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome counts of the service-vs-priority-arrival races.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RaceCounts {
    /// Stream-1 service completed first.
    pub a: u64,
    /// Stream-2 arrival interrupted a stream-2 service.
    pub b: u64,
    /// Stream-2 service completed first.
    pub u: u64,
    /// Stream-2 arrival interrupted a stream-1 service.
    pub v: u64,
}

impl RaceCounts {
    /// Empirical `(a, b, u, v)`.
    pub fn frequencies(&self) -> (f64, f64, f64, f64) {
        let s1 = (self.a + self.v) as f64;
        let s2 = (self.b + self.u) as f64;
        (
            self.a as f64 / s1,
            self.b as f64 / s2,
            self.u as f64 / s2,
            self.v as f64 / s1,
        )
    }
}

/// Time fractions spent in each chain state during the measurement window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occupancy {
    /// `q[i]` for `q_i`, `i = 0..=levels`.
    pub q: Vec<f64>,
    /// `q_prime[i]` for `q'_i`; index 0 is unused and always 0.
    pub q_prime: Vec<f64>,
    /// Everything above the tracked levels.
    pub overflow: f64,
}

impl Occupancy {
    pub fn total(&self) -> f64 {
        self.q.iter().sum::<f64>() + self.q_prime.iter().sum::<f64>() + self.overflow
    }
}

/// Batch-means standard errors (20 batches by delivery count).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StdErrors {
    pub age_1: f64,
    pub peak_1: f64,
    pub age_2: f64,
    pub time_avg_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub avg_age_1: f64,
    pub avg_peak_1: f64,
    pub avg_age_2: f64,
    pub time_avg_n: f64,
    pub occupancy: Occupancy,
    pub z_mean: f64,
    pub z_m2: f64,
    /// Fraction of observed stream-1 packets that arrived to find `q'_1`.
    pub psi_fraction: f64,
    /// Mean virtual service time given the packet found `q'_1`.
    pub z_mean_psi: Option<f64>,
    pub z_mean_no_psi: Option<f64>,
    pub mean_system_time_1: f64,
    pub deliveries_observed: u64,
    pub priority_deliveries: u64,
    /// Length of the measurement window.
    pub sim_time: f64,
    pub races: RaceCounts,
    pub stderr: Option<StdErrors>,
}

impl SimResult {
    /// Observed stream-1 throughput.
    pub fn throughput_1(&self) -> f64 {
        self.deliveries_observed as f64 / self.sim_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival1,
    Arrival2,
    Completion1,
    Completion2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerState {
    Idle,
    Serving1,
    Serving2,
}

/// Stream-1 delivery details attached to a completion event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeliveryRecord {
    pub generated: f64,
    pub peak: f64,
    pub virtual_service: f64,
    pub found_q_prime_1: bool,
}

/// One line of the event log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    /// Stream-1 packets in the system after the event.
    pub queue_len: usize,
    pub server: ServerState,
    pub delivery: Option<DeliveryRecord>,
}

impl fmt::Display for EventRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            EventKind::Arrival1 => "arrival1",
            EventKind::Arrival2 => "arrival2",
            EventKind::Completion1 => "completion1",
            EventKind::Completion2 => "completion2",
        };
        let server = match self.server {
            ServerState::Idle => "idle",
            ServerState::Serving1 => "serving1",
            ServerState::Serving2 => "serving2",
        };
        write!(f, "{} {} n={} {}", self.time, kind, self.queue_len, server)?;
        if let Some(d) = &self.delivery {
            write!(
                f,
                " gen={} peak={} z={} psi={}",
                d.generated, d.peak, d.virtual_service, d.found_q_prime_1
            )?;
        }
        Ok(())
    }
}

pub fn write_event_log<W: Write>(records: &[EventRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Server {
    Idle,
    /// Serving the head stream-1 packet since `since` with `remaining`
    /// requirement at that instant.
    One { since: f64, remaining: f64 },
    Two { generated: f64 },
}

#[derive(Debug, Default, Clone, Copy)]
struct Batch {
    age1: f64,
    age2: f64,
    n: f64,
    time: f64,
    peak: f64,
    count: u64,
}

struct Rngs {
    arrivals1: ChaCha8Rng,
    arrivals2: ChaCha8Rng,
    service: ChaCha8Rng,
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate > 0.0 {
        let e: f64 = rng.sample(Exp1);
        e / rate
    } else {
        f64::INFINITY
    }
}

/// Runs one simulation.
pub fn run(params: &ModelParams, config: &SimConfig) -> Result<SimResult> {
    run_with(params, config, |_| {})
}

/// Runs one simulation and collects every event in the measurement window.
pub fn run_traced(
    params: &ModelParams,
    config: &SimConfig,
) -> Result<(SimResult, Vec<EventRecord>)> {
    let mut log = Vec::new();
    let result = run_with(params, config, |e| log.push(*e))?;
    Ok((result, log))
}

/// Runs one simulation, calling `observe` for every event processed inside
/// the measurement window.
pub fn run_with<F>(params: &ModelParams, config: &SimConfig, mut observe: F) -> Result<SimResult>
where
    F: FnMut(&EventRecord),
{
    config.validate()?;
    let (l1, l2, m1, m2) = (params.lambda1(), params.lambda2(), params.mu1(), params.mu2());
    let mut rngs = Rngs {
        arrivals1: ChaCha8Rng::seed_from_u64(mix_seed(config.seed, 0)),
        arrivals2: ChaCha8Rng::seed_from_u64(mix_seed(config.seed, 1)),
        service: ChaCha8Rng::seed_from_u64(mix_seed(config.seed, 2)),
    };
    let levels = config.occupancy_levels;
    let fictitious = config.mode == Mode::FictitiousSystem;
    let resume = config.preemption == PreemptionRule::Resume;

    let mut now = 0.0f64;
    let mut next_a1 = exponential(&mut rngs.arrivals1, l1);
    let mut next_a2 = exponential(&mut rngs.arrivals2, l2);
    let mut completion = f64::INFINITY;
    let mut server = Server::Idle;
    // (generation time, arrived to find q'_1)
    let mut queue: VecDeque<(f64, bool)> = VecDeque::new();
    let mut frozen: Option<f64> = None;
    let mut last_gen1 = 0.0f64;
    let mut last_gen2 = 0.0f64;
    let mut last_delivery1 = 0.0f64;

    let warmup = config.warmup_deliveries;
    let end = warmup + config.target_deliveries;
    let mut delivered: u64 = 0;
    let mut measuring = warmup == 0;
    let mut window_start = 0.0f64;

    let mut occ_q = vec![0.0f64; levels + 1];
    let mut occ_qp = vec![0.0f64; levels + 1];
    let mut occ_over = 0.0f64;
    let mut age1_int = 0.0f64;
    let mut age2_int = 0.0f64;
    let mut n_int = 0.0f64;
    let mut peak_sum = 0.0f64;
    let mut z_sum = 0.0f64;
    let mut z_sq = 0.0f64;
    let mut z_psi_sum = 0.0f64;
    let mut psi_count: u64 = 0;
    let mut sys_sum = 0.0f64;
    let mut observed: u64 = 0;
    let mut priority_deliveries: u64 = 0;
    let mut races = RaceCounts::default();
    let per_batch = (config.target_deliveries / BATCHES as u64).max(1);
    let mut batches = vec![Batch::default(); BATCHES];
    let mut batch_idx = 0usize;

    while delivered < end {
        // ties: completion, then stream-2 arrival, then stream-1 arrival
        let mut kind = EventKind::Completion1;
        let mut at = completion;
        if next_a2 < at {
            kind = EventKind::Arrival2;
            at = next_a2;
        }
        if next_a1 < at {
            kind = EventKind::Arrival1;
            at = next_a1;
        }
        if kind == EventKind::Completion1 {
            if let Server::Two { .. } = server {
                kind = EventKind::Completion2;
            }
        }
        if !at.is_finite() {
            return Err(Error::InvalidConfig("no event can ever occur".into()));
        }

        if measuring {
            let dt = at - now;
            let a1 = (now - last_gen1 + at - last_gen1) * 0.5 * dt;
            let a2 = (now - last_gen2 + at - last_gen2) * 0.5 * dt;
            let n = queue.len();
            age1_int += a1;
            age2_int += a2;
            n_int += n as f64 * dt;
            let b = &mut batches[batch_idx];
            b.age1 += a1;
            b.age2 += a2;
            b.n += n as f64 * dt;
            b.time += dt;
            match server {
                Server::Idle => occ_q[0] += dt,
                Server::One { .. } if n <= levels => occ_q[n] += dt,
                Server::Two { .. } if n < levels => occ_qp[n + 1] += dt,
                _ => occ_over += dt,
            }
        }
        now = at;

        let mut delivery = None;
        match kind {
            EventKind::Arrival1 => {
                next_a1 = now + exponential(&mut rngs.arrivals1, l1);
                let found_q1p = matches!(server, Server::Two { .. }) && queue.is_empty();
                queue.push_back((now, found_q1p));
                let start = match server {
                    Server::Idle => true,
                    Server::Two { .. } => fictitious && found_q1p,
                    Server::One { .. } => false,
                };
                if start {
                    let remaining = exponential(&mut rngs.service, m1);
                    server = Server::One { since: now, remaining };
                    completion = now + remaining;
                }
            }
            EventKind::Arrival2 => {
                next_a2 = now + exponential(&mut rngs.arrivals2, l2);
                match server {
                    Server::One { since, remaining } => {
                        races.v += 1;
                        frozen = resume.then(|| (remaining - (now - since)).max(0.0));
                    }
                    Server::Two { .. } => races.b += 1,
                    Server::Idle => {}
                }
                server = Server::Two { generated: now };
                completion = now + exponential(&mut rngs.service, m2);
            }
            EventKind::Completion1 => {
                races.a += 1;
                let (generated, psi) = queue.pop_front().expect("stream-1 packet in service");
                let peak = now - last_gen1;
                let z = now - last_delivery1.max(generated);
                delivered += 1;
                if measuring {
                    observed += 1;
                    peak_sum += peak;
                    z_sum += z;
                    z_sq += z * z;
                    sys_sum += now - generated;
                    if psi {
                        psi_count += 1;
                        z_psi_sum += z;
                    }
                    let b = &mut batches[batch_idx];
                    b.peak += peak;
                    b.count += 1;
                    if b.count == per_batch && batch_idx + 1 < BATCHES {
                        batch_idx += 1;
                    }
                }
                delivery = Some(DeliveryRecord {
                    generated,
                    peak,
                    virtual_service: z,
                    found_q_prime_1: psi,
                });
                last_gen1 = generated;
                last_delivery1 = now;
                if queue.is_empty() {
                    server = Server::Idle;
                    completion = f64::INFINITY;
                } else {
                    let remaining = exponential(&mut rngs.service, m1);
                    server = Server::One { since: now, remaining };
                    completion = now + remaining;
                }
            }
            EventKind::Completion2 => {
                races.u += 1;
                if let Server::Two { generated } = server {
                    last_gen2 = generated;
                }
                if measuring {
                    priority_deliveries += 1;
                }
                if queue.is_empty() {
                    server = Server::Idle;
                    completion = f64::INFINITY;
                } else {
                    let remaining = match frozen.take() {
                        Some(r) => r,
                        None => exponential(&mut rngs.service, m1),
                    };
                    server = Server::One { since: now, remaining };
                    completion = now + remaining;
                }
            }
        }

        if measuring {
            observe(&EventRecord {
                time: now,
                kind,
                queue_len: queue.len(),
                server: match server {
                    Server::Idle => ServerState::Idle,
                    Server::One { .. } => ServerState::Serving1,
                    Server::Two { .. } => ServerState::Serving2,
                },
                delivery,
            });
        } else if delivered == warmup {
            measuring = true;
            window_start = now;
        }
    }

    let window = now - window_start;
    let n_obs = observed as f64;
    let z_mean = z_sum / n_obs;
    let non_psi = observed - psi_count;
    let scale = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x /= window);
    scale(&mut occ_q);
    scale(&mut occ_qp);

    let stderr = (config.target_deliveries >= BATCHES as u64).then(|| {
        let se = |f: &dyn Fn(&Batch) -> f64| {
            let vals: Vec<f64> = batches.iter().map(f).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / (vals.len() as f64 - 1.0);
            (var / vals.len() as f64).sqrt()
        };
        StdErrors {
            age_1: se(&|b| b.age1 / b.time),
            peak_1: se(&|b| b.peak / b.count as f64),
            age_2: se(&|b| b.age2 / b.time),
            time_avg_n: se(&|b| b.n / b.time),
        }
    });

    Ok(SimResult {
        avg_age_1: age1_int / window,
        avg_peak_1: peak_sum / n_obs,
        avg_age_2: age2_int / window,
        time_avg_n: n_int / window,
        occupancy: Occupancy {
            q: occ_q,
            q_prime: occ_qp,
            overflow: occ_over / window,
        },
        z_mean,
        z_m2: z_sq / n_obs,
        psi_fraction: psi_count as f64 / n_obs,
        z_mean_psi: (psi_count > 0).then(|| z_psi_sum / psi_count as f64),
        z_mean_no_psi: (non_psi > 0).then(|| (z_sum - z_psi_sum) / non_psi as f64),
        mean_system_time_1: sys_sum / n_obs,
        deliveries_observed: observed,
        priority_deliveries,
        sim_time: window,
        races,
        stderr,
    })
}

/// Deviation of simulated state occupancy from the stationary law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyReport {
    /// `(label, empirical, expected)` for `q0, q1..qL, q'1..q'L`.
    pub states: Vec<(String, f64, f64)>,
    pub max_deviation: f64,
    /// True when a stationary law exists and every tracked state is within
    /// [`OCCUPANCY_TOLERANCE`].
    pub converged: bool,
}

pub const OCCUPANCY_TOLERANCE: f64 = 0.01;

/// Compares occupancy fractions for levels `0..=levels` with `dist`.
pub fn occupancy_check(
    result: &SimResult,
    dist: &StationaryDistribution,
    levels: usize,
) -> OccupancyReport {
    build_report(result, levels, |i| dist.pi(i), |i| dist.pi_prime(i), true)
}

/// Like [`occupancy_check`] but takes the parameters, so unstable systems
/// (no stationary law, every state transient) can be reported.
pub fn occupancy_report(result: &SimResult, params: &ModelParams, levels: usize) -> OccupancyReport {
    match analytic::stationary(params, levels.max(1)) {
        Ok(dist) => occupancy_check(result, &dist, levels),
        Err(_) => build_report(result, levels, |_| 0.0, |_| 0.0, false),
    }
}

fn build_report(
    result: &SimResult,
    levels: usize,
    pi: impl Fn(usize) -> f64,
    pi_prime: impl Fn(usize) -> f64,
    stable: bool,
) -> OccupancyReport {
    let occ = &result.occupancy;
    let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
    let mut states = vec![("q0".to_string(), get(&occ.q, 0), pi(0))];
    for i in 1..=levels {
        states.push((format!("q{i}"), get(&occ.q, i), pi(i)));
    }
    for i in 1..=levels {
        states.push((format!("q'{i}"), get(&occ.q_prime, i), pi_prime(i)));
    }
    let max_deviation = states
        .iter()
        .map(|(_, e, x)| (e - x).abs())
        .fold(0.0, f64::max);
    OccupancyReport {
        states,
        max_deviation,
        converged: stable && max_deviation < OCCUPANCY_TOLERANCE,
    }
}
