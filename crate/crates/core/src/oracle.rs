//! Brute-force estimators that do not share code paths with the closed
//! forms: quadrature, Monte Carlo over raw exponential clocks, and finite
//! differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::age;
use crate::error::Result;
use crate::params::ModelParams;
use crate::sim::mix_seed;

/// Central first difference.
pub fn first_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second difference.
pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `E[X (T - X)^+]` by two-dimensional Simpson quadrature of
/// `x (t - x) f_T(t) lambda1 e^{-lambda1 x}` over `0 <= x <= t`.
pub fn overlap_by_quadrature(params: &ModelParams) -> Result<f64> {
    let lb = age::system_time_lb(params)?;
    let l1 = params.lambda1();
    let t_max = 60.0 / lb.alpha2.min(l1);
    let inner = |t: f64| {
        simpson(
            |x| x * (t - x) * l1 * (-l1 * x).exp(),
            0.0,
            t,
            200,
        )
    };
    Ok(simpson(|t| lb.density(t) * inner(t), 0.0, t_max, 4000))
}

/// Virtual service time of a packet that starts service on an otherwise
/// stream-1-only server, sampled from raw exponential clocks.
fn sample_virtual_service(rng: &mut ChaCha8Rng, params: &ModelParams) -> f64 {
    let exp = |rng: &mut ChaCha8Rng, rate: f64| -> f64 {
        if rate > 0.0 {
            let e: f64 = rng.sample(Exp1);
            e / rate
        } else {
            f64::INFINITY
        }
    };
    let mut total = 0.0;
    loop {
        let service = exp(rng, params.mu1());
        let interrupt = exp(rng, params.lambda2());
        if service <= interrupt {
            return total + service;
        }
        total += interrupt;
        loop {
            let service2 = exp(rng, params.mu2());
            let next = exp(rng, params.lambda2());
            if service2 <= next {
                total += service2;
                break;
            }
            total += next;
        }
    }
}

/// `E[X (t - X)^+]` for `X ~ Exp(lambda)`, i.e. `(u - 2 + (u + 2) e^{-u}) / lambda^2`
/// with `u = lambda t`.
pub fn conditional_overlap(lambda: f64, t: f64) -> f64 {
    let u = lambda * t;
    let h = if u < 0.5 {
        // the closed form cancels near 0; sum (-1)^n (2 - n) u^n / n! from n = 3
        let mut term = u * u / 2.0;
        let mut acc = 0.0;
        for n in 3..=18 {
            term *= -u / n as f64;
            acc += (2.0 - n as f64) * term;
        }
        acc
    } else {
        u - 2.0 + (u + 2.0) * (-u).exp()
    };
    h / (lambda * lambda)
}

/// Monte Carlo estimates from the M/G/1 Lindley recursion with raw-clock
/// virtual service times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindleyEstimate {
    pub overlap: f64,
    pub mean_system_time: f64,
    pub mean_service: f64,
    /// Standard error of `overlap` from 50 batch means.
    pub overlap_stderr: f64,
}

/// Runs `T_j = (T_{j-1} - X_j)^+ + Y_j` for `samples` steps after a burn-in.
///
/// The overlap is estimated by averaging `E[X (T_{j-1} - X)^+ | T_{j-1}]`
/// (exact for exponential `X`) rather than the raw product, which removes
/// the variance contributed by `X`.
pub fn overlap_by_monte_carlo(params: &ModelParams, samples: u64, seed: u64) -> LindleyEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 17));
    let l1 = params.lambda1();
    let mut t_prev = 0.0f64;
    for _ in 0..10_000 {
        let x: f64 = rng.sample::<f64, _>(Exp1) / l1;
        t_prev = (t_prev - x).max(0.0) + sample_virtual_service(&mut rng, params);
    }
    const BATCHES: u64 = 50;
    let per_batch = (samples / BATCHES).max(1);
    let mut batch_means = Vec::with_capacity(BATCHES as usize);
    let (mut acc, mut t_acc, mut y_acc, mut batch_acc) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..samples {
        let g = conditional_overlap(l1, t_prev);
        acc += g;
        batch_acc += g;
        let x: f64 = rng.sample::<f64, _>(Exp1) / l1;
        let y = sample_virtual_service(&mut rng, params);
        y_acc += y;
        t_prev = (t_prev - x).max(0.0) + y;
        t_acc += t_prev;
        if (j + 1) % per_batch == 0 {
            batch_means.push(batch_acc / per_batch as f64);
            batch_acc = 0.0;
        }
    }
    let n = samples as f64;
    let k = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / k;
    let var = batch_means.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1.0);
    LindleyEstimate {
        overlap: acc / n,
        mean_system_time: t_acc / n,
        mean_service: y_acc / n,
        overlap_stderr: (var / k).sqrt(),
    }
}
