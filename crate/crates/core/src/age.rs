//! Virtual service time of ordinary packets and the M/G/1 lower bound on the
//! ordinary stream's average age.
//!
//! An ordinary packet at the head of the line races its service clock
//! (`mu1`) against priority arrivals (`lambda2`). Each priority arrival
//! starts a priority busy period in which further priority arrivals restart
//! service. Summing the clock values along a path through this semi-Markov
//! chain gives the virtual service time; its MGF is the transfer function of
//! the chain's detour flow graph evaluated at the clock MGFs.
//!
//! The fictitious system, where an ordinary arrival that finds only a
//! priority packet in service discards it, is an M/G/1 queue for stream 1
//! with service law `Y`. Its exact average age lower-bounds the true one.

use serde::Serialize;

use crate::analytic::{self, require_stable};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Outcome probabilities of the two races.
///
/// `a`: ordinary service beats a priority arrival. `v = 1 - a`.
/// `u`: priority service beats the next priority arrival. `b = 1 - u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockProbabilities {
    pub a: f64,
    pub b: f64,
    pub u: f64,
    pub v: f64,
}

pub fn clock_probabilities(params: &ModelParams) -> ClockProbabilities {
    let (l2, m1, m2) = (params.lambda2(), params.mu1(), params.mu2());
    ClockProbabilities {
        a: m1 / (m1 + l2),
        b: l2 / (m2 + l2),
        u: m2 / (m2 + l2),
        v: l2 / (m1 + l2),
    }
}

fn detour_denominator(c: &ClockProbabilities, d: [f64; 4]) -> Result<f64> {
    let loop_gain = c.b * d[1] + c.u * d[2] * c.v * d[3];
    let den = 1.0 - loop_gain;
    if den.abs() <= 4.0 * f64::EPSILON * (1.0 + loop_gain.abs()) {
        Err(Error::SingularDenominator)
    } else {
        Ok(den)
    }
}

/// Transfer function of the detour graph for a packet that starts service
/// immediately. `d = [D1, D2, D3, D4]` mark the `A, B, U, V` branches.
pub fn detour_gf_h1(c: &ClockProbabilities, d: [f64; 4]) -> Result<f64> {
    let den = detour_denominator(c, d)?;
    Ok(c.a * d[0] * (1.0 - c.b * d[1]) / den)
}

/// Transfer function of the detour graph for a packet that arrives while
/// a priority packet is in service with no ordinary packet ahead of it.
pub fn detour_gf_h2(c: &ClockProbabilities, d: [f64; 4]) -> Result<f64> {
    let den = detour_denominator(c, d)?;
    Ok(c.a * d[0] * c.u * d[2] / den)
}

/// Upper end of the convergence strip of the `Y` and `Y'` MGFs: the smaller
/// root of `s^2 - s (mu1 + mu2 + lambda2) + mu1 mu2`.
pub fn virtual_service_mgf_bound(params: &ModelParams) -> f64 {
    let (l2, m1, m2) = (params.lambda2(), params.mu1(), params.mu2());
    let sum = m1 + m2 + l2;
    // sum^2 - 4 m1 m2 written as a sum of nonnegative terms
    let disc = (m1 - m2).powi(2) + l2 * l2 + 2.0 * l2 * (m1 + m2);
    let q = 0.5 * (sum + disc.sqrt());
    m1 * m2 / q
}

fn y_denominator(params: &ModelParams, s: f64) -> Result<f64> {
    let bound = virtual_service_mgf_bound(params);
    if !(s < bound) {
        return Err(Error::OutOfDomain { s, bound });
    }
    let (l2, m1, m2) = (params.lambda2(), params.mu1(), params.mu2());
    Ok(s * s - s * (m2 + m1 + l2) + m1 * m2)
}

/// MGF of `Y`, the virtual service time of a packet that does not find
/// the system in state `q'_1`.
pub fn mgf_y(params: &ModelParams, s: f64) -> Result<f64> {
    let den = y_denominator(params, s)?;
    Ok(params.mu1() * (params.mu2() - s) / den)
}

/// MGF of `Y'`, the virtual service time of a packet that finds `q'_1`.
pub fn mgf_yp(params: &ModelParams, s: f64) -> Result<f64> {
    let den = y_denominator(params, s)?;
    Ok(params.mu1() * params.mu2() / den)
}

/// Clock MGFs `[E e^{sA}, E e^{sB}, E e^{sU}, E e^{sV}]`.
fn clock_mgfs(params: &ModelParams, s: f64) -> [f64; 4] {
    let fast1 = params.lambda2() + params.mu1();
    let fast2 = params.lambda2() + params.mu2();
    let m1 = fast1 / (fast1 - s);
    let m2 = fast2 / (fast2 - s);
    [m1, m2, m2, m1]
}

/// `mgf_y` evaluated through the detour graph instead of the closed form.
pub fn mgf_y_via_detour(params: &ModelParams, s: f64) -> Result<f64> {
    y_denominator(params, s)?;
    detour_gf_h1(&clock_probabilities(params), clock_mgfs(params, s))
}

/// `mgf_yp` evaluated through the detour graph instead of the closed form.
pub fn mgf_yp_via_detour(params: &ModelParams, s: f64) -> Result<f64> {
    y_denominator(params, s)?;
    detour_gf_h2(&clock_probabilities(params), clock_mgfs(params, s))
}

/// First two moments of the virtual service time and its two conditional
/// laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirtualServiceLaw {
    pub a: f64,
    pub b: f64,
    pub u: f64,
    pub v: f64,
    pub mean_y: f64,
    pub m2_y: f64,
    pub mean_yp: f64,
    pub m2_yp: f64,
    /// Probability that an arriving ordinary packet finds `q'_1`.
    pub pi_prime_1: f64,
    pub mean_z: f64,
    pub m2_z: f64,
}

impl VirtualServiceLaw {
    /// `E[Z]` and `E[Z^2]` as the `pi'_1` mixture of the conditional laws.
    pub fn mixture_moments(&self) -> (f64, f64) {
        let w = self.pi_prime_1;
        (
            w * self.mean_yp + (1.0 - w) * self.mean_y,
            w * self.m2_yp + (1.0 - w) * self.m2_y,
        )
    }
}

pub fn virtual_service_moments(params: &ModelParams) -> Result<VirtualServiceLaw> {
    let pi0 = require_stable(params)?;
    let (l1, l2, m1, m2) = (params.lambda1(), params.lambda2(), params.mu1(), params.mu2());
    let c = clock_probabilities(params);
    let mm = m1 * m2;
    let mean_z = l2 / ((l1 + m2) * (m2 + l2)) + (l1 + l2 + m2) / (m1 * (l1 + m2));
    let m2_z = 2.0
        * ((l2 + m2).powi(2) * (l2 + m2 + l1) + l2 * m1 * (2.0 * l2 + m1 + 2.0 * m2))
        / (m1 * m1 * m2 * (l1 + m2) * (l2 + m2));
    Ok(VirtualServiceLaw {
        a: c.a,
        b: c.b,
        u: c.u,
        v: c.v,
        mean_y: (m2 + l2) / mm,
        m2_y: 2.0 * ((m2 + l2).powi(2) + m1 * l2) / (mm * mm),
        mean_yp: (m1 + m2 + l2) / mm,
        m2_yp: 2.0 * ((m1 + m2 + l2).powi(2) - mm) / (mm * mm),
        pi_prime_1: pi0 * l2 / (l1 + m2),
        mean_z,
        m2_z,
    })
}

/// One term `coef * t^t_power * exp(-rate t)` of a system-time density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityTerm {
    pub coef: f64,
    pub rate: f64,
    pub t_power: u32,
}

impl DensityTerm {
    fn eval(&self, t: f64) -> f64 {
        self.coef * t.powi(self.t_power as i32) * (-self.rate * t).exp()
    }

    fn mass(&self) -> f64 {
        match self.t_power {
            0 => self.coef / self.rate,
            _ => self.coef / (self.rate * self.rate),
        }
    }

    fn first_moment(&self) -> f64 {
        match self.t_power {
            0 => self.coef / (self.rate * self.rate),
            _ => 2.0 * self.coef / self.rate.powi(3),
        }
    }

    /// `E[X (T - X)^+]` contribution with `X ~ Exp(lambda1)` independent.
    fn overlap(&self, lambda1: f64) -> f64 {
        let (a, s) = (self.rate, lambda1 + self.rate);
        match self.t_power {
            0 => self.coef * lambda1 / (a * a * s * s),
            _ => self.coef * lambda1 * (2.0 / (a * a * s.powi(3)) + 2.0 / (a.powi(3) * s * s)),
        }
    }
}

/// `E[X (T - X)^+]` for a system time with density `sum(terms)` and
/// `X ~ Exp(lambda1)` independent of it. An empty term list is `T = 0`.
pub fn overlap_from_terms(terms: &[DensityTerm], lambda1: f64) -> f64 {
    terms.iter().map(|t| t.overlap(lambda1)).sum()
}

/// System-time law of the fictitious M/G/1 queue.
///
/// With distinct roots the density is `-c1 e^{-alpha1 t} - c2 e^{-alpha2 t}`.
/// When the roots coincide (`repeated_root`), `alpha1 = alpha2 = alpha` and
/// the density is `-c1 t e^{-alpha t} - c2 e^{-alpha t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemTimeLB {
    pub rho: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub c1: f64,
    pub c2: f64,
    pub repeated_root: bool,
}

impl SystemTimeLB {
    pub fn terms(&self) -> [DensityTerm; 2] {
        if self.repeated_root {
            [
                DensityTerm { coef: -self.c1, rate: self.alpha1, t_power: 1 },
                DensityTerm { coef: -self.c2, rate: self.alpha1, t_power: 0 },
            ]
        } else {
            [
                DensityTerm { coef: -self.c1, rate: self.alpha1, t_power: 0 },
                DensityTerm { coef: -self.c2, rate: self.alpha2, t_power: 0 },
            ]
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.terms().iter().map(|term| term.eval(t)).sum()
    }

    /// Integral of the density over `[0, inf)`.
    pub fn total_mass(&self) -> f64 {
        self.terms().iter().map(DensityTerm::mass).sum()
    }

    pub fn mean(&self) -> f64 {
        self.terms().iter().map(DensityTerm::first_moment).sum()
    }

    /// `E[X (T - X)^+]` for `X ~ Exp(lambda1)` independent of `T`.
    pub fn overlap(&self, lambda1: f64) -> f64 {
        overlap_from_terms(&self.terms(), lambda1)
    }
}

/// MGF of the fictitious system time, `(1 - rho) phi_Y(s) / (s + lambda1 (1 - phi_Y(s)))`
/// in reduced form.
pub fn system_time_mgf(params: &ModelParams, s: f64) -> Result<f64> {
    let lb = system_time_lb(params)?;
    if !(s < lb.alpha2) {
        return Err(Error::OutOfDomain { s, bound: lb.alpha2 });
    }
    let (l1, l2, m1, m2) = (params.lambda1(), params.lambda2(), params.mu1(), params.mu2());
    let den = s * s - s * (m1 + m2 + l2 - l1) + m1 * m2 - l1 * m2 - l1 * l2;
    Ok((1.0 - lb.rho) * m1 * (m2 - s) / den)
}

pub fn system_time_lb(params: &ModelParams) -> Result<SystemTimeLB> {
    require_stable(params)?;
    let (l1, l2, m1, m2) = (params.lambda1(), params.lambda2(), params.mu1(), params.mu2());
    let rho = l1 * (m2 + l2) / (m1 * m2);
    let sum = m1 + m2 + l2 - l1;
    let prod = m1 * m2 - l1 * m2 - l1 * l2;
    let x = m1 - l1;
    // sum^2 - 4 prod, expanded so every term is nonnegative
    let disc = (x - m2).powi(2) + l2 * l2 + 2.0 * l2 * (x + m2) + 4.0 * l1 * l2;
    let scale = (1.0 - rho) * m1;
    if disc < 1e-12 * sum * sum {
        let alpha = 0.5 * sum;
        return Ok(SystemTimeLB {
            rho,
            alpha1: alpha,
            alpha2: alpha,
            c1: -scale * (m2 - alpha),
            c2: -scale,
            repeated_root: true,
        });
    }
    let q = 0.5 * (sum + disc.sqrt());
    let (alpha1, alpha2) = (q, prod / q);
    Ok(SystemTimeLB {
        rho,
        alpha1,
        alpha2,
        c1: scale * (m2 - alpha1) / (alpha1 - alpha2),
        c2: scale * (m2 - alpha2) / (alpha2 - alpha1),
        repeated_root: false,
    })
}

/// `E[X_j (T_{j-1} - X_j)^+]` for the fictitious system.
pub fn expected_overlap(params: &ModelParams) -> Result<f64> {
    Ok(system_time_lb(params)?.overlap(params.lambda1()))
}

/// Exact average age of the fictitious system, a lower bound on the
/// ordinary stream's average age.
pub fn age_lower_bound(params: &ModelParams) -> Result<f64> {
    let l1 = params.lambda1();
    let overlap = expected_overlap(params)?;
    let mean_y = (params.mu2() + params.lambda2()) / (params.mu1() * params.mu2());
    let second_moment_x = 2.0 / (l1 * l1);
    let cross = overlap + mean_y / l1;
    Ok(l1 * (0.5 * second_moment_x + cross))
}

/// Convenience: the closed-form `E[N]`-based peak age paired with the lower
/// bound, `(lower, peak)`.
pub fn age_bracket(params: &ModelParams) -> Result<(f64, f64)> {
    Ok((age_lower_bound(params)?, analytic::peak_age_ordinary(params)?))
}
