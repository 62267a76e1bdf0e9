//! Closed-form analysis of the two-stream chain: stability, the stationary
//! ladder, the stream-1 occupancy MGF and mean, and the closed-form ages.
//!
//! States are `q0` (idle), `q_i` (serving stream 1, `i - 1` ordinary packets
//! waiting) and `q'_i` (serving stream 2, `i - 1` ordinary packets waiting).
//! Balance across levels gives a four-dimensional linear recursion
//! `A_i = H A_{i-1}` on `A_i = [pi_{i+1}, pi'_{i+1}, pi_i, pi'_i]`. `H` has
//! eigenvalues `{0, l1, l2, 1}`; the initial vector has no component along
//! the eigenvalue-1 direction, so the ladder is a difference of two
//! geometric sequences in `l1` and `l2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Relative margin below which closed forms are refused.
pub const NEAR_BOUNDARY_RELATIVE_MARGIN: f64 = 1e-9;

const TAIL_TARGET: f64 = 1e-10;
const MIN_LADDER: usize = 8;
const MAX_LADDER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `mu1 - lambda1 (1 + lambda2 / mu2)`.
    pub margin: f64,
    pub is_stable: bool,
    /// Idle probability, present only when stable.
    pub pi0: Option<f64>,
}

pub fn check_stability(params: &ModelParams) -> StabilityReport {
    let (l1, l2, m1, m2) = rates(params);
    let margin = m1 - l1 * (1.0 + l2 / m2);
    let is_stable = margin > 0.0;
    let pi0 = is_stable.then(|| m2 / (m2 + l2) - l1 / m1);
    StabilityReport {
        margin,
        is_stable,
        pi0,
    }
}

/// Returns `pi0` if the closed forms may be evaluated at `params`.
pub(crate) fn require_stable(params: &ModelParams) -> Result<f64> {
    let report = check_stability(params);
    match report.pi0 {
        None => Err(Error::UnstableSystem {
            margin: report.margin,
        }),
        Some(_) if report.margin / params.mu1() < NEAR_BOUNDARY_RELATIVE_MARGIN => {
            Err(Error::NearBoundary {
                margin: report.margin,
            })
        }
        Some(pi0) => Ok(pi0),
    }
}

fn rates(p: &ModelParams) -> (f64, f64, f64, f64) {
    (p.lambda1(), p.lambda2(), p.mu1(), p.mu2())
}

/// Eigen-structure of the level recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralDecomposition {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub l1: f64,
    pub l2: f64,
    /// Eigenvector for `l1`, scaled as `[l(l - a5), l a4, l - a5, a4]`.
    pub e1: [f64; 4],
    pub e2: [f64; 4],
    /// `1 / (l2 - l1)`; the initial vector is `mix (e2 - e1)`.
    pub mix: f64,
}

impl SpectralDecomposition {
    /// Characteristic quadratic `l^2 - l (a1 + a5 - 1) + a3 a5`.
    pub fn char_poly(&self, l: f64) -> f64 {
        l * l - l * (self.a1 + self.a5 - 1.0) + self.a3 * self.a5
    }
}

fn eigenvector(l: f64, a4: f64, a5: f64) -> [f64; 4] {
    [l * (l - a5), l * a4, l - a5, a4]
}

/// Ratios `a1..a5` of the level recursion.
pub fn recursion_coefficients(params: &ModelParams) -> [f64; 5] {
    let (l1, l2, m1, m2) = rates(params);
    let lambda = l1 + l2;
    [
        1.0 + lambda / m1 - m2 * l2 / (m1 * (m2 + l1)),
        m2 * l1 / (m1 * (m2 + l1)),
        l1 / m1,
        l2 / (m2 + l1),
        l1 / (m2 + l1),
    ]
}

/// The 4x4 recursion matrix `H = [[C, D], [I, 0]]`.
pub fn h_matrix(params: &ModelParams) -> [[f64; 4]; 4] {
    let [a1, a2, a3, a4, a5] = recursion_coefficients(params);
    [
        [a1, -a2, -a3, 0.0],
        [a4, a5, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
}

pub fn spectral(params: &ModelParams) -> Result<SpectralDecomposition> {
    require_stable(params)?;
    let [a1, a2, a3, a4, a5] = recursion_coefficients(params);
    let (l1, l2, m1, m2) = rates(params);
    // a1 + a5 - 1 written without the subtraction
    let sum = l1 * (m2 + l1 + l2 + m1) / (m1 * (m2 + l1));
    let prod = a3 * a5;
    let (small, large) = quadratic_roots(sum, prod).ok_or(Error::DegenerateSpectrum)?;
    if large - small <= 1e-9 * large {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(SpectralDecomposition {
        a1,
        a2,
        a3,
        a4,
        a5,
        l1: small,
        l2: large,
        e1: eigenvector(small, a4, a5),
        e2: eigenvector(large, a4, a5),
        mix: 1.0 / (large - small),
    })
}

/// Real roots of `x^2 - sum x + prod` with `sum > 0`, in increasing order,
/// using the cancellation-free form.
pub(crate) fn quadratic_roots(sum: f64, prod: f64) -> Option<(f64, f64)> {
    let disc = sum * sum - 4.0 * prod;
    if disc < 0.0 {
        return None;
    }
    let q = 0.5 * (sum + disc.sqrt());
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (a, b) = (q, prod / q);
    Some(if a < b { (a, b) } else { (b, a) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub pi0: f64,
    /// `(pi_i, pi'_i)` for `i = 1..=ladder.len()`.
    pub ladder: Vec<(f64, f64)>,
    pub tail_mass: f64,
}

impl StationaryDistribution {
    fn from_ladder(pi0: f64, ladder: Vec<(f64, f64)>) -> Self {
        let listed: f64 = ladder.iter().map(|(p, q)| p + q).sum();
        Self {
            pi0,
            tail_mass: 1.0 - pi0 - listed,
            ladder,
        }
    }

    /// Probability of `q_i` (`i = 0` is the idle state).
    pub fn pi(&self, i: usize) -> f64 {
        match i {
            0 => self.pi0,
            _ => self.ladder.get(i - 1).map_or(0.0, |e| e.0),
        }
    }

    /// Probability of `q'_i`, `i >= 1`.
    pub fn pi_prime(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            _ => self.ladder.get(i - 1).map_or(0.0, |e| e.1),
        }
    }

    pub fn i_max(&self) -> usize {
        self.ladder.len()
    }
}

/// Ladder length for which the discarded mass is below `1e-10`.
///
/// Levels beyond `n` carry `mix pi0 sum_{i>n} (c2 l2^i - c1 l1^i)` with
/// `c = l - a5 + a4`; the `l2` geometric sum bounds it.
pub fn default_i_max(params: &ModelParams) -> Result<usize> {
    let pi0 = require_stable(params)?;
    let (rate, amplitude) = match spectral(params) {
        Ok(sd) => {
            let c2 = (sd.l2 - sd.a5 + sd.a4).abs();
            (sd.l2, (sd.mix * pi0 * c2 * sd.l2 / (1.0 - sd.l2)).max(pi0))
        }
        Err(Error::DegenerateSpectrum) => {
            let [_, _, a3, _, a5] = recursion_coefficients(params);
            let r = a3.max(a5);
            // repeated root: terms grow like i r^i, so allow a generous prefactor
            (r, pi0 / ((1.0 - r) * (1.0 - r)))
        }
        Err(e) => return Err(e),
    };
    let n = ((TAIL_TARGET / amplitude).ln() / rate.ln()).ceil();
    Ok(if n.is_finite() {
        (n.max(0.0) as usize).clamp(MIN_LADDER, MAX_LADDER)
    } else {
        MAX_LADDER
    })
}

/// Stationary ladder from the spectral closed form.
///
/// Falls back to iterating the recursion matrix when the two eigenvalues
/// coincide, which can only happen when `lambda2 = 0`.
pub fn stationary(params: &ModelParams, i_max: usize) -> Result<StationaryDistribution> {
    if i_max == 0 {
        return Err(Error::InvalidConfig("i_max must be at least 1".into()));
    }
    let pi0 = require_stable(params)?;
    let sd = match spectral(params) {
        Ok(sd) => sd,
        Err(Error::DegenerateSpectrum) => return stationary_by_recursion(params, i_max),
        Err(e) => return Err(e),
    };
    let scale = sd.mix * pi0;
    let mut ladder = Vec::with_capacity(i_max);
    let (mut p1, mut p2) = (sd.l1, sd.l2);
    for _ in 0..i_max {
        let pi = scale * (p2 * sd.e2[2] - p1 * sd.e1[2]);
        let pi_prime = scale * sd.a4 * (p2 - p1);
        ladder.push((pi, pi_prime));
        p1 *= sd.l1;
        p2 *= sd.l2;
    }
    Ok(StationaryDistribution::from_ladder(pi0, ladder))
}

pub fn stationary_default(params: &ModelParams) -> Result<StationaryDistribution> {
    stationary(params, default_i_max(params)?)
}

/// Stationary ladder by repeated application of the recursion matrix to
/// the initial vector `[pi_1, pi'_1, pi_0, 0]`.
pub fn stationary_by_recursion(
    params: &ModelParams,
    i_max: usize,
) -> Result<StationaryDistribution> {
    if i_max == 0 {
        return Err(Error::InvalidConfig("i_max must be at least 1".into()));
    }
    let pi0 = require_stable(params)?;
    let h = h_matrix(params);
    let [a1, _, _, a4, _] = recursion_coefficients(params);
    let mut state = [(a1 - 1.0) * pi0, a4 * pi0, pi0, 0.0];
    let mut ladder = Vec::with_capacity(i_max);
    for _ in 0..i_max {
        ladder.push((state[0], state[1]));
        let mut next = [0.0; 4];
        for (r, row) in h.iter().enumerate() {
            next[r] = row.iter().zip(&state).map(|(h, s)| h * s).sum();
        }
        state = next;
    }
    Ok(StationaryDistribution::from_ladder(pi0, ladder))
}

/// Upper end of the MGF's convergence domain in `s`.
///
/// This is the log of the smaller root (in `x = e^s`) of the denominator
/// quadratic, which equals `-ln(l2)`.
pub fn queue_length_mgf_bound(params: &ModelParams) -> Result<f64> {
    require_stable(params)?;
    let (l1, l2, m1, m2) = rates(params);
    let sum = (l1 + l2 + m1 + m2) / l1;
    let prod = m1 * (m2 + l1) / (l1 * l1);
    let (small, _) = quadratic_roots(sum, prod).ok_or(Error::DegenerateSpectrum)?;
    Ok(small.ln())
}

/// Moment generating function `E[e^{s N}]` of the stream-1 count.
pub fn queue_length_mgf(params: &ModelParams, s: f64) -> Result<f64> {
    let pi0 = require_stable(params)?;
    let bound = queue_length_mgf_bound(params)?;
    if !(s < bound) {
        return Err(Error::OutOfDomain { s, bound });
    }
    let (l1, l2, m1, m2) = rates(params);
    // pi0 m1 (m2 + l2 + l1 (1 - x)) / (m1 m2 + m1 l1 - l1 (l1 + l2 + m1 + m2) x + l1^2 x^2),
    // divided through by its value at x = 1 (which pi0 makes equal) so that
    // phi(0) = 1 exactly; 1 - x comes from expm1 for accuracy near s = 0.
    debug_assert!(pi0 > 0.0);
    let x = s.exp();
    let one_minus_x = -s.exp_m1();
    let d0 = m1 * m2 - l1 * (m2 + l2);
    let num = 1.0 + l1 * one_minus_x / (l2 + m2);
    let den = 1.0 + l1 * one_minus_x * (l1 + l2 + m1 + m2 - l1 * (1.0 + x)) / d0;
    Ok(num / den)
}

/// Mean number of stream-1 packets in the system.
pub fn expected_queue_length(params: &ModelParams) -> Result<f64> {
    require_stable(params)?;
    let (l1, l2, m1, m2) = rates(params);
    Ok(l1 * (2.0 * l2 * m2 + l2 * m1 + l2 * l2 + m2 * m2)
        / ((m2 + l2) * (m1 * m2 - l1 * (m2 + l2))))
}

/// Average peak age of stream 1: mean interarrival plus mean system time.
pub fn peak_age_ordinary(params: &ModelParams) -> Result<f64> {
    require_stable(params)?;
    let (l1, l2, m1, m2) = rates(params);
    Ok(1.0 / l1
        + (2.0 * l2 * m2 + l2 * m1 + l2 * l2 + m2 * m2)
            / ((m2 + l2) * (m1 * m2 - l1 * (m2 + l2))))
}

/// Average age of stream 2, an M/M/1/1 queue with preemption.
pub fn priority_age(params: &ModelParams) -> Result<f64> {
    let (_, l2, _, m2) = rates(params);
    if !(l2 > 0.0) {
        return Err(Error::InvalidRate {
            name: "lambda2",
            value: l2,
        });
    }
    if !(m2 > 0.0) {
        return Err(Error::InvalidRate {
            name: "mu2",
            value: m2,
        });
    }
    Ok(1.0 / m2 + 1.0 / l2)
}

/// Average age of a single-stream M/M/1 FCFS queue.
pub fn reference_mm1_age(lambda1: f64, mu1: f64) -> Result<f64> {
    for (name, value) in [("lambda1", lambda1), ("mu1", mu1)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidRate { name, value });
        }
    }
    if lambda1 >= mu1 {
        return Err(Error::UnstableSystem {
            margin: mu1 - lambda1,
        });
    }
    let rho = lambda1 / mu1;
    Ok((1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / mu1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pstar() -> ModelParams {
        ModelParams::new(2.0, 5.0, 10.0, 5.0).unwrap()
    }

    #[test]
    fn stability_at_reference_point() {
        let r = check_stability(&pstar());
        assert_eq!(r.margin, 6.0);
        assert!(r.is_stable);
        assert_eq!(r.pi0, Some(0.3));
    }

    #[test]
    fn stability_boundary_and_beyond() {
        let p = ModelParams::new(2.0, 20.0, 10.0, 5.0).unwrap();
        let r = check_stability(&p);
        assert_eq!(r.margin, 0.0);
        assert!(!r.is_stable);
        assert_eq!(r.pi0, None);
        for f in [
            expected_queue_length as fn(&ModelParams) -> Result<f64>,
            peak_age_ordinary,
            |p| queue_length_mgf(p, 0.0),
            |p| spectral(p).map(|s| s.l1),
            |p| stationary(p, 10).map(|s| s.pi0),
        ] {
            assert!(matches!(f(&p), Err(Error::UnstableSystem { .. })));
        }
    }

    #[test]
    fn near_boundary_is_refused() {
        // margin = 10 - 2 (1 + l2/5) = 1e-12 when l2 = 20 - 2.5e-12
        let p = ModelParams::new(2.0, 20.0 - 2.5e-12, 10.0, 5.0).unwrap();
        assert!(check_stability(&p).is_stable);
        assert!(matches!(
            expected_queue_length(&p),
            Err(Error::NearBoundary { .. })
        ));
    }

    #[test]
    fn idle_probability_mm1_limit() {
        let p = ModelParams::new(2.0, 0.0, 10.0, 5.0).unwrap();
        assert_relative_eq!(check_stability(&p).pi0.unwrap(), 0.8, epsilon = 1e-15);
        let p = ModelParams::new(2.0, 1e-12, 10.0, 5.0).unwrap();
        assert_relative_eq!(check_stability(&p).pi0.unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn spectral_reference_values() {
        let sd = spectral(&pstar()).unwrap();
        assert_relative_eq!(sd.a1, 47.0 / 35.0, epsilon = 1e-14);
        assert_relative_eq!(sd.a5, 2.0 / 7.0, epsilon = 1e-15);
        // roots of l^2 - (22/35) l + 2/35, by the textbook formula
        let b: f64 = 22.0 / 35.0;
        let c: f64 = 2.0 / 35.0;
        let d = (b * b - 4.0 * c).sqrt();
        assert_relative_eq!(sd.l1, (b - d) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(sd.l2, (b + d) / 2.0, epsilon = 1e-14);
        assert!((sd.l1 - 0.110245).abs() < 1e-6);
        assert!((sd.l2 - 0.518327).abs() < 1e-6);
        assert!(sd.char_poly(sd.l1).abs() < 1e-12);
        assert!(sd.char_poly(sd.l2).abs() < 1e-12);
        assert_relative_eq!(sd.l1 * sd.l2, sd.a3 * sd.a5, epsilon = 1e-15);
        assert_relative_eq!(sd.l1 + sd.l2, sd.a1 + sd.a5 - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_recursion() {
        let p = pstar();
        let sd = spectral(&p).unwrap();
        let h = h_matrix(&p);
        for (l, e) in [(sd.l1, sd.e1), (sd.l2, sd.e2)] {
            for r in 0..4 {
                let he: f64 = (0..4).map(|c| h[r][c] * e[c]).sum();
                assert!((he - l * e[r]).abs() < 1e-13, "row {r}");
            }
        }
        // initial vector decomposes as mix (e2 - e1)
        let a0 = [sd.a1 - 1.0, sd.a4, 1.0, 0.0];
        for r in 0..4 {
            assert!((sd.mix * (sd.e2[r] - sd.e1[r]) - a0[r]).abs() < 1e-13);
        }
    }

    #[test]
    fn p_at_one_is_positive_iff_stable() {
        // p(1) = (mu1 mu2 - l1 (mu2 + l2)) / (mu1 (mu2 + l1))
        let p = ModelParams::new(2.0, 1e-9, 10.0, 5.0).unwrap();
        let sd = spectral(&p).unwrap();
        let expected = (50.0 - 2.0 * (5.0 + 1e-9)) / (10.0 * 7.0);
        assert_relative_eq!(sd.char_poly(1.0), expected, epsilon = 1e-12);
        assert!(sd.char_poly(1.0) > 0.0);
    }

    #[test]
    fn first_ladder_entries() {
        let d = stationary(&pstar(), 5).unwrap();
        assert_relative_eq!(d.pi(1), 0.3 * (7.0 / 10.0 - 25.0 / 70.0), epsilon = 1e-14);
        assert_relative_eq!(d.pi_prime(1), 0.3 * 5.0 / 7.0, epsilon = 1e-14);
        assert!((d.pi(1) - 0.102857).abs() < 1e-6);
        assert!((d.pi_prime(1) - 0.214286).abs() < 1e-6);
    }

    #[test]
    fn spectral_and_recursion_paths_agree() {
        let p = pstar();
        let a = stationary(&p, 50).unwrap();
        let b = stationary_by_recursion(&p, 50).unwrap();
        for (x, y) in a.ladder.iter().zip(&b.ladder) {
            assert!((x.0 - y.0).abs() < 1e-10);
            assert!((x.1 - y.1).abs() < 1e-10);
        }
    }

    #[test]
    fn ladder_normalizes() {
        let d = stationary_default(&pstar()).unwrap();
        assert!(d.tail_mass.abs() < 1e-9, "tail {}", d.tail_mass);
        assert!(d.tail_mass >= -1e-12);
        assert!(d.i_max() >= 8);
    }

    #[test]
    fn mm1_limit_of_ladder() {
        let p = ModelParams::new(2.0, 0.0, 10.0, 5.0).unwrap();
        let d = stationary(&p, 30).unwrap();
        for i in 1..=30 {
            assert_relative_eq!(d.pi(i), 0.8 * 0.2f64.powi(i as i32), epsilon = 1e-14);
            assert_eq!(d.pi_prime(i), 0.0);
        }
    }

    #[test]
    fn repeated_eigenvalue_falls_back_to_recursion() {
        // lambda2 = 0 and mu1 = mu2 + lambda1 give l1 = l2 = lambda1 / mu1
        let p = ModelParams::new(2.0, 0.0, 7.0, 5.0).unwrap();
        assert_eq!(spectral(&p), Err(Error::DegenerateSpectrum));
        let d = stationary(&p, 20).unwrap();
        let rho: f64 = 2.0 / 7.0;
        for i in 1..=20 {
            assert_relative_eq!(d.pi(i), (1.0 - rho) * rho.powi(i as i32), epsilon = 1e-13);
        }
    }

    #[test]
    fn mgf_domain_and_normalization() {
        let p = pstar();
        assert_relative_eq!(queue_length_mgf(&p, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        let sd = spectral(&p).unwrap();
        let bound = queue_length_mgf_bound(&p).unwrap();
        assert_relative_eq!(bound, -sd.l2.ln(), epsilon = 1e-12);
        let s = (1.0 / sd.l2).ln() + 0.1;
        assert!(matches!(
            queue_length_mgf(&p, s),
            Err(Error::OutOfDomain { .. })
        ));
        let h = 1e-6;
        let deriv =
            (queue_length_mgf(&p, h).unwrap() - queue_length_mgf(&p, -h).unwrap()) / (2.0 * h);
        assert!((deriv - 1.0).abs() < 1e-5);
    }

    #[test]
    fn mgf_matches_ladder_sum() {
        let p = pstar();
        let d = stationary(&p, 200).unwrap();
        for s in [-1.0, -0.2, 0.1, 0.4] {
            let x: f64 = f64::exp(s);
            // P(N = n) = pi_n + pi'_{n+1}
            let direct: f64 = (0..199)
                .map(|n| x.powi(n as i32) * (d.pi(n) + d.pi_prime(n + 1)))
                .sum();
            assert_relative_eq!(queue_length_mgf(&p, s).unwrap(), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn queue_length_and_peak_age() {
        let p = pstar();
        assert_relative_eq!(expected_queue_length(&p).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(peak_age_ordinary(&p).unwrap(), 1.0, epsilon = 1e-15);
        let p0 = ModelParams::new(2.0, 0.0, 10.0, 5.0).unwrap();
        assert_relative_eq!(expected_queue_length(&p0).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(peak_age_ordinary(&p0).unwrap(), 0.625, epsilon = 1e-15);
        let near = ModelParams::new(2.0, 19.999, 10.0, 5.0).unwrap();
        assert!(expected_queue_length(&near).unwrap() > 1e3);
    }

    #[test]
    fn peak_age_is_littles_law() {
        for l2 in [0.3, 2.0, 7.5, 15.0] {
            let p = ModelParams::new(2.0, l2, 10.0, 5.0).unwrap();
            let en = expected_queue_length(&p).unwrap();
            assert_relative_eq!(
                peak_age_ordinary(&p).unwrap(),
                (1.0 + en) / 2.0,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn priority_and_reference_ages() {
        assert_relative_eq!(priority_age(&pstar()).unwrap(), 0.4, epsilon = 1e-15);
        let fast = ModelParams::new(2.0, 1e12, 10.0, 5.0).unwrap();
        assert_relative_eq!(priority_age(&fast).unwrap(), 0.2, epsilon = 1e-11);
        let none = ModelParams::new(2.0, 0.0, 10.0, 5.0).unwrap();
        assert!(matches!(priority_age(&none), Err(Error::InvalidRate { .. })));
        assert_relative_eq!(reference_mm1_age(2.0, 10.0).unwrap(), 0.605, epsilon = 1e-15);
        assert!(matches!(
            reference_mm1_age(10.0, 10.0),
            Err(Error::UnstableSystem { .. })
        ));
        // rare updates: age ~ 1/lambda1
        let a = reference_mm1_age(1e-6, 10.0).unwrap();
        assert_relative_eq!(a * 1e-6, 1.0, max_relative = 1e-6);
    }
}
