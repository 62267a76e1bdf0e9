//! Truncated generator of the two-row chain and a direct stationary solve,
//! used as an independent numerical check on the closed forms.

use serde::Serialize;

use crate::analytic;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Boundary mass above which the truncated solution is flagged.
pub const TAIL_FLAG_THRESHOLD: f64 = 1e-6;

const MIN_TRUNCATION: usize = 64;
const MAX_TRUNCATION: usize = 10_000;

/// Generator of the chain truncated at level `K`.
///
/// States are indexed `[q0, q1..qK, q'1..q'K]`. Upward transitions out of
/// level `K` are dropped, so the truncated chain reflects at the boundary.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    truncation: usize,
    /// Off-diagonal `(target, rate)` pairs per source state.
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        2 * self.truncation + 1
    }

    /// Index of `q_i`, `0 <= i <= K`.
    pub fn q(&self, i: usize) -> usize {
        assert!(i <= self.truncation);
        i
    }

    /// Index of `q'_i`, `1 <= i <= K`.
    pub fn q_prime(&self, i: usize) -> usize {
        assert!(i >= 1 && i <= self.truncation);
        self.truncation + i
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        if from == to {
            return self.diag[from];
        }
        self.rows[from]
            .iter()
            .filter(|(t, _)| *t == to)
            .map(|(_, r)| r)
            .sum()
    }

    pub fn transitions(&self, from: usize) -> &[(usize, f64)] {
        &self.rows[from]
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.diag[row] + self.rows[row].iter().map(|(_, r)| r).sum::<f64>()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, rate) in row {
                m[r][c] += rate;
            }
            m[r][r] = self.diag[r];
        }
        m
    }
}

pub fn build_generator(params: &ModelParams, truncation: usize) -> Result<GeneratorMatrix> {
    if truncation < 2 {
        return Err(Error::InvalidConfig(format!(
            "truncation must be at least 2, got {truncation}"
        )));
    }
    let k = truncation;
    let (l1, l2, m1, m2) = (params.lambda1(), params.lambda2(), params.mu1(), params.mu2());
    let q = |i: usize| i;
    let qp = |i: usize| k + i;
    let mut rows = vec![Vec::new(); 2 * k + 1];
    let mut push = |from: usize, to: usize, rate: f64| {
        if rate > 0.0 {
            rows[from].push((to, rate));
        }
    };
    push(q(0), q(1), l1);
    push(q(0), qp(1), l2);
    for i in 1..=k {
        push(q(i), q(i - 1), m1);
        push(qp(i), q(i - 1), m2);
        if i < k {
            push(q(i), q(i + 1), l1);
            push(q(i), qp(i + 1), l2);
            push(qp(i), qp(i + 1), l1);
        }
    }
    let diag = rows
        .iter()
        .map(|row| -row.iter().map(|(_, r)| r).sum::<f64>())
        .collect();
    Ok(GeneratorMatrix {
        truncation,
        rows,
        diag,
    })
}

/// Stationary vector of a truncated generator.
#[derive(Debug, Clone, Serialize)]
pub struct OracleSolution {
    pub truncation: usize,
    /// Probabilities in generator order `[q0, q1..qK, q'1..q'K]`.
    pub pi: Vec<f64>,
    /// `pi_K + pi'_K`.
    pub boundary_mass: f64,
    pub non_vanishing_tail: bool,
}

impl OracleSolution {
    pub fn pi0(&self) -> f64 {
        self.pi[0]
    }

    pub fn pi(&self, i: usize) -> f64 {
        if i <= self.truncation {
            self.pi[i]
        } else {
            0.0
        }
    }

    pub fn pi_prime(&self, i: usize) -> f64 {
        if (1..=self.truncation).contains(&i) {
            self.pi[self.truncation + i]
        } else {
            0.0
        }
    }

    /// Mean stream-1 count: `q_i` holds `i` ordinary packets, `q'_i` holds `i - 1`.
    pub fn expected_n(&self) -> f64 {
        (1..=self.truncation)
            .map(|i| i as f64 * self.pi(i) + (i - 1) as f64 * self.pi_prime(i))
            .sum()
    }
}

/// Position in the interleaved ordering `q0, q1, q'1, q2, q'2, ...`, under
/// which the generator has bandwidth 3.
fn banded_position(k: usize, index: usize) -> usize {
    match index {
        0 => 0,
        i if i <= k => 2 * i - 1,
        i => 2 * (i - k),
    }
}

const HALF_BAND: usize = 3;
const BAND: usize = 2 * HALF_BAND + 1;

/// Solves `pi Q = 0`, `sum(pi) = 1`.
///
/// `pi(q0)` is pinned to 1, the balance equation of `q0` is dropped, the
/// remaining banded system is solved by elimination, and the result is
/// normalized. The restricted transposed generator is column diagonally
/// dominant, so elimination without pivoting is stable.
pub fn solve_stationary(gen: &GeneratorMatrix) -> Result<OracleSolution> {
    let k = gen.truncation;
    let n = 2 * k;
    // band[r][c - r + HALF_BAND] holds M[r][c] for unknowns at positions 1..=n,
    // stored zero-based (position p -> row p - 1).
    let mut band = vec![[0.0f64; BAND]; n];
    let mut rhs = vec![0.0f64; n];
    for from in 0..gen.dim() {
        let col = banded_position(k, from);
        let mut add = |to: usize, rate: f64| {
            let row = banded_position(k, to);
            if row == 0 {
                return;
            }
            if col == 0 {
                rhs[row - 1] -= rate;
            } else {
                band[row - 1][col + HALF_BAND - row] += rate;
            }
        };
        add(from, gen.diag[from]);
        for &(to, rate) in &gen.rows[from] {
            add(to, rate);
        }
    }

    for p in 0..n {
        let pivot = band[p][HALF_BAND];
        if pivot.abs() < f64::MIN_POSITIVE {
            return Err(Error::SingularSystem { pivot: p });
        }
        for r in p + 1..(p + HALF_BAND + 1).min(n) {
            let factor = band[r][p + HALF_BAND - r] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in p..(p + HALF_BAND + 1).min(n) {
                band[r][c + HALF_BAND - r] -= factor * band[p][c + HALF_BAND - p];
            }
            rhs[r] -= factor * rhs[p];
        }
    }
    let mut x = vec![0.0f64; n];
    for p in (0..n).rev() {
        let mut acc = rhs[p];
        for c in p + 1..(p + HALF_BAND + 1).min(n) {
            acc -= band[p][c + HALF_BAND - p] * x[c];
        }
        x[p] = acc / band[p][HALF_BAND];
    }

    let total = 1.0 + x.iter().sum::<f64>();
    let mut pi = vec![0.0; gen.dim()];
    pi[0] = 1.0 / total;
    for (index, slot) in pi.iter_mut().enumerate().skip(1) {
        *slot = x[banded_position(k, index) - 1] / total;
    }
    if pi.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem { pivot: n });
    }
    let boundary_mass = pi[k] + pi[2 * k];
    Ok(OracleSolution {
        truncation: k,
        pi,
        boundary_mass,
        non_vanishing_tail: boundary_mass > TAIL_FLAG_THRESHOLD,
    })
}

/// Truncation level at which the geometric tail of the closed form is below
/// `1e-12`, at least 64 and at most 10^4.
pub fn default_truncation(params: &ModelParams) -> usize {
    let decay = match analytic::spectral(params) {
        Ok(sd) => sd.l2,
        Err(Error::DegenerateSpectrum) => params.lambda1() / params.mu1(),
        Err(_) => return MIN_TRUNCATION,
    };
    let k = ((1e-12 * (1.0 - decay)).ln() / decay.ln()).ceil();
    if k.is_finite() && k > 0.0 {
        (k as usize).clamp(MIN_TRUNCATION, MAX_TRUNCATION)
    } else {
        MAX_TRUNCATION
    }
}

pub fn solve(params: &ModelParams, truncation: usize) -> Result<OracleSolution> {
    solve_stationary(&build_generator(params, truncation)?)
}

/// Mean stream-1 count from the truncated chain.
pub fn oracle_expected_n(params: &ModelParams, truncation: usize) -> Result<f64> {
    Ok(solve(params, truncation)?.expected_n())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pstar() -> ModelParams {
        ModelParams::new(2.0, 5.0, 10.0, 5.0).unwrap()
    }

    #[test]
    fn small_generator_transcribes_the_chain() {
        let g = build_generator(&pstar(), 2).unwrap();
        let expected = [
            // q0    q1    q2    q'1   q'2
            [-7.0, 2.0, 0.0, 5.0, 0.0],
            [10.0, -17.0, 2.0, 0.0, 5.0],
            [0.0, 10.0, -10.0, 0.0, 0.0],
            [5.0, 0.0, 0.0, -7.0, 2.0],
            [0.0, 5.0, 0.0, 0.0, -5.0],
        ];
        assert_eq!(g.to_dense(), expected.map(|r| r.to_vec()).to_vec());
        assert_eq!(g.rate(g.q(1), g.q(0)), 10.0);
        assert_eq!(g.rate(g.q(1), g.q_prime(2)), 5.0);
        assert_eq!(g.rate(g.q_prime(1), g.q(0)), 5.0);
        assert_eq!(g.rate(g.q_prime(1), g.q_prime(2)), 2.0);
    }

    #[test]
    fn rows_sum_to_zero() {
        let g = build_generator(&ModelParams::new(0.7, 3.1, 9.2, 1.3).unwrap(), 17).unwrap();
        for r in 0..g.dim() {
            assert!(g.row_sum(r).abs() < 1e-12);
            assert!(g.transitions(r).iter().all(|(_, rate)| *rate >= 0.0));
        }
    }

    #[test]
    fn rejects_tiny_truncation() {
        assert!(build_generator(&pstar(), 1).is_err());
    }

    #[test]
    fn small_solve_matches_dense_elimination() {
        // 5x5 system solved by hand-rolled dense Gauss-Jordan on pi Q = 0 with
        // the first balance equation replaced by normalization
        let g = build_generator(&pstar(), 2).unwrap();
        let q = g.to_dense();
        let n = g.dim();
        let mut a = vec![vec![0.0; n + 1]; n];
        for r in 0..n {
            for c in 0..n {
                a[r][c] = if r == 0 { 1.0 } else { q[c][r] };
            }
            a[r][n] = if r == 0 { 1.0 } else { 0.0 };
        }
        for p in 0..n {
            let best = (p..n).max_by(|&i, &j| a[i][p].abs().total_cmp(&a[j][p].abs())).unwrap();
            a.swap(p, best);
            for r in 0..n {
                if r != p {
                    let f = a[r][p] / a[p][p];
                    for c in p..=n {
                        a[r][c] -= f * a[p][c];
                    }
                }
            }
        }
        let dense: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
        let banded = solve_stationary(&g).unwrap();
        for (x, y) in dense.iter().zip(&banded.pi) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_point() {
        let s = solve(&pstar(), 200).unwrap();
        assert!((s.pi0() - 0.3).abs() < 1e-9);
        assert!((s.expected_n() - 1.0).abs() < 1e-8);
        assert!(!s.non_vanishing_tail);
        assert!((s.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_mm1() {
        let en = oracle_expected_n(&ModelParams::new(2.0, 0.001, 10.0, 5.0).unwrap(), 200).unwrap();
        assert!((en - 0.25).abs() < 1e-3);
    }

    #[test]
    fn truncation_convergence() {
        let a = oracle_expected_n(&pstar(), 50).unwrap();
        let b = oracle_expected_n(&pstar(), 400).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn unstable_tail_is_flagged() {
        let s = solve(&ModelParams::new(2.0, 25.0, 10.0, 5.0).unwrap(), 200).unwrap();
        assert!(s.boundary_mass > 1e-3);
        assert!(s.non_vanishing_tail);
    }

    #[test]
    fn boundary_mass_decreases_with_truncation() {
        let p = ModelParams::new(2.0, 15.0, 10.0, 5.0).unwrap();
        let masses: Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&k| solve(&p, k).unwrap().boundary_mass)
            .collect();
        assert!(masses.windows(2).all(|w| w[1] < w[0]), "{masses:?}");
    }

    #[test]
    fn default_truncation_bounds() {
        assert_eq!(default_truncation(&pstar()), 64);
        let near = ModelParams::new(2.0, 19.9, 10.0, 5.0).unwrap();
        let k = default_truncation(&near);
        assert!(k > 64 && k <= 10_000);
    }
}
