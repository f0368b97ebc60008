//! The pointwise inequalities `Δ(y + b) ≥ Δ(y)`, `Δ^{-s}(y + b) ≤ Δ^{-s}(y)`
//! and `|P^{-s}(x + iy)| ≤ Δ^{-s}(y)` (equality at `x = 0`), with a random
//! search for violations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{ln_abs_complex_power_raw, ln_delta_power, ConePoint, Convention, MultiIndex};
use crate::error::{Error, Result};

/// Slack in log space before a gap counts as a violation.
pub const LOG_TOLERANCE: f64 = 1e-12;

/// Log gaps, each non-negative when its inequality holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityGaps {
    /// `ln Δ(y + b) - ln Δ(y)`.
    pub det: f64,
    /// `ln Δ^{-s}(y) - ln Δ^{-s}(y + b)`.
    pub power: f64,
    /// `ln Δ^{-s}(y) - ln |P^{-s}(x + iy)|`.
    pub modulus: f64,
    /// `|P^{-s}(iy)| / Δ^{-s}(y) - 1`.
    pub at_zero: f64,
}

impl InequalityGaps {
    pub fn violations(&self) -> [bool; 3] {
        [self.det < -LOG_TOLERANCE, self.power < -LOG_TOLERANCE, self.modulus < -LOG_TOLERANCE]
    }
}

/// Evaluates the three gaps; `s` may be in either convention.
pub fn inequality_gaps(y: &ConePoint, b: &ConePoint, x: &[f64], s: &MultiIndex) -> Result<InequalityGaps> {
    let n = y.n();
    if b.n() != n || s.n() != n || x.len() != 2 * n - 1 {
        return Err(Error::InvalidInput("dimensions of y, b, x and s disagree".into()));
    }
    let neg: Vec<f64> = s.to_shifted().entries().iter().map(|v| -v).collect();
    let yb = y.add(b)?;
    let ln_det = |p: &ConePoint| p.det().ln();
    let ln_y = ln_delta_power(y, &neg);
    let zero = vec![0.0; 2 * n - 1];
    Ok(InequalityGaps {
        det: ln_det(&yb) - ln_det(y),
        power: ln_y - ln_delta_power(&yb, &neg),
        modulus: ln_y - ln_abs_complex_power_raw(x, y.coords(), &neg),
        at_zero: (ln_abs_complex_power_raw(&zero, y.coords(), &neg) - ln_y).exp_m1(),
    })
}

/// Where the exponents of a fuzz run are drawn from (plain indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentRange {
    /// `s_n > -n - 1`, `s_j > -(n+3)/2`, drawn up to 6 above the bound.
    Stated,
    /// Literal exponents in `[0, 6)`.
    NonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: usize,
    pub y: Vec<f64>,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub n: usize,
    pub trials: u64,
    pub range: ExponentRange,
    /// Violation counts of the three inequalities.
    pub violations: [u64; 3],
    /// Largest `|P^{-s}(iy)| / Δ^{-s}(y) - 1` in absolute value.
    pub max_at_zero: f64,
    /// First violation of each inequality.
    pub examples: Vec<Violation>,
}

fn random_cone(n: usize, rng: &mut ChaCha8Rng) -> ConePoint {
    let scale = |rng: &mut ChaCha8Rng| rng.random_range(-2.0f64..2.0).exp();
    let head: Vec<f64> = (0..n - 1).map(|_| scale(rng)).collect();
    let border: Vec<f64> = head.iter().map(|h| rng.random_range(-2.0..2.0) * h.sqrt()).collect();
    ConePoint::from_canonical(&head, &border, scale(rng)).expect("positive canonical data")
}

fn random_exponent(n: usize, range: ExponentRange, rng: &mut ChaCha8Rng) -> MultiIndex {
    let nf = n as f64;
    match range {
        ExponentRange::Stated => {
            let s: Vec<f64> = (0..n)
                .map(|j| {
                    let low = if j + 1 < n { -(nf + 3.0) / 2.0 } else { -nf - 1.0 };
                    low + rng.random_range(0.0..6.0)
                })
                .collect();
            MultiIndex::new(s, Convention::Plain).expect("finite")
        }
        ExponentRange::NonNegative => {
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..6.0)).collect();
            MultiIndex::new(s, Convention::Shifted).expect("finite")
        }
    }
}

/// Random `(y, b, x, s)` with log-uniform cone scales and `x` up to 3 in each
/// coordinate.
pub fn fuzz_inequalities(n: usize, trials: u64, range: ExponentRange, seed: u64) -> Result<FuzzReport> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport { n, trials, range, violations: [0; 3], max_at_zero: 0.0, examples: Vec::new() };
    for _ in 0..trials {
        let y = random_cone(n, &mut rng);
        let b = random_cone(n, &mut rng);
        let x: Vec<f64> = (0..2 * n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
        let s = random_exponent(n, range, &mut rng);
        let g = inequality_gaps(&y, &b, &x, &s)?;
        report.max_at_zero = report.max_at_zero.max(g.at_zero.abs());
        let gaps = [g.det, g.power, g.modulus];
        for (k, bad) in g.violations().into_iter().enumerate() {
            if bad {
                if report.violations[k] == 0 {
                    report.examples.push(Violation {
                        inequality: k + 1,
                        y: y.coords().to_vec(),
                        b: b.coords().to_vec(),
                        x: x.clone(),
                        s: s.to_shifted().entries().to_vec(),
                        gap: gaps[k],
                    });
                }
                report.violations[k] += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_negative_exponents_hold() {
        let r = fuzz_inequalities(3, 2000, ExponentRange::NonNegative, 4).unwrap();
        assert_eq!(r.violations, [0, 0, 0]);
        assert!(r.max_at_zero < 1e-12);
    }

    #[test]
    fn negative_last_exponent_breaks_the_power_inequality() {
        let y = ConePoint::identity(2);
        let b = ConePoint::identity(2);
        let g = inequality_gaps(&y, &b, &[0.5, 0.5, 0.5], &MultiIndex::shifted([0.0, -1.0])).unwrap();
        assert!((g.power + 2f64.ln()).abs() < 1e-14);
        assert_eq!(g.violations(), [false, true, true]);
    }
}
