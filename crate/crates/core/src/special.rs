//! Signed log-Gamma helpers.

use std::f64::consts::PI;

/// `ln|Γ(x)|` and the sign of `Γ(x)`. Poles report `(inf, 0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, i8) {
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, 0);
    }
    let (v, sign) = libm::lgamma_r(x);
    (v, if sign < 0 { -1 } else { 1 })
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma called at {x}");
    libm::lgamma_r(x).0
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Signed quantity kept as `sign · exp(log)`, with `sign = 0` for an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub log: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog { log: 0.0, sign: 1 };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            SignedLog { log: f64::NEG_INFINITY, sign: 0 }
        } else {
            SignedLog { log: v.abs().ln(), sign: if v < 0.0 { -1 } else { 1 } }
        }
    }

    pub fn value(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log.exp(),
        }
    }

    /// Multiplies by `Γ(x)`; a pole turns the product infinite (sign 0 marks it).
    pub fn mul_gamma(self, x: f64) -> Self {
        let (lg, s) = ln_gamma_signed(x);
        if s == 0 {
            return SignedLog { log: f64::INFINITY, sign: 0 };
        }
        SignedLog { log: self.log + lg, sign: self.sign * s }
    }

    /// Divides by `Γ(x)`; at a pole the quotient is an exact zero.
    pub fn div_gamma(self, x: f64) -> Self {
        let (lg, s) = ln_gamma_signed(x);
        if s == 0 {
            return SignedLog { log: f64::NEG_INFINITY, sign: 0 };
        }
        SignedLog { log: self.log - lg, sign: self.sign * s }
    }

    pub fn mul_pow(self, base: f64, exponent: f64) -> Self {
        SignedLog { log: self.log + exponent * base.ln(), sign: self.sign }
    }

    pub fn is_positive_finite(self) -> bool {
        self.sign == 1 && self.log.is_finite()
    }
}

impl std::ops::Mul for SignedLog {
    type Output = Self;

    fn mul(self, other: SignedLog) -> Self {
        SignedLog { log: self.log + other.log, sign: self.sign * other.sign }
    }
}

impl std::ops::Div for SignedLog {
    type Output = Self;

    fn div(self, other: SignedLog) -> Self {
        if other.sign == 0 {
            return SignedLog { log: f64::INFINITY, sign: 0 };
        }
        SignedLog { log: self.log - other.log, sign: self.sign * other.sign }
    }
}

pub const LN_2: f64 = std::f64::consts::LN_2;

pub fn ln_pi() -> f64 {
    PI.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma(1.5), PI.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(ln_gamma(10.0), 362880.0_f64.ln(), max_relative = 1e-15);
        assert_eq!(ln_gamma_signed(-2.0).1, 0);
        assert_eq!(ln_gamma_signed(-0.5).1, -1);
    }

    #[test]
    fn signed_log_arithmetic() {
        let v = SignedLog::ONE.mul_gamma(-0.5).mul_pow(2.0, 3.0);
        assert_relative_eq!(v.value(), -2.0 * PI.sqrt() * 8.0, max_relative = 1e-14);
        assert_eq!(SignedLog::ONE.div_gamma(0.0).value(), 0.0);
    }
}
