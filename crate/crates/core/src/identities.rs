//! Closed-form right-hand sides of the cone and tube integral identities.
//!
//! Every identity is evaluated twice: once exactly as displayed (constants
//! `C_1 … C_8`, displayed exponent pattern) and once from the analytic
//! derivation through the three Gamma integrals
//!
//! * `G(s)  = ∫_P  e^{-y·t} Δ^s(y) dy · Δ^{s+J}(t_*)`, the cone Laplace constant,
//! * `Gd(a) = ∫_P* e^{-y·t} Π p_j^{a_j} t_n^{a_n} dt · Δ^{a+J}(y)`, its dual,
//! * `G*(r) = Gd(r - J)`, the constant in `Δ^{-r}(y) = G*(r)^{-1} ∫_P* e^{-y·t} …`,
//!
//! with `J = (3/2, …, 3/2, (n+1)/2)`. The two evaluations agree for the
//! Laplace transform and the kernel; elsewhere they share the exponent
//! structure for `n ≤ 2` and differ in the constant.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone::{self, delta_transform, ConePoint, Convention, MultiIndex, TubePoint};
use crate::constants::{self, c1_raw, c2_raw, c5_raw, c6_raw, c7_raw, c8_raw};
use crate::error::{Error, RangeCheck, Result};
use crate::special::{SignedLog, LN_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    /// `∫_P e^{-4π y·t} Δ^s(y) dy`
    LaplacePower,
    /// `∫_P* e^{2πi z·t} I_s(t)^{-1} dt`
    Kernel,
    /// The Laplace transform at the shifted index `s'`.
    ShiftedLaplacePower,
    /// The kernel at the shifted index `s'`.
    ShiftedKernel,
    /// `∫_P Δ^{-r}(y + b) Δ^η(y) dy`
    ConeShift,
    /// `∫_{R^m} |P^{-r}(u + iv)| du`
    HorizontalAbs,
    /// `∫_T Δ^l(Im w) P^{-r}(z - w̄) P^{-η}(w - ξ̄) dw`
    TubeProduct,
    /// `∫_T Δ^l(Im w) |P^{-r}(z - w̄)|^{…} dw`
    TubeAbs,
}

impl IdentityId {
    pub const ALL: [IdentityId; 8] = [
        IdentityId::LaplacePower,
        IdentityId::Kernel,
        IdentityId::ShiftedLaplacePower,
        IdentityId::ShiftedKernel,
        IdentityId::ConeShift,
        IdentityId::HorizontalAbs,
        IdentityId::TubeProduct,
        IdentityId::TubeAbs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LaplacePower => "laplace_power",
            Self::Kernel => "kernel",
            Self::ShiftedLaplacePower => "shifted_laplace_power",
            Self::ShiftedKernel => "shifted_kernel",
            Self::ConeShift => "cone_shift",
            Self::HorizontalAbs => "horizontal_abs",
            Self::TubeProduct => "tube_product",
            Self::TubeAbs => "tube_abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name)
    }

    /// The identity written out, carried by every report row.
    pub fn anchor(self) -> &'static str {
        match self {
            Self::LaplacePower => "∫_P e^{-4π y·t} Δ^s(y) dy = C1(s) t_n^{-s_n-(n+1)/2} Π q_j^{-s_j-3/2}",
            Self::Kernel => "∫ e^{2πi z·t} I_s(t)^{-1} dt = C2(s) P^{-s}(z) P(z)^{-n-1} P_{n-1}(z)^{n-2}",
            Self::ShiftedLaplacePower => "∫_P e^{-4π y·t} Δ^{s'}(y) dy = C3(s') t_n^{-s_n-(n+1)/2} Π q_j^{-s_j-(n+1)/2}",
            Self::ShiftedKernel => "∫ e^{2πi z·t} I_{s'}(t)^{-1} dt = C4(s') P^{-s'}(z) P(z)^{-n-1}",
            Self::ConeShift => "∫_P Δ^{-r}(y+b) Δ^η(y) dy = C5(r,η) Δ^{η-r}(b) Δ(b)^{(n+1)/2}",
            Self::HorizontalAbs => "∫_{R^m} |P^{-r}(u+iv)| du = C6(r) Δ^{-r}(v) Δ(v)^{(n+1)/2}",
            Self::TubeProduct => "∫_T Δ^l(Im w) P^{-r}(z-w̄) P^{-η}(w-ξ̄) dw = C7(l,r,η) P^{-r-η+l}(z-ξ̄) P(z-ξ̄)^{n+1}",
            Self::TubeAbs => "∫_T Δ^l(Im w) |P^{-r}(z-w̄)| dw = C8(l,r) Δ^{-r+l}(y) Δ(y)^{n+1}",
        }
    }

    /// Number of multi-indices: `s`, `s`, `s`, `s`, `(r, η)`, `r`, `(l, r, η)`, `(l, r)`.
    pub fn arity(self) -> usize {
        match self {
            Self::LaplacePower | Self::Kernel | Self::ShiftedLaplacePower | Self::ShiftedKernel => 1,
            Self::HorizontalAbs => 1,
            Self::ConeShift | Self::TubeAbs => 2,
            Self::TubeProduct => 3,
        }
    }

    /// Convention of the indices the identity accepts. The shifted Laplace and
    /// kernel identities take a plain `s` and apply its shift.
    pub fn convention(self) -> Convention {
        match self {
            Self::LaplacePower | Self::Kernel | Self::ShiftedLaplacePower | Self::ShiftedKernel => Convention::Plain,
            _ => Convention::Shifted,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Self::Kernel | Self::ShiftedKernel | Self::TubeProduct)
    }
}

impl std::fmt::Display for IdentityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where an identity is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdentityPoint {
    Cone { point: ConePoint },
    Tube { point: TubePoint },
    TubePair { z: TubePoint, xi: TubePoint },
}

impl IdentityPoint {
    pub fn n(&self) -> usize {
        match self {
            Self::Cone { point } => point.n(),
            Self::Tube { point } => point.n(),
            Self::TubePair { z, .. } => z.n(),
        }
    }

    /// The point scaled by `λ > 0` (both points of a pair).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let tube = |p: &TubePoint| -> Result<TubePoint> {
            TubePoint::new(p.real_part.iter().map(|v| v * lambda).collect(), p.imag_part.scaled(lambda)?)
        };
        Ok(match self {
            Self::Cone { point } => Self::Cone { point: point.scaled(lambda)? },
            Self::Tube { point } => Self::Tube { point: tube(point)? },
            Self::TubePair { z, xi } => Self::TubePair { z: tube(z)?, xi: tube(xi)? },
        })
    }
}

/// An identity with its indices and evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub indices: Vec<MultiIndex>,
    pub point: IdentityPoint,
}

impl IdentityCase {
    pub fn new(id: IdentityId, indices: Vec<MultiIndex>, point: IdentityPoint) -> Result<Self> {
        if indices.len() != id.arity() {
            return Err(Error::InvalidInput(format!("{id} takes {} multi-indices, got {}", id.arity(), indices.len())));
        }
        let n = point.n();
        for idx in &indices {
            idx.expect(id.convention())?;
            if idx.n() != n {
                return Err(Error::InvalidInput(format!("multi-index of length {} at a point of P_{n}", idx.n())));
            }
        }
        let shape_ok = match id {
            IdentityId::LaplacePower | IdentityId::ShiftedLaplacePower | IdentityId::ConeShift | IdentityId::HorizontalAbs => {
                matches!(point, IdentityPoint::Cone { .. })
            }
            IdentityId::Kernel | IdentityId::ShiftedKernel | IdentityId::TubeAbs => matches!(point, IdentityPoint::Tube { .. }),
            IdentityId::TubeProduct => matches!(point, IdentityPoint::TubePair { .. }),
        };
        if !shape_ok {
            return Err(Error::InvalidInput(format!("{id} evaluated at the wrong kind of point")));
        }
        Ok(Self { id, indices, point })
    }

    pub fn n(&self) -> usize {
        self.point.n()
    }

    pub fn with_point(&self, point: IdentityPoint) -> Result<Self> {
        Self::new(self.id, self.indices.clone(), point)
    }

    /// Literal exponents of index `i`, after the automatic shift where the
    /// identity applies one.
    pub fn literal(&self, i: usize) -> Vec<f64> {
        match self.id {
            IdentityId::ShiftedLaplacePower | IdentityId::ShiftedKernel => self.indices[i].to_shifted().entries().to_vec(),
            _ => self.indices[i].entries().to_vec(),
        }
    }

    /// The cone point of the case: the point itself, or the imaginary part of `z`.
    pub fn cone_point(&self) -> &ConePoint {
        match &self.point {
            IdentityPoint::Cone { point } => point,
            IdentityPoint::Tube { point } => &point.imag_part,
            IdentityPoint::TubePair { z, .. } => &z.imag_part,
        }
    }

    pub(crate) fn tube_point(&self) -> Option<&TubePoint> {
        match &self.point {
            IdentityPoint::Tube { point } => Some(point),
            _ => None,
        }
    }
}

/// Both evaluations of a closed form, with their homogeneity degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    /// Value with the displayed constant and exponent pattern.
    pub stated: Complex64,
    /// Value with the derived constant and exponent pattern.
    pub corrected: Complex64,
    /// Degree `d` with `closed(λ·point) = λ^d closed(point)`, displayed form.
    pub stated_degree: f64,
    pub corrected_degree: f64,
}

// ---- Gamma building blocks ----

fn ln_pi() -> f64 {
    PI.ln()
}

/// `ln G(s)` with sign.
pub(crate) fn cone_gamma(s: &[f64]) -> SignedLog {
    let n = s.len();
    let mut v = SignedLog::ONE.mul_gamma(s[n - 1] + 1.0);
    for &sj in &s[..n - 1] {
        v = v.mul_gamma(sj + 1.5);
    }
    SignedLog { log: v.log + 0.5 * (n as f64 - 1.0) * ln_pi(), sign: v.sign }
}

/// `ln Gd(a)` with sign.
pub(crate) fn dual_cone_gamma(a: &[f64]) -> SignedLog {
    let n = a.len();
    let nf = n as f64;
    let mut v = SignedLog::ONE.mul_gamma(a[n - 1] + (nf + 1.0) / 2.0);
    for &aj in &a[..n - 1] {
        v = v.mul_gamma(aj + 1.0);
    }
    SignedLog { log: v.log + 0.5 * (nf - 1.0) * (4.0 * PI).ln(), sign: v.sign }
}

/// `ln G*(r) = ln Gd(r - J)`.
pub(crate) fn power_gamma(r: &[f64]) -> SignedLog {
    dual_cone_gamma(&sub_j(r, 1.0))
}

pub(crate) fn j_vector(n: usize) -> Vec<f64> {
    let mut j = vec![1.5; n];
    j[n - 1] = (n as f64 + 1.0) / 2.0;
    j
}

/// `v - k·J`.
fn sub_j(v: &[f64], k: f64) -> Vec<f64> {
    let j = j_vector(v.len());
    v.iter().zip(&j).map(|(a, b)| a - k * b).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

fn m_of(n: usize) -> f64 {
    (2 * n - 1) as f64
}

/// Derived constant of the Laplace transform at rate `4π` in `q` coordinates.
#[cfg(test)]
pub(crate) fn laplace_true_constant(s: &[f64]) -> SignedLog {
    let n = s.len();
    let head: f64 = s[..n - 1].iter().map(|v| v + 1.5).sum();
    let g = cone_gamma(s);
    SignedLog { log: g.log - (sum(s) + m_of(n)) * (4.0 * PI).ln() + head * 4f64.ln(), sign: g.sign }
}

/// Derived constant of the kernel.
pub(crate) fn kernel_true_constant(s: &[f64]) -> SignedLog {
    let n = s.len();
    let nf = n as f64;
    let mut a: Vec<f64> = s.iter().map(|v| v + 1.5).collect();
    a[n - 1] = s[n - 1] + (nf + 1.0) / 2.0;
    let gd = dual_cone_gamma(&a);
    let g = cone_gamma(s);
    let v = gd / g;
    SignedLog { log: v.log + (sum(s) + m_of(n)) * (4.0 * PI).ln() - (sum(s) + 4.0 * nf - 2.0) * (2.0 * PI).ln(), sign: v.sign }
}

pub(crate) fn cone_shift_true_constant(r: &[f64], eta: &[f64]) -> SignedLog {
    let n = r.len();
    let nf = n as f64;
    let mut a: Vec<f64> = r.iter().zip(eta).map(|(x, y)| x - y - 3.0).collect();
    a[n - 1] = r[n - 1] - eta[n - 1] - nf - 1.0;
    cone_gamma(eta) * dual_cone_gamma(&a) / power_gamma(r)
}

pub(crate) fn horizontal_true_constant(r: &[f64]) -> SignedLog {
    let n = r.len();
    let nf = n as f64;
    let mut a: Vec<f64> = r.iter().map(|x| x - 3.0).collect();
    a[n - 1] = r[n - 1] - nf - 1.0;
    let half: Vec<f64> = r.iter().map(|x| x / 2.0).collect();
    let g = power_gamma(&half);
    let v = dual_cone_gamma(&a) / g / g;
    SignedLog { log: v.log + m_of(n) * (2.0 * PI).ln() - (sum(r) - 2.0 * nf + 1.0) * LN_2, sign: v.sign }
}

pub(crate) fn tube_product_true_constant(l: &[f64], r: &[f64], eta: &[f64]) -> SignedLog {
    let n = r.len();
    let nf = n as f64;
    let mut a: Vec<f64> = (0..n).map(|j| r[j] + eta[j] - l[j] - 4.5).collect();
    a[n - 1] = r[n - 1] + eta[n - 1] - l[n - 1] - 1.5 * (nf + 1.0);
    let v = cone_gamma(l) * dual_cone_gamma(&a) / power_gamma(r) / power_gamma(eta);
    SignedLog { log: v.log + m_of(n) * (2.0 * PI).ln() - (sum(l) + m_of(n)) * LN_2, sign: v.sign }
}

pub(crate) fn tube_abs_true_constant(l: &[f64], r: &[f64]) -> SignedLog {
    horizontal_true_constant(r) * cone_shift_true_constant(&sub_j(r, 1.0), l)
}

// ---- range predicates on literal exponents (true convergence conditions) ----

fn literal_check(check: &mut RangeCheck, label: &str, head: impl Fn(usize) -> f64, last: f64, head_bound: f64, last_bound: f64, n: usize) {
    for j in 0..n - 1 {
        check.gt(&format!("{} (literal, j = {})", label, j + 1), head(j), head_bound);
    }
    check.gt(&format!("{label} (literal, j = {n})"), last, last_bound);
}

fn laplace_true_range(s: &[f64]) -> Result<()> {
    let n = s.len();
    let mut c = RangeCheck::new();
    literal_check(&mut c, "s", |j| s[j], s[n - 1], -1.5, -1.0, n);
    c.finish()
}

fn cone_shift_true_range(r: &[f64], eta: &[f64]) -> Result<()> {
    let n = r.len();
    let nf = n as f64;
    let mut c = RangeCheck::new();
    literal_check(&mut c, "η", |j| eta[j], eta[n - 1], -1.5, -1.0, n);
    literal_check(&mut c, "r - η", |j| r[j] - eta[j], r[n - 1] - eta[n - 1], 2.0, (nf + 1.0) / 2.0, n);
    c.finish()
}

fn horizontal_true_range(r: &[f64]) -> Result<()> {
    let n = r.len();
    let mut c = RangeCheck::new();
    literal_check(&mut c, "r", |j| r[j], r[n - 1], 2.0, (n as f64 + 1.0) / 2.0, n);
    c.finish()
}

fn tube_product_true_range(l: &[f64], r: &[f64], eta: &[f64]) -> Result<()> {
    let n = r.len();
    let nf = n as f64;
    let mut c = RangeCheck::new();
    literal_check(&mut c, "l", |j| l[j], l[n - 1], -1.5, -1.0, n);
    literal_check(&mut c, "r", |j| r[j], r[n - 1], 0.5, 0.0, n);
    literal_check(&mut c, "η", |j| eta[j], eta[n - 1], 0.5, 0.0, n);
    literal_check(&mut c, "r + η - l", |j| r[j] + eta[j] - l[j], r[n - 1] + eta[n - 1] - l[n - 1], 3.5, nf + 1.0, n);
    c.finish()
}

fn tube_abs_true_range(l: &[f64], r: &[f64]) -> Result<()> {
    let n = r.len();
    let nf = n as f64;
    let mut c = RangeCheck::new();
    literal_check(&mut c, "l", |j| l[j], l[n - 1], -1.5, -1.0, n);
    literal_check(&mut c, "r - l", |j| r[j] - l[j], r[n - 1] - l[n - 1], 3.5, nf + 1.0, n);
    c.finish()
}

/// Checks the stated range and the true convergence conditions of a case.
pub fn check_ranges(case: &IdentityCase) -> Result<()> {
    let lit = |i: usize| case.literal(i);
    let plain = |i: usize| case.indices[i].to_plain().entries().to_vec();
    let mut violations = Vec::new();
    let mut absorb = |r: Result<()>| match r {
        Ok(()) => {}
        Err(Error::ConvergenceDomain { violations: v }) => violations.extend(v),
        Err(e) => violations.push(e.to_string()),
    };
    match case.id {
        IdentityId::LaplacePower => absorb(constants::c1_range(&lit(0))),
        IdentityId::Kernel => {
            absorb(constants::c2_range(&lit(0)));
            absorb(laplace_true_range(&lit(0)));
        }
        IdentityId::ShiftedLaplacePower => absorb(constants::c3_range(&plain(0))),
        IdentityId::ShiftedKernel => {
            absorb(constants::c4_range(&plain(0)));
            absorb(constants::c3_range(&plain(0)));
        }
        IdentityId::ConeShift => {
            absorb(constants::c5_range(&plain(0), &plain(1)));
            absorb(cone_shift_true_range(&lit(0), &lit(1)));
        }
        IdentityId::HorizontalAbs => {
            absorb(constants::c6_range(&plain(0)));
            absorb(horizontal_true_range(&lit(0)));
        }
        IdentityId::TubeProduct => {
            absorb(constants::c7_range(&plain(0), &plain(1), &plain(2)));
            absorb(tube_product_true_range(&lit(0), &lit(1), &lit(2)));
        }
        IdentityId::TubeAbs => {
            absorb(constants::c8_range(&plain(0), &plain(1)));
            absorb(tube_abs_true_range(&lit(0), &lit(1)));
        }
    }
    violations.dedup();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::domain(violations))
    }
}

// ---- evaluation ----

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn ln_delta(y: &ConePoint, e: &[f64]) -> f64 {
    cone::ln_delta_power(y, e)
}

/// `ln` of `t_n^{e_n} Π q_j^{e_j}` in delta-transform coordinates.
fn ln_delta_transform(t: &ConePoint, e: &[f64]) -> f64 {
    let dt = delta_transform(t);
    let n = e.len();
    let mut acc = e[n - 1] * dt.t_n_component.ln();
    for (q, ej) in dt.q.iter().zip(e) {
        acc += ej * q.ln();
    }
    acc
}

/// `ln` of `t_n^{e_n} Π p_j^{e_j}`, `p_j = t_j - t_{2n-j}^2 / (4 t_n)`.
fn ln_dual_coordinates(t: &ConePoint, e: &[f64]) -> f64 {
    let n = e.len();
    let tn = t.last_diagonal();
    let mut acc = e[n - 1] * tn.ln();
    for j in 0..n - 1 {
        let w = t.border(j);
        acc += e[j] * (t.coords()[j] - w * w / (4.0 * tn)).ln();
    }
    acc
}

fn signed_times(c: SignedLog, ln_rest: Complex64) -> Complex64 {
    if c.sign == 0 {
        return Complex64::new(0.0, 0.0);
    }
    f64::from(c.sign) * (ln_rest + c.log).exp()
}

fn laplace_closed(t: &ConePoint, s: &[f64]) -> ClosedForm {
    let n = s.len();
    let nf = n as f64;
    let mut e: Vec<f64> = s.iter().map(|v| -v - 1.5).collect();
    e[n - 1] = -s[n - 1] - (nf + 1.0) / 2.0;
    let stated = signed_times(c1_raw(s), real(ln_delta_transform(t, &e)));
    // in p coordinates the constant carries no powers of 4
    let g = cone_gamma(s);
    let unit_rate = SignedLog { log: g.log - (sum(s) + m_of(n)) * (4.0 * PI).ln(), sign: g.sign };
    let corrected = signed_times(unit_rate, real(ln_dual_coordinates(t, &e)));
    let degree = -sum(s) - m_of(n);
    ClosedForm { stated, corrected, stated_degree: degree, corrected_degree: degree }
}

fn kernel_exponents(s: &[f64], with_lower_minor: bool) -> Vec<f64> {
    let n = s.len();
    let nf = n as f64;
    let lower = if with_lower_minor { nf - 2.0 } else { 0.0 };
    let mut e: Vec<f64> = s.iter().map(|v| -v - (nf + 1.0) + lower).collect();
    e[n - 1] = -s[n - 1] - (nf + 1.0);
    e
}

fn kernel_closed_form(z: &TubePoint, s: &[f64], stated_constant: SignedLog, stated_lower_minor: bool) -> Result<ClosedForm> {
    let stated_e = kernel_exponents(s, stated_lower_minor);
    let true_e = kernel_exponents(s, true);
    let ln_stated = cone::ln_complex_power(z, &stated_e)?;
    let ln_true = cone::ln_complex_power(z, &true_e)?;
    Ok(ClosedForm {
        stated: signed_times(stated_constant, ln_stated),
        corrected: signed_times(kernel_true_constant(s), ln_true),
        stated_degree: sum(&stated_e),
        corrected_degree: sum(&true_e),
    })
}

/// Evaluates both closed forms of a case after checking its ranges.
pub fn closed_form(case: &IdentityCase) -> Result<ClosedForm> {
    check_ranges(case)?;
    closed_form_unchecked(case)
}

pub(crate) fn closed_form_unchecked(case: &IdentityCase) -> Result<ClosedForm> {
    let n = case.n();
    let nf = n as f64;
    let lit = |i: usize| case.literal(i);
    match case.id {
        IdentityId::LaplacePower | IdentityId::ShiftedLaplacePower => Ok(laplace_closed(case.cone_point(), &lit(0))),
        IdentityId::Kernel => {
            let s = lit(0);
            kernel_closed_form(case.tube_point().expect("tube case"), &s, c2_raw(&s), true)
        }
        IdentityId::ShiftedKernel => {
            let s = lit(0);
            kernel_closed_form(case.tube_point().expect("tube case"), &s, c2_raw(&s), false)
        }
        IdentityId::ConeShift => {
            let (r, eta) = (lit(0), lit(1));
            let b = case.cone_point();
            let stated_e: Vec<f64> = (0..n).map(|j| eta[j] - r[j] + (nf + 1.0) / 2.0).collect();
            let true_e = add(&sub(&eta, &r), &j_vector(n));
            Ok(ClosedForm {
                stated: signed_times(c5_raw(&r, &eta), real(ln_delta(b, &stated_e))),
                corrected: signed_times(cone_shift_true_constant(&r, &eta), real(ln_delta(b, &true_e))),
                stated_degree: sum(&stated_e),
                corrected_degree: sum(&true_e),
            })
        }
        IdentityId::HorizontalAbs => {
            let r = lit(0);
            let v = case.cone_point();
            let stated_e: Vec<f64> = r.iter().map(|x| -x + (nf + 1.0) / 2.0).collect();
            let true_e = sub(&j_vector(n), &r);
            Ok(ClosedForm {
                stated: signed_times(c6_raw(&r), real(ln_delta(v, &stated_e))),
                corrected: signed_times(horizontal_true_constant(&r), real(ln_delta(v, &true_e))),
                stated_degree: sum(&stated_e),
                corrected_degree: sum(&true_e),
            })
        }
        IdentityId::TubeProduct => {
            let (l, r, eta) = (lit(0), lit(1), lit(2));
            let IdentityPoint::TubePair { z, xi } = &case.point else { unreachable!("validated in IdentityCase::new") };
            let zx = z.minus_conj(xi)?;
            let base = sub(&l, &add(&r, &eta));
            let stated_e: Vec<f64> = base.iter().map(|v| v + nf + 1.0).collect();
            let j = j_vector(n);
            let true_e: Vec<f64> = base.iter().zip(&j).map(|(v, jj)| v + 2.0 * jj).collect();
            Ok(ClosedForm {
                stated: signed_times(c7_raw(&l, &r, &eta), cone::ln_complex_power(&zx, &stated_e)?),
                corrected: signed_times(tube_product_true_constant(&l, &r, &eta), cone::ln_complex_power(&zx, &true_e)?),
                stated_degree: sum(&stated_e),
                corrected_degree: sum(&true_e),
            })
        }
        IdentityId::TubeAbs => {
            let (l, r) = (lit(0), lit(1));
            let y = case.cone_point();
            let base = sub(&l, &r);
            let stated_e: Vec<f64> = base.iter().map(|v| v + nf + 1.0).collect();
            let j = j_vector(n);
            let true_e: Vec<f64> = base.iter().zip(&j).map(|(v, jj)| v + 2.0 * jj).collect();
            Ok(ClosedForm {
                stated: signed_times(c8_raw(&l, &r), real(ln_delta(y, &stated_e))),
                corrected: signed_times(tube_abs_true_constant(&l, &r), real(ln_delta(y, &true_e))),
                stated_degree: sum(&stated_e),
                corrected_degree: sum(&true_e),
            })
        }
    }
}

// ---- named entry points (displayed forms) ----

fn cone_case(id: IdentityId, indices: Vec<MultiIndex>, point: &ConePoint) -> Result<IdentityCase> {
    IdentityCase::new(id, indices, IdentityPoint::Cone { point: point.clone() })
}

fn tube_case(id: IdentityId, indices: Vec<MultiIndex>, point: &TubePoint) -> Result<IdentityCase> {
    IdentityCase::new(id, indices, IdentityPoint::Tube { point: point.clone() })
}

/// `C1(s) t_n^{-s_n-(n+1)/2} Π q_j^{-s_j-3/2}` for plain `s`.
pub fn laplace_power_closed(t: &ConePoint, s: &MultiIndex) -> Result<f64> {
    Ok(closed_form(&cone_case(IdentityId::LaplacePower, vec![s.clone()], t)?)?.stated.re)
}

/// `C2(s) P^{-s}(z) P(z)^{-n-1} P_{n-1}(z)^{n-2}` for plain `s`.
pub fn kernel_closed(z: &TubePoint, s: &MultiIndex) -> Result<Complex64> {
    Ok(closed_form(&tube_case(IdentityId::Kernel, vec![s.clone()], z)?)?.stated)
}

/// Laplace transform at the shift `s'` of a plain `s`.
pub fn shifted_laplace_power_closed(t: &ConePoint, s: &MultiIndex) -> Result<f64> {
    Ok(closed_form(&cone_case(IdentityId::ShiftedLaplacePower, vec![s.clone()], t)?)?.stated.re)
}

/// `C4(s') P^{-s'}(z) P(z)^{-n-1}` at the shift `s'` of a plain `s`.
pub fn shifted_kernel_closed(z: &TubePoint, s: &MultiIndex) -> Result<Complex64> {
    Ok(closed_form(&tube_case(IdentityId::ShiftedKernel, vec![s.clone()], z)?)?.stated)
}

/// `C5(r, η) Δ^{η-r}(b) Δ(b)^{(n+1)/2}` for shifted `r`, `η`.
pub fn cone_shift_closed(b: &ConePoint, r: &MultiIndex, eta: &MultiIndex) -> Result<f64> {
    Ok(closed_form(&cone_case(IdentityId::ConeShift, vec![r.clone(), eta.clone()], b)?)?.stated.re)
}

/// `C6(r) Δ^{-r}(v) Δ(v)^{(n+1)/2}` for shifted `r`.
pub fn horizontal_abs_closed(v: &ConePoint, r: &MultiIndex) -> Result<f64> {
    Ok(closed_form(&cone_case(IdentityId::HorizontalAbs, vec![r.clone()], v)?)?.stated.re)
}

/// `C7(l, r, η) P^{-r-η+l}(z - ξ̄) P(z - ξ̄)^{n+1}` for shifted indices.
pub fn tube_product_closed(z: &TubePoint, xi: &TubePoint, l: &MultiIndex, r: &MultiIndex, eta: &MultiIndex) -> Result<Complex64> {
    let case = IdentityCase::new(
        IdentityId::TubeProduct,
        vec![l.clone(), r.clone(), eta.clone()],
        IdentityPoint::TubePair { z: z.clone(), xi: xi.clone() },
    )?;
    Ok(closed_form(&case)?.stated)
}

/// `C8(l, r) Δ^{-r+l}(y) Δ(y)^{n+1}` at `y = Im z`.
pub fn tube_abs_closed(z: &TubePoint, l: &MultiIndex, r: &MultiIndex) -> Result<f64> {
    Ok(closed_form(&tube_case(IdentityId::TubeAbs, vec![l.clone(), r.clone()], z)?)?.stated.re)
}
