//! The operator `Tf(z) = Δ^a(Im z) ∫ Δ^b(Im w) f(w) / P^c(z - w̄) dV(w)`,
//! the test functions `f_R(w) = Δ^l(Im w) / P^r(w + iR)` and the norm-scaling
//! experiment behind the necessary exponent condition.
//!
//! `R` is embedded as the diagonal point `(R_1, …, R_n, 0, …, 0)`, on which
//! `Δ^e(R) = Π R_j^{e_j}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone::{ln_abs_complex_power_raw, ln_complex_power_raw, ln_delta_raw, ConePoint, Convention, MultiIndex, TubePoint};
use crate::error::{Error, Result};
use crate::identities::{check_ranges, closed_form, j_vector, tube_product_true_constant, IdentityCase, IdentityId, IdentityPoint};
use crate::oracle::{preset_sampler, tube_abs_divergence_probe, DivergenceProbe, Z_THRESHOLD};
use crate::sampling::{mc_integrate_tube, IntegralEstimate, LogValue, SamplerSpec};

/// Equality tolerance of the exponent condition.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

/// Absolute floor of slope acceptance bands.
pub const SLOPE_FLOOR: f64 = 0.05;

/// A named strict inequality or equality. For inequalities the margin is
/// positive when satisfied; for equalities it is `lhs - rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub satisfied: bool,
    pub margin: f64,
}

impl Condition {
    /// `lhs < rhs`.
    pub fn less(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { id: id.into(), satisfied: lhs < rhs, margin: rhs - lhs }
    }

    /// `lhs > rhs`.
    pub fn greater(id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { id: id.into(), satisfied: lhs > rhs, margin: lhs - rhs }
    }

    /// `lhs = rhs` within `tol`.
    pub fn equal(id: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self { id: id.into(), satisfied: (lhs - rhs).abs() <= tol, margin: lhs - rhs }
    }
}

/// `(n, p, q, α, β, a, b, c)` with plain indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub a: MultiIndex,
    pub b: MultiIndex,
    pub c: MultiIndex,
}

impl ParameterSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(p: f64, q: f64, alpha: MultiIndex, beta: MultiIndex, a: MultiIndex, b: MultiIndex, c: MultiIndex) -> Result<Self> {
        let set = Self { n: alpha.n(), p, q, alpha, beta, a, b, c };
        set.validate()?;
        Ok(set)
    }

    /// `n = 2, p = q = 2, α = β = a = b = 0, c = (3, 3)`.
    pub fn worked() -> Self {
        let zero = MultiIndex::plain([0.0, 0.0]);
        Self::new(2.0, 2.0, zero.clone(), zero.clone(), zero.clone(), zero, MultiIndex::plain([3.0, 3.0])).expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= self.q && self.q.is_finite()) {
            return Err(Error::InvalidInput(format!("need 1 < p <= q < inf, got p = {}, q = {}", self.p, self.q)));
        }
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        for (name, v) in self.vectors() {
            v.expect(Convention::Plain)?;
            if v.n() != self.n {
                return Err(Error::InvalidInput(format!("{name} has length {}, expected {}", v.n(), self.n)));
            }
        }
        Ok(())
    }

    fn vectors(&self) -> [(&'static str, &MultiIndex); 5] {
        [("alpha", &self.alpha), ("beta", &self.beta), ("a", &self.a), ("b", &self.b), ("c", &self.c)]
    }

    pub fn with_c(&self, c: MultiIndex) -> Result<Self> {
        Self::new(self.p, self.q, self.alpha.clone(), self.beta.clone(), self.a.clone(), self.b.clone(), c)
    }

    pub(crate) fn nf(&self) -> f64 {
        self.n as f64
    }
}

/// `f_R(w) = Δ^l(Im w) / P^r(w + iR)` with shifted `l`, `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionFR {
    pub l: MultiIndex,
    pub r: MultiIndex,
    pub radius: Vec<f64>,
}

impl TestFunctionFR {
    pub fn new(l: MultiIndex, r: MultiIndex, radius: Vec<f64>) -> Result<Self> {
        l.expect(Convention::Shifted)?;
        r.expect(Convention::Shifted)?;
        if l.n() != r.n() || radius.len() != l.n() {
            return Err(Error::InvalidInput("l, r and R must have the same length".into()));
        }
        if radius.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("R must be positive, got {radius:?}")));
        }
        Ok(Self { l, r, radius })
    }

    pub fn with_radius(&self, radius: Vec<f64>) -> Result<Self> {
        Self::new(self.l.clone(), self.r.clone(), radius)
    }

    pub fn n(&self) -> usize {
        self.l.n()
    }

    /// The diagonal cone point carrying `R`.
    pub fn radius_point(&self) -> ConePoint {
        ConePoint::diagonal(&self.radius).expect("positive diagonal")
    }
}

fn shifted_values(v: &MultiIndex) -> Vec<f64> {
    v.to_shifted().entries().to_vec()
}

/// The two blocks of admissibility conditions on plain `(l, r)`.
pub fn fr_conditions(params: &ParameterSet, l: &MultiIndex, r: &MultiIndex) -> Result<Vec<Condition>> {
    l.expect(Convention::Plain)?;
    r.expect(Convention::Plain)?;
    let (n, nf, p) = (params.n, params.nf(), params.p);
    let (al, b, c) = (params.alpha.entries(), params.b.entries(), params.c.entries());
    let (l, r) = (l.entries(), r.entries());
    let mut out = Vec::new();
    for j in 0..n - 1 {
        let k = j + 1;
        let l_low = (-(nf + 1.0) / (2.0 * p) - al[j] / p).max(-b[j] - 0.5);
        let gap = (al[j] / p + (3.0 * nf + 1.0) / (2.0 * p)).max((3.0 * nf + 1.0) / 2.0 + b[j] - c[j]);
        out.push(Condition::greater(format!("l_{k} > max(-(n+1)/(2p) - alpha_{k}/p, -b_{k} - 1/2)"), l[j], l_low));
        out.push(Condition::greater(format!("r_{k} > n"), r[j], nf));
        out.push(Condition::greater(format!("r_{k} - l_{k} > max(alpha_{k}/p + (3n+1)/(2p), (3n+1)/2 + b_{k} - c_{k})"), r[j] - l[j], gap));
    }
    let j = n - 1;
    let l_low = (-1.0 / p - al[j] / p).max(-b[j] - 1.0);
    let gap = ((al[j] + nf + 1.0) / p).max(nf + 1.0 + b[j] - c[j]);
    out.push(Condition::greater("l_n > max(-1/p - alpha_n/p, -b_n - 1)", l[j], l_low));
    out.push(Condition::greater("r_n > (n+1)/2", r[j], (nf + 1.0) / 2.0));
    out.push(Condition::greater("r_n - l_n > max((alpha_n+n+1)/p, n+1+b_n-c_n)", r[j] - l[j], gap));
    Ok(out)
}

/// The finiteness conditions on `‖Tf_R‖_{L^q_β}` as displayed (plain indices).
pub fn tf_norm_conditions(params: &ParameterSet, l: &MultiIndex, r: &MultiIndex) -> Result<Vec<Condition>> {
    l.expect(Convention::Plain)?;
    r.expect(Convention::Plain)?;
    let (n, nf, q) = (params.n, params.nf(), params.q);
    let (a, b, c, be) = (params.a.entries(), params.b.entries(), params.c.entries(), params.beta.entries());
    let (l, r) = (l.entries(), r.entries());
    let mut out = Vec::new();
    for j in 0..n {
        let k = if j + 1 < n { (j + 1).to_string() } else { "n".into() };
        let (w, tail) = if j + 1 < n { ((nf + 1.0) / 2.0, (3.0 * nf + 1.0) / (2.0 * q)) } else { (1.0, (nf + 1.0) / q) };
        out.push(Condition::greater(format!("q a_{k} + beta_{k} > {}", if j + 1 < n { "-(n+1)/2" } else { "-1" }), q * a[j] + be[j], -w));
        out.push(Condition::greater(
            format!("c_{k} - 2 b_{k} - a_{k} - n - 1 + r_{k} - l_{k} > beta_{k}/q + {}", if j + 1 < n { "(3n+1)/(2q)" } else { "(n+1)/q" }),
            c[j] - 2.0 * b[j] - a[j] - nf - 1.0 + r[j] - l[j],
            be[j] / q + tail,
        ));
    }
    Ok(out)
}

/// Deterministic admissible `(l, r)`: each lower bound plus one, each gap plus
/// one. Returned shifted.
pub fn admissible_lr(params: &ParameterSet) -> Result<(MultiIndex, MultiIndex)> {
    params.validate()?;
    let (n, nf, p) = (params.n, params.nf(), params.p);
    let (al, b, c) = (params.alpha.entries(), params.b.entries(), params.c.entries());
    let mut l = vec![0.0; n];
    let mut r = vec![0.0; n];
    for j in 0..n {
        let (l_low, r_low, gap) = if j + 1 < n {
            (
                (-(nf + 1.0) / (2.0 * p) - al[j] / p).max(-b[j] - 0.5),
                nf,
                (al[j] / p + (3.0 * nf + 1.0) / (2.0 * p)).max((3.0 * nf + 1.0) / 2.0 + b[j] - c[j]),
            )
        } else {
            ((-1.0 / p - al[j] / p).max(-b[j] - 1.0), (nf + 1.0) / 2.0, ((al[j] + nf + 1.0) / p).max(nf + 1.0 + b[j] - c[j]))
        };
        l[j] = l_low + 1.0;
        r[j] = (r_low + 1.0).max(l[j] + gap + 1.0);
    }
    let (lp, rp) = (MultiIndex::new(l, Convention::Plain)?, MultiIndex::new(r, Convention::Plain)?);
    let failed: Vec<String> = fr_conditions(params, &lp, &rp)?.into_iter().filter(|c| !c.satisfied).map(|c| c.id).collect();
    if !failed.is_empty() {
        return Err(Error::Infeasible { binding: failed });
    }
    Ok((lp.to_shifted(), rp.to_shifted()))
}

// ---- pointwise values ----

fn ln_fr_raw(tf_l: &[f64], tf_r_neg: &[f64], radius: &[f64], x: &[f64], y: &[f64]) -> Option<Complex64> {
    let n = tf_l.len();
    let ln_l = ln_delta_raw(y, tf_l)?;
    let mut shifted = y.to_vec();
    for j in 0..n {
        shifted[j] += radius[j];
    }
    Some(ln_complex_power_raw(x, &shifted, tf_r_neg).ok()? + ln_l)
}

/// `f_R(w)`.
pub fn f_r_eval(w: &TubePoint, tf: &TestFunctionFR) -> Result<Complex64> {
    if w.n() != tf.n() {
        return Err(Error::InvalidInput("point and test function dimensions differ".into()));
    }
    let r_neg: Vec<f64> = tf.r.entries().iter().map(|v| -v).collect();
    let shifted = w.plus_i(&tf.radius_point())?;
    let ln = ln_complex_power_raw(&shifted.real_part, shifted.imag_part.coords(), &r_neg)?;
    let ln_l = ln_delta_raw(w.imag_part.coords(), tf.l.entries()).ok_or_else(|| Error::NotInCone("Im w".into()))?;
    Ok((ln + ln_l).exp())
}

/// Norm exponents `e` with `‖·‖ = C Π R_j^{e_j}`, as displayed and as derived,
/// plus the derived constant `ln C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormLaw {
    pub exponents: Vec<f64>,
    pub corrected_exponents: Vec<f64>,
    /// `ln C` from the displayed constant, when that constant is positive.
    pub ln_constant: Option<f64>,
    pub corrected_ln_constant: f64,
}

impl NormLaw {
    /// `ln C + Σ e_j ln R_j` under the derived law.
    pub fn ln_norm(&self, radius: &[f64]) -> f64 {
        self.corrected_ln_constant + self.corrected_exponents.iter().zip(radius).map(|(e, r)| e * r.ln()).sum::<f64>()
    }
}

/// The tube-abs case whose value is `‖f_R‖_p^p`.
fn fr_norm_case(params: &ParameterSet, tf: &TestFunctionFR) -> Result<IdentityCase> {
    let p = params.p;
    let l: Vec<f64> = tf.l.entries().iter().zip(params.alpha.entries()).map(|(l, a)| p * l + a).collect();
    let r: Vec<f64> = tf.r.entries().iter().map(|r| p * r).collect();
    IdentityCase::new(
        IdentityId::TubeAbs,
        vec![MultiIndex::new(l, Convention::Shifted)?, MultiIndex::new(r, Convention::Shifted)?],
        IdentityPoint::Tube { point: TubePoint::imaginary(tf.radius_point()) },
    )
}

/// Literal exponent `e` of `Tf_R(z) = K Δ^a(Im z) P^{e}(z + iR)`.
fn tf_exponent(params: &ParameterSet, tf: &TestFunctionFR) -> Vec<f64> {
    let (b, c) = (shifted_values(&params.b), shifted_values(&params.c));
    let j = j_vector(params.n);
    (0..params.n).map(|k| -(c[k] + tf.r.entries()[k] - b[k] - tf.l.entries()[k]) + 2.0 * j[k]).collect()
}

/// The tube-abs case whose value is `‖Tf_R‖_q^q / K^q`.
fn tf_norm_case(params: &ParameterSet, tf: &TestFunctionFR) -> Result<IdentityCase> {
    let q = params.q;
    let a = shifted_values(&params.a);
    let e = tf_exponent(params, tf);
    let l: Vec<f64> = a.iter().zip(params.beta.entries()).map(|(a, b)| q * a + b).collect();
    let r: Vec<f64> = e.iter().map(|v| -q * v).collect();
    IdentityCase::new(
        IdentityId::TubeAbs,
        vec![MultiIndex::new(l, Convention::Shifted)?, MultiIndex::new(r, Convention::Shifted)?],
        IdentityPoint::Tube { point: TubePoint::imaginary(tf.radius_point()) },
    )
}

/// The tube-product case whose value is `Tf_R(z) / Δ^a(Im z)`.
fn tf_case(z: &TubePoint, params: &ParameterSet, tf: &TestFunctionFR) -> Result<IdentityCase> {
    let bl: Vec<f64> = shifted_values(&params.b).iter().zip(tf.l.entries()).map(|(b, l)| b + l).collect();
    IdentityCase::new(
        IdentityId::TubeProduct,
        vec![MultiIndex::new(bl, Convention::Shifted)?, params.c.to_shifted(), tf.r.clone()],
        IdentityPoint::TubePair { z: z.clone(), xi: TubePoint::imaginary(tf.radius_point()) },
    )
}

fn ln_positive(v: f64) -> Option<f64> {
    (v > 0.0 && v.is_finite()).then(|| v.ln())
}

/// Closed `‖f_R‖_{L^p_α}`: exponents `l - r + (α + n + 1)/p` as displayed,
/// `l - r + (α + 2J)/p` as derived.
pub fn f_r_norm_closed(params: &ParameterSet, tf: &TestFunctionFR) -> Result<NormLaw> {
    check_ranges(&fr_norm_case(params, tf)?)?;
    let (p, nf) = (params.p, params.nf());
    let unit = TestFunctionFR { radius: vec![1.0; tf.n()], ..tf.clone() };
    let unit_cf = closed_form(&fr_norm_case(params, &unit)?)?;
    let j = j_vector(params.n);
    let (l, r) = (tf.l.to_plain(), tf.r.to_plain());
    let al = params.alpha.entries();
    Ok(NormLaw {
        exponents: (0..params.n).map(|k| l.entries()[k] - r.entries()[k] + (al[k] + nf + 1.0) / p).collect(),
        corrected_exponents: (0..params.n).map(|k| tf.l.entries()[k] - tf.r.entries()[k] + (al[k] + 2.0 * j[k]) / p).collect(),
        ln_constant: ln_positive(unit_cf.stated.re).map(|v| v / p),
        corrected_ln_constant: ln_positive(unit_cf.corrected.re).map_or(f64::NAN, |v| v / p),
    })
}

/// Closed `Tf_R(z)`, displayed and derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedImage {
    pub stated: Complex64,
    pub corrected: Complex64,
}

/// `Tf_R(z) = Δ^a(Im z) ∫ Δ^{b+l}(Im w) / (P^c(z - w̄) P^r(w + iR)) dV(w)` in
/// closed form. Requires the convergence conditions of that integral.
pub fn apply_t_closed(z: &TubePoint, params: &ParameterSet, tf: &TestFunctionFR) -> Result<ClosedImage> {
    let case = tf_case(z, params, tf)?;
    let cf = closed_form(&case)?;
    let ln_a = ln_delta_raw(z.imag_part.coords(), &shifted_values(&params.a)).ok_or_else(|| Error::NotInCone("Im z".into()))?;
    let weight = ln_a.exp();
    Ok(ClosedImage { stated: cf.stated * weight, corrected: cf.corrected * weight })
}

/// `‖Tf_R‖_{L^q_β}` exponents: `a + b - c + l - r + n + 1 + (β + n + 1)/q`
/// as displayed (plain indices), `a + b - c + l - r + 2J + (β + 2J)/q` as
/// derived (literal indices).
pub fn tf_r_norm_exponents(params: &ParameterSet, tf: &TestFunctionFR) -> Result<NormLaw> {
    check_ranges(&tf_case(&TubePoint::imaginary(ConePoint::identity(params.n)), params, tf)?)?;
    check_ranges(&tf_norm_case(params, tf)?)?;
    let (q, nf, n) = (params.q, params.nf(), params.n);
    let (a, b, c, be) = (params.a.entries(), params.b.entries(), params.c.entries(), params.beta.entries());
    let (l, r) = (tf.l.to_plain(), tf.r.to_plain());
    let (al, bl, cl) = (shifted_values(&params.a), shifted_values(&params.b), shifted_values(&params.c));
    let j = j_vector(n);
    let unit = TestFunctionFR { radius: vec![1.0; n], ..tf.clone() };
    let unit_cf = closed_form(&tf_norm_case(params, &unit)?)?;
    let ln_k = tube_product_true_constant(&bl.iter().zip(tf.l.entries()).map(|(x, y)| x + y).collect::<Vec<_>>(), &cl, tf.r.entries());
    Ok(NormLaw {
        exponents: (0..n).map(|k| a[k] + b[k] - c[k] + l.entries()[k] - r.entries()[k] + nf + 1.0 + (be[k] + nf + 1.0) / q).collect(),
        corrected_exponents: (0..n)
            .map(|k| al[k] + bl[k] - cl[k] + tf.l.entries()[k] - tf.r.entries()[k] + 2.0 * j[k] + (be[k] + 2.0 * j[k]) / q)
            .collect(),
        ln_constant: None,
        corrected_ln_constant: if ln_k.sign > 0 { ln_k.log } else { f64::NAN } + unit_cf.corrected.re.ln() / q,
    })
}

/// The exponent condition `c_j = a_j + b_j + n + 1 + (β_j + n + 1)/q - (α_j + n + 1)/p`.
pub fn necessary_exponent_condition(params: &ParameterSet) -> Vec<f64> {
    let nf = params.nf();
    (0..params.n)
        .map(|k| {
            params.a.entries()[k] + params.b.entries()[k] + nf + 1.0 + (params.beta.entries()[k] + nf + 1.0) / params.q
                - (params.alpha.entries()[k] + nf + 1.0) / params.p
        })
        .collect()
}

/// The exponent condition obtained from the derived norm laws (literal
/// indices, `2J` in place of `n + 1`). Agrees with the displayed one for `n ≤ 2`.
pub fn corrected_exponent_condition(params: &ParameterSet) -> Vec<f64> {
    let (a, b) = (shifted_values(&params.a), shifted_values(&params.b));
    let j = j_vector(params.n);
    let c_shift = crate::cone::shift_offset(params.n);
    (0..params.n)
        .map(|k| {
            let lit = a[k] + b[k] + 2.0 * j[k] + (params.beta.entries()[k] + 2.0 * j[k]) / params.q
                - (params.alpha.entries()[k] + 2.0 * j[k]) / params.p;
            if k + 1 < params.n {
                lit - c_shift
            } else {
                lit
            }
        })
        .collect()
}

// ---- numeric application ----

/// A function on the tube, evaluated at raw coordinates `x + iy`.
pub trait TubeFunction: Sync {
    fn eval(&self, x: &[f64], y: &[f64]) -> Complex64;
}

impl TubeFunction for TestFunctionFR {
    fn eval(&self, x: &[f64], y: &[f64]) -> Complex64 {
        let r_neg: Vec<f64> = self.r.entries().iter().map(|v| -v).collect();
        ln_fr_raw(self.l.entries(), &r_neg, &self.radius, x, y).map_or(Complex64::new(f64::NAN, 0.0), |v| v.exp())
    }
}

/// The zero function.
pub struct ZeroFunction;

impl TubeFunction for ZeroFunction {
    fn eval(&self, _x: &[f64], _y: &[f64]) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// `k·f`.
pub struct Scaled<'a, F: TubeFunction>(pub f64, pub &'a F);

impl<F: TubeFunction> TubeFunction for Scaled<'_, F> {
    fn eval(&self, x: &[f64], y: &[f64]) -> Complex64 {
        self.1.eval(x, y) * self.0
    }
}

fn kernel_integral(
    z: &TubePoint,
    weight: &[f64],
    c: &[f64],
    f: &dyn TubeFunction,
    proposal: &SamplerSpec,
    budget: u64,
    seed: u64,
) -> Result<IntegralEstimate> {
    let c_neg: Vec<f64> = c.iter().map(|v| -v).collect();
    let (zx, zy) = (z.real_part.clone(), z.imag_part.coords().to_vec());
    mc_integrate_tube(
        |x, y| {
            let Some(ln_w) = ln_delta_raw(y, weight) else { return LogValue::positive(f64::NAN) };
            let fx = f.eval(x, y);
            if fx == Complex64::new(0.0, 0.0) {
                return LogValue::zero();
            }
            let re: Vec<f64> = zx.iter().zip(x).map(|(a, b)| a - b).collect();
            let im: Vec<f64> = zy.iter().zip(y).map(|(a, b)| a + b).collect();
            match ln_complex_power_raw(&re, &im, &c_neg) {
                Ok(ln_k) => {
                    let v = LogValue::from_ln(ln_k + ln_w);
                    let fv = LogValue::from_value(fx);
                    LogValue { ln_abs: v.ln_abs + fv.ln_abs, phase: v.phase * fv.phase }
                }
                Err(_) => LogValue::positive(f64::NAN),
            }
        },
        proposal,
        budget,
        seed,
    )
}

/// Monte Carlo `Tf(z)` with the given proposal over the integration variable.
pub fn apply_t_numeric(
    z: &TubePoint,
    params: &ParameterSet,
    f: &dyn TubeFunction,
    proposal: &SamplerSpec,
    budget: u64,
    seed: u64,
) -> Result<IntegralEstimate> {
    let est = kernel_integral(z, &shifted_values(&params.b), &shifted_values(&params.c), f, proposal, budget, seed)?;
    let ln_a = ln_delta_raw(z.imag_part.coords(), &shifted_values(&params.a)).ok_or_else(|| Error::NotInCone("Im z".into()))?;
    Ok(scale_estimate(est, ln_a.exp()))
}

/// Proposal for `Tf_R(z)`: the tube-product preset of the closed-form case.
pub fn fr_proposal(z: &TubePoint, params: &ParameterSet, tf: &TestFunctionFR) -> Result<SamplerSpec> {
    preset_sampler(&tf_case(z, params, tf)?)
}

/// Monte Carlo `Tf_R(z)`.
pub fn apply_t_numeric_fr(z: &TubePoint, params: &ParameterSet, tf: &TestFunctionFR, budget: u64, seed: u64) -> Result<IntegralEstimate> {
    check_ranges(&tf_case(z, params, tf)?)?;
    apply_t_numeric(z, params, tf, &fr_proposal(z, params, tf)?, budget, seed)
}

/// Monte Carlo `T*f(z) = Δ^{b-α}(Im z) ∫ Δ^{a+β}(Im w) f(w) / P^c(z - w̄) dV(w)`.
pub fn dual_operator_eval(
    z: &TubePoint,
    params: &ParameterSet,
    f: &dyn TubeFunction,
    proposal: &SamplerSpec,
    budget: u64,
    seed: u64,
) -> Result<IntegralEstimate> {
    apply_t_numeric(z, &dual_parameters(params), f, proposal, budget, seed)
}

fn scale_estimate(est: IntegralEstimate, k: f64) -> IntegralEstimate {
    IntegralEstimate { value: est.value * k, std_error: est.std_error * k, ..est }
}

/// Parameters of `T*` written as an operator of the same shape:
/// `a' = b - α`, `b' = a + β`, weights exchanged.
pub fn dual_parameters(params: &ParameterSet) -> ParameterSet {
    let a = params.b.zip_with(&params.alpha, |x, y| x - y).expect("same length");
    let b = params.a.zip_with(&params.beta, |x, y| x + y).expect("same length");
    ParameterSet { a, b, alpha: params.beta.clone(), beta: params.alpha.clone(), ..params.clone() }
}

// ---- norms and scaling ----

/// Monte Carlo `‖f_R‖_{L^p_α}` with its standard error.
pub fn f_r_norm_numeric(params: &ParameterSet, tf: &TestFunctionFR, budget: u64, seed: u64) -> Result<(f64, f64)> {
    let case = fr_norm_case(params, tf)?;
    check_ranges(&case)?;
    let p = params.p;
    let al = params.alpha.entries().to_vec();
    let est = mc_integrate_tube(
        |x, y| {
            let v = LogValue::from_value(tf.eval(x, y));
            match ln_delta_raw(y, &al) {
                Some(w) => LogValue::positive(p * v.ln_abs + w),
                None => LogValue::positive(f64::NAN),
            }
        },
        &preset_sampler(&case)?,
        budget,
        seed,
    )?;
    Ok(root_with_error(est, p))
}

/// Monte Carlo `‖Tf_R‖_{L^q_β}` over the derived closed form of `Tf_R`.
pub fn tf_r_norm_numeric(params: &ParameterSet, tf: &TestFunctionFR, budget: u64, seed: u64) -> Result<(f64, f64)> {
    let tcase = tf_case(&TubePoint::imaginary(ConePoint::identity(params.n)), params, tf)?;
    check_ranges(&tcase)?;
    let case = tf_norm_case(params, tf)?;
    check_ranges(&case)?;
    let q = params.q;
    let a = shifted_values(&params.a);
    let beta = params.beta.entries().to_vec();
    let e = tf_exponent(params, tf);
    let bl: Vec<f64> = shifted_values(&params.b).iter().zip(tf.l.entries()).map(|(b, l)| b + l).collect();
    let k = tube_product_true_constant(&bl, &shifted_values(&params.c), tf.r.entries());
    if k.sign <= 0 {
        return Err(Error::InvalidInput("derived image constant is not positive".into()));
    }
    let radius = tf.radius.clone();
    let est = mc_integrate_tube(
        |x, y| {
            let (Some(wa), Some(wb)) = (ln_delta_raw(y, &a), ln_delta_raw(y, &beta)) else {
                return LogValue::positive(f64::NAN);
            };
            let mut shifted = y.to_vec();
            for (s, r) in shifted.iter_mut().zip(&radius) {
                *s += r;
            }
            let ln_abs = k.log + wa + ln_abs_complex_power_raw(x, &shifted, &e);
            LogValue::positive(q * ln_abs + wb)
        },
        &preset_sampler(&case)?,
        budget,
        seed,
    )?;
    Ok(root_with_error(est, q))
}

fn root_with_error(est: IntegralEstimate, p: f64) -> (f64, f64) {
    let v = est.value.re;
    let norm = v.powf(1.0 / p);
    (norm, norm * est.std_error / (p * v))
}

/// Least-squares slope of `y` on `x` and its standard error from per-point
/// errors `σ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub value: f64,
    pub std_error: f64,
}

pub fn ols_slope(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<Slope> {
    if x.len() < 2 || x.len() != y.len() || y.len() != sigma.len() {
        return Err(Error::InvalidInput("slope fit needs at least two matching points".into()));
    }
    let nf = x.len() as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("slope fit needs distinct abscissae".into()));
    }
    let value = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let var: f64 = x.iter().zip(sigma).map(|(a, s)| ((a - mx) / sxx * s).powi(2)).sum();
    Ok(Slope { value, std_error: var.sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    /// Zero-based coordinate whose `R_j` varies.
    pub coordinate: usize,
    pub radius: f64,
    pub f_norm: f64,
    pub f_sigma: f64,
    pub tf_norm: f64,
    pub tf_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub params: ParameterSet,
    pub test_function: TestFunctionFR,
    pub rows: Vec<ScalingRow>,
    pub f_slopes: Vec<Slope>,
    pub tf_slopes: Vec<Slope>,
    /// `tf_slope - f_slope` per coordinate.
    pub slope_difference: Vec<Slope>,
    pub f_law: NormLaw,
    pub tf_law: NormLaw,
    /// Whether each fitted difference vanishes within `max(3σ, SLOPE_FLOOR)`.
    pub difference_vanishes: Vec<bool>,
}

fn coordinate_seed(seed: u64, coordinate: usize, point: usize) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul((coordinate * 1024 + point + 1) as u64))
}

/// Estimates both norms along a geometric `R` grid, one coordinate at a time
/// with the others held at 1, and fits log-log slopes.
pub fn scaling_experiment(params: &ParameterSet, tf: &TestFunctionFR, grid: &[f64], budget: u64, seed: u64) -> Result<ScalingReport> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("scaling grid needs at least two radii".into()));
    }
    if grid.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidInput("scaling grid must be positive".into()));
    }
    let n = params.n;
    let f_law = f_r_norm_closed(params, tf)?;
    let tf_law = tf_r_norm_exponents(params, tf)?;
    let mut rows = Vec::new();
    let (mut f_slopes, mut tf_slopes, mut diffs, mut vanish) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for coordinate in 0..n {
        let (mut xs, mut fy, mut fs, mut ty, mut ts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (k, &g) in grid.iter().enumerate() {
            let mut radius = vec![1.0; n];
            radius[coordinate] = g;
            let tfr = tf.with_radius(radius)?;
            let s = coordinate_seed(seed, coordinate, k);
            let (f_norm, f_sigma) = f_r_norm_numeric(params, &tfr, budget, s)?;
            let (tf_norm, tf_sigma) = tf_r_norm_numeric(params, &tfr, budget, s ^ 0x5555)?;
            xs.push(g.ln());
            fy.push(f_norm.ln());
            fs.push(f_sigma / f_norm);
            ty.push(tf_norm.ln());
            ts.push(tf_sigma / tf_norm);
            rows.push(ScalingRow { coordinate, radius: g, f_norm, f_sigma, tf_norm, tf_sigma });
        }
        let fsl = ols_slope(&xs, &fy, &fs)?;
        let tsl = ols_slope(&xs, &ty, &ts)?;
        let dy: Vec<f64> = ty.iter().zip(&fy).map(|(a, b)| a - b).collect();
        let ds: Vec<f64> = ts.iter().zip(&fs).map(|(a, b)| a.hypot(*b)).collect();
        let d = ols_slope(&xs, &dy, &ds)?;
        vanish.push(d.value.abs() <= (Z_THRESHOLD * d.std_error).max(SLOPE_FLOOR));
        f_slopes.push(fsl);
        tf_slopes.push(tsl);
        diffs.push(d);
    }
    Ok(ScalingReport {
        params: params.clone(),
        test_function: tf.clone(),
        rows,
        f_slopes,
        tf_slopes,
        slope_difference: diffs,
        f_law,
        tf_law,
        difference_vanishes: vanish,
    })
}

// ---- membership probes and duality ----

/// Divergence probe of `‖f_R‖_p^p`.
pub fn norm_divergence_probe(params: &ParameterSet, tf: &TestFunctionFR, budget: u64, seed: u64) -> Result<DivergenceProbe> {
    let case = fr_norm_case(params, tf)?;
    tube_abs_divergence_probe(&TubePoint::imaginary(tf.radius_point()), &case.literal(0), &case.literal(1), budget, seed)
}

/// Both sides of `⟨Tf, g⟩_β = ⟨f, T*g⟩_α` for two test functions, each side a
/// Monte Carlo integral over closed-form inner integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub left: IntegralEstimate,
    pub right: IntegralEstimate,
    pub z_score: f64,
}

pub fn duality_check(params: &ParameterSet, f: &TestFunctionFR, g: &TestFunctionFR, budget: u64, seed: u64) -> Result<DualityReport> {
    let n = params.n;
    let m = 2 * n - 1;
    let dual = dual_parameters(params);
    let probe_z = TubePoint::imaginary(ConePoint::identity(n));
    check_ranges(&tf_case(&probe_z, params, f)?)?;
    check_ranges(&tf_case(&probe_z, &dual, g)?)?;
    let beta = params.beta.entries().to_vec();
    let alpha = params.alpha.entries().to_vec();
    let t_f = |x: &[f64], y: &[f64]| -> Option<Complex64> {
        let z = TubePoint::new(x.to_vec(), ConePoint::new(y.to_vec()).ok()?).ok()?;
        apply_t_closed(&z, params, f).ok().map(|v| v.corrected)
    };
    let t_star_g = |x: &[f64], y: &[f64]| -> Option<Complex64> {
        let z = TubePoint::new(x.to_vec(), ConePoint::new(y.to_vec()).ok()?).ok()?;
        apply_t_closed(&z, &dual, g).ok().map(|v| v.corrected)
    };
    let proposal = |first: &TestFunctionFR, second: &TestFunctionFR, set: &ParameterSet, weight: &[f64]| -> Result<SamplerSpec> {
        // |T first| ~ Δ^{a}(y) |P^{e}(z + iR)|, second ~ Δ^{l}(y) |P^{-r}(z + iR')|
        let e = tf_exponent(set, first);
        let a = shifted_values(&set.a);
        let l: Vec<f64> = (0..n).map(|k| a[k] + second.l.entries()[k] + weight[k]).collect();
        let r: Vec<f64> = (0..n).map(|k| second.r.entries()[k] - e[k]).collect();
        let y: Vec<f64> = first.radius.iter().zip(&second.radius).map(|(u, v)| 0.5 * (u + v)).collect();
        Ok(SamplerSpec::TubeAbs { x: vec![0.0; m], y: ConePoint::diagonal(&y)?, l, r })
    };
    let left_spec = proposal(f, g, params, &beta)?;
    let right_spec = proposal(g, f, &dual, &alpha)?;
    let left = pairing(&t_f, g, &beta, &left_spec, budget, seed)?;
    // ⟨f, T*g⟩ = conj ∫ T*g · conj(f) Δ^α
    let right_raw = pairing(&t_star_g, f, &alpha, &right_spec, budget, seed ^ 0xA5A5)?;
    let right = IntegralEstimate { value: right_raw.value.conj(), ..right_raw };
    let sigma = left.std_error.hypot(right.std_error);
    let z_score = (left.value - right.value).norm() / sigma;
    Ok(DualityReport { left, right, z_score })
}

/// `∫ outer · conj(inner) · Δ^weight` over the tube.
fn pairing<F>(outer: &F, inner: &TestFunctionFR, weight: &[f64], spec: &SamplerSpec, budget: u64, seed: u64) -> Result<IntegralEstimate>
where
    F: Fn(&[f64], &[f64]) -> Option<Complex64> + Sync,
{
    mc_integrate_tube(
        |x, y| {
            let (Some(a), Some(w)) = (outer(x, y), ln_delta_raw(y, weight)) else { return LogValue::positive(f64::NAN) };
            let v = LogValue::from_value(a * inner.eval(x, y).conj());
            LogValue { ln_abs: v.ln_abs + w, ..v }
        },
        spec,
        budget,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_tf() -> TestFunctionFR {
        TestFunctionFR::new(MultiIndex::shifted([2.0, 2.0]), MultiIndex::shifted([4.0, 4.0]), vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn exponent_condition_examples() {
        assert_eq!(necessary_exponent_condition(&ParameterSet::worked()), vec![3.0, 3.0]);
        let p = ParameterSet::new(
            1.5,
            3.0,
            MultiIndex::plain([0.5]),
            MultiIndex::plain([1.0]),
            MultiIndex::plain([0.0]),
            MultiIndex::plain([0.0]),
            MultiIndex::plain([1.0]),
        )
        .unwrap();
        assert!((necessary_exponent_condition(&p)[0] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(corrected_exponent_condition(&ParameterSet::worked()), vec![3.0, 3.0]);
    }

    #[test]
    fn worked_norm_laws() {
        let params = ParameterSet::worked();
        let tf = worked_tf();
        let f = f_r_norm_closed(&params, &tf).unwrap();
        assert_eq!(f.exponents, vec![-0.5, -0.5]);
        assert_eq!(f.corrected_exponents, vec![-0.5, -0.5]);
        let t = tf_r_norm_exponents(&params, &tf).unwrap();
        assert_eq!(t.exponents, vec![-0.5, -0.5]);
        assert_eq!(t.corrected_exponents, vec![-0.5, -0.5]);
    }

    #[test]
    fn admissible_pairs_satisfy_every_condition() {
        let params = ParameterSet::worked();
        let (l, r) = admissible_lr(&params).unwrap();
        assert!(fr_conditions(&params, &l.to_plain(), &r.to_plain()).unwrap().iter().all(|c| c.satisfied));
        assert_eq!(fr_conditions(&params, &l.to_plain(), &r.to_plain()).unwrap().len(), 6);
    }

    #[test]
    fn f_r_scalar_value() {
        let tf = TestFunctionFR::new(MultiIndex::shifted([0.0]), MultiIndex::shifted([2.0]), vec![1.0]).unwrap();
        let w = TubePoint::imaginary(ConePoint::identity(1));
        let v = f_r_eval(&w, &tf).unwrap();
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn slope_fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 0.5 * v).collect();
        let s = ols_slope(&x, &y, &[0.01; 4]).unwrap();
        assert!((s.value + 0.5).abs() < 1e-15);
        assert!(ols_slope(&[1.0], &[1.0], &[0.1]).is_err());
    }
}
