//! The Gamma-function constants `C_1 … C_8` attached to the cone integral
//! identities, evaluated in log space.
//!
//! `C_1`/`C_2` take plain indices. `C_3 … C_8` take shifted indices and apply
//! their literal entries; `C_3(s') = C_1(s')` and `C_4(s') = C_2(s')` as
//! functions of the literal exponent vector, which is what the displayed
//! formulas in plain components reduce to.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{shift_offset, Convention, MultiIndex};
use crate::error::{Error, RangeCheck, Result};
use crate::special::{ln_pi, SignedLog, LN_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstantFamily {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
}

impl ConstantFamily {
    pub fn arity(self) -> usize {
        match self {
            Self::C1 | Self::C2 | Self::C3 | Self::C4 | Self::C6 => 1,
            Self::C5 | Self::C8 => 2,
            Self::C7 => 3,
        }
    }

    pub fn convention(self) -> Convention {
        match self {
            Self::C1 | Self::C2 => Convention::Plain,
            _ => Convention::Shifted,
        }
    }
}

/// Indices in the order the family names them:
/// `C5(r, η)`, `C6(r)`, `C7(l, r, η)`, `C8(l, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRequest {
    pub family: ConstantFamily,
    pub indices: Vec<MultiIndex>,
}

impl ConstantRequest {
    pub fn new(family: ConstantFamily, indices: Vec<MultiIndex>) -> Self {
        Self { family, indices }
    }

    pub fn n(&self) -> usize {
        self.indices.first().map_or(0, MultiIndex::n)
    }

    fn validate(&self) -> Result<()> {
        if self.indices.len() != self.family.arity() {
            return Err(Error::InvalidInput(format!(
                "{:?} takes {} indices, got {}",
                self.family,
                self.family.arity(),
                self.indices.len()
            )));
        }
        let n = self.n();
        for idx in &self.indices {
            idx.expect(self.family.convention())?;
            if idx.n() != n {
                return Err(Error::InvalidInput("indices of different length".into()));
            }
        }
        Ok(())
    }
}

// ---- raw signed evaluations on literal exponent vectors ----

pub(crate) fn c1_raw(s: &[f64]) -> SignedLog {
    let n = s.len();
    let sn = s[n - 1];
    let sum: f64 = s.iter().sum();
    let mut v = SignedLog::ONE.mul_gamma(sn + 1.0);
    for &sj in &s[..n - 1] {
        v = v.mul_gamma(sj + 1.5);
    }
    SignedLog { log: v.log - (2.0 * sn + n as f64 + 1.0) * LN_2 - (sum + (3.0 * n as f64 - 1.0) / 2.0) * ln_pi(), sign: v.sign }
}

pub(crate) fn c2_raw(s: &[f64]) -> SignedLog {
    let n = s.len();
    let nf = n as f64;
    let sn = s[n - 1];
    let sum: f64 = s.iter().sum();
    let mut v = SignedLog::ONE.mul_gamma(sn + nf + 1.0).div_gamma(sn + 1.0);
    for &sj in &s[..n - 1] {
        v = v.mul_gamma(sj + 2.5).div_gamma(sj + 1.5);
    }
    if v.sign == 0 {
        return v;
    }
    SignedLog { log: v.log + (sum + nf - 1.0) * LN_2 - (2.0 * nf - 1.0) * ln_pi(), sign: v.sign }
}

fn lit_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn lit_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn c5_raw(r: &[f64], eta: &[f64]) -> SignedLog {
    c2_raw(eta) * c2_raw(&lit_sub(r, eta)) / c2_raw(r)
}

pub(crate) fn c6_raw(r: &[f64]) -> SignedLog {
    let n = r.len() as f64;
    let half: Vec<f64> = r.iter().map(|v| v / 2.0).collect();
    let sum: f64 = r.iter().sum();
    let v = c2_raw(r) / c2_raw(&half);
    SignedLog { log: v.log + (-sum + 2.0 * n - 1.0) * LN_2, sign: v.sign }
}

pub(crate) fn c7_raw(l: &[f64], r: &[f64], eta: &[f64]) -> SignedLog {
    c1_raw(l) * c2_raw(&lit_sub(&lit_add(r, l), eta)) / c2_raw(r) / c2_raw(eta)
}

pub(crate) fn c8_raw(l: &[f64], r: &[f64]) -> SignedLog {
    c6_raw(r) * c5_raw(r, l)
}

// ---- range predicates (plain components, as stated) ----

fn plain(idx: &MultiIndex) -> Vec<f64> {
    idx.to_plain().entries().to_vec()
}

fn check_head(check: &mut RangeCheck, name: &str, values: &[f64], bound: f64) {
    for (j, v) in values[..values.len() - 1].iter().enumerate() {
        check.gt(&format!("{name}_{}", j + 1), *v, bound);
    }
}

pub(crate) fn c1_range(s: &[f64]) -> Result<()> {
    let n = s.len();
    let mut c = RangeCheck::new();
    c.gt(&format!("s_{n}"), s[n - 1], -1.0);
    check_head(&mut c, "s", s, -1.5);
    c.finish()
}

pub(crate) fn c2_range(s: &[f64]) -> Result<()> {
    let n = s.len();
    let mut c = RangeCheck::new();
    c.gt(&format!("s_{n}"), s[n - 1], -(n as f64) - 1.0);
    check_head(&mut c, "s", s, -2.5);
    c.finish()
}

pub(crate) fn c3_range(s_plain: &[f64]) -> Result<()> {
    let n = s_plain.len();
    let mut c = RangeCheck::new();
    c.gt(&format!("s_{n}"), s_plain[n - 1], -1.0);
    check_head(&mut c, "s", s_plain, -(n as f64 + 1.0) / 2.0);
    c.finish()
}

pub(crate) fn c4_range(s_plain: &[f64]) -> Result<()> {
    let n = s_plain.len();
    let mut c = RangeCheck::new();
    c.gt(&format!("s_{n}"), s_plain[n - 1], -(n as f64) - 1.0);
    check_head(&mut c, "s", s_plain, -(n as f64 + 3.0) / 2.0);
    c.finish()
}

/// Convergence conditions of the cone shift integral, plain components.
pub(crate) fn c5_range(r: &[f64], eta: &[f64]) -> Result<()> {
    let n = r.len();
    let nf = n as f64;
    let mut c = RangeCheck::new();
    c.gt(&format!("r_{n} - η_{n}"), r[n - 1] - eta[n - 1], (nf + 1.0) / 2.0);
    c.gt(&format!("η_{n}"), eta[n - 1], -1.0);
    c.gt(&format!("r_{n}"), r[n - 1], 0.0);
    for j in 0..n - 1 {
        c.gt(&format!("r_{0} - η_{0}", j + 1), r[j] - eta[j], nf);
        c.gt(&format!("η_{}", j + 1), eta[j], -(nf + 1.0) / 2.0);
        c.gt(&format!("r_{}", j + 1), r[j], (1.0 - nf) / 2.0);
    }
    c.finish()
}

pub(crate) fn c6_range(r: &[f64]) -> Result<()> {
    let n = r.len();
    let mut c = RangeCheck::new();
    c.gt(&format!("r_{n}"), r[n - 1], (n as f64 + 1.0) / 2.0);
    check_head(&mut c, "r", r, 1.5);
    c.finish()
}

pub(crate) fn c7_range(l: &[f64], r: &[f64], eta: &[f64]) -> Result<()> {
    let n = r.len();
    let nf = n as f64;
    let k = n - 1;
    let mut c = RangeCheck::new();
    c.gt(&format!("l_{n}"), l[k], -1.0);
    c.gt(&format!("r_{n}"), r[k], 0.0);
    c.gt(&format!("η_{n}"), eta[k], (nf + 1.0) / 2.0);
    c.gt(&format!("r_{n} + η_{n} - l_{n}"), r[k] + eta[k] - l[k], nf + 1.0);
    for j in 0..k {
        let i = j + 1;
        c.gt(&format!("l_{i}"), l[j], -(nf + 1.0) / 2.0);
        c.gt(&format!("r_{i}"), r[j], (nf - 1.0) / 2.0);
        c.gt(&format!("η_{i}"), eta[j], nf);
        c.gt(&format!("r_{i} + η_{i} - l_{i}"), r[j] + eta[j] - l[j], (3.0 * nf + 1.0) / 2.0);
    }
    c.finish()
}

pub(crate) fn c8_range(l: &[f64], r: &[f64]) -> Result<()> {
    let n = r.len();
    let nf = n as f64;
    let k = n - 1;
    let mut c = RangeCheck::new();
    c.gt(&format!("l_{n}"), l[k], -1.0);
    c.gt(&format!("r_{n} - l_{n}"), r[k] - l[k], nf + 1.0);
    for j in 0..k {
        let i = j + 1;
        c.gt(&format!("l_{i}"), l[j], -(nf + 1.0) / 2.0);
        c.gt(&format!("r_{i} - l_{i}"), r[j] - l[j], (3.0 * nf + 1.0) / 2.0);
    }
    c.finish()
}

fn strict(family: ConstantFamily, v: SignedLog) -> Result<f64> {
    if v.is_positive_finite() {
        Ok(v.log.exp())
    } else {
        Err(Error::domain(vec![format!("{family:?} is not a positive finite number here (a Gamma factor has a pole or is negative)")]))
    }
}

/// Evaluates a constant inside the convergence range of its defining integral.
pub fn constant(req: &ConstantRequest) -> Result<f64> {
    req.validate()?;
    let lit = |i: usize| req.indices[i].entries().to_vec();
    let pl = |i: usize| plain(&req.indices[i]);
    let f = req.family;
    match f {
        ConstantFamily::C1 => {
            c1_range(&lit(0))?;
            strict(f, c1_raw(&lit(0)))
        }
        ConstantFamily::C2 => {
            c2_range(&lit(0))?;
            strict(f, c2_raw(&lit(0)))
        }
        ConstantFamily::C3 => {
            c3_range(&pl(0))?;
            strict(f, c1_raw(&lit(0)))
        }
        ConstantFamily::C4 => {
            c4_range(&pl(0))?;
            strict(f, c2_raw(&lit(0)))
        }
        ConstantFamily::C5 => {
            c5_range(&pl(0), &pl(1))?;
            strict(f, c5_raw(&lit(0), &lit(1)))
        }
        ConstantFamily::C6 => {
            c6_range(&pl(0))?;
            strict(f, c6_raw(&lit(0)))
        }
        ConstantFamily::C7 => {
            c7_range(&pl(0), &pl(1), &pl(2))?;
            strict(f, c7_raw(&lit(0), &lit(1), &lit(2)))
        }
        ConstantFamily::C8 => {
            c8_range(&pl(0), &pl(1))?;
            strict(f, c8_raw(&lit(0), &lit(1)))
        }
    }
}

/// Signed value without range checks (zero at Gamma poles).
pub fn constant_unchecked(req: &ConstantRequest) -> Result<f64> {
    req.validate()?;
    let lit = |i: usize| req.indices[i].entries().to_vec();
    Ok(match req.family {
        ConstantFamily::C1 | ConstantFamily::C3 => c1_raw(&lit(0)),
        ConstantFamily::C2 | ConstantFamily::C4 => c2_raw(&lit(0)),
        ConstantFamily::C5 => c5_raw(&lit(0), &lit(1)),
        ConstantFamily::C6 => c6_raw(&lit(0)),
        ConstantFamily::C7 => c7_raw(&lit(0), &lit(1), &lit(2)),
        ConstantFamily::C8 => c8_raw(&lit(0), &lit(1)),
    }
    .value())
}

pub fn c1(s: &MultiIndex) -> Result<f64> {
    constant(&ConstantRequest::new(ConstantFamily::C1, vec![s.clone()]))
}

pub fn c2(s: &MultiIndex) -> Result<f64> {
    constant(&ConstantRequest::new(ConstantFamily::C2, vec![s.clone()]))
}

pub fn c3(s: &MultiIndex) -> Result<f64> {
    constant(&ConstantRequest::new(ConstantFamily::C3, vec![s.clone()]))
}

pub fn c4(s: &MultiIndex) -> Result<f64> {
    constant(&ConstantRequest::new(ConstantFamily::C4, vec![s.clone()]))
}

// ---- direct (non-log) evaluation, the independent route for the audit ----

fn c1_direct(s: &[f64]) -> f64 {
    let n = s.len();
    let sn = s[n - 1];
    let sum: f64 = s.iter().sum();
    let num = libm::tgamma(sn + 1.0) * s[..n - 1].iter().map(|v| libm::tgamma(v + 1.5)).product::<f64>();
    num / (2f64.powf(2.0 * sn + n as f64 + 1.0) * PI.powf(sum + (3.0 * n as f64 - 1.0) / 2.0))
}

fn c4_direct(s: &[f64]) -> f64 {
    let n = s.len();
    let nf = n as f64;
    let sn = s[n - 1];
    let sum: f64 = s.iter().sum();
    2f64.powf(sum + nf - 1.0) * PI.powf(-2.0 * nf + 1.0) * libm::tgamma(sn + nf + 1.0) / libm::tgamma(sn + 1.0)
        * s[..n - 1].iter().map(|v| libm::tgamma(v + 2.5) / libm::tgamma(v + 1.5)).product::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCheck {
    pub identity: String,
    pub indices: Vec<Vec<f64>>,
    pub composed: f64,
    pub factorwise: f64,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub checks: Vec<ConstantCheck>,
    pub mismatches: usize,
    pub max_rel_error: f64,
}

/// Tolerance of the composition audit.
pub const COMPOSITION_TOLERANCE: f64 = 1e-12;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, width: f64) -> f64 {
    lo + width * rng.random::<f64>()
}

/// Random in-range indices for `C5(r, η)`, `C7(l, r, η)` and `C8(l, r)` at dimension `n`,
/// returned as shifted indices.
fn draw_indices(rng: &mut ChaCha8Rng, n: usize) -> (MultiIndex, MultiIndex, MultiIndex) {
    let nf = n as f64;
    let mut l = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut eta = vec![0.0; n];
    for j in 0..n {
        let last = j + 1 == n;
        // positivity of every C4 factor needs the last literal entry above -1
        l[j] = if last { draw(rng, -0.9, 2.5) } else { draw(rng, -(nf + 1.0) / 2.0 + 0.1, 2.5) };
        eta[j] = if last { draw(rng, (nf + 1.0) / 2.0 + 0.1, 2.5) } else { draw(rng, nf + 0.1, 2.5) };
        let gap = if last { nf + 1.0 } else { (3.0 * nf + 1.0) / 2.0 };
        let rmin = if last { 0.0 } else { (nf - 1.0) / 2.0 };
        let need = (gap + l[j] - eta[j]).max(rmin).max(l[j] + gap).max(eta[j] + if last { (nf + 1.0) / 2.0 } else { nf });
        r[j] = need + draw(rng, 0.1, 2.5);
    }
    let to_shifted = |v: Vec<f64>| MultiIndex::plain(v).to_shifted();
    (to_shifted(l), to_shifted(r), to_shifted(eta))
}

/// Cross-checks the composed constants against factorwise direct evaluation,
/// and `C1(s) = C3(shift s)` at `n = 2`.
pub fn audit_constant_identities(n: usize, trials: usize, seed: u64) -> Result<AuditReport> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidInput(format!("audit dimension must be 1, 2 or 3, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::with_capacity(trials * 4);
    let mut push = |identity: &str, indices: Vec<Vec<f64>>, composed: f64, factorwise: f64, exact: bool| {
        let e = rel(composed, factorwise);
        let pass = if exact { composed == factorwise } else { e <= COMPOSITION_TOLERANCE };
        checks.push(ConstantCheck { identity: identity.into(), indices, composed, factorwise, rel_error: e, pass });
    };
    for _ in 0..trials {
        let (l, r, eta) = draw_indices(&mut rng, n);
        let (ll, rl, el) = (l.entries(), r.entries(), eta.entries());

        let composed = constant(&ConstantRequest::new(ConstantFamily::C5, vec![r.clone(), eta.clone()]))?;
        let factorwise = c4_direct(el) * c4_direct(&lit_sub(rl, el)) / c4_direct(rl);
        push("C5 = C4(r)^-1 C4(eta) C4(r-eta)", vec![rl.to_vec(), el.to_vec()], composed, factorwise, false);

        let composed = c7_raw(ll, rl, el).value();
        let factorwise = c1_direct(ll) * c4_direct(&lit_sub(&lit_add(rl, ll), el)) / (c4_direct(rl) * c4_direct(el));
        push("C7 = C4(r)^-1 C4(eta)^-1 C3(l) C4(r+l-eta)", vec![ll.to_vec(), rl.to_vec(), el.to_vec()], composed, factorwise, false);

        let composed = c8_raw(ll, rl).value();
        let half: Vec<f64> = rl.iter().map(|v| v / 2.0).collect();
        let sum: f64 = rl.iter().sum();
        let c6 = 2f64.powf(-sum + 2.0 * n as f64 - 1.0) * c4_direct(rl) / c4_direct(&half);
        let c5 = c4_direct(ll) * c4_direct(&lit_sub(rl, ll)) / c4_direct(rl);
        push("C8 = C6(r) C5(r,l)", vec![ll.to_vec(), rl.to_vec()], composed, c6 * c5, false);

        if n == 2 {
            let s = MultiIndex::plain(vec![draw(&mut rng, -0.9, 3.0), draw(&mut rng, -0.9, 3.0)]);
            let a = c1(&s)?;
            let b = c3(&s.shift()?)?;
            push("C1(s) = C3(shift s) at n = 2", vec![s.entries().to_vec()], a, b, true);
        }
    }
    let mismatches = checks.iter().filter(|c| !c.pass).count();
    let max_rel_error = checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(AuditReport { n, trials, tolerance: COMPOSITION_TOLERANCE, checks, mismatches, max_rel_error })
}

/// Offset applied by the shifted convention at dimension `n`.
pub fn convention_offset(n: usize) -> f64 {
    shift_offset(n)
}
