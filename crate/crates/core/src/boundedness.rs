//! Necessary and sufficient parameter conditions for boundedness of `T`, the
//! Schur-test witness `(t, r, l)` and a Monte Carlo check of the two Schur
//! integrals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{delta_power, ConePoint, Convention, MultiIndex, TubePoint};
use crate::error::{Error, Result};
use crate::identities::{check_ranges, j_vector, IdentityCase, IdentityId, IdentityPoint};
use crate::operator::{necessary_exponent_condition, Condition, ParameterSet, EQUALITY_TOLERANCE};
use crate::oracle::{effective_sigma, mc_lhs, tube_abs_divergence_probe, DivergenceProbe, Z_THRESHOLD};

/// Tolerance of the algebraic witness identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Bounded,
    Unbounded,
    /// The sufficient conditions hold while a necessary one fails.
    Conflict,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bounded => "BOUNDED",
            Self::Unbounded => "UNBOUNDED",
            Self::Conflict => "CONFLICT",
            Self::Undetermined => "UNDETERMINED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub necessary: Vec<Condition>,
    pub sufficient: Vec<Condition>,
}

fn coord_label(n: usize, j: usize) -> String {
    if j + 1 == n {
        "n".into()
    } else {
        (j + 1).to_string()
    }
}

fn equality_condition(params: &ParameterSet, j: usize) -> Condition {
    let forced = necessary_exponent_condition(params)[j];
    let c = params.c.entries()[j];
    let tol = EQUALITY_TOLERANCE * forced.abs().max(1.0);
    Condition::equal(format!("c_{} = a + b + n + 1 + (beta+n+1)/q - (alpha+n+1)/p", coord_label(params.n, j)), c, forced, tol)
}

/// Necessary conditions: per coordinate two strict inequalities and the
/// exponent equality.
pub fn necessary_conditions(params: &ParameterSet) -> Vec<Condition> {
    let (n, p, q) = (params.n, params.p, params.q);
    let nf = params.nf();
    let (al, be, a, b) = (params.alpha.entries(), params.beta.entries(), params.a.entries(), params.b.entries());
    let mut out = Vec::new();
    for j in 0..n {
        let k = coord_label(n, j);
        let w = if j + 1 < n { (nf + 1.0) / 2.0 } else { 1.0 };
        let ws = if j + 1 < n { "(n+1)/2" } else { "1" };
        out.push(Condition::less(format!("-a_{k} q < beta_{k} + {ws}"), -a[j] * q, be[j] + w));
        out.push(Condition::less(format!("alpha_{k} + {ws} < p (b_{k} + {ws})"), al[j] + w, p * (b[j] + w)));
        out.push(equality_condition(params, j));
    }
    out
}

/// Sufficient conditions: `c_j > n`, two strict inequalities and the exponent
/// equality per coordinate.
pub fn sufficient_conditions(params: &ParameterSet) -> Vec<Condition> {
    let (n, p, q) = (params.n, params.p, params.q);
    let nf = params.nf();
    let (al, be, a, b, c) = (params.alpha.entries(), params.beta.entries(), params.a.entries(), params.b.entries(), params.c.entries());
    let spread = (1.0 / (2.0 * q) + 1.0 / (2.0 * p)) * (1.0 - nf);
    let mut out = Vec::new();
    for j in 0..n {
        let k = coord_label(n, j);
        out.push(Condition::greater(format!("c_{k} > n"), c[j], nf));
        if j + 1 < n {
            out.push(Condition::less(
                format!("alpha_{k} + 1 < p ((1/(2q) + 1/(2p))(1-n) + b_{k} + (n+1)/2)"),
                al[j] + 1.0,
                p * (spread + b[j] + (nf + 1.0) / 2.0),
            ));
            out.push(Condition::greater(format!("beta_{k} + 1 > q ((1/(2q) + 1/(2p))(1-n) - a_{k})"), be[j] + 1.0, q * (spread - a[j])));
        } else {
            out.push(Condition::less("alpha_n + 1 < p (b_n + 1)", al[j] + 1.0, p * (b[j] + 1.0)));
            out.push(Condition::less("-a_n q < beta_n + 1", -a[j] * q, be[j] + 1.0));
        }
        out.push(equality_condition(params, j));
    }
    out
}

fn all_hold(conds: &[Condition]) -> bool {
    conds.iter().all(|c| c.satisfied)
}

/// A failed strict inequality that sits on its boundary.
fn on_boundary(c: &Condition) -> bool {
    !c.satisfied && c.margin.abs() <= EQUALITY_TOLERANCE * c.margin.abs().max(1.0)
}

pub fn classify(params: &ParameterSet) -> ClassificationResult {
    let necessary = necessary_conditions(params);
    let sufficient = sufficient_conditions(params);
    let t1 = all_hold(&necessary);
    let t2 = all_hold(&sufficient);
    let strictly_violated = necessary.iter().any(|c| !c.satisfied && !on_boundary(c));
    let verdict = match (t2, t1) {
        (true, true) => Verdict::Bounded,
        (true, false) => Verdict::Conflict,
        (false, false) if strictly_violated => Verdict::Unbounded,
        _ => Verdict::Undetermined,
    };
    ClassificationResult { verdict, necessary, sufficient }
}

// ---- Schur witness ----

/// Per-coordinate interval endpoints of the witness construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessBounds {
    pub a: f64,
    /// The lower endpoint exactly as displayed for `j = n`; it omits the `-1`
    /// of the convergence condition and can exceed `d`.
    pub a_displayed: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl WitnessBounds {
    fn lower(&self) -> f64 {
        self.a.max(self.c)
    }

    fn upper(&self) -> f64 {
        self.b.min(self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurWitness {
    pub params: ParameterSet,
    pub t: f64,
    pub t_interval: (f64, f64),
    pub c_prime: f64,
    /// Plain `r` and `l`; `φ₁ = Δ^r`, `φ₂ = Δ^l` use their shifted forms.
    pub r: MultiIndex,
    pub l: MultiIndex,
    pub bounds: Vec<WitnessBounds>,
    /// Residuals of `-t p'(c - b - a + α) + p' r + α + n + 1 - p' l` and
    /// `q(a - c + b - α) + t q(c - a - b + α) + q l + β + n + 1 - q r`.
    pub residuals: Vec<(f64, f64)>,
}

impl SchurWitness {
    pub fn identities_hold(&self) -> bool {
        self.residuals.iter().all(|(u, v)| u.abs() <= IDENTITY_TOLERANCE && v.abs() <= IDENTITY_TOLERANCE)
    }
}

/// `(max_j (n/c_j - n/(p c_j)), min_j (1 - n/(q c_j)))`.
pub fn t_interval(params: &ParameterSet) -> (f64, f64) {
    let nf = params.nf();
    let lo = params.c.entries().iter().map(|c| nf / c - nf / (params.p * c)).fold(f64::NEG_INFINITY, f64::max);
    let hi = params.c.entries().iter().map(|c| 1.0 - nf / (params.q * c)).fold(f64::INFINITY, f64::min);
    (lo, hi)
}

/// Endpoints at splitting exponent `t`. For `j < n` the offsets `(1, n + 1)`
/// become `((n+1)/2, (3n+1)/2)`.
pub fn witness_bounds(params: &ParameterSet, t: f64) -> Vec<WitnessBounds> {
    let (n, p, q) = (params.n, params.p, params.q);
    let nf = params.nf();
    let (al, b, c) = (params.alpha.entries(), params.b.entries(), params.c.entries());
    (0..n)
        .map(|j| {
            let (low, gap) = if j + 1 < n { ((nf + 1.0) / 2.0, (3.0 * nf + 1.0) / 2.0) } else { (1.0, nf + 1.0) };
            let k = c[j] - b[j] + al[j];
            let pp = 1.0 - 1.0 / p;
            WitnessBounds {
                a: -(low + al[j]) * pp - t * (b[j] - al[j]),
                a_displayed: -al[j] + al[j] / p + t * al[j] - t * b[j],
                b: t * k - (al[j] + gap) * pp,
                c: (nf + 1.0 - low) / q + (t - 1.0) * k,
                d: (1.0 - t) * (b[j] - al[j]) + (nf + 1.0 - gap) / q,
            }
        })
        .collect()
}

/// Builds `(t, r, l)` at the midpoints of the admissible intervals and checks
/// both algebraic identities.
pub fn schur_witness(params: &ParameterSet) -> Result<SchurWitness> {
    params.validate()?;
    let failed: Vec<String> = sufficient_conditions(params).into_iter().filter(|c| !c.satisfied).map(|c| c.id).collect();
    if !failed.is_empty() {
        return Err(Error::Infeasible { binding: failed });
    }
    let (lo, hi) = t_interval(params);
    if !(lo < hi) {
        return Err(Error::Construction(format!("empty t-interval ({lo}, {hi})")));
    }
    let t = 0.5 * (lo + hi);
    let bounds = witness_bounds(params, t);
    let (n, p, q) = (params.n, params.p, params.q);
    let nf = params.nf();
    let pd = p / (p - 1.0);
    let (al, be, a, b, c) = (params.alpha.entries(), params.beta.entries(), params.a.entries(), params.b.entries(), params.c.entries());
    let mut r = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut residuals = Vec::new();
    for j in 0..n {
        let w = &bounds[j];
        if !(w.lower() < w.upper()) {
            return Err(Error::Construction(format!(
                "empty (A, B) ∩ (C, D) at j = {}: A = {}, B = {}, C = {}, D = {}",
                j + 1,
                w.a,
                w.b,
                w.c,
                w.d
            )));
        }
        r[j] = 0.5 * (w.lower() + w.upper());
        let k = c[j] - b[j] - a[j] + al[j];
        l[j] = r[j] + k - t * k - (be[j] + nf + 1.0) / q;
        residuals.push((
            -t * pd * k + pd * r[j] + al[j] + nf + 1.0 - pd * l[j],
            q * (a[j] - c[j] + b[j] - al[j]) + t * q * k + q * l[j] + be[j] + nf + 1.0 - q * r[j],
        ));
    }
    let c_prime = c.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SchurWitness {
        params: params.clone(),
        t,
        t_interval: (lo, hi),
        c_prime,
        r: MultiIndex::new(r, Convention::Plain)?,
        l: MultiIndex::new(l, Convention::Plain)?,
        bounds,
        residuals,
    })
}

// ---- numeric Schur check ----

/// The two Schur integrals in tube-abs form, literal indices. The first is
/// over `w` at fixed `z`, the second over `z` at fixed `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurIntegrals {
    /// `t p'(b - α) + p' r + α`, `t p' c`; outer factor `Δ^{t p' a}`.
    pub first: (Vec<f64>, Vec<f64>),
    pub first_outer: Vec<f64>,
    /// `φ₂^{p'}` exponent `p' l`.
    pub first_target: Vec<f64>,
    /// `q(1-t) a + q l + β`, `q(1-t) c`; outer factor `Δ^{q(1-t)(b - α)}`.
    pub second: (Vec<f64>, Vec<f64>),
    pub second_outer: Vec<f64>,
    /// `φ₁^q` exponent `q r`.
    pub second_target: Vec<f64>,
}

impl SchurIntegrals {
    /// Exponent of `Δ(Im ·)` left in each ratio under the derived law
    /// `∫ = K Δ^{l - r + 2J}`; zero when the ratio is point-independent.
    pub fn exponent_gaps(&self) -> (Vec<f64>, Vec<f64>) {
        let j = j_vector(self.first_target.len());
        let gap = |(l, r): &(Vec<f64>, Vec<f64>), outer: &[f64], target: &[f64]| -> Vec<f64> {
            (0..j.len()).map(|k| outer[k] + l[k] - r[k] + 2.0 * j[k] - target[k]).collect()
        };
        (gap(&self.first, &self.first_outer, &self.first_target), gap(&self.second, &self.second_outer, &self.second_target))
    }
}

pub fn schur_integrals(w: &SchurWitness) -> SchurIntegrals {
    let pr = &w.params;
    let (p, q, t) = (pr.p, pr.q, w.t);
    let pd = p / (p - 1.0);
    let lit = |m: &MultiIndex| m.to_shifted().entries().to_vec();
    let (a, b, c, r, l) = (lit(&pr.a), lit(&pr.b), lit(&pr.c), lit(&w.r), lit(&w.l));
    let (al, be) = (pr.alpha.entries(), pr.beta.entries());
    let n = pr.n;
    SchurIntegrals {
        first: ((0..n).map(|k| t * pd * (b[k] - al[k]) + pd * r[k] + al[k]).collect(), c.iter().map(|v| t * pd * v).collect()),
        first_outer: a.iter().map(|v| t * pd * v).collect(),
        first_target: l.iter().map(|v| pd * v).collect(),
        second: ((0..n).map(|k| q * (1.0 - t) * a[k] + q * l[k] + be[k]).collect(), c.iter().map(|v| q * (1.0 - t) * v).collect()),
        second_outer: (0..n).map(|k| q * (1.0 - t) * (b[k] - al[k])).collect(),
        second_target: r.iter().map(|v| q * v).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub point: TubePoint,
    pub ratio: f64,
    pub std_error: f64,
}

/// Ratios `∫ / φ^{power}` at random points for one of the two integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub samples: Vec<RatioSample>,
    /// Inverse-variance weighted mean ratio (the Schur constant).
    pub mean: f64,
    /// Largest `|ratio - mean| / σ` over the samples.
    pub max_z: f64,
    pub consistent: bool,
    /// Set when the integral is outside its convergence range.
    pub divergence: Option<DivergenceProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub integrals: SchurIntegrals,
    pub exponent_gaps: (Vec<f64>, Vec<f64>),
    pub first: RatioCheck,
    pub second: RatioCheck,
}

impl SchurReport {
    pub fn pass(&self) -> bool {
        self.first.consistent && self.second.consistent
    }
}

/// Random tube point with `Im` in a moderate box of the cone.
pub fn random_tube_point(n: usize, rng: &mut ChaCha8Rng) -> TubePoint {
    let head: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.5..2.0)).collect();
    let border: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-0.4..0.4)).collect();
    let d = rng.random_range(0.5..2.0);
    let y = ConePoint::from_canonical(&head, &border, d).expect("positive canonical data");
    let x = (0..2 * n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    TubePoint::new(x, y).expect("dimensions agree")
}

fn ratio_check(
    points: &[TubePoint],
    (l, r): &(Vec<f64>, Vec<f64>),
    outer: &[f64],
    target: &[f64],
    budget: u64,
    seed: u64,
) -> Result<RatioCheck> {
    let idx = |v: &[f64]| MultiIndex::new(v.to_vec(), Convention::Shifted);
    let mk = |z: &TubePoint| IdentityCase::new(IdentityId::TubeAbs, vec![idx(l)?, idx(r)?], IdentityPoint::Tube { point: z.clone() });
    if check_ranges(&mk(&points[0])?).is_err() {
        let probe = tube_abs_divergence_probe(&points[0], l, r, budget.max(1000) / 16 + 1, seed)?;
        return Ok(RatioCheck { samples: Vec::new(), mean: f64::NAN, max_z: f64::NAN, consistent: false, divergence: Some(probe) });
    }
    let mut samples = Vec::new();
    for (k, z) in points.iter().enumerate() {
        let est = mc_lhs(&mk(z)?, budget, seed.wrapping_add(k as u64 + 1))?;
        let scale = |e: &[f64]| delta_power(&z.imag_part, &MultiIndex::new(e.to_vec(), Convention::Shifted)?);
        let factor = scale(outer)? / scale(target)?;
        samples.push(RatioSample { point: z.clone(), ratio: est.value.re * factor, std_error: effective_sigma(&est) * factor });
    }
    let wsum: f64 = samples.iter().map(|s| s.std_error.powi(-2)).sum();
    let mean = samples.iter().map(|s| s.ratio * s.std_error.powi(-2)).sum::<f64>() / wsum;
    let max_z = samples.iter().map(|s| (s.ratio - mean).abs() / s.std_error).fold(0.0, f64::max);
    Ok(RatioCheck { samples, mean, max_z, consistent: max_z <= Z_THRESHOLD, divergence: None })
}

/// Monte Carlo check that both Schur integrals are proportional to the test
/// functions, `∫ H^{tp'} φ₁^{p'} dV_α ∝ φ₂^{p'}` and
/// `∫ H^{q(1-t)} φ₂^q dV_β ∝ φ₁^q`, at `sample_count` random points.
pub fn schur_numeric_check(witness: &SchurWitness, sample_count: usize, budget: u64, seed: u64) -> Result<SchurReport> {
    if sample_count < 2 {
        return Err(Error::InvalidInput("need at least two sample points".into()));
    }
    let n = witness.params.n;
    let integrals = schur_integrals(witness);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<TubePoint> = (0..sample_count).map(|_| random_tube_point(n, &mut rng)).collect();
    let first = ratio_check(&points, &integrals.first, &integrals.first_outer, &integrals.first_target, budget, seed ^ 0x1111)?;
    let second = ratio_check(&points, &integrals.second, &integrals.second_outer, &integrals.second_target, budget, seed ^ 0x2222)?;
    Ok(SchurReport { exponent_gaps: integrals.exponent_gaps(), integrals, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> ParameterSet {
        ParameterSet::worked()
    }

    #[test]
    fn worked_set_is_bounded() {
        let r = classify(&worked());
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_eq!(r.necessary.len(), 6);
        assert_eq!(r.sufficient.len(), 8);
    }

    #[test]
    fn equality_margin_is_signed() {
        let p = worked().with_c(MultiIndex::plain([3.0, 3.5])).unwrap();
        let t1 = necessary_conditions(&p);
        let bad: Vec<_> = t1.iter().filter(|c| !c.satisfied).collect();
        assert_eq!(bad.len(), 1);
        assert!((bad[0].margin - 0.5).abs() < 1e-15);
        assert_eq!(classify(&p).verdict, Verdict::Unbounded);
    }

    #[test]
    fn worked_witness() {
        let w = schur_witness(&worked()).unwrap();
        assert!((w.t_interval.0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((w.t_interval.1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.t - 0.5).abs() < 1e-15);
        assert!(w.identities_hold());
    }
}
