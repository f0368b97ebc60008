//! Importance samplers over the cone, its dual and the tube, and the
//! deterministic parallel Monte Carlo driver.
//!
//! Cone samplers draw canonical coordinates `(y_1..y_{n-1}, u_1..u_{n-1}, D)`,
//! which have unit Jacobian against the raw coordinates, at the base point
//! `e = (1, …, 1, 0, …, 0)` and move them with the linear cone automorphism
//! `g_b` taking `e` to `b`:
//!
//! `(y_j, u_j, D) ↦ (a_j y_j, √(a_j a_n) u_j + c_j a_j y_j, a_n D)` with
//! `a_j = b_j`, `c_j = b_{2n-j} / b_j`, `a_n = D_b` and Jacobian
//! `Π a_j^{3/2} · a_n^{(n+1)/2}`.
//!
//! Every proposal reproduces the modulus of its target integrand up to a
//! tempering factor `κ < 1` applied to shapes and degrees of freedom, which
//! keeps the importance weights square integrable (`κ > 1/2`) while leaving the
//! estimator a genuine check of the integrand.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{border_index, ConePoint};
use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Default tempering of proposal shapes.
pub const DEFAULT_TEMPER: f64 = 0.8;

/// Samples per deterministic batch; batch `k` draws from stream `k` of the seed.
pub const BATCH: u64 = 4096;

/// Largest tolerated fraction of non-finite weights.
pub const NON_FINITE_LIMIT: f64 = 1e-3;

// ---- one-dimensional laws with exact log densities ----

#[derive(Debug, Clone, Copy)]
struct GammaLaw {
    shape: f64,
    rate: f64,
    dist: Gamma<f64>,
}

impl GammaLaw {
    fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::Construction(format!("gamma law needs positive shape and rate, got ({shape}, {rate})")));
        }
        let dist = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Construction(e.to_string()))?;
        Ok(Self { shape, rate, dist })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.dist.sample(rng)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln() - self.rate * x
    }
}

/// `X = G_1 / G_2` with unit-rate Gamma laws of shapes `α`, `β`.
#[derive(Debug, Clone, Copy)]
struct BetaPrimeLaw {
    alpha: f64,
    beta: f64,
    num: Gamma<f64>,
    den: Gamma<f64>,
    ln_beta: f64,
}

impl BetaPrimeLaw {
    fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Construction(format!("beta-prime law needs positive shapes, got ({alpha}, {beta})")));
        }
        let num = Gamma::new(alpha, 1.0).map_err(|e| Error::Construction(e.to_string()))?;
        let den = Gamma::new(beta, 1.0).map_err(|e| Error::Construction(e.to_string()))?;
        Ok(Self { alpha, beta, num, den, ln_beta: ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta) })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.num.sample(rng) / self.den.sample(rng)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        (self.alpha - 1.0) * x.ln() - (self.alpha + self.beta) * x.ln_1p() - self.ln_beta
    }
}

/// Centered Student law in `k` dimensions with `ν` degrees of freedom and
/// scale `σ`, density `∝ (1 + |x|²/(νσ²))^{-(ν+k)/2}`.
#[derive(Debug, Clone, Copy)]
struct StudentLaw {
    k: usize,
    nu: f64,
    sigma: f64,
    chi: ChiSquared<f64>,
    ln_norm: f64,
}

impl StudentLaw {
    fn new(k: usize, nu: f64, sigma: f64) -> Result<Self> {
        if !(nu > 0.0 && sigma > 0.0) {
            return Err(Error::Construction(format!("student law needs positive ν and σ, got ({nu}, {sigma})")));
        }
        let chi = ChiSquared::new(nu).map_err(|e| Error::Construction(e.to_string()))?;
        let kf = k as f64;
        let ln_norm = ln_gamma((nu + kf) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * kf * (nu * std::f64::consts::PI * sigma * sigma).ln();
        Ok(Self { k, nu, sigma, chi, ln_norm })
    }

    /// Law with density `∝ (1 + |x|²)^{-e}`, tempered to `κ ν`.
    fn with_exponent(k: usize, exponent: f64, temper: f64) -> Result<Self> {
        let nu = 2.0 * exponent - k as f64;
        if !(nu > 0.0) {
            return Err(Error::Construction(format!("tail exponent {exponent} too small for dimension {k}")));
        }
        Self::new(k, temper * nu, 1.0 / nu.sqrt())
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let w: f64 = self.chi.sample(rng);
        let scale = self.sigma / (w / self.nu).sqrt();
        for v in out.iter_mut().take(self.k) {
            let z: f64 = rng.sample(StandardNormal);
            *v = z * scale;
        }
    }

    fn ln_pdf(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.ln_norm - 0.5 * (self.nu + self.k as f64) * (r2 / (self.nu * self.sigma * self.sigma)).ln_1p()
    }
}

fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var)
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, var: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * z
}

// ---- the cone automorphism g_b ----

/// The linear automorphism of the cone that takes `e` to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    n: usize,
    a: Vec<f64>,
    a_n: f64,
    c: Vec<f64>,
    ln_jacobian: f64,
}

impl GroupAction {
    pub fn to_point(b: &ConePoint) -> Self {
        Self::from_raw(b.coords())
    }

    pub(crate) fn from_raw(b: &[f64]) -> Self {
        let n = b.len().div_ceil(2);
        let a: Vec<f64> = b[..n - 1].to_vec();
        let c: Vec<f64> = (0..n - 1).map(|j| b[border_index(n, j)] / b[j]).collect();
        let a_n = crate::cone::schur_of(b, n);
        let ln_jacobian = a.iter().map(|v| 1.5 * v.ln()).sum::<f64>() + 0.5 * (n as f64 + 1.0) * a_n.ln();
        Self { n, a, a_n, c, ln_jacobian }
    }

    pub fn ln_jacobian(&self) -> f64 {
        self.ln_jacobian
    }

    /// Image of canonical coordinates, returned as canonical coordinates.
    fn apply_canonical(&self, head: &mut [f64], border: &mut [f64], schur: &mut f64) {
        for j in 0..self.n - 1 {
            let y = head[j];
            border[j] = (self.a[j] * self.a_n).sqrt() * border[j] + self.c[j] * self.a[j] * y;
            head[j] = self.a[j] * y;
        }
        *schur *= self.a_n;
    }

    /// Image of an arbitrary vector of `R^m` under the same linear map.
    pub fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; x.len()];
        let mut last = self.a_n * x[n - 1];
        for j in 0..n - 1 {
            let bi = border_index(n, j);
            let root = (self.a[j] * self.a_n).sqrt();
            out[j] = self.a[j] * x[j];
            out[bi] = root * x[bi] + self.c[j] * self.a[j] * x[j];
            last += 2.0 * self.c[j] * root * x[bi] + self.c[j] * self.c[j] * self.a[j] * x[j];
        }
        out[n - 1] = last;
        out
    }
}

fn raw_from_canonical(head: &[f64], border: &[f64], schur: f64) -> Vec<f64> {
    let n = head.len() + 1;
    let mut coords = vec![0.0; 2 * n - 1];
    let mut last = schur;
    for j in 0..n - 1 {
        coords[j] = head[j];
        coords[border_index(n, j)] = border[j];
        last += border[j] * border[j] / head[j];
    }
    coords[n - 1] = last;
    coords
}

// ---- proposal specifications ----

/// Proposal families, one per integrand shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    /// Cone density `∝ e^{-rate·y·t} Δ^s(y)`.
    Laplace { t: ConePoint, s: Vec<f64>, rate: f64 },
    /// Dual-cone density `∝ e^{-rate·y·t} Π p_j^{a_j} t_n^{a_n}`.
    DualLaplace { y: ConePoint, a: Vec<f64>, rate: f64 },
    /// Cone density `∝ Δ^{-r}(y + b) Δ^η(y)`.
    ConeShift { b: ConePoint, r: Vec<f64>, eta: Vec<f64> },
    /// Density on `R^m` `∝ |P^{-r}(x + iv)|`.
    Horizontal { v: ConePoint, r: Vec<f64> },
    /// Tube density `∝ Δ^l(v) |P^{-r}((x_0 - u) + i(y_0 + v))|`.
    TubeAbs { x: Vec<f64>, y: ConePoint, l: Vec<f64>, r: Vec<f64> },
}

impl SamplerSpec {
    pub fn n(&self) -> usize {
        match self {
            Self::Laplace { t, .. } => t.n(),
            Self::DualLaplace { y, .. } => y.n(),
            Self::ConeShift { b, .. } => b.n(),
            Self::Horizontal { v, .. } => v.n(),
            Self::TubeAbs { y, .. } => y.n(),
        }
    }
}

/// One importance draw. Cone samplers fill `y`, the horizontal sampler fills
/// `x`, the tube sampler fills both (`w = x + iy`).
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ln_density: f64,
}

#[derive(Debug, Clone)]
struct LaplaceParts {
    n: usize,
    d: GammaLaw,
    head: Vec<GammaLaw>,
    /// Mean slope and variance factor of `u_j | y_j`.
    mean_slope: Vec<f64>,
    var_factor: f64,
}

#[derive(Debug, Clone)]
struct DualParts {
    n: usize,
    tn: GammaLaw,
    head: Vec<GammaLaw>,
    /// `w_j | t_n ~ N(mean_slope_j t_n, var_slope_j t_n)`.
    mean_slope: Vec<f64>,
    var_slope: Vec<f64>,
}

#[derive(Debug, Clone)]
struct ShiftParts {
    n: usize,
    head: Vec<BetaPrimeLaw>,
    d: BetaPrimeLaw,
    tau: Option<StudentLaw>,
}

#[derive(Debug, Clone)]
struct HorizontalParts {
    n: usize,
    head: Vec<StudentLaw>,
    rho: Option<StudentLaw>,
    tau: StudentLaw,
}

// One instance per sampler; boxing the tube variant buys nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum Parts {
    Laplace(LaplaceParts),
    Dual(DualParts),
    Shift(ShiftParts, GroupAction),
    Horizontal(HorizontalParts, GroupAction),
    Tube { v: ShiftParts, y0: Vec<f64>, x0: Vec<f64>, horizontal: HorizontalParts, y_action: GroupAction },
}

/// A ready-to-draw proposal.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SamplerSpec,
    temper: f64,
    parts: Parts,
}

fn shift_parts(n: usize, r: &[f64], eta: &[f64], k: f64) -> Result<ShiftParts> {
    let nf = n as f64;
    let head = (0..n - 1).map(|j| BetaPrimeLaw::new(k * (eta[j] + 1.5), k * (r[j] - eta[j] - 2.0))).collect::<Result<Vec<_>>>()?;
    let d = BetaPrimeLaw::new(k * (eta[n - 1] + 1.0), k * (r[n - 1] - eta[n - 1] - (nf + 1.0) / 2.0))?;
    let tau = if n > 1 { Some(StudentLaw::with_exponent(n - 1, r[n - 1], k)?) } else { None };
    Ok(ShiftParts { n, head, d, tau })
}

fn horizontal_parts(n: usize, r: &[f64], k: f64) -> Result<HorizontalParts> {
    let nf = n as f64;
    let head = (0..n - 1).map(|j| StudentLaw::with_exponent(1, (r[j] - 1.0) / 2.0, k)).collect::<Result<Vec<_>>>()?;
    let rho = if n > 1 { Some(StudentLaw::with_exponent(n - 1, r[n - 1] - 1.0, k)?) } else { None };
    let _ = nf;
    let tau = StudentLaw::with_exponent(1, r[n - 1] / 2.0, k)?;
    Ok(HorizontalParts { n, head, rho, tau })
}

impl Sampler {
    pub fn new(spec: SamplerSpec, temper: f64) -> Result<Self> {
        if !(temper > 0.5 && temper <= 1.0) {
            return Err(Error::InvalidInput(format!("temper must lie in (1/2, 1], got {temper}")));
        }
        let k = temper;
        let n = spec.n();
        let nf = n as f64;
        let check_len = |v: &[f64]| {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("exponent vector of length {} for P_{n}", v.len())))
            }
        };
        let parts = match &spec {
            SamplerSpec::Laplace { t, s, rate } => {
                check_len(s)?;
                let tn = t.last_diagonal();
                let d = GammaLaw::new(k * (s[n - 1] + 1.0), k * rate * tn)?;
                let head = (0..n - 1)
                    .map(|j| {
                        let w = t.border(j);
                        let p = t.coords()[j] - w * w / (4.0 * tn);
                        GammaLaw::new(k * (s[j] + 1.5), k * rate * p)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mean_slope = (0..n - 1).map(|j| -t.border(j) / (2.0 * tn)).collect();
                Parts::Laplace(LaplaceParts { n, d, head, mean_slope, var_factor: 1.0 / (2.0 * rate * tn * k) })
            }
            SamplerSpec::DualLaplace { y, a, rate } => {
                check_len(a)?;
                let tn = GammaLaw::new(k * (a[n - 1] + (nf - 1.0) / 2.0 + 1.0), k * rate * y.schur())?;
                let head = (0..n - 1).map(|j| GammaLaw::new(k * (a[j] + 1.0), k * rate * y.coords()[j])).collect::<Result<Vec<_>>>()?;
                let mean_slope = (0..n - 1).map(|j| -2.0 * y.border(j) / y.coords()[j]).collect();
                let var_slope = (0..n - 1).map(|j| 2.0 / (rate * y.coords()[j] * k)).collect();
                Parts::Dual(DualParts { n, tn, head, mean_slope, var_slope })
            }
            SamplerSpec::ConeShift { b, r, eta } => {
                check_len(r)?;
                check_len(eta)?;
                Parts::Shift(shift_parts(n, r, eta, k)?, GroupAction::to_point(b))
            }
            SamplerSpec::Horizontal { v, r } => {
                check_len(r)?;
                Parts::Horizontal(horizontal_parts(n, r, k)?, GroupAction::to_point(v))
            }
            SamplerSpec::TubeAbs { x, y, l, r } => {
                check_len(l)?;
                check_len(r)?;
                if x.len() != 2 * n - 1 {
                    return Err(Error::InvalidInput("tube sampler real part has the wrong length".into()));
                }
                let mut r_minus_j = r.clone();
                for (j, v) in r_minus_j.iter_mut().enumerate() {
                    *v -= if j + 1 < n { 1.5 } else { (nf + 1.0) / 2.0 };
                }
                Parts::Tube {
                    v: shift_parts(n, &r_minus_j, l, k)?,
                    y0: y.coords().to_vec(),
                    x0: x.clone(),
                    horizontal: horizontal_parts(n, r, k)?,
                    y_action: GroupAction::to_point(y),
                }
            }
        };
        Ok(Self { spec, temper, parts })
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    pub fn temper(&self) -> f64 {
        self.temper
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Draw {
        match &self.parts {
            Parts::Laplace(p) => draw_laplace(p, rng),
            Parts::Dual(p) => draw_dual(p, rng),
            Parts::Shift(p, g) => {
                let (y, ln_q) = draw_shift(p, g, rng);
                Draw { x: Vec::new(), y, ln_density: ln_q }
            }
            Parts::Horizontal(p, g) => {
                let (x, ln_q) = draw_horizontal(p, g, rng);
                Draw { x, y: Vec::new(), ln_density: ln_q }
            }
            Parts::Tube { v, y0, x0, horizontal, y_action } => {
                let (v_sample, ln_v) = draw_shift(v, y_action, rng);
                let shifted: Vec<f64> = y0.iter().zip(&v_sample).map(|(a, b)| a + b).collect();
                let g = GroupAction::from_raw(&shifted);
                let (d, ln_u) = draw_horizontal(horizontal, &g, rng);
                let u = x0.iter().zip(&d).map(|(a, b)| a - b).collect();
                Draw { x: u, y: v_sample, ln_density: ln_v + ln_u }
            }
        }
    }
}

fn draw_laplace(p: &LaplaceParts, rng: &mut ChaCha8Rng) -> Draw {
    let n = p.n;
    let d = p.d.sample(rng);
    let mut ln_q = p.d.ln_pdf(d);
    let mut head = vec![0.0; n - 1];
    let mut border = vec![0.0; n - 1];
    for j in 0..n - 1 {
        let y = p.head[j].sample(rng);
        let mean = p.mean_slope[j] * y;
        let var = p.var_factor * y;
        let u = normal(rng, mean, var);
        ln_q += p.head[j].ln_pdf(y) + normal_ln_pdf(u, mean, var);
        head[j] = y;
        border[j] = u;
    }
    Draw { x: Vec::new(), y: raw_from_canonical(&head, &border, d), ln_density: ln_q }
}

fn draw_dual(p: &DualParts, rng: &mut ChaCha8Rng) -> Draw {
    let n = p.n;
    let tn = p.tn.sample(rng);
    let mut ln_q = p.tn.ln_pdf(tn);
    let mut t = vec![0.0; 2 * n - 1];
    t[n - 1] = tn;
    for j in 0..n - 1 {
        let pj = p.head[j].sample(rng);
        let mean = p.mean_slope[j] * tn;
        let var = p.var_slope[j] * tn;
        let w = normal(rng, mean, var);
        ln_q += p.head[j].ln_pdf(pj) + normal_ln_pdf(w, mean, var);
        t[j] = pj + w * w / (4.0 * tn);
        t[border_index(n, j)] = w;
    }
    Draw { x: Vec::new(), y: t, ln_density: ln_q }
}

/// Draws `y` from `∝ Δ^{-r}(y + b) Δ^η(y)` with `b = g(e)`.
fn draw_shift(p: &ShiftParts, g: &GroupAction, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let n = p.n;
    let d = p.d.sample(rng);
    let mut ln_q = p.d.ln_pdf(d);
    let mut head = vec![0.0; n - 1];
    let mut border = vec![0.0; n - 1];
    if let Some(tau_law) = &p.tau {
        let mut tau = vec![0.0; n - 1];
        tau_law.sample(rng, &mut tau);
        ln_q += tau_law.ln_pdf(&tau);
        for j in 0..n - 1 {
            let y = p.head[j].sample(rng);
            ln_q += p.head[j].ln_pdf(y);
            let scale = (y * (y + 1.0) * (d + 1.0)).sqrt();
            head[j] = y;
            border[j] = scale * tau[j];
            ln_q -= scale.ln();
        }
    }
    let mut schur = d;
    g.apply_canonical(&mut head, &mut border, &mut schur);
    (raw_from_canonical(&head, &border, schur), ln_q - g.ln_jacobian)
}

/// Draws `x ∈ R^m` from `∝ |P^{-r}(x + iv)|` with `v = g(e)`.
fn draw_horizontal(p: &HorizontalParts, g: &GroupAction, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let n = p.n;
    let mut x = vec![0.0; 2 * n - 1];
    let mut tau = [0.0];
    p.tau.sample(rng, &mut tau);
    let mut ln_q = p.tau.ln_pdf(&tau);
    let mut a = 1.0;
    let mut drift = 0.0;
    if let Some(rho_law) = &p.rho {
        let mut rho = vec![0.0; n - 1];
        rho_law.sample(rng, &mut rho);
        ln_q += rho_law.ln_pdf(&rho);
        for j in 0..n - 1 {
            let mut xj = [0.0];
            p.head[j].sample(rng, &mut xj);
            ln_q += p.head[j].ln_pdf(&xj);
            let stretch = (1.0 + xj[0] * xj[0]).sqrt();
            x[j] = xj[0];
            x[border_index(n, j)] = rho[j] * stretch;
            ln_q -= stretch.ln();
            a += rho[j] * rho[j];
            drift += rho[j] * rho[j] * xj[0];
        }
    }
    x[n - 1] = a * tau[0] + drift;
    ln_q -= a.ln();
    (g.apply_raw(&x), ln_q - g.ln_jacobian)
}

// ---- sampling entry points ----

/// A cone draw with the exact proposal density at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSample {
    pub coords: Vec<f64>,
    pub density: f64,
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Draws `count` cone points from a cone proposal (`Laplace`, `DualLaplace`
/// lands in the dual cone, `ConeShift`).
pub fn sample_cone(spec: &SamplerSpec, count: usize, seed: u64) -> Result<Vec<ConeSample>> {
    if matches!(spec, SamplerSpec::Horizontal { .. } | SamplerSpec::TubeAbs { .. }) {
        return Err(Error::InvalidInput("sample_cone needs a cone proposal".into()));
    }
    let sampler = Sampler::new(spec.clone(), DEFAULT_TEMPER)?;
    let batches = (count as u64).div_ceil(BATCH);
    let out: Vec<Vec<ConeSample>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let len = (count as u64 - b * BATCH).min(BATCH);
            (0..len)
                .map(|_| {
                    let d = sampler.draw(&mut rng);
                    ConeSample { coords: d.y, density: d.ln_density.exp() }
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

// ---- Monte Carlo driver ----

/// Integrand value kept as `phase · exp(ln_abs)` so that weights are formed
/// as `exp(ln_abs - ln q)` without overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    pub phase: Complex64,
}

impl LogValue {
    pub fn zero() -> Self {
        Self { ln_abs: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn positive(ln_abs: f64) -> Self {
        Self { ln_abs, phase: Complex64::new(1.0, 0.0) }
    }

    /// From a complex logarithm `ln f`.
    pub fn from_ln(ln: Complex64) -> Self {
        Self { ln_abs: ln.re, phase: Complex64::from_polar(1.0, ln.im) }
    }

    pub fn from_value(v: Complex64) -> Self {
        if v == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self { ln_abs: v.norm().ln(), phase: v / v.norm() }
    }

    pub fn value(self) -> Complex64 {
        self.phase * self.ln_abs.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "MC_CONE")]
    MonteCarloCone,
    #[serde(rename = "MC_TUBE")]
    MonteCarloTube,
    #[serde(rename = "QUAD_ITERATED")]
    QuadIterated,
}

/// Value, standard error and provenance of a numerical integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: Complex64,
    /// `sqrt(Var Re + Var Im) / sqrt(N)` for Monte Carlo, an error bound for quadrature.
    pub std_error: f64,
    pub samples: u64,
    pub non_finite: u64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean_re: f64,
    mean_im: f64,
    m2_re: f64,
    m2_im: f64,
    non_finite: u64,
}

impl Moments {
    fn push(&mut self, w: Complex64) {
        self.count += 1;
        let c = self.count as f64;
        let d_re = w.re - self.mean_re;
        self.mean_re += d_re / c;
        self.m2_re += d_re * (w.re - self.mean_re);
        let d_im = w.im - self.mean_im;
        self.mean_im += d_im / c;
        self.m2_im += d_im * (w.im - self.mean_im);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return Moments { non_finite: self.non_finite + other.non_finite, ..other };
        }
        if other.count == 0 {
            return Moments { non_finite: self.non_finite + other.non_finite, ..self };
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d_re = other.mean_re - self.mean_re;
        let d_im = other.mean_im - self.mean_im;
        Moments {
            count: self.count + other.count,
            mean_re: self.mean_re + d_re * nb / n,
            mean_im: self.mean_im + d_im * nb / n,
            m2_re: self.m2_re + other.m2_re + d_re * d_re * na * nb / n,
            m2_im: self.m2_im + other.m2_im + d_im * d_im * na * nb / n,
            non_finite: self.non_finite + other.non_finite,
        }
    }
}

/// Importance-sampling estimate of `∫ f` with `count` draws from `sampler`.
///
/// Batches of [`BATCH`] draws use independent ChaCha streams of `seed` and are
/// merged in batch order, so the result does not depend on the thread count.
/// Non-finite weights count as zero; more than [`NON_FINITE_LIMIT`] of them
/// rejects the estimate.
pub fn monte_carlo<F>(sampler: &Sampler, integrand: F, count: u64, seed: u64, method: Method) -> Result<IntegralEstimate>
where
    F: Fn(&Draw) -> LogValue + Sync,
{
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let batches = count.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let len = (count - b * BATCH).min(BATCH);
            let mut m = Moments::default();
            for _ in 0..len {
                let d = sampler.draw(&mut rng);
                let f = integrand(&d);
                let w = if f.ln_abs == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { f.phase * (f.ln_abs - d.ln_density).exp() };
                if w.re.is_finite() && w.im.is_finite() && d.ln_density.is_finite() {
                    m.push(w);
                } else {
                    m.non_finite += 1;
                    m.push(Complex64::new(0.0, 0.0));
                }
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    if total.non_finite as f64 > NON_FINITE_LIMIT * count as f64 {
        return Err(Error::NonFinite { non_finite: total.non_finite, samples: count });
    }
    let nf = total.count as f64;
    let var = if total.count > 1 { (total.m2_re + total.m2_im) / (nf - 1.0) } else { f64::INFINITY };
    Ok(IntegralEstimate {
        value: Complex64::new(total.mean_re, total.mean_im),
        std_error: (var / nf).sqrt(),
        samples: total.count,
        non_finite: total.non_finite,
        method,
    })
}

/// Estimate of `∫_P f` over the cone.
pub fn mc_integrate_cone<F>(integrand: F, spec: &SamplerSpec, count: u64, seed: u64) -> Result<IntegralEstimate>
where
    F: Fn(&[f64]) -> LogValue + Sync,
{
    let sampler = Sampler::new(spec.clone(), DEFAULT_TEMPER)?;
    monte_carlo(&sampler, |d| integrand(&d.y), count, seed, Method::MonteCarloCone)
}

/// Estimate of `∫ f(x, y)` over `R^m` (horizontal proposal, `y` empty) or the
/// tube (`w = x + iy`).
pub fn mc_integrate_tube<F>(integrand: F, spec: &SamplerSpec, count: u64, seed: u64) -> Result<IntegralEstimate>
where
    F: Fn(&[f64], &[f64]) -> LogValue + Sync,
{
    let sampler = Sampler::new(spec.clone(), DEFAULT_TEMPER)?;
    monte_carlo(&sampler, |d| integrand(&d.x, &d.y), count, seed, Method::MonteCarloTube)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::is_in_cone;

    fn cone(c: &[f64]) -> ConePoint {
        ConePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn group_action_maps_identity_to_point() {
        let b = cone(&[2.0, 0.5, 3.0, 0.7, -1.1]);
        let g = GroupAction::to_point(&b);
        let e = ConePoint::identity(3);
        let image = g.apply_raw(e.coords());
        for (a, c) in image.iter().zip(b.coords()) {
            assert!((a - c).abs() < 1e-14);
        }
        // canonical and raw routes agree
        let (mut head, mut border, mut d) = (vec![0.3, 1.7], vec![0.2, -0.4], 0.9);
        let raw = raw_from_canonical(&head, &border, d);
        g.apply_canonical(&mut head, &mut border, &mut d);
        let via_canonical = raw_from_canonical(&head, &border, d);
        for (a, c) in g.apply_raw(&raw).iter().zip(&via_canonical) {
            assert!((a - c).abs() < 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn group_action_jacobian_matches_determinant() {
        let b = cone(&[2.0, 0.5, 3.0, 0.7, -1.1]);
        let g = GroupAction::to_point(&b);
        let m = 5;
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let mut e = vec![0.0; m];
                e[k] = 1.0;
                g.apply_raw(&e)
            })
            .collect();
        let matrix: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|k| cols[k][i]).collect()).collect();
        let det = crate::cone::leading_minors_dense(&matrix)[m - 1];
        assert!((det.abs().ln() - g.ln_jacobian()).abs() < 1e-12);
    }

    #[test]
    fn cone_samples_are_members() {
        let specs = vec![
            SamplerSpec::Laplace { t: cone(&[2.0, 3.0, 1.0]), s: vec![0.3, -0.5], rate: 4.0 * std::f64::consts::PI },
            SamplerSpec::ConeShift { b: cone(&[1.0, 2.0, 0.5, 0.1, 0.3]), r: vec![5.0, 5.0, 5.0], eta: vec![0.0, 0.5, 0.0] },
        ];
        for spec in specs {
            for s in sample_cone(&spec, 2000, 3).unwrap() {
                assert!(is_in_cone(&s.coords), "{:?}", s.coords);
                assert!(s.density > 0.0);
            }
        }
        let n1 = sample_cone(&SamplerSpec::Laplace { t: cone(&[1.0]), s: vec![0.0], rate: 1.0 }, 10, 1).unwrap();
        assert!(n1.iter().all(|s| s.coords.len() == 1 && s.coords[0] > 0.0));
    }

    #[test]
    fn integrand_equal_to_density_has_no_spread() {
        let spec = SamplerSpec::Horizontal { v: cone(&[1.0, 2.0, 0.3]), r: vec![4.0, 4.0] };
        let sampler = Sampler::new(spec, DEFAULT_TEMPER).unwrap();
        let est = monte_carlo(&sampler, |d| LogValue::positive(d.ln_density), 10_000, 5, Method::MonteCarloTube).unwrap();
        assert_eq!(est.value, Complex64::new(1.0, 0.0));
        assert_eq!(est.std_error, 0.0);
        let zero = monte_carlo(&sampler, |_| LogValue::zero(), 1000, 5, Method::MonteCarloTube).unwrap();
        assert_eq!(zero.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn estimates_are_thread_independent() {
        let spec = SamplerSpec::Laplace { t: ConePoint::identity(2), s: vec![0.0, 0.0], rate: 4.0 * std::f64::consts::PI };
        let sampler = Sampler::new(spec, DEFAULT_TEMPER).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                monte_carlo(&sampler, |d| LogValue::positive(-d.y.iter().sum::<f64>()), 50_000, 11, Method::MonteCarloCone).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn non_finite_weights_reject() {
        let spec = SamplerSpec::Laplace { t: cone(&[1.0]), s: vec![0.0], rate: 1.0 };
        let sampler = Sampler::new(spec, DEFAULT_TEMPER).unwrap();
        let res = monte_carlo(&sampler, |_| LogValue::positive(f64::NAN), 1000, 1, Method::MonteCarloCone);
        assert!(matches!(res, Err(Error::NonFinite { non_finite: 1000, .. })));
    }
}
