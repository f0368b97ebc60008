//! Globally adaptive Gauss–Kronrod (7/15) quadrature for real and complex
//! integrands, with variable transforms for infinite ranges and a helper for
//! nesting one-dimensional rules into iterated integrals.

use std::cell::{Cell, RefCell};
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Return the current estimate and its error instead of failing when the
    /// interval budget runs out.
    pub best_effort: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000, best_effort: false }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [T::zero(); 15];
    fv[7] = fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[i] = f1;
        fv[14 - i] = f2;
        kron = kron + (f1 + f2) * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[i / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resabs = 0.0;
    let mut resasc = 0.0;
    for (i, v) in fv.iter().enumerate() {
        let w = WGK[if i < 8 { i } else { 14 - i }];
        resabs += w * v.magnitude();
        resasc += w * (*v - mean).magnitude();
    }
    let scale = half.abs();
    let value = kron * half;
    resabs *= scale;
    resasc *= scale;
    let mut err = ((kron - gauss) * half).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// `∫_a^b f` over a finite interval.
fn integrate_finite<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    let (value, error) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;
    loop {
        if !total.is_finite_value() || !total_err.is_finite() {
            return Err(Error::Accuracy { achieved: f64::INFINITY, requested: opts.rel_tol });
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if total_err <= target {
            break;
        }
        if heap.len() >= opts.max_intervals {
            if opts.best_effort {
                break;
            }
            let magnitude = total.magnitude();
            let achieved = if magnitude > 0.0 { total_err / magnitude } else { total_err };
            return Err(Error::Accuracy { achieved, requested: opts.rel_tol });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; keep what we have
            heap.push(Segment { error: 0.0, ..worst });
            total_err = heap.iter().map(|s| s.error).sum();
            if heap.iter().all(|s| s.error == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        // recompute occasionally to shed accumulated rounding in the running sums
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error, evaluations })
}

/// `∫_a^b f(x) dx` where either limit may be infinite.
///
/// Half lines use `x = a + t / (1 - t)` and the real line `x = t / (1 - t²)`.
pub fn integrate<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<T>> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidInput("NaN integration limit".into()));
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult { value: r.value * -1.0, ..r });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, opts),
        (true, false) => integrate_finite(
            |t| {
                let d = 1.0 - t;
                f(a + t / d) * (1.0 / (d * d))
            },
            0.0,
            1.0,
            opts,
        ),
        (false, true) => integrate_finite(
            |t| {
                let d = 1.0 - t;
                f(b - t / d) * (1.0 / (d * d))
            },
            0.0,
            1.0,
            opts,
        ),
        (false, false) => integrate_finite(
            |t| {
                let d = 1.0 - t * t;
                f(t / d) * ((1.0 + t * t) / (d * d))
            },
            -1.0,
            1.0,
            opts,
        ),
    }
}

/// Runs inner integrals of an iterated integral inside an outer integrand.
///
/// Failures are remembered rather than propagated so the outer closure can stay
/// infallible; [`Nested::finish`] reports the first one.
pub struct Nested {
    opts: QuadOptions,
    failure: RefCell<Option<Error>>,
    worst_relative: Cell<f64>,
    evaluations: Cell<usize>,
}

impl Nested {
    pub fn new(opts: QuadOptions) -> Self {
        Self { opts, failure: RefCell::new(None), worst_relative: Cell::new(0.0), evaluations: Cell::new(0) }
    }

    pub fn integrate<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64, b: f64) -> T {
        if self.failure.borrow().is_some() {
            return T::zero();
        }
        match integrate(f, a, b, self.opts) {
            Ok(r) => {
                self.evaluations.set(self.evaluations.get() + r.evaluations);
                let m = r.value.magnitude();
                if m > 0.0 {
                    self.worst_relative.set(self.worst_relative.get().max(r.error / m));
                }
                r.value
            }
            Err(e) => {
                *self.failure.borrow_mut() = Some(e);
                T::zero()
            }
        }
    }

    /// Combines the outer result with the inner error budget.
    pub fn finish<T: QuadValue>(self, outer: Result<QuadResult<T>>) -> Result<QuadResult<T>> {
        if let Some(e) = self.failure.into_inner() {
            return Err(e);
        }
        let outer = outer?;
        let inner = self.worst_relative.get() * outer.value.magnitude();
        Ok(QuadResult { value: outer.value, error: outer.error + inner, evaluations: outer.evaluations + self.evaluations.get() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn finite_polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 6.0, max_relative = 1e-14);
    }

    #[test]
    fn infinite_ranges() {
        let opts = QuadOptions::rel(1e-12);
        let r = integrate(|x: f64| (-4.0 * PI * x).exp(), 0.0, f64::INFINITY, opts).unwrap();
        assert_relative_eq!(r.value, 1.0 / (4.0 * PI), max_relative = 1e-12);
        let r = integrate(|x: f64| 1.0 / (1.0 + x * x), f64::NEG_INFINITY, f64::INFINITY, opts).unwrap();
        assert_relative_eq!(r.value, PI, max_relative = 1e-12);
        let r = integrate(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, 0.0, opts).unwrap();
        assert_relative_eq!(r.value, PI.sqrt() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, QuadOptions::rel(1e-10)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^∞ e^{-(1 - i) t} dt = 1 / (1 - i)
        let r = integrate(|t: f64| (Complex64::new(-1.0, 1.0) * t).exp(), 0.0, f64::INFINITY, QuadOptions::rel(1e-11)).unwrap();
        let expected = Complex64::new(1.0, 0.0) / Complex64::new(1.0, -1.0);
        assert!((r.value - expected).norm() < 1e-10);
    }

    #[test]
    fn nested_gaussian() {
        let inner = Nested::new(QuadOptions::rel(1e-11));
        let outer = integrate(
            |x: f64| inner.integrate(|y: f64| (-(x * x + y * y)).exp(), f64::NEG_INFINITY, f64::INFINITY),
            f64::NEG_INFINITY,
            f64::INFINITY,
            QuadOptions::rel(1e-10),
        );
        let r = inner.finish(outer).unwrap();
        assert_relative_eq!(r.value, PI, max_relative = 1e-9);
    }

    #[test]
    fn divergent_integral_reports_accuracy() {
        let opts = QuadOptions { max_intervals: 50, ..QuadOptions::rel(1e-12) };
        match integrate(|x: f64| 1.0 / x, 0.0, 1.0, opts) {
            Err(Error::Accuracy { .. }) => {}
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
