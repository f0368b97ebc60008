//! Geometry of the generalized light cone `P_n ⊂ R^m`, `m = 2n - 1`.
//!
//! A point `x` is laid out as `(x_1, …, x_n, x_{n+1}, …, x_{2n-1})`. Its arrowhead
//! matrix carries `x_1..x_n` on the diagonal and couples row `j < n` to the last
//! row through the border entry `x_{2n-j}`. With zero-based storage the border
//! of row `j` lives at `coords[2n - 2 - j]`.
//!
//! Power functions are evaluated through the product form
//! `Δ^s(y) = Π_{j<n} y_j^{s_j} · D^{s_n}` where `D` is the Schur complement
//! `y_n - Σ y_{2n-j}^2 / y_j`. The minor pattern
//! `Π Δ_k^{s_k - s_{k+1}} · Δ_n^{s_n}` is kept as an independent path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size below which a Schur complement counts as the cone boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    Plain,
    Shifted,
}

/// Real exponent vector tagged with its indexing convention.
///
/// A shifted index adds `(n - 2) / 2` to its first `n - 1` entries. Closed forms
/// apply the stored entries literally as exponents; the tag only guards against
/// mixing the two conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<f64>,
    convention: Convention,
}

pub(crate) fn shift_offset(n: usize) -> f64 {
    (n as f64 - 2.0) / 2.0
}

impl MultiIndex {
    pub fn new(entries: Vec<f64>, convention: Convention) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("multi-index must have length n >= 1".into()));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite multi-index entry in {entries:?}")));
        }
        Ok(Self { entries, convention })
    }

    /// Panics on an empty vector; use [`MultiIndex::new`] for untrusted input.
    pub fn plain(entries: impl Into<Vec<f64>>) -> Self {
        Self::new(entries.into(), Convention::Plain).expect("valid multi-index")
    }

    pub fn shifted(entries: impl Into<Vec<f64>>) -> Self {
        Self::new(entries.into(), Convention::Shifted).expect("valid multi-index")
    }

    /// Constant vector of length `n`.
    pub fn splat(n: usize, value: f64, convention: Convention) -> Self {
        Self::new(vec![value; n.max(1)], convention).expect("valid multi-index")
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn last(&self) -> f64 {
        self.entries[self.entries.len() - 1]
    }

    /// Entries `1..n-1` (the non-final coordinates).
    pub fn head(&self) -> &[f64] {
        &self.entries[..self.entries.len() - 1]
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn expect(&self, expected: Convention) -> Result<()> {
        if self.convention == expected {
            Ok(())
        } else {
            Err(Error::Convention { expected, got: self.convention })
        }
    }

    pub fn shift(&self) -> Result<Self> {
        self.expect(Convention::Plain)?;
        Ok(self.moved(shift_offset(self.n()), Convention::Shifted))
    }

    pub fn unshift(&self) -> Result<Self> {
        self.expect(Convention::Shifted)?;
        Ok(self.moved(-shift_offset(self.n()), Convention::Plain))
    }

    /// Shifted form, shifting only if needed.
    pub fn to_shifted(&self) -> Self {
        match self.convention {
            Convention::Plain => self.moved(shift_offset(self.n()), Convention::Shifted),
            Convention::Shifted => self.clone(),
        }
    }

    pub fn to_plain(&self) -> Self {
        match self.convention {
            Convention::Shifted => self.moved(-shift_offset(self.n()), Convention::Plain),
            Convention::Plain => self.clone(),
        }
    }

    fn moved(&self, offset: f64, convention: Convention) -> Self {
        let n = self.n();
        let entries = self.entries.iter().enumerate().map(|(j, e)| if j + 1 < n { e + offset } else { *e }).collect();
        Self { entries, convention }
    }

    /// Entrywise map, keeping the convention.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { entries: self.entries.iter().map(|e| f(*e)).collect(), convention: self.convention }
    }

    /// Entrywise combination of literal entries. Lengths must agree.
    pub fn zip_with(&self, other: &MultiIndex, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::InvalidInput(format!("multi-index lengths differ: {} vs {}", self.n(), other.n())));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self { entries, convention: self.convention })
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|e| e * k)
    }
}

/// Dense arrowhead matrix of `x`.
pub fn assemble_arrowhead(x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = dimension_of(x.len())?;
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        m[j][j] = x[j];
    }
    for j in 0..n.saturating_sub(1) {
        let b = x[border_index(n, j)];
        m[j][n - 1] = b;
        m[n - 1][j] = b;
    }
    Ok(m)
}

/// `n` for a coordinate vector of length `m = 2n - 1`.
pub fn dimension_of(m: usize) -> Result<usize> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("coordinate length {m} is not of the form 2n - 1")));
    }
    Ok(m.div_ceil(2))
}

#[inline]
pub(crate) fn border_index(n: usize, j: usize) -> usize {
    2 * n - 2 - j
}

pub(crate) fn schur_of(x: &[f64], n: usize) -> f64 {
    let mut d = x[n - 1];
    for j in 0..n - 1 {
        let b = x[border_index(n, j)];
        d -= b * b / x[j];
    }
    d
}

/// Membership test with strict inequalities and zero tolerance.
pub fn is_in_cone(x: &[f64]) -> bool {
    let Ok(n) = dimension_of(x.len()) else {
        return false;
    };
    if x.iter().any(|v| !v.is_finite()) || x[..n - 1].iter().any(|&v| v <= 0.0) {
        return false;
    }
    schur_of(x, n) > 0.0
}

/// Leading principal minors by Gaussian elimination on the dense matrix.
///
/// Used as the independent route for [`ConePoint::minors`].
pub fn leading_minors_dense(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    (1..=n)
        .map(|k| {
            let mut a: Vec<Vec<f64>> = matrix[..k].iter().map(|row| row[..k].to_vec()).collect();
            let mut det = 1.0;
            for col in 0..k {
                let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
                if a[pivot][col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    a.swap(pivot, col);
                    det = -det;
                }
                det *= a[col][col];
                for row in col + 1..k {
                    let factor = a[row][col] / a[col][col];
                    for c in col..k {
                        a[row][c] -= factor * a[col][c];
                    }
                }
            }
            det
        })
        .collect()
}

/// A validated point of `P_n` with cached minors and Schur complement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConePoint {
    coords: Vec<f64>,
    #[serde(skip)]
    n: usize,
    #[serde(skip)]
    schur: f64,
    #[serde(skip)]
    minors: Vec<f64>,
}

impl ConePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = dimension_of(coords.len())?;
        if let Some(v) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::NotInCone(format!("non-finite coordinate {v}")));
        }
        if let Some(j) = coords[..n - 1].iter().position(|&v| v <= 0.0) {
            return Err(Error::NotInCone(format!("x_{} = {} is not positive", j + 1, coords[j])));
        }
        let schur = schur_of(&coords, n);
        let scale = coords.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if schur.abs() <= BOUNDARY_TOLERANCE * scale {
            return Err(Error::Boundary { schur });
        }
        if schur < 0.0 {
            return Err(Error::NotInCone(format!("schur complement {schur} is negative")));
        }
        let mut minors = Vec::with_capacity(n);
        let mut acc = 1.0;
        for &v in &coords[..n - 1] {
            acc *= v;
            minors.push(acc);
        }
        minors.push(acc * schur);
        Ok(Self { coords, n, schur, minors })
    }

    /// Builds a point from canonical coordinates `(y_1..y_{n-1}, u_1..u_{n-1}, D)`
    /// where `u_j` is the border entry of row `j` and `D > 0` the Schur complement.
    pub fn from_canonical(head: &[f64], border: &[f64], schur: f64) -> Result<Self> {
        if head.len() != border.len() {
            return Err(Error::InvalidInput("canonical head and border lengths differ".into()));
        }
        let n = head.len() + 1;
        let mut coords = vec![0.0; 2 * n - 1];
        let mut last = schur;
        for j in 0..n - 1 {
            coords[j] = head[j];
            coords[border_index(n, j)] = border[j];
            last += border[j] * border[j] / head[j];
        }
        coords[n - 1] = last;
        Self::new(coords)
    }

    /// The identity matrix, i.e. all diagonal entries one and no border.
    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n.max(1)]).expect("identity lies in the cone")
    }

    /// Diagonal point with zero border entries.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        let mut coords = vec![0.0; 2 * n - 1];
        coords[..n].copy_from_slice(values);
        Self::new(coords)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Diagonal entries `y_1..y_{n-1}`.
    pub fn head(&self) -> &[f64] {
        &self.coords[..self.n - 1]
    }

    /// Border entry `y_{2n-j}` of row `j` (zero based).
    pub fn border(&self, j: usize) -> f64 {
        self.coords[border_index(self.n, j)]
    }

    pub fn borders(&self) -> Vec<f64> {
        (0..self.n - 1).map(|j| self.border(j)).collect()
    }

    pub fn last_diagonal(&self) -> f64 {
        self.coords[self.n - 1]
    }

    pub fn schur(&self) -> f64 {
        self.schur
    }

    pub fn minors(&self) -> &[f64] {
        &self.minors
    }

    /// `Δ_n`, the determinant.
    pub fn det(&self) -> f64 {
        self.minors[self.n - 1]
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.coords.iter().map(|v| v * lambda).collect())
    }

    pub fn add(&self, other: &ConePoint) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidInput("cone points of different dimension".into()));
        }
        Self::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn arrowhead(&self) -> Vec<Vec<f64>> {
        assemble_arrowhead(&self.coords).expect("validated length")
    }
}

impl<'de> Deserialize<'de> for ConePoint {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            coords: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ConePoint::new(raw.coords).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`ConePoint::minors`].
pub fn minors(y: &ConePoint) -> Vec<f64> {
    y.minors().to_vec()
}

fn check_len(y_n: usize, s: &MultiIndex) -> Result<()> {
    if y_n != s.n() {
        return Err(Error::InvalidInput(format!("multi-index of length {} used with a point of P_{}", s.n(), y_n)));
    }
    Ok(())
}

/// `Δ^s(y)` through the product form `Π y_j^{s_j} D^{s_n}`.
pub fn delta_power(y: &ConePoint, s: &MultiIndex) -> Result<f64> {
    check_len(y.n(), s)?;
    Ok(ln_delta_power(y, s.entries()).exp())
}

/// `ln Δ^s(y)` for literal exponents.
pub(crate) fn ln_delta_power(y: &ConePoint, s: &[f64]) -> f64 {
    let n = y.n();
    let mut acc = s[n - 1] * y.schur().ln();
    for j in 0..n - 1 {
        acc += s[j] * y.coords[j].ln();
    }
    acc
}

/// `Δ^s(y)` through the minor pattern `Π Δ_k^{s_k - s_{k+1}} · Δ_n^{s_n}`.
pub fn delta_power_by_minors(y: &ConePoint, s: &MultiIndex) -> Result<f64> {
    check_len(y.n(), s)?;
    let e = s.entries();
    let n = y.n();
    let m = y.minors();
    let mut acc = e[n - 1] * m[n - 1].ln();
    for k in 0..n - 1 {
        acc += (e[k] - e[k + 1]) * m[k].ln();
    }
    Ok(acc.exp())
}

/// A point `x + iy` of the tube over `P_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubePoint {
    pub real_part: Vec<f64>,
    pub imag_part: ConePoint,
}

impl TubePoint {
    pub fn new(real_part: Vec<f64>, imag_part: ConePoint) -> Result<Self> {
        if real_part.len() != imag_part.coords().len() {
            return Err(Error::InvalidInput(format!(
                "real part of length {} with imaginary part of length {}",
                real_part.len(),
                imag_part.coords().len()
            )));
        }
        Ok(Self { real_part, imag_part })
    }

    pub fn imaginary(y: ConePoint) -> Self {
        let m = y.coords().len();
        Self { real_part: vec![0.0; m], imag_part: y }
    }

    pub fn n(&self) -> usize {
        self.imag_part.n()
    }

    /// `self - conj(other)`, again a tube point.
    pub fn minus_conj(&self, other: &TubePoint) -> Result<TubePoint> {
        let real = self.real_part.iter().zip(&other.real_part).map(|(a, b)| a - b).collect();
        TubePoint::new(real, self.imag_part.add(&other.imag_part)?)
    }

    /// `self + i·shift` for a cone point `shift`.
    pub fn plus_i(&self, shift: &ConePoint) -> Result<TubePoint> {
        TubePoint::new(self.real_part.clone(), self.imag_part.add(shift)?)
    }
}

/// The complex minors `Δ_k(z / i)` of a tube point, with the factorization
/// `Δ_k = Π_{j≤k} (y_j - i x_j)` and `Δ_n = Δ_{n-1} · D_c`.
#[derive(Debug, Clone)]
pub struct ComplexMinorVector {
    /// `y_j - i x_j` for `j < n`, then the complex Schur complement `D_c`.
    pub factors: Vec<Complex64>,
    pub values: Vec<Complex64>,
    /// Arguments of the minors continued from the imaginary axis.
    pub continuous_args: Vec<f64>,
}

impl ComplexMinorVector {
    pub fn new(z: &TubePoint) -> Self {
        Self::from_raw(&z.real_part, z.imag_part.coords())
    }

    /// Same as [`ComplexMinorVector::new`] for unchecked coordinate slices.
    pub(crate) fn from_raw(x: &[f64], y: &[f64]) -> Self {
        let n = y.len().div_ceil(2);
        let factors = complex_factors(x, y, n);
        let schur = factors[n - 1];
        let mut values = Vec::with_capacity(n);
        let mut continuous_args = Vec::with_capacity(n);
        let mut prod = Complex64::new(1.0, 0.0);
        let mut arg = 0.0;
        for j in 0..n - 1 {
            prod *= factors[j];
            arg += factors[j].arg();
            values.push(prod);
            continuous_args.push(arg);
        }
        values.push(prod * schur);
        continuous_args.push(arg + schur.arg());
        Self { factors, values, continuous_args }
    }

    /// Fails if any minor leaves the slit plane when continued from `z = iy`,
    /// which is where principal powers of the minors stop agreeing with the
    /// holomorphic continuation.
    pub fn check_branch(&self) -> Result<()> {
        for (k, (v, a)) in self.values.iter().zip(&self.continuous_args).enumerate() {
            if v.norm() == 0.0 || a.abs() >= std::f64::consts::PI {
                return Err(Error::BranchCut { minor: k + 1, argument: *a });
            }
        }
        Ok(())
    }
}

/// `y_j - i x_j` for `j < n` followed by the complex Schur complement.
pub(crate) fn complex_factors(x: &[f64], y: &[f64], n: usize) -> Vec<Complex64> {
    let mut factors = Vec::with_capacity(n);
    let mut schur = Complex64::new(y[n - 1], -x[n - 1]);
    for j in 0..n - 1 {
        let f = Complex64::new(y[j], -x[j]);
        let bi = border_index(n, j);
        let b = Complex64::new(y[bi], -x[bi]);
        schur -= b * b / f;
        factors.push(f);
    }
    factors.push(schur);
    factors
}

/// `ln P^s(x + iy)` on raw coordinate slices, with the branch check.
pub(crate) fn ln_complex_power_raw(x: &[f64], y: &[f64], s: &[f64]) -> Result<Complex64> {
    let minors = ComplexMinorVector::from_raw(x, y);
    minors.check_branch()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (f, e) in minors.factors.iter().zip(s) {
        acc += f.ln() * *e;
    }
    Ok(acc)
}

/// `ln |P^s(x + iy)|` on raw coordinate slices.
pub(crate) fn ln_abs_complex_power_raw(x: &[f64], y: &[f64], s: &[f64]) -> f64 {
    let n = s.len();
    complex_factors(x, y, n).iter().zip(s).map(|(f, e)| e * f.norm().ln()).sum()
}

/// `ln Δ^s(y)` on a raw coordinate slice, `None` outside the cone.
pub(crate) fn ln_delta_raw(y: &[f64], s: &[f64]) -> Option<f64> {
    let n = s.len();
    let d = schur_of(y, n);
    if !(d > 0.0) || y[..n - 1].iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let mut acc = s[n - 1] * d.ln();
    for j in 0..n - 1 {
        acc += s[j] * y[j].ln();
    }
    Some(acc)
}

/// `P^s(z) = Δ^s(z / i)` with principal powers on the minor pattern.
pub fn complex_power_p(z: &TubePoint, s: &MultiIndex) -> Result<Complex64> {
    check_len(z.n(), s)?;
    Ok(ln_complex_power(z, s.entries())?.exp())
}

/// `ln P^s(z)` for literal exponents (principal logarithm of each minor).
pub(crate) fn ln_complex_power(z: &TubePoint, s: &[f64]) -> Result<Complex64> {
    ln_complex_power_raw(&z.real_part, z.imag_part.coords(), s)
}

/// `|P^s(z)|`, branch independent.
pub fn abs_complex_power(z: &TubePoint, s: &MultiIndex) -> Result<f64> {
    check_len(z.n(), s)?;
    Ok(ln_abs_complex_power_raw(&z.real_part, z.imag_part.coords(), s.entries()).exp())
}

/// Coordinates `q_j = 4 t_j - t_{2n-j}^2 / t_n` and `t_n` in which the cone
/// Laplace transforms factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaTransform {
    pub q: Vec<f64>,
    pub t_n_component: f64,
}

impl DeltaTransform {
    /// `Δ_k(t_δ) = Π_{j≤k} q_j` for `k < n` and `Δ_n(t_δ) = t_n Π q_j`.
    pub fn minors(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q.len() + 1);
        let mut acc = 1.0;
        for q in &self.q {
            acc *= q;
            out.push(acc);
        }
        out.push(acc * self.t_n_component);
        out
    }
}

pub fn delta_transform(t: &ConePoint) -> DeltaTransform {
    let n = t.n();
    let tn = t.last_diagonal();
    let q = (0..n - 1)
        .map(|j| {
            let b = t.border(j);
            4.0 * t.coords()[j] - b * b / tn
        })
        .collect();
    DeltaTransform { q, t_n_component: tn }
}
