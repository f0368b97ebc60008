//! C ABI over `lightcone`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`LcStatus`]; the message of the most recent failure on the calling thread
//! is available through [`lc_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use lightcone::boundedness::{classify, schur_witness, SchurWitness, Verdict};
use lightcone::cone::{ConePoint, Convention, MultiIndex, TubePoint};
use lightcone::error::Error;
use lightcone::identities::{closed_form, IdentityCase, IdentityId, IdentityPoint};
use lightcone::operator::{necessary_exponent_condition, scaling_experiment, ParameterSet, ScalingReport, TestFunctionFR};
use lightcone::oracle::{verify_identity, AuditRecord, AuditStatus};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    OutsideDomain = 3,
    Infeasible = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcVerdict {
    Bounded = 0,
    Unbounded = 1,
    Conflict = 2,
    Undetermined = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcAuditStatus {
    Confirmed = 0,
    ExponentConfirmedConstantMismatch = 1,
    Mismatch = 2,
    Inconclusive = 3,
}

/// Parameter set `(n, p, q, α, β, a, b, c)`.
pub struct LcParams(ParameterSet);

/// Schur-test witness.
pub struct LcWitness(SchurWitness);

/// Outcome of one identity audit.
pub struct LcAudit(AuditRecord);

/// Norm-scaling fit.
pub struct LcScaling(ScalingReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LcStatus {
    match e {
        Error::InvalidInput(_) | Error::Convention { .. } | Error::Unsupported(_) => LcStatus::InvalidInput,
        Error::NotInCone(_) | Error::Boundary { .. } | Error::BranchCut { .. } | Error::ConvergenceDomain { .. } => LcStatus::OutsideDomain,
        Error::Infeasible { .. } | Error::Construction(_) => LcStatus::Infeasible,
        Error::Accuracy { .. } | Error::NonFinite { .. } => LcStatus::Numerical,
    }
}

fn fail(status: LcStatus, msg: impl Into<String>) -> LcStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping errors and panics onto status codes.
fn guard(f: impl FnOnce() -> Result<(), LcStatus>) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(LcStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, LcStatus>;
}

impl<T> OrStatus<T> for lightcone::error::Result<T> {
    fn or_status(self) -> Result<T, LcStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn read<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], LcStatus> {
    if p.is_null() {
        return Err(fail(LcStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, LcStatus> {
    p.as_ref().ok_or_else(|| fail(LcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, LcStatus> {
    p.as_mut().ok_or_else(|| fail(LcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn write_slice(dst: *mut f64, len: usize, src: &[f64]) -> Result<(), LcStatus> {
    if dst.is_null() {
        return Err(fail(LcStatus::NullPointer, "output buffer is null"));
    }
    if len < src.len() {
        return Err(fail(LcStatus::BufferTooSmall, format!("need {} entries, got {len}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bytes needed for the last error message including the terminator; 0 when
/// there is none.
#[no_mangle]
pub extern "C" fn lc_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes_with_nul().len()))
}

/// Copies the last error message into `buf`, truncating to `len - 1` bytes.
///
/// # Safety
/// `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lc_last_error_message(buf: *mut c_char, len: usize) -> LcStatus {
    if buf.is_null() || len == 0 {
        return LcStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_ref().map_or(&[][..], |c| c.as_bytes());
        let k = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, k);
        *buf.add(k) = 0;
        if k < bytes.len() {
            LcStatus::BufferTooSmall
        } else {
            LcStatus::Ok
        }
    })
}

/// Builds a parameter set from plain-index arrays of length `n`. A null `c`
/// selects the exponent forced by the necessary equality.
///
/// # Safety
/// Non-null arrays must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_params_new(
    n: usize,
    p: f64,
    q: f64,
    alpha: *const f64,
    beta: *const f64,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    out_params: *mut *mut LcParams,
) -> LcStatus {
    guard(|| {
        let dst = out(out_params, "out_params")?;
        let pl = |v: &[f64]| MultiIndex::new(v.to_vec(), Convention::Plain).or_status();
        let mut set = ParameterSet::new(
            p,
            q,
            pl(read(alpha, n, "alpha")?)?,
            pl(read(beta, n, "beta")?)?,
            pl(read(a, n, "a")?)?,
            pl(read(b, n, "b")?)?,
            MultiIndex::plain(vec![0.0; n]),
        )
        .or_status()?;
        set.c = if c.is_null() { MultiIndex::plain(necessary_exponent_condition(&set)) } else { pl(read(c, n, "c")?)? };
        set.validate().or_status()?;
        *dst = Box::into_raw(Box::new(LcParams(set)));
        Ok(())
    })
}

/// The worked `n = 2` parameter set.
///
/// # Safety
/// `out_params` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_params_worked(out_params: *mut *mut LcParams) -> LcStatus {
    guard(|| {
        *out(out_params, "out_params")? = Box::into_raw(Box::new(LcParams(ParameterSet::worked())));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lc_params_n(params: *const LcParams) -> usize {
    params.as_ref().map_or(0, |p| p.0.n)
}

/// Copies the plain exponent `c` into `buf`.
///
/// # Safety
/// `params` must be a live handle and `buf` valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn lc_params_c(params: *const LcParams, buf: *mut f64, len: usize) -> LcStatus {
    guard(|| write_slice(buf, len, handle(params, "params")?.0.c.entries()))
}

/// # Safety
/// `params` must be null or a handle from `lc_params_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn lc_params_free(params: *mut LcParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a live handle; `verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_classify(params: *const LcParams, verdict: *mut LcVerdict) -> LcStatus {
    guard(|| {
        let p = handle(params, "params")?;
        *out(verdict, "verdict")? = match classify(&p.0).verdict {
            Verdict::Bounded => LcVerdict::Bounded,
            Verdict::Unbounded => LcVerdict::Unbounded,
            Verdict::Conflict => LcVerdict::Conflict,
            Verdict::Undetermined => LcVerdict::Undetermined,
        };
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle; `out_witness` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_witness_new(params: *const LcParams, out_witness: *mut *mut LcWitness) -> LcStatus {
    guard(|| {
        let p = handle(params, "params")?;
        let dst = out(out_witness, "out_witness")?;
        let w = schur_witness(&p.0).or_status()?;
        *dst = Box::into_raw(Box::new(LcWitness(w)));
        Ok(())
    })
}

/// The chosen `t` and the admissible interval around it.
///
/// # Safety
/// `witness` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_witness_t(witness: *const LcWitness, t: *mut f64, lower: *mut f64, upper: *mut f64) -> LcStatus {
    guard(|| {
        let w = &handle(witness, "witness")?.0;
        *out(t, "t")? = w.t;
        *out(lower, "lower")? = w.t_interval.0;
        *out(upper, "upper")? = w.t_interval.1;
        Ok(())
    })
}

/// Plain `r` and `l` of the witness.
///
/// # Safety
/// `witness` must be a live handle; buffers valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn lc_witness_exponents(witness: *const LcWitness, r: *mut f64, l: *mut f64, len: usize) -> LcStatus {
    guard(|| {
        let w = &handle(witness, "witness")?.0;
        write_slice(r, len, w.r.entries())?;
        write_slice(l, len, w.l.entries())
    })
}

/// 1 when both algebraic witness identities hold, 0 otherwise or on null.
///
/// # Safety
/// `witness` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lc_witness_identities_hold(witness: *const LcWitness) -> i32 {
    witness.as_ref().map_or(0, |w| i32::from(w.0.identities_hold()))
}

/// # Safety
/// `witness` must be null or a handle from `lc_witness_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn lc_witness_free(witness: *mut LcWitness) {
    if !witness.is_null() {
        drop(Box::from_raw(witness));
    }
}

/// Closed form of `∫_T Δ^l(Im w) |P^{-r}(z - w̄)| dw` at `z = x + iy` with
/// shifted `l`, `r` of length `n`; `x` and `y` hold `2n - 1` coordinates each.
/// `stated` uses the displayed constant and exponents, `corrected` the
/// derived ones.
///
/// # Safety
/// Arrays must have the given lengths; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_tube_abs_closed(
    n: usize,
    l: *const f64,
    r: *const f64,
    x: *const f64,
    y: *const f64,
    stated: *mut f64,
    corrected: *mut f64,
) -> LcStatus {
    guard(|| {
        if n == 0 {
            return Err(fail(LcStatus::InvalidInput, "n must be positive"));
        }
        let m = 2 * n - 1;
        let l = MultiIndex::new(read(l, n, "l")?.to_vec(), Convention::Shifted).or_status()?;
        let r = MultiIndex::new(read(r, n, "r")?.to_vec(), Convention::Shifted).or_status()?;
        let y = ConePoint::new(read(y, m, "y")?.to_vec()).or_status()?;
        let z = TubePoint::new(read(x, m, "x")?.to_vec(), y).or_status()?;
        let case = IdentityCase::new(IdentityId::TubeAbs, vec![l, r], IdentityPoint::Tube { point: z }).or_status()?;
        let cf = closed_form(&case).or_status()?;
        *out(stated, "stated")? = cf.stated.re;
        *out(corrected, "corrected")? = cf.corrected.re;
        Ok(())
    })
}

/// Audits one identity case given as JSON (the `IdentityCase` layout of the
/// audit report).
///
/// # Safety
/// `case_json` must be a nul-terminated string; `out_audit` writable.
#[no_mangle]
pub unsafe extern "C" fn lc_audit_case_json(case_json: *const c_char, budget: u64, seed: u64, out_audit: *mut *mut LcAudit) -> LcStatus {
    guard(|| {
        if case_json.is_null() {
            return Err(fail(LcStatus::NullPointer, "case_json is null"));
        }
        let dst = out(out_audit, "out_audit")?;
        let text = CStr::from_ptr(case_json).to_str().map_err(|e| fail(LcStatus::InvalidInput, e.to_string()))?;
        let case: IdentityCase = serde_json::from_str(text).map_err(|e| fail(LcStatus::InvalidInput, e.to_string()))?;
        let rec = verify_identity(&case, budget, seed).or_status()?;
        *dst = Box::into_raw(Box::new(LcAudit(rec)));
        Ok(())
    })
}

/// # Safety
/// `audit` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_audit_status(audit: *const LcAudit, status: *mut LcAuditStatus, z_score: *mut f64) -> LcStatus {
    guard(|| {
        let a = &handle(audit, "audit")?.0;
        *out(status, "status")? = match a.status {
            AuditStatus::Confirmed => LcAuditStatus::Confirmed,
            AuditStatus::ExponentConfirmedConstantMismatch => LcAuditStatus::ExponentConfirmedConstantMismatch,
            AuditStatus::Mismatch => LcAuditStatus::Mismatch,
            AuditStatus::Inconclusive => LcAuditStatus::Inconclusive,
        };
        *out(z_score, "z_score")? = a.z_score;
        Ok(())
    })
}

/// Numerical left-hand side with its standard error, and the closed form.
///
/// # Safety
/// `audit` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_audit_values(
    audit: *const LcAudit,
    lhs_re: *mut f64,
    lhs_im: *mut f64,
    lhs_stderr: *mut f64,
    rhs_re: *mut f64,
    rhs_im: *mut f64,
) -> LcStatus {
    guard(|| {
        let a = &handle(audit, "audit")?.0;
        *out(lhs_re, "lhs_re")? = a.lhs.value.re;
        *out(lhs_im, "lhs_im")? = a.lhs.value.im;
        *out(lhs_stderr, "lhs_stderr")? = a.lhs.std_error;
        *out(rhs_re, "rhs_re")? = a.rhs_closed.re;
        *out(rhs_im, "rhs_im")? = a.rhs_closed.im;
        Ok(())
    })
}

/// # Safety
/// `audit` must be null or a handle from `lc_audit_case_json`, freed once.
#[no_mangle]
pub unsafe extern "C" fn lc_audit_free(audit: *mut LcAudit) {
    if !audit.is_null() {
        drop(Box::from_raw(audit));
    }
}

/// Fits the norm-scaling slopes of `f_R` and `T f_R` over the radius grid.
/// `l` and `r` are shifted and of length `n`.
///
/// # Safety
/// Arrays must have the given lengths; `out_scaling` writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scaling_new(
    params: *const LcParams,
    l: *const f64,
    r: *const f64,
    grid: *const f64,
    grid_len: usize,
    budget: u64,
    seed: u64,
    out_scaling: *mut *mut LcScaling,
) -> LcStatus {
    guard(|| {
        let p = &handle(params, "params")?.0;
        let dst = out(out_scaling, "out_scaling")?;
        let l = MultiIndex::new(read(l, p.n, "l")?.to_vec(), Convention::Shifted).or_status()?;
        let r = MultiIndex::new(read(r, p.n, "r")?.to_vec(), Convention::Shifted).or_status()?;
        let tf = TestFunctionFR::new(l, r, vec![1.0; p.n]).or_status()?;
        let rep = scaling_experiment(p, &tf, read(grid, grid_len, "grid")?, budget, seed).or_status()?;
        *dst = Box::into_raw(Box::new(LcScaling(rep)));
        Ok(())
    })
}

/// Fitted `T f_R` minus `f_R` slope in coordinate `j` (zero-based).
///
/// # Safety
/// `scaling` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_scaling_difference(
    scaling: *const LcScaling,
    j: usize,
    value: *mut f64,
    std_error: *mut f64,
    vanishes: *mut i32,
) -> LcStatus {
    guard(|| {
        let s = &handle(scaling, "scaling")?.0;
        let Some(d) = s.slope_difference.get(j) else {
            return Err(fail(LcStatus::InvalidInput, format!("coordinate {j} out of range")));
        };
        *out(value, "value")? = d.value;
        *out(std_error, "std_error")? = d.std_error;
        *out(vanishes, "vanishes")? = i32::from(s.difference_vanishes[j]);
        Ok(())
    })
}

/// # Safety
/// `scaling` must be null or a handle from `lc_scaling_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn lc_scaling_free(scaling: *mut LcScaling) {
    if !scaling.is_null() {
        drop(Box::from_raw(scaling));
    }
}
