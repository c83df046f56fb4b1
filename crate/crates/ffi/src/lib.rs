//! C ABI over `swor-core`.
//!
//! Conventions:
//! - every fallible function returns a [`SworStatus`]; results go through
//!   out-pointers that are written only on `SWOR_STATUS_OK`;
//! - objects are opaque handles created by `*_new` and released by `*_free`
//!   (passing NULL to `*_free` is a no-op);
//! - probabilities cross the boundary as `int64_t` numerator/denominator
//!   pairs so the library can stay exact;
//! - labels are zero based;
//! - after a failure, `swor_last_error_message` describes it. The message is
//!   thread local and valid until the next call on the same thread.
//!
//! Handles are not thread safe; use one per thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use swor_core::design::existence_check;
use swor_core::rational::{self, Rational};
use swor_core::variance::{
    analyze_psd, variance_with_replacement, variance_without_replacement, PopulationValues,
};
use swor_core::{AffineDesign, Error, ProbabilityVector, Sampler, StratifiedPopulation, Verdict};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SworStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidProbabilities = 3,
    Infeasible = 4,
    Domain = 5,
    Precondition = 6,
    BufferTooSmall = 7,
    Numerical = 8,
    Panic = 99,
}

/// PSD verdicts, mirroring the library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SworVerdict {
    Psd = 0,
    Indefinite = 1,
    Inconclusive = 2,
}

/// A feasible affine design (opaque).
pub struct SworDesign {
    exact: AffineDesign<Rational>,
    float: AffineDesign<f64>,
}

/// A stratified rejection sampler (opaque).
pub struct SworSampler {
    inner: Sampler,
    n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SworStatus {
    match e {
        Error::InvalidProbabilities(_) | Error::ZeroProbability(_) => SworStatus::InvalidProbabilities,
        Error::InfeasibleDesign { .. } => SworStatus::Infeasible,
        Error::Domain(_) | Error::LabelOutOfRange { .. } | Error::InvalidCounts(_) => SworStatus::Domain,
        Error::Precondition(_) | Error::IterationCap(_) | Error::CapExceeded { .. } => SworStatus::Precondition,
        Error::NoConvergence(_) => SworStatus::Numerical,
        Error::Parse { .. } => SworStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SworStatus, String)>) -> SworStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SworStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SworStatus::Panic
        }
    }
}

fn lib(e: Error) -> (SworStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (SworStatus, String) {
    (SworStatus::NullPointer, format!("`{name}` is NULL"))
}

/// # Safety
/// `ptr` must be NULL or point to `len` readable elements.
unsafe fn view<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], (SworStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

fn ratios(num: &[i64], den: &[i64]) -> Result<Vec<Rational>, (SworStatus, String)> {
    num.iter()
        .zip(den)
        .enumerate()
        .map(|(i, (&a, &b))| {
            if b == 0 {
                Err((SworStatus::InvalidArgument, format!("denominator {i} is zero")))
            } else {
                Ok(rational::ratio(a, b))
            }
        })
        .collect()
}

fn probability_vector(num: &[i64], den: &[i64]) -> Result<ProbabilityVector<Rational>, (SworStatus, String)> {
    ProbabilityVector::new(ratios(num, den)?).map_err(lib)
}

/// Returns the message for the last failure on this thread, or NULL.
#[no_mangle]
pub extern "C" fn swor_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn swor_status_name(status: SworStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SworStatus::Ok => b"ok\0",
        SworStatus::NullPointer => b"null pointer\0",
        SworStatus::InvalidArgument => b"invalid argument\0",
        SworStatus::InvalidProbabilities => b"invalid probabilities\0",
        SworStatus::Infeasible => b"infeasible design\0",
        SworStatus::Domain => b"domain error\0",
        SworStatus::Precondition => b"precondition violated\0",
        SworStatus::BufferTooSmall => b"buffer too small\0",
        SworStatus::Numerical => b"numerical failure\0",
        SworStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Writes 1 to `out` if a design with sample size `n` exists for
/// `p_i = num[i] / den[i]`, 0 otherwise.
///
/// # Safety
/// `num` and `den` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_feasible(
    num: *const i64,
    den: *const i64,
    len: usize,
    n: usize,
    out: *mut i32,
) -> SworStatus {
    guard(|| {
        let (num, den) = (view(num, len, "num")?, view(den, len, "den")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let p = probability_vector(num, den)?;
        let check = existence_check(&p, n).map_err(lib)?;
        *out = i32::from(check.feasible);
        Ok(())
    })
}

/// Creates the design for `p_i = num[i] / den[i]` and sample size `n`.
///
/// # Safety
/// `num` and `den` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_design_new(
    num: *const i64,
    den: *const i64,
    len: usize,
    n: usize,
    out: *mut *mut SworDesign,
) -> SworStatus {
    guard(|| {
        let (num, den) = (view(num, len, "num")?, view(den, len, "den")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let p = probability_vector(num, den)?;
        let float = AffineDesign::new(p.to_float(), n).map_err(lib)?;
        let exact = AffineDesign::new(p, n).map_err(lib)?;
        *out = Box::into_raw(Box::new(SworDesign { exact, float }));
        Ok(())
    })
}

/// # Safety
/// `design` must be NULL or a handle from `swor_design_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swor_design_free(design: *mut SworDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Population size `N`, or 0 for NULL.
///
/// # Safety
/// `design` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swor_design_population_size(design: *const SworDesign) -> usize {
    design.as_ref().map_or(0, |d| d.exact.n_pop())
}

/// Sample size `n`, or 0 for NULL.
///
/// # Safety
/// `design` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swor_design_sample_size(design: *const SworDesign) -> usize {
    design.as_ref().map_or(0, |d| d.exact.n_sample())
}

/// Probability of the ordered draw `labels[0..len]`; `len` must equal `n`.
///
/// # Safety
/// `design` must be a live handle, `labels` must point to `len` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_design_joint_pmf(
    design: *const SworDesign,
    labels: *const usize,
    len: usize,
    out: *mut f64,
) -> SworStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        let labels = view(labels, len, "labels")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = rational::to_f64(&d.exact.joint_pmf(labels).map_err(lib)?);
        Ok(())
    })
}

/// Exact joint probability as `num_out / den_out`; fails with
/// `SWOR_STATUS_DOMAIN` if either part does not fit in 64 bits.
///
/// # Safety
/// As for `swor_design_joint_pmf`; `num_out` and `den_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_design_joint_pmf_exact(
    design: *const SworDesign,
    labels: *const usize,
    len: usize,
    num_out: *mut i64,
    den_out: *mut i64,
) -> SworStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        let labels = view(labels, len, "labels")?;
        if num_out.is_null() || den_out.is_null() {
            return Err(null("num_out/den_out"));
        }
        let v = d.exact.joint_pmf(labels).map_err(lib)?;
        let to_i64 = |b: &num_bigint::BigInt| i64::try_from(b).ok();
        match (to_i64(v.numer()), to_i64(v.denom())) {
            (Some(a), Some(b)) => {
                *num_out = a;
                *den_out = b;
                Ok(())
            }
            _ => Err((SworStatus::Domain, "value does not fit in 64 bits".into())),
        }
    })
}

/// `P[I_i = u, I_j = v]` for any two draw positions `i != j`.
///
/// # Safety
/// `design` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swor_design_bivariate(
    design: *const SworDesign,
    u: usize,
    v: usize,
    out: *mut f64,
) -> SworStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = rational::to_f64(&d.exact.bivariate_marginal(u, v).map_err(lib)?);
        Ok(())
    })
}

/// HT estimator variances for attribute values `x[0..len]`, with and
/// without replacement.
///
/// # Safety
/// `design` must be a live handle, `x` must point to `len` values and both
/// outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_design_variances(
    design: *const SworDesign,
    x: *const f64,
    len: usize,
    with_out: *mut f64,
    without_out: *mut f64,
) -> SworStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        let x = view(x, len, "x")?;
        if with_out.is_null() || without_out.is_null() {
            return Err(null("with_out/without_out"));
        }
        let pv = PopulationValues::new(x.to_vec(), d.float.p().clone()).map_err(lib)?;
        let with = variance_with_replacement(&pv, d.float.n_sample()).map_err(lib)?;
        let without = variance_without_replacement(&pv, &d.float).map_err(lib)?;
        *with_out = with;
        *without_out = without;
        Ok(())
    })
}

/// Smallest eigenvalue of Ψ (or Γ when a weight is zero) and the PSD verdict
/// at relative tolerance `tol`.
///
/// # Safety
/// `design` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_design_psd(
    design: *const SworDesign,
    tol: f64,
    min_eigenvalue: *mut f64,
    verdict: *mut SworVerdict,
) -> SworStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if min_eigenvalue.is_null() || verdict.is_null() {
            return Err(null("min_eigenvalue/verdict"));
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err((SworStatus::InvalidArgument, format!("tolerance {tol} is invalid")));
        }
        let r = analyze_psd(d.exact.p(), tol).map_err(lib)?;
        *min_eigenvalue = r.min_eigenvalue;
        *verdict = match r.verdict {
            Verdict::Psd => SworVerdict::Psd,
            Verdict::Indefinite => SworVerdict::Indefinite,
            Verdict::Inconclusive => SworVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Creates a sampler for `k` strata: stratum `j` has `sizes[j]` members, each
/// with probability `num[j] / den[j]`.
///
/// # Safety
/// `num`, `den` and `sizes` must point to `k` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_sampler_new(
    num: *const i64,
    den: *const i64,
    sizes: *const usize,
    k: usize,
    n: usize,
    seed: u64,
    out: *mut *mut SworSampler,
) -> SworStatus {
    guard(|| {
        let (num, den) = (view(num, k, "num")?, view(den, k, "den")?);
        let sizes = view(sizes, k, "sizes")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pop = StratifiedPopulation::new(ratios(num, den)?, sizes.to_vec()).map_err(lib)?;
        let inner = Sampler::new(&pop, n, seed).map_err(lib)?;
        *out = Box::into_raw(Box::new(SworSampler { inner, n }));
        Ok(())
    })
}

/// # Safety
/// `sampler` must be NULL or a handle from `swor_sampler_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swor_sampler_free(sampler: *mut SworSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Draws one ordered sample of `n` distinct labels into `labels[0..cap]`.
///
/// # Safety
/// `sampler` must be a live handle and `labels` must have room for `cap`
/// values.
#[no_mangle]
pub unsafe extern "C" fn swor_sampler_draw(
    sampler: *mut SworSampler,
    labels: *mut usize,
    cap: usize,
) -> SworStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or_else(|| null("sampler"))?;
        if labels.is_null() {
            return Err(null("labels"));
        }
        if cap < s.n {
            return Err((
                SworStatus::BufferTooSmall,
                format!("buffer holds {cap} labels, sample size is {}", s.n),
            ));
        }
        let draw = s.inner.draw().map_err(lib)?;
        slice::from_raw_parts_mut(labels, draw.len()).copy_from_slice(&draw);
        Ok(())
    })
}

/// Accepted draws, total proposals and the bound `C` so far.
///
/// # Safety
/// `sampler` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swor_sampler_stats(
    sampler: *const SworSampler,
    accepted: *mut u64,
    proposals: *mut u64,
    bound_c: *mut f64,
) -> SworStatus {
    guard(|| {
        let s = sampler.as_ref().ok_or_else(|| null("sampler"))?;
        if accepted.is_null() || proposals.is_null() || bound_c.is_null() {
            return Err(null("accepted/proposals/bound_c"));
        }
        let st = s.inner.stats();
        *accepted = st.accepted;
        *proposals = st.proposals;
        *bound_c = st.bound_c;
        Ok(())
    })
}
