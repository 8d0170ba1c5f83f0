//! C ABI over `ranklab`.
//!
//! Objects are opaque handles owned by the caller and released with the
//! matching `*_free`. Every fallible call returns an [`RlStatus`]; on failure
//! [`rl_last_error_message`] describes the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ranklab::polyrank::{c_constant, tensor_theorem_constants};
use ranklab::{Budget, Error, PolyMap, PolyRankFn, PrimeField, RankValue, Tensor, TensorRankFn};

/// Opaque tensor handle.
pub struct RlTensor(Tensor);

/// Opaque polynomial map handle.
pub struct RlPolyMap(PolyMap);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    BudgetExceeded = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlTensorRank {
    Matrix = 0,
    Analytic = 1,
    Slice = 2,
    Partition = 3,
    Tensor = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlPolyRank {
    AnalyticD = 0,
    Schmidt = 1,
    Degree = 2,
    Gowers = 3,
}

/// A rank as a certified interval; `exact` when `lower == upper` is proved.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RlRank {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::Parse { .. } => RlStatus::Parse,
        Error::BudgetExceeded { .. } => RlStatus::BudgetExceeded,
        Error::InternalInconsistency(_) => RlStatus::Internal,
        _ => RlStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (RlStatus, String)>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside ranklab".into());
            RlStatus::Panic
        }
    }
}

fn lib(e: Error) -> (RlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RlStatus, String) {
    (RlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (RlStatus, String)> {
    if s.is_null() {
        return Err(null("text"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (RlStatus::InvalidUtf8, e.to_string()))
}

fn budget_of(budget: u64) -> Budget {
    if budget == 0 {
        Budget::default()
    } else {
        Budget::uniform(budget)
    }
}

fn rank_out(r: &RankValue) -> RlRank {
    RlRank {
        lower: r.lower(),
        upper: r.upper(),
        exact: r.is_exact(),
    }
}

unsafe fn give_string(s: String, out: *mut *mut c_char) -> Result<(), (RlStatus, String)> {
    let c = CString::new(s).map_err(|e| (RlStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a `tensor v1` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_tensor_parse(text: *const c_char, out: *mut *mut RlTensor) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = Tensor::from_text(read_str(text)?).map_err(lib)?;
        *out = Box::into_raw(Box::new(RlTensor(t)));
        Ok(())
    })
}

/// Builds a tensor over GF(`q`) from row-major `entries` (last axis fastest).
///
/// # Safety
/// `dims` must point to `order` values, `entries` to `len` bytes, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_tensor_new(
    q: u32,
    dims: *const usize,
    order: usize,
    entries: *const u8,
    len: usize,
    out: *mut *mut RlTensor,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if (dims.is_null() && order > 0) || (entries.is_null() && len > 0) {
            return Err(null("dims or entries"));
        }
        let dims = if order == 0 { Vec::new() } else { std::slice::from_raw_parts(dims, order).to_vec() };
        let entries = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(entries, len).to_vec() };
        let field = PrimeField::new(q).map_err(lib)?;
        let t = Tensor::new(field, dims, entries).map_err(lib)?;
        *out = Box::into_raw(Box::new(RlTensor(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rl_tensor_free(t: *mut RlTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Serializes a tensor; release the result with [`rl_string_free`].
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_tensor_to_string(t: *const RlTensor, out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        give_string(t.0.to_text(), out)
    })
}

/// A rank of a tensor. `budget = 0` selects the default budget.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_tensor_rank(t: *const RlTensor, which: RlTensorRank, budget: u64, out: *mut RlRank) -> RlStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let f = match which {
            RlTensorRank::Matrix => TensorRankFn::Matrix,
            RlTensorRank::Analytic => TensorRankFn::Analytic,
            RlTensorRank::Slice => TensorRankFn::Slice,
            RlTensorRank::Partition => TensorRankFn::Partition,
            RlTensorRank::Tensor => TensorRankFn::Tensor,
        };
        *out = rank_out(&f.compute(&t.0, &budget_of(budget)).map_err(lib)?);
        Ok(())
    })
}

/// Parses a `poly v1` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_poly_parse(text: *const c_char, out: *mut *mut RlPolyMap) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = PolyMap::from_text(read_str(text)?).map_err(lib)?;
        *out = Box::into_raw(Box::new(RlPolyMap(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rl_poly_free(p: *mut RlPolyMap) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Serializes a polynomial map; release the result with [`rl_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_poly_to_string(p: *const RlPolyMap, out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("poly"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        give_string(p.0.to_text(), out)
    })
}

/// A rank of a polynomial map. `d_prime` is used by the degree rank only.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_poly_rank(
    p: *const RlPolyMap,
    which: RlPolyRank,
    d_prime: usize,
    budget: u64,
    out: *mut RlRank,
) -> RlStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("poly"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let f = match which {
            RlPolyRank::AnalyticD => PolyRankFn::AnalyticD,
            RlPolyRank::Schmidt => PolyRankFn::Schmidt,
            RlPolyRank::Degree => PolyRankFn::Degree { d_prime },
            RlPolyRank::Gowers => PolyRankFn::Gowers,
        };
        *out = rank_out(&f.compute(&p.0, &budget_of(budget)).map_err(lib)?);
        Ok(())
    })
}

/// `(C, κ)` of the tensor restriction bound and `c(σ, d)`. Any output
/// pointer may be null.
///
/// # Safety
/// Non-null output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_constants(sigma: f64, d: u32, c_out: *mut f64, kappa_out: *mut f64, c_sigma_d_out: *mut f64) -> RlStatus {
    guard(|| {
        let (c, kappa) = tensor_theorem_constants(sigma, d).map_err(lib)?;
        let csd = c_constant(sigma, d).map_err(lib)?;
        for (p, v) in [(c_out, c), (kappa_out, kappa), (c_sigma_d_out, csd)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
