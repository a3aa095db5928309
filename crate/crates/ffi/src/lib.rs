//! C ABI over `copos`.
//!
//! Objects are opaque handles created by `copos_*_new`/`parse` functions and
//! released by the matching `copos_*_free`. Every fallible call returns a
//! [`CoposStatus`]; on failure `copos_last_error()` describes the cause.
//! Strings returned through out-pointers are owned by the caller and must be
//! released with `copos_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use copos::bounds::{bound, Hierarchy};
use copos::certificates::verify;
use copos::copositivity::{cop5_test, CopVerdict};
use copos::graph::{parse_graph, Family};
use copos::membership::{membership, Cone, MembershipOptions, MembershipStatus, SosCertificate};
use copos::{CoposError, Graph, SymMatrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoposStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    DimensionMismatch = 4,
    ResourceCap = 5,
    SolverUnknown = 6,
    Precondition = 7,
    Io = 8,
    Panic = 9,
}

/// Three-valued answer of membership and copositivity queries.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoposVerdict {
    Yes = 0,
    No = 1,
    Unknown = 2,
}

pub struct CoposGraph(Graph);
pub struct CoposMatrix(SymMatrix);
pub struct CoposCertificate(SosCertificate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &CoposError) -> CoposStatus {
    match e {
        CoposError::ResourceCap { .. } => CoposStatus::ResourceCap,
        CoposError::InvalidParameter(_) | CoposError::DegreeMismatch { .. } => {
            CoposStatus::InvalidArgument
        }
        CoposError::DimensionMismatch { .. } => CoposStatus::DimensionMismatch,
        CoposError::MalformedProblem(_) | CoposError::Precondition(_) => CoposStatus::Precondition,
        CoposError::SolverUnknown(_) => CoposStatus::SolverUnknown,
        CoposError::Parse(_) | CoposError::Json(_) => CoposStatus::Parse,
        CoposError::Io(_) => CoposStatus::Io,
    }
}

struct Fail(CoposStatus, String);

impl From<CoposError> for Fail {
    fn from(e: CoposError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CoposStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoposStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CoposStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CoposStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CoposStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(CoposStatus::Panic, "interior NUL".into()))?;
    put(out, c.into_raw(), "out")
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(CoposStatus::InvalidArgument, msg.into())
}

fn verdict(s: MembershipStatus) -> CoposVerdict {
    match s {
        MembershipStatus::Member => CoposVerdict::Yes,
        MembershipStatus::NotMember => CoposVerdict::No,
        MembershipStatus::Unknown => CoposVerdict::Unknown,
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn copos_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn copos_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn copos_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a graph from JSON or DIMACS text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copos_graph_parse(
    text: *const c_char,
    out: *mut *mut CoposGraph,
) -> CoposStatus {
    guard(|| {
        let g = parse_graph(str_arg(text, "text")?)?;
        put(out, Box::into_raw(Box::new(CoposGraph(g))), "out")
    })
}

/// Builds a named family member, e.g. `("cycle", [5], 1)`.
///
/// # Safety
/// `params` must point to `nparams` values (or be null when `nparams` is 0).
#[no_mangle]
pub unsafe extern "C" fn copos_graph_family(
    name: *const c_char,
    params: *const usize,
    nparams: usize,
    out: *mut *mut CoposGraph,
) -> CoposStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let p = if nparams == 0 {
            &[][..]
        } else if params.is_null() {
            return Err(null("params"));
        } else {
            std::slice::from_raw_parts(params, nparams)
        };
        let g = Family::from_name(name, p)?.build()?;
        put(out, Box::into_raw(Box::new(CoposGraph(g))), "out")
    })
}

/// # Safety
/// `g` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn copos_graph_free(g: *mut CoposGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_graph_order(g: *const CoposGraph, out: *mut usize) -> CoposStatus {
    guard(|| put(out, obj(g, "graph")?.0.n(), "out"))
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_graph_alpha(g: *const CoposGraph, out: *mut usize) -> CoposStatus {
    guard(|| {
        let a = obj(g, "graph")?.0.alpha()?;
        put(out, a, "out")
    })
}

/// JSON form of the graph; free with `copos_string_free`.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_graph_to_json(
    g: *const CoposGraph,
    out: *mut *mut c_char,
) -> CoposStatus {
    guard(|| {
        let s = serde_json::to_string(&obj(g, "graph")?.0).map_err(CoposError::from)?;
        put_string(out, s)
    })
}

/// Symmetric matrix from `n*n` row-major entries.
///
/// # Safety
/// `data` must point to `n*n` doubles.
#[no_mangle]
pub unsafe extern "C" fn copos_matrix_new(
    n: usize,
    data: *const f64,
    out: *mut *mut CoposMatrix,
) -> CoposStatus {
    guard(|| {
        if n > 0 && data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(n).ok_or_else(|| invalid("n too large"))?;
        let flat = if n == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(|r| r.to_vec()).collect();
        let m = SymMatrix::from_rows(&rows)?;
        put(out, Box::into_raw(Box::new(CoposMatrix(m))), "out")
    })
}

/// `t(A_G + I) − J`, with `t = α(G)` when `t` is NaN.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_matrix_from_graph(
    g: *const CoposGraph,
    t: f64,
    out: *mut *mut CoposMatrix,
) -> CoposStatus {
    guard(|| {
        let t = if t.is_nan() { None } else { Some(t) };
        let m = obj(g, "graph")?.0.m_matrix(t)?;
        put(out, Box::into_raw(Box::new(CoposMatrix(m))), "out")
    })
}

/// Horn matrix.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copos_matrix_horn(out: *mut *mut CoposMatrix) -> CoposStatus {
    guard(|| put(out, Box::into_raw(Box::new(CoposMatrix(SymMatrix::horn()))), "out"))
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn copos_matrix_free(m: *mut CoposMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_matrix_dim(m: *const CoposMatrix, out: *mut usize) -> CoposStatus {
    guard(|| put(out, obj(m, "matrix")?.0.dim(), "out"))
}

/// Writes entry `(i, j)`.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_matrix_get(
    m: *const CoposMatrix,
    i: usize,
    j: usize,
    out: *mut f64,
) -> CoposStatus {
    guard(|| {
        let m = &obj(m, "matrix")?.0;
        if i >= m.dim() || j >= m.dim() {
            return Err(invalid(format!("index ({i}, {j}) out of range")));
        }
        put(out, m.get(i, j), "out")
    })
}

/// Tests `M + margin·I` against the named cone (`Q`, `Qtilde`, `K`, `C`,
/// `Ctilde`, `Q0`) at level `r`. When `cert_out` is non-null and the answer
/// is `Yes`, a certificate handle is stored there (null otherwise).
///
/// # Safety
/// `cone` must be a NUL-terminated string and `m` a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_membership(
    cone: *const c_char,
    m: *const CoposMatrix,
    r: u32,
    margin: f64,
    verdict_out: *mut CoposVerdict,
    cert_out: *mut *mut CoposCertificate,
) -> CoposStatus {
    guard(|| {
        let cone: Cone = str_arg(cone, "cone")?.parse()?;
        let m = &obj(m, "matrix")?.0;
        let v = membership(cone, m, r, &MembershipOptions::with_margin(margin))?;
        put(verdict_out, verdict(v.status), "verdict_out")?;
        if !cert_out.is_null() {
            let c = match (v.status, v.certificate) {
                (MembershipStatus::Member, Some(c)) => Box::into_raw(Box::new(CoposCertificate(c))),
                _ => ptr::null_mut(),
            };
            cert_out.write(c);
        }
        Ok(())
    })
}

/// Exact 5×5 copositivity test up to `margin`.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_cop5(
    m: *const CoposMatrix,
    margin: f64,
    out: *mut CoposVerdict,
) -> CoposStatus {
    guard(|| {
        let v = cop5_test(&obj(m, "matrix")?.0, margin, &MembershipOptions::default())?;
        let v = match v {
            CopVerdict::Copositive => CoposVerdict::Yes,
            CopVerdict::NotCopositive => CoposVerdict::No,
            CopVerdict::Unknown => CoposVerdict::Unknown,
        };
        put(out, v, "out")
    })
}

/// Bound of the named hierarchy (`nu`, `nutilde`, `zeta`, `zetatilde`,
/// `theta`) at level `r`. `value_out` may receive +inf; `verified_out`, when
/// non-null, receives 1 when no probe was inconclusive.
///
/// # Safety
/// `hierarchy` must be a NUL-terminated string and `g` a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_bound(
    hierarchy: *const c_char,
    g: *const CoposGraph,
    r: u32,
    t_tol: f64,
    value_out: *mut f64,
    verified_out: *mut i32,
) -> CoposStatus {
    guard(|| {
        let h: Hierarchy = str_arg(hierarchy, "hierarchy")?.parse()?;
        let res = bound(h, &obj(g, "graph")?.0, r, t_tol, &MembershipOptions::default())?;
        put(value_out, res.value, "value_out")?;
        if !verified_out.is_null() {
            verified_out.write(i32::from(res.verified));
        }
        Ok(())
    })
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copos_certificate_from_json(
    text: *const c_char,
    out: *mut *mut CoposCertificate,
) -> CoposStatus {
    guard(|| {
        let c: SosCertificate =
            serde_json::from_str(str_arg(text, "text")?).map_err(CoposError::from)?;
        put(out, Box::into_raw(Box::new(CoposCertificate(c))), "out")
    })
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn copos_certificate_to_json(
    c: *const CoposCertificate,
    out: *mut *mut c_char,
) -> CoposStatus {
    guard(|| {
        let s = obj(c, "certificate")?.0.to_json().to_string();
        put_string(out, s)
    })
}

/// # Safety
/// `c` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn copos_certificate_free(c: *mut CoposCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Checks a certificate against `m`. `pass_out` receives 1 or 0; the
/// residual goes to `residual_out` when non-null.
///
/// # Safety
/// `m` and `c` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn copos_verify(
    m: *const CoposMatrix,
    c: *const CoposCertificate,
    tol: f64,
    pass_out: *mut i32,
    residual_out: *mut f64,
) -> CoposStatus {
    guard(|| {
        let rep = verify(&obj(m, "matrix")?.0, &obj(c, "certificate")?.0, tol)?;
        put(pass_out, i32::from(rep.pass), "pass_out")?;
        if !residual_out.is_null() {
            residual_out.write(rep.residual_inf);
        }
        Ok(())
    })
}
