//! C ABI over mfscope.
//!
//! Documents and reducers are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`MfsStatus`]; on
//! failure [`mfs_last_error`] describes the problem for the calling thread.
//! Strings handed out by the library are released with [`mfs_string_free`].
//! Unit lists are JSON arrays of `"bid:attr"` strings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mfscope::dom::normalize::builtin_rules;
use mfscope::dom::{self, DomDocument, DomError, ElementRef, RefSet};
use mfscope::eval::gepa_objective;
use mfscope::provider::Providers;
use mfscope::reduce::{build_reducer, MethodSpec, ReduceError, Reducer, ReductionRequest};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    UnknownBid = 5,
    ReduceFailed = 6,
    Panic = 7,
}

/// Parsed HTML observation.
pub struct MfsDocument(DomDocument);

/// Configured reduction method.
pub struct MfsReducer(Box<dyn Reducer>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type Failure = (MfsStatus, String);

fn guard<F>(f: F) -> MfsStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MfsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MfsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (MfsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (MfsStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn dom_failure(e: DomError) -> Failure {
    let status = match e {
        DomError::UnknownBid(_) => MfsStatus::UnknownBid,
        DomError::UnparseableInput | DomError::DuplicateBid(_) => MfsStatus::ParseError,
        DomError::InvalidRule { .. } => MfsStatus::InvalidArgument,
    };
    (status, e.to_string())
}

fn parse_units(json: &str) -> Result<RefSet, Failure> {
    let items: Vec<String> = serde_json::from_str(json).map_err(|e| {
        (
            MfsStatus::InvalidArgument,
            format!("unit list must be a JSON array of strings: {e}"),
        )
    })?;
    items
        .iter()
        .map(|s| s.parse::<ElementRef>().map_err(|e| (MfsStatus::InvalidArgument, e)))
        .collect()
}

fn unit(s: &str) -> Result<ElementRef, Failure> {
    s.parse().map_err(|e| (MfsStatus::InvalidArgument, e))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mfs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mfs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `html` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_parse(html: *const c_char, out: *mut *mut MfsDocument) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let html = str_arg(html, "html")?;
        let doc = DomDocument::parse(html).map_err(dom_failure)?;
        *out = boxed(MfsDocument(doc));
        Ok(())
    })
}

/// # Safety
/// `doc` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_free(doc: *mut MfsDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Canonical markup; release with [`mfs_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_serialize(doc: *const MfsDocument, out: *mut *mut c_char) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let doc = ref_arg(doc, "doc")?;
        let s = CString::new(doc.0.serialize()).map_err(|_| {
            (
                MfsStatus::InvalidArgument,
                "document contains a NUL character".to_string(),
            )
        })?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_char_length(doc: *const MfsDocument, out: *mut usize) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ref_arg(doc, "doc")?.0.char_length();
        Ok(())
    })
}

/// Whether the `"bid:attr"` unit is present.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_contains_ref(
    doc: *const MfsDocument,
    unit_str: *const c_char,
    out: *mut bool,
) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let doc = ref_arg(doc, "doc")?;
        let r = unit(str_arg(unit_str, "unit")?)?;
        *out = dom::contains_ref(&doc.0, &r);
        Ok(())
    })
}

/// New document with the listed units removed.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_ablate(
    doc: *const MfsDocument,
    units_json: *const c_char,
    out: *mut *mut MfsDocument,
) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let doc = ref_arg(doc, "doc")?;
        let refs = parse_units(str_arg(units_json, "units_json")?)?;
        let ablated = dom::ablate(&doc.0, &refs).map_err(dom_failure)?;
        *out = boxed(MfsDocument(ablated));
        Ok(())
    })
}

/// Tree distance between two units.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_dom_distance(
    doc: *const MfsDocument,
    a: *const c_char,
    b: *const c_char,
    out: *mut usize,
) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let doc = ref_arg(doc, "doc")?;
        let a = unit(str_arg(a, "a")?)?;
        let b = unit(str_arg(b, "b")?)?;
        *out = dom::dom_distance(&doc.0, &a, &b).map_err(dom_failure)?;
        Ok(())
    })
}

/// New document with the built-in normalization rules applied.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_document_normalize(doc: *const MfsDocument, out: *mut *mut MfsDocument) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let doc = ref_arg(doc, "doc")?;
        let n = dom::normalize(&doc.0, &builtin_rules()).map_err(dom_failure)?;
        *out = boxed(MfsDocument(n));
        Ok(())
    })
}

/// Builds a reducer from a method spec such as `dmr-bm25:k=10`, using the
/// offline provider backends.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_reducer_new(spec: *const c_char, out: *mut *mut MfsReducer) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec: MethodSpec = str_arg(spec, "spec")?
            .parse()
            .map_err(|e: ReduceError| (MfsStatus::InvalidArgument, e.to_string()))?;
        let r = build_reducer(&spec, &Providers::fake()).map_err(|e| (MfsStatus::InvalidArgument, e.to_string()))?;
        *out = boxed(MfsReducer(r));
        Ok(())
    })
}

/// # Safety
/// `reducer` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mfs_reducer_free(reducer: *mut MfsReducer) {
    if !reducer.is_null() {
        drop(Box::from_raw(reducer));
    }
}

/// Reduces `doc`. `goal` and `history_json` (a JSON array of action
/// strings) may be null.
///
/// # Safety
/// Non-null pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_reducer_reduce(
    reducer: *const MfsReducer,
    doc: *const MfsDocument,
    goal: *const c_char,
    history_json: *const c_char,
    out: *mut *mut MfsDocument,
) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let reducer = ref_arg(reducer, "reducer")?;
        let doc = ref_arg(doc, "doc")?;
        let goal = if goal.is_null() { "" } else { str_arg(goal, "goal")? };
        let history: Vec<String> = if history_json.is_null() {
            Vec::new()
        } else {
            serde_json::from_str(str_arg(history_json, "history_json")?).map_err(|e| {
                (
                    MfsStatus::InvalidArgument,
                    format!("history must be a JSON array of strings: {e}"),
                )
            })?
        };
        let req = ReductionRequest::new(&doc.0).goal(goal).history(&history);
        let reduced = reducer
            .0
            .reduce(&req)
            .map_err(|e| (MfsStatus::ReduceFailed, e.to_string()))?;
        *out = boxed(MfsDocument(reduced));
        Ok(())
    })
}

/// Sets `out` to whether every unit of `mfs_json` is still in `reduced`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_coverage(
    reduced: *const MfsDocument,
    mfs_json: *const c_char,
    out: *mut bool,
) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let reduced = ref_arg(reduced, "reduced")?;
        let mfs = parse_units(str_arg(mfs_json, "mfs_json")?)?;
        *out = mfscope::eval::retains(&reduced.0, &mfs);
        Ok(())
    })
}

/// 1 iff the size ratio is at most `r_target` and the MFS survived.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mfs_gepa_objective(
    reduced: *const MfsDocument,
    original: *const MfsDocument,
    mfs_json: *const c_char,
    r_target: f64,
    out: *mut u8,
) -> MfsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let reduced = ref_arg(reduced, "reduced")?;
        let original = ref_arg(original, "original")?;
        let mfs = parse_units(str_arg(mfs_json, "mfs_json")?)?;
        *out = gepa_objective(&reduced.0, &original.0, &mfs, r_target)
            .map_err(|e| (MfsStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}
