//! C ABI over the ipdef definability workbench.
//!
//! Relation sets cross the boundary as `uint16_t` bitmasks over R+. Fallible
//! calls return an [`IpdefStatus`] and write results through out-pointers; the
//! message for the most recent failure on the calling thread is available from
//! [`ipdef_last_error`]. Closure caches are opaque handles owned by the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ipdef::closure::ClosureCache;
use ipdef::relations::{ExplicitSet, RelationSymbol, R_PLUS};
use ipdef::rulebase::{bundled, ClassTag};
use ipdef::zeta;

/// Result codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpdefStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotFound = 4,
    Panic = 5,
}

/// Outcome of a zeta verification.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpdefZetaOutcome {
    Pass = 0,
    Fail = 1,
    ExpectedFail = 2,
    UnexpectedPass = 3,
}

/// Closures of all subsets of R+ for one class.
pub struct IpdefClosure {
    cache: ClosureCache,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: IpdefStatus, msg: impl Into<String>) -> IpdefStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> IpdefStatus) -> IpdefStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(IpdefStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, IpdefStatus> {
    if p.is_null() {
        return Err(fail(IpdefStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(IpdefStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn check_set(set: u16) -> Result<ExplicitSet, IpdefStatus> {
    if set >> R_PLUS.len() != 0 {
        return Err(fail(IpdefStatus::InvalidArgument, format!("mask {set:#x} has bits outside R+")));
    }
    Ok(ExplicitSet(set))
}

/// Message for the last failure on this thread; empty if none. Valid until the next call.
#[no_mangle]
pub extern "C" fn ipdef_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Number of relations in R+.
#[no_mangle]
pub extern "C" fn ipdef_relation_count() -> u32 {
    R_PLUS.len() as u32
}

/// Bit position of the R+ relation named `name`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out_bit` writable.
#[no_mangle]
pub unsafe extern "C" fn ipdef_relation_bit(name: *const c_char, out_bit: *mut u32) -> IpdefStatus {
    guard(|| {
        if out_bit.is_null() {
            return fail(IpdefStatus::NullPointer, "null out_bit");
        }
        let name = match read_str(name) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let sym: RelationSymbol = match name.trim().parse() {
            Ok(s) => s,
            Err(e) => return fail(IpdefStatus::InvalidArgument, format!("{e}")),
        };
        match sym.explicit_index() {
            Some(i) => {
                *out_bit = i as u32;
                IpdefStatus::Ok
            }
            None => fail(IpdefStatus::NotFound, format!("{name} is not in R+")),
        }
    })
}

/// Static NUL-terminated name of the relation at `bit`, or null if out of range.
#[no_mangle]
pub extern "C" fn ipdef_relation_name(bit: u32) -> *const c_char {
    static NAMES: std::sync::OnceLock<Vec<CString>> = std::sync::OnceLock::new();
    let names = NAMES.get_or_init(|| R_PLUS.iter().map(|r| CString::new(r.name()).unwrap_or_default()).collect());
    names.get(bit as usize).map_or(ptr::null(), |n| n.as_ptr())
}

/// Build the closure cache for `class_name` ("lin", "den", "dis" or "unb") from the bundled rules.
///
/// # Safety
/// `class_name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipdef_closure_new(class_name: *const c_char, out: *mut *mut IpdefClosure) -> IpdefStatus {
    guard(|| {
        if out.is_null() {
            return fail(IpdefStatus::NullPointer, "null out");
        }
        *out = ptr::null_mut();
        let class: ClassTag = match read_str(class_name).map(|s| s.parse()) {
            Ok(Ok(c)) => c,
            Ok(Err(e)) => return fail(IpdefStatus::InvalidArgument, e),
            Err(e) => return e,
        };
        let cache = ClosureCache::new(&bundled(), class);
        *out = Box::into_raw(Box::new(IpdefClosure { cache }));
        IpdefStatus::Ok
    })
}

/// Release a handle from [`ipdef_closure_new`]. Null is ignored.
///
/// # Safety
/// `handle` must come from [`ipdef_closure_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ipdef_closure_free(handle: *mut IpdefClosure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Closure of the relation set `set`.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipdef_closure_apply(handle: *const IpdefClosure, set: u16, out: *mut u16) -> IpdefStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            return fail(IpdefStatus::NullPointer, "null handle or out");
        }
        match check_set(set) {
            Ok(s) => {
                *out = (*handle).cache.closure(s).0;
                IpdefStatus::Ok
            }
            Err(e) => e,
        }
    })
}

/// Whether `set` defines the relation at bit `target`.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipdef_closure_defines(
    handle: *const IpdefClosure,
    set: u16,
    target: u32,
    out: *mut bool,
) -> IpdefStatus {
    guard(|| {
        if handle.is_null() || out.is_null() {
            return fail(IpdefStatus::NullPointer, "null handle or out");
        }
        let Some(&sym) = R_PLUS.get(target as usize) else {
            return fail(IpdefStatus::InvalidArgument, format!("bit {target} is outside R+"));
        };
        match check_set(set) {
            Ok(s) => {
                *out = (*handle).cache.defines(s, sym);
                IpdefStatus::Ok
            }
            Err(e) => e,
        }
    })
}

/// Verify the bundled zeta specification `id`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ipdef_zeta_verify(
    id: *const c_char,
    samples: u64,
    seed: u64,
    out: *mut IpdefZetaOutcome,
) -> IpdefStatus {
    guard(|| {
        if out.is_null() {
            return fail(IpdefStatus::NullPointer, "null out");
        }
        let id = match read_str(id) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let Some(spec) = zeta::catalog().into_iter().find(|s| s.id == id) else {
            return fail(IpdefStatus::NotFound, format!("no zeta specification `{id}`"));
        };
        let report = zeta::verify(&spec, samples as usize, seed);
        *out = match (report.all_passed(), spec.expect_fail) {
            (true, false) => IpdefZetaOutcome::Pass,
            (false, false) => IpdefZetaOutcome::Fail,
            (false, true) => IpdefZetaOutcome::ExpectedFail,
            (true, true) => IpdefZetaOutcome::UnexpectedPass,
        };
        IpdefStatus::Ok
    })
}
