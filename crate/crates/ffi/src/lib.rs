//! C ABI for `liereach`.
//!
//! Runs produce an opaque [`LrTube`] handle that must be released with
//! [`lr_tube_free`]. Every fallible call returns an [`LrStatus`]; the message
//! for the most recent failure on the calling thread is available through
//! [`lr_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use liereach::config::ExperimentConfig;
use liereach::group::GroupModel;
use liereach::reach::{rkmk_reach, ReachTube};
use liereach::validation::mc_validate;
use liereach::ReachError;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    /// The run stopped early; the handle still holds the partial tube.
    InjectivityExceeded = 4,
    /// The run stopped early; the handle still holds the partial tube.
    NonMonotoneStep = 5,
    AngleAtCut = 6,
    BranchViolation = 7,
    IoError = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Opaque reach tube.
pub struct LrTube {
    tube: ReachTube,
    h: f64,
    stopped_at: Option<usize>,
}

/// Summary of a Monte-Carlo validation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LrValidation {
    pub samples: usize,
    pub checkpoints: usize,
    pub all_contained: bool,
    pub min_fraction: f64,
    /// NaN when no sample left the tube.
    pub first_violation_t: f64,
    pub worst_margin: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &ReachError) -> LrStatus {
    match e {
        ReachError::InvalidInterval { .. }
        | ReachError::DimensionMismatch { .. }
        | ReachError::GroupMismatch(_)
        | ReachError::OrderingViolation { .. }
        | ReachError::InvalidConfig(_) => LrStatus::InvalidArgument,
        ReachError::AngleAtCut { .. } => LrStatus::AngleAtCut,
        ReachError::BranchViolation { .. } => LrStatus::BranchViolation,
        ReachError::InjectivityExceeded { .. } => LrStatus::InjectivityExceeded,
        ReachError::NonMonotoneStep { .. } => LrStatus::NonMonotoneStep,
        ReachError::Io(_) => LrStatus::IoError,
        ReachError::Parse(_) => LrStatus::ParseError,
    }
}

fn fail(e: ReachError) -> LrStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn guard(f: impl FnOnce() -> LrStatus) -> LrStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic");
        LrStatus::Panic
    })
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LrStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(LrStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LrStatus::InvalidArgument
    })
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lr_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses an experiment from TOML text and runs it.
///
/// On success or early stop `*out` receives a new handle; on early stop the
/// status names the reason and the handle holds the steps computed so far.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lr_run(config_toml: *const c_char, out: *mut *mut LrTube) -> LrStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return LrStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(config_toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let exp = match ExperimentConfig::from_toml(text).and_then(|c| c.build()) {
            Ok(e) => e,
            Err(e) => return fail(e),
        };
        let h = exp.reach.h;
        let (handle, status) = match rkmk_reach(&exp.system, &exp.reach, &exp.init) {
            Ok(tube) => (LrTube { tube, h, stopped_at: None }, LrStatus::Ok),
            Err(a) => {
                let s = fail(a.error);
                (LrTube { tube: a.tube, h, stopped_at: Some(a.step) }, s)
            }
        };
        *out = Box::into_raw(Box::new(handle));
        status
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `tube` must come from [`lr_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lr_tube_free(tube: *mut LrTube) {
    if !tube.is_null() {
        drop(Box::from_raw(tube));
    }
}

/// Number of entries (steps + 1), or 0 for a null handle.
///
/// # Safety
/// `tube` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lr_tube_len(tube: *const LrTube) -> usize {
    tube.as_ref().map_or(0, |t| t.tube.len())
}

/// Algebra dimension (2 for the torus, 3 for SO(3)), or 0 for a null handle.
///
/// # Safety
/// `tube` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lr_tube_dim(tube: *const LrTube) -> usize {
    tube.as_ref()
        .and_then(|t| t.tube.entries.first())
        .map_or(0, |e| e.set.model().dim())
}

/// Number of doubles in a center: 9 for SO(3), 4 per torus factor.
///
/// # Safety
/// `tube` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lr_tube_center_len(tube: *const LrTube) -> usize {
    tube.as_ref()
        .and_then(|t| t.tube.entries.first())
        .map_or(0, |e| match e.set.model() {
            GroupModel::So3 => 9,
            GroupModel::Torus { factors } => 4 * factors,
        })
}

/// Index of the step that failed, written to `*step`; false if the run
/// completed. The tube then holds entries `0..=step`.
///
/// # Safety
/// `tube` must be null or a live handle; `step` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn lr_tube_stopped_at(tube: *const LrTube, step: *mut usize) -> bool {
    match tube.as_ref().and_then(|t| t.stopped_at) {
        Some(s) => {
            if !step.is_null() {
                *step = s;
            }
            true
        }
        None => false,
    }
}

/// Copies entry `index`: time, box bounds (`dim` doubles each), center
/// (row-major blocks, `center_len` doubles) and the recentering flag. Any
/// output pointer may be null to skip it.
///
/// # Safety
/// Non-null outputs must have room for the documented number of values.
#[no_mangle]
pub unsafe extern "C" fn lr_tube_entry(
    tube: *const LrTube,
    index: usize,
    t: *mut f64,
    lower: *mut f64,
    upper: *mut f64,
    center: *mut f64,
    recentered: *mut bool,
) -> LrStatus {
    guard(|| {
        let Some(handle) = tube.as_ref() else {
            set_error("null tube handle");
            return LrStatus::NullPointer;
        };
        let Some(e) = handle.tube.entries.get(index) else {
            set_error(format!("entry {index} out of range (len {})", handle.tube.len()));
            return LrStatus::OutOfRange;
        };
        if !t.is_null() {
            *t = e.t;
        }
        let lo = e.set.tangent.lower().0;
        let hi = e.set.tangent.upper().0;
        if !lower.is_null() {
            ptr::copy_nonoverlapping(lo.as_ptr(), lower, lo.len());
        }
        if !upper.is_null() {
            ptr::copy_nonoverlapping(hi.as_ptr(), upper, hi.len());
        }
        if !center.is_null() {
            let flat: Vec<f64> = e.set.center.to_blocks().concat();
            ptr::copy_nonoverlapping(flat.as_ptr(), center, flat.len());
        }
        if !recentered.is_null() {
            *recentered = e.recentered;
        }
        LrStatus::Ok
    })
}

/// Validates a tube against Monte-Carlo trajectories of the experiment in
/// `config_toml`, using its sampling settings and the given seed.
///
/// # Safety
/// `tube` must be a live handle, `config_toml` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lr_validate(
    tube: *const LrTube,
    config_toml: *const c_char,
    seed: u64,
    out: *mut LrValidation,
) -> LrStatus {
    guard(|| {
        let (Some(handle), false) = (tube.as_ref(), out.is_null()) else {
            set_error("null tube handle or output pointer");
            return LrStatus::NullPointer;
        };
        let text = match read_str(config_toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let exp = match ExperimentConfig::from_toml(text).and_then(|c| c.build()) {
            Ok(e) => e,
            Err(e) => return fail(e),
        };
        let vc = liereach::validation::ValidationConfig { seed, ..exp.validation };
        let rep = match mc_validate(&exp.system, &handle.tube, handle.h, &vc) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        *out = LrValidation {
            samples: rep.samples,
            checkpoints: rep.checkpoints.len(),
            all_contained: rep.all_contained(),
            min_fraction: rep.containment.iter().cloned().fold(1.0, f64::min),
            first_violation_t: rep.first_violation.as_ref().map_or(f64::NAN, |v| v.t),
            worst_margin: rep.worst_margin,
        };
        LrStatus::Ok
    })
}

/// `exp(hat(v))` on SO(3), written row-major to `r[9]`.
///
/// # Safety
/// `v` must point to 3 doubles and `r` to 9 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lr_so3_exp(v: *const f64, r: *mut f64) -> LrStatus {
    guard(|| {
        if v.is_null() || r.is_null() {
            set_error("null vector or matrix pointer");
            return LrStatus::NullPointer;
        }
        let v = std::slice::from_raw_parts(v, 3);
        match GroupModel::So3.exp(v) {
            Ok(g) => {
                ptr::copy_nonoverlapping(g.to_blocks()[0].as_ptr(), r, 9);
                LrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Principal logarithm of the row-major rotation `r[9]`, written to `v[3]`.
///
/// # Safety
/// `r` must point to 9 doubles and `v` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lr_so3_log(r: *const f64, v: *mut f64) -> LrStatus {
    guard(|| {
        if v.is_null() || r.is_null() {
            set_error("null vector or matrix pointer");
            return LrStatus::NullPointer;
        }
        let blocks = vec![std::slice::from_raw_parts(r, 9).to_vec()];
        let res = liereach::GroupElement::from_blocks(GroupModel::So3, &blocks).and_then(|g| GroupModel::So3.log(&g));
        match res {
            Ok(w) => {
                let w = w.0;
                ptr::copy_nonoverlapping(w.as_ptr(), v, 3);
                LrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
