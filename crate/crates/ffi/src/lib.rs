//! C ABI for `kacbench`.
//!
//! Systems and allocations are opaque heap handles released with their
//! `_free` function. Every call returns a [`KbStatus`]; on failure
//! [`kb_last_error`] describes the problem. Strings handed out by the
//! library are released with [`kb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kacbench::allocation::{
    classical_kac, verify_allocation_identity, Allocation, AllocationError, Cell,
};
use kacbench::cli::{evaluate, CommandKind, ExperimentConfig, Overrides, EXIT_ABSTAIN};
use kacbench::exact::{parse_rational, ratio_string, ExtValue};
use kacbench::group::{Group, GroupElement};
use kacbench::system::{Action, FiniteSystem, PointSet};
use num_bigint::BigInt;
use num_rational::BigRational;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// A search budget ran out before a value was found.
    Abstained = 4,
    Panic = 5,
}

/// A finite probability-preserving action.
pub struct KbSystem {
    inner: FiniteSystem,
}

/// A tabulated allocation together with its system and target.
pub struct KbAllocation {
    system: FiniteSystem,
    target: PointSet,
    table: Vec<Option<GroupElement>>,
    cells: Vec<Cell>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(KbStatus, String);

impl Failure {
    fn invalid(msg: impl ToString) -> Self {
        Failure(KbStatus::InvalidArgument, msg.to_string())
    }

    fn null(what: &str) -> Self {
        Failure(KbStatus::NullPointer, format!("`{what}` is null"))
    }
}

impl From<AllocationError> for Failure {
    fn from(e: AllocationError) -> Self {
        let status = if e.is_abstention() {
            KbStatus::Abstained
        } else {
            KbStatus::InvalidArgument
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            KbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(KbStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

unsafe fn point_set(
    fs: &FiniteSystem,
    points: *const usize,
    len: usize,
) -> Result<PointSet, Failure> {
    let pts = slice_arg(points, len, "points")?;
    PointSet::from_points(fs.n_points(), pts.iter().copied()).map_err(Failure::invalid)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `Z` acting on `0..n` by `x -> x + 1 mod n` with uniform masses.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_system_cycle(n: usize, out: *mut *mut KbSystem) -> KbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if n == 0 {
            return Err(Failure::invalid("cycle length must be positive"));
        }
        *out = Box::into_raw(Box::new(KbSystem {
            inner: FiniteSystem::cycle(n),
        }));
        Ok(())
    })
}

/// A finite system from a group name such as `"Z^2"` or `"C4xC3"`.
///
/// `generators` holds one permutation of `0..n_points` per group factor,
/// row after row. `masses` holds `n_points` rational strings such as
/// `"1/3"`, or is null for uniform masses.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_system_new(
    group: *const c_char,
    n_points: usize,
    masses: *const *const c_char,
    generators: *const usize,
    out: *mut *mut KbSystem,
) -> KbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let group: Group = str_arg(group, "group")?.parse().map_err(Failure::invalid)?;
        if n_points == 0 {
            return Err(Failure::invalid("system has no points"));
        }
        let rank = group.rank();
        let flat = slice_arg(generators, rank * n_points, "generators")?;
        let gens: Vec<Vec<usize>> = flat.chunks(n_points).map(<[usize]>::to_vec).collect();
        let masses = if masses.is_null() {
            vec![BigRational::new(BigInt::from(1), BigInt::from(n_points)); n_points]
        } else {
            slice_arg(masses, n_points, "masses")?
                .iter()
                .map(|&m| parse_rational(str_arg(m, "masses[i]")?).map_err(Failure::invalid))
                .collect::<Result<_, _>>()?
        };
        let inner = FiniteSystem::new(group, masses, gens).map_err(Failure::invalid)?;
        *out = Box::into_raw(Box::new(KbSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from a constructor and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kb_system_free(sys: *mut KbSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_system_n_points(sys: *const KbSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.n_points())
}

/// # Safety
/// `sys` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_system_is_ergodic(sys: *const KbSystem, out: *mut bool) -> KbStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| Failure::null("sys"))?;
        *out_arg(out, "out")? = sys.inner.is_ergodic();
        Ok(())
    })
}

/// Integral over the target of the return time, as `"num/den"`, for a
/// `Z`-action. `holds` is set when it equals 1.
///
/// # Safety
/// `points` must hold `len` indices; outputs must be valid for writes.
/// Free `*integral` with [`kb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kb_classical_kac(
    sys: *const KbSystem,
    points: *const usize,
    len: usize,
    integral: *mut *mut c_char,
    holds: *mut bool,
) -> KbStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| Failure::null("sys"))?;
        let integral = out_arg(integral, "integral")?;
        let holds = out_arg(holds, "holds")?;
        if !sys.inner.group().is_integers() {
            return Err(Failure::invalid("return times need a Z-action"));
        }
        let target = point_set(&sys.inner, points, len)?;
        let report = classical_kac(&sys.inner, &target)?;
        *holds = report.holds;
        *integral = into_c_string(ratio_string(&report.integral));
        Ok(())
    })
}

/// Greedy allocation onto the target along the standard enumeration.
///
/// # Safety
/// `points` must hold `len` indices and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_allocation_greedy(
    sys: *const KbSystem,
    points: *const usize,
    len: usize,
    budget: u64,
    out: *mut *mut KbAllocation,
) -> KbStatus {
    guard(|| {
        let sys = sys.as_ref().ok_or_else(|| Failure::null("sys"))?;
        let out = out_arg(out, "out")?;
        let fs = &sys.inner;
        let target = point_set(fs, points, len)?;
        let alloc = Allocation::standard(fs, target.clone(), budget)?;
        let table = alloc.table()?;
        let handle = KbAllocation {
            system: fs.clone(),
            target,
            table: (0..fs.n_points())
                .map(|x| table.kappa(x).cloned())
                .collect(),
            cells: table.cells(),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// # Safety
/// `alloc` must come from a constructor and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kb_allocation_free(alloc: *mut KbAllocation) {
    if !alloc.is_null() {
        drop(Box::from_raw(alloc));
    }
}

/// Writes the coordinates of `kappa(x)` into `coords` and their count into
/// `out_len`. When `cap` is too small only `out_len` is written and the
/// call fails with `InvalidArgument`.
///
/// # Safety
/// `coords` must hold `cap` values; `out_len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_allocation_kappa(
    alloc: *const KbAllocation,
    x: usize,
    coords: *mut i64,
    cap: usize,
    out_len: *mut usize,
) -> KbStatus {
    guard(|| {
        let alloc = alloc.as_ref().ok_or_else(|| Failure::null("alloc"))?;
        let out_len = out_arg(out_len, "out_len")?;
        let g = alloc
            .table
            .get(x)
            .ok_or_else(|| Failure::invalid(format!("point {x} out of range")))?
            .as_ref()
            .ok_or_else(|| {
                Failure::invalid(format!("allocation is undefined at null point {x}"))
            })?;
        let c = g.coords();
        *out_len = c.len();
        if cap < c.len() {
            return Err(Failure::invalid(format!(
                "need room for {} coordinates",
                c.len()
            )));
        }
        if coords.is_null() {
            return Err(Failure::null("coords"));
        }
        std::slice::from_raw_parts_mut(coords, c.len()).copy_from_slice(c);
        Ok(())
    })
}

/// `|B(x)|`, zero off the target.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_allocation_cell_size(
    alloc: *const KbAllocation,
    x: usize,
    out: *mut usize,
) -> KbStatus {
    guard(|| {
        let alloc = alloc.as_ref().ok_or_else(|| Failure::null("alloc"))?;
        let cell = alloc
            .cells
            .get(x)
            .ok_or_else(|| Failure::invalid(format!("point {x} out of range")))?;
        *out_arg(out, "out")? = cell.len();
        Ok(())
    })
}

/// Both sides of the transport identity for `f` as a JSON object
/// `{"lhs": "n/d", "rhs": "n/d", "equal": bool}`. `f` holds one value per
/// point, written as rationals or `"inf"`.
///
/// # Safety
/// `f` must hold one string per point; `out_json` must be valid for writes.
/// Free `*out_json` with [`kb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kb_allocation_identity(
    alloc: *const KbAllocation,
    f: *const *const c_char,
    len: usize,
    out_json: *mut *mut c_char,
) -> KbStatus {
    guard(|| {
        let alloc = alloc.as_ref().ok_or_else(|| Failure::null("alloc"))?;
        let out_json = out_arg(out_json, "out_json")?;
        let values: Vec<ExtValue> = slice_arg(f, len, "f")?
            .iter()
            .map(|&v| str_arg(v, "f[i]")?.parse().map_err(Failure::invalid))
            .collect::<Result<_, _>>()?;
        let a = Allocation::from_table(&alloc.system, alloc.target.clone(), alloc.table.clone())?;
        let report = verify_allocation_identity(&a, &values)?;
        *out_json = into_c_string(serde_json::to_string(&report).expect("reports serialize"));
        Ok(())
    })
}

/// Runs a workbench command (`"verify-kac"`, `"census"`, ...) on a TOML
/// config and returns the JSON report body. `exit_code` receives the code
/// the command-line tool would exit with. Config errors fail with
/// `InvalidArgument`; an abstaining run returns `Abstained` with the body
/// still written.
///
/// # Safety
/// Strings must be NUL-terminated; outputs must be valid for writes.
/// Free `*out_json` with [`kb_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kb_run_command(
    command: *const c_char,
    config_toml: *const c_char,
    out_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> KbStatus {
    guard(|| {
        let out_json = out_arg(out_json, "out_json")?;
        let exit_code = out_arg(exit_code, "exit_code")?;
        let name = str_arg(command, "command")?;
        let kind = CommandKind::from_name(name)
            .ok_or_else(|| Failure::invalid(format!("unknown command `{name}`")))?;
        let cfg = ExperimentConfig::parse(str_arg(config_toml, "config_toml")?)
            .map_err(Failure::invalid)?;
        let eval = evaluate(kind, &cfg, &Overrides::default()).map_err(Failure::invalid)?;
        *exit_code = eval.exit_code();
        *out_json = into_c_string(eval.body.to_string());
        if eval.exit_code() == EXIT_ABSTAIN {
            return Err(Failure(KbStatus::Abstained, eval.unresolved().join(", ")));
        }
        Ok(())
    })
}
