//! C ABI over the `iverson` toolkit.
//!
//! Objects are opaque handles built from TOML spec strings (a table with a
//! `kind` key, as in run configs) and released with the matching `_free`.
//! Every fallible call returns an [`IversonStatus`]; on failure the message
//! is available from [`iverson_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use iverson::config::Spec;
use iverson::{Error, EtaMap, GammaMap, Grid, ResidualReport, ScaleFunction, SensitivityFamily};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IversonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Domain = 4,
    Range = 5,
    Param = 6,
    NotInvertible = 7,
    Excluded = 8,
    Io = 9,
    Other = 10,
    Panic = 11,
}

impl IversonStatus {
    fn of(e: &Error) -> Self {
        match e.root() {
            Error::Config(_) => IversonStatus::Config,
            Error::Domain(_) => IversonStatus::Domain,
            Error::Range(_) | Error::LinkRange(_) => IversonStatus::Range,
            Error::Param(_) | Error::NonMonotone(_) | Error::Constraint(_) => IversonStatus::Param,
            Error::NotInvertible(_) => IversonStatus::NotInvertible,
            Error::Excluded { .. } | Error::EmptyGrid(_) => IversonStatus::Excluded,
            Error::Io(_) | Error::Csv(_) => IversonStatus::Io,
            _ => IversonStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Status(IversonStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IversonStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IversonStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            let s = IversonStatus::of(&e);
            set_error(e.to_string());
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            IversonStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(IversonStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(IversonStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn spec(p: *const c_char) -> Result<Spec, Failure> {
    let s = text(p, "spec")?;
    toml::from_str(s).map_err(|e| Failure::Core(Error::Config(e.to_string())))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// A sensitivity family `ξ_s(x)`.
pub struct IversonFamily(SensitivityFamily);
/// A strictly monotone scale function.
pub struct IversonScale(ScaleFunction);
/// A map `η(λ, s)`.
pub struct IversonEta(EtaMap);
/// A map `γ(λ, s)`.
pub struct IversonGamma(GammaMap);
/// Samples of `x`, `λ` and `s`.
pub struct IversonGrid(Grid);

/// Summary of a residual sweep.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IversonReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub worst_point: [f64; 3],
    pub evaluated: usize,
    pub excluded: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<ResidualReport> for IversonReport {
    fn from(r: ResidualReport) -> Self {
        IversonReport {
            max_abs: r.max_abs,
            mean_abs: r.mean_abs,
            worst_point: r.worst_point,
            evaluated: r.evaluated,
            excluded: r.excluded,
            tolerance: r.tolerance,
            pass: r.pass,
        }
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iverson_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn iverson_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn release<T>(handle: *mut T) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `handle` must come from the matching constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iverson_family_free(handle: *mut IversonFamily) {
    release(handle)
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `handle` must come from the matching constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iverson_scale_free(handle: *mut IversonScale) {
    release(handle)
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `handle` must come from the matching constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iverson_eta_free(handle: *mut IversonEta) {
    release(handle)
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `handle` must come from the matching constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iverson_gamma_free(handle: *mut IversonGamma) {
    release(handle)
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `handle` must come from the matching constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iverson_grid_free(handle: *mut IversonGrid) {
    release(handle)
}

/// Builds a family from a TOML spec such as `kind = "fech_exp"\nrho_bar = 1`.
///
/// # Safety
/// `spec_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_family_new(spec_toml: *const c_char, out: *mut *mut IversonFamily) -> IversonStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let family = spec(spec_toml)?.to_family(Path::new("."))?;
        *out = Box::into_raw(Box::new(IversonFamily(family)));
        Ok(())
    })
}

/// `ξ_s(x)`
///
/// # Safety
/// `family` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_family_eval(family: *const IversonFamily, x: f64, s: f64, out: *mut f64) -> IversonStatus {
    guard(|| {
        let f = handle(family, "family")?;
        *out_ptr(out, "out")? = f.0.eval(x, s)?;
        Ok(())
    })
}

/// Builds a scale from a TOML spec such as `kind = "log"\na = 1`.
///
/// # Safety
/// `spec_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_scale_new(spec_toml: *const c_char, out: *mut *mut IversonScale) -> IversonStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let scale = spec(spec_toml)?.to_scale(Path::new("."))?;
        *out = Box::into_raw(Box::new(IversonScale(scale)));
        Ok(())
    })
}

/// # Safety
/// `scale` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_scale_eval(scale: *const IversonScale, x: f64, out: *mut f64) -> IversonStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(scale, "scale")?.0.eval(x)?;
        Ok(())
    })
}

/// # Safety
/// `scale` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_scale_invert(scale: *const IversonScale, y: f64, out: *mut f64) -> IversonStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(scale, "scale")?.0.invert(y)?;
        Ok(())
    })
}

/// # Safety
/// `spec_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_eta_new(spec_toml: *const c_char, out: *mut *mut IversonEta) -> IversonStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let eta = spec(spec_toml)?.to_eta(Path::new("."))?;
        *out = Box::into_raw(Box::new(IversonEta(eta)));
        Ok(())
    })
}

/// `η(λ, s)`
///
/// # Safety
/// `eta` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_eta_eval(eta: *const IversonEta, lambda: f64, s: f64, out: *mut f64) -> IversonStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(eta, "eta")?.0.eval(lambda, s)?;
        Ok(())
    })
}

/// # Safety
/// `spec_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_gamma_new(spec_toml: *const c_char, out: *mut *mut IversonGamma) -> IversonStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let gamma = spec(spec_toml)?.to_gamma(Path::new("."))?;
        *out = Box::into_raw(Box::new(IversonGamma(gamma)));
        Ok(())
    })
}

/// `γ(λ, s)`
///
/// # Safety
/// `gamma` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_gamma_eval(gamma: *const IversonGamma, lambda: f64, s: f64, out: *mut f64) -> IversonStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(gamma, "gamma")?.0.eval(lambda, s)?;
        Ok(())
    })
}

/// Grid from ascending samples; `λx` must stay within the hull of `x`.
///
/// # Safety
/// Each array must hold the stated number of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_grid_new(
    x: *const f64,
    nx: usize,
    lambda: *const f64,
    nl: usize,
    s: *const f64,
    ns: usize,
    out: *mut *mut IversonGrid,
) -> IversonStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let grid = Grid::new(
            slice(x, nx, "x")?.to_vec(),
            slice(lambda, nl, "lambda")?.to_vec(),
            slice(s, ns, "s")?.to_vec(),
        )?;
        *out = Box::into_raw(Box::new(IversonGrid(grid)));
        Ok(())
    })
}

/// Residual of `ξ_s(λx) = γ(λ,s)·ξ_η(λ,s)(x)` over the grid.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_similarity_residual(
    family: *const IversonFamily,
    gamma: *const IversonGamma,
    eta: *const IversonEta,
    grid: *const IversonGrid,
    tol: f64,
    out: *mut IversonReport,
) -> IversonStatus {
    guard(|| {
        let r = iverson::laws::iverson_residual(
            &handle(family, "family")?.0,
            &handle(gamma, "gamma")?.0,
            &handle(eta, "eta")?.0,
            &handle(grid, "grid")?.0,
            tol,
        )?;
        *out_ptr(out, "out")? = r.into();
        Ok(())
    })
}

/// Runs a TOML config file as the command-line tool would, writing the
/// report into `out_dir`; `exit_status` receives 0 when every check passes
/// and 1 otherwise.
///
/// # Safety
/// Both paths must be NUL-terminated strings; `exit_status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iverson_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    exit_status: *mut c_int,
) -> IversonStatus {
    guard(|| {
        let cfg_path = Path::new(text(config_path, "config_path")?);
        let out = Path::new(text(out_dir, "out_dir")?);
        let status = out_ptr(exit_status, "exit_status")?;
        let cfg = iverson::RunConfig::load(cfg_path)?;
        cfg.validate()?;
        let command = cfg
            .command
            .ok_or_else(|| Error::Config("config has no command".into()))?;
        let outcome = iverson::cli::run(command, &cfg, out)?;
        *status = outcome.exit_code();
        Ok(())
    })
}
