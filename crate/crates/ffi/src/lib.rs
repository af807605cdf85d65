//! C ABI for `homrate`.
//!
//! Every fallible function returns an [`HrStatus`]; on failure the message
//! is kept per thread and read with [`hr_last_error_message`]. Objects are
//! opaque handles released with their `_free` function. Panics are caught
//! at the boundary and reported as [`HrStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use homrate::effective::{hbar_estimate, hbar_formula_3d, EstimateConfig, Method};
use homrate::engine::{default_dt, lower_value_estimate, upper_value_estimate};
use homrate::experiments::{emit_report, rate_sweep, RateMethod, RateReport, RunConfig};
use homrate::game::{Example, GameSpec, PlanarGame};
use homrate::policies::baseline_families;
use homrate::solver::{solve_micro, InitialData, MicroGrid, ScalarField};
use homrate::torus::ProfileKind;
use homrate::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    InvalidArgument = 1,
    Precondition = 2,
    NonFinite = 3,
    PolicyInvariant = 4,
    MomentumOverflow = 5,
    NotConvex = 6,
    Parse = 7,
    Io = 8,
    AuditFailed = 9,
    NullPointer = 10,
    Panic = 11,
}

pub const HR_PROFILE_PAPER: i32 = 0;
pub const HR_PROFILE_EXPERIMENTS: i32 = 1;

pub const HR_METHOD_FORMULA: i32 = 0;
pub const HR_METHOD_GAME: i32 = 1;
pub const HR_METHOD_PDE: i32 = 2;

pub const HR_RATE_GAME_UPPER: i32 = 0;
pub const HR_RATE_GAME_LOWER: i32 = 1;
pub const HR_RATE_PDE: i32 = 2;

/// An example game (planar or spatial) with its bump profile.
pub struct HrGame {
    spec: GameSpec,
}

/// A grid function, e.g. the solution of the oscillatory problem.
pub struct HrField {
    field: ScalarField,
}

/// Values across ε with their log-log fit.
pub struct HrRateReport {
    report: RateReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(HrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => HrStatus::InvalidArgument,
            Error::Precondition(_) => HrStatus::Precondition,
            Error::NonFinite(_) => HrStatus::NonFinite,
            Error::PolicyInvariant { .. } => HrStatus::PolicyInvariant,
            Error::MomentumOverflow { .. } => HrStatus::MomentumOverflow,
            Error::NotConvex(_) => HrStatus::NotConvex,
            Error::AuditFailed(_) => HrStatus::AuditFailed,
            Error::Parse(_) => HrStatus::Parse,
            Error::Io { .. } => HrStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(HrStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HrStatus::Panic
        }
    }
}

fn non_null<T>(ptr: *const T, name: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        Err(Failure(HrStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    non_null(ptr, name)?;
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or point to a writable value.
unsafe fn put<T>(ptr: *mut T, value: T, name: &str) -> Result<(), Failure> {
    non_null(ptr, name)?;
    ptr.write(value);
    Ok(())
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string.
unsafe fn path(ptr: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    non_null(ptr, name)?;
    let s = CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

fn profile(code: i32) -> Result<ProfileKind, Failure> {
    match code {
        HR_PROFILE_PAPER => Ok(ProfileKind::Paper),
        HR_PROFILE_EXPERIMENTS => Ok(ProfileKind::Experiments),
        other => Err(invalid(format!("unknown profile code {other}"))),
    }
}

/// Length in bytes of the last error message on this thread, including the
/// terminating NUL; 0 if there is none.
#[no_mangle]
pub extern "C" fn hr_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes_with_nul().len()))
}

/// Copies the last error message into `buf` (at most `len` bytes, always
/// NUL-terminated when `len > 0`). Returns the number of bytes copied,
/// excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        let n = bytes.len().min(len - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Creates the planar (`dim = 2`) or spatial (`dim = 3`) example.
///
/// # Safety
/// `out` must point to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn hr_game_new(dim: u32, profile_code: i32, out: *mut *mut HrGame) -> HrStatus {
    guard(|| {
        let kind = profile(profile_code)?;
        let spec = match dim {
            2 => GameSpec::new(Example::Planar, kind.planar()),
            3 => GameSpec::new(Example::Spatial, kind.spatial()),
            other => return Err(invalid(format!("dimension must be 2 or 3, got {other}"))),
        };
        put(out, Box::into_raw(Box::new(HrGame { spec })), "out")
    })
}

/// # Safety
/// `game` must be null or a handle from [`hr_game_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_game_free(game: *mut HrGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Dimension of the game, 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_game_dim(game: *const HrGame) -> u32 {
    game.as_ref().map_or(0, |g| g.spec.dim() as u32)
}

/// Closed-form `H(x, p)`; `x` and `p` hold `hr_game_dim` values each.
///
/// # Safety
/// `game` must be a live handle; `x`, `p` must point to `dim` values and
/// `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hr_game_hamiltonian(game: *const HrGame, x: *const f64, p: *const f64, out: *mut f64) -> HrStatus {
    guard(|| {
        non_null(game, "game")?;
        let spec = &(*game).spec;
        let d = spec.dim();
        let h = spec.hamiltonian(slice(x, d, "x")?, slice(p, d, "p")?)?;
        put(out, h, "out")
    })
}

/// Min-max (upper) and max-min (lower) Hamiltonians by grid search with
/// `res` points per action axis.
///
/// # Safety
/// As for [`hr_game_hamiltonian`], with two output pointers.
#[no_mangle]
pub unsafe extern "C" fn hr_game_oracle(
    game: *const HrGame,
    x: *const f64,
    p: *const f64,
    res: usize,
    out_upper: *mut f64,
    out_lower: *mut f64,
) -> HrStatus {
    guard(|| {
        non_null(game, "game")?;
        let spec = &(*game).spec;
        let d = spec.dim();
        let v = spec.oracle(slice(x, d, "x")?, slice(p, d, "p")?, res)?;
        put(out_upper, v.upper, "out_upper")?;
        put(out_lower, v.lower, "out_lower")
    })
}

/// Upper value estimate of the planar game from the origin on `[0, horizon]`
/// with step `ε/200` against the baseline Player II family.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hr_upper_value(profile_code: i32, eps: f64, horizon: f64, seed: u64, out: *mut f64) -> HrStatus {
    guard(|| {
        let game = PlanarGame::new(profile(profile_code)?.planar());
        let est = upper_value_estimate(&game, eps, &baseline_families(seed).1, horizon, default_dt(eps))?;
        put(out, est.value, "out")
    })
}

/// Lower value estimate against the adversarial control, minimised over the
/// baseline Player I family.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hr_lower_value(profile_code: i32, eps: f64, horizon: f64, out: *mut f64) -> HrStatus {
    guard(|| {
        let game = PlanarGame::new(profile(profile_code)?.planar());
        let est = lower_value_estimate(&game, eps, &baseline_families(0).0, horizon, default_dt(eps))?;
        put(out, est.value, "out")
    })
}

/// `max_i h(p_i)` with `h(γ) = max(0, 400|γ| - 200)`.
///
/// # Safety
/// `p` must point to three values and `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hr_hbar_formula(p: *const f64, out: *mut f64) -> HrStatus {
    guard(|| {
        let p = slice(p, 3, "p")?;
        put(out, hbar_formula_3d(&[p[0], p[1], p[2]]), "out")
    })
}

/// Estimate of the effective Hamiltonian of the spatial example.
/// `resolution` is the torus size for the PDE method and ignored otherwise.
///
/// # Safety
/// `p` must point to three values; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_hbar_estimate(
    p: *const f64,
    method: i32,
    profile_code: i32,
    horizon: f64,
    resolution: usize,
    seed: u64,
    out_value: *mut f64,
    out_residual: *mut f64,
) -> HrStatus {
    guard(|| {
        let p = slice(p, 3, "p")?;
        let method = match method {
            HR_METHOD_FORMULA => Method::Formula,
            HR_METHOD_GAME => Method::Game,
            HR_METHOD_PDE => Method::Pde,
            other => return Err(invalid(format!("unknown method code {other}"))),
        };
        let cfg = EstimateConfig {
            profile: profile(profile_code)?.spatial(),
            horizon,
            resolution,
            seed,
        };
        let est = hbar_estimate(&[p[0], p[1], p[2]], method, &cfg)?;
        put(out_value, est.value, "out_value")?;
        put(out_residual, est.residual, "out_residual")
    })
}

/// Solves the planar oscillatory problem from `min(|x₁|, 1)` with `n2`
/// nodes per ε-cell and `x₁` spacing `h1` on `[-(2 + 3T), 2 + 3T]`.
///
/// # Safety
/// `out_field` must point to storage for a handle, `out_value` to a double.
#[no_mangle]
pub unsafe extern "C" fn hr_solve_micro(
    profile_code: i32,
    eps: f64,
    horizon: f64,
    n2: usize,
    h1: f64,
    out_field: *mut *mut HrField,
    out_value: *mut f64,
) -> HrStatus {
    guard(|| {
        non_null(out_field, "out_field")?;
        non_null(out_value, "out_value")?;
        let grid = MicroGrid::standard(horizon, h1, n2)?;
        let sol = solve_micro(profile(profile_code)?.planar(), eps, horizon, &grid, &InitialData::Clamped)?;
        put(out_value, sol.value, "out_value")?;
        put(out_field, Box::into_raw(Box::new(HrField { field: sol.field })), "out_field")
    })
}

/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_field_free(field: *mut HrField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of nodes, 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_field_len(field: *const HrField) -> usize {
    field.as_ref().map_or(0, |f| f.field.values.len())
}

/// Copies the row-major nodal values; `len` must equal [`hr_field_len`].
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hr_field_copy_values(field: *const HrField, buf: *mut f64, len: usize) -> HrStatus {
    guard(|| {
        non_null(field, "field")?;
        non_null(buf, "buf")?;
        let values = &(*field).field.values;
        if len != values.len() {
            return Err(invalid(format!("buffer holds {len} values, field has {}", values.len())));
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, len);
        Ok(())
    })
}

/// Multilinear interpolation at `x` (`dim` coordinates).
///
/// # Safety
/// `x` must point to `dim` values and `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hr_field_interpolate(field: *const HrField, x: *const f64, dim: usize, out: *mut f64) -> HrStatus {
    guard(|| {
        non_null(field, "field")?;
        let v = (*field).field.interpolate(slice(x, dim, "x")?)?;
        put(out, v, "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hr_field_write_binary(field: *const HrField, path_ptr: *const c_char) -> HrStatus {
    guard(|| {
        non_null(field, "field")?;
        Ok((*field).field.write_binary(&path(path_ptr, "path")?)?)
    })
}

/// Runs a rate sweep over `n_eps` values of ε with the default settings of
/// the chosen method.
///
/// # Safety
/// `eps` must point to `n_eps` values and `out` to storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn hr_rate_sweep(
    method: i32,
    profile_code: i32,
    eps: *const f64,
    n_eps: usize,
    seed: u64,
    out: *mut *mut HrRateReport,
) -> HrStatus {
    guard(|| {
        non_null(out, "out")?;
        let method = match method {
            HR_RATE_GAME_UPPER => RateMethod::GameUpper,
            HR_RATE_GAME_LOWER => RateMethod::GameLower,
            HR_RATE_PDE => RateMethod::Pde,
            other => return Err(invalid(format!("unknown rate method code {other}"))),
        };
        let cfg = RunConfig {
            profile: profile(profile_code)?,
            eps: slice(eps, n_eps, "eps")?.to_vec(),
            seed,
            ..RunConfig::default()
        };
        let report = rate_sweep(method, &cfg)?;
        put(out, Box::into_raw(Box::new(HrRateReport { report })), "out")
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_report_free(report: *mut HrRateReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of `(ε, value)` pairs, 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_report_len(report: *const HrRateReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.pairs.len())
}

/// Pair `i`, ε descending.
///
/// # Safety
/// Outputs must be writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hr_report_pair(report: *const HrRateReport, i: usize, eps: *mut f64, value: *mut f64) -> HrStatus {
    guard(|| {
        non_null(report, "report")?;
        let pairs = &(*report).report.pairs;
        let &(e, v) = pairs
            .get(i)
            .ok_or_else(|| invalid(format!("index {i} out of range for {} pairs", pairs.len())))?;
        put(eps, e, "eps")?;
        put(value, v, "value")
    })
}

/// Fitted log-log slope and R².
///
/// # Safety
/// Outputs must be writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hr_report_fit(report: *const HrRateReport, slope: *mut f64, r_squared: *mut f64) -> HrStatus {
    guard(|| {
        non_null(report, "report")?;
        let fit = (*report).report.fit.ok_or_else(|| invalid("report has no fit"))?;
        put(slope, fit.slope, "slope")?;
        put(r_squared, fit.r_squared, "r_squared")
    })
}

/// Writes the CSV and, if `svg_path` is not null, the log-log plot.
///
/// # Safety
/// Paths must be NUL-terminated UTF-8 strings (`svg_path` may be null).
#[no_mangle]
pub unsafe extern "C" fn hr_report_write(report: *const HrRateReport, csv_path: *const c_char, svg_path: *const c_char) -> HrStatus {
    guard(|| {
        non_null(report, "report")?;
        let csv = path(csv_path, "csv_path")?;
        let svg = if svg_path.is_null() { None } else { Some(path(svg_path, "svg_path")?) };
        Ok(emit_report(&(*report).report, &csv, svg.as_deref())?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 512];
        let n = unsafe { hr_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let bytes: Vec<u8> = buf[..n].iter().map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn game_round_trip() {
        let mut g = ptr::null_mut();
        assert_eq!(unsafe { hr_game_new(3, HR_PROFILE_PAPER, &mut g) }, HrStatus::Ok);
        assert_eq!(unsafe { hr_game_dim(g) }, 3);
        let mut h = 0.0;
        let (x, p) = ([0.0; 3], [1.0, 0.0, 0.0]);
        assert_eq!(unsafe { hr_game_hamiltonian(g, x.as_ptr(), p.as_ptr(), &mut h) }, HrStatus::Ok);
        assert_eq!(h, 199.0);
        unsafe { hr_game_free(g) };
    }

    #[test]
    fn errors_carry_codes_and_messages() {
        let mut g = ptr::null_mut();
        assert_eq!(unsafe { hr_game_new(4, HR_PROFILE_PAPER, &mut g) }, HrStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(last_error().contains("dimension"));
        assert!(hr_last_error_length() > 0);
        let mut h = 0.0;
        assert_eq!(unsafe { hr_hbar_formula(ptr::null(), &mut h) }, HrStatus::NullPointer);
        let mut f = ptr::null_mut();
        let mut v = 0.0;
        let s = unsafe { hr_solve_micro(HR_PROFILE_EXPERIMENTS, 0.25, 1.0, 8, 0.25, &mut f, &mut v) };
        assert_eq!(s, HrStatus::Precondition);
        assert!(last_error().contains("N ≥ 32"));
    }

    #[test]
    fn formula_through_the_boundary() {
        let mut h = 0.0;
        assert_eq!(unsafe { hr_hbar_formula([2.0, 0.0, -1.0].as_ptr(), &mut h) }, HrStatus::Ok);
        assert_eq!(h, 600.0);
    }

    #[test]
    fn free_accepts_null() {
        unsafe {
            hr_game_free(ptr::null_mut());
            hr_field_free(ptr::null_mut());
            hr_report_free(ptr::null_mut());
        }
    }
}
