//! C ABI over `besq-core`.
//!
//! Every fallible call returns a [`BesqStatus`]; on failure the message is
//! kept per thread and can be copied out with [`besq_last_error_message`].
//! Paths are opaque handles released with [`besq_path_free`]. Arrays are
//! caller-allocated and passed as pointer plus length.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use besq_core::analysis::moment_curve;
use besq_core::domain::{classify, n_star};
use besq_core::sde::{self, rng::component, PathRecord, RngSpec, SimulationGrid, ZeroBoundary};
use besq_core::sympoly::{elementary_all, roots_from_polys};
use besq_core::{Error, ParticleConfig, SymPolyVector, SystemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesqStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    InvalidParameter = 3,
    Precondition = 4,
    Overflow = 5,
    NotRealRooted = 6,
    NotPsd = 7,
    NonFinite = 8,
    Construction = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesqBoundary {
    LocalDimension = 0,
    Free = 1,
}

/// Time grid and tolerances. Fill with [`besq_grid_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BesqGrid {
    pub t_end: f64,
    pub dt: f64,
    pub substep_cap: u32,
    pub tol_coll: f64,
    pub tol_zero: f64,
    pub boundary: BesqBoundary,
}

/// Classification verdicts. `n_star` is -1 and `nonneg_exists` is -1 where
/// they do not apply.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BesqClassification {
    pub n_star: i64,
    pub rk_plus: usize,
    pub rk_minus: usize,
    pub rk: usize,
    pub unique_strong: bool,
    pub reflected: bool,
    pub nonneg_exists: i32,
}

/// Opaque simulated path.
pub struct BesqPath(PathRecord);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> BesqStatus {
    match err {
        Error::InvalidParameter(_) => BesqStatus::InvalidParameter,
        Error::Precondition(_) => BesqStatus::Precondition,
        Error::Overflow(_) => BesqStatus::Overflow,
        Error::NotRealRooted { .. } => BesqStatus::NotRealRooted,
        Error::NotPsd { .. } => BesqStatus::NotPsd,
        Error::NonFinite { .. } => BesqStatus::NonFinite,
        Error::Construction { .. } => BesqStatus::Construction,
    }
}

struct Fail(BesqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BesqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            BesqStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            BesqStatus::Panic
        }
    }
}

unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Fail(BesqStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if ptr.is_null() {
        return Err(Fail(BesqStatus::NullPointer, format!("{what} is null")));
    }
    if len < need {
        return Err(Fail(BesqStatus::BufferTooSmall, format!("{what} holds {len}, need {need}")));
    }
    Ok(slice::from_raw_parts_mut(ptr, need))
}

fn non_null<T>(ptr: *const T, what: &str) -> Result<(), Fail> {
    if ptr.is_null() {
        Err(Fail(BesqStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn to_grid(g: &BesqGrid) -> Result<SimulationGrid, Fail> {
    let boundary = match g.boundary {
        BesqBoundary::LocalDimension => ZeroBoundary::LocalDimension,
        BesqBoundary::Free => ZeroBoundary::Free,
    };
    Ok(SimulationGrid::new(g.t_end, g.dt)?
        .with_substep_cap(g.substep_cap)?
        .with_tol_coll(g.tol_coll)?
        .with_tol_zero(g.tol_zero)?
        .with_boundary(boundary))
}

/// Copies the calling thread's last error message (NUL-terminated,
/// truncated to `cap`) and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn besq_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Grid with the library's default tolerances and substep cap.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn besq_grid_default(t_end: f64, dt: f64, out: *mut BesqGrid) -> BesqStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = SimulationGrid::new(t_end, dt)?;
        *out = BesqGrid {
            t_end: g.t_end,
            dt: g.dt,
            substep_cap: g.substep_cap,
            tol_coll: g.tol_coll,
            tol_zero: g.tol_zero,
            boundary: BesqBoundary::LocalDimension,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn besq_n_star(p: usize, alpha: i64, out: *mut usize) -> BesqStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = n_star(p, alpha)?;
        Ok(())
    })
}

/// Classifies the ordered start `x[0..p]`.
///
/// # Safety
/// `x` must point to `p` readable values and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn besq_classify(
    p: usize,
    alpha: f64,
    x: *const f64,
    out: *mut BesqClassification,
) -> BesqStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = SystemParams::new(p, alpha)?;
        let x = ParticleConfig::new(input(x, p, "x")?.to_vec())?;
        let r = classify(&params, &x)?;
        *out = BesqClassification {
            n_star: r.n_star.map_or(-1, |n| n as i64),
            rk_plus: r.rk_plus,
            rk_minus: r.rk_minus,
            rk: r.rk,
            unique_strong: r.unique_strong,
            reflected: r.reflected,
            nonneg_exists: r.nonneg_exists.map_or(-1, i32::from),
        };
        Ok(())
    })
}

/// Writes `e_1, ..., e_p` of `x[0..p]` (any order) to `out`.
///
/// # Safety
/// `x` must point to `p` readable values, `out` to `cap` writable ones.
#[no_mangle]
pub unsafe extern "C" fn besq_elementary(p: usize, x: *const f64, out: *mut f64, cap: usize) -> BesqStatus {
    guard(|| {
        let x = ParticleConfig::from_unsorted(input(x, p, "x")?.to_vec())?;
        output(out, cap, p, "out")?.copy_from_slice(elementary_all(&x).tail());
        Ok(())
    })
}

/// Ordered roots of the polynomial with elementary coordinates `e[0..p]`
/// (`e_1, ..., e_p`).
///
/// # Safety
/// `e` must point to `p` readable values, `out` to `cap` writable ones.
#[no_mangle]
pub unsafe extern "C" fn besq_roots(p: usize, e: *const f64, out: *mut f64, cap: usize) -> BesqStatus {
    guard(|| {
        let e = SymPolyVector::from_tail(input(e, p, "e")?);
        let roots = roots_from_polys(&e)?;
        output(out, cap, p, "out")?.copy_from_slice(roots.as_slice());
        Ok(())
    })
}

/// `E[e_n(t)]` for `n = 1..p` from `e0[0..p]`; needs `alpha >= p - 1`.
///
/// # Safety
/// `e0` must point to `p` readable values, `out` to `cap` writable ones.
#[no_mangle]
pub unsafe extern "C" fn besq_moment_curve(
    p: usize,
    alpha: f64,
    e0: *const f64,
    t: f64,
    out: *mut f64,
    cap: usize,
) -> BesqStatus {
    guard(|| {
        let params = SystemParams::new(p, alpha)?;
        let e0 = SymPolyVector::from_tail(input(e0, p, "e0")?);
        let m = moment_curve(&params, &e0, t)?;
        output(out, cap, p, "out")?.copy_from_slice(m.tail());
        Ok(())
    })
}

unsafe fn simulate(
    out: *mut *mut BesqPath,
    run: impl FnOnce() -> Result<PathRecord, Fail>,
) -> BesqStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let path = run()?;
        *out = Box::into_raw(Box::new(BesqPath(path)));
        Ok(())
    })
}

/// Simulates the particle system from the ordered start `x0[0..p]`.
///
/// # Safety
/// `x0` must point to `p` readable values, `grid` must be valid and `out`
/// valid for writes. The handle written to `out` is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn besq_simulate_particles(
    p: usize,
    alpha: f64,
    x0: *const f64,
    grid: *const BesqGrid,
    seed: u64,
    replicate: u32,
    out: *mut *mut BesqPath,
) -> BesqStatus {
    simulate(out, || {
        non_null(grid, "grid")?;
        let params = SystemParams::new(p, alpha)?;
        let x0 = ParticleConfig::new(input(x0, p, "x0")?.to_vec())?;
        let grid = to_grid(&*grid)?;
        let rng = RngSpec::new(seed, replicate, component::PARTICLES);
        Ok(sde::simulate_particles(&params, &x0, &grid, &rng)?)
    })
}

/// Simulates the elementary symmetric coordinates from `e0[0..p]`.
///
/// # Safety
/// As for [`besq_simulate_particles`].
#[no_mangle]
pub unsafe extern "C" fn besq_simulate_polys(
    p: usize,
    alpha: f64,
    e0: *const f64,
    grid: *const BesqGrid,
    seed: u64,
    replicate: u32,
    out: *mut *mut BesqPath,
) -> BesqStatus {
    simulate(out, || {
        non_null(grid, "grid")?;
        let params = SystemParams::new(p, alpha)?;
        let e0 = SymPolyVector::from_tail(input(e0, p, "e0")?);
        let grid = to_grid(&*grid)?;
        let rng = RngSpec::new(seed, replicate, component::POLYS);
        Ok(sde::simulate_polys(&params, &e0, &grid, &rng)?)
    })
}

/// Number of recorded time points, 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn besq_path_len(path: *const BesqPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.len())
}

/// Number of particles, 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn besq_path_dim(path: *const BesqPath) -> usize {
    path.as_ref().map_or(0, |p| p.0.p)
}

/// Whether the path reached the grid horizon.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn besq_path_completed(path: *const BesqPath) -> bool {
    path.as_ref().is_some_and(|p| p.0.completed())
}

/// Copies all recorded times.
///
/// # Safety
/// `path` must be a live handle and `out` point to `cap` writable values.
#[no_mangle]
pub unsafe extern "C" fn besq_path_times(path: *const BesqPath, out: *mut f64, cap: usize) -> BesqStatus {
    guard(|| {
        non_null(path, "path")?;
        let path = &(*path).0;
        output(out, cap, path.len(), "out")?.copy_from_slice(&path.times);
        Ok(())
    })
}

/// Copies the particles at time index `k` (recovered roots for a polynomial
/// path).
///
/// # Safety
/// `path` must be a live handle and `out` point to `cap` writable values.
#[no_mangle]
pub unsafe extern "C" fn besq_path_particles(
    path: *const BesqPath,
    k: usize,
    out: *mut f64,
    cap: usize,
) -> BesqStatus {
    guard(|| {
        non_null(path, "path")?;
        let path = &(*path).0;
        if k >= path.len() {
            return Err(Fail(
                BesqStatus::InvalidParameter,
                format!("time index {k} out of range for {} points", path.len()),
            ));
        }
        output(out, cap, path.p, "out")?.copy_from_slice(path.particles(k));
        Ok(())
    })
}

/// Releases a path handle; null is ignored.
///
/// # Safety
/// `path` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn besq_path_free(path: *mut BesqPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}
