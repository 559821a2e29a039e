//! C ABI for `skdescent`.
//!
//! Instances, random streams and dynamics states are opaque handles created
//! by `*_new`/`*_generate` functions and released with the matching `*_free`.
//! Every fallible call returns an [`SkStatus`]; on failure a description is
//! available from [`sk_last_error_message`] on the same thread. Outputs are
//! written only on success. Panics never cross the boundary; they surface as
//! [`SkStatus::Panic`].
//!
//! Spin arrays are `int8_t` with values `-1` or `+1`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use skdescent::dynamics::{step, StepOutcome};
use skdescent::experiment::{protocol_fixed_budget, protocol_fixed_starts, FixedInstance};
use skdescent::{
    brute_force_ground_state, delta_spectrum, energy, fit_scaling, generate_couplings, init_state,
    is_one_flip_stable, random_config, run_trajectory, sample_depth, select_site, CouplingMatrix,
    DynamicsState, EnergyStats, Error, GaussianInstances, LambdaParam, SpinConfig, Stream,
    GENERATOR_VERSION,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SizeLimit = 4,
    Io = 5,
    Panic = 6,
    Internal = 7,
}

/// Coupling matrix handle.
pub struct SkInstance(CouplingMatrix);

/// Seeded random stream handle.
pub struct SkStream(Stream);

/// Dynamics state handle (spins, local fields, energy, flip count).
pub struct SkState(DynamicsState);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SkRunRecord {
    pub flips: u64,
    pub final_energy_per_spin: f64,
    pub converged: bool,
    pub start_seed: u64,
}

/// Protocol summary. `tau*` are meaningful only when `has_tau`, `h_n*` only
/// when `has_h_n`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SkEnergyStats {
    pub n: u64,
    pub lambda: f64,
    pub nreal: u32,
    pub starts_or_budget: u64,
    pub runs: u64,
    pub has_tau: bool,
    pub tau: f64,
    pub tau_stderr: f64,
    pub has_h_n: bool,
    pub h_n: f64,
    pub h_n_stderr: f64,
    pub truncated_runs: u64,
    pub discarded_runs: u64,
    pub flagged_realizations: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SkScalingFit {
    pub lambda: f64,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub sizes_used: u64,
    pub sizes_excluded: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(SkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) | Error::Usage { .. } | Error::Parse(_) => {
                SkStatus::InvalidArgument
            }
            Error::DimensionMismatch { .. } => SkStatus::DimensionMismatch,
            Error::SizeLimit { .. } => SkStatus::SizeLimit,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => SkStatus::Io,
            Error::ThreadPool(_) => SkStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SkStatus::NullPointer, format!("`{what}` is NULL"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SkStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {msg}"));
            SkStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn spins_from(p: *const i8, len: usize) -> Result<SpinConfig, Failure> {
    if p.is_null() {
        return Err(null("spins"));
    }
    Ok(SpinConfig::new(slice::from_raw_parts(p, len).to_vec())?)
}

fn lambda(v: f64) -> Result<LambdaParam, Failure> {
    Ok(LambdaParam::new(v)?)
}

unsafe fn write_spins(out: *mut i8, len: usize, spins: &SpinConfig) -> Result<(), Failure> {
    if out.is_null() {
        return Ok(());
    }
    if len != spins.len() {
        return Err(Error::DimensionMismatch {
            expected: spins.len(),
            found: len,
        }
        .into());
    }
    ptr::copy_nonoverlapping(spins.as_slice().as_ptr(), out, len);
    Ok(())
}

fn stats_to_c(s: &EnergyStats) -> SkEnergyStats {
    SkEnergyStats {
        n: s.n as u64,
        lambda: s.lambda,
        nreal: s.nreal,
        starts_or_budget: s.starts_or_budget,
        runs: s.runs,
        has_tau: s.tau.is_some(),
        tau: s.tau.unwrap_or(f64::NAN),
        tau_stderr: s.tau_stderr.unwrap_or(f64::NAN),
        has_h_n: s.h_n.is_some(),
        h_n: s.h_n.unwrap_or(f64::NAN),
        h_n_stderr: s.h_n_stderr.unwrap_or(f64::NAN),
        truncated_runs: s.truncated_runs,
        discarded_runs: s.discarded_runs,
        flagged_realizations: s.flagged_realizations.len() as u64,
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Identifier of the instance generator, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sk_generator_version() -> *const c_char {
    static V: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    V.get_or_init(|| CString::new(GENERATOR_VERSION).expect("no NULs"))
        .as_ptr()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_generate(
    n: usize,
    seed: u64,
    out: *mut *mut SkInstance,
) -> SkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = generate_couplings(n, seed)?;
        *out = Box::into_raw(Box::new(SkInstance(m)));
        Ok(())
    })
}

/// Builds an instance from the strict upper triangle in row-major order
/// (`n * (n - 1) / 2` values).
///
/// # Safety
/// `upper` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_from_upper(
    n: usize,
    upper: *const f64,
    len: usize,
    out: *mut *mut SkInstance,
) -> SkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let values: &[f64] = if len == 0 {
            &[]
        } else if upper.is_null() {
            return Err(null("upper"));
        } else {
            slice::from_raw_parts(upper, len)
        };
        let m = CouplingMatrix::from_upper(n, values)?;
        *out = Box::into_raw(Box::new(SkInstance(m)));
        Ok(())
    })
}

/// # Safety
/// `inst` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_free(inst: *mut SkInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of spins, or 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_size(inst: *const SkInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.n())
}

/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_instance_coupling(
    inst: *const SkInstance,
    i: usize,
    j: usize,
    out: *mut f64,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = deref_mut(out, "out")?;
        let n = inst.0.n();
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "index ({i},{j}) out of range for n = {n}"
            ))
            .into());
        }
        *out = inst.0.get(i, j);
        Ok(())
    })
}

/// Total energy `H` of `spins`.
///
/// # Safety
/// `spins` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_energy(
    inst: *const SkInstance,
    spins: *const i8,
    len: usize,
    out: *mut f64,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = deref_mut(out, "out")?;
        *out = energy(&inst.0, &spins_from(spins, len)?)?;
        Ok(())
    })
}

/// # Safety
/// As [`sk_energy`].
#[no_mangle]
pub unsafe extern "C" fn sk_is_one_flip_stable(
    inst: *const SkInstance,
    spins: *const i8,
    len: usize,
    out: *mut bool,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = deref_mut(out, "out")?;
        *out = is_one_flip_stable(&inst.0, &spins_from(spins, len)?)?;
        Ok(())
    })
}

/// Exhaustive ground state (n <= 24). `out_spins` may be NULL; otherwise it
/// receives one minimizer (spin 0 = +1) and `spins_len` must equal n.
///
/// # Safety
/// Non-NULL pointers must be valid for the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn sk_ground_state(
    inst: *const SkInstance,
    out_energy_per_spin: *mut f64,
    out_stable_states: *mut u64,
    out_spins: *mut i8,
    spins_len: usize,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let e = deref_mut(out_energy_per_spin, "out_energy_per_spin")?;
        let gt = brute_force_ground_state(&inst.0)?;
        write_spins(out_spins, spins_len, &gt.argmin_configs[0])?;
        *e = gt.energy_per_spin;
        if let Some(s) = out_stable_states.as_mut() {
            *s = gt.n_stable_states;
        }
        Ok(())
    })
}

/// New ChaCha8 stream; never NULL.
#[no_mangle]
pub extern "C" fn sk_stream_new(seed: u64) -> *mut SkStream {
    Box::into_raw(Box::new(SkStream(Stream::new(seed))))
}

/// # Safety
/// `stream` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_stream_free(stream: *mut SkStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Uniform random configuration into `out_spins[0..n]`.
///
/// # Safety
/// `stream` must be live; `out_spins` must hold `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn sk_random_config(
    stream: *mut SkStream,
    n: usize,
    out_spins: *mut i8,
) -> SkStatus {
    guard(|| {
        let stream = deref_mut(stream, "stream")?;
        if out_spins.is_null() {
            return Err(null("out_spins"));
        }
        let c = random_config(n, &mut stream.0)?;
        write_spins(out_spins, n, &c)
    })
}

/// One draw of the move depth `D <= 0`.
///
/// # Safety
/// `stream` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_sample_depth(
    stream: *mut SkStream,
    lambda_value: f64,
    out: *mut f64,
) -> SkStatus {
    guard(|| {
        let stream = deref_mut(stream, "stream")?;
        let out = deref_mut(out, "out")?;
        *out = sample_depth(lambda(lambda_value)?, &mut stream.0);
        Ok(())
    })
}

/// Index of the negative entry of `spectrum` closest to `depth`, or -1.
///
/// # Safety
/// `spectrum` must point to `len` doubles (may be NULL when `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn sk_select_site(
    spectrum: *const f64,
    len: usize,
    depth: f64,
    out_site: *mut i64,
) -> SkStatus {
    guard(|| {
        let out = deref_mut(out_site, "out_site")?;
        let values: &[f64] = if len == 0 {
            &[]
        } else if spectrum.is_null() {
            return Err(null("spectrum"));
        } else {
            slice::from_raw_parts(spectrum, len)
        };
        *out = select_site(values, depth).map_or(-1, |i| i as i64);
        Ok(())
    })
}

/// Runs one trajectory from `spins0`. `out_spins` (nullable) receives the
/// endpoint and must have `len` bytes.
///
/// # Safety
/// Pointers must be valid for the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn sk_run_trajectory(
    inst: *const SkInstance,
    spins0: *const i8,
    len: usize,
    lambda_value: f64,
    stream: *mut SkStream,
    max_flips: u64,
    out_record: *mut SkRunRecord,
    out_spins: *mut i8,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let stream = deref_mut(stream, "stream")?;
        let out = deref_mut(out_record, "out_record")?;
        let sigma0 = spins_from(spins0, len)?;
        let t = run_trajectory(
            &inst.0,
            &sigma0,
            lambda(lambda_value)?,
            &mut stream.0,
            max_flips,
        )?;
        write_spins(out_spins, len, t.endpoint.spins())?;
        *out = SkRunRecord {
            flips: t.record.flips,
            final_energy_per_spin: t.record.final_energy_per_spin,
            converged: t.record.converged,
            start_seed: t.record.start_seed,
        };
        Ok(())
    })
}

/// # Safety
/// `inst` must be live; `spins` must hold `len` bytes; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_state_new(
    inst: *const SkInstance,
    spins: *const i8,
    len: usize,
    out: *mut *mut SkState,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let st = init_state(&inst.0, &spins_from(spins, len)?)?;
        *out = Box::into_raw(Box::new(SkState(st)));
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_state_free(state: *mut SkState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// One move of the dynamics. `out_site` receives the flipped site, or -1
/// when the state is already 1-spin-flip stable.
///
/// # Safety
/// `state` must have been created from `inst`; all pointers live.
#[no_mangle]
pub unsafe extern "C" fn sk_state_step(
    state: *mut SkState,
    inst: *const SkInstance,
    lambda_value: f64,
    stream: *mut SkStream,
    out_site: *mut i64,
) -> SkStatus {
    guard(|| {
        let state = deref_mut(state, "state")?;
        let inst = deref(inst, "inst")?;
        let stream = deref_mut(stream, "stream")?;
        let out = deref_mut(out_site, "out_site")?;
        if state.0.n() != inst.0.n() {
            return Err(Error::DimensionMismatch {
                expected: state.0.n(),
                found: inst.0.n(),
            }
            .into());
        }
        *out = match step(&mut state.0, &inst.0, lambda(lambda_value)?, &mut stream.0) {
            StepOutcome::Flipped(k) => k as i64,
            StepOutcome::Converged => -1,
        };
        Ok(())
    })
}

/// # Safety
/// `state` and `inst` must be live and match in size.
#[no_mangle]
pub unsafe extern "C" fn sk_state_apply_flip(
    state: *mut SkState,
    inst: *const SkInstance,
    site: usize,
) -> SkStatus {
    guard(|| {
        let state = deref_mut(state, "state")?;
        let inst = deref(inst, "inst")?;
        Ok(state.0.apply_flip(&inst.0, site)?)
    })
}

/// Total energy of the state, NaN for NULL.
///
/// # Safety
/// `state` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn sk_state_energy(state: *const SkState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.energy())
}

/// Flips applied so far, 0 for NULL.
///
/// # Safety
/// `state` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn sk_state_flips(state: *const SkState) -> u64 {
    state.as_ref().map_or(0, |s| s.0.flips())
}

/// Copies `dE_i = s_i h_i` into `out[0..len]`; `len` must equal n.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sk_state_delta_spectrum(
    state: *const SkState,
    out: *mut f64,
    len: usize,
) -> SkStatus {
    guard(|| {
        let state = deref(state, "state")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = delta_spectrum(&state.0);
        if spec.len() != len {
            return Err(Error::DimensionMismatch {
                expected: spec.len(),
                found: len,
            }
            .into());
        }
        ptr::copy_nonoverlapping(spec.as_ptr(), out, len);
        Ok(())
    })
}

/// # Safety
/// `state` must be live; `out_spins` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sk_state_spins(
    state: *const SkState,
    out_spins: *mut i8,
    len: usize,
) -> SkStatus {
    guard(|| {
        let state = deref(state, "state")?;
        if out_spins.is_null() {
            return Err(null("out_spins"));
        }
        write_spins(out_spins, len, state.0.spins())
    })
}

/// Fixed-restart protocol on Gaussian instances seeded from `instance_seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_protocol_fixed_starts(
    n: usize,
    lambda_value: f64,
    starts: u32,
    nreal: u32,
    instance_seed: u64,
    seed: u64,
    out: *mut SkEnergyStats,
) -> SkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let src = GaussianInstances::new(instance_seed);
        let st = protocol_fixed_starts(&src, n, lambda(lambda_value)?, starts, nreal, seed)?;
        *out = stats_to_c(&st);
        Ok(())
    })
}

/// Fixed-restart protocol repeated on one given instance.
///
/// # Safety
/// `inst` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_protocol_fixed_starts_instance(
    inst: *const SkInstance,
    lambda_value: f64,
    starts: u32,
    nreal: u32,
    seed: u64,
    out: *mut SkEnergyStats,
) -> SkStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = deref_mut(out, "out")?;
        let src = FixedInstance(inst.0.clone());
        let st =
            protocol_fixed_starts(&src, inst.0.n(), lambda(lambda_value)?, starts, nreal, seed)?;
        *out = stats_to_c(&st);
        Ok(())
    })
}

/// Fixed-budget protocol on Gaussian instances seeded from `instance_seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_protocol_fixed_budget(
    n: usize,
    lambda_value: f64,
    flip_budget: u64,
    nreal: u32,
    instance_seed: u64,
    seed: u64,
    out: *mut SkEnergyStats,
) -> SkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let src = GaussianInstances::new(instance_seed);
        let st = protocol_fixed_budget(&src, n, lambda(lambda_value)?, flip_budget, nreal, seed)?;
        *out = stats_to_c(&st);
        Ok(())
    })
}

/// Least-squares power law over `(sizes[k], taus[k])`, leaving out sizes in
/// `exclude` (may be NULL when `exclude_len == 0`).
///
/// # Safety
/// `sizes` and `taus` must hold `len` elements, `exclude` `exclude_len`.
#[no_mangle]
pub unsafe extern "C" fn sk_fit_scaling(
    lambda_value: f64,
    sizes: *const usize,
    taus: *const f64,
    len: usize,
    exclude: *const usize,
    exclude_len: usize,
    out: *mut SkScalingFit,
) -> SkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        if len > 0 && (sizes.is_null() || taus.is_null()) {
            return Err(null("sizes/taus"));
        }
        let points: Vec<(usize, f64)> = if len == 0 {
            Vec::new()
        } else {
            slice::from_raw_parts(sizes, len)
                .iter()
                .copied()
                .zip(slice::from_raw_parts(taus, len).iter().copied())
                .collect()
        };
        let excluded: &[usize] = if exclude_len == 0 {
            &[]
        } else if exclude.is_null() {
            return Err(null("exclude"));
        } else {
            slice::from_raw_parts(exclude, exclude_len)
        };
        let fit = fit_scaling(lambda_value, &points, excluded)?;
        *out = SkScalingFit {
            lambda: fit.lambda,
            exponent: fit.exponent,
            prefactor: fit.prefactor,
            r_squared: fit.r_squared,
            sizes_used: fit.sizes_used.len() as u64,
            sizes_excluded: fit.sizes_excluded.len() as u64,
        };
        Ok(())
    })
}
