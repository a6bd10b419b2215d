//! C ABI over the superadiabatic engine.
//!
//! Every function returns a [`SaStatus`]. On failure a description is kept
//! per thread and can be read with [`sa_last_error_message`]. Iteration
//! results live behind the opaque [`SaStack`] handle, released with
//! [`sa_stack_free`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use superadiabatic::{
    invariant_to_controls, iterate, landau_zener, populations, propagate, shortcut_bc_check, Error,
    InvariantAnsatz, IterationStack, LZParams, Spinor,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooFewSamples = 3,
    OutOfRange = 4,
    LevelCrossing = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Iteration stack of a Landau-Zener sweep.
pub struct SaStack {
    stack: IterationStack,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> SaStatus {
    match err {
        Error::TooFewSamples { .. } | Error::EvenSampleCount(_) => SaStatus::TooFewSamples,
        Error::OrderOutOfRange { .. } => SaStatus::OutOfRange,
        Error::LevelCrossing(_) => SaStatus::LevelCrossing,
        Error::Singular | Error::NotUnitary(_) => SaStatus::Numerical,
        _ => SaStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SaStatus>) -> SaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SaStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            SaStatus::Panic
        }
    }
}

fn check<T>(r: superadiabatic::Result<T>) -> Result<T, SaStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), SaStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(SaStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sa_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds the linear sweep `Ω_R = rabi`, `Δ = chirp·(t − duration/2)` on
/// `samples` points and iterates it to order `j_max`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_lz_stack_create(
    chirp: f64,
    rabi: f64,
    duration: f64,
    samples: usize,
    j_max: usize,
    out: *mut *mut SaStack,
) -> SaStatus {
    guard(|| {
        non_null(out, "out")?;
        let protocol = check(landau_zener(LZParams { chirp, rabi, duration }, samples))?;
        let stack = check(iterate(&protocol, j_max))?;
        *out = Box::into_raw(Box::new(SaStack { stack }));
        Ok(())
    })
}

/// # Safety
/// `stack` must be null or a handle from [`sa_lz_stack_create`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sa_stack_free(stack: *mut SaStack) {
    if !stack.is_null() {
        drop(Box::from_raw(stack));
    }
}

/// # Safety
/// `stack` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sa_stack_sample_count(stack: *const SaStack, out: *mut usize) -> SaStatus {
    guard(|| {
        non_null(stack, "stack")?;
        non_null(out, "out")?;
        *out = (*stack).stack.grid.len();
        Ok(())
    })
}

/// # Safety
/// `stack` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sa_stack_max_order(stack: *const SaStack, out: *mut usize) -> SaStatus {
    guard(|| {
        non_null(stack, "stack")?;
        non_null(out, "out")?;
        *out = (*stack).stack.j_max();
        Ok(())
    })
}

/// Copies the σx, σy, σz components of `H₀^(j)` into three arrays of
/// `len` entries each; `len` must be at least the sample count.
///
/// # Safety
/// `stack` must be a live handle; `x`, `y`, `z` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sa_stack_modified_hamiltonian(
    stack: *const SaStack,
    j: usize,
    x: *mut f64,
    y: *mut f64,
    z: *mut f64,
    len: usize,
) -> SaStatus {
    guard(|| {
        non_null(stack, "stack")?;
        non_null(x, "x")?;
        non_null(y, "y")?;
        non_null(z, "z")?;
        let h = check((*stack).stack.modified_hamiltonian(j))?;
        if len < h.len() {
            set_error(format!("buffer holds {len} samples, need {}", h.len()));
            return Err(SaStatus::BufferTooSmall);
        }
        for (i, c) in h.iter().enumerate() {
            *x.add(i) = c.x;
            *y.add(i) = c.y;
            *z.add(i) = c.z;
        }
        Ok(())
    })
}

/// Final population of the first bare state after evolving `|1⟩` under
/// `H₀^(j)`.
///
/// # Safety
/// `stack` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sa_stack_final_population(
    stack: *const SaStack,
    j: usize,
    out: *mut f64,
) -> SaStatus {
    guard(|| {
        non_null(stack, "stack")?;
        non_null(out, "out")?;
        let s = &(*stack).stack;
        let h = check(s.modified_hamiltonian(j))?;
        let traj = check(propagate(&s.grid, &h, &Spinor::ground()))?;
        *out = populations(&traj).final_p1();
        Ok(())
    })
}

/// Boundary-condition check for `H₀^(j)` against `threshold`; writes 1 when
/// it holds and 0 otherwise.
///
/// # Safety
/// `stack` must be a live handle and `passed` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sa_stack_boundary_check(
    stack: *const SaStack,
    j: usize,
    threshold: f64,
    passed: *mut i32,
) -> SaStatus {
    guard(|| {
        non_null(stack, "stack")?;
        non_null(passed, "passed")?;
        let report = check(shortcut_bc_check(&(*stack).stack, j, threshold))?;
        *passed = i32::from(report.passed);
        Ok(())
    })
}

/// Controls of the invariant-based inversion pulse of length `duration`,
/// sampled on `len` points into `rabi` and `detuning`.
///
/// # Safety
/// `rabi` and `detuning` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sa_invariant_controls(
    duration: f64,
    rabi: *mut f64,
    detuning: *mut f64,
    len: usize,
) -> SaStatus {
    guard(|| {
        non_null(rabi, "rabi")?;
        non_null(detuning, "detuning")?;
        let ansatz = check(InvariantAnsatz::new(duration))?;
        let protocol = check(invariant_to_controls(&ansatz, len))?;
        for (i, (o, d)) in protocol.omega_r.iter().zip(&protocol.delta).enumerate() {
            *rabi.add(i) = *o;
            *detuning.add(i) = *d;
        }
        Ok(())
    })
}
