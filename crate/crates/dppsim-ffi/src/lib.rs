//! C ABI for the dppsim sampler.
//!
//! The surface is deliberately small: an opaque model handle built once
//! per parameter set, an opaque sample handle whose points are copied out
//! into caller-owned buffers, and a handful of scalar helpers. Every
//! fallible call returns a [`DppStatus`]; the human-readable cause of the
//! most recent failure on the current thread is available through
//! [`dpp_last_error_message`].
//!
//! Ownership rules: handles returned through `out` parameters are owned by
//! the caller and must be released with the matching `_free` function,
//! exactly once. All `_free` functions accept null. Buffers are always
//! allocated by the caller; the library never returns memory it expects
//! the caller to `free()`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dppsim::kernel::{GinibreSpectrum, RingBasis, SpectrumParams};
use dppsim::rng::SampleStream;
use dppsim::sampler::{sample_with_basis, GinibreSample, SamplerOptions};
use dppsim::transport::{quadratic_matching_cost, tv_config_distance, Configuration};
use num_complex::Complex64;

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DppStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was outside its documented domain.
    InvalidArgument = 2,
    /// A numerical routine failed to converge or degenerated.
    Numerical = 3,
    /// The library caught an internal panic; state may be inconsistent.
    Internal = 4,
}

/// Sampling mode selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DppMode {
    /// Dense conditional evaluation over the whole active set.
    Exact = 0,
    /// Sparse ring-restricted evaluation.
    Ring = 1,
}

/// Opaque spectral model of the Ginibre process on a disc: the truncated
/// eigenvalue sequence plus the ring-masked eigenfunction basis.
pub struct DppModel {
    basis: RingBasis,
}

/// Opaque sampled configuration.
pub struct DppSample {
    inner: GinibreSample,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn record_failure(status: DppStatus, message: &str) -> DppStatus {
    let sanitized: String = message.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
    status
}

fn record_error(err: &dppsim::Error) -> DppStatus {
    let status = if err.is_numerical() {
        DppStatus::Numerical
    } else {
        DppStatus::InvalidArgument
    };
    record_failure(status, &err.to_string())
}

/// Runs a closure, translating panics into `DppStatus::Internal` instead
/// of unwinding across the ABI boundary.
fn guarded(body: impl FnOnce() -> DppStatus) -> DppStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => record_failure(DppStatus::Internal, "internal panic"),
    }
}

/// Message describing the most recent failure on the calling thread, as a
/// NUL-terminated UTF-8 string. The pointer stays valid until the next
/// failing call on the same thread. Never null; empty before any failure.
#[no_mangle]
pub extern "C" fn dpp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dpp_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(
        concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes(),
    ) {
        Ok(s) => s,
        Err(_) => unreachable!(),
    };
    VERSION.as_ptr()
}

/// Builds a spectral model for the disc of the given radius.
///
/// `margin` is the truncation safety margin (3.0 is a sound default);
/// `palm` conditions on a point at the origin; `thinning` in (0, 1] keeps
/// each point independently with that probability; `dilation` rescales the
/// output intensity by that factor. Pass 1.0 for both to disable. On
/// success writes a handle to `out` which must be released with
/// [`dpp_model_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dpp_model_new(
    radius: f64,
    margin: f64,
    palm: bool,
    thinning: f64,
    dilation: f64,
    out: *mut *mut DppModel,
) -> DppStatus {
    if out.is_null() {
        return record_failure(DppStatus::NullArgument, "out handle is null");
    }
    guarded(|| {
        let mut params = SpectrumParams::new(radius).with_margin(margin);
        params.palm = palm;
        params.thinning = thinning;
        params.dilation = dilation;
        let basis = GinibreSpectrum::build(params).and_then(RingBasis::build);
        match basis {
            Ok(basis) => {
                unsafe { out.write(Box::into_raw(Box::new(DppModel { basis }))) };
                DppStatus::Ok
            }
            Err(err) => record_error(&err),
        }
    })
}

/// Releases a model handle. Null is accepted and ignored.
///
/// # Safety
/// `model` must be null or a pointer obtained from [`dpp_model_new`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn dpp_model_free(model: *mut DppModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of retained spectral indices (the truncation point N).
///
/// # Safety
/// `model` must be a live handle from [`dpp_model_new`].
#[no_mangle]
pub unsafe extern "C" fn dpp_model_truncation(model: *const DppModel) -> usize {
    match unsafe { model.as_ref() } {
        Some(m) => m.basis.spectrum().truncation(),
        None => 0,
    }
}

/// Expected point count, i.e. the sum of retained eigenvalues.
///
/// # Safety
/// `model` must be a live handle from [`dpp_model_new`]. Returns NaN for
/// null.
#[no_mangle]
pub unsafe extern "C" fn dpp_model_trace(model: *const DppModel) -> f64 {
    match unsafe { model.as_ref() } {
        Some(m) => m.basis.spectrum().trace(),
        None => f64::NAN,
    }
}

/// Bernoulli retention probability of spectral index `index`, or NaN when
/// the index is at or beyond the truncation point.
///
/// # Safety
/// `model` must be a live handle from [`dpp_model_new`].
#[no_mangle]
pub unsafe extern "C" fn dpp_model_eigenvalue(model: *const DppModel, index: usize) -> f64 {
    match unsafe { model.as_ref() } {
        Some(m) if index < m.basis.spectrum().truncation() => {
            m.basis.spectrum().eigenvalue(index)
        }
        _ => f64::NAN,
    }
}

/// Draws one configuration from the model.
///
/// `seed` and `stream_index` select a reproducible random substream: the
/// same triple (model parameters, seed, stream_index) always yields the
/// same configuration. On success writes a handle to `out` which must be
/// released with [`dpp_sample_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer to writable
/// memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dpp_sample(
    model: *const DppModel,
    mode: DppMode,
    seed: u64,
    stream_index: u64,
    out: *mut *mut DppSample,
) -> DppStatus {
    if out.is_null() {
        return record_failure(DppStatus::NullArgument, "out handle is null");
    }
    let Some(model) = (unsafe { model.as_ref() }) else {
        return record_failure(DppStatus::NullArgument, "model handle is null");
    };
    guarded(|| {
        let options = match mode {
            DppMode::Exact => SamplerOptions::exact(),
            DppMode::Ring => SamplerOptions::ring(),
        };
        let mut stream = SampleStream::substream(seed, stream_index);
        match sample_with_basis(&model.basis, &options, &mut stream) {
            Ok(inner) => {
                unsafe { out.write(Box::into_raw(Box::new(DppSample { inner }))) };
                DppStatus::Ok
            }
            Err(err) => record_error(&err),
        }
    })
}

/// Releases a sample handle. Null is accepted and ignored.
///
/// # Safety
/// `sample` must be null or a pointer obtained from [`dpp_sample`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn dpp_sample_free(sample: *mut DppSample) {
    if !sample.is_null() {
        drop(unsafe { Box::from_raw(sample) });
    }
}

/// Number of points in the sample. Returns 0 for null.
///
/// # Safety
/// `sample` must be null or a live handle from [`dpp_sample`].
#[no_mangle]
pub unsafe extern "C" fn dpp_sample_len(sample: *const DppSample) -> usize {
    match unsafe { sample.as_ref() } {
        Some(s) => s.inner.points.len(),
        None => 0,
    }
}

/// Copies the sampled points into `out` as interleaved re/im pairs, so the
/// buffer must hold `2 * dpp_sample_len(sample)` doubles.
///
/// # Safety
/// `sample` must be a live handle and `out` a valid pointer to writable
/// memory for `2 * dpp_sample_len(sample)` doubles.
#[no_mangle]
pub unsafe extern "C" fn dpp_sample_points(
    sample: *const DppSample,
    out: *mut f64,
) -> DppStatus {
    let Some(sample) = (unsafe { sample.as_ref() }) else {
        return record_failure(DppStatus::NullArgument, "sample handle is null");
    };
    if out.is_null() {
        return record_failure(DppStatus::NullArgument, "out buffer is null");
    }
    for (i, z) in sample.inner.points.iter().enumerate() {
        unsafe {
            out.add(2 * i).write(z.re);
            out.add(2 * i + 1).write(z.im);
        }
    }
    DppStatus::Ok
}

fn configuration_from_raw(points: *const f64, len: usize) -> dppsim::Result<Configuration> {
    let slice = if len == 0 {
        &[][..]
    } else {
        unsafe { std::slice::from_raw_parts(points, 2 * len) }
    };
    Configuration::new(
        slice
            .chunks_exact(2)
            .map(|pair| Complex64::new(pair[0], pair[1]))
            .collect(),
    )
}

/// Optimal quadratic matching cost between two configurations of equal
/// size, passed as interleaved re/im buffers of `2 * len` doubles each.
///
/// # Safety
/// `a` and `b` must point to `2 * len` readable doubles each (they may be
/// null when `len` is 0) and `out_cost` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn dpp_matching_cost(
    a: *const f64,
    b: *const f64,
    len: usize,
    out_cost: *mut f64,
) -> DppStatus {
    if out_cost.is_null() || (len > 0 && (a.is_null() || b.is_null())) {
        return record_failure(DppStatus::NullArgument, "null buffer argument");
    }
    guarded(|| {
        let paired = configuration_from_raw(a, len)
            .and_then(|ca| configuration_from_raw(b, len).map(|cb| (ca, cb)));
        match paired.and_then(|(ca, cb)| quadratic_matching_cost(&ca, &cb)) {
            Ok(matching) => {
                unsafe { out_cost.write(matching.cost) };
                DppStatus::Ok
            }
            Err(err) => record_error(&err),
        }
    })
}

/// Total-variation style distance between two configurations: points
/// unmatched within `tolerance`, counted from both sides. Buffers are
/// interleaved re/im, `2 * len_a` and `2 * len_b` doubles.
///
/// # Safety
/// `a` and `b` must point to `2 * len_a` and `2 * len_b` readable doubles
/// (null allowed for empty sides) and `out_distance` to one writable u64.
#[no_mangle]
pub unsafe extern "C" fn dpp_tv_distance(
    a: *const f64,
    len_a: usize,
    b: *const f64,
    len_b: usize,
    tolerance: f64,
    out_distance: *mut u64,
) -> DppStatus {
    if out_distance.is_null() || (len_a > 0 && a.is_null()) || (len_b > 0 && b.is_null()) {
        return record_failure(DppStatus::NullArgument, "null buffer argument");
    }
    guarded(|| {
        let paired = configuration_from_raw(a, len_a)
            .and_then(|ca| configuration_from_raw(b, len_b).map(|cb| (ca, cb)));
        match paired.and_then(|(ca, cb)| tv_config_distance(&ca, &cb, tolerance)) {
            Ok(distance) => {
                unsafe { out_distance.write(distance as u64) };
                DppStatus::Ok
            }
            Err(err) => record_error(&err),
        }
    })
}

/// Spectral tail bound sqrt(2/pi) * radius * exp(-margin^2) on the mass
/// dropped by truncating at ceil((radius + margin)^2). Returns NaN outside
/// the domain radius > margin > 0.
#[no_mangle]
pub extern "C" fn dpp_truncation_bound(radius: f64, margin: f64) -> f64 {
    dppsim::transport::kr_truncation_bound(radius, margin).unwrap_or(f64::NAN)
}
