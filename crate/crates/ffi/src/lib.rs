//   Copyright 2026 relu-dissect developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! C ABI for relu-dissect.
//!
//! Networks and PWA functions are exposed as opaque handles. Every fallible
//! function returns an [`RdStatus`]; on failure a description is available
//! from [`rd_last_error`] on the same thread. Strings returned by the library
//! are owned by the caller and released with [`rd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relu_dissect::pwa::{box_domain, convert, ConvertOptions};
use relu_dissect::{zaslavsky_bound, Error, Network, PwaFunction};

/// Result codes shared by every function of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a document that violates the schema.
    InvalidDocument = 3,
    DimensionMismatch = 4,
    /// The point lies outside the domain of the PWA function.
    OutsideDomain = 5,
    /// Conversion failed (degenerate domain, LP failure).
    Conversion = 6,
    /// The value does not fit the output type.
    Overflow = 7,
    InvalidArgument = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// Opaque network handle.
pub struct RdNetwork(Network);

/// Opaque piecewise-affine function handle.
pub struct RdPwa(PwaFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> RdStatus {
    match err {
        Error::Schema(_) | Error::DimensionChain { .. } | Error::NonFiniteWeight { .. } => RdStatus::InvalidDocument,
        Error::DimensionMismatch { .. } | Error::DomainMismatch(_) => RdStatus::DimensionMismatch,
        Error::OutsideDomain => RdStatus::OutsideDomain,
        Error::OutOfRange(_) => RdStatus::Overflow,
        Error::NonFiniteInput | Error::IndexOutOfRange { .. } | Error::EmptyInput(_) => RdStatus::InvalidArgument,
        _ => RdStatus::Conversion,
    }
}

fn fail(status: RdStatus, msg: impl Into<String>) -> RdStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> RdStatus {
    fail(status_of(&err), err.to_string())
}

/// Runs `body`, turning panics into [`RdStatus::Panic`].
fn guard(body: impl FnOnce() -> RdStatus) -> RdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(RdStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, RdStatus> {
    if s.is_null() {
        return Err(fail(RdStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(RdStatus::InvalidUtf8, "string argument is not valid UTF-8"))
}

unsafe fn read_slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], RdStatus> {
    if p.is_null() {
        return Err(fail(RdStatus::NullPointer, "input array is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_slice(dst: *mut f64, len: usize, values: &[f64]) -> RdStatus {
    if dst.is_null() {
        return fail(RdStatus::NullPointer, "output array is null");
    }
    if len != values.len() {
        return fail(RdStatus::DimensionMismatch, format!("output array has length {len}, expected {}", values.len()));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), dst, len);
    RdStatus::Ok
}

unsafe fn write_out<T>(out: *mut T, value: T) -> RdStatus {
    if out.is_null() {
        return fail(RdStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    RdStatus::Ok
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> RdStatus {
    match CString::new(s) {
        Ok(c) => write_out(out, c.into_raw()),
        Err(_) => fail(RdStatus::InvalidArgument, "string contains an interior NUL"),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! handle {
    ($p:expr) => {
        match $p.as_ref() {
            Some(h) => &h.0,
            None => return fail(RdStatus::NullPointer, "handle is null"),
        }
    };
}

/// Message describing the last failure on this thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a network document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_network_from_json(json: *const c_char, out: *mut *mut RdNetwork) -> RdStatus {
    guard(|| {
        let text = try_ffi!(read_str(json));
        match Network::from_json_str(text) {
            Ok(net) => write_out(out, Box::into_raw(Box::new(RdNetwork(net)))),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `net` must be null or a live handle from [`rd_network_from_json`].
#[no_mangle]
pub unsafe extern "C" fn rd_network_free(net: *mut RdNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_network_input_dim(net: *const RdNetwork, out: *mut usize) -> RdStatus {
    let net = handle!(net);
    write_out(out, net.input_dim())
}

/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_network_output_dim(net: *const RdNetwork, out: *mut usize) -> RdStatus {
    let net = handle!(net);
    write_out(out, net.output_dim())
}

/// Evaluates the network at `x` (length `x_len`) into `y` (length `y_len`).
///
/// # Safety
/// `x` and `y` must point to arrays of the given lengths.
#[no_mangle]
pub unsafe extern "C" fn rd_network_forward(
    net: *const RdNetwork,
    x: *const f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
) -> RdStatus {
    guard(|| {
        let net = handle!(net);
        let x = try_ffi!(read_slice(x, x_len));
        match net.forward(x) {
            Ok(v) => write_slice(y, y_len, &v),
            Err(e) => from_error(e),
        }
    })
}

/// Converts `net` over the box `[-box_half_width, box_half_width]^d`.
/// `workers = 0` uses every logical core.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_convert(
    net: *const RdNetwork,
    box_half_width: f64,
    workers: usize,
    out: *mut *mut RdPwa,
) -> RdStatus {
    guard(|| {
        let net = handle!(net);
        if !(box_half_width > 0.0 && box_half_width.is_finite()) {
            return fail(RdStatus::InvalidArgument, "box half width must be positive and finite");
        }
        let domain = match box_domain(net.input_dim(), box_half_width) {
            Ok(d) => d,
            Err(e) => return from_error(e),
        };
        let opts = ConvertOptions { workers: (workers > 0).then_some(workers), ..Default::default() };
        match convert(net, &domain, &opts) {
            Ok(pwa) => write_out(out, Box::into_raw(Box::new(RdPwa(pwa)))),
            Err(e) => from_error(e),
        }
    })
}

/// Parses a PWA document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_from_json(json: *const c_char, out: *mut *mut RdPwa) -> RdStatus {
    guard(|| {
        let text = try_ffi!(read_str(json));
        match PwaFunction::from_json_str(text) {
            Ok(pwa) => write_out(out, Box::into_raw(Box::new(RdPwa(pwa)))),
            Err(e) => from_error(e),
        }
    })
}

/// Serializes to canonical JSON; release the result with [`rd_string_free`].
///
/// # Safety
/// `pwa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_to_json(pwa: *const RdPwa, out: *mut *mut c_char) -> RdStatus {
    guard(|| {
        let pwa = handle!(pwa);
        write_string(out, pwa.to_json_string())
    })
}

/// # Safety
/// `pwa` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_free(pwa: *mut RdPwa) {
    if !pwa.is_null() {
        drop(Box::from_raw(pwa));
    }
}

/// # Safety
/// `pwa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_region_count(pwa: *const RdPwa, out: *mut usize) -> RdStatus {
    let pwa = handle!(pwa);
    write_out(out, pwa.region_count())
}

/// # Safety
/// `pwa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_input_dim(pwa: *const RdPwa, out: *mut usize) -> RdStatus {
    let pwa = handle!(pwa);
    write_out(out, pwa.input_dim)
}

/// # Safety
/// `pwa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_output_dim(pwa: *const RdPwa, out: *mut usize) -> RdStatus {
    let pwa = handle!(pwa);
    write_out(out, pwa.output_dim)
}

/// Index of the region containing `x` (boundary tolerance `tol`).
///
/// # Safety
/// `x` must point to `x_len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_region_of(
    pwa: *const RdPwa,
    x: *const f64,
    x_len: usize,
    tol: f64,
    out: *mut usize,
) -> RdStatus {
    guard(|| {
        let pwa = handle!(pwa);
        let x = try_ffi!(read_slice(x, x_len));
        match pwa.region_of(x, tol) {
            Ok(i) => write_out(out, i),
            Err(e) => from_error(e),
        }
    })
}

/// Evaluates the PWA function at `x` into `y`.
///
/// # Safety
/// `x` and `y` must point to arrays of the given lengths.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_eval(
    pwa: *const RdPwa,
    x: *const f64,
    x_len: usize,
    tol: f64,
    y: *mut f64,
    y_len: usize,
) -> RdStatus {
    guard(|| {
        let pwa = handle!(pwa);
        let x = try_ffi!(read_slice(x, x_len));
        match pwa.eval(x, tol) {
            Ok(v) => write_slice(y, y_len, &v),
            Err(e) => from_error(e),
        }
    })
}

/// Activation pattern of region `index` as a string of `+`/`-`; release
/// with [`rd_string_free`].
///
/// # Safety
/// `pwa` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pwa_region_pattern(pwa: *const RdPwa, index: usize, out: *mut *mut c_char) -> RdStatus {
    guard(|| {
        let pwa = handle!(pwa);
        match pwa.regions.get(index) {
            Some(r) => write_string(out, r.pattern.to_string()),
            None => fail(
                RdStatus::InvalidArgument,
                format!("region index {index} out of range for {} regions", pwa.region_count()),
            ),
        }
    })
}

/// Maximum number of cells cut by `n` hyperplanes in dimension `d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_zaslavsky_bound(n: u64, d: u64, out: *mut u64) -> RdStatus {
    if d == 0 {
        return fail(RdStatus::InvalidArgument, "dimension must be positive");
    }
    guard(|| match zaslavsky_bound(n, d) {
        Ok(v) => match u64::try_from(v) {
            Ok(v) => write_out(out, v),
            Err(_) => fail(RdStatus::Overflow, format!("bound for n={n}, d={d} exceeds 64 bits")),
        },
        Err(e) => from_error(e),
    })
}
