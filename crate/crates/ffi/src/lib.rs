//! C ABI over `seqclone`.
//!
//! Every fallible call returns a [`SeqcloneStatus`]. On failure the message is
//! available from [`seqclone_last_error`] on the same thread until the next
//! call. Objects are opaque handles released by their `_free` function;
//! strings returned by the library are released by [`seqclone_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use seqclone::compression::{compress, CompressionRequest, Method};
use seqclone::sequential::SynthesisResult;
use seqclone::{gm_state, optimize_schedule, Error, GmSpec, MatrixProductState, PureQubit, Statevector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqcloneStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Structural = 3,
    Numeric = 4,
    Resource = 5,
    State = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeqcloneComplex {
    pub re: f64,
    pub im: f64,
}

impl From<SeqcloneComplex> for Complex64 {
    fn from(z: SeqcloneComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for SeqcloneComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqcloneMethod {
    SvdTruncation = 0,
    Variational = 1,
    VariationalSeededBySvd = 2,
}

impl From<SeqcloneMethod> for Method {
    fn from(m: SeqcloneMethod) -> Self {
        match m {
            SeqcloneMethod::SvdTruncation => Method::SvdTruncation,
            SeqcloneMethod::Variational => Method::Variational,
            SeqcloneMethod::VariationalSeededBySvd => Method::VariationalSeededBySvd,
        }
    }
}

/// Dense state of `n` qubits.
pub struct SeqcloneStatevector(Statevector);

/// Matrix product state.
pub struct SeqcloneMps(MatrixProductState);

/// Outcome of a schedule search.
pub struct SeqcloneSynthesis(SynthesisResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(SeqcloneStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => SeqcloneStatus::InvalidArgument,
            Error::Structural(_) => SeqcloneStatus::Structural,
            Error::NumericFailure { .. } => SeqcloneStatus::Numeric,
            Error::State(_) => SeqcloneStatus::State,
            Error::Resource { .. } => SeqcloneStatus::Resource,
            Error::Parse(_) | Error::Json(_) | Error::Csv(_) => SeqcloneStatus::Parse,
            Error::Io(_) => SeqcloneStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SeqcloneStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SeqcloneStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SeqcloneStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SeqcloneStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn c_string(text: String) -> Result<*mut c_char, Failure> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| Failure(SeqcloneStatus::Parse, "string contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn seqclone_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn seqclone_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Cloner output for `clones` copies of `alpha|0> + beta|1>`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn seqclone_gm_state(
    clones: usize,
    alpha: SeqcloneComplex,
    beta: SeqcloneComplex,
    out: *mut *mut SeqcloneStatevector,
) -> SeqcloneStatus {
    guard(|| {
        let input = PureQubit::new(alpha.into(), beta.into())?;
        let v = gm_state(&GmSpec::new(clones, input)?)?;
        write(out, boxed(SeqcloneStatevector(v)), "out")
    })
}

/// Statevector from `2^qubits` amplitudes.
///
/// # Safety
/// `amplitudes` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_statevector_new(
    qubits: usize,
    amplitudes: *const SeqcloneComplex,
    len: usize,
    out: *mut *mut SeqcloneStatevector,
) -> SeqcloneStatus {
    guard(|| {
        if amplitudes.is_null() {
            return Err(null("amplitudes"));
        }
        let amps = std::slice::from_raw_parts(amplitudes, len).iter().map(|&z| z.into()).collect();
        let v = Statevector::new(qubits, amps)?;
        write(out, boxed(SeqcloneStatevector(v)), "out")
    })
}

/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_statevector_qubits(
    v: *const SeqcloneStatevector,
    out: *mut usize,
) -> SeqcloneStatus {
    guard(|| write(out, deref(v, "statevector")?.0.qubits(), "out"))
}

/// Copy amplitudes into `buffer`, which must hold `2^qubits` entries.
///
/// # Safety
/// `v` must be a live handle; `buffer` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn seqclone_statevector_amplitudes(
    v: *const SeqcloneStatevector,
    buffer: *mut SeqcloneComplex,
    len: usize,
) -> SeqcloneStatus {
    guard(|| {
        let amps = deref(v, "statevector")?.0.amplitudes();
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        if len < amps.len() {
            return Err(Failure(
                SeqcloneStatus::InvalidArgument,
                format!("buffer holds {len} values but {} are needed", amps.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buffer, amps.len());
        for (d, s) in dst.iter_mut().zip(amps) {
            *d = (*s).into();
        }
        Ok(())
    })
}

/// # Safety
/// `v` must be null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn seqclone_statevector_free(v: *mut SeqcloneStatevector) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Exact MPS of a normalized statevector, dropping singular values below
/// `rank_tol` relative to the largest.
///
/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_from_statevector(
    v: *const SeqcloneStatevector,
    rank_tol: f64,
    out: *mut *mut SeqcloneMps,
) -> SeqcloneStatus {
    guard(|| {
        let m = MatrixProductState::from_statevector(&deref(v, "statevector")?.0, rank_tol)?;
        write(out, boxed(SeqcloneMps(m)), "out")
    })
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_qubits(m: *const SeqcloneMps, out: *mut usize) -> SeqcloneStatus {
    guard(|| write(out, deref(m, "mps")?.0.qubits(), "out"))
}

/// Bond dimensions `D_1..D_{n+1}`. Writes the count to `count` and, when
/// `buffer` holds at least that many entries, the values.
///
/// # Safety
/// `m` must be a live handle; `buffer` null or writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_bond_dims(
    m: *const SeqcloneMps,
    buffer: *mut usize,
    len: usize,
    count: *mut usize,
) -> SeqcloneStatus {
    guard(|| {
        let dims = deref(m, "mps")?.0.bond_dims();
        write(count, dims.len(), "count")?;
        if !buffer.is_null() && len >= dims.len() {
            std::slice::from_raw_parts_mut(buffer, dims.len()).copy_from_slice(&dims);
        }
        Ok(())
    })
}

/// `<a|b>`.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_overlap(
    a: *const SeqcloneMps,
    b: *const SeqcloneMps,
    out: *mut SeqcloneComplex,
) -> SeqcloneStatus {
    guard(|| {
        let z = deref(a, "a")?.0.overlap(&deref(b, "b")?.0)?;
        write(out, z.into(), "out")
    })
}

/// Compress to at most `bond_cap`. Writes the new state and its fidelity to
/// the target.
///
/// # Safety
/// `m` must be a live handle; `out` and `fidelity` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_compress(
    m: *const SeqcloneMps,
    bond_cap: usize,
    method: SeqcloneMethod,
    seed: u64,
    out: *mut *mut SeqcloneMps,
    fidelity: *mut f64,
) -> SeqcloneStatus {
    guard(|| {
        if out.is_null() || fidelity.is_null() {
            return Err(null("out"));
        }
        let mut req = CompressionRequest::new(deref(m, "mps")?.0.clone(), bond_cap, method.into());
        req.seed = seed;
        let c = compress(&req)?;
        write(fidelity, c.report.fidelity, "fidelity")?;
        write(out, boxed(SeqcloneMps(c.state)), "out")
    })
}

/// Serialize as a `seqclone.mps/1` JSON document.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_to_json(m: *const SeqcloneMps, out: *mut *mut c_char) -> SeqcloneStatus {
    guard(|| {
        let text = deref(m, "mps")?.0.to_json()?;
        write(out, c_string(text)?, "out")
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_from_json(json: *const c_char, out: *mut *mut SeqcloneMps) -> SeqcloneStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(SeqcloneStatus::Parse, "json is not UTF-8".into()))?;
        let m = MatrixProductState::from_json(text)?;
        write(out, boxed(SeqcloneMps(m)), "out")
    })
}

/// # Safety
/// `m` must be null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn seqclone_mps_free(m: *mut SeqcloneMps) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Fit an XXZ ancilla-qubit schedule emitting `target`.
///
/// # Safety
/// `target` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_optimize_schedule(
    target: *const SeqcloneStatevector,
    aux: bool,
    restarts: usize,
    seed: u64,
    out: *mut *mut SeqcloneSynthesis,
) -> SeqcloneStatus {
    guard(|| {
        let t = &deref(target, "target")?.0;
        let r = optimize_schedule(t, t.qubits(), aux, restarts, seed)?;
        write(out, boxed(SeqcloneSynthesis(r)), "out")
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_synthesis_fidelity(s: *const SeqcloneSynthesis, out: *mut f64) -> SeqcloneStatus {
    guard(|| write(out, deref(s, "synthesis")?.0.fidelity, "out"))
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_synthesis_iterations(s: *const SeqcloneSynthesis, out: *mut usize) -> SeqcloneStatus {
    guard(|| write(out, deref(s, "synthesis")?.0.iterations, "out"))
}

/// Best schedule as JSON.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqclone_synthesis_schedule_json(
    s: *const SeqcloneSynthesis,
    out: *mut *mut c_char,
) -> SeqcloneStatus {
    guard(|| {
        let text = serde_json::to_string(&deref(s, "synthesis")?.0.schedule).map_err(Error::from)?;
        write(out, c_string(text)?, "out")
    })
}

/// # Safety
/// `s` must be null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn seqclone_synthesis_free(s: *mut SeqcloneSynthesis) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
