//! C ABI over `noma_lab`.
//!
//! Every fallible call returns an [`NlStatus`] and writes its result through
//! an out-pointer. On failure the message is kept per thread and can be read
//! with [`nl_last_error_message`]. Codebooks are passed around as opaque
//! [`NlCodebookSet`] handles; strings returned by the library are released
//! with [`nl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use noma_lab::admm::{self, AdmmConfig, Gamma};
use noma_lab::codebook::{generate_reference_codebooks, load_codebooks, CodebookSet, Scheme};
use noma_lab::complexity::{cubic_nodes, flops_admm, flops_gsd, flops_mmse, flops_mpa, Flops};
use noma_lab::config::RunConfig;
use noma_lab::harness::RunOptions;
use noma_lab::numerics::{CMatrix, C64};
use noma_lab::sysmodel::{System, SystemConfig, Variant};
use noma_lab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotFound = 3,
    InvalidCodebook = 4,
    InvalidConfig = 5,
    Unsupported = 6,
    Numeric = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlScheme {
    Scma = 0,
    Dcma = 1,
    Spreading = 2,
}

impl From<NlScheme> for Scheme {
    fn from(s: NlScheme) -> Self {
        match s {
            NlScheme::Scma => Scheme::Scma,
            NlScheme::Dcma => Scheme::Dcma,
            NlScheme::Spreading => Scheme::Spreading,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlDetector {
    Admm = 0,
    Mmse = 1,
    Mpa = 2,
    Gsd = 3,
}

/// System dimensions for the FLOP model.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NlFlopParams {
    pub ues: usize,
    pub resources: usize,
    pub rx_antennas: usize,
    pub dv: usize,
    pub order: usize,
    pub iterations: u32,
    /// Variable-node count of the MPA formula; 0 means `resources`.
    pub mpa_variable_nodes: usize,
}

/// Opaque codebook set.
pub struct NlCodebookSet {
    inner: CodebookSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NlStatus {
    match e {
        Error::CodebookNotFound(_) => NlStatus::NotFound,
        Error::Schema(_) | Error::Invariant(_) => NlStatus::InvalidCodebook,
        Error::Config(_) | Error::Budget(_) => NlStatus::InvalidConfig,
        Error::Unsupported(_) => NlStatus::Unsupported,
        Error::Dimension(_) => NlStatus::InvalidArgument,
        Error::Singular(_) | Error::NonFinite(_) => NlStatus::Numeric,
        Error::Io { .. } => NlStatus::Io,
        Error::Trial { source, .. } => status_of(source),
    }
}

struct Fail(NlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn fail(status: NlStatus, msg: impl Into<String>) -> Fail {
    Fail(status, msg.into())
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NlStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(NlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn out_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(NlStatus::InvalidArgument, "string contains NUL"))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(fail(NlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn nl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and validates a codebook file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_codebook_load(path: *const c_char, out: *mut *mut NlCodebookSet) -> NlStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = read_str(path, "path")?;
        let set = load_codebooks(Path::new(path))?;
        *out = Box::into_raw(Box::new(NlCodebookSet { inner: set }));
        Ok(())
    })
}

/// Builds the reference codebooks. `dv` of 0 picks the default degree.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_codebook_generate(
    scheme: NlScheme,
    ues: usize,
    resources: usize,
    order: usize,
    dv: usize,
    out: *mut *mut NlCodebookSet,
) -> NlStatus {
    guard(|| {
        check_out(out, "out")?;
        let dv = (dv != 0).then_some(dv);
        let set = generate_reference_codebooks(ues, resources, order, scheme.into(), dv)?;
        *out = Box::into_raw(Box::new(NlCodebookSet { inner: set }));
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn nl_codebook_free(set: *mut NlCodebookSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Writes J, K and M of the set.
///
/// # Safety
/// `set` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_codebook_dims(
    set: *const NlCodebookSet,
    ues: *mut usize,
    resources: *mut usize,
    order: *mut usize,
) -> NlStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| fail(NlStatus::NullPointer, "set is null"))?;
        check_out(ues, "ues")?;
        check_out(resources, "resources")?;
        check_out(order, "order")?;
        *ues = set.inner.ues();
        *resources = set.inner.resources();
        *order = set.inner.order();
        Ok(())
    })
}

/// Box half-widths of one UE's codebook.
///
/// # Safety
/// `set` must be a live handle; `alpha` and `beta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_codebook_box_bounds(
    set: *const NlCodebookSet,
    ue: usize,
    alpha: *mut f64,
    beta: *mut f64,
) -> NlStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| fail(NlStatus::NullPointer, "set is null"))?;
        check_out(alpha, "alpha")?;
        check_out(beta, "beta")?;
        if ue >= set.inner.ues() {
            return Err(fail(NlStatus::InvalidArgument, format!("UE {ue} out of range")));
        }
        let b = set.inner.get(ue).box_bounds();
        *alpha = b.alpha;
        *beta = b.beta;
        Ok(())
    })
}

/// Serializes the set in the codebook file format. Free with
/// [`nl_string_free`].
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_codebook_to_json(set: *const NlCodebookSet, out: *mut *mut c_char) -> NlStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| fail(NlStatus::NullPointer, "set is null"))?;
        check_out(out, "out")?;
        *out = out_string(set.inner.to_json())?;
        Ok(())
    })
}

/// Total FLOPs of one detector on one system. MPA implies SCMA and the
/// sphere decoder implies spreading; `scheme` is ignored for both.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nl_flops_total(
    detector: NlDetector,
    scheme: NlScheme,
    params: *const NlFlopParams,
    out: *mut u64,
) -> NlStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| fail(NlStatus::NullPointer, "params is null"))?;
        check_out(out, "out")?;
        if [p.ues, p.resources, p.rx_antennas, p.dv, p.order].contains(&0) {
            return Err(fail(NlStatus::InvalidArgument, "dimensions must be positive"));
        }
        let s = Scheme::from(scheme);
        let total: Flops = match detector {
            NlDetector::Admm => flops_admm(s, p.ues, p.resources, p.rx_antennas, p.dv, p.iterations).total(),
            NlDetector::Mmse => flops_mmse(s, p.ues, p.resources, p.rx_antennas, p.dv).total(),
            NlDetector::Mpa => {
                let df = (p.ues * p.dv).div_ceil(p.resources);
                let n = (p.mpa_variable_nodes != 0).then_some(p.mpa_variable_nodes);
                flops_mpa(p.resources, df, p.order, p.rx_antennas, p.dv, p.iterations, n).total()
            }
            NlDetector::Gsd => flops_gsd(p.ues, p.resources, p.rx_antennas, cubic_nodes(p.ues)).total(),
        };
        *out = u64::try_from(total).map_err(|_| fail(NlStatus::Numeric, "FLOP count exceeds 64 bits"))?;
        Ok(())
    })
}

/// Runs a sweep described by a JSON run config and returns the SER CSV.
/// Relative codebook paths resolve against the working directory. A
/// `workers` of 0 uses one thread per core.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out_csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nl_simulate_json(
    config_json: *const c_char,
    workers: usize,
    record_timing: bool,
    out_csv: *mut *mut c_char,
) -> NlStatus {
    guard(|| {
        check_out(out_csv, "out_csv")?;
        let cfg = RunConfig::from_json(read_str(config_json, "config_json")?)?;
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let out = cfg.run(&RunOptions { workers, record_timing })?;
        *out_csv = out_string(out.csv)?;
        Ok(())
    })
}

/// One SIMO ADMM detection.
///
/// `r` holds `K·N_r` complex samples and `h` the row-major
/// `K·N_r × J·N_e` matrix, both as interleaved (re, im) doubles; row
/// `n·K + k` is antenna `n` on RE `k`, column `j·N_e + d` is entry `d` of UE
/// `j`. `rho` ≤ 0 selects the noise-based default. `symbols` receives J
/// codeword indices.
///
/// # Safety
/// `set` must be a live handle; `r`, `h` and `symbols` must point to arrays
/// of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nl_detect_simo(
    set: *const NlCodebookSet,
    rx_antennas: usize,
    r: *const f64,
    h: *const f64,
    noise_var: f64,
    iterations: usize,
    gamma: f64,
    rho: f64,
    symbols: *mut u32,
) -> NlStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| fail(NlStatus::NullPointer, "set is null"))?;
        if r.is_null() || h.is_null() || symbols.is_null() {
            return Err(fail(NlStatus::NullPointer, "r, h and symbols must be non-null"));
        }
        let cb = &set.inner;
        let sys = System::new(
            SystemConfig {
                scheme: cb.scheme(),
                variant: Variant::Simo,
                ues: cb.ues(),
                resources: cb.resources(),
                order: cb.order(),
                tx_antennas: 1,
                rx_antennas,
            },
            cb.clone(),
        )?;
        let rows = rx_antennas * cb.resources();
        let cols = sys.simo_len();
        let pairs = |p: *const f64, n: usize| -> Vec<C64> {
            std::slice::from_raw_parts(p, 2 * n)
                .chunks_exact(2)
                .map(|c| C64::new(c[0], c[1]))
                .collect()
        };
        let rv = pairs(r, rows);
        let hm = CMatrix::from_row_major(rows, cols, pairs(h, rows * cols))?;
        let mut cfg = AdmmConfig::for_noise(noise_var);
        cfg.iterations = iterations;
        cfg.gamma = Gamma::Shared(gamma);
        if rho > 0.0 {
            cfg.rho = rho;
        }
        cfg.validate(cb.ues())?;
        let det = admm::detect_simo(&sys, &rv, &hm, &cfg)?;
        let out = std::slice::from_raw_parts_mut(symbols, cb.ues());
        for (o, s) in out.iter_mut().zip(&det.symbols) {
            *o = *s as u32;
        }
        Ok(())
    })
}
