//! C ABI for the ghzanon simulator.
//!
//! Every fallible function returns a [`GhzStatus`]; on failure a message for
//! the calling thread is available from [`ghz_last_error_message`]. Networks
//! are opaque handles created by [`ghz_network_new`] and released with
//! [`ghz_network_free`]. Strings returned by the library are released with
//! [`ghz_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ghzanon::adversary::{
    junk_states, make_noisy_source, parity_success_bounds, theorem2_bound, theorem3_bound, JunkKind, NoiseSpec,
    NoisySource,
};
use ghzanon::bellcert::{build_bell_operator, fidelity_deficit_bounds, lr_max, spectrum};
use ghzanon::harness::{run_experiment, ExperimentPlan, Format};
use ghzanon::protocols::{AegOutcome, AegPolicy, AgentId, Network, NetworkConfig, ParityOptions};
use ghzanon::random::{trial_stream, TrialRng};
use ghzanon::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OddAgentCount = 3,
    DimensionMismatch = 4,
    TooLarge = 5,
    InvalidNoise = 6,
    SourceExhausted = 7,
    Numerical = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> GhzStatus {
    match err {
        Error::OddAgentCount(_) => GhzStatus::OddAgentCount,
        Error::DimensionMismatch { .. } => GhzStatus::DimensionMismatch,
        Error::TooLarge { .. } => GhzStatus::TooLarge,
        Error::InvalidNoise(_) => GhzStatus::InvalidNoise,
        Error::SourceExhausted => GhzStatus::SourceExhausted,
        Error::Numerical(_) | Error::NotNormalized(_) => GhzStatus::Numerical,
        Error::Io(_) => GhzStatus::Io,
        _ => GhzStatus::InvalidArgument,
    }
}

struct Fail(GhzStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GhzStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> GhzStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GhzStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GhzStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or valid for a write of `T`.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `p` must be NULL or point to `len` readable bytes.
unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the most recent call on this thread, or NULL if that call
/// succeeded. Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ghz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ghz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque network of agents sharing a (possibly noisy) GHZ source.
pub struct GhzNetwork {
    cfg: NetworkConfig,
    source: NoisySource,
    rng: TrialRng,
}

impl GhzNetwork {
    fn network(&mut self) -> Result<Network<'_>, Error> {
        Ok(Network::with_randomness(self.cfg, &self.source, &mut self.rng)?.recording(false))
    }
}

/// Creates a network of `n` agents with security parameter `s`. The source
/// emits the GHZ state with probability `1 - delta` and otherwise a state from
/// the `(n-3)` eigenspace of the Bell operator.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ghz_network_new(
    n: usize,
    s: usize,
    seed: u64,
    delta: f64,
    out: *mut *mut GhzNetwork,
) -> GhzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = NetworkConfig::new(n, s, seed)?;
        let spec = NoiseSpec::new(n, delta, junk_states(n, JunkKind::default_for(n))?)?;
        let net = GhzNetwork {
            cfg,
            source: make_noisy_source(spec)?,
            rng: trial_stream(seed, 0),
        };
        out.write(Box::into_raw(Box::new(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must be NULL or a handle from [`ghz_network_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ghz_network_free(net: *mut GhzNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be NULL or a live handle.
unsafe fn handle<'a>(net: *mut GhzNetwork) -> Result<&'a mut GhzNetwork, Fail> {
    net.as_mut().ok_or_else(|| null("network"))
}

/// Runs the parity protocol on `len` input bits; the parity is written to `out_y`.
///
/// # Safety
/// `net` must be a live handle, `inputs` must point to `len` bytes and `out_y`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_network_run_parity(
    net: *mut GhzNetwork,
    inputs: *const u8,
    len: usize,
    out_y: *mut u8,
) -> GhzStatus {
    guard(|| {
        let h = handle(net)?;
        let inputs = bytes(inputs, len, "inputs")?;
        let (o, _) = h.network()?.run_parity(inputs, ParityOptions::default())?;
        write(out_y, o.y, "out_y")
    })
}

/// Runs the anonymous logical OR; the result is written to `out_v`.
///
/// # Safety
/// As for [`ghz_network_run_parity`].
#[no_mangle]
pub unsafe extern "C" fn ghz_network_run_logical_or(
    net: *mut GhzNetwork,
    inputs: *const u8,
    len: usize,
    out_v: *mut u8,
) -> GhzStatus {
    guard(|| {
        let h = handle(net)?;
        let inputs = bytes(inputs, len, "inputs")?;
        let (o, _) = h.network()?.run_logical_or(inputs)?;
        write(out_v, o.v, "out_v")
    })
}

/// Runs collision detection on `len` wish bits; `out_v` receives 0, 1 or 2.
///
/// # Safety
/// As for [`ghz_network_run_parity`].
#[no_mangle]
pub unsafe extern "C" fn ghz_network_run_collision_detection(
    net: *mut GhzNetwork,
    wish_bits: *const u8,
    len: usize,
    out_v: *mut u8,
) -> GhzStatus {
    guard(|| {
        let h = handle(net)?;
        let wishes = bytes(wish_bits, len, "wish_bits")?;
        let (o, _) = h.network()?.run_collision_detection(wishes)?;
        write(out_v, o.v, "out_v")
    })
}

/// Runs entanglement generation with the strict verification policy.
/// `out_success` is 1 when an EPR pair was produced, in which case
/// `out_fidelity` holds its fidelity to `(|00> + |11>)/sqrt(2)` (0 otherwise).
///
/// # Safety
/// `net` must be a live handle; every output pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_network_run_aeg(
    net: *mut GhzNetwork,
    sender: usize,
    receiver: usize,
    max_repetitions: u64,
    out_success: *mut u8,
    out_fidelity: *mut f64,
    out_repetitions: *mut u64,
) -> GhzStatus {
    guard(|| {
        let h = handle(net)?;
        let policy = AegPolicy::strict(max_repetitions);
        let (o, _) = h.network()?.run_aeg(AgentId(sender), AgentId(receiver), policy)?;
        let (success, fidelity) = match &o {
            AegOutcome::Epr { fidelity, .. } => (1, *fidelity),
            AegOutcome::Abort { .. } => (0, 0.0),
        };
        write(out_success, success, "out_success")?;
        write(out_fidelity, fidelity, "out_fidelity")?;
        write(out_repetitions, o.repetitions(), "out_repetitions")
    })
}

/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_parity_success_bounds(n: usize, epsilon: f64, lo: *mut f64, hi: *mut f64) -> GhzStatus {
    guard(|| {
        let (l, h) = parity_success_bounds(n, epsilon)?;
        write(lo, l, "lo")?;
        write(hi, h, "hi")
    })
}

/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_fidelity_deficit_bounds(
    epsilon: f64,
    n: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> GhzStatus {
    guard(|| {
        let (l, h) = fidelity_deficit_bounds(epsilon, n)?;
        write(lo, l, "lo")?;
        write(hi, h, "hi")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_theorem2_bound(n: usize, s: usize, epsilon: f64, out: *mut f64) -> GhzStatus {
    guard(|| write(out, theorem2_bound(n, s, epsilon)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_theorem3_bound(k: usize, epsilon: f64, out: *mut f64) -> GhzStatus {
    guard(|| write(out, theorem3_bound(k, epsilon)?, "out"))
}

/// Brute-force local-realistic maximum of the Bell operator.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_lr_max(n: usize, out: *mut i64) -> GhzStatus {
    guard(|| write(out, lr_max(n)?.max_value, "out"))
}

/// Writes the `2^n` eigenvalues of the Bell operator in descending order into
/// `buf`. `written` receives the count; if `cap` is too small nothing is
/// copied, `written` receives the required size and the status is
/// `BufferTooSmall`.
///
/// # Safety
/// `buf` must be valid for `cap` doubles and `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_bell_spectrum(n: usize, buf: *mut f64, cap: usize, written: *mut usize) -> GhzStatus {
    guard(|| {
        let report = spectrum(&build_bell_operator(n)?)?;
        let values = &report.eigenvalues;
        write(written, values.len(), "written")?;
        if cap < values.len() {
            return Err(Fail(
                GhzStatus::BufferTooSmall,
                format!("need room for {} eigenvalues, got {cap}", values.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Runs an experiment described by a JSON plan and returns its JSON-lines
/// report in `out_report` (free with [`ghz_string_free`]). `out_pass` is 1 when
/// every check passed.
///
/// # Safety
/// `plan_json` must be a NUL-terminated string; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ghz_run_experiment_json(
    plan_json: *const c_char,
    out_report: *mut *mut c_char,
    out_pass: *mut u8,
) -> GhzStatus {
    guard(|| {
        if plan_json.is_null() {
            return Err(null("plan_json"));
        }
        if out_report.is_null() {
            return Err(null("out_report"));
        }
        let text = CStr::from_ptr(plan_json)
            .to_str()
            .map_err(|e| Fail(GhzStatus::InvalidArgument, format!("plan is not UTF-8: {e}")))?;
        let plan: ExperimentPlan = serde_json::from_str(text)
            .map_err(|e| Fail(GhzStatus::InvalidArgument, format!("invalid plan: {e}")))?;
        let result = run_experiment(&plan)?;
        let rendered = result.render(Format::Json)?;
        let report = CString::new(rendered).map_err(|e| Fail(GhzStatus::Numerical, e.to_string()))?;
        write(out_pass, u8::from(result.pass()), "out_pass")?;
        out_report.write(report.into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ghz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
