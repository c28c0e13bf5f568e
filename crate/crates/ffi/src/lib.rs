//! C ABI over the `fragprep` core.
//!
//! Objects cross the boundary as opaque handles created by `fp_*_new`/`parse`
//! functions and released with the matching `fp_*_free`. Every fallible call
//! returns an [`FpStatus`]; on failure the message is kept per thread and can
//! be copied out with [`fp_last_error`]. Panics are caught and reported as
//! [`FpStatus::Panic`], never unwound into the caller.
//!
//! Safety contract for every `unsafe` entry point: pointer arguments are
//! null or valid for the stated length, strings are NUL terminated, and
//! handles come from this library and are not used after being freed.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fragprep::direct_init::{compile_initializer, di_cnot_count};
use fragprep::evolution::count_gates;
use fragprep::linalg::eigvalsh;
use fragprep::prony::{prony_fit, AutocorrelationSeries};
use fragprep::qpe::{
    ground_state_target, prepare_ground_state, run_qpe, InitialState, QpeConfig, UnitaryMode,
};
use fragprep::resources::qpe_cnots;
use fragprep::{Error, PauliSum, Statevector};
use num_complex::Complex64;

/// Largest register the dense helpers behind this interface will build.
const DENSE_CAP: usize = 14;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    /// Size cap exceeded, mismatched sizes, or an output buffer too small.
    Size = 4,
    NotHermitian = 5,
    PreparationFailed = 6,
    Numeric = 7,
    Io = 8,
    Panic = 9,
}

/// How the controlled powers of `U = e^{iHb}` are realized in QPE.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpUnitaryMode {
    Trotter = 0,
    Exact = 1,
    RescaledTrotter = 2,
}

/// QPE settings; start from [`fp_qpe_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FpQpeOptions {
    pub n_ancilla: usize,
    pub n_trotter: usize,
    pub shots: usize,
    pub seed: u64,
    /// Multiplies the default scale factor `pi / (2 ||H||_1)`; at least 1.
    pub b_multiplier: f64,
    pub mode: FpUnitaryMode,
    /// Computational basis state loaded into the system register.
    pub initial_basis: u64,
}

/// Opaque qubit Hamiltonian.
pub struct FpHamiltonian(PauliSum);

/// Opaque normalized statevector.
pub struct FpStatevector(Statevector);

struct Failure(FpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::Config(_) => FpStatus::Parse,
            Error::SizeCap { .. } | Error::SizeMismatch { .. } => FpStatus::Size,
            Error::InvalidArgument(_) => FpStatus::InvalidArgument,
            Error::NotHermitian { .. } => FpStatus::NotHermitian,
            Error::PreparationFailed { .. } => FpStatus::PreparationFailed,
            Error::Numeric(_) => FpStatus::Numeric,
            Error::Io(_) => FpStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FpStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure(FpStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            FpStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Fails with `Size` unless `cap >= needed`; `written` always receives `needed`.
unsafe fn check_capacity(needed: usize, cap: usize, written: *mut usize) -> Result<(), Failure> {
    if let Some(w) = written.as_mut() {
        *w = needed;
    }
    if cap < needed {
        return Err(Failure(
            FpStatus::Size,
            format!("output buffer holds {cap} values, {needed} needed"),
        ));
    }
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes) and returns the full message
/// length excluding the terminator. `buf` may be null to query the length.
#[no_mangle]
pub unsafe extern "C" fn fp_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses a Hamiltonian in the Pauli text format. The identity term is
/// split off into the stored energy offset.
#[no_mangle]
pub unsafe extern "C" fn fp_hamiltonian_parse(
    text: *const c_char,
    out_h: *mut *mut FpHamiltonian,
) -> FpStatus {
    guard(|| {
        let slot = out(out_h, "out_h")?;
        let h = PauliSum::parse_text(c_str(text, "text")?)?.combine();
        h.ensure_hermitian()?;
        *slot = Box::into_raw(Box::new(FpHamiltonian(h.subtract_identity())));
        Ok(())
    })
}

/// Loads a bundled example: `h2`, `ising3` or `xxz4`.
#[no_mangle]
pub unsafe extern "C" fn fp_hamiltonian_builtin(
    name: *const c_char,
    out_h: *mut *mut FpHamiltonian,
) -> FpStatus {
    guard(|| {
        let slot = out(out_h, "out_h")?;
        let name = c_str(name, "name")?;
        if name.contains(['/', '.']) {
            return Err(Failure(FpStatus::InvalidArgument, format!("unknown builtin `{name}`")));
        }
        let h = fragprep::cli::load_hamiltonian(&format!("builtin:{name}"))?;
        *slot = Box::into_raw(Box::new(FpHamiltonian(h.subtract_identity())));
        Ok(())
    })
}

/// Releases a Hamiltonian; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fp_hamiltonian_free(h: *mut FpHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_hamiltonian_n_qubits(
    h: *const FpHamiltonian,
    out_n: *mut usize,
) -> FpStatus {
    guard(|| {
        *out(out_n, "out_n")? = deref(h, "h")?.0.n_qubits();
        Ok(())
    })
}

/// Sum of |coefficients| over the non-identity terms.
#[no_mangle]
pub unsafe extern "C" fn fp_hamiltonian_one_norm(
    h: *const FpHamiltonian,
    out_norm: *mut f64,
) -> FpStatus {
    guard(|| {
        *out(out_norm, "out_norm")? = deref(h, "h")?.0.one_norm();
        Ok(())
    })
}

/// Ascending eigenvalues including the identity offset. Needs room for
/// `2^n` values; `written` receives the required count either way.
#[no_mangle]
pub unsafe extern "C" fn fp_hamiltonian_spectrum(
    h: *const FpHamiltonian,
    out_values: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpStatus {
    guard(|| {
        let h = &deref(h, "h")?.0;
        if h.n_qubits() > DENSE_CAP {
            return Err(Error::SizeCap {
                what: "spectrum",
                requested: h.n_qubits(),
                cap: DENSE_CAP,
            }
            .into());
        }
        check_capacity(1usize << h.n_qubits(), cap, written)?;
        if out_values.is_null() {
            return Err(null("out_values"));
        }
        let vals = eigvalsh(&h.to_dense_matrix_with_offset(DENSE_CAP)?);
        ptr::copy_nonoverlapping(vals.as_ptr(), out_values, vals.len());
        Ok(())
    })
}

/// Defaults for `h`: 6 ancillas, 4 Trotter steps, 1000 shots, seed 0,
/// Trotter mode, system in `|0...0>`.
#[no_mangle]
pub unsafe extern "C" fn fp_qpe_options_default(
    h: *const FpHamiltonian,
    out_opts: *mut FpQpeOptions,
) -> FpStatus {
    guard(|| {
        let cfg = QpeConfig::new(&deref(h, "h")?.0, 6, 4)?;
        *out(out_opts, "out_opts")? = FpQpeOptions {
            n_ancilla: cfg.n_ancilla,
            n_trotter: cfg.n_trotter,
            shots: cfg.shots,
            seed: cfg.seed,
            b_multiplier: cfg.b_multiplier,
            mode: FpUnitaryMode::Trotter,
            initial_basis: 0,
        };
        Ok(())
    })
}

fn qpe_config(h: &PauliSum, o: &FpQpeOptions) -> Result<QpeConfig, Failure> {
    let mode = match o.mode {
        FpUnitaryMode::Trotter => UnitaryMode::Trotter,
        FpUnitaryMode::Exact => UnitaryMode::Exact,
        FpUnitaryMode::RescaledTrotter => UnitaryMode::RescaledTrotter,
    };
    let cfg = QpeConfig::new(h, o.n_ancilla, o.n_trotter)?
        .with_multiplier(o.b_multiplier)
        .with_shots(o.shots)
        .with_seed(o.seed)
        .with_mode(mode)
        .with_initial_state(InitialState::Basis(o.initial_basis));
    cfg.validate()?;
    Ok(cfg)
}

/// Runs seeded QPE and reports the most frequent bin: its energy (offset
/// included) and empirical frequency.
#[no_mangle]
pub unsafe extern "C" fn fp_qpe_peak(
    h: *const FpHamiltonian,
    opts: *const FpQpeOptions,
    out_energy: *mut f64,
    out_frequency: *mut f64,
) -> FpStatus {
    guard(|| {
        let h = &deref(h, "h")?.0;
        let cfg = qpe_config(h, deref(opts, "opts")?)?;
        let (e_slot, f_slot) = (out(out_energy, "out_energy")?, out(out_frequency, "out_frequency")?);
        let run = run_qpe(h, &cfg)?;
        let peak = run
            .peak()
            .ok_or_else(|| Failure(FpStatus::Numeric, "empty histogram".into()))?;
        *e_slot = peak.energy;
        *f_slot = peak.probability;
        Ok(())
    })
}

/// Repeat-until-success QPE preparation of the ground state of `h`: repeats
/// seeded readouts until the bin nearest the exact ground energy appears and
/// returns the collapsed system register. `max_attempts = 0` selects the
/// default budget.
#[no_mangle]
pub unsafe extern "C" fn fp_qpe_prepare_ground(
    h: *const FpHamiltonian,
    opts: *const FpQpeOptions,
    max_attempts: usize,
    out_state: *mut *mut FpStatevector,
    out_attempts: *mut usize,
) -> FpStatus {
    guard(|| {
        let h = &deref(h, "h")?.0;
        let cfg = qpe_config(h, deref(opts, "opts")?)?;
        let slot = out(out_state, "out_state")?;
        let target = ground_state_target(h, &cfg)?;
        let prepared = prepare_ground_state(h, &cfg, target, (max_attempts > 0).then_some(max_attempts))?;
        if let Some(a) = out_attempts.as_mut() {
            *a = prepared.attempts;
        }
        *slot = Box::into_raw(Box::new(FpStatevector(prepared.state)));
        Ok(())
    })
}

/// Builds a state from `2^n` amplitudes split into real and imaginary
/// arrays; the norm must be 1 within 1e-10.
#[no_mangle]
pub unsafe extern "C" fn fp_statevector_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    out_state: *mut *mut FpStatevector,
) -> FpStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        let amps = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        *slot = Box::into_raw(Box::new(FpStatevector(Statevector::from_amplitudes(amps)?)));
        Ok(())
    })
}

/// Releases a statevector; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fp_statevector_free(s: *mut FpStatevector) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_statevector_n_qubits(
    s: *const FpStatevector,
    out_n: *mut usize,
) -> FpStatus {
    guard(|| {
        *out(out_n, "out_n")? = deref(s, "s")?.0.n_qubits();
        Ok(())
    })
}

/// Copies the `2^n` amplitudes out; `written` receives the required count.
#[no_mangle]
pub unsafe extern "C" fn fp_statevector_amplitudes(
    s: *const FpStatevector,
    out_re: *mut f64,
    out_im: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpStatus {
    guard(|| {
        let amps = deref(s, "s")?.0.amplitudes();
        check_capacity(amps.len(), cap, written)?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output array"));
        }
        for (i, a) in amps.iter().enumerate() {
            *out_re.add(i) = a.re;
            *out_im.add(i) = a.im;
        }
        Ok(())
    })
}

/// `<psi|H|psi>` including the identity offset.
#[no_mangle]
pub unsafe extern "C" fn fp_statevector_expectation(
    s: *const FpStatevector,
    h: *const FpHamiltonian,
    out_energy: *mut f64,
) -> FpStatus {
    guard(|| {
        let e = deref(s, "s")?.0.expectation(&deref(h, "h")?.0)?;
        *out(out_energy, "out_energy")? = e;
        Ok(())
    })
}

/// CNOT-equivalent count of the compiled direct initializer for `s`.
#[no_mangle]
pub unsafe extern "C" fn fp_direct_init_cnots(
    s: *const FpStatevector,
    out_cnots: *mut u64,
) -> FpStatus {
    guard(|| {
        let c = compile_initializer(&deref(s, "s")?.0)?;
        let n = count_gates(&c)
            .cnot_equivalent()
            .ok_or_else(|| Failure(FpStatus::Numeric, "gate without a CNOT cost".into()))?;
        *out(out_cnots, "out_cnots")? = n;
        Ok(())
    })
}

/// Closed-form CNOT count of direct initialization on `n_qubits`.
#[no_mangle]
pub unsafe extern "C" fn fp_di_cnot_count(n_qubits: u32, out_cnots: *mut u64) -> FpStatus {
    guard(|| {
        let n = di_cnot_count(n_qubits)?;
        *out(out_cnots, "out_cnots")? = n;
        Ok(())
    })
}

/// Closed-form CNOT count of QPE with `n_u` CNOTs per Trotter step.
#[no_mangle]
pub unsafe extern "C" fn fp_qpe_cnot_count(
    n_u: u64,
    n_trotter: u64,
    n_ancilla: u32,
    out_cnots: *mut u64,
) -> FpStatus {
    guard(|| {
        let n = qpe_cnots(n_u, n_trotter, n_ancilla)?;
        *out(out_cnots, "out_cnots")? = n;
        Ok(())
    })
}

/// Prony fit of order `order` to `len` autocorrelation samples taken at
/// spacing `tau` under `U = e^{iHb}`. Components come out sorted by
/// descending weight magnitude; `written` receives their count.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fp_prony_fit(
    re: *const f64,
    im: *const f64,
    len: usize,
    tau: f64,
    b: f64,
    order: usize,
    out_energy: *mut f64,
    out_weight_re: *mut f64,
    out_weight_im: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpStatus {
    guard(|| {
        let (re, im) = (slice(re, len, "re")?, slice(im, len, "im")?);
        let samples = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        let fit = prony_fit(&AutocorrelationSeries::new(tau, b, samples), order)?;
        check_capacity(fit.components.len(), cap, written)?;
        if fit.components.is_empty() {
            return Ok(());
        }
        if out_energy.is_null() || out_weight_re.is_null() || out_weight_im.is_null() {
            return Err(null("output array"));
        }
        for (i, c) in fit.components.iter().enumerate() {
            *out_energy.add(i) = c.energy;
            *out_weight_re.add(i) = c.weight_re;
            *out_weight_im.add(i) = c.weight_im;
        }
        Ok(())
    })
}
