//! C ABI over the simulator core: opaque handles, integer status codes, and
//! a thread-local last-error message.
//!
//! Ownership follows the usual C idiom. Every `*_from_*` constructor hands
//! the caller an owned handle that must be released with the matching
//! `*_free`; `char*` results are released with `qpu_twin_string_free`;
//! `const char*` results borrow from the handle (or thread) that produced
//! them and must not be freed. Handles are not thread-safe; share them with
//! external synchronization or not at all.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qpu_twin::bench::load_fixture;
use qpu_twin::calibration::{CalibrationData, CalibrationError};
use qpu_twin::channels::DephasingTimescale;
use qpu_twin::circuit::Circuit;
use qpu_twin::compiler::{compile, NativeGateset};
use qpu_twin::metrics::hellinger;
use qpu_twin::qasm;
use qpu_twin::sim::{simulate, simulate_with, Mode, OutcomeDistribution, SimError, SimOptions};
use qpu_twin::topology::Topology;

/// Outcome of every fallible call. Anything other than `Ok` leaves an
/// explanation in `qpu_twin_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpuTwinStatus {
    Ok = 0,
    /// Null pointer, unknown name, index out of range, bad UTF-8.
    InvalidArgument = 1,
    /// Malformed QASM or JSON input.
    ParseError = 2,
    /// Well-formed input that violates a semantic rule.
    ValidationError = 3,
    /// The run would exceed a qubit or memory cap.
    ResourceError = 4,
    /// A bug on this side of the boundary; state may be inconsistent.
    InternalError = 5,
}

/// Noise mode, mirroring the CLI's `--mode` values.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpuTwinMode {
    Paper = 0,
    UnmStyle = 1,
    Noiseless = 2,
}

/// Simulation knobs. Obtain defaults from `qpu_twin_sim_options_default`
/// and adjust fields; zero-initializing by hand is not supported.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QpuTwinSimOptions {
    pub mode: QpuTwinMode,
    /// Drive dephasing from the pure-dephasing time `1/(1/T2 - 1/(2 T1))`
    /// instead of the printed T2.
    pub dephasing_from_tphi: bool,
    /// Charge the idle tail after a qubit's last gate (`paper` mode only).
    pub trailing_idle: bool,
    /// Run the density matrix in f32 instead of f64.
    pub single_precision: bool,
    /// Cap on gate-touched qubits before the run is refused.
    pub max_qubits: usize,
}

/// Parsed circuit (opaque).
pub struct QpuTwinCircuit(Circuit);

/// Device calibration table (opaque).
pub struct QpuTwinCalibration(CalibrationData);

/// Measurement outcome distribution (opaque). Entries are sorted by
/// bitstring and addressed by index.
pub struct QpuTwinDistribution {
    dist: OutcomeDistribution,
    entries: Vec<(CString, f64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: QpuTwinStatus, msg: impl Into<String>) -> QpuTwinStatus {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(CString::new(msg).expect("NULs stripped above"));
    });
    status
}

fn ok() -> QpuTwinStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    QpuTwinStatus::Ok
}

fn guarded(f: impl FnOnce() -> QpuTwinStatus) -> QpuTwinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(QpuTwinStatus::InternalError, "internal panic"),
    }
}

/// Borrow a required string argument.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, QpuTwinStatus> {
    if p.is_null() {
        return Err(fail(QpuTwinStatus::InvalidArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(QpuTwinStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, QpuTwinStatus> {
    p.as_ref()
        .ok_or_else(|| fail(QpuTwinStatus::InvalidArgument, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, QpuTwinStatus> {
    p.as_mut()
        .ok_or_else(|| fail(QpuTwinStatus::InvalidArgument, format!("{name} is null")))
}

fn sim_status(e: &SimError) -> QpuTwinStatus {
    match e {
        SimError::TooManyQubits { .. } => QpuTwinStatus::ResourceError,
        _ => QpuTwinStatus::ValidationError,
    }
}

fn cal_status(e: &CalibrationError) -> QpuTwinStatus {
    match e {
        CalibrationError::Malformed(_) => QpuTwinStatus::ParseError,
        _ => QpuTwinStatus::ValidationError,
    }
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn qpu_twin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread, or null after a
/// success. The pointer is invalidated by the next call on the same thread.
#[no_mangle]
pub extern "C" fn qpu_twin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned through a `char**` out-parameter.
///
/// # Safety
/// `s` must have come from this library and not have been freed already.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse OpenQASM 2.0 text into a circuit handle.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_circuit_from_qasm(
    src: *const c_char,
    out: *mut *mut QpuTwinCircuit,
) -> QpuTwinStatus {
    guarded(|| {
        let (src, out) = match (str_arg(src, "src"), out_arg(out, "out")) {
            (Ok(s), Ok(o)) => (s, o),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        match qasm::parse(src) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(QpuTwinCircuit(c)));
                ok()
            }
            Err(e) => fail(QpuTwinStatus::ParseError, e.to_string()),
        }
    })
}

/// Load one of the bundled benchmark fixtures by name, e.g. `"GHZ-2"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_circuit_from_fixture(
    name: *const c_char,
    out: *mut *mut QpuTwinCircuit,
) -> QpuTwinStatus {
    guarded(|| {
        let (name, out) = match (str_arg(name, "name"), out_arg(out, "out")) {
            (Ok(n), Ok(o)) => (n, o),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        match load_fixture(name) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(QpuTwinCircuit(c)));
                ok()
            }
            Err(e) => fail(QpuTwinStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Serialize a circuit back to canonical OpenQASM 2.0. The result is owned
/// by the caller; release it with `qpu_twin_string_free`.
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_circuit_to_qasm(
    circuit: *const QpuTwinCircuit,
    out: *mut *mut c_char,
) -> QpuTwinStatus {
    guarded(|| {
        let (c, out) = match (ref_arg(circuit, "circuit"), out_arg(out, "out")) {
            (Ok(c), Ok(o)) => (c, o),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let text = qasm::serialize(&c.0).replace('\0', " ");
        *out = CString::new(text).expect("NULs stripped above").into_raw();
        ok()
    })
}

/// Report circuit size figures. Any of the out-pointers may be null to skip
/// that figure. `qubits` counts gate-touched qubits, not declared wires.
///
/// # Safety
/// `circuit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_circuit_stats(
    circuit: *const QpuTwinCircuit,
    qubits: *mut usize,
    depth: *mut usize,
    one_qubit_gates: *mut usize,
    two_qubit_gates: *mut usize,
) -> QpuTwinStatus {
    guarded(|| {
        let c = match ref_arg(circuit, "circuit") {
            Ok(c) => c,
            Err(e) => return e,
        };
        let stats = c.0.stats();
        for (p, v) in [
            (qubits, stats.qubits),
            (depth, stats.depth),
            (one_qubit_gates, stats.one_qubit_gates),
            (two_qubit_gates, stats.two_qubit_gates),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        ok()
    })
}

/// Release a circuit handle. Null is ignored.
///
/// # Safety
/// `circuit` must have come from this library and not have been freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_circuit_free(circuit: *mut QpuTwinCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Route a circuit onto a built-in topology (`"iqm-q20"` or
/// `"ibmq-melbourne"`) and lower it to a native gateset (`"iqm-prx-cz"` or
/// `"ibmq-u-cnot"`, aliases `"iqm"`/`"ibmq"`). Produces a new circuit
/// handle; the input is untouched.
///
/// # Safety
/// `circuit` must be a live handle, the strings NUL-terminated, and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_compile(
    circuit: *const QpuTwinCircuit,
    topology: *const c_char,
    gateset: *const c_char,
    out: *mut *mut QpuTwinCircuit,
) -> QpuTwinStatus {
    guarded(|| {
        let (c, topo, gs, out) = match (
            ref_arg(circuit, "circuit"),
            str_arg(topology, "topology"),
            str_arg(gateset, "gateset"),
            out_arg(out, "out"),
        ) {
            (Ok(c), Ok(t), Ok(g), Ok(o)) => (c, t, g, o),
            (Err(e), _, _, _) | (_, Err(e), _, _) | (_, _, Err(e), _) | (_, _, _, Err(e)) => {
                return e
            }
        };
        let topo = match topo {
            "iqm-q20" | "iqm20" => Topology::iqm20(),
            "ibmq-melbourne" | "melbourne" => Topology::melbourne(),
            other => {
                return fail(
                    QpuTwinStatus::InvalidArgument,
                    format!("unknown topology `{other}`; expected iqm-q20 or ibmq-melbourne"),
                )
            }
        };
        let gs = match gs {
            "iqm-prx-cz" | "iqm" => NativeGateset::IqmPrxCz,
            "ibmq-u-cnot" | "ibmq" => NativeGateset::IbmqUCnot,
            other => {
                return fail(
                    QpuTwinStatus::InvalidArgument,
                    format!("unknown gateset `{other}`; expected iqm-prx-cz or ibmq-u-cnot"),
                )
            }
        };
        match compile(&c.0, &topo, gs) {
            Ok(compiled) => {
                *out = Box::into_raw(Box::new(QpuTwinCircuit(compiled.circuit)));
                ok()
            }
            Err(e) => fail(QpuTwinStatus::ValidationError, e.to_string()),
        }
    })
}

/// Load a built-in calibration table: `"iqm-q20"` or `"ibmq-melbourne"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_calibration_builtin(
    name: *const c_char,
    out: *mut *mut QpuTwinCalibration,
) -> QpuTwinStatus {
    guarded(|| {
        let (name, out) = match (str_arg(name, "name"), out_arg(out, "out")) {
            (Ok(n), Ok(o)) => (n, o),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let cal = match name {
            "iqm-q20" | "iqm20" => CalibrationData::iqm20(),
            "ibmq-melbourne" | "melbourne" => CalibrationData::melbourne(),
            other => {
                return fail(
                    QpuTwinStatus::InvalidArgument,
                    format!("unknown calibration `{other}`; expected iqm-q20 or ibmq-melbourne"),
                )
            }
        };
        *out = Box::into_raw(Box::new(QpuTwinCalibration(cal)));
        ok()
    })
}

/// Parse and validate a calibration table from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_calibration_from_json(
    json: *const c_char,
    out: *mut *mut QpuTwinCalibration,
) -> QpuTwinStatus {
    guarded(|| {
        let (json, out) = match (str_arg(json, "json"), out_arg(out, "out")) {
            (Ok(j), Ok(o)) => (j, o),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        match CalibrationData::from_json(json) {
            Ok(cal) => {
                *out = Box::into_raw(Box::new(QpuTwinCalibration(cal)));
                ok()
            }
            Err(e) => fail(cal_status(&e), e.to_string()),
        }
    })
}

/// Number of qubits the calibration covers; 0 for a null handle.
///
/// # Safety
/// `cal` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_calibration_num_qubits(cal: *const QpuTwinCalibration) -> usize {
    cal.as_ref().map_or(0, |c| c.0.num_qubits())
}

/// Release a calibration handle. Null is ignored.
///
/// # Safety
/// `cal` must have come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_calibration_free(cal: *mut QpuTwinCalibration) {
    if !cal.is_null() {
        drop(Box::from_raw(cal));
    }
}

/// The defaults the CLI uses: paper mode, printed T2, trailing idle on,
/// double precision, 15-qubit cap.
#[no_mangle]
pub extern "C" fn qpu_twin_sim_options_default() -> QpuTwinSimOptions {
    let d = SimOptions::new(Mode::Paper);
    QpuTwinSimOptions {
        mode: QpuTwinMode::Paper,
        dephasing_from_tphi: false,
        trailing_idle: d.trailing_idle,
        single_precision: false,
        max_qubits: d.max_qubits,
    }
}

/// Run the density-matrix simulation and produce an outcome distribution.
/// `opts` may be null for defaults.
///
/// # Safety
/// `circuit` and `cal` must be live handles, `opts` null or valid, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_simulate(
    circuit: *const QpuTwinCircuit,
    cal: *const QpuTwinCalibration,
    opts: *const QpuTwinSimOptions,
    out: *mut *mut QpuTwinDistribution,
) -> QpuTwinStatus {
    guarded(|| {
        let (c, cal, out) = match (
            ref_arg(circuit, "circuit"),
            ref_arg(cal, "cal"),
            out_arg(out, "out"),
        ) {
            (Ok(c), Ok(k), Ok(o)) => (c, k, o),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        let copts = opts.as_ref().copied().unwrap_or_else(|| qpu_twin_sim_options_default());
        let mode = match copts.mode {
            QpuTwinMode::Paper => Mode::Paper,
            QpuTwinMode::UnmStyle => Mode::UnmStyle,
            QpuTwinMode::Noiseless => Mode::Noiseless,
        };
        let mut sopts = SimOptions::new(mode);
        sopts.dephasing = if copts.dephasing_from_tphi {
            DephasingTimescale::PureComponent
        } else {
            DephasingTimescale::AsPrinted
        };
        sopts.trailing_idle = copts.trailing_idle;
        sopts.max_qubits = copts.max_qubits;
        let result = if copts.single_precision {
            simulate_with::<f32>(&c.0, &cal.0, &sopts)
        } else {
            simulate(&c.0, &cal.0, &sopts)
        };
        match result {
            Ok(dist) => {
                let entries = dist
                    .probabilities()
                    .iter()
                    .map(|(k, &p)| (CString::new(k.as_str()).expect("bitstrings are 0/1"), p))
                    .collect();
                *out = Box::into_raw(Box::new(QpuTwinDistribution { dist, entries }));
                ok()
            }
            Err(e) => fail(sim_status(&e), e.to_string()),
        }
    })
}

/// Number of outcomes with nonzero probability; 0 for a null handle.
///
/// # Safety
/// `dist` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_distribution_len(dist: *const QpuTwinDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.entries.len())
}

/// Width of the outcome bitstrings in classical bits; 0 for a null handle.
///
/// # Safety
/// `dist` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_distribution_num_bits(dist: *const QpuTwinDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.dist.num_bits())
}

/// Fetch entry `index` (sorted by bitstring). The bitstring pointer borrows
/// from the handle; do not free it. Either out-pointer may be null.
///
/// # Safety
/// `dist` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_distribution_entry(
    dist: *const QpuTwinDistribution,
    index: usize,
    bitstring: *mut *const c_char,
    probability: *mut f64,
) -> QpuTwinStatus {
    guarded(|| {
        let d = match ref_arg(dist, "dist") {
            Ok(d) => d,
            Err(e) => return e,
        };
        let Some((bits, p)) = d.entries.get(index) else {
            return fail(
                QpuTwinStatus::InvalidArgument,
                format!("index {index} out of range for {} entries", d.entries.len()),
            );
        };
        if !bitstring.is_null() {
            *bitstring = bits.as_ptr();
        }
        if !probability.is_null() {
            *probability = *p;
        }
        ok()
    })
}

/// Probability of one bitstring; absent outcomes read as 0.
///
/// # Safety
/// `dist` must be a live handle, `bitstring` NUL-terminated, and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_distribution_probability(
    dist: *const QpuTwinDistribution,
    bitstring: *const c_char,
    out: *mut f64,
) -> QpuTwinStatus {
    guarded(|| {
        let (d, bits, out) = match (
            ref_arg(dist, "dist"),
            str_arg(bitstring, "bitstring"),
            out_arg(out, "out"),
        ) {
            (Ok(d), Ok(b), Ok(o)) => (d, b, o),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        *out = d.dist.probabilities().get(bits).copied().unwrap_or(0.0);
        ok()
    })
}

/// Hellinger distance in [0, 1] between two distributions of equal width.
/// Each input is renormalized by its own total first, so the trace drift of
/// a single-precision run does not trip the strict normalization check.
///
/// # Safety
/// `a` and `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_hellinger(
    a: *const QpuTwinDistribution,
    b: *const QpuTwinDistribution,
    out: *mut f64,
) -> QpuTwinStatus {
    guarded(|| {
        let (a, b, out) = match (ref_arg(a, "a"), ref_arg(b, "b"), out_arg(out, "out")) {
            (Ok(a), Ok(b), Ok(o)) => (a, b, o),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        if a.dist.num_bits() != b.dist.num_bits() {
            return fail(
                QpuTwinStatus::ValidationError,
                format!(
                    "distributions have different widths: {} vs {} bits",
                    a.dist.num_bits(),
                    b.dist.num_bits()
                ),
            );
        }
        let normalized = |d: &QpuTwinDistribution| {
            let total: f64 = d.dist.probabilities().values().sum();
            d.dist
                .probabilities()
                .iter()
                .map(|(k, &p)| (k.clone(), p / total))
                .collect::<std::collections::BTreeMap<_, _>>()
        };
        match hellinger(&normalized(a), &normalized(b)) {
            Ok(h) => {
                *out = h;
                ok()
            }
            Err(e) => fail(QpuTwinStatus::ValidationError, e.to_string()),
        }
    })
}

/// Release a distribution handle. Null is ignored.
///
/// # Safety
/// `dist` must have come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn qpu_twin_distribution_free(dist: *mut QpuTwinDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}
