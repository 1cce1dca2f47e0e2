//! Density-matrix simulation of scheduled circuits under calibration noise.
//!
//! Three modes share one execution engine:
//!
//! * `paper`: every gate interval applies the gate unitary followed by a
//!   depolarizing channel matched to its calibrated fidelity; every idle
//!   interval applies relaxation followed by pure dephasing for the interval
//!   length; readout goes through per-qubit confusion matrices.
//! * `unm_style`: no idle-interval channels. When a gate fires, each operand
//!   first absorbs the relaxation and dephasing accrued since that qubit last
//!   acted (its waiting gap), then the gate and its depolarizing channel
//!   apply. Time after a qubit's last gate is never charged.
//! * `noiseless`: gate unitaries only, exact readout.
//!
//! Channels are composed lazily: single-qubit superoperators accumulate in a
//! per-qubit 4x4 pending product and are folded into the next two-qubit
//! superoperator, so the expensive full-state passes happen once per
//! two-qubit gate instead of once per channel.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{CalibrationData, CalibrationError};
use crate::channels::{
    apply_confusion, confusion_matrix, depolarizing_for_fidelity, idle_channel,
    unitary_superoperator, ChannelError, DephasingTimescale,
};
use crate::circuit::{Circuit, CircuitError, Gate};
use crate::density::{DensityMatrix, Real};
use crate::linalg::Matrix;
use crate::schedule::{schedule, Schedule, ScheduleError, Segment};

/// Default cap on simulated (touched) qubits; a 15-qubit density matrix is
/// 2^30 complex entries, 16 GiB at double precision.
pub const DEFAULT_QUBIT_CAP: usize = 15;

/// Per-step trace and Hermiticity tolerance in invariant-checking runs.
const INVARIANT_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("circuit touches {qubits} qubits, over the cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },
    #[error("state invariant violated at step {step}: {detail}")]
    InvariantViolated { step: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "paper")]
    Paper,
    #[serde(rename = "unm_style")]
    UnmStyle,
    #[serde(rename = "noiseless")]
    Noiseless,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Paper, Mode::UnmStyle, Mode::Noiseless];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::UnmStyle => "unm_style",
            Mode::Noiseless => "noiseless",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("unknown mode `{0}`; expected paper, unm_style, or noiseless")]
pub struct UnknownMode(pub String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub mode: Mode,
    pub dephasing: DephasingTimescale,
    /// Whether `paper` mode charges the idle tail between a qubit's last gate
    /// and the end of the schedule. `unm_style` never charges it.
    pub trailing_idle: bool,
    /// Check trace and Hermiticity after every step. Costs a full-state pass
    /// per single-qubit channel, so leave off outside debugging.
    pub check_invariants: bool,
    pub max_qubits: usize,
}

impl SimOptions {
    pub fn new(mode: Mode) -> Self {
        SimOptions {
            mode,
            dephasing: DephasingTimescale::default(),
            trailing_idle: true,
            check_invariants: false,
            max_qubits: DEFAULT_QUBIT_CAP,
        }
    }
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions::new(Mode::Paper)
    }
}

/// Outcome probabilities keyed by classical bitstring.
///
/// Bitstrings print most-significant-first: classical bit 0 is the last
/// character. Keys with exactly zero probability are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    num_bits: usize,
    probs: BTreeMap<String, f64>,
}

impl OutcomeDistribution {
    pub fn new(num_bits: usize, probs: BTreeMap<String, f64>) -> Self {
        debug_assert!(probs.keys().all(|k| k.len() == num_bits));
        OutcomeDistribution { num_bits, probs }
    }

    /// Distribution from a dense probability vector indexed by bit pattern.
    pub fn from_dense(num_bits: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), 1usize << num_bits);
        let probs = dense
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(i, &p)| (Self::bitstring(i, num_bits), p))
            .collect();
        OutcomeDistribution { num_bits, probs }
    }

    /// `index` rendered as a bitstring, most significant bit first.
    pub fn bitstring(index: usize, num_bits: usize) -> String {
        if num_bits == 0 {
            return String::new();
        }
        format!("{index:0num_bits$b}")
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn probabilities(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    pub fn prob(&self, bitstring: &str) -> f64 {
        self.probs.get(bitstring).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Expected counts at `shots` samples, unrounded.
    pub fn scale_counts(&self, shots: u64) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .map(|(k, p)| (k.clone(), p * shots as f64))
            .collect()
    }

    /// Multinomial sample of `shots` outcomes with a seeded generator.
    /// Outcomes that were never drawn are omitted.
    pub fn sample(&self, shots: u64, seed: u64) -> BTreeMap<String, u64> {
        if self.probs.is_empty() {
            return BTreeMap::new();
        }
        let keys: Vec<&String> = self.probs.keys().collect();
        let mut cumulative = Vec::with_capacity(keys.len());
        let mut acc = 0.0;
        for p in self.probs.values() {
            acc += p;
            cumulative.push(acc);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cumulative.partition_point(|&c| c <= u).min(keys.len() - 1);
            *counts.entry(keys[idx].clone()).or_insert(0) += 1;
        }
        counts
    }
}

/// One fused operator ready for the engine: either a 4x4 superoperator on one
/// qubit or a 16x16 superoperator on an ordered qubit pair. Qubit indices are
/// compact (post-compaction) positions.
enum SimOp {
    One { qubit: usize, superop: Matrix },
    Two { a: usize, b: usize, superop: Matrix },
}

impl SimOp {
    fn qubits(&self) -> (usize, Option<usize>) {
        match self {
            SimOp::One { qubit, .. } => (*qubit, None),
            SimOp::Two { a, b, .. } => (*a, Some(*b)),
        }
    }
}

/// Tensor two single-qubit superoperators into the superoperator of their
/// product channel on an ordered pair, with `a` the low local bit.
///
/// A two-qubit density matrix vectorizes row-major, so vec index
/// `8*rb + 4*ra + 2*cb + ca` holds element `(ra + 2 rb, ca + 2 cb)`; the
/// entry is the product of the per-qubit superoperator entries at each
/// qubit's own (row bit, column bit) pair.
fn combine_superops_2q(pa: &Matrix, pb: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(16);
    for rb in 0..2usize {
        for ra in 0..2usize {
            for cb in 0..2usize {
                for ca in 0..2usize {
                    let i = 8 * rb + 4 * ra + 2 * cb + ca;
                    for rb2 in 0..2usize {
                        for ra2 in 0..2usize {
                            for cb2 in 0..2usize {
                                for ca2 in 0..2usize {
                                    let j = 8 * rb2 + 4 * ra2 + 2 * cb2 + ca2;
                                    out[(i, j)] = pb[(2 * rb + cb, 2 * rb2 + cb2)]
                                        * pa[(2 * ra + ca, 2 * ra2 + ca2)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Gate unitary fused with its calibrated depolarizing channel.
fn gate_superop(gate: &Gate, cal: &CalibrationData) -> Result<Matrix, SimError> {
    let su = unitary_superoperator(&gate.matrix()?);
    let dep = match gate.qubits.as_slice() {
        [q] => depolarizing_for_fidelity(cal.qubit(*q)?.fidelity_1q, 2)?,
        [a, b] => depolarizing_for_fidelity(cal.pair(*a, *b)?.fidelity_2q, 4)?,
        _ => unreachable!("validated gates are one- or two-qubit"),
    };
    Ok(dep.superoperator().mul(&su))
}

fn idle_superop(
    t_ns: u64,
    cal: &CalibrationData,
    qubit: usize,
    timescale: DephasingTimescale,
) -> Result<Matrix, SimError> {
    let qc = cal.qubit(qubit)?;
    Ok(idle_channel(t_ns, qc.t1_us, qc.t2_us, timescale)?.superoperator())
}

/// Schedule event indices ordered by start time, program order on ties.
fn chronological(sched: &Schedule) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sched.events.len()).collect();
    order.sort_by_key(|&i| sched.events[i].start_ns);
    order
}

fn mapped_gate_op(
    gate: &Gate,
    cal: &CalibrationData,
    map: &[Option<usize>],
) -> Result<SimOp, SimError> {
    let superop = gate_superop(gate, cal)?;
    Ok(match gate.qubits.as_slice() {
        [q] => SimOp::One { qubit: map[*q].unwrap(), superop },
        [a, b] => SimOp::Two { a: map[*a].unwrap(), b: map[*b].unwrap(), superop },
        _ => unreachable!(),
    })
}

/// Gate intervals and idle intervals, merged chronologically.
fn paper_ops(
    sched: &Schedule,
    cal: &CalibrationData,
    opts: &SimOptions,
    map: &[Option<usize>],
) -> Result<Vec<SimOp>, SimError> {
    let mut timed: Vec<(u64, SimOp)> = Vec::with_capacity(sched.events.len());
    for &i in &chronological(sched) {
        let ev = &sched.events[i];
        timed.push((ev.start_ns, mapped_gate_op(&ev.gate, cal, map)?));
    }
    for (q, timeline) in sched.timelines.iter().enumerate() {
        let Some(cq) = map[q] else { continue };
        for seg in timeline {
            if let Segment::Idle { start_ns, end_ns, trailing } = seg {
                if *trailing && !opts.trailing_idle {
                    continue;
                }
                let superop = idle_superop(end_ns - start_ns, cal, q, opts.dephasing)?;
                timed.push((*start_ns, SimOp::One { qubit: cq, superop }));
            }
        }
    }
    // Stable, so same-start ops keep insertion order; ops sharing a start
    // always act on disjoint qubits and commute.
    timed.sort_by_key(|&(t, _)| t);
    Ok(timed.into_iter().map(|(_, op)| op).collect())
}

/// Per gate: charge each operand's waiting gap since it last acted, then the
/// gate. Initial waits count; time after a qubit's last gate does not.
fn unm_ops(
    sched: &Schedule,
    cal: &CalibrationData,
    opts: &SimOptions,
    map: &[Option<usize>],
) -> Result<Vec<SimOp>, SimError> {
    let mut prev_end = vec![0u64; sched.timelines.len()];
    let mut ops = Vec::with_capacity(sched.events.len());
    for &i in &chronological(sched) {
        let ev = &sched.events[i];
        for &q in &ev.gate.qubits {
            let gap = ev.start_ns - prev_end[q];
            if gap > 0 {
                let superop = idle_superop(gap, cal, q, opts.dephasing)?;
                ops.push(SimOp::One { qubit: map[q].unwrap(), superop });
            }
            prev_end[q] = ev.end_ns;
        }
        ops.push(mapped_gate_op(&ev.gate, cal, map)?);
    }
    Ok(ops)
}

fn noiseless_ops(circuit: &Circuit, map: &[Option<usize>]) -> Result<Vec<SimOp>, SimError> {
    let mut ops = Vec::with_capacity(circuit.gate_count());
    for gate in circuit.gates() {
        let superop = unitary_superoperator(&gate.matrix()?);
        ops.push(match gate.qubits.as_slice() {
            [q] => SimOp::One { qubit: map[*q].unwrap(), superop },
            [a, b] => SimOp::Two { a: map[*a].unwrap(), b: map[*b].unwrap(), superop },
            _ => unreachable!(),
        });
    }
    Ok(ops)
}

struct Engine<T: Real> {
    rho: DensityMatrix<T>,
    pending: Vec<Option<Matrix>>,
    /// Compact qubits in order of first use; fixes the final flush order
    /// independently of qubit labels.
    seen_order: Vec<usize>,
    seen: Vec<bool>,
    check: bool,
    step: usize,
}

impl<T: Real> Engine<T> {
    fn new(n: usize, check: bool) -> Self {
        Engine {
            rho: DensityMatrix::ground(n),
            pending: vec![None; n],
            seen_order: Vec::with_capacity(n),
            seen: vec![false; n],
            check,
            step: 0,
        }
    }

    fn note(&mut self, q: usize) {
        if !self.seen[q] {
            self.seen[q] = true;
            self.seen_order.push(q);
        }
    }

    fn flush(&mut self, q: usize) {
        if let Some(p) = self.pending[q].take() {
            self.rho.apply_superop1(q, &p);
        }
    }

    fn check_state(&self) -> Result<(), SimError> {
        let tr = self.rho.trace();
        let trace_defect = (tr.re - 1.0).abs().max(tr.im.abs());
        let herm_defect = self.rho.hermiticity_defect();
        if trace_defect > INVARIANT_TOL || herm_defect > INVARIANT_TOL {
            return Err(SimError::InvariantViolated {
                step: self.step,
                detail: format!(
                    "trace defect {trace_defect:.3e}, Hermiticity defect {herm_defect:.3e}"
                ),
            });
        }
        Ok(())
    }

    fn run(&mut self, ops: Vec<SimOp>) -> Result<(), SimError> {
        for op in ops {
            let (qa, qb) = op.qubits();
            self.note(qa);
            if let Some(qb) = qb {
                self.note(qb);
            }
            match op {
                SimOp::One { qubit, superop } => {
                    self.pending[qubit] = Some(match self.pending[qubit].take() {
                        Some(prev) => superop.mul(&prev),
                        None => superop,
                    });
                    if self.check {
                        self.flush(qubit);
                        self.check_state()?;
                    }
                }
                SimOp::Two { a, b, superop } => {
                    let fused = match (self.pending[a].take(), self.pending[b].take()) {
                        (None, None) => superop,
                        (pa, pb) => {
                            let pa = pa.unwrap_or_else(|| Matrix::identity(4));
                            let pb = pb.unwrap_or_else(|| Matrix::identity(4));
                            superop.mul(&combine_superops_2q(&pa, &pb))
                        }
                    };
                    self.rho.apply_superop2(a, b, &fused);
                    if self.check {
                        self.check_state()?;
                    }
                }
            }
            self.step += 1;
        }
        for q in self.seen_order.clone() {
            self.flush(q);
        }
        if self.check {
            self.check_state()?;
        }
        Ok(())
    }
}

/// Simulate at double precision. See [`simulate_with`].
pub fn simulate(
    circuit: &Circuit,
    cal: &CalibrationData,
    opts: &SimOptions,
) -> Result<OutcomeDistribution, SimError> {
    simulate_with::<f64>(circuit, cal, opts)
}

/// Exact density-matrix simulation of `circuit` under `opts.mode`.
///
/// Only qubits touched by a gate enter the density matrix; an untouched
/// qubit stays exactly in the ground state under relaxation and dephasing,
/// so its readout reduces to the confusion matrix on a deterministic 0.
/// The result is keyed by classical bitstring over the circuit's classical
/// register; unwritten classical bits read 0.
pub fn simulate_with<T: Real>(
    circuit: &Circuit,
    cal: &CalibrationData,
    opts: &SimOptions,
) -> Result<OutcomeDistribution, SimError> {
    circuit.validate()?;

    let mut touched = vec![false; circuit.num_qubits];
    for gate in circuit.gates() {
        for &q in &gate.qubits {
            touched[q] = true;
        }
    }
    let mut map: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    let mut count = 0usize;
    for (q, &t) in touched.iter().enumerate() {
        if t {
            map[q] = Some(count);
            count += 1;
        }
    }
    if count > opts.max_qubits {
        return Err(SimError::TooManyQubits { qubits: count, cap: opts.max_qubits });
    }

    let ops = match opts.mode {
        Mode::Noiseless => noiseless_ops(circuit, &map)?,
        Mode::Paper => paper_ops(&schedule(circuit, cal)?, cal, opts, &map)?,
        Mode::UnmStyle => unm_ops(&schedule(circuit, cal)?, cal, opts, &map)?,
    };

    let mut engine = Engine::<T>::new(count, opts.check_invariants);
    engine.run(ops)?;

    // Readout: marginal over measured touched qubits, ordered by classical
    // bit, then widen with the deterministic bits of untouched qubits.
    let mut meas = circuit.measurements();
    meas.sort_by_key(|&(_, cbit)| cbit);
    let k = meas.len();

    let sources: Vec<usize> = meas.iter().filter_map(|&(q, _)| map[q]).collect();
    let base = engine.rho.marginal(&sources);
    let spread: Vec<usize> = meas
        .iter()
        .enumerate()
        .filter(|&(_, &(q, _))| map[q].is_some())
        .map(|(j, _)| j)
        .collect();
    let mut joint = vec![0.0f64; 1 << k];
    for (i, &p) in base.iter().enumerate() {
        let mut idx = 0usize;
        for (bi, &j) in spread.iter().enumerate() {
            if (i >> bi) & 1 == 1 {
                idx |= 1 << j;
            }
        }
        joint[idx] = p;
    }

    if opts.mode != Mode::Noiseless && k > 0 {
        let matrices = meas
            .iter()
            .map(|&(q, _)| {
                let qc = cal.qubit(q)?;
                Ok(confusion_matrix(qc.readout_error_0, qc.readout_error_1)?)
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        apply_confusion(&mut joint, &matrices);
    }

    let num_bits = circuit.num_clbits;
    let mut probs = BTreeMap::new();
    for (idx, &p) in joint.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let mut out = 0usize;
        for (j, &(_, cbit)) in meas.iter().enumerate() {
            if (idx >> j) & 1 == 1 {
                out |= 1 << cbit;
            }
        }
        probs.insert(OutcomeDistribution::bitstring(out, num_bits), p);
    }
    Ok(OutcomeDistribution::new(num_bits, probs))
}
