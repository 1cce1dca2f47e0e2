//! As-soon-as-possible scheduling in integer nanoseconds.
//!
//! Every gate starts at the latest frontier among its operands; two-qubit
//! gates occupy the identical interval on both. Barriers raise all fenced
//! qubits to a common frontier without emitting anything. Measurements are
//! untimed: readout happens once, after the last gate.
//!
//! The output is a list of timed gate events plus a per-qubit timeline that
//! tiles `[0, duration]` with gate and idle segments. Zero-length idles are
//! elided; the final gap on each qubit, if any, is marked trailing so the
//! simulator can decide whether decoherence accrues while other qubits
//! finish.

use crate::calibration::CalibrationData;
use crate::circuit::{Circuit, Gate, Instruction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("no duration for {gate} on qubits {qubits:?}: {reason}")]
    NoDuration { gate: String, qubits: Vec<usize>, reason: String },
    #[error("schedule has zero duration, idle fractions are undefined")]
    ZeroDuration,
}

/// Provides gate durations in nanoseconds, normally from calibration data.
pub trait DurationModel {
    fn gate_duration_ns(&self, gate: &Gate) -> Result<u64, ScheduleError>;
}

impl DurationModel for CalibrationData {
    fn gate_duration_ns(&self, gate: &Gate) -> Result<u64, ScheduleError> {
        let fail = |reason: String| ScheduleError::NoDuration {
            gate: gate.kind.name().to_string(),
            qubits: gate.qubits.clone(),
            reason,
        };
        match gate.qubits.as_slice() {
            [q] => Ok(self.qubit(*q).map_err(|e| fail(e.to_string()))?.gate_time_1q_ns),
            [a, b] => Ok(self.pair(*a, *b).map_err(|e| fail(e.to_string()))?.gate_time_2q_ns),
            _ => Err(fail("unsupported arity".into())),
        }
    }
}

/// Fixed durations regardless of operands; used in tests and for circuits
/// without device data.
#[derive(Debug, Clone, Copy)]
pub struct UniformDurations {
    pub one_qubit_ns: u64,
    pub two_qubit_ns: u64,
}

impl DurationModel for UniformDurations {
    fn gate_duration_ns(&self, gate: &Gate) -> Result<u64, ScheduleError> {
        Ok(match gate.qubits.len() {
            1 => self.one_qubit_ns,
            _ => self.two_qubit_ns,
        })
    }
}

/// One scheduled gate with its time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GateEvent {
    pub gate: Gate,
    pub start_ns: u64,
    pub end_ns: u64,
}

/// One entry of a qubit's timeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Index into [`Schedule::events`].
    Gate { event: usize },
    Idle { start_ns: u64, end_ns: u64, trailing: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub events: Vec<GateEvent>,
    /// Indexed by qubit; tiles `[0, duration_ns]` per qubit.
    pub timelines: Vec<Vec<Segment>>,
    pub duration_ns: u64,
}

impl Schedule {
    /// Idle nanoseconds per qubit, split (non-trailing, trailing).
    pub fn idle_ns(&self, qubit: usize) -> (u64, u64) {
        let mut inner = 0;
        let mut trailing = 0;
        for seg in &self.timelines[qubit] {
            if let Segment::Idle { start_ns, end_ns, trailing: t } = seg {
                if *t {
                    trailing += end_ns - start_ns;
                } else {
                    inner += end_ns - start_ns;
                }
            }
        }
        (inner, trailing)
    }

    /// Per-qubit idle time (inner plus trailing) over total duration.
    pub fn idle_fractions(&self) -> Result<Vec<f64>, ScheduleError> {
        if self.duration_ns == 0 {
            return Err(ScheduleError::ZeroDuration);
        }
        Ok((0..self.timelines.len())
            .map(|q| {
                let (inner, trailing) = self.idle_ns(q);
                (inner + trailing) as f64 / self.duration_ns as f64
            })
            .collect())
    }
}

pub fn schedule(circuit: &Circuit, durations: &impl DurationModel) -> Result<Schedule, ScheduleError> {
    let n = circuit.num_qubits;
    let mut frontier = vec![0u64; n];
    let mut events: Vec<GateEvent> = Vec::new();
    // (event index, start, end) per qubit, in time order by construction.
    let mut per_qubit: Vec<Vec<usize>> = vec![Vec::new(); n];

    for inst in &circuit.instructions {
        match inst {
            Instruction::Gate(g) => {
                let dur = durations.gate_duration_ns(g)?;
                let start = g.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
                let end = start + dur;
                let idx = events.len();
                events.push(GateEvent { gate: g.clone(), start_ns: start, end_ns: end });
                for &q in &g.qubits {
                    per_qubit[q].push(idx);
                    frontier[q] = end;
                }
            }
            Instruction::Barrier(qs) => {
                let qs: Vec<usize> = if qs.is_empty() { (0..n).collect() } else { qs.clone() };
                let fence = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0);
                for &q in &qs {
                    frontier[q] = fence;
                }
            }
            Instruction::Measure { .. } => {}
        }
    }

    let duration_ns = frontier.iter().copied().max().unwrap_or(0);
    let mut timelines = Vec::with_capacity(n);
    for q in 0..n {
        let mut segs = Vec::new();
        let mut cursor = 0u64;
        for &idx in &per_qubit[q] {
            let ev = &events[idx];
            if ev.start_ns > cursor {
                segs.push(Segment::Idle { start_ns: cursor, end_ns: ev.start_ns, trailing: false });
            }
            segs.push(Segment::Gate { event: idx });
            cursor = ev.end_ns;
        }
        if cursor < duration_ns {
            segs.push(Segment::Idle { start_ns: cursor, end_ns: duration_ns, trailing: true });
        }
        timelines.push(segs);
    }

    Ok(Schedule { events, timelines, duration_ns })
}
