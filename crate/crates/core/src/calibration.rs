//! Vendor calibration data: per-qubit coherence and readout figures plus
//! per-pair gate fidelities.
//!
//! Fidelities are average gate fidelities stored as fractions (0.9951, not
//! 99.51%). Coherence times are microseconds, gate times nanoseconds.
//! Completeness is validated against a [`Topology`]: every qubit and every
//! coupled pair must carry an entry; nothing is silently defaulted.

use crate::topology::Topology;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    /// Average fidelity of the native single-qubit gate.
    pub fidelity_1q: f64,
    /// Amplitude-damping time constant, microseconds.
    pub t1_us: f64,
    /// Dephasing time constant as printed by the vendor, microseconds.
    pub t2_us: f64,
    /// P(read 1 | prepared 0).
    pub readout_error_0: f64,
    /// P(read 0 | prepared 1).
    pub readout_error_1: f64,
    pub gate_time_1q_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCalibration {
    /// Coupled pair, stored `(low, high)`.
    pub qubits: (usize, usize),
    /// Average fidelity of the native two-qubit gate.
    pub fidelity_2q: f64,
    pub gate_time_2q_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationData {
    pub name: String,
    pub per_qubit: Vec<QubitCalibration>,
    pub per_pair: Vec<PairCalibration>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalibrationError {
    #[error("calibration JSON malformed: {0}")]
    Malformed(String),
    #[error("qubit {qubit}: {field} = {value} is out of range")]
    FieldOutOfRange { qubit: usize, field: &'static str, value: f64 },
    #[error("pair ({0}, {1}): fidelity_2q = {2} is out of range")]
    PairFidelityOutOfRange(usize, usize, f64),
    #[error("pair ({0}, {1}) references a qubit outside 0..{2}")]
    PairOutOfRange(usize, usize, usize),
    #[error("pair ({0}, {1}) listed twice")]
    DuplicatePair(usize, usize),
    #[error("topology has {topology} qubits but calibration covers {calibration}")]
    QubitCountMismatch { topology: usize, calibration: usize },
    #[error("coupled pair ({0}, {1}) has no calibration entry")]
    MissingPair(usize, usize),
    #[error("no calibration entry for qubit {0}")]
    MissingQubit(usize),
    #[error("no calibration entry for pair ({0}, {1})")]
    UnknownPair(usize, usize),
}

/// Mean and median of one calibration parameter across the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub median: f64,
}

fn stat(values: &mut Vec<f64>) -> Stat {
    assert!(!values.is_empty());
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    Stat { mean, median }
}

/// Device-wide summary in the units of the underlying fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub fidelity_1q: Stat,
    pub fidelity_2q: Stat,
    pub gate_time_1q_ns: Stat,
    pub gate_time_2q_ns: Stat,
    pub t1_us: Stat,
    pub t2_us: Stat,
    pub readout_error_0: Stat,
    pub readout_error_1: Stat,
}

impl CalibrationData {
    pub fn num_qubits(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitCalibration, CalibrationError> {
        self.per_qubit.get(q).ok_or(CalibrationError::MissingQubit(q))
    }

    /// Pair entry for an unordered qubit pair.
    pub fn pair(&self, a: usize, b: usize) -> Result<&PairCalibration, CalibrationError> {
        let key = (a.min(b), a.max(b));
        self.per_pair
            .iter()
            .find(|p| p.qubits == key)
            .ok_or(CalibrationError::UnknownPair(key.0, key.1))
    }

    /// Field sanity: fidelities in (0, 1], times positive, readout errors in
    /// [0, 1). Called by every loader; also usable on hand-built data.
    pub fn validate(&self) -> Result<(), CalibrationError> {
        for (q, c) in self.per_qubit.iter().enumerate() {
            let checks: [(&'static str, f64, bool); 5] = [
                ("fidelity_1q", c.fidelity_1q, c.fidelity_1q > 0.0 && c.fidelity_1q <= 1.0),
                ("t1_us", c.t1_us, c.t1_us > 0.0 && c.t1_us.is_finite()),
                ("t2_us", c.t2_us, c.t2_us > 0.0 && c.t2_us.is_finite()),
                ("readout_error_0", c.readout_error_0, (0.0..1.0).contains(&c.readout_error_0)),
                ("readout_error_1", c.readout_error_1, (0.0..1.0).contains(&c.readout_error_1)),
            ];
            for (field, value, ok) in checks {
                if !ok {
                    return Err(CalibrationError::FieldOutOfRange { qubit: q, field, value });
                }
            }
            if c.gate_time_1q_ns == 0 {
                return Err(CalibrationError::FieldOutOfRange { qubit: q, field: "gate_time_1q_ns", value: 0.0 });
            }
        }
        let n = self.per_qubit.len();
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.per_pair {
            let (a, b) = p.qubits;
            if a >= n || b >= n || a == b {
                return Err(CalibrationError::PairOutOfRange(a, b, n));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(CalibrationError::DuplicatePair(a, b));
            }
            if !(p.fidelity_2q > 0.0 && p.fidelity_2q <= 1.0) {
                return Err(CalibrationError::PairFidelityOutOfRange(a, b, p.fidelity_2q));
            }
            if p.gate_time_2q_ns == 0 {
                return Err(CalibrationError::FieldOutOfRange { qubit: a, field: "gate_time_2q_ns", value: 0.0 });
            }
        }
        Ok(())
    }

    /// Completeness against a device graph: equal qubit counts and an entry
    /// for every coupled pair.
    pub fn validate_against(&self, topology: &Topology) -> Result<(), CalibrationError> {
        self.validate()?;
        if self.num_qubits() != topology.num_qubits {
            return Err(CalibrationError::QubitCountMismatch {
                topology: topology.num_qubits,
                calibration: self.num_qubits(),
            });
        }
        for &(a, b) in &topology.edges {
            self.pair(a, b).map_err(|_| CalibrationError::MissingPair(a, b))?;
        }
        Ok(())
    }

    /// Identical figures for every qubit and every listed pair.
    pub fn uniform(
        name: impl Into<String>,
        topology: &Topology,
        qubit: QubitCalibration,
        fidelity_2q: f64,
        gate_time_2q_ns: u64,
    ) -> Self {
        CalibrationData {
            name: name.into(),
            per_qubit: vec![qubit; topology.num_qubits],
            per_pair: topology
                .edges
                .iter()
                .map(|&(a, b)| PairCalibration { qubits: (a, b), fidelity_2q, gate_time_2q_ns })
                .collect(),
        }
    }

    pub fn summary(&self) -> CalibrationSummary {
        let mut f1: Vec<f64> = self.per_qubit.iter().map(|c| c.fidelity_1q).collect();
        let mut t1: Vec<f64> = self.per_qubit.iter().map(|c| c.t1_us).collect();
        let mut t2: Vec<f64> = self.per_qubit.iter().map(|c| c.t2_us).collect();
        let mut e0: Vec<f64> = self.per_qubit.iter().map(|c| c.readout_error_0).collect();
        let mut e1: Vec<f64> = self.per_qubit.iter().map(|c| c.readout_error_1).collect();
        let mut g1: Vec<f64> = self.per_qubit.iter().map(|c| c.gate_time_1q_ns as f64).collect();
        let mut f2: Vec<f64> = self.per_pair.iter().map(|p| p.fidelity_2q).collect();
        let mut g2: Vec<f64> = self.per_pair.iter().map(|p| p.gate_time_2q_ns as f64).collect();
        CalibrationSummary {
            fidelity_1q: stat(&mut f1),
            fidelity_2q: stat(&mut f2),
            gate_time_1q_ns: stat(&mut g1),
            gate_time_2q_ns: stat(&mut g2),
            t1_us: stat(&mut t1),
            t2_us: stat(&mut t2),
            readout_error_0: stat(&mut e0),
            readout_error_1: stat(&mut e1),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        let c: CalibrationData = serde_json::from_str(text).map_err(|e| CalibrationError::Malformed(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// SHA-256 of the compact canonical JSON; recorded in result metadata so
    /// reports pin the exact calibration they were produced from.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_string(self).expect("calibration serialization cannot fail");
        let mut h = Sha256::new();
        h.update(compact.as_bytes());
        hex_string(&h.finalize())
    }

    /// Bundled 20-qubit device snapshot (square lattice, per-qubit figures).
    pub fn iqm20() -> Self {
        Self::from_json(include_str!("../fixtures/calibration/iqm-q20.json")).expect("bundled calibration is valid")
    }

    /// Bundled 15-qubit ladder snapshot. The vendor sheet only published
    /// device-wide averages, so every qubit and pair carries the same values.
    pub fn melbourne() -> Self {
        CalibrationData::uniform(
            "ibmq-melbourne",
            &Topology::melbourne(),
            QubitCalibration {
                fidelity_1q: 0.9999,
                t1_us: 56.15,
                t2_us: 56.01,
                readout_error_0: 0.0761,
                readout_error_1: 0.0761,
                gate_time_1q_ns: 100,
            },
            0.9683,
            500,
        )
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
