//! Gate-level circuit representation.
//!
//! A [`Circuit`] is an ordered list of instructions over `num_qubits` qubits
//! and `num_clbits` classical bits. Qubit 0 is the least significant bit of a
//! basis-state index, and measured bitstrings are printed most significant
//! bit first. Barriers carry no unitary semantics; they only fence the layer
//! structure and the scheduler. Measurements are terminal per qubit.

use crate::linalg::{self, Complex64, Matrix, ONE, ZERO};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Gates with a fixed matrix definition.
///
/// `Rz`, `U1`, `U2`, `U3` and `Prx` take angle parameters; the rest take none.
/// `rx` and `ry` are not separate kinds: the QASM parser lowers them to `Prx`
/// with a fixed phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rz,
    U1,
    U2,
    U3,
    /// Phased X rotation, the native single-qubit gate of the IQM set.
    Prx,
    Cz,
    Cnot,
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::Rz
            | GateKind::U1
            | GateKind::U2
            | GateKind::U3
            | GateKind::Prx => 1,
            GateKind::Cz | GateKind::Cnot | GateKind::Swap => 2,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rz | GateKind::U1 => 1,
            GateKind::U2 | GateKind::Prx => 2,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    /// Lowercase OpenQASM spelling.
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Rz => "rz",
            GateKind::U1 => "u1",
            GateKind::U2 => "u2",
            GateKind::U3 => "u3",
            GateKind::Prx => "prx",
            GateKind::Cz => "cz",
            GateKind::Cnot => "cx",
            GateKind::Swap => "swap",
        }
    }

    pub fn all() -> &'static [GateKind] {
        &[
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::Rz,
            GateKind::U1,
            GateKind::U2,
            GateKind::U3,
            GateKind::Prx,
            GateKind::Cz,
            GateKind::Cnot,
            GateKind::Swap,
        ]
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// Operand qubits; for two-qubit gates `qubits[0]` is the low bit of the
    /// local matrix index (the control for `Cnot`).
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Self {
        Gate { kind, qubits, params }
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q], vec![])
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q], vec![])
    }

    pub fn y(q: usize) -> Self {
        Gate::new(GateKind::Y, vec![q], vec![])
    }

    pub fn z(q: usize) -> Self {
        Gate::new(GateKind::Z, vec![q], vec![])
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Rz, vec![q], vec![theta])
    }

    pub fn u1(q: usize, lambda: f64) -> Self {
        Gate::new(GateKind::U1, vec![q], vec![lambda])
    }

    pub fn u2(q: usize, phi: f64, lambda: f64) -> Self {
        Gate::new(GateKind::U2, vec![q], vec![phi, lambda])
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::new(GateKind::U3, vec![q], vec![theta, phi, lambda])
    }

    pub fn prx(q: usize, theta: f64, phi: f64) -> Self {
        Gate::new(GateKind::Prx, vec![q], vec![theta, phi])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Cz, vec![a, b], vec![])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target], vec![])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, vec![a, b], vec![])
    }

    pub fn matrix(&self) -> Result<Matrix, CircuitError> {
        gate_matrix(self.kind, &self.params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instruction {
    Gate(Gate),
    /// Layer and schedule fence across the listed qubits.
    Barrier(Vec<usize>),
    /// Terminal readout of `qubit` into classical bit `cbit`.
    Measure { qubit: usize, cbit: usize },
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {kind} expects {expected} parameter(s), got {got}")]
    BadParamCount { kind: GateKind, expected: usize, got: usize },
    #[error("gate {kind} expects {expected} operand(s), got {got}")]
    BadArity { kind: GateKind, expected: usize, got: usize },
    #[error("qubit index {qubit} out of range for {num_qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("classical bit {cbit} out of range for {num_clbits} bit(s)")]
    ClbitOutOfRange { cbit: usize, num_clbits: usize },
    #[error("two-qubit gate {kind} needs distinct operands, got qubit {qubit} twice")]
    DuplicateOperand { kind: GateKind, qubit: usize },
    #[error("qubit {qubit} has a gate after its measurement")]
    GateAfterMeasure { qubit: usize },
    #[error("qubit {qubit} is measured twice")]
    DoubleMeasure { qubit: usize },
    #[error("classical bit {cbit} is written by two measurements")]
    ClbitReused { cbit: usize },
    #[error("circuit has measurements; its unitary is undefined")]
    UnitaryWithMeasurements,
    #[error("unitary construction capped at {cap} qubits, circuit has {num_qubits}")]
    UnitaryTooLarge { cap: usize, num_qubits: usize },
    #[error("angle parameter is not finite")]
    NonFiniteParam,
}

/// Matrix of a gate kind at the given parameters.
///
/// Conventions: `prx(theta, phi)` rotates by `theta` about the axis
/// `cos(phi) X + sin(phi) Y`; `u1/u2/u3` follow the OpenQASM 2.0 definitions;
/// two-qubit matrices index their first operand as the low local bit.
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Result<Matrix, CircuitError> {
    if params.len() != kind.param_count() {
        return Err(CircuitError::BadParamCount {
            kind,
            expected: kind.param_count(),
            got: params.len(),
        });
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(CircuitError::NonFiniteParam);
    }
    let i = linalg::I;
    let m = match kind {
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Matrix::from_real(2, &[s, s, s, -s])
        }
        GateKind::X => linalg::pauli_x(),
        GateKind::Y => linalg::pauli_y(),
        GateKind::Z => linalg::pauli_z(),
        GateKind::Rz => {
            let th = params[0];
            Matrix::from_vec(2, vec![
                Complex::from_polar(1.0, -th / 2.0),
                ZERO,
                ZERO,
                Complex::from_polar(1.0, th / 2.0),
            ])
        }
        GateKind::U1 => {
            let lam = params[0];
            Matrix::from_vec(2, vec![ONE, ZERO, ZERO, Complex::from_polar(1.0, lam)])
        }
        GateKind::U2 => {
            let (phi, lam) = (params[0], params[1]);
            let s = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            Matrix::from_vec(2, vec![
                s,
                -s * Complex::from_polar(1.0, lam),
                s * Complex::from_polar(1.0, phi),
                s * Complex::from_polar(1.0, phi + lam),
            ])
        }
        GateKind::U3 => {
            let (th, phi, lam) = (params[0], params[1], params[2]);
            let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
            Matrix::from_vec(2, vec![
                Complex::new(c, 0.0),
                -Complex::from_polar(s, lam),
                Complex::from_polar(s, phi),
                Complex::from_polar(c, phi + lam),
            ])
        }
        GateKind::Prx => {
            let (th, phi) = (params[0], params[1]);
            let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
            Matrix::from_vec(2, vec![
                Complex::new(c, 0.0),
                -i * Complex::from_polar(s, -phi),
                -i * Complex::from_polar(s, phi),
                Complex::new(c, 0.0),
            ])
        }
        GateKind::Cz => Matrix::from_real(4, &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0,
        ]),
        GateKind::Cnot => Matrix::from_real(4, &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        ]),
        GateKind::Swap => Matrix::from_real(4, &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ]),
    };
    Ok(m)
}

/// Resource counts in the depth convention used throughout: greedy ASAP
/// layers over gate instructions, barriers fencing, measurements excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    /// Qubits touched by at least one gate.
    pub qubits: usize,
    pub depth: usize,
    pub one_qubit_gates: usize,
    pub two_qubit_gates: usize,
    pub gate_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit { num_qubits, num_clbits, instructions: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        self.instructions.push(Instruction::Gate(gate));
    }

    pub fn barrier(&mut self, qubits: Vec<usize>) {
        self.instructions.push(Instruction::Barrier(qubits));
    }

    pub fn measure(&mut self, qubit: usize, cbit: usize) {
        self.instructions.push(Instruction::Measure { qubit, cbit });
    }

    /// Measure every qubit, qubit `i` into classical bit `i`.
    pub fn measure_all(&mut self) {
        self.num_clbits = self.num_clbits.max(self.num_qubits);
        for q in 0..self.num_qubits {
            self.measure(q, q);
        }
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.instructions.iter().filter_map(|inst| match inst {
            Instruction::Gate(g) => Some(g),
            _ => None,
        })
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    /// Measurements in instruction order as `(qubit, cbit)` pairs.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.instructions
            .iter()
            .filter_map(|inst| match inst {
                Instruction::Measure { qubit, cbit } => Some((*qubit, *cbit)),
                _ => None,
            })
            .collect()
    }

    /// Measured qubits ordered by their classical bit index.
    pub fn measured_qubits(&self) -> Vec<usize> {
        let mut pairs = self.measurements();
        pairs.sort_by_key(|&(_, cbit)| cbit);
        pairs.into_iter().map(|(q, _)| q).collect()
    }

    pub fn has_measurements(&self) -> bool {
        self.instructions.iter().any(|i| matches!(i, Instruction::Measure { .. }))
    }

    /// Structural validation; every constructor path (parser, compiler,
    /// generators) funnels through this before a circuit is simulated.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut measured = vec![false; self.num_qubits];
        let mut cbit_used = vec![false; self.num_clbits];
        for inst in &self.instructions {
            match inst {
                Instruction::Gate(g) => {
                    if g.qubits.len() != g.kind.arity() {
                        return Err(CircuitError::BadArity {
                            kind: g.kind,
                            expected: g.kind.arity(),
                            got: g.qubits.len(),
                        });
                    }
                    g.matrix()?;
                    for &q in &g.qubits {
                        if q >= self.num_qubits {
                            return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
                        }
                        if measured[q] {
                            return Err(CircuitError::GateAfterMeasure { qubit: q });
                        }
                    }
                    if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
                        return Err(CircuitError::DuplicateOperand { kind: g.kind, qubit: g.qubits[0] });
                    }
                }
                Instruction::Barrier(qs) => {
                    for &q in qs {
                        if q >= self.num_qubits {
                            return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
                        }
                    }
                }
                Instruction::Measure { qubit, cbit } => {
                    if *qubit >= self.num_qubits {
                        return Err(CircuitError::QubitOutOfRange { qubit: *qubit, num_qubits: self.num_qubits });
                    }
                    if *cbit >= self.num_clbits {
                        return Err(CircuitError::ClbitOutOfRange { cbit: *cbit, num_clbits: self.num_clbits });
                    }
                    if measured[*qubit] {
                        return Err(CircuitError::DoubleMeasure { qubit: *qubit });
                    }
                    if cbit_used[*cbit] {
                        return Err(CircuitError::ClbitReused { cbit: *cbit });
                    }
                    measured[*qubit] = true;
                    cbit_used[*cbit] = true;
                }
            }
        }
        Ok(())
    }

    /// Resource counts. Depth assigns each gate to layer
    /// `1 + max(layer of the previous gate on each operand)`, with barriers
    /// raising all their qubits to a common floor; the count of occupied
    /// layers is the depth. Measurements contribute to nothing.
    pub fn stats(&self) -> CircuitStats {
        let mut layer = vec![0usize; self.num_qubits];
        let mut touched = vec![false; self.num_qubits];
        let mut depth = 0usize;
        let mut one_q = 0usize;
        let mut two_q = 0usize;
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for inst in &self.instructions {
            match inst {
                Instruction::Gate(g) => {
                    let l = 1 + g.qubits.iter().map(|&q| layer[q]).max().unwrap_or(0);
                    for &q in &g.qubits {
                        layer[q] = l;
                        touched[q] = true;
                    }
                    depth = depth.max(l);
                    if g.qubits.len() == 1 {
                        one_q += 1;
                    } else {
                        two_q += 1;
                    }
                    *counts.entry(g.kind.name().to_string()).or_insert(0) += 1;
                }
                Instruction::Barrier(qs) => {
                    let qs: Vec<usize> = if qs.is_empty() { (0..self.num_qubits).collect() } else { qs.clone() };
                    let fence = qs.iter().map(|&q| layer[q]).max().unwrap_or(0);
                    for &q in &qs {
                        layer[q] = fence;
                    }
                }
                Instruction::Measure { .. } => {}
            }
        }
        CircuitStats {
            qubits: touched.iter().filter(|&&t| t).count(),
            depth,
            one_qubit_gates: one_q,
            two_qubit_gates: two_q,
            gate_counts: counts,
        }
    }

    /// Total unitary of a measurement-free circuit, built by embedding each
    /// gate at its operands. Capped at [`UNITARY_QUBIT_CAP`] qubits.
    pub fn unitary(&self) -> Result<Matrix, CircuitError> {
        if self.has_measurements() {
            return Err(CircuitError::UnitaryWithMeasurements);
        }
        if self.num_qubits > UNITARY_QUBIT_CAP {
            return Err(CircuitError::UnitaryTooLarge { cap: UNITARY_QUBIT_CAP, num_qubits: self.num_qubits });
        }
        self.validate()?;
        let dim = 1usize << self.num_qubits;
        let mut u = Matrix::identity(dim);
        for g in self.gates() {
            let full = linalg::embed(self.num_qubits, &g.matrix()?, &g.qubits);
            u = full.mul(&u);
        }
        Ok(u)
    }

    /// Apply the circuit to `|0...0>` and return the state vector.
    /// Shares the cap and preconditions of [`Circuit::unitary`].
    pub fn statevector(&self) -> Result<Vec<Complex64>, CircuitError> {
        if self.has_measurements() {
            return Err(CircuitError::UnitaryWithMeasurements);
        }
        if self.num_qubits > UNITARY_QUBIT_CAP {
            return Err(CircuitError::UnitaryTooLarge { cap: UNITARY_QUBIT_CAP, num_qubits: self.num_qubits });
        }
        self.validate()?;
        let dim = 1usize << self.num_qubits;
        let mut state = vec![ZERO; dim];
        state[0] = ONE;
        for g in self.gates() {
            state = apply_gate_to_state(&state, &g.matrix()?, &g.qubits);
        }
        Ok(state)
    }
}

/// Qubit count above which dense `2^n x 2^n` unitaries are refused.
pub const UNITARY_QUBIT_CAP: usize = 10;

/// Apply a 1- or 2-qubit gate matrix to a dense state vector.
pub fn apply_gate_to_state(state: &[Complex64], gate: &Matrix, qubits: &[usize]) -> Vec<Complex64> {
    let dim = state.len();
    let mut out = state.to_vec();
    match qubits {
        [q] => {
            let mask = 1usize << q;
            for idx in 0..dim {
                if idx & mask == 0 {
                    let (a, b) = (state[idx], state[idx | mask]);
                    out[idx] = gate[(0, 0)] * a + gate[(0, 1)] * b;
                    out[idx | mask] = gate[(1, 0)] * a + gate[(1, 1)] * b;
                }
            }
        }
        [a, b] => {
            let (ma, mb) = (1usize << a, 1usize << b);
            for idx in 0..dim {
                if idx & ma == 0 && idx & mb == 0 {
                    let mut local = [ZERO; 4];
                    for (k, v) in local.iter_mut().enumerate() {
                        *v = state[idx | ((k & 1) * ma) | (((k >> 1) & 1) * mb)];
                    }
                    for r in 0..4 {
                        let mut acc = ZERO;
                        for (c, v) in local.iter().enumerate() {
                            acc += gate[(r, c)] * v;
                        }
                        out[idx | ((r & 1) * ma) | (((r >> 1) & 1) * mb)] = acc;
                    }
                }
            }
        }
        _ => panic!("gates act on 1 or 2 qubits"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn all_gate_matrices_are_unitary() {
        let angles = [0.0, 0.3, PI / 2.0, PI, -1.7, 2.0 * PI, 5.1];
        for &kind in GateKind::all() {
            for &a in &angles {
                for &b in &angles[..3] {
                    let params: Vec<f64> = match kind.param_count() {
                        0 => vec![],
                        1 => vec![a],
                        2 => vec![a, b],
                        3 => vec![a, b, 0.7],
                        _ => unreachable!(),
                    };
                    let m = gate_matrix(kind, &params).unwrap();
                    assert!(m.is_unitary(1e-12), "{kind} not unitary at {params:?}");
                    if params.is_empty() {
                        break;
                    }
                }
                if kind.param_count() == 0 {
                    break;
                }
            }
        }
    }

    #[test]
    fn prx_pi_zero_is_x_up_to_phase() {
        let m = gate_matrix(GateKind::Prx, &[PI, 0.0]).unwrap();
        assert!(m.eq_up_to_global_phase(&linalg::pauli_x(), 1e-12));
        // Exactly -iX, not just phase-equivalent.
        assert!((m[(0, 1)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn prx_phase_pi_half_is_y_up_to_phase() {
        let m = gate_matrix(GateKind::Prx, &[PI, PI / 2.0]).unwrap();
        assert!(m.eq_up_to_global_phase(&linalg::pauli_y(), 1e-12));
    }

    #[test]
    fn u_family_matches_openqasm_definitions() {
        // u2(0, pi) = H
        let u2 = gate_matrix(GateKind::U2, &[0.0, PI]).unwrap();
        let h = gate_matrix(GateKind::H, &[]).unwrap();
        assert!(u2.max_abs_diff(&h) < 1e-12);
        // u1(pi) = Z
        let u1 = gate_matrix(GateKind::U1, &[PI]).unwrap();
        assert!(u1.max_abs_diff(&linalg::pauli_z()) < 1e-12);
        // u3(pi, 0, pi) = X
        let u3 = gate_matrix(GateKind::U3, &[PI, 0.0, PI]).unwrap();
        assert!(u3.max_abs_diff(&linalg::pauli_x()) < 1e-12);
    }

    #[test]
    fn param_count_is_enforced() {
        assert!(matches!(
            gate_matrix(GateKind::Prx, &[1.0]),
            Err(CircuitError::BadParamCount { .. })
        ));
        assert!(matches!(
            gate_matrix(GateKind::H, &[1.0]),
            Err(CircuitError::BadParamCount { .. })
        ));
    }

    #[test]
    fn stats_bell_pair() {
        let mut c = Circuit::new(2, 2);
        c.push(Gate::h(0));
        c.push(Gate::cnot(0, 1));
        c.measure_all();
        let s = c.stats();
        assert_eq!(s.qubits, 2);
        assert_eq!(s.depth, 2);
        assert_eq!(s.one_qubit_gates, 1);
        assert_eq!(s.two_qubit_gates, 1);
        assert_eq!(s.gate_counts["h"], 1);
        assert_eq!(s.gate_counts["cx"], 1);
    }

    #[test]
    fn depth_ignores_disjoint_parallel_gates() {
        let mut c = Circuit::new(3, 0);
        c.push(Gate::h(0));
        c.push(Gate::h(0));
        let base = c.stats().depth;
        // A gate on an untouched qubit keeps the depth.
        c.push(Gate::x(2));
        assert_eq!(c.stats().depth, base);
    }

    #[test]
    fn barrier_fences_layers() {
        let mut a = Circuit::new(2, 0);
        a.push(Gate::h(0));
        a.push(Gate::h(1));
        assert_eq!(a.stats().depth, 1);

        let mut b = Circuit::new(2, 0);
        b.push(Gate::h(0));
        b.barrier(vec![0, 1]);
        b.push(Gate::h(1));
        // The barrier pushes the second gate behind the first.
        assert_eq!(b.stats().depth, 2);
    }

    #[test]
    fn validate_rejects_gate_after_measure() {
        let mut c = Circuit::new(1, 1);
        c.measure(0, 0);
        c.push(Gate::x(0));
        assert!(matches!(c.validate(), Err(CircuitError::GateAfterMeasure { qubit: 0 })));
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let mut c = Circuit::new(1, 1);
        c.push(Gate::h(3));
        assert!(matches!(c.validate(), Err(CircuitError::QubitOutOfRange { qubit: 3, .. })));
    }

    #[test]
    fn unitary_of_bell_preparation() {
        let mut c = Circuit::new(2, 0);
        c.push(Gate::h(0));
        c.push(Gate::cnot(0, 1));
        let u = c.unitary().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // First column: (|00> + |11>)/sqrt(2).
        assert!((u[(0, 0)].re - s).abs() < 1e-12);
        assert!((u[(3, 0)].re - s).abs() < 1e-12);
        assert!(u[(1, 0)].norm() < 1e-12);
        assert!(u[(2, 0)].norm() < 1e-12);
    }

    #[test]
    fn unitary_refuses_measurements() {
        let mut c = Circuit::new(1, 1);
        c.measure(0, 0);
        assert!(matches!(c.unitary(), Err(CircuitError::UnitaryWithMeasurements)));
    }

    #[test]
    fn statevector_matches_unitary_column() {
        let mut c = Circuit::new(3, 0);
        c.push(Gate::h(0));
        c.push(Gate::cnot(0, 1));
        c.push(Gate::prx(2, 1.1, 0.4));
        c.push(Gate::cz(1, 2));
        let sv = c.statevector().unwrap();
        let u = c.unitary().unwrap();
        for (i, amp) in sv.iter().enumerate() {
            assert!((amp - u[(i, 0)]).norm() < 1e-12);
        }
    }
}
