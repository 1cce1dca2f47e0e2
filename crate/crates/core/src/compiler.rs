//! Mapping circuits onto a device: SWAP routing against a coupling graph,
//! decomposition into a native gateset, and a small peephole cleanup.
//!
//! Routing is greedy: while a two-qubit gate spans non-adjacent qubits, swap
//! one endpoint along a shortest path (BFS distances), preferring the
//! lowest-numbered pair on ties, so results are deterministic. Inserted
//! SWAPs are left symbolic; decomposition expands them afterwards.
//!
//! Every rewrite preserves the circuit unitary up to global phase and up to
//! the tracked wire permutation; `routing_is_equivalent` checks this with
//! dense matrices for small widths.

use crate::circuit::{Circuit, CircuitError, Gate, GateKind, Instruction};
use crate::linalg::Matrix;
use crate::topology::Topology;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("circuit needs {needed} qubits but the topology has {available}")]
    TooManyQubits { needed: usize, available: usize },
    #[error("topology `{0}` is not connected; routing requires one component")]
    DisconnectedTopology(String),
    #[error("circuit error during compilation: {0}")]
    Circuit(#[from] CircuitError),
    #[error("gate {0} is not native to {1} and has no decomposition rule")]
    NoRule(String, String),
}

/// Hardware gate vocabularies that circuits are lowered into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NativeGateset {
    /// Phased X rotations plus CZ.
    IqmPrxCz,
    /// U1/U2/U3 rotations plus CNOT.
    IbmqUCnot,
}

impl NativeGateset {
    pub fn name(self) -> &'static str {
        match self {
            NativeGateset::IqmPrxCz => "iqm-prx-cz",
            NativeGateset::IbmqUCnot => "ibmq-u-cnot",
        }
    }

    pub fn is_native(self, kind: GateKind) -> bool {
        match self {
            NativeGateset::IqmPrxCz => matches!(kind, GateKind::Prx | GateKind::Cz),
            NativeGateset::IbmqUCnot => {
                matches!(kind, GateKind::U1 | GateKind::U2 | GateKind::U3 | GateKind::Cnot)
            }
        }
    }
}

/// Wrap an angle into `(-pi, pi]`.
fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta % two_pi;
    if t <= -PI {
        t += two_pi;
    } else if t > PI {
        t -= two_pi;
    }
    t
}

/// `rz(theta)` as two phased X rotations (up to global phase):
/// `prx(pi, 0)` then `prx(pi, theta/2)`.
fn rz_as_prx(q: usize, theta: f64) -> Vec<Gate> {
    vec![Gate::prx(q, PI, 0.0), Gate::prx(q, PI, theta / 2.0)]
}

/// `rz(alpha) . ry(beta) . rz(gamma)` (matrix order) lowered to
/// `prx(beta, pi/2 + alpha)` preceded in circuit order by `rz(alpha+gamma)`.
fn zyz_as_prx(q: usize, alpha: f64, beta: f64, gamma: f64) -> Vec<Gate> {
    let mut out = rz_as_prx(q, alpha + gamma);
    out.push(Gate::prx(q, beta, PI / 2.0 + alpha));
    out
}

fn hadamard_as_prx(q: usize) -> Vec<Gate> {
    vec![Gate::prx(q, PI / 2.0, PI / 2.0), Gate::prx(q, PI, 0.0)]
}

fn cnot_as_cz(control: usize, target: usize) -> Vec<Gate> {
    let mut out = hadamard_as_prx(target);
    out.push(Gate::cz(control, target));
    out.extend(hadamard_as_prx(target));
    out
}

fn swap_as_cnots(a: usize, b: usize) -> [Gate; 3] {
    [Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]
}

/// One gate into the target gateset. Native gates pass through untouched.
pub fn decompose_gate(gate: &Gate, gateset: NativeGateset) -> Result<Vec<Gate>, CompileError> {
    if gateset.is_native(gate.kind) {
        return Ok(vec![gate.clone()]);
    }
    let q = gate.qubits[0];
    let out = match gateset {
        NativeGateset::IqmPrxCz => match gate.kind {
            GateKind::H => hadamard_as_prx(q),
            GateKind::X => vec![Gate::prx(q, PI, 0.0)],
            GateKind::Y => vec![Gate::prx(q, PI, PI / 2.0)],
            GateKind::Z => rz_as_prx(q, PI),
            GateKind::Rz | GateKind::U1 => rz_as_prx(q, gate.params[0]),
            // u2(phi, lam) = rz(phi) ry(pi/2) rz(lam) up to phase
            GateKind::U2 => zyz_as_prx(q, gate.params[0], PI / 2.0, gate.params[1]),
            GateKind::U3 => zyz_as_prx(q, gate.params[1], gate.params[0], gate.params[2]),
            GateKind::Cnot => cnot_as_cz(gate.qubits[0], gate.qubits[1]),
            GateKind::Swap => {
                let mut out = Vec::with_capacity(15);
                for c in swap_as_cnots(gate.qubits[0], gate.qubits[1]) {
                    out.extend(cnot_as_cz(c.qubits[0], c.qubits[1]));
                }
                out
            }
            _ => return Err(CompileError::NoRule(gate.kind.name().into(), gateset.name().into())),
        },
        NativeGateset::IbmqUCnot => match gate.kind {
            GateKind::H => vec![Gate::u2(q, 0.0, PI)],
            GateKind::X => vec![Gate::u3(q, PI, 0.0, PI)],
            GateKind::Y => vec![Gate::u3(q, PI, PI / 2.0, PI / 2.0)],
            GateKind::Z => vec![Gate::u1(q, PI)],
            GateKind::Rz => vec![Gate::u1(q, gate.params[0])],
            // prx(theta, phi) = rz(phi - pi/2) ry(theta) rz(pi/2 - phi)
            GateKind::Prx => vec![Gate::u3(q, gate.params[0], gate.params[1] - PI / 2.0, PI / 2.0 - gate.params[1])],
            GateKind::Cz => {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                vec![Gate::u2(b, 0.0, PI), Gate::cnot(a, b), Gate::u2(b, 0.0, PI)]
            }
            GateKind::Swap => swap_as_cnots(gate.qubits[0], gate.qubits[1]).to_vec(),
            _ => return Err(CompileError::NoRule(gate.kind.name().into(), gateset.name().into())),
        },
    };
    Ok(out)
}

/// Rewrite every gate into the target gateset; barriers and measurements
/// pass through in place.
pub fn decompose(circuit: &Circuit, gateset: NativeGateset) -> Result<Circuit, CompileError> {
    let mut out = Circuit::new(circuit.num_qubits, circuit.num_clbits);
    for inst in &circuit.instructions {
        match inst {
            Instruction::Gate(g) => {
                for gate in decompose_gate(g, gateset)? {
                    out.push(gate);
                }
            }
            Instruction::Barrier(qs) => out.barrier(qs.clone()),
            Instruction::Measure { qubit, cbit } => out.measure(*qubit, *cbit),
        }
    }
    Ok(out)
}

/// Merge adjacent rotations on the same qubit and drop the ones that become
/// the identity: PRX pairs sharing an axis angle add their rotation angles;
/// adjacent U1/RZ pairs add their phases. "Adjacent" means nothing else has
/// touched that qubit in between, so the merge never commutes gates past
/// each other.
pub fn peephole(circuit: &Circuit) -> Circuit {
    #[derive(Clone, Copy)]
    struct Pending {
        position: usize,
    }
    let mut out: Vec<Option<Instruction>> = Vec::with_capacity(circuit.instructions.len());
    let mut pending: Vec<Option<Pending>> = vec![None; circuit.num_qubits];

    let merged = |prev: &Gate, next: &Gate| -> Option<Option<Gate>> {
        // Some(None) means the pair cancels entirely.
        match (prev.kind, next.kind) {
            (GateKind::Prx, GateKind::Prx) => {
                let dphi = wrap_angle(prev.params[1] - next.params[1]);
                if dphi.abs() > ANGLE_TOL {
                    return None;
                }
                let theta = wrap_angle(prev.params[0] + next.params[0]);
                if theta.abs() < ANGLE_TOL {
                    Some(None)
                } else {
                    Some(Some(Gate::prx(prev.qubits[0], theta, prev.params[1])))
                }
            }
            (GateKind::U1, GateKind::U1) | (GateKind::Rz, GateKind::Rz) => {
                let theta = wrap_angle(prev.params[0] + next.params[0]);
                if theta.abs() < ANGLE_TOL {
                    Some(None)
                } else {
                    Some(Some(Gate::new(prev.kind, prev.qubits.clone(), vec![theta])))
                }
            }
            _ => None,
        }
    };

    for inst in &circuit.instructions {
        match inst {
            Instruction::Gate(g) if g.qubits.len() == 1 => {
                let q = g.qubits[0];
                if let Some(p) = pending[q] {
                    let prev = match &out[p.position] {
                        Some(Instruction::Gate(prev)) => prev,
                        _ => unreachable!("pending slot always holds a gate"),
                    };
                    if let Some(replacement) = merged(prev, g) {
                        match replacement {
                            Some(gate) => out[p.position] = Some(Instruction::Gate(gate)),
                            None => {
                                out[p.position] = None;
                                pending[q] = None;
                            }
                        }
                        continue;
                    }
                }
                pending[q] = Some(Pending { position: out.len() });
                out.push(Some(inst.clone()));
            }
            Instruction::Gate(g) => {
                for &q in &g.qubits {
                    pending[q] = None;
                }
                out.push(Some(inst.clone()));
            }
            Instruction::Barrier(qs) => {
                if qs.is_empty() {
                    pending.iter_mut().for_each(|p| *p = None);
                } else {
                    for &q in qs {
                        pending[q] = None;
                    }
                }
                out.push(Some(inst.clone()));
            }
            Instruction::Measure { qubit, .. } => {
                pending[*qubit] = None;
                out.push(Some(inst.clone()));
            }
        }
    }

    let mut result = Circuit::new(circuit.num_qubits, circuit.num_clbits);
    for inst in out.into_iter().flatten() {
        match inst {
            Instruction::Gate(g) => result.push(g),
            Instruction::Barrier(qs) => result.barrier(qs),
            Instruction::Measure { qubit, cbit } => {
                result.measure(qubit, cbit)
            }
        }
    }
    result
}

/// Routing outcome: the physical-width circuit with explicit SWAPs, plus the
/// bookkeeping needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    /// Logical qubit -> physical wire before any gate.
    pub initial_layout: Vec<usize>,
    /// Logical qubit -> physical wire after the last gate.
    pub final_layout: Vec<usize>,
    /// `wire_permutation[p]` is where the state initially on wire `p` ends
    /// up after all inserted SWAPs.
    pub wire_permutation: Vec<usize>,
    pub inserted_swaps: usize,
}

pub fn route(circuit: &Circuit, topology: &Topology) -> Result<Routed, CompileError> {
    let m = topology.num_qubits;
    if circuit.num_qubits > m {
        return Err(CompileError::TooManyQubits { needed: circuit.num_qubits, available: m });
    }
    if !topology.is_connected() {
        return Err(CompileError::DisconnectedTopology(topology.name.clone()));
    }
    let dist = topology.distances();

    let mut l2p: Vec<usize> = (0..circuit.num_qubits).collect();
    let mut perm: Vec<usize> = (0..m).collect();
    let initial_layout = l2p.clone();
    let mut out = Circuit::new(m, circuit.num_clbits);
    let mut measures: Vec<(usize, usize)> = Vec::new();
    let mut inserted = 0usize;

    fn apply_swap(out: &mut Circuit, l2p: &mut [usize], perm: &mut [usize], x: usize, y: usize) {
        out.push(Gate::swap(x, y));
        for v in l2p.iter_mut().chain(perm.iter_mut()) {
            if *v == x {
                *v = y;
            } else if *v == y {
                *v = x;
            }
        }
    }

    for inst in &circuit.instructions {
        match inst {
            Instruction::Gate(g) => match g.qubits.as_slice() {
                [q] => {
                    out.push(Gate::new(g.kind, vec![l2p[*q]], g.params.clone()));
                }
                [a, b] => {
                    loop {
                        let (pa, pb) = (l2p[*a], l2p[*b]);
                        if topology.has_edge(pa, pb) {
                            break;
                        }
                        // Swap one endpoint one step along a shortest path.
                        let mut best: Option<((usize, usize), usize)> = None;
                        let mut consider = |x: usize, y: usize, new_dist: usize| {
                            let pair = (x.min(y), x.max(y));
                            let better = match best {
                                None => true,
                                Some((bp, bd)) => (new_dist, pair) < (bd, bp),
                            };
                            if better {
                                best = Some((pair, new_dist));
                            }
                        };
                        for u in topology.neighbors(pa) {
                            consider(pa, u, dist[u][pb]);
                        }
                        for v in topology.neighbors(pb) {
                            consider(pb, v, dist[pa][v]);
                        }
                        let ((x, y), _) = best.expect("connected graph always offers a swap");
                        apply_swap(&mut out, &mut l2p, &mut perm, x, y);
                        inserted += 1;
                    }
                    let (pa, pb) = (l2p[*a], l2p[*b]);
                    out.push(Gate::new(g.kind, vec![pa, pb], g.params.clone()));
                }
                _ => unreachable!("gates are one- or two-qubit"),
            },
            Instruction::Barrier(qs) => {
                let mapped: Vec<usize> = if qs.is_empty() {
                    (0..circuit.num_qubits).map(|q| l2p[q]).collect()
                } else {
                    qs.iter().map(|&q| l2p[q]).collect()
                };
                out.barrier(mapped);
            }
            // Readout is terminal, so measurements are re-emitted at the end
            // against the final layout; later SWAPs may still move the wire.
            Instruction::Measure { qubit, cbit } => measures.push((*qubit, *cbit)),
        }
    }

    for (q, c) in measures {
        out.measure(l2p[q], c);
    }

    Ok(Routed {
        circuit: out,
        initial_layout,
        final_layout: l2p,
        wire_permutation: perm,
        inserted_swaps: inserted,
    })
}

/// Permutation unitary sending the state on wire `i` to wire `perm[i]`.
pub fn wire_permutation_matrix(perm: &[usize]) -> Matrix {
    let n = perm.len();
    let dim = 1usize << n;
    let mut w = Matrix::zeros(dim);
    for x in 0..dim {
        let mut y = 0usize;
        for (i, &target) in perm.iter().enumerate() {
            if x >> i & 1 == 1 {
                y |= 1 << target;
            }
        }
        w[(y, x)] = crate::linalg::ONE;
    }
    w
}

/// Dense check that routing preserved the circuit: the routed unitary must
/// equal (wire permutation) x (logical unitary padded with identity), up to
/// global phase. Only feasible for small widths.
pub fn routing_is_equivalent(logical: &Circuit, routed: &Routed, tol: f64) -> Result<bool, CircuitError> {
    let m = routed.circuit.num_qubits;
    let gates_only = |c: &Circuit, width: usize| {
        let mut out = Circuit::new(width, 0);
        for g in c.gates() {
            out.push(g.clone());
        }
        out
    };
    let a = gates_only(&routed.circuit, m).unitary()?;
    let b = wire_permutation_matrix(&routed.wire_permutation).mul(&gates_only(logical, m).unitary()?);
    Ok(a.eq_up_to_global_phase(&b, tol))
}

/// Check that every two-qubit gate sits on a coupled pair.
pub fn respects_topology(circuit: &Circuit, topology: &Topology) -> bool {
    circuit
        .gates()
        .filter(|g| g.qubits.len() == 2)
        .all(|g| topology.has_edge(g.qubits[0], g.qubits[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub circuit: Circuit,
    pub gateset: NativeGateset,
    pub topology_name: String,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
    pub wire_permutation: Vec<usize>,
    pub inserted_swaps: usize,
}

/// Full pipeline: route onto the topology, lower to the native gateset, and
/// clean up with the peephole pass.
pub fn compile(circuit: &Circuit, topology: &Topology, gateset: NativeGateset) -> Result<Compiled, CompileError> {
    let routed = route(circuit, topology)?;
    let lowered = decompose(&routed.circuit, gateset)?;
    let cleaned = peephole(&lowered);
    Ok(Compiled {
        circuit: cleaned,
        gateset,
        topology_name: topology.name.clone(),
        initial_layout: routed.initial_layout,
        final_layout: routed.final_layout,
        wire_permutation: routed.wire_permutation,
        inserted_swaps: routed.inserted_swaps,
    })
}
