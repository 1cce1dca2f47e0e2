//! Independent reference implementations backing the acceptance tests.
//!
//! Everything is rebuilt from raw complex arithmetic: a private matrix type,
//! subsystem embedding, gate matrices derived from rotation definitions,
//! channel Kraus sets derived from calibration figures, an ASAP timeline,
//! and two cross-checked channel-application routes (global Kraus sums and
//! global superoperators on the full Hilbert space). The library is used
//! only as a source of plain data: circuits, calibration values, gate names.

use num_complex::Complex64 as Cx;
use qpu_twin::calibration::CalibrationData;
use qpu_twin::circuit::{Circuit, Gate, GateKind, Instruction};
use std::collections::BTreeMap;
use std::ops::{Index, IndexMut};

fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

fn real(x: f64) -> Cx {
    Cx::new(x, 0.0)
}

#[derive(Clone, Debug)]
pub struct Mat {
    pub dim: usize,
    a: Vec<Cx>,
}

impl Index<(usize, usize)> for Mat {
    type Output = Cx;
    fn index(&self, (r, c): (usize, usize)) -> &Cx {
        &self.a[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cx {
        &mut self.a[r * self.dim + c]
    }
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Mat { dim, a: vec![Cx::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = real(1.0);
        }
        m
    }

    pub fn from_rows(dim: usize, rows: &[Cx]) -> Self {
        assert_eq!(rows.len(), dim * dim);
        Mat { dim, a: rows.to_vec() }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Mat::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let x = self[(r, k)];
                if x == Cx::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    out[(r, c)] += x * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(&other.a) {
            *x += y;
        }
        out
    }

    pub fn scale(&self, s: Cx) -> Mat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn dagger(&self) -> Mat {
        let d = self.dim;
        let mut out = Mat::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = self[(c, r)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Mat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x = x.conj();
        }
        out
    }

    /// `self (x) other`; `other` occupies the low index bits.
    pub fn kron(&self, other: &Mat) -> Mat {
        let (da, db) = (self.dim, other.dim);
        let mut out = Mat::zeros(da * db);
        for ra in 0..da {
            for ca in 0..da {
                let x = self[(ra, ca)];
                for rb in 0..db {
                    for cb in 0..db {
                        out[(ra * db + rb, ca * db + cb)] = x * other[(rb, cb)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Cx {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// a == e^{i phi} b for some phase, to elementwise tolerance `tol`.
pub fn eq_up_to_phase(a: &Mat, b: &Mat, tol: f64) -> bool {
    if a.dim != b.dim {
        return false;
    }
    // Anchor the phase on the largest entry of b.
    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0;
    for r in 0..b.dim {
        for c in 0..b.dim {
            if b[(r, c)].norm() > best_norm {
                best_norm = b[(r, c)].norm();
                best = (r, c);
            }
        }
    }
    if best_norm < tol {
        return a.max_abs_diff(&Mat::zeros(a.dim)) < tol;
    }
    if a[best].norm() < tol {
        return false;
    }
    let phase = b[best] / a[best];
    a.scale(phase).max_abs_diff(b) < tol
}

// ---------------------------------------------------------------------------
// Gate matrices, built from rotation generators rather than closed forms.
// ---------------------------------------------------------------------------

fn pauli(which: char) -> Mat {
    let z = cx(0.0, 0.0);
    match which {
        'i' => Mat::identity(2),
        'x' => Mat::from_rows(2, &[z, real(1.0), real(1.0), z]),
        'y' => Mat::from_rows(2, &[z, cx(0.0, -1.0), cx(0.0, 1.0), z]),
        'z' => Mat::from_rows(2, &[real(1.0), z, z, real(-1.0)]),
        _ => unreachable!(),
    }
}

fn rot_z(theta: f64) -> Mat {
    let z = cx(0.0, 0.0);
    Mat::from_rows(2, &[Cx::from_polar(1.0, -theta / 2.0), z, z, Cx::from_polar(1.0, theta / 2.0)])
}

fn rot_x(theta: f64) -> Mat {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Mat::from_rows(2, &[real(c), cx(0.0, -s), cx(0.0, -s), real(c)])
}

/// Matrix of one library gate, independently assembled. Two-qubit matrices
/// use the first listed qubit as the low local bit, matching the engine's
/// operand convention.
pub fn oracle_gate_matrix(g: &Gate) -> Mat {
    let p = &g.params;
    match g.kind {
        GateKind::X => pauli('x'),
        GateKind::Y => pauli('y'),
        GateKind::Z => pauli('z'),
        // H = (X + Z) / sqrt 2
        GateKind::H => pauli('x').add(&pauli('z')).scale(real(1.0 / 2.0f64.sqrt())),
        GateKind::Rz => rot_z(p[0]),
        // u1(l) shifts only the |1> phase
        GateKind::U1 => {
            let z = cx(0.0, 0.0);
            Mat::from_rows(2, &[real(1.0), z, z, Cx::from_polar(1.0, p[0])])
        }
        // u3(t, phi, l) = e^{i(phi+l)/2} Rz(phi) Ry(t) Rz(l), assembled from
        // rotation products to stay off the library's closed form.
        GateKind::U2 => u3_matrix(std::f64::consts::FRAC_PI_2, p[0], p[1]),
        GateKind::U3 => u3_matrix(p[0], p[1], p[2]),
        // PRX(t, phi) rotates about the equatorial axis at angle phi:
        // Rz(phi) Rx(t) Rz(-phi).
        GateKind::Prx => rot_z(p[1]).mul(&rot_x(p[0])).mul(&rot_z(-p[1])),
        GateKind::Cz => {
            let mut m = Mat::identity(4);
            m[(3, 3)] = real(-1.0);
            m
        }
        GateKind::Cnot => {
            // control is local bit 0: flip bit 1 when bit 0 is set.
            let mut m = Mat::zeros(4);
            m[(0, 0)] = real(1.0);
            m[(2, 2)] = real(1.0);
            m[(3, 1)] = real(1.0);
            m[(1, 3)] = real(1.0);
            m
        }
        GateKind::Swap => {
            let mut m = Mat::zeros(4);
            m[(0, 0)] = real(1.0);
            m[(1, 2)] = real(1.0);
            m[(2, 1)] = real(1.0);
            m[(3, 3)] = real(1.0);
            m
        }
    }
}

fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat {
    // Ry(t) = Rz(pi/2) Rx(t) Rz(-pi/2)
    let half_pi = std::f64::consts::FRAC_PI_2;
    let ry = rot_z(half_pi).mul(&rot_x(theta)).mul(&rot_z(-half_pi));
    let u = rot_z(phi).mul(&ry).mul(&rot_z(lambda));
    u.scale(Cx::from_polar(1.0, (phi + lambda) / 2.0))
}

/// Embed a 1- or 2-qubit operator on the full `n`-qubit space; local bit `j`
/// rides on global qubit `qubits[j]`, qubit 0 being the least significant.
pub fn embed(n: usize, op: &Mat, qubits: &[usize]) -> Mat {
    assert_eq!(op.dim, 1 << qubits.len());
    let dim = 1usize << n;
    let mut mask = 0usize;
    for &q in qubits {
        mask |= 1 << q;
    }
    let local = |x: usize| -> usize {
        let mut l = 0;
        for (j, &q) in qubits.iter().enumerate() {
            if x >> q & 1 == 1 {
                l |= 1 << j;
            }
        }
        l
    };
    let mut out = Mat::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !mask != c & !mask {
                continue;
            }
            out[(r, c)] = op[(local(r), local(c))];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Channel Kraus sets from calibration figures.
// ---------------------------------------------------------------------------

pub fn kraus_relaxation(p: f64) -> Vec<Mat> {
    let z = cx(0.0, 0.0);
    vec![
        Mat::from_rows(2, &[real(1.0), z, z, real((1.0 - p).sqrt())]),
        Mat::from_rows(2, &[z, real(p.sqrt()), z, z]),
    ]
}

pub fn kraus_dephasing(p: f64) -> Vec<Mat> {
    vec![
        Mat::identity(2).scale(real((1.0 - p).sqrt())),
        pauli('z').scale(real(p.sqrt())),
    ]
}

/// Uniform Pauli error with total probability `p` on `width` qubits.
pub fn kraus_depolarizing(p: f64, width: usize) -> Vec<Mat> {
    let singles = ['i', 'x', 'y', 'z'];
    match width {
        1 => {
            let mut ops = vec![Mat::identity(2).scale(real((1.0 - p).sqrt()))];
            let w = real((p / 3.0).sqrt());
            for ch in ['x', 'y', 'z'] {
                ops.push(pauli(ch).scale(w));
            }
            ops
        }
        2 => {
            let mut ops = vec![Mat::identity(4).scale(real((1.0 - p).sqrt()))];
            let w = real((p / 15.0).sqrt());
            for (i, &hi) in singles.iter().enumerate() {
                for (j, &lo) in singles.iter().enumerate() {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    ops.push(pauli(hi).kron(&pauli(lo)).scale(w));
                }
            }
            ops
        }
        _ => unreachable!(),
    }
}

/// `then` after `first`: Kraus products b * a over both sets.
pub fn compose(first: &[Mat], then: &[Mat]) -> Vec<Mat> {
    let mut out = Vec::with_capacity(first.len() * then.len());
    for b in then {
        for a in first {
            out.push(b.mul(a));
        }
    }
    out
}

/// Depolarizing probability for average gate fidelity `f` in dimension `d`.
pub fn pdep(fidelity: f64, dim: usize) -> f64 {
    let d = dim as f64;
    (1.0 - fidelity) * (d + 1.0) / d
}

fn decay(t_ns: u64, tau_us: f64) -> f64 {
    1.0 - (-(t_ns as f64 * 1e-3) / tau_us).exp()
}

/// Idle channel over `t_ns`: relaxation against T1, then dephasing against
/// the printed T2 (or the extracted pure-dephasing constant).
pub fn idle_kraus(t_ns: u64, t1_us: f64, t2_us: f64, pure_phi: bool) -> Vec<Mat> {
    let tau_phi = if pure_phi {
        1.0 / (1.0 / t2_us - 1.0 / (2.0 * t1_us))
    } else {
        t2_us
    };
    compose(&kraus_relaxation(decay(t_ns, t1_us)), &kraus_dephasing(decay(t_ns, tau_phi)))
}

/// Average gate fidelity of a channel against the identity target, computed
/// by process tomography: feed every |i><j| basis matrix through the Kraus
/// sum, assemble the entanglement fidelity, and convert.
pub fn average_fidelity_choi(kraus: &[Mat]) -> f64 {
    let d = kraus[0].dim;
    let mut fe = cx(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            let mut basis = Mat::zeros(d);
            basis[(i, j)] = real(1.0);
            let mut out = Mat::zeros(d);
            for k in kraus {
                out = out.add(&k.mul(&basis).mul(&k.dagger()));
            }
            fe += out[(i, j)];
        }
    }
    let fe = fe.re / (d * d) as f64;
    (d as f64 * fe + 1.0) / (d as f64 + 1.0)
}

// ---------------------------------------------------------------------------
// Full-space oracle simulator.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Paper,
    Unm,
    Noiseless,
}

#[derive(Clone, Copy)]
pub struct OracleOpts {
    pub mode: OracleMode,
    pub trailing_idle: bool,
    /// Use the pure-dephasing constant instead of the printed T2.
    pub pure_phi: bool,
}

struct TimedGate {
    gate: Gate,
    start: u64,
    end: u64,
}

/// A channel plus the global qubits its Kraus operators act on.
struct LocalChannel {
    kraus: Vec<Mat>,
    qubits: Vec<usize>,
}

fn gate_channel(gate: &Gate, cal: &CalibrationData) -> LocalChannel {
    let u = oracle_gate_matrix(gate);
    let kraus = match gate.qubits.as_slice() {
        [q] => {
            let f = cal.qubit(*q).unwrap().fidelity_1q;
            compose(&[u], &kraus_depolarizing(pdep(f, 2), 1))
        }
        [a, b] => {
            let f = cal.pair(*a, *b).unwrap().fidelity_2q;
            compose(&[u], &kraus_depolarizing(pdep(f, 4), 2))
        }
        _ => unreachable!(),
    };
    LocalChannel { kraus, qubits: gate.qubits.clone() }
}

fn idle_channel_on(q: usize, t_ns: u64, cal: &CalibrationData, pure_phi: bool) -> LocalChannel {
    let qc = cal.qubit(q).unwrap();
    LocalChannel {
        kraus: idle_kraus(t_ns, qc.t1_us, qc.t2_us, pure_phi),
        qubits: vec![q],
    }
}

/// ASAP timeline: same frontier rules as the scheduler (barriers fence,
/// measures cost nothing), re-derived here.
fn asap_events(circuit: &Circuit, cal: &CalibrationData) -> (Vec<TimedGate>, Vec<u64>, u64) {
    let n = circuit.num_qubits;
    let mut frontier = vec![0u64; n];
    let mut events = Vec::new();
    for inst in &circuit.instructions {
        match inst {
            Instruction::Gate(g) => {
                let dur = match g.qubits.as_slice() {
                    [q] => cal.qubit(*q).unwrap().gate_time_1q_ns,
                    [a, b] => cal.pair(*a, *b).unwrap().gate_time_2q_ns,
                    _ => unreachable!(),
                };
                let start = g.qubits.iter().map(|&q| frontier[q]).max().unwrap();
                for &q in &g.qubits {
                    frontier[q] = start + dur;
                }
                events.push(TimedGate { gate: g.clone(), start, end: start + dur });
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
    let duration = frontier.iter().copied().max().unwrap_or(0);
    (events, frontier, duration)
}

fn channel_stream(circuit: &Circuit, cal: &CalibrationData, opts: &OracleOpts) -> Vec<LocalChannel> {
    if opts.mode == OracleMode::Noiseless {
        return circuit
            .gates()
            .map(|g| LocalChannel { kraus: vec![oracle_gate_matrix(g)], qubits: g.qubits.clone() })
            .collect();
    }

    let (events, _, duration) = asap_events(circuit, cal);
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| events[i].start);

    let mut touched = vec![false; circuit.num_qubits];
    for ev in &events {
        for &q in &ev.gate.qubits {
            touched[q] = true;
        }
    }

    match opts.mode {
        OracleMode::Paper => {
            // Gates first (chronological), then idle segments per qubit;
            // a stable sort by start time merges them.
            let mut timed: Vec<(u64, LocalChannel)> = order
                .iter()
                .map(|&i| (events[i].start, gate_channel(&events[i].gate, cal)))
                .collect();
            for q in 0..circuit.num_qubits {
                if !touched[q] {
                    continue;
                }
                let mut cursor = 0u64;
                let mut on_q: Vec<&TimedGate> =
                    events.iter().filter(|ev| ev.gate.qubits.contains(&q)).collect();
                on_q.sort_by_key(|ev| ev.start);
                for ev in on_q {
                    if ev.start > cursor {
                        timed.push((cursor, idle_channel_on(q, ev.start - cursor, cal, opts.pure_phi)));
                    }
                    cursor = ev.end;
                }
                if opts.trailing_idle && cursor < duration {
                    timed.push((cursor, idle_channel_on(q, duration - cursor, cal, opts.pure_phi)));
                }
            }
            timed.sort_by_key(|&(t, _)| t);
            timed.into_iter().map(|(_, ch)| ch).collect()
        }
        OracleMode::Unm => {
            let mut prev_end = vec![0u64; circuit.num_qubits];
            let mut out = Vec::new();
            for &i in &order {
                let ev = &events[i];
                for &q in &ev.gate.qubits {
                    let gap = ev.start - prev_end[q];
                    if gap > 0 {
                        out.push(idle_channel_on(q, gap, cal, opts.pure_phi));
                    }
                    prev_end[q] = ev.end;
                }
                out.push(gate_channel(&ev.gate, cal));
            }
            out
        }
        OracleMode::Noiseless => unreachable!(),
    }
}

/// Exact outcome distribution on the full `2^n` space, computed through two
/// independent routes per channel (global Kraus sum on the density matrix,
/// and a global superoperator on its row-major vectorization) which must
/// agree to 1e-12.
pub fn oracle_simulate(
    circuit: &Circuit,
    cal: &CalibrationData,
    opts: &OracleOpts,
) -> BTreeMap<String, f64> {
    let n = circuit.num_qubits;
    let dim = 1usize << n;
    let channels = channel_stream(circuit, cal, opts);

    // Route A: density matrix under global Kraus sums.
    let mut rho = Mat::zeros(dim);
    rho[(0, 0)] = real(1.0);
    // Route B: row-major vec(rho) under global superoperators.
    let mut vec_rho = vec![cx(0.0, 0.0); dim * dim];
    vec_rho[0] = real(1.0);

    for ch in &channels {
        let global: Vec<Mat> = ch.kraus.iter().map(|k| embed(n, k, &ch.qubits)).collect();

        let mut next = Mat::zeros(dim);
        for g in &global {
            next = next.add(&g.mul(&rho).mul(&g.dagger()));
        }
        rho = next;

        let mut superop = Mat::zeros(dim * dim);
        for g in &global {
            superop = superop.add(&g.kron(&g.conj()));
        }
        let mut next_vec = vec![cx(0.0, 0.0); dim * dim];
        for (r, out) in next_vec.iter_mut().enumerate() {
            for (c, x) in vec_rho.iter().enumerate() {
                *out += superop[(r, c)] * x;
            }
        }
        vec_rho = next_vec;
    }

    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            worst = worst.max((rho[(r, c)] - vec_rho[r * dim + c]).norm());
        }
    }
    assert!(worst < 1e-12, "oracle routes disagree by {worst:.3e}");

    // Readout: marginal over measured qubits in classical-bit order.
    let mut meas = circuit.measurements();
    meas.sort_by_key(|&(_, cbit)| cbit);
    let k = meas.len();
    let mut joint = vec![0.0f64; 1 << k];
    for i in 0..dim {
        let mut out = 0usize;
        for (j, &(q, _)) in meas.iter().enumerate() {
            if i >> q & 1 == 1 {
                out |= 1 << j;
            }
        }
        joint[out] += rho[(i, i)].re;
    }

    if opts.mode != OracleMode::Noiseless && k > 0 {
        let m: Vec<[[f64; 2]; 2]> = meas
            .iter()
            .map(|&(q, _)| {
                let qc = cal.qubit(q).unwrap();
                [[1.0 - qc.readout_error_0, qc.readout_error_1], [
                    qc.readout_error_0,
                    1.0 - qc.readout_error_1,
                ]]
            })
            .collect();
        let mut confused = vec![0.0f64; 1 << k];
        for (y, out) in confused.iter_mut().enumerate() {
            for (x, &p) in joint.iter().enumerate() {
                let mut w = 1.0;
                for (b, mat) in m.iter().enumerate() {
                    w *= mat[y >> b & 1][x >> b & 1];
                }
                *out += w * p;
            }
        }
        joint = confused;
    }

    let mut probs = BTreeMap::new();
    for (idx, &p) in joint.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let mut out = 0usize;
        for (j, &(_, cbit)) in meas.iter().enumerate() {
            if idx >> j & 1 == 1 {
                out |= 1 << cbit;
            }
        }
        probs.insert(bitstring(out, circuit.num_clbits), p);
    }
    probs
}

pub fn bitstring(value: usize, num_bits: usize) -> String {
    (0..num_bits).rev().map(|b| if value >> b & 1 == 1 { '1' } else { '0' }).collect()
}

/// Largest per-key probability difference, treating missing keys as zero.
pub fn max_prob_diff(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut worst = 0.0f64;
    for key in a.keys().chain(b.keys()) {
        let x = a.get(key).copied().unwrap_or(0.0);
        let y = b.get(key).copied().unwrap_or(0.0);
        worst = worst.max((x - y).abs());
    }
    worst
}
