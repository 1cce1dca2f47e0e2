//! Kraus channels derived from calibration figures.
//!
//! Four families: thermal relaxation and pure dephasing (idle noise,
//! parameterized by interval length against T1/T2), and one- and two-qubit
//! depolarizing channels (gate noise, parameterized by average gate
//! fidelity). Readout error is a classical confusion matrix applied to the
//! outcome distribution, not a Kraus channel.
//!
//! Durations are integer nanoseconds throughout; coherence times arrive in
//! microseconds and are converted here, in one place.

use crate::linalg::{pauli_i, pauli_x, pauli_y, pauli_z, two_qubit_paulis, Complex64, Matrix, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("fidelity {fidelity} maps to depolarizing probability {p} > 1 (dim {dim})")]
    FidelityTooLow { fidelity: f64, p: f64, dim: usize },
    #[error("fidelity {0} outside (0, 1]")]
    BadFidelity(f64),
    #[error("unsupported dimension {0}; only 2 and 4")]
    BadDimension(usize),
    #[error("pure dephasing undefined: T2 = {t2_us} exceeds 2*T1 = {0}", 2.0 * t1_us)]
    T2ExceedsLimit { t1_us: f64, t2_us: f64 },
    #[error("coherence time {0} must be positive")]
    BadCoherenceTime(f64),
}

/// A quantum channel in explicit Kraus form, `rho -> sum_m K_m rho K_m^dag`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub label: String,
    ops: Vec<Matrix>,
}

impl KrausChannel {
    pub fn new(label: impl Into<String>, ops: Vec<Matrix>) -> Self {
        assert!(!ops.is_empty());
        let dim = ops[0].dim();
        assert!(ops.iter().all(|k| k.dim() == dim));
        KrausChannel { label: label.into(), ops }
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn ops(&self) -> &[Matrix] {
        &self.ops
    }

    /// The identity channel (single identity Kraus operator).
    pub fn identity(dim: usize) -> Self {
        KrausChannel::new("identity", vec![Matrix::identity(dim)])
    }

    /// `sum_m K_m^dag K_m`, which must equal the identity for a
    /// trace-preserving channel.
    pub fn completeness_sum(&self) -> Matrix {
        let dim = self.dim();
        let mut acc = Matrix::zeros(dim);
        for k in &self.ops {
            acc = acc.add(&k.dagger().mul(k));
        }
        acc
    }

    /// Largest elementwise deviation of the completeness sum from identity.
    pub fn completeness_defect(&self) -> f64 {
        self.completeness_sum().max_abs_diff(&Matrix::identity(self.dim()))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.completeness_defect() <= tol
    }

    /// Dense application to a density matrix of matching dimension. The
    /// strided engine has its own kernels; this form is the reference.
    pub fn apply(&self, rho: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(rho.dim());
        for k in &self.ops {
            out = out.add(&k.mul(rho).mul(&k.dagger()));
        }
        out
    }

    /// Row-major-vec superoperator `sum_m K_m (x) conj(K_m)`, shaped
    /// `dim^2 x dim^2`. Satisfies `vec(E(rho)) = S vec(rho)` when `rho` is
    /// vectorized row by row.
    pub fn superoperator(&self) -> Matrix {
        let d2 = self.dim() * self.dim();
        let mut s = Matrix::zeros(d2);
        for k in &self.ops {
            s = s.add(&k.kron(&k.conj()));
        }
        s
    }

    /// Sequential composition: `other` after `self`. Kraus ops multiply out;
    /// the count grows multiplicatively, so this is for tests and oracles.
    pub fn then(&self, other: &KrausChannel) -> KrausChannel {
        assert_eq!(self.dim(), other.dim());
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for b in &other.ops {
            for a in &self.ops {
                ops.push(b.mul(a));
            }
        }
        KrausChannel::new(format!("{} then {}", self.label, other.label), ops)
    }
}

/// Superoperator of a plain unitary: `U (x) conj(U)`.
pub fn unitary_superoperator(u: &Matrix) -> Matrix {
    u.kron(&u.conj())
}

fn check_probability(p: f64) -> Result<(), ChannelError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(ChannelError::BadProbability(p));
    }
    Ok(())
}

/// Decay probability over `t_ns` of idling against time constant `tau_us`:
/// `1 - exp(-t / tau)`.
pub fn decay_probability(t_ns: u64, tau_us: f64) -> Result<f64, ChannelError> {
    if !(tau_us > 0.0) || !tau_us.is_finite() {
        return Err(ChannelError::BadCoherenceTime(tau_us));
    }
    let t_us = t_ns as f64 * 1e-3;
    Ok(1.0 - (-t_us / tau_us).exp())
}

/// Which time constant parameterizes the dephasing channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DephasingTimescale {
    /// Use the vendor-printed T2 directly. Double-counts the decoherence
    /// already caused by relaxation, but needs no assumption about what the
    /// vendor measured. This is the default.
    #[serde(rename = "t2")]
    AsPrinted,
    /// Strip the relaxation contribution first:
    /// `1/T_phi = 1/T2 - 1/(2 T1)`. Requires `T2 < 2 T1`.
    #[serde(rename = "tphi")]
    PureComponent,
}

impl Default for DephasingTimescale {
    fn default() -> Self {
        DephasingTimescale::AsPrinted
    }
}

/// Effective dephasing time constant in microseconds under `mode`.
pub fn dephasing_tau_us(t1_us: f64, t2_us: f64, mode: DephasingTimescale) -> Result<f64, ChannelError> {
    if !(t2_us > 0.0) || !t2_us.is_finite() {
        return Err(ChannelError::BadCoherenceTime(t2_us));
    }
    match mode {
        DephasingTimescale::AsPrinted => Ok(t2_us),
        DephasingTimescale::PureComponent => {
            if !(t1_us > 0.0) || !t1_us.is_finite() {
                return Err(ChannelError::BadCoherenceTime(t1_us));
            }
            let rate = 1.0 / t2_us - 1.0 / (2.0 * t1_us);
            if rate <= 0.0 {
                return Err(ChannelError::T2ExceedsLimit { t1_us, t2_us });
            }
            Ok(1.0 / rate)
        }
    }
}

/// Thermal relaxation toward |0>: `K0 = |0><0| + sqrt(1-p) |1><1|`,
/// `K1 = sqrt(p) |0><1|`.
pub fn relaxation(p: f64) -> Result<KrausChannel, ChannelError> {
    check_probability(p)?;
    let k0 = Matrix::from_vec(2, vec![ONE, ZERO, ZERO, Complex64::new((1.0 - p).sqrt(), 0.0)]);
    let k1 = Matrix::from_vec(2, vec![ZERO, Complex64::new(p.sqrt(), 0.0), ZERO, ZERO]);
    Ok(KrausChannel::new(format!("relaxation(p={p})"), vec![k0, k1]))
}

/// Phase flip with probability `p`: `K0 = sqrt(1-p) I`, `K1 = sqrt(p) Z`.
pub fn dephasing(p: f64) -> Result<KrausChannel, ChannelError> {
    check_probability(p)?;
    let k0 = pauli_i().scale(Complex64::new((1.0 - p).sqrt(), 0.0));
    let k1 = pauli_z().scale(Complex64::new(p.sqrt(), 0.0));
    Ok(KrausChannel::new(format!("dephasing(p={p})"), vec![k0, k1]))
}

/// Single-qubit depolarizing: identity with `sqrt(1-p)`, each Pauli with
/// `sqrt(p/3)`.
pub fn depolarizing_1q(p: f64) -> Result<KrausChannel, ChannelError> {
    check_probability(p)?;
    let id = Complex64::new((1.0 - p).sqrt(), 0.0);
    let each = Complex64::new((p / 3.0).sqrt(), 0.0);
    Ok(KrausChannel::new(
        format!("depolarizing_1q(p={p})"),
        vec![
            pauli_i().scale(id),
            pauli_x().scale(each),
            pauli_y().scale(each),
            pauli_z().scale(each),
        ],
    ))
}

/// Two-qubit depolarizing: `I(x)I` with `sqrt(1-p)`, the 15 non-identity
/// Pauli products with `sqrt(p/15)` each.
pub fn depolarizing_2q(p: f64) -> Result<KrausChannel, ChannelError> {
    check_probability(p)?;
    let paulis = two_qubit_paulis();
    let mut ops = Vec::with_capacity(16);
    ops.push(paulis[0].scale(Complex64::new((1.0 - p).sqrt(), 0.0)));
    let each = Complex64::new((p / 15.0).sqrt(), 0.0);
    for pauli in &paulis[1..] {
        ops.push(pauli.scale(each));
    }
    Ok(KrausChannel::new(format!("depolarizing_2q(p={p})"), ops))
}

/// Depolarizing probability reproducing average gate fidelity `f` in
/// dimension `dim`: `p = (1 - f)(d + 1) / d`. Errors if the fidelity is so
/// low that no depolarizing channel attains it (`p > 1`).
pub fn fidelity_to_pdep(fidelity: f64, dim: usize) -> Result<f64, ChannelError> {
    if dim != 2 && dim != 4 {
        return Err(ChannelError::BadDimension(dim));
    }
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(ChannelError::BadFidelity(fidelity));
    }
    let d = dim as f64;
    let p = (1.0 - fidelity) * (d + 1.0) / d;
    if p > 1.0 {
        return Err(ChannelError::FidelityTooLow { fidelity, p, dim });
    }
    Ok(p)
}

/// Gate-noise channel for a gate of dimension `dim` with average fidelity
/// `fidelity`.
pub fn depolarizing_for_fidelity(fidelity: f64, dim: usize) -> Result<KrausChannel, ChannelError> {
    let p = fidelity_to_pdep(fidelity, dim)?;
    match dim {
        2 => depolarizing_1q(p),
        4 => depolarizing_2q(p),
        _ => Err(ChannelError::BadDimension(dim)),
    }
}

/// Idle-noise channel for `t_ns` of idling: relaxation followed by
/// dephasing, both parameterized by exponential decay over the interval.
pub fn idle_channel(
    t_ns: u64,
    t1_us: f64,
    t2_us: f64,
    mode: DephasingTimescale,
) -> Result<KrausChannel, ChannelError> {
    let p_r = decay_probability(t_ns, t1_us)?;
    let tau_phi = dephasing_tau_us(t1_us, t2_us, mode)?;
    let p_d = decay_probability(t_ns, tau_phi)?;
    Ok(relaxation(p_r)?.then(&dephasing(p_d)?))
}

/// 2x2 column-stochastic readout confusion matrix: column j holds the
/// outcome distribution given true state j, so `M[[1][0]] = e0` is
/// P(read 1 | true 0) and `M[[0][1]] = e1` is P(read 0 | true 1).
pub fn confusion_matrix(e0: f64, e1: f64) -> Result<[[f64; 2]; 2], ChannelError> {
    check_probability(e0)?;
    check_probability(e1)?;
    Ok([[1.0 - e0, e1], [e0, 1.0 - e1]])
}

/// Apply per-bit confusion matrices to a probability vector over bitstrings.
/// Bit `b` of the index is acted on by `matrices[b]`; the tensor-product
/// structure means each bit can be processed independently.
pub fn apply_confusion(probs: &mut [f64], matrices: &[[[f64; 2]; 2]]) {
    let n = matrices.len();
    assert_eq!(probs.len(), 1usize << n);
    for (b, m) in matrices.iter().enumerate() {
        let stride = 1usize << b;
        for base in 0..probs.len() / 2 {
            // Expand the b-th bit out of the flat index.
            let lo = (base & !(stride - 1)) << 1 | (base & (stride - 1));
            let hi = lo | stride;
            let p0 = probs[lo];
            let p1 = probs[hi];
            probs[lo] = m[0][0] * p0 + m[0][1] * p1;
            probs[hi] = m[1][0] * p0 + m[1][1] * p1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn relaxation_moves_excited_population() {
        let ch = relaxation(0.25).unwrap();
        assert!(ch.is_trace_preserving(TOL));
        // start in |1><1|
        let rho = Matrix::from_vec(2, vec![ZERO, ZERO, ZERO, ONE]);
        let out = ch.apply(&rho);
        assert!((out[(0, 0)].re - 0.25).abs() < TOL);
        assert!((out[(1, 1)].re - 0.75).abs() < TOL);
    }

    #[test]
    fn relaxation_scales_coherences_by_sqrt() {
        let ch = relaxation(0.36).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let rho = Matrix::from_vec(2, vec![half, half, half, half]);
        let out = ch.apply(&rho);
        assert!((out[(0, 1)].re - 0.5 * 0.8).abs() < TOL);
    }

    #[test]
    fn dephasing_damps_coherences_linearly() {
        let ch = dephasing(0.1).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let rho = Matrix::from_vec(2, vec![half, half, half, half]);
        let out = ch.apply(&rho);
        // off-diagonals shrink by (1 - 2p)
        assert!((out[(0, 1)].re - 0.5 * 0.8).abs() < TOL);
        assert!((out[(0, 0)].re - 0.5).abs() < TOL);
    }

    #[test]
    fn depolarizing_1q_contracts_toward_maximally_mixed() {
        let ch = depolarizing_1q(0.75).unwrap();
        let rho = Matrix::from_vec(2, vec![ONE, ZERO, ZERO, ZERO]);
        let out = ch.apply(&rho);
        // p = 3/4 is the fully depolarizing point
        assert!((out[(0, 0)].re - 0.5).abs() < TOL);
        assert!((out[(1, 1)].re - 0.5).abs() < TOL);
    }

    #[test]
    fn all_families_are_trace_preserving() {
        for p in [0.0, 1e-6, 0.1, 0.5, 0.999, 1.0] {
            assert!(relaxation(p).unwrap().is_trace_preserving(TOL));
            assert!(dephasing(p).unwrap().is_trace_preserving(TOL));
            assert!(depolarizing_1q(p).unwrap().is_trace_preserving(TOL));
            assert!(depolarizing_2q(p).unwrap().is_trace_preserving(TOL));
        }
    }

    #[test]
    fn decay_probability_matches_exponential() {
        // 40 ns against T1 = 40 us is 1e-3 time constants.
        let p = decay_probability(40, 40.0).unwrap();
        assert!((p - (1.0 - (-0.001f64).exp())).abs() < 1e-15);
        assert_eq!(decay_probability(0, 40.0).unwrap(), 0.0);
    }

    #[test]
    fn pure_component_removes_relaxation_share() {
        // 1/T_phi = 1/2 - 1/8 = 3/8
        let tau = dephasing_tau_us(4.0, 2.0, DephasingTimescale::PureComponent).unwrap();
        assert!((tau - 8.0 / 3.0).abs() < 1e-12);
        assert_eq!(dephasing_tau_us(4.0, 2.0, DephasingTimescale::AsPrinted).unwrap(), 2.0);
        // T2 = 2 T1 hits the limit exactly
        assert!(matches!(
            dephasing_tau_us(1.0, 2.0, DephasingTimescale::PureComponent),
            Err(ChannelError::T2ExceedsLimit { .. })
        ));
    }

    #[test]
    fn fidelity_map_endpoints() {
        assert_eq!(fidelity_to_pdep(1.0, 2).unwrap(), 0.0);
        assert_eq!(fidelity_to_pdep(1.0, 4).unwrap(), 0.0);
        // d = 2: p = 3(1-f)/2
        assert!((fidelity_to_pdep(0.99, 2).unwrap() - 0.015).abs() < 1e-15);
        // d = 4: p = 5(1-f)/4
        assert!((fidelity_to_pdep(0.99, 4).unwrap() - 0.0125).abs() < 1e-15);
        // f = 1/3 at d = 2 gives exactly p = 1; below it, no channel exists
        assert!(fidelity_to_pdep(1.0 / 3.0, 2).is_ok());
        assert!(matches!(fidelity_to_pdep(0.33, 2), Err(ChannelError::FidelityTooLow { .. })));
        assert!(fidelity_to_pdep(1.5, 2).is_err());
        assert!(fidelity_to_pdep(0.95, 3).is_err());
    }

    #[test]
    fn superoperator_matches_dense_application() {
        let ch = relaxation(0.3).unwrap().then(&dephasing(0.2).unwrap());
        let s = ch.superoperator();
        let rho = Matrix::from_vec(
            2,
            vec![
                Complex64::new(0.7, 0.0),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.3, 0.0),
            ],
        );
        let direct = ch.apply(&rho);
        let vec_out = s.apply(rho.data());
        for i in 0..2 {
            for j in 0..2 {
                assert!((vec_out[i * 2 + j] - direct[(i, j)]).norm() < TOL);
            }
        }
    }

    #[test]
    fn confusion_matrix_columns_sum_to_one() {
        let m = confusion_matrix(0.02, 0.05).unwrap();
        assert!((m[0][0] + m[1][0] - 1.0).abs() < 1e-15);
        assert!((m[0][1] + m[1][1] - 1.0).abs() < 1e-15);
        assert_eq!(m[1][0], 0.02);
        assert_eq!(m[0][1], 0.05);
    }

    #[test]
    fn confusion_on_two_bits_matches_hand_kron() {
        // bit 0: e0=0.1, e1=0; bit 1: e0=0, e1=0.2. True state |01> (bit0=1).
        let ms = vec![confusion_matrix(0.1, 0.0).unwrap(), confusion_matrix(0.0, 0.2).unwrap()];
        let mut probs = vec![0.0, 1.0, 0.0, 0.0];
        apply_confusion(&mut probs, &ms);
        // bit 0 true 1 stays 1 (e1=0); bit 1 true 0 stays 0 (e0=0)
        assert!((probs[1] - 1.0).abs() < 1e-15);
        // true state |10>: bit 0 (true 0) flips with 0.1, bit 1 (true 1)
        // flips with 0.2, independently
        let mut probs = vec![0.0, 0.0, 1.0, 0.0];
        apply_confusion(&mut probs, &ms);
        let expect = [0.2 * 0.9, 0.2 * 0.1, 0.8 * 0.9, 0.8 * 0.1];
        for (got, want) in probs.iter().zip(expect) {
            assert!((got - want).abs() < 1e-15, "{probs:?}");
        }
    }

    #[test]
    fn idle_channel_composes_relaxation_then_dephasing() {
        let ch = idle_channel(100, 50.0, 10.0, DephasingTimescale::AsPrinted).unwrap();
        assert!(ch.is_trace_preserving(TOL));
        let p_r = decay_probability(100, 50.0).unwrap();
        let p_d = decay_probability(100, 10.0).unwrap();
        let reference = relaxation(p_r).unwrap().then(&dephasing(p_d).unwrap());
        let half = Complex64::new(0.5, 0.0);
        let rho = Matrix::from_vec(2, vec![half, half, half, half]);
        assert!(ch.apply(&rho).max_abs_diff(&reference.apply(&rho)) < TOL);
    }

    proptest! {
        #[test]
        fn prop_channels_trace_preserving(p in 0.0f64..=1.0) {
            prop_assert!(relaxation(p).unwrap().completeness_defect() < 1e-12);
            prop_assert!(dephasing(p).unwrap().completeness_defect() < 1e-12);
            prop_assert!(depolarizing_1q(p).unwrap().completeness_defect() < 1e-12);
            prop_assert!(depolarizing_2q(p).unwrap().completeness_defect() < 1e-12);
        }

        #[test]
        fn prop_channels_preserve_trace_and_hermiticity(
            p in 0.0f64..=1.0,
            a in 0.0f64..=1.0,
            re in -0.5f64..=0.5,
            im in -0.5f64..=0.5,
        ) {
            // Build a physical-enough 2x2 density matrix (hermitian, trace 1;
            // clamp the coherence to keep it positive).
            let max_coh = (a * (1.0 - a)).sqrt();
            let norm = (re * re + im * im).sqrt();
            let (re, im) = if norm > max_coh && norm > 0.0 {
                (re * max_coh / norm, im * max_coh / norm)
            } else {
                (re, im)
            };
            let rho = Matrix::from_vec(2, vec![
                Complex64::new(a, 0.0),
                Complex64::new(re, im),
                Complex64::new(re, -im),
                Complex64::new(1.0 - a, 0.0),
            ]);
            for ch in [relaxation(p).unwrap(), dephasing(p).unwrap(), depolarizing_1q(p).unwrap()] {
                let out = ch.apply(&rho);
                prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
                prop_assert!(out.trace().im.abs() < 1e-12);
                prop_assert!(out.max_abs_diff(&out.dagger()) < 1e-12);
            }
        }

        #[test]
        fn prop_fidelity_round_trip(f in 0.9f64..=1.0) {
            // Mapping is linear; invert and compare.
            for dim in [2usize, 4] {
                let d = dim as f64;
                let p = fidelity_to_pdep(f, dim).unwrap();
                let back = 1.0 - p * d / (d + 1.0);
                prop_assert!((back - f).abs() < 1e-14);
            }
        }
    }
}
