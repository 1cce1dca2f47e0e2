//! Distribution comparison (Hellinger distance), histogram reports, finite-
//! sampling statistics, and channel-fidelity measurement by state tomography.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::linalg::{Matrix, ZERO};
use crate::sim::OutcomeDistribution;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, thiserror::Error)]
pub enum MetricsError {
    #[error("distribution sums to {total}, expected 1 within {NORMALIZATION_TOL:e}")]
    NotNormalized { total: f64 },
    #[error("negative weight {value} for outcome `{key}`")]
    NegativeWeight { key: String, value: f64 },
    #[error("histogram is empty or has nonpositive total")]
    EmptyHistogram,
    #[error("{what} must be at least 1")]
    ZeroSamples { what: &'static str },
}

/// Outcome counts with their total; counts are real-valued so both sampled
/// and expectation-scaled histograms fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<String, f64>,
    pub total: f64,
}

impl Histogram {
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Self {
        let counts: BTreeMap<String, f64> =
            counts.iter().map(|(k, &c)| (k.clone(), c as f64)).collect();
        let total = counts.values().sum();
        Histogram { counts, total }
    }

    pub fn from_scaled(counts: BTreeMap<String, f64>) -> Result<Self, MetricsError> {
        for (k, &v) in &counts {
            if v < 0.0 || !v.is_finite() {
                return Err(MetricsError::NegativeWeight { key: k.clone(), value: v });
            }
        }
        let total = counts.values().sum();
        Ok(Histogram { counts, total })
    }

    /// Expected counts of `dist` at `shots` samples, unrounded.
    pub fn from_distribution(dist: &OutcomeDistribution, shots: u64) -> Self {
        let counts = dist.scale_counts(shots);
        let total = counts.values().sum();
        Histogram { counts, total }
    }

    pub fn normalized(&self) -> Result<BTreeMap<String, f64>, MetricsError> {
        if self.counts.is_empty() || !(self.total > 0.0) {
            return Err(MetricsError::EmptyHistogram);
        }
        for (k, &v) in &self.counts {
            if v < 0.0 || !v.is_finite() {
                return Err(MetricsError::NegativeWeight { key: k.clone(), value: v });
            }
        }
        Ok(self.counts.iter().map(|(k, &c)| (k.clone(), c / self.total)).collect())
    }
}

fn check_distribution(p: &BTreeMap<String, f64>) -> Result<(), MetricsError> {
    let mut total = 0.0;
    for (k, &v) in p {
        if v < 0.0 || !v.is_finite() {
            return Err(MetricsError::NegativeWeight { key: k.clone(), value: v });
        }
        total += v;
    }
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(MetricsError::NotNormalized { total });
    }
    Ok(())
}

/// Hellinger distance `(1/sqrt 2) * sqrt(sum_i (sqrt p_i - sqrt q_i)^2)`.
///
/// Supports may differ; outcomes missing from one distribution count as
/// probability zero. Both inputs must sum to 1 within 1e-9.
pub fn hellinger(
    p: &BTreeMap<String, f64>,
    q: &BTreeMap<String, f64>,
) -> Result<f64, MetricsError> {
    check_distribution(p)?;
    check_distribution(q)?;
    let mut sum = 0.0;
    for (k, &pv) in p {
        let qv = q.get(k).copied().unwrap_or(0.0);
        let d = pv.sqrt() - qv.sqrt();
        sum += d * d;
    }
    for (k, &qv) in q {
        if !p.contains_key(k) {
            sum += qv;
        }
    }
    Ok((0.5 * sum).sqrt().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub bitstring: String,
    pub sim_count: f64,
    pub ref_count: f64,
    pub abs_diff: f64,
}

/// Hellinger distance plus a per-state count table.
///
/// The distance always uses the full distributions; `filter_below` only
/// trims the table, dropping states where both histograms sit under the
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub circuit_id: String,
    pub hellinger: f64,
    pub filtered_threshold: f64,
    pub rows: Vec<StateRow>,
}

impl ComparisonReport {
    /// Plot-ready CSV: `bitstring,sim_count,ref_count,abs_diff`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,sim_count,ref_count,abs_diff\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.bitstring, row.sim_count, row.ref_count, row.abs_diff
            ));
        }
        out
    }
}

pub fn compare(
    circuit_id: &str,
    sim: &Histogram,
    reference: &Histogram,
    filter_below: f64,
) -> Result<ComparisonReport, MetricsError> {
    let h = hellinger(&sim.normalized()?, &reference.normalized()?)?;
    let keys: BTreeSet<&String> = sim.counts.keys().chain(reference.counts.keys()).collect();
    let rows = keys
        .into_iter()
        .filter_map(|k| {
            let s = sim.counts.get(k).copied().unwrap_or(0.0);
            let r = reference.counts.get(k).copied().unwrap_or(0.0);
            if s < filter_below && r < filter_below {
                return None;
            }
            Some(StateRow {
                bitstring: k.clone(),
                sim_count: s,
                ref_count: r,
                abs_diff: (s - r).abs(),
            })
        })
        .collect();
    Ok(ComparisonReport {
        circuit_id: circuit_id.to_string(),
        hellinger: h,
        filtered_threshold: filter_below,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd { mean, std: var.sqrt() }
}

/// Finite-sampling spread of a simulated distribution.
///
/// Draws `repetitions` histograms of `shots` samples each and reports, per
/// state, the mean and population standard deviation of the counts, plus the
/// Hellinger distance to the exact distribution under both averaging orders:
/// distance per repetition then averaged (`hellinger_per_rep`), and distance
/// of the averaged histogram (`hellinger_of_mean`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingStats {
    pub shots: u64,
    pub repetitions: u64,
    pub per_state: BTreeMap<String, MeanStd>,
    pub hellinger_per_rep: MeanStd,
    pub hellinger_of_mean: f64,
}

pub fn hellinger_std(
    exact: &OutcomeDistribution,
    shots: u64,
    repetitions: u64,
    seed: u64,
) -> Result<SamplingStats, MetricsError> {
    if shots == 0 {
        return Err(MetricsError::ZeroSamples { what: "shots" });
    }
    if repetitions == 0 {
        return Err(MetricsError::ZeroSamples { what: "repetitions" });
    }

    let mut seeder = ChaCha12Rng::seed_from_u64(seed);
    let mut runs: Vec<BTreeMap<String, u64>> = Vec::with_capacity(repetitions as usize);
    for _ in 0..repetitions {
        runs.push(exact.sample(shots, seeder.random::<u64>()));
    }

    let mut keys: BTreeSet<String> = exact.probabilities().keys().cloned().collect();
    for run in &runs {
        keys.extend(run.keys().cloned());
    }

    let mut per_state = BTreeMap::new();
    for key in &keys {
        let counts: Vec<f64> = runs
            .iter()
            .map(|run| run.get(key).copied().unwrap_or(0) as f64)
            .collect();
        per_state.insert(key.clone(), mean_std(&counts));
    }

    let distances: Vec<f64> = runs
        .iter()
        .map(|run| {
            let sampled: BTreeMap<String, f64> = run
                .iter()
                .map(|(k, &c)| (k.clone(), c as f64 / shots as f64))
                .collect();
            hellinger(&sampled, exact.probabilities())
        })
        .collect::<Result<_, _>>()?;

    let mean_dist: BTreeMap<String, f64> = per_state
        .iter()
        .filter(|(_, s)| s.mean > 0.0)
        .map(|(k, s)| (k.clone(), s.mean / shots as f64))
        .collect();
    let hellinger_of_mean = hellinger(&mean_dist, exact.probabilities())?;

    Ok(SamplingStats {
        shots,
        repetitions,
        per_state,
        hellinger_per_rep: mean_std(&distances),
        hellinger_of_mean,
    })
}

/// `|v><v|` on a `dim`-dimensional space from sparse amplitudes.
fn projector(dim: usize, amps: &[(usize, Complex64)]) -> Matrix {
    let mut v = vec![ZERO; dim];
    for &(i, a) in amps {
        v[i] = a;
    }
    let mut m = Matrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            m[(r, c)] = v[r] * v[c].conj();
        }
    }
    m
}

/// Process fidelity to the identity, measured by state tomography.
///
/// `F_pro = (1/d^2) sum_jk <j| E(|j><k|) |k>`, with each `E(|j><k|)`
/// reconstructed by linearity from the channel's action on four physical
/// states: the two basis projectors and the `+`/`+i` superpositions of
/// `|j>` and `|k>`. Only physical density matrices ever pass through the
/// channel, which keeps this independent of the superoperator algebra it
/// verifies.
pub fn process_fidelity(channel: &KrausChannel) -> f64 {
    let d = channel.dim();
    let e_basis: Vec<Matrix> =
        (0..d).map(|j| channel.apply(&projector(d, &[(j, Complex64::new(1.0, 0.0))]))).collect();

    let half = Complex64::new(0.5, 0.5);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            if j == k {
                acc += e_basis[j][(j, j)];
                continue;
            }
            let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
            let plus = channel.apply(&projector(d, &[(j, amp), (k, amp)]));
            let iplus = channel.apply(&projector(d, &[(j, amp), (k, amp * Complex64::i())]));
            // |j><k| = |+><+| + i |i+><i+| - (1+i)/2 (|j><j| + |k><k|)
            let cross = plus[(j, k)] + Complex64::i() * iplus[(j, k)]
                - half * (e_basis[j][(j, k)] + e_basis[k][(j, k)]);
            acc += cross;
        }
    }
    (acc / (d * d) as f64).re
}

/// Average gate fidelity `(d F_pro + 1) / (d + 1)` from the same tomography.
pub fn average_gate_fidelity(channel: &KrausChannel) -> f64 {
    let d = channel.dim() as f64;
    (d * process_fidelity(channel) + 1.0) / (d + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        dephasing, depolarizing_1q, depolarizing_2q, depolarizing_for_fidelity, relaxation,
    };
    use proptest::prelude::*;

    fn dist(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn hellinger_basics() {
        let p = dist(&[("00", 0.5), ("11", 0.5)]);
        assert_eq!(hellinger(&p, &p).unwrap(), 0.0);

        let a = dist(&[("0", 1.0)]);
        let b = dist(&[("1", 1.0)]);
        assert!((hellinger(&a, &b).unwrap() - 1.0).abs() < 1e-15);

        let q = dist(&[("00", 1.0)]);
        let h = hellinger(&p, &q).unwrap();
        let closed_form = (1.0 - FRAC_1_SQRT_2).sqrt();
        assert!((h - closed_form).abs() < 1e-15);
        assert!((h - 0.54120).abs() < 5e-6);
        assert_eq!(h, hellinger(&q, &p).unwrap());
    }

    #[test]
    fn hellinger_rejects_bad_input() {
        let p = dist(&[("0", 0.7), ("1", 0.2)]);
        let ok = dist(&[("0", 1.0)]);
        assert!(matches!(hellinger(&p, &ok), Err(MetricsError::NotNormalized { .. })));
        let neg = dist(&[("0", 1.5), ("1", -0.5)]);
        assert!(matches!(hellinger(&neg, &ok), Err(MetricsError::NegativeWeight { .. })));
    }

    #[test]
    fn hellinger_ignores_shared_relabeling() {
        let p = dist(&[("00", 0.1), ("01", 0.2), ("10", 0.3), ("11", 0.4)]);
        let q = dist(&[("00", 0.4), ("01", 0.1), ("10", 0.2), ("11", 0.3)]);
        let relabel = |m: &BTreeMap<String, f64>| {
            m.iter()
                .map(|(k, &v)| {
                    let flipped: String =
                        k.chars().map(|c| if c == '0' { '1' } else { '0' }).collect();
                    (flipped, v)
                })
                .collect::<BTreeMap<String, f64>>()
        };
        let h = hellinger(&p, &q).unwrap();
        let hr = hellinger(&relabel(&p), &relabel(&q)).unwrap();
        assert!((h - hr).abs() < 1e-12);
    }

    #[test]
    fn compare_builds_filtered_table() {
        let sim = Histogram::from_counts(&[("00", 4900u64), ("11", 5060), ("01", 40)]
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect());
        let reference = Histogram::from_counts(&[("00", 5000u64), ("11", 5000)]
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect());

        let report = compare("ghz-2", &sim, &reference, 100.0).unwrap();
        assert!(report.hellinger > 0.0 && report.hellinger < 0.1);
        // "01" is under threshold on both sides and drops out of the table.
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.bitstring != "01"));
        let csv = report.to_csv();
        assert!(csv.starts_with("bitstring,sim_count,ref_count,abs_diff\n"));
        assert!(csv.contains("00,4900,5000,100"));

        let same = compare("same", &reference, &reference, 0.0).unwrap();
        assert_eq!(same.hellinger, 0.0);
        assert!(same.rows.iter().all(|r| r.abs_diff == 0.0));
    }

    #[test]
    fn compare_rejects_empty_histograms() {
        let empty = Histogram { counts: BTreeMap::new(), total: 0.0 };
        let ok = Histogram::from_counts(&[("0".to_string(), 1u64)].into_iter().collect());
        assert!(matches!(compare("x", &empty, &ok, 0.0), Err(MetricsError::EmptyHistogram)));
    }

    #[test]
    fn sampling_stats_on_delta_distribution_have_zero_spread() {
        let delta = OutcomeDistribution::new(1, dist(&[("1", 1.0)]));
        let stats = hellinger_std(&delta, 500, 10, 3).unwrap();
        let s = &stats.per_state["1"];
        assert_eq!(s.mean, 500.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(stats.hellinger_per_rep.mean, 0.0);
        assert_eq!(stats.hellinger_per_rep.std, 0.0);
        assert_eq!(stats.hellinger_of_mean, 0.0);

        let single = hellinger_std(&delta, 500, 1, 3).unwrap();
        assert_eq!(single.hellinger_per_rep.std, 0.0);
    }

    #[test]
    fn sampling_stats_match_binomial_spread() {
        let ghz = OutcomeDistribution::new(2, dist(&[("00", 0.5), ("11", 0.5)]));
        let stats = hellinger_std(&ghz, 10_000, 50, 11).unwrap();
        // Binomial spread sqrt(10000 * 0.5 * 0.5) = 50.
        let s = &stats.per_state["00"];
        assert!((s.mean - 5000.0).abs() < 50.0, "mean {}", s.mean);
        assert!((s.std - 50.0).abs() < 10.0, "std {}", s.std);
        assert!(stats.hellinger_per_rep.mean > 0.0 && stats.hellinger_per_rep.mean < 0.05);
        assert!(stats.hellinger_of_mean <= stats.hellinger_per_rep.mean);
    }

    #[test]
    fn sampled_means_track_scaled_counts() {
        let ghz = OutcomeDistribution::new(2, dist(&[("00", 0.5), ("11", 0.5)]));
        let stats = hellinger_std(&ghz, 10_000, 1000, 5).unwrap();
        let expected = ghz.scale_counts(10_000);
        for (key, &want) in &expected {
            let got = stats.per_state[key].mean;
            // 3 sigma of the mean of 1000 repetitions.
            let spread = 3.0 * 50.0 / (1000.0f64).sqrt();
            assert!((got - want).abs() < spread, "{key}: {got} vs {want}");
        }
    }

    #[test]
    fn tomography_reproduces_closed_form_fidelities() {
        // Relaxation at p = 0.2: F_pro = (1 + sqrt(0.8))^2 / 4 + 0,
        // F_avg = (2 F_pro + 1) / 3.
        let f = average_gate_fidelity(&relaxation(0.2).unwrap());
        assert!((f - 0.9314757303333053).abs() < 1e-12);

        for p in [0.0, 0.05, 0.3, 0.75] {
            let f1 = average_gate_fidelity(&depolarizing_1q(p).unwrap());
            assert!((f1 - (1.0 - 2.0 * p / 3.0)).abs() < 1e-12, "depol1q p={p}");
            let fd = average_gate_fidelity(&dephasing(p).unwrap());
            assert!((fd - (1.0 - 2.0 * p / 3.0)).abs() < 1e-12, "dephasing p={p}");
            let f2 = average_gate_fidelity(&depolarizing_2q(p).unwrap());
            assert!((f2 - (1.0 - 4.0 * p / 5.0)).abs() < 1e-12, "depol2q p={p}");
        }

        assert!((average_gate_fidelity(&KrausChannel::identity(2)) - 1.0).abs() < 1e-14);
        assert!((average_gate_fidelity(&KrausChannel::identity(4)) - 1.0).abs() < 1e-14);
        // A bit flip has zero overlap with the identity on average ... up to
        // the state-independent 1/(d+1) floor.
        let flip = KrausChannel::new("x", vec![crate::linalg::pauli_x()]);
        assert!((average_gate_fidelity(&flip) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn depolarizing_inversion_round_trips_through_tomography() {
        for i in 0..50 {
            let f = 0.90 + 0.10 * (i as f64 / 49.0);
            for dim in [2usize, 4] {
                let channel = depolarizing_for_fidelity(f, dim).unwrap();
                let measured = average_gate_fidelity(&channel);
                assert!(
                    (measured - f).abs() < 1e-9,
                    "dim {dim}, f {f}: measured {measured}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn hellinger_triangle_inequality(
            raw in proptest::collection::vec(0.01f64..1.0, 12)
        ) {
            let mk = |chunk: &[f64]| {
                let total: f64 = chunk.iter().sum();
                ["00", "01", "10", "11"]
                    .iter()
                    .zip(chunk)
                    .map(|(k, v)| (k.to_string(), v / total))
                    .collect::<BTreeMap<String, f64>>()
            };
            let p = mk(&raw[0..4]);
            let q = mk(&raw[4..8]);
            let r = mk(&raw[8..12]);
            let pq = hellinger(&p, &q).unwrap();
            let qr = hellinger(&q, &r).unwrap();
            let pr = hellinger(&p, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-12);
            prop_assert!((0.0..=1.0).contains(&pr));
        }
    }
}
