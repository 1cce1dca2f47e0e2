//! Command-line surface: one binary with `compile`, `simulate`, `compare`,
//! and `bench` subcommands.
//!
//! Every artifact embeds the provenance tuple (circuit hash, calibration
//! hash, mode, seed, tool version) and is written atomically, so re-running
//! a command with the same inputs reproduces identical bytes. Wall-clock and
//! memory notes go to stderr only. Exit codes: 0 success, 2 usage, 3 input
//! parse failure, 4 validation failure, 5 resource cap.

use crate::bench::{fixture_names, fixture_source, load_fixture, FIXTURE_SHAPES};
use crate::calibration::{hex_string, CalibrationData};
use crate::channels::DephasingTimescale;
use crate::circuit::Circuit;
use crate::compiler::{compile, NativeGateset};
use crate::density::density_matrix_bytes;
use crate::metrics::{compare, hellinger, hellinger_std, Histogram, SamplingStats};
use crate::qasm;
use crate::schedule::{schedule, Schedule, Segment};
use crate::sim::{simulate, simulate_with, Mode, OutcomeDistribution, SimError, SimOptions, DEFAULT_QUBIT_CAP};
use crate::topology::Topology;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;
pub const EXIT_RESOURCE: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::TooManyQubits { .. } => CliError::Resource(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qpu-twin",
    version,
    about = "Calibration-driven noisy simulator for gate-based quantum processors"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route a circuit onto a device topology and lower it to a native gateset.
    Compile(CompileArgs),
    /// Run the density-matrix simulation and write distribution + counts.
    Simulate(SimulateArgs),
    /// Compare two histogram files: Hellinger distance plus a per-state table.
    Compare(CompareArgs),
    /// Run the bundled benchmark suite in both noisy modes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory. Falls back to $QPU_TWIN_OUT, then the working dir.
    #[arg(short = 'o', long = "out-dir")]
    out_dir: Option<PathBuf>,
}

impl OutputArgs {
    fn resolve(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("QPU_TWIN_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Args)]
struct CompileArgs {
    /// QASM file path or bundled fixture name (e.g. GHZ-4).
    circuit: String,
    /// Topology: iqm-q20, ibmq-melbourne, or a JSON file path.
    #[arg(long, default_value = "iqm-q20")]
    topology: String,
    /// Native gateset: iqm-prx-cz (alias iqm) or ibmq-u-cnot (alias ibmq).
    #[arg(long, default_value = "iqm-prx-cz")]
    gateset: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    Double,
    Single,
}

impl Precision {
    fn complex_bytes(self) -> usize {
        match self {
            Precision::Double => 16,
            Precision::Single => 8,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::Single => "single",
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Calibration: iqm-q20, ibmq-melbourne, or a JSON file path.
    #[arg(long, default_value = "iqm-q20")]
    calibration: String,
    /// paper (idle-interval channels), unm_style (per-gate charging), or noiseless.
    #[arg(long, default_value = "paper", value_parser = parse_mode)]
    mode: Mode,
    /// Which printed timescale drives dephasing: t2 as printed, or tphi
    /// extracted via 1/T2 = 1/(2 T1) + 1/Tphi.
    #[arg(long = "dephasing-timescale", default_value = "t2", value_parser = parse_timescale)]
    dephasing: DephasingTimescale,
    /// Charge the idle tail after a qubit's last gate (paper mode only).
    #[arg(long = "trailing-idle", default_value_t = true, action = clap::ArgAction::Set)]
    trailing_idle: bool,
    #[arg(long, value_enum, default_value_t = Precision::Double)]
    precision: Precision,
    /// Refuse to allocate a density matrix larger than this.
    #[arg(long = "max-memory-gib", default_value_t = 20.0)]
    max_memory_gib: f64,
    /// Cap on simulated (gate-touched) qubits.
    #[arg(long = "max-qubits", default_value_t = DEFAULT_QUBIT_CAP)]
    max_qubits: usize,
}

impl NoiseArgs {
    fn options(&self) -> SimOptions {
        let mut opts = SimOptions::new(self.mode);
        opts.dephasing = self.dephasing;
        opts.trailing_idle = self.trailing_idle;
        opts.max_qubits = self.max_qubits;
        opts
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// QASM file path or bundled fixture name (e.g. GHZ-2).
    circuit: String,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Shots used to scale (or sample) the outcome counts.
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw multinomial samples instead of scaling exact probabilities.
    #[arg(long)]
    sample: bool,
    /// Also write the gate/idle schedule as JSON.
    #[arg(long = "dump-schedule")]
    dump_schedule: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Simulated histogram: counts CSV or a dist JSON from `simulate`.
    sim: PathBuf,
    /// Reference histogram in the same formats.
    reference: PathBuf,
    /// Label for the report; defaults to the sim file stem.
    #[arg(long = "circuit-id")]
    circuit_id: Option<String>,
    /// Drop table rows where both sides sit below this count.
    #[arg(long = "filter-below", default_value_t = 0.0)]
    filter_below: f64,
    /// Repetitions for the finite-sampling error bars in the plot CSV.
    #[arg(long, default_value_t = 50)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Only run fixtures whose name contains this (case-insensitive).
    #[arg(long)]
    only: Option<String>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop plot rows where both modes sit below this count.
    #[arg(long = "filter-below", default_value_t = 0.0)]
    filter_below: f64,
    /// Repetitions for the finite-sampling error bars.
    #[arg(long, default_value_t = 50)]
    reps: u64,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn parse_timescale(s: &str) -> Result<DephasingTimescale, String> {
    match s {
        "t2" => Ok(DephasingTimescale::AsPrinted),
        "tphi" => Ok(DephasingTimescale::PureComponent),
        other => Err(format!("unknown timescale `{other}` (expected t2 or tphi)")),
    }
}

fn timescale_str(t: DephasingTimescale) -> &'static str {
    match t {
        DephasingTimescale::AsPrinted => "t2",
        DephasingTimescale::PureComponent => "tphi",
    }
}

fn parse_gateset(s: &str) -> Result<NativeGateset, CliError> {
    match s {
        "iqm" | "iqm-prx-cz" => Ok(NativeGateset::IqmPrxCz),
        "ibmq" | "ibmq-u-cnot" => Ok(NativeGateset::IbmqUCnot),
        other => Err(CliError::Usage(format!(
            "unknown gateset `{other}` (expected iqm-prx-cz or ibmq-u-cnot)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Input loading
// ---------------------------------------------------------------------------

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex_string(&h.finalize())
}

/// A circuit argument is either a bundled fixture name or a file path.
struct LoadedCircuit {
    circuit: Circuit,
    label: String,
    sha256: String,
}

fn load_circuit(spec: &str) -> Result<LoadedCircuit, CliError> {
    if let Some(src) = fixture_source(spec) {
        let circuit = load_fixture(spec)
            .map_err(|e| CliError::Validation(format!("fixture {spec}: {e}")))?;
        return Ok(LoadedCircuit {
            circuit,
            label: spec.to_string(),
            sha256: sha256_hex(src.as_bytes()),
        });
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read circuit `{spec}`: {e}")))?;
    let circuit = qasm::parse(&text).map_err(|e| CliError::Parse(format!("{spec}: {e}")))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok(LoadedCircuit { circuit, label, sha256: sha256_hex(text.as_bytes()) })
}

fn load_topology(spec: &str) -> Result<Topology, CliError> {
    match spec {
        "iqm-q20" | "iqm20" => Ok(Topology::iqm20()),
        "ibmq-melbourne" | "melbourne" => Ok(Topology::melbourne()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read topology `{path}`: {e}")))?;
            Topology::from_json(&text).map_err(|e| CliError::Parse(format!("{path}: {e}")))
        }
    }
}

fn load_calibration(spec: &str) -> Result<CalibrationData, CliError> {
    let cal = match spec {
        "iqm-q20" | "iqm20" => CalibrationData::iqm20(),
        "ibmq-melbourne" | "melbourne" => CalibrationData::melbourne(),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read calibration `{path}`: {e}")))?;
            CalibrationData::from_json(&text).map_err(|e| CliError::Parse(format!("{path}: {e}")))?
        }
    };
    cal.validate()
        .map_err(|e| CliError::Validation(format!("calibration `{spec}`: {e}")))?;
    Ok(cal)
}

/// Estimated density-matrix footprint for the touched-qubit count, checked
/// against the configured ceiling.
fn check_memory(touched: usize, precision: Precision, cap_gib: f64) -> Result<u128, CliError> {
    let bytes = density_matrix_bytes(touched, precision.complex_bytes())
        .ok_or_else(|| CliError::Resource(format!("density matrix for {touched} qubits overflows the address space")))?;
    let cap = (cap_gib * (1u64 << 30) as f64) as u128;
    if bytes > cap {
        return Err(CliError::Resource(format!(
            "density matrix for {touched} qubits needs {:.2} GiB at {} precision, over the {cap_gib} GiB cap",
            bytes as f64 / (1u64 << 30) as f64,
            precision.as_str(),
        )));
    }
    Ok(bytes)
}

// ---------------------------------------------------------------------------
// Histogram files
// ---------------------------------------------------------------------------

/// Counts plus any `# key: value` metadata found in the file.
struct LoadedHistogram {
    counts: BTreeMap<String, f64>,
    metadata: BTreeMap<String, String>,
    sha256: String,
}

fn load_histogram(path: &Path) -> Result<LoadedHistogram, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read `{}`: {e}", path.display())))?;
    let sha256 = sha256_hex(text.as_bytes());
    let origin = path.display().to_string();
    let (counts, metadata) = if path.extension().is_some_and(|e| e == "json") {
        parse_counts_json(&text, &origin)?
    } else {
        parse_counts_csv(&text, &origin)?
    };
    Ok(LoadedHistogram { counts, metadata, sha256 })
}

/// Accepts a `simulate` dist JSON (reads its `counts` object) or a bare
/// `{"bitstring": count}` object.
fn parse_counts_json(text: &str, origin: &str) -> Result<(BTreeMap<String, f64>, BTreeMap<String, String>), CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("{origin}: {e}")))?;
    let mut metadata = BTreeMap::new();
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::Parse(format!("{origin}: expected a JSON object")))?;
    let counts_obj = match obj.get("counts") {
        Some(c) => {
            for (k, v) in obj {
                if let Some(s) = v.as_str() {
                    metadata.insert(k.clone(), s.to_string());
                } else if v.is_number() {
                    metadata.insert(k.clone(), v.to_string());
                }
            }
            c.as_object()
                .ok_or_else(|| CliError::Parse(format!("{origin}: `counts` must be an object")))?
        }
        None => obj,
    };
    let mut counts = BTreeMap::new();
    for (k, v) in counts_obj {
        let x = v
            .as_f64()
            .ok_or_else(|| CliError::Parse(format!("{origin}: count for `{k}` is not a number")))?;
        counts.insert(k.clone(), x);
    }
    Ok((counts, metadata))
}

fn parse_counts_csv(text: &str, origin: &str) -> Result<(BTreeMap<String, f64>, BTreeMap<String, String>), CliError> {
    let mut counts = BTreeMap::new();
    let mut metadata = BTreeMap::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !saw_header {
            if line != "bitstring,count" {
                return Err(CliError::Parse(format!(
                    "{origin}: line {lineno}: expected header `bitstring,count`, found `{line}`"
                )));
            }
            saw_header = true;
            continue;
        }
        let (bits, value) = line.split_once(',').ok_or_else(|| {
            CliError::Parse(format!("{origin}: line {lineno}: expected `bitstring,count`"))
        })?;
        let bits = bits.trim();
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(CliError::Parse(format!(
                "{origin}: line {lineno}: `{bits}` is not a bitstring"
            )));
        }
        let count: f64 = value.trim().parse().map_err(|_| {
            CliError::Parse(format!("{origin}: line {lineno}: `{}` is not a number", value.trim()))
        })?;
        if count < 0.0 {
            return Err(CliError::Parse(format!(
                "{origin}: line {lineno}: negative count {count}"
            )));
        }
        if counts.insert(bits.to_string(), count).is_some() {
            return Err(CliError::Parse(format!(
                "{origin}: line {lineno}: duplicate bitstring `{bits}`"
            )));
        }
    }
    if !saw_header {
        return Err(CliError::Parse(format!("{origin}: missing `bitstring,count` header")));
    }
    Ok((counts, metadata))
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::Validation(format!("cannot write `{}`: {e}", path.display()));
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, content).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)?;
    Ok(())
}

fn json_pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    text
}

fn counts_to_rows(counts: &BTreeMap<String, f64>) -> String {
    let mut out = String::from("bitstring,count\n");
    for (k, v) in counts {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

fn f64_counts(map: BTreeMap<String, u64>) -> BTreeMap<String, f64> {
    map.into_iter().map(|(k, v)| (k, v as f64)).collect()
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_compile(args: &CompileArgs) -> Result<(), CliError> {
    let loaded = load_circuit(&args.circuit)?;
    let topology = load_topology(&args.topology)?;
    let gateset = parse_gateset(&args.gateset)?;
    let compiled = compile(&loaded.circuit, &topology, gateset)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let stats = compiled.circuit.stats();

    let out_dir = args.out.resolve();
    let qasm_path = out_dir.join(format!("{}.native.qasm", loaded.label));
    let stats_path = out_dir.join(format!("{}.compile.json", loaded.label));
    write_atomic(&qasm_path, &qasm::serialize(&compiled.circuit))?;
    let report = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "circuit": loaded.label,
        "circuit_sha256": loaded.sha256,
        "topology": compiled.topology_name,
        "gateset": gateset.name(),
        "inserted_swaps": compiled.inserted_swaps,
        "initial_layout": compiled.initial_layout,
        "final_layout": compiled.final_layout,
        "wire_permutation": compiled.wire_permutation,
        "stats": stats,
    });
    write_atomic(&stats_path, &json_pretty(&report))?;
    println!("{}", qasm_path.display());
    println!("{}", stats_path.display());
    Ok(())
}

fn run_simulation(
    circuit: &Circuit,
    cal: &CalibrationData,
    noise: &NoiseArgs,
    mode: Mode,
) -> Result<OutcomeDistribution, CliError> {
    let touched = circuit.stats().qubits;
    check_memory(touched, noise.precision, noise.max_memory_gib)?;
    let mut opts = noise.options();
    opts.mode = mode;
    let dist = match noise.precision {
        Precision::Double => simulate(circuit, cal, &opts)?,
        Precision::Single => simulate_with::<f32>(circuit, cal, &opts)?,
    };
    Ok(dist)
}

fn schedule_json(sched: &Schedule) -> serde_json::Value {
    let events: Vec<serde_json::Value> = sched
        .events
        .iter()
        .map(|e| {
            json!({
                "gate": e.gate.kind.name(),
                "qubits": e.gate.qubits,
                "params": e.gate.params,
                "start_ns": e.start_ns,
                "end_ns": e.end_ns,
            })
        })
        .collect();
    let timelines: Vec<Vec<serde_json::Value>> = sched
        .timelines
        .iter()
        .map(|tl| {
            tl.iter()
                .map(|seg| match seg {
                    Segment::Gate { event } => json!({"type": "gate", "event": event}),
                    Segment::Idle { start_ns, end_ns, trailing } => json!({
                        "type": "idle",
                        "start_ns": start_ns,
                        "end_ns": end_ns,
                        "trailing": trailing,
                    }),
                })
                .collect()
        })
        .collect();
    json!({
        "duration_ns": sched.duration_ns,
        "events": events,
        "timelines": timelines,
        "idle_fractions": sched.idle_fractions().ok(),
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let loaded = load_circuit(&args.circuit)?;
    let cal = load_calibration(&args.noise.calibration)?;
    let dist = run_simulation(&loaded.circuit, &cal, &args.noise, args.noise.mode)?;

    let (sampling, counts) = if args.sample {
        ("multinomial", f64_counts(dist.sample(args.shots, args.seed)))
    } else {
        ("scaled", dist.scale_counts(args.shots))
    };

    let metadata = [
        ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
        ("circuit", loaded.label.clone()),
        ("circuit_sha256", loaded.sha256.clone()),
        ("calibration", args.noise.calibration.clone()),
        ("calibration_sha256", cal.digest()),
        ("mode", args.noise.mode.as_str().to_string()),
        ("seed", args.seed.to_string()),
        ("shots", args.shots.to_string()),
        ("sampling", sampling.to_string()),
    ];

    let out_dir = args.out.resolve();
    let stem = loaded.label.to_lowercase();

    let dist_json = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "circuit": loaded.label,
        "circuit_sha256": loaded.sha256,
        "calibration": args.noise.calibration,
        "calibration_sha256": cal.digest(),
        "mode": args.noise.mode.as_str(),
        "seed": args.seed,
        "shots": args.shots,
        "sampling": sampling,
        "dephasing_timescale": timescale_str(args.noise.dephasing),
        "trailing_idle": args.noise.trailing_idle,
        "precision": args.noise.precision.as_str(),
        "num_clbits": dist.num_bits(),
        "probabilities": dist.probabilities(),
        "counts": counts,
    });
    let dist_path = out_dir.join(format!("{stem}.dist.json"));
    write_atomic(&dist_path, &json_pretty(&dist_json))?;

    let mut csv = String::new();
    for (k, v) in &metadata {
        csv.push_str(&format!("# {k}: {v}\n"));
    }
    csv.push_str(&counts_to_rows(&counts));
    let counts_path = out_dir.join(format!("{stem}.counts.csv"));
    write_atomic(&counts_path, &csv)?;
    println!("{}", dist_path.display());
    println!("{}", counts_path.display());

    if args.dump_schedule {
        let sched = schedule(&loaded.circuit, &cal)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let sched_path = out_dir.join(format!("{stem}.schedule.json"));
        write_atomic(&sched_path, &json_pretty(&schedule_json(&sched)))?;
        println!("{}", sched_path.display());
    }
    Ok(())
}

/// Plot CSV rows: per state, both histograms plus the finite-sampling
/// standard deviation of the first one.
fn plot_csv(
    header: &[(&str, String)],
    sim: &BTreeMap<String, f64>,
    reference: &BTreeMap<String, f64>,
    stats: Option<&SamplingStats>,
    filter_below: f64,
) -> String {
    let mut out = String::new();
    for (k, v) in header {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str("bitstring,sim_count,ref_count,std\n");
    let keys: std::collections::BTreeSet<&String> = sim.keys().chain(reference.keys()).collect();
    for key in keys {
        let s = sim.get(key).copied().unwrap_or(0.0);
        let r = reference.get(key).copied().unwrap_or(0.0);
        if s < filter_below && r < filter_below {
            continue;
        }
        let std = stats
            .and_then(|st| st.per_state.get(key))
            .map(|m| m.std)
            .unwrap_or(0.0);
        out.push_str(&format!("{key},{s},{r},{std}\n"));
    }
    out
}

/// Reconstruct a distribution from scaled counts for sampling error bars.
fn distribution_from_counts(counts: &BTreeMap<String, f64>) -> Option<OutcomeDistribution> {
    let total: f64 = counts.values().sum();
    if total <= 0.0 {
        return None;
    }
    let num_bits = counts.keys().map(|k| k.len()).max()?;
    let probs: BTreeMap<String, f64> = counts
        .iter()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, &v)| (k.clone(), v / total))
        .collect();
    Some(OutcomeDistribution::new(num_bits, probs))
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let sim = load_histogram(&args.sim)?;
    let reference = load_histogram(&args.reference)?;
    let circuit_id = args.circuit_id.clone().unwrap_or_else(|| {
        args.sim
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "comparison".into())
    });

    let sim_hist = Histogram::from_scaled(sim.counts.clone())
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.sim.display())))?;
    let ref_hist = Histogram::from_scaled(reference.counts.clone())
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.reference.display())))?;
    let report = compare(&circuit_id, &sim_hist, &ref_hist, args.filter_below)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let shots = sim.counts.values().sum::<f64>().round() as u64;
    let sampling = distribution_from_counts(&sim.counts)
        .map(|dist| hellinger_std(&dist, shots.max(1), args.reps.max(1), args.seed))
        .transpose()
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let out_dir = args.out.resolve();
    let report_json = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": args.seed,
        "sim_file": args.sim.display().to_string(),
        "sim_sha256": sim.sha256,
        "sim_metadata": sim.metadata,
        "ref_file": args.reference.display().to_string(),
        "ref_sha256": reference.sha256,
        "ref_metadata": reference.metadata,
        "report": report,
        "sampling": sampling,
    });
    let json_path = out_dir.join(format!("{circuit_id}.report.json"));
    let csv_path = out_dir.join(format!("{circuit_id}.report.csv"));
    write_atomic(&json_path, &json_pretty(&report_json))?;
    write_atomic(&csv_path, &report.to_csv())?;

    let plot_header = [
        ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
        ("circuit", circuit_id.clone()),
        ("sim_sha256", sim.sha256.clone()),
        ("ref_sha256", reference.sha256.clone()),
        ("seed", args.seed.to_string()),
        ("hellinger", format!("{}", report.hellinger)),
    ];
    let plot_path = out_dir.join("plots").join(format!("{circuit_id}.csv"));
    write_atomic(
        &plot_path,
        &plot_csv(&plot_header, &sim.counts, &reference.counts, sampling.as_ref(), args.filter_below),
    )?;

    println!("{}", json_path.display());
    println!("{}", csv_path.display());
    println!("{}", plot_path.display());
    println!("hellinger {}", report.hellinger);
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let cal = load_calibration(&args.noise.calibration)?;
    let out_dir = args.out.resolve();
    let filter = args.only.as_ref().map(|s| s.to_lowercase());

    let mut rows = Vec::new();
    let mut csv = String::from(
        "name,qubits,depth,one_qubit_gates,two_qubit_gates,simulated,\
         hellinger_paper_vs_unm,hellinger_paper_vs_ideal,hellinger_unm_vs_ideal\n",
    );

    for shape in &FIXTURE_SHAPES {
        if let Some(f) = &filter {
            if !shape.name.to_lowercase().contains(f.as_str()) {
                continue;
            }
        }
        let circuit = load_fixture(shape.name)
            .map_err(|e| CliError::Validation(format!("fixture {}: {e}", shape.name)))?;
        let source_sha = sha256_hex(fixture_source(shape.name).unwrap_or_default().as_bytes());
        let stats = circuit.stats();

        let fits_qubits = stats.qubits <= args.noise.max_qubits;
        let memory = check_memory(stats.qubits, args.noise.precision, args.noise.max_memory_gib);
        let simulated = fits_qubits && memory.is_ok();

        let mut h_pu = None;
        let mut h_pi = None;
        let mut h_ui = None;
        if simulated {
            let t0 = Instant::now();
            let ideal = run_simulation(&circuit, &cal, &args.noise, Mode::Noiseless)?;
            let paper = run_simulation(&circuit, &cal, &args.noise, Mode::Paper)?;
            let unm = run_simulation(&circuit, &cal, &args.noise, Mode::UnmStyle)?;
            let dist = |a: &OutcomeDistribution, b: &OutcomeDistribution| {
                hellinger(a.probabilities(), b.probabilities())
                    .map_err(|e| CliError::Validation(e.to_string()))
            };
            h_pu = Some(dist(&paper, &unm)?);
            h_pi = Some(dist(&paper, &ideal)?);
            h_ui = Some(dist(&unm, &ideal)?);

            let sampling = hellinger_std(&paper, args.shots.max(1), args.reps.max(1), args.seed)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let header = [
                ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
                ("circuit", shape.name.to_string()),
                ("circuit_sha256", source_sha.clone()),
                ("calibration_sha256", cal.digest()),
                ("mode", "paper vs unm_style".to_string()),
                ("seed", args.seed.to_string()),
                ("shots", args.shots.to_string()),
            ];
            let plot_path = out_dir.join("plots").join(format!("{}.csv", shape.name.to_lowercase()));
            write_atomic(
                &plot_path,
                &plot_csv(
                    &header,
                    &paper.scale_counts(args.shots),
                    &unm.scale_counts(args.shots),
                    Some(&sampling),
                    args.filter_below,
                ),
            )?;
            let bytes = memory.as_ref().copied().unwrap_or(0);
            eprintln!(
                "{}: {} qubits, {:.2}s, state {:.1} MiB",
                shape.name,
                stats.qubits,
                t0.elapsed().as_secs_f64(),
                bytes as f64 / (1u64 << 20) as f64,
            );
        } else {
            let reason = match &memory {
                Err(e) => e.to_string(),
                Ok(_) => format!("{} qubits over the {}-qubit cap", stats.qubits, args.noise.max_qubits),
            };
            eprintln!("{}: skipped ({reason})", shape.name);
        }

        let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            shape.name,
            stats.qubits,
            stats.depth,
            stats.one_qubit_gates,
            stats.two_qubit_gates,
            simulated,
            fmt(h_pu),
            fmt(h_pi),
            fmt(h_ui),
        ));
        rows.push(json!({
            "name": shape.name,
            "circuit_sha256": source_sha,
            "qubits": stats.qubits,
            "depth": stats.depth,
            "one_qubit_gates": stats.one_qubit_gates,
            "two_qubit_gates": stats.two_qubit_gates,
            "simulated": simulated,
            "hellinger_paper_vs_unm": h_pu,
            "hellinger_paper_vs_ideal": h_pi,
            "hellinger_unm_vs_ideal": h_ui,
        }));
    }

    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "--only {} matches no fixture (known: {})",
            args.only.as_deref().unwrap_or(""),
            fixture_names().collect::<Vec<_>>().join(", ")
        )));
    }

    let report = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "calibration": args.noise.calibration,
        "calibration_sha256": cal.digest(),
        "modes": ["paper", "unm_style"],
        "seed": args.seed,
        "shots": args.shots,
        "dephasing_timescale": timescale_str(args.noise.dephasing),
        "trailing_idle": args.noise.trailing_idle,
        "precision": args.noise.precision.as_str(),
        "max_memory_gib": args.noise.max_memory_gib,
        "max_qubits": args.noise.max_qubits,
        "only": args.only,
        "rows": rows,
    });
    let json_path = out_dir.join("bench-report.json");
    let csv_path = out_dir.join("bench-report.csv");
    write_atomic(&json_path, &json_pretty(&report))?;
    write_atomic(&csv_path, &csv)?;
    println!("{}", json_path.display());
    println!("{}", csv_path.display());
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // clap prints its own message; usage errors exit 2, help/version 0.
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gateset_tags_round_trip_and_reject() {
        assert_eq!(parse_gateset("iqm").unwrap(), NativeGateset::IqmPrxCz);
        assert_eq!(parse_gateset("iqm-prx-cz").unwrap(), NativeGateset::IqmPrxCz);
        assert_eq!(parse_gateset("ibmq").unwrap(), NativeGateset::IbmqUCnot);
        let err = parse_gateset("rigetti").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn csv_histograms_parse_with_metadata_and_position_errors() {
        let good = "# mode: paper\n# seed: 7\nbitstring,count\n00,4900\n11,5100.5\n";
        let (counts, meta) = parse_counts_csv(good, "test.csv").unwrap();
        assert_eq!(counts["00"], 4900.0);
        assert_eq!(counts["11"], 5100.5);
        assert_eq!(meta["mode"], "paper");
        assert_eq!(meta["seed"], "7");

        let bad_number = "bitstring,count\n00,many\n";
        let err = parse_counts_csv(bad_number, "test.csv").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_PARSE);
        assert!(err.to_string().contains("line 2"), "{err}");

        let bad_bits = "bitstring,count\n0x,12\n";
        let err = parse_counts_csv(bad_bits, "test.csv").unwrap_err();
        assert!(err.to_string().contains("not a bitstring"), "{err}");

        let dup = "bitstring,count\n00,1\n00,2\n";
        let err = parse_counts_csv(dup, "test.csv").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");

        let headerless = "00,1\n";
        let err = parse_counts_csv(headerless, "test.csv").unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn json_histograms_accept_dist_files_and_bare_objects() {
        let dist = r#"{"mode": "paper", "seed": 3, "counts": {"01": 10.5, "10": 2}}"#;
        let (counts, meta) = parse_counts_json(dist, "d.json").unwrap();
        assert_eq!(counts["01"], 10.5);
        assert_eq!(meta["mode"], "paper");
        assert_eq!(meta["seed"], "3");

        let bare = r#"{"00": 1, "11": 3}"#;
        let (counts, _) = parse_counts_json(bare, "d.json").unwrap();
        assert_eq!(counts.len(), 2);

        let err = parse_counts_json("[1,2]", "d.json").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_PARSE);
    }

    #[test]
    fn memory_guard_uses_touched_qubits_and_precision() {
        // 15 qubits double precision: exactly 16 GiB, inside a 20 GiB cap.
        assert!(check_memory(15, Precision::Double, 20.0).is_ok());
        let err = check_memory(15, Precision::Double, 10.0).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_RESOURCE);
        // Single precision halves the footprint.
        assert!(check_memory(15, Precision::Single, 10.0).is_ok());
    }

    #[test]
    fn resource_errors_map_to_their_exit_code() {
        let e: CliError = SimError::TooManyQubits { qubits: 16, cap: 15 }.into();
        assert_eq!(e.exit_code(), EXIT_RESOURCE);
    }

    #[test]
    fn timescale_tags_parse() {
        assert_eq!(parse_timescale("t2").unwrap(), DephasingTimescale::AsPrinted);
        assert_eq!(parse_timescale("tphi").unwrap(), DephasingTimescale::PureComponent);
        assert!(parse_timescale("t1").is_err());
    }

    #[test]
    fn plot_rows_filter_when_both_sides_are_small() {
        let sim: BTreeMap<String, f64> =
            [("00".into(), 150.0), ("01".into(), 10.0), ("11".into(), 90.0)].into();
        let reference: BTreeMap<String, f64> =
            [("00".into(), 140.0), ("01".into(), 20.0), ("11".into(), 120.0)].into();
        let text = plot_csv(&[], &sim, &reference, None, 100.0);
        assert!(text.contains("00,150,140,0"));
        assert!(!text.contains("\n01,"), "{text}");
        // 11 stays: the reference side is over the threshold.
        assert!(text.contains("11,90,120,0"));
    }
}
