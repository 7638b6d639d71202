//! Command-line front end for faithfulness checks, channel extraction,
//! prediction, and the simulated tomography experiment.
//!
//! Exit codes: 0 success, 2 invalid input, 3 unfaithful input state,
//! 4 file access or JSON parse failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aaqpt::catalog::{self, bit_flip_channel, probe_names, probe_states, CatalogError};
use aaqpt::channel::{ChannelError, KrausChannel};
use aaqpt::extraction::{extract, ExtractionError, ExtractionMode};
use aaqpt::io::{
    read_json, write_json, ChannelFile, DensityFile, ExtractionFile, FormatError, StateFile, SuperoperatorFile,
};
use aaqpt::qstate::{BipartiteState, DensityMatrix, StateError, DEFAULT_TOL};
use aaqpt::realignment::{ccnr_sum, is_faithful, ppt_min_eigenvalue, realign, singular_spectrum, RealignError, ThresholdPolicy};
use aaqpt::tomography::{run_experiment, ExperimentConfig, ExperimentReport, NoiseModel, Shots, TomographyError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "aaqpt", version, about = "Ancilla-assisted quantum process tomography via realignment")]
struct Cli {
    /// Emit the JSON payload instead of a human-readable table.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a bipartite input state is faithful for process tomography.
    Faithful(StateSource),
    /// CCNR sum and PPT minimum eigenvalue of a bipartite state.
    EntangleCheck(StateSource),
    /// Extract the superoperator from input and output state files.
    Extract(ExtractArgs),
    /// Apply a superoperator file to a probe state.
    Predict(PredictArgs),
    /// Run the simulated three-qubit tomography experiment.
    Experiment(ExperimentArgs),
    /// Realignment data for the Horodecki family over a grid of `a` values (CSV).
    BoundSweep(BoundSweepArgs),
    /// List the named states.
    Catalog,
    /// Write a catalog state to a state file.
    Export(ExportArgs),
    /// Apply a channel to subsystem A of a state file.
    Apply(ApplyArgs),
}

#[derive(Args)]
struct StateSource {
    /// Named catalog state.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    catalog: Option<String>,
    /// State file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Mixing parameter of sigmaE.
    #[arg(long)]
    p: Option<f64>,
    /// Parameter of the Horodecki family.
    #[arg(long)]
    a: Option<f64>,
    /// Dimension of maxent.
    #[arg(long)]
    d: Option<f64>,
    /// Validation tolerance for density matrices.
    #[arg(long, env = "AAQPT_DEFAULT_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Pseudo,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Strict)]
    mode: Mode,
    #[arg(long, env = "AAQPT_DEFAULT_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write the extraction result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Superoperator file, or an extraction result file.
    #[arg(long)]
    m: PathBuf,
    /// Probe label from the catalog frame (0, 1, plus, minus, L, R for qubits; mubB_K for qutrits).
    #[arg(long, conflicts_with = "probe_file", required_unless_present = "probe_file")]
    probe: Option<String>,
    /// Single-system state file.
    #[arg(long)]
    probe_file: Option<PathBuf>,
    #[arg(long, env = "AAQPT_DEFAULT_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Shots per measurement setting, split evenly over the batches.
    #[arg(long, default_value_t = 10_240, conflicts_with = "exact")]
    shots: u64,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "noise-1q", default_value_t = 0.0)]
    noise_1q: f64,
    #[arg(long = "noise-2q", default_value_t = 0.0)]
    noise_2q: f64,
    /// Use exact outcome probabilities instead of sampled counts.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct BoundSweepArgs {
    /// Comma-separated values in (0, 1).
    #[arg(long = "a-grid", value_delimiter = ',', required = true)]
    a_grid: Vec<f64>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    source: StateSource,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ApplyArgs {
    /// Channel file; the qubit bit-flip channel when omitted.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "AAQPT_DEFAULT_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
}

enum CliError {
    Invalid(String),
    NotFaithful(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::NotFaithful(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::NotFaithful(m) | CliError::Io(m) => m,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<ExtractionError> for CliError {
    fn from(e: ExtractionError) -> Self {
        match e {
            ExtractionError::NotFaithful { .. } => CliError::NotFaithful(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        })*
    };
}

invalid_from!(StateError, ChannelError, CatalogError, RealignError, TomographyError);

/// Payload of a successful command plus the exit code it maps to.
struct Report {
    exit: u8,
    payload: Value,
    human: String,
    warnings: Vec<String>,
}

impl Report {
    fn ok(payload: Value, human: String) -> Self {
        Self {
            exit: 0,
            payload,
            human,
            warnings: Vec::new(),
        }
    }
}

/// `x` rounded to 6 significant digits.
fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let scientific = format!("{x:.5e}");
    if x != 0.0 && !(1e-4..1e6).contains(&x.abs()) {
        let (mantissa, exponent) = scientific.split_once('e').expect("exponent present");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exponent}");
    }
    let rounded: f64 = scientific.parse().expect("formatted float parses");
    rounded.to_string()
}

fn complex6(z: &aaqpt::qstate::C64) -> String {
    if z.im == 0.0 {
        sig6(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", sig6(z.re), sig6(z.im.abs()))
    }
}

fn matrix6(m: &aaqpt::qstate::ComplexMatrix) -> String {
    m.row_iter()
        .map(|row| row.iter().map(|z| format!("{:>14}", complex6(z))).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn list6(xs: &[f64]) -> String {
    xs.iter().map(|&x| sig6(x)).collect::<Vec<_>>().join(", ")
}

fn load_state(src: &StateSource) -> Result<(String, BipartiteState), CliError> {
    if let Some(path) = &src.file {
        let file: StateFile = read_json(path)?;
        return Ok((path.display().to_string(), file.to_state(src.tol)?));
    }
    let name = src.catalog.as_deref().expect("clap requires --catalog or --file");
    let mut params = BTreeMap::new();
    for (key, value) in [("p", src.p), ("a", src.a), ("d", src.d)] {
        if let Some(v) = value {
            params.insert(key.to_string(), v);
        }
    }
    let named = catalog::by_name(name, &params)?;
    let label = if params.is_empty() {
        name.to_string()
    } else {
        let args: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{name}({})", args.join(", "))
    };
    Ok((label, named.state))
}

fn cmd_faithful(src: &StateSource) -> Result<Report, CliError> {
    let (label, state) = load_state(src)?;
    let verdict = is_faithful(&state, ThresholdPolicy::Scaled { dim_a: state.dim_a() })?;
    let mut warnings = Vec::new();
    if verdict.unequal_dimensions {
        warnings.push(format!(
            "dimensions {}x{} differ; faithfulness is only decided for equal dimensions",
            state.dim_a(),
            state.dim_b()
        ));
    }
    let human = format!(
        "state            {label}\nfaithful         {}\nrank             {} of {}\nkernel dimension {}\nthreshold        {}\nsingular values  {}",
        verdict.faithful,
        verdict.spectrum.rank,
        verdict.required_rank,
        verdict.kernel_dimension,
        sig6(verdict.spectrum.threshold),
        list6(&verdict.spectrum.values),
    );
    Ok(Report {
        exit: if verdict.faithful { 0 } else { 3 },
        payload: serde_json::to_value(&verdict).expect("serializable"),
        human,
        warnings,
    })
}

fn cmd_entangle_check(src: &StateSource) -> Result<Report, CliError> {
    let (label, state) = load_state(src)?;
    let sum = ccnr_sum(&state)?;
    let ppt_min = ppt_min_eigenvalue(&state);
    let ccnr_entangled = sum > 1.0 + 1e-9;
    let ppt_entangled = ppt_min < -1e-10;
    let verdict = if ccnr_entangled || ppt_entangled { "entangled" } else { "inconclusive" };
    let payload = json!({
        "ccnr_sum": sum,
        "ppt_min_eigenvalue": ppt_min,
        "ccnr_detects": ccnr_entangled,
        "ppt_detects": ppt_entangled,
        "verdict": verdict,
    });
    let human = format!(
        "state              {label}\nccnr sum           {}\nppt min eigenvalue {}\nverdict            {verdict}",
        sig6(sum),
        sig6(ppt_min)
    );
    Ok(Report::ok(payload, human))
}

fn cmd_extract(args: &ExtractArgs) -> Result<Report, CliError> {
    let input = read_json::<StateFile>(&args.input)?.to_state(args.tol)?;
    let output = read_json::<StateFile>(&args.output)?.to_state(args.tol)?;
    let mode = match args.mode {
        Mode::Strict => ExtractionMode::Strict,
        Mode::Pseudo => ExtractionMode::Pseudo,
    };
    let result = extract(&input, &output, mode, None)?;
    let file = ExtractionFile::from(&result);
    let mut warnings = Vec::new();
    if result.truncated_count > 0 {
        warnings.push(format!(
            "{} singular values truncated; the channel is not determined on the unprobed operators",
            result.truncated_count
        ));
    }
    if let Some(path) = &args.out {
        write_json(path, &file)?;
    }
    let human = format!(
        "mode       {}\nresidual   {}\ntruncated  {}\nM =\n{}",
        serde_json::to_value(mode).expect("serializable").as_str().expect("string"),
        sig6(result.residual),
        result.truncated_count,
        matrix6(result.m.matrix())
    );
    Ok(Report {
        exit: 0,
        payload: serde_json::to_value(&file).expect("serializable"),
        human,
        warnings,
    })
}

fn read_superoperator(path: &Path) -> Result<SuperoperatorFile, CliError> {
    let value: Value = read_json(path)?;
    let inner = value.get("m").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| CliError::from(FormatError::Parse(e)))
}

fn cmd_predict(args: &PredictArgs) -> Result<Report, CliError> {
    let m = read_superoperator(&args.m)?.to_superoperator()?;
    let probe = match (&args.probe, &args.probe_file) {
        (Some(label), _) => {
            let names = probe_names(m.dim())?;
            let index = names
                .iter()
                .position(|n| n == label)
                .ok_or_else(|| CliError::Invalid(format!("unknown probe {label:?}; available: {}", names.join(", "))))?;
            probe_states(m.dim())?.swap_remove(index)
        }
        (None, Some(path)) => read_json::<DensityFile>(path)?.to_density(args.tol)?,
        (None, None) => unreachable!("clap requires --probe or --probe-file"),
    };
    let predicted: DensityMatrix = m.predict_output(&probe)?;
    let file = DensityFile::from_density(&predicted);
    if let Some(path) = &args.out {
        write_json(path, &file)?;
    }
    Ok(Report::ok(
        serde_json::to_value(&file).expect("serializable"),
        format!("predicted output =\n{}", matrix6(predicted.matrix())),
    ))
}

fn experiment_table(r: &ExperimentReport) -> String {
    let stat = |s: &aaqpt::tomography::FidelityStat| format!("{} +- {}", sig6(s.mean), sig6(s.band));
    let mut lines = vec![
        format!(
            "shots {} | batches {} | seed {} | noise 1q {} 2q {}",
            r.shots.map_or("exact".to_string(), |s| s.to_string()),
            r.batches,
            r.seed,
            sig6(r.noise.depolarizing_1q),
            sig6(r.noise.depolarizing_2q)
        ),
        format!("F_in    {}", stat(&r.fidelity_in)),
        format!("F_out   {}", stat(&r.fidelity_out)),
    ];
    for name in probe_names(2).expect("qubit frame") {
        if let Some(s) = r.probes.get(&name) {
            lines.push(format!("F_{name:<6}{}", stat(s)));
        }
    }
    lines.join("\n")
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<Report, CliError> {
    let config = ExperimentConfig {
        shots: if args.exact { Shots::Exact } else { Shots::Finite(args.shots) },
        batches: args.batches,
        seed: args.seed,
        noise: NoiseModel::new(args.noise_1q, args.noise_2q)?,
    };
    let report = run_experiment(&config)?;
    let warnings = report
        .batch_details
        .iter()
        .filter_map(|b| b.failure.as_ref().map(|f| format!("batch {} excluded: {f}", b.index)))
        .collect();
    Ok(Report {
        exit: 0,
        payload: serde_json::to_value(&report).expect("serializable"),
        human: experiment_table(&report),
        warnings,
    })
}

fn cmd_bound_sweep(args: &BoundSweepArgs) -> Result<Report, CliError> {
    let mut csv = String::from("a,trace,ppt_min_eigenvalue,ccnr_sum,kernel_dimension,singular_values\n");
    let mut rows = Vec::new();
    for &a in &args.a_grid {
        let state = catalog::horodecki(a)?;
        let spectrum = singular_spectrum(&realign(&state), ThresholdPolicy::Scaled { dim_a: 3 })?;
        let trace = state.matrix().trace().re;
        let ppt_min = ppt_min_eigenvalue(&state);
        let sum = ccnr_sum(&state)?;
        let values: Vec<String> = spectrum.values.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!(
            "{a},{trace},{ppt_min},{sum},{},{}\n",
            spectrum.zero_count(),
            values.join(";")
        ));
        rows.push(json!({
            "a": a,
            "trace": trace,
            "ppt_min_eigenvalue": ppt_min,
            "ccnr_sum": sum,
            "kernel_dimension": spectrum.zero_count(),
            "singular_values": spectrum.values,
        }));
    }
    Ok(Report::ok(Value::Array(rows), csv.trim_end().to_string()))
}

fn cmd_catalog() -> Report {
    let entries: Vec<Value> = catalog::ENTRIES
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "parameters": e.parameters.iter().map(|(n, r)| json!({"name": n, "range": r})).collect::<Vec<_>>(),
                "description": e.description,
            })
        })
        .collect();
    let human = catalog::ENTRIES
        .iter()
        .map(|e| {
            let params: Vec<String> = e.parameters.iter().map(|(n, r)| format!("--{n} in {r}")).collect();
            format!("{:<10} {:<22} {}", e.name, params.join(" "), e.description)
        })
        .collect::<Vec<_>>()
        .join("\n");
    Report::ok(Value::Array(entries), human)
}

fn cmd_export(args: &ExportArgs) -> Result<Report, CliError> {
    let (label, state) = load_state(&args.source)?;
    let file = StateFile::from_state(&state);
    write_json(&args.out, &file)?;
    Ok(Report::ok(
        json!({"state": label, "path": args.out.display().to_string()}),
        format!("wrote {label} to {}", args.out.display()),
    ))
}

fn cmd_apply(args: &ApplyArgs) -> Result<Report, CliError> {
    let channel: KrausChannel = match &args.channel {
        Some(path) => read_json::<ChannelFile>(path)?.to_channel(args.tol)?,
        None => bit_flip_channel(),
    };
    let input = read_json::<StateFile>(&args.input)?.to_state(args.tol)?;
    let output = channel.apply_extended(&input)?;
    write_json(&args.out, &StateFile::from_state(&output))?;
    Ok(Report::ok(
        json!({"path": args.out.display().to_string()}),
        format!("wrote channel output to {}", args.out.display()),
    ))
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Faithful(src) => cmd_faithful(src),
        Command::EntangleCheck(src) => cmd_entangle_check(src),
        Command::Extract(args) => cmd_extract(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::BoundSweep(args) => cmd_bound_sweep(args),
        Command::Catalog => Ok(cmd_catalog()),
        Command::Export(args) => cmd_export(args),
        Command::Apply(args) => cmd_apply(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.payload).expect("serializable"));
            } else {
                println!("{}", report.human);
            }
            ExitCode::from(report.exit)
        }
        Err(err) => {
            if cli.json {
                println!("{}", json!({"error": err.message(), "exit_code": err.exit_code()}));
            }
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
