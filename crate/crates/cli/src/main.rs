//! `brunovsky`: staircase reduction, Brunovsky transformations and the
//! method comparison benchmark from the command line.
//!
//! Exit codes: 0 success, 2 bad input or flags, 3 uncontrollable system,
//! 4 numerical failure.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brunovsky::document::{to_rows, SystemDocument};
use brunovsky::transform::diagnostics;
use brunovsky::{
    index_summary, luenberger_pipeline, proposed_pipeline, reduce_to_staircase, Diagnostics, IndexSummary,
    LinearSystem, OptimizerSettings, ProposedOptions, TransformTriple,
};
use brunovsky_bench::{random_parameters, run_benchmark, write_all, BenchConfig, GeneratorKind, Method};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

const OUT_DIR_ENV: &str = "BRUNOVSKY_OUT_DIR";

#[derive(Parser)]
#[command(name = "brunovsky", version, about = "Numerically reliable Brunovsky canonical forms")]
struct Cli {
    /// JSON file with optimizer and benchmark defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a system to staircase form and report its indices.
    Staircase(StaircaseArgs),
    /// Compute a Brunovsky transformation (T, F, G).
    Transform(TransformArgs),
    /// Compare the proposed method with Luenberger's on random systems.
    Bench(BenchArgs),
}

#[derive(Args)]
struct StaircaseArgs {
    /// System document `{"n", "m", "A", "B"}`.
    input: PathBuf,
    /// Output file (default: `<stem>.staircase.json` in the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    input: PathBuf,
    #[arg(long, default_value = "proposed")]
    method: Method,
    /// Skip the deadbeat pre-processing (proposed method only).
    #[arg(long)]
    no_deadbeat: bool,
    /// Skip the condition-number optimization (proposed method only).
    #[arg(long)]
    no_optimize: bool,
    /// Start from seeded random parameters instead of the default ones.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: `<stem>.<method>.json` in the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Controllability indices, comma separated, non-increasing.
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    /// Conditioning sweep `lo:hi`.
    #[arg(long)]
    cond_range: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Methods to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// `feedback` (sweep targets kappa of the controllability matrix) or
    /// `state` (sweep targets kappa of the state transformation).
    #[arg(long)]
    generator: Option<GeneratorKind>,
    /// Condition number of the hidden state transformation (feedback generator).
    #[arg(long)]
    state_cond: Option<f64>,
    /// Record wall-clock time per run (the CSV is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Output directory (default: the output directory, then `bench-out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    optimizer: Option<OptimizerSettings>,
    bench: Option<BenchConfig>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Uncontrollable(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Uncontrollable(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) | CliError::Uncontrollable(s) | CliError::Numerical(s) => f.write_str(s),
        }
    }
}

impl From<brunovsky::Error> for CliError {
    fn from(e: brunovsky::Error) -> Self {
        use brunovsky::Error as E;
        match e {
            E::Uncontrollable { .. } => CliError::Uncontrollable(e.to_string()),
            E::SingularD { .. } => CliError::Numerical(format!("{e}; try another --seed")),
            E::SingularT { .. } | E::SingularInput | E::SvdFailed | E::TemplateViolation { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<brunovsky_bench::BenchError> for CliError {
    fn from(e: brunovsky_bench::BenchError) -> Self {
        match e {
            brunovsky_bench::BenchError::Core(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_system(path: &Path) -> Result<LinearSystem<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let doc: SystemDocument =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(doc.to_system()?)
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn default_out(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("system");
    out_dir().join(format!("{stem}.{suffix}.json"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Input(format!("{}: {e}", parent.display())))?;
    }
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct StaircaseReport {
    weyr: Vec<usize>,
    mu: Vec<usize>,
    indices: IndexSummary,
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    #[serde(rename = "A_s")]
    a_s: Vec<Vec<f64>>,
    #[serde(rename = "B_s")]
    b_s: Vec<Vec<f64>>,
}

fn cmd_staircase(args: &StaircaseArgs) -> Result<String, CliError> {
    let sys = read_system(&args.input)?;
    let st = reduce_to_staircase(&sys)?;
    let idx = index_summary(&st)?;
    let out = args.out.clone().unwrap_or_else(|| default_out(&args.input, "staircase"));
    let report = StaircaseReport {
        weyr: st.weyr.clone(),
        mu: idx.mu.clone(),
        indices: idx.clone(),
        u: to_rows(&st.u),
        a_s: to_rows(&st.a),
        b_s: to_rows(&st.b),
    };
    write_json(&out, &report)?;
    Ok(format!(
        "staircase: n={} m={} weyr={:?} mu={:?} -> {}",
        sys.n(),
        sys.m(),
        st.weyr,
        idx.mu,
        out.display()
    ))
}

#[derive(Serialize)]
struct OptimizerReport {
    initial_objective: f64,
    final_objective: f64,
    accepted_steps: usize,
}

#[derive(Serialize)]
struct BaselineReport {
    kappa_ctrb_bar: f64,
    template_residual: f64,
}

#[derive(Serialize)]
struct TransformReport {
    method: Method,
    mu: Vec<usize>,
    #[serde(rename = "T")]
    t: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    f: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    /// Recomputed from `(A, B)` and the written triple.
    residuals: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer: Option<OptimizerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineReport>,
}

fn cmd_transform(args: &TransformArgs, config: &ConfigFile) -> Result<String, CliError> {
    if args.method == Method::Luenberger && (args.no_deadbeat || args.no_optimize || args.seed.is_some()) {
        return Err(CliError::Input(
            "--no-deadbeat, --no-optimize and --seed apply to the proposed method only".into(),
        ));
    }
    let sys = read_system(&args.input)?;
    let (triple, optimizer, baseline): (TransformTriple<f64>, _, _) = match args.method {
        Method::Proposed => {
            let mut opts = ProposedOptions {
                deadbeat: !args.no_deadbeat,
                optimize: !args.no_optimize,
                optimizer: config.optimizer.unwrap_or_default(),
                init: None,
            };
            if let Some(seed) = args.seed {
                let idx = index_summary(&reduce_to_staircase(&sys)?)?;
                opts.init = Some(random_parameters(&idx, seed));
            }
            let out = proposed_pipeline(&sys, &opts)?;
            let opt = (!out.trace.is_empty()).then(|| OptimizerReport {
                initial_objective: out.trace[0],
                final_objective: out.trace[out.trace.len() - 1],
                accepted_steps: out.trace.len() - 1,
            });
            (out.triple, opt, None)
        }
        Method::Luenberger => {
            let out = luenberger_pipeline(&sys)?;
            let base = BaselineReport {
                kappa_ctrb_bar: out.kappa_ctrb_bar,
                template_residual: out.template_residual,
            };
            (out.triple, None, Some(base))
        }
    };
    // Independent check of what is written, not the pipeline's own numbers.
    let residuals = diagnostics(sys.a(), sys.b(), &triple);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_out(&args.input, args.method.as_str()));
    let report = TransformReport {
        method: args.method,
        mu: triple.mu.clone(),
        t: to_rows(&triple.t),
        f: to_rows(&triple.f),
        g: to_rows(&triple.g),
        residuals,
        optimizer,
        baseline,
    };
    write_json(&out, &report)?;
    Ok(format!(
        "transform ({}): mu={:?} residuals A {:.2e} B {:.2e} kappa(T) {:.2e} kappa(G) {:.2e} -> {}",
        args.method,
        triple.mu,
        residuals.residual_a,
        residuals.residual_b,
        residuals.kappa_t,
        residuals.kappa_g,
        out.display()
    ))
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Input(format!("--cond-range expects lo:hi, got `{s}`"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn bench_config(args: &BenchArgs, file: &ConfigFile) -> Result<BenchConfig, CliError> {
    let mut c = file.bench.clone().unwrap_or_default();
    if let Some(opt) = file.optimizer {
        c.optimizer = opt;
    }
    if let Some(v) = args.trials {
        c.trials = v;
    }
    if let Some(v) = args.n {
        c.n = v;
    }
    if let Some(v) = args.m {
        c.m = v;
    }
    if let Some(v) = &args.indices {
        c.indices = v.clone();
    }
    if let Some(v) = &args.cond_range {
        c.cond_range = parse_range(v)?;
    }
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = &args.methods {
        c.methods = v.clone();
    }
    if let Some(v) = args.generator {
        c.generator = v;
    }
    if let Some(v) = args.state_cond {
        c.state_cond = v;
    }
    c.timing |= args.timing;
    c.validate()?;
    Ok(c)
}

fn cmd_bench(args: &BenchArgs, file: &ConfigFile) -> Result<String, CliError> {
    let config = bench_config(args, file)?;
    let dir = args.out.clone().unwrap_or_else(|| match std::env::var_os(OUT_DIR_ENV) {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from("bench-out"),
    });
    let result = run_benchmark(&config)?;
    let files = write_all(&result, &dir)?;
    let medians: Vec<String> = result
        .summary
        .methods
        .iter()
        .map(|s| {
            let med = s.err_total.as_ref().map_or(f64::NAN, |q| q.median);
            format!("{} median error {med:.2e} ({} failed)", s.method, s.failed)
        })
        .collect();
    Ok(format!(
        "bench: {} trials, {} -> {}",
        config.trials,
        medians.join(", "),
        files.csv.display()
    ))
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let config = read_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Staircase(a) => cmd_staircase(a),
        Command::Transform(a) => cmd_transform(a, &config),
        Command::Bench(a) => cmd_bench(a, &config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
