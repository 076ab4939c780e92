mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csmud::complexity::{analytic_bcd, analytic_cr_ebcd, analytic_ebcd, reconcile, ComplexityParams};
use csmud::harness::write_atomic;
use csmud::verify::{run_verification, VerifyOptions};
use csmud::{
    run_experiment, Constellation, ExperimentSpec, SolverKind, SolverParams, SweepAxis,
};

use settings::Settings;

#[derive(Parser)]
#[command(
    name = "csmud",
    about = "Grant-free NOMA multiuser-detection simulator",
    version
)]
struct Cli {
    /// Log verbosity on stderr: error, warn, info, debug, trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep and emit CSV/JSON result tables.
    Simulate(ScenarioArgs),
    /// Sweep one scenario axis (snr, j, sparsity, ka, tb, beta).
    Sweep(SweepArgs),
    /// Run the self-verification suite.
    Verify(VerifyArgs),
    /// Evaluate the complex-multiplication budgets, optionally against
    /// instrumented runs.
    Complexity(ComplexityArgs),
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// SNR points in dB, comma separated.
    #[arg(long, value_name = "DB,...", allow_hyphen_values = true)]
    snr: Option<String>,
    /// Detectors to run, comma separated
    /// (bcd, ebcd, cr-ebcd, oracle-bcd, oracle-cr-ebcd, oracle-ls).
    #[arg(long)]
    solvers: Option<String>,
    /// Frames per sweep point.
    #[arg(long)]
    frames: Option<usize>,
    /// Base seed; trial seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Total users.
    #[arg(long)]
    k: Option<usize>,
    /// Subcarriers / spreading length.
    #[arg(long)]
    n: Option<usize>,
    /// Slots per frame.
    #[arg(long)]
    j: Option<usize>,
    /// Active-user range, `lo,hi` or a single value.
    #[arg(long)]
    sparsity: Option<String>,
    /// Row-regularization weight.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Total sweeps.
    #[arg(long)]
    t: Option<usize>,
    /// Pruning sweeps.
    #[arg(long)]
    tb: Option<usize>,
    /// Users discarded per pruning sweep, comma separated.
    #[arg(long)]
    psi: Option<String>,
    /// Activity threshold: `auto`, one value, or one value per point.
    #[arg(long)]
    vth: Option<String>,
    /// Channel drift coefficient.
    #[arg(long)]
    beta: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Axis to sweep: snr, j, sparsity, ka, tb, beta.
    #[arg(long = "sweep", value_name = "AXIS")]
    axis: String,
    /// Axis values, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to small instances (finishes in seconds).
    #[arg(long)]
    small: bool,
    /// Test hook: disable the interference cache so the equivalence checks
    /// must fail.
    #[arg(long)]
    inject_fault: bool,
    #[arg(long, default_value_t = 0x51_0e_71)]
    seed: u64,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long, default_value_t = 200)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    j: usize,
    #[arg(long, default_value_t = 12)]
    t: usize,
    /// Pruning sweeps; defaults to min(8, t).
    #[arg(long)]
    tb: Option<usize>,
    /// Users discarded per pruning sweep; defaults to an even schedule down
    /// to max(1, k/5) survivors.
    #[arg(long)]
    psi: Option<String>,
    /// Support size charged to the LS refinement.
    #[arg(long, default_value_t = 20)]
    s: usize,
    /// Also run one instrumented frame per algorithm and report deviations.
    #[arg(long)]
    measure: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum CliError {
    Config(String),
    Runtime(String),
    ChecksFailed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::ChecksFailed => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .target(env_logger::Target::Stderr)
        .init();

    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Complexity(args) => cmd_complexity(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(msg) => eprintln!("config error: {msg}"),
                CliError::Runtime(msg) => eprintln!("error: {msg}"),
                CliError::ChecksFailed => eprintln!("verification failed"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn build_settings(args: &ScenarioArgs) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &args.config {
        s.apply_file(path).map_err(CliError::Config)?;
    }
    for pair in &args.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
        s.apply(key.trim(), value.trim()).map_err(CliError::Config)?;
    }
    let mut flag = |key: &str, value: Option<String>| -> Result<(), CliError> {
        if let Some(v) = value {
            s.apply(key, &v).map_err(CliError::Config)?;
        }
        Ok(())
    };
    flag("snr", args.snr.clone())?;
    flag("solvers", args.solvers.clone())?;
    flag("frames", args.frames.map(|v| v.to_string()))?;
    flag("seed", args.seed.map(|v| v.to_string()))?;
    flag("k", args.k.map(|v| v.to_string()))?;
    flag("n", args.n.map(|v| v.to_string()))?;
    flag("j", args.j.map(|v| v.to_string()))?;
    flag("sparsity", args.sparsity.clone())?;
    flag("lambda0", args.lambda0.map(|v| v.to_string()))?;
    flag("t", args.t.map(|v| v.to_string()))?;
    flag("tb", args.tb.map(|v| v.to_string()))?;
    flag("psi", args.psi.clone())?;
    flag("vth", args.vth.clone())?;
    flag("beta", args.beta.map(|v| v.to_string()))?;
    flag("threads", args.threads.map(|v| v.to_string()))?;
    if let Some(out) = &args.out {
        s.out = out.clone();
    }
    if s.threads > 0 {
        // Best effort: the pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(s.threads)
            .build_global();
    }
    Ok(s)
}

fn build_spec(s: &Settings, sweep: SweepAxis) -> Result<ExperimentSpec, CliError> {
    let base_snr = s.snr.first().copied().unwrap_or(4.0);
    let base = s.system_config(base_snr);
    base.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let params = s.solver_params().map_err(CliError::Config)?;
    params
        .validate_for(base.k)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let solvers: Vec<(SolverKind, SolverParams)> = s
        .solvers
        .iter()
        .map(|&kind| (kind, params.clone()))
        .collect();
    if solvers.is_empty() {
        return Err(CliError::Config("no solvers selected".into()));
    }
    Ok(ExperimentSpec {
        base,
        solvers,
        sweep,
        n_frames: s.frames,
        vth_policy: s.vth_policy(),
        ser_denominator: s.ser_denominator,
    })
}

fn emit(spec: &ExperimentSpec, s: &Settings, stem: &str) -> Result<(), CliError> {
    let output = run_experiment(spec).map_err(|e| CliError::Runtime(e.to_string()))?;
    let csv = output.to_csv();
    let json = output
        .to_json()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::create_dir_all(&s.out).map_err(|e| CliError::Runtime(e.to_string()))?;
    let csv_path = s.out.join(format!("{stem}.csv"));
    let json_path = s.out.join(format!("{stem}.json"));
    write_atomic(&csv_path, &csv).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&json_path, &json).map_err(|e| CliError::Runtime(e.to_string()))?;
    log::info!("wrote {} and {}", csv_path.display(), json_path.display());
    print!("{csv}");
    Ok(())
}

fn cmd_simulate(args: ScenarioArgs) -> Result<(), CliError> {
    let s = build_settings(&args)?;
    let spec = build_spec(&s, SweepAxis::SnrDb(s.snr.clone()))?;
    emit(&spec, &s, "simulate")
}

fn parse_values<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid sweep value `{v}`")))
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let s = build_settings(&args.scenario)?;
    let axis = match args.axis.as_str() {
        "snr" | "snr_db" => SweepAxis::SnrDb(parse_values(&args.values)?),
        "j" | "slots" => SweepAxis::Slots(parse_values(&args.values)?),
        "sparsity" => SweepAxis::Sparsity(parse_values(&args.values)?),
        "ka" | "ka_final" => SweepAxis::FinalCandidates(parse_values(&args.values)?),
        "tb" | "t_b" => SweepAxis::PruneIters(parse_values(&args.values)?),
        "beta" => SweepAxis::Beta(parse_values(&args.values)?),
        other => {
            return Err(CliError::Config(format!(
                "unknown sweep axis `{other}` (expected snr, j, sparsity, ka, tb, beta)"
            )))
        }
    };
    let stem = format!("sweep_{}", axis.name());
    let spec = build_spec(&s, axis)?;
    emit(&spec, &s, &stem)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let opts = VerifyOptions {
        small_only: args.small,
        inject_w_fault: args.inject_fault,
        seed: args.seed,
    };
    let report = run_verification(&opts).map_err(|e| CliError::Runtime(e.to_string()))?;
    for check in &report.checks {
        println!(
            "check {:<28} {}  deviation {:.3e}  ({})",
            check.name,
            if check.passed { "PASS" } else { "FAIL" },
            check.deviation,
            check.detail
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}

fn cmd_complexity(args: ComplexityArgs) -> Result<(), CliError> {
    let t_b = args.tb.unwrap_or_else(|| args.t.min(8));
    let psi = match &args.psi {
        Some(text) => parse_values(text)?,
        None => {
            let ka_final = (args.k / 5).max(1).min(args.k);
            SolverParams::uniform_schedule(args.k, ka_final, t_b)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    let params = ComplexityParams {
        k: args.k,
        n: args.n,
        j: args.j,
        t: args.t,
        t_b,
        psi_schedule: psi.clone(),
        s: args.s,
    };
    let analytic = [
        ("bcd", analytic_bcd(&params)),
        (
            "ebcd",
            analytic_ebcd(&params).map_err(|e| CliError::Config(e.to_string()))?,
        ),
        (
            "cr-ebcd",
            analytic_cr_ebcd(&params).map_err(|e| CliError::Config(e.to_string()))?,
        ),
    ];

    if !args.measure {
        println!("algorithm,analytic");
        for (name, value) in analytic {
            println!("{name},{value}");
        }
        return Ok(());
    }

    // One instrumented frame per algorithm at the same parameter point.
    let mut settings = Settings::default();
    settings.k = args.k;
    settings.n = args.n;
    settings.j = args.j;
    settings.t = args.t;
    settings.t_b = Some(t_b);
    settings.psi = Some(psi);
    settings.seed = args.seed;
    settings.sparsity_min = args.s.min(args.k);
    settings.sparsity_max = args.s.min(args.k);
    let cfg = settings.system_config(4.0);
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut solver_params = settings.solver_params().map_err(CliError::Config)?;
    solver_params.v_th = 0.86;
    let mut rng = csmud::RandomStream::new(cfg.seed);
    let frame = csmud::FrameInstance::generate(&cfg, &mut rng)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let constellation = Constellation::new(cfg.modulation);

    println!("algorithm,analytic,measured,rel_deviation");
    for (kind, name) in [
        (SolverKind::Bcd, "bcd"),
        (SolverKind::Ebcd, "ebcd"),
        (SolverKind::CrEbcd, "cr-ebcd"),
    ] {
        let result = csmud::solvers::detect(
            &frame.received,
            &frame.equivalent,
            kind,
            &solver_params,
            &constellation,
            Some(&frame.gamma_true),
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        let report = reconcile(&result.ledger).map_err(|e| CliError::Runtime(e.to_string()))?;
        println!(
            "{name},{},{},{:.6}",
            report.analytic_total, report.counted_total, report.total_rel_deviation
        );
    }
    Ok(())
}
