//! Command-line front end for the benchmark harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error, 3 divergence.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gravilon::data::{synthetic_dataset, Dataset};
use gravilon::harness::{
    load_data, parse_key_values, run_experiment, summarize, write_csv_file, ExperimentConfig,
    MethodSpec, Mode, RunSettings, StopRule,
};
use gravilon::nn::{grad_check, init_params, LabelBatch};
use gravilon::optim::{HyperParams, Method, OptimizerState};
use gravilon::testbed::{geometric_rate, run_descent, Objective};
use gravilon::Error;

#[derive(Parser)]
#[command(name = "gravilon", version, about = "Gravilon optimizer benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test accuracy after a fixed number of steps.
    Accuracy(AccuracyArgs),
    /// Steps until a training-accuracy target is reached.
    Steps(StepsArgs),
    /// Run an optimizer on an analytic objective.
    Testbed(TestbedArgs),
    /// Compare backpropagation against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// key=value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated methods, e.g. gravilon,sgd,adagrad:0.01
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Global-norm clip threshold (0 disables clipping).
    #[arg(long)]
    clip: Option<f64>,
    /// First trial seed; trial k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding the four MNIST IDX files.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// holdout (random 50k/10k of the training file) or canonical (t10k test file).
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// Use generated data instead of MNIST.
    #[arg(long)]
    synthetic: bool,
    #[arg(long)]
    synthetic_train: Option<usize>,
    #[arg(long)]
    synthetic_test: Option<usize>,
    /// Run trials one after another.
    #[arg(long)]
    serial: bool,
    /// Output CSV; the manifest goes next to it with a .manifest extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AccuracyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    eval_every: Option<usize>,
}

#[derive(Args)]
struct StepsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    eval_subset: Option<usize>,
}

#[derive(Args)]
struct TestbedArgs {
    /// affine, quadratic or rosenbrock
    #[arg(long, default_value = "quadratic")]
    objective: String,
    /// Method name, optionally with a learning rate (sgd:0.01).
    #[arg(long, default_value = "gravilon")]
    method: String,
    /// Comma-separated start point.
    #[arg(long, default_value = "1")]
    x0: String,
    #[arg(long, default_value_t = 100)]
    max_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    stop_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 16)]
    batch: usize,
}

enum Failure {
    Usage(String),
    Data(String),
    Diverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } => Failure::Diverged(e.to_string()),
            Error::InvalidInput(_) | Error::UndefinedRate(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn settings(common: &CommonArgs) -> Result<RunSettings, Failure> {
    let mut s = RunSettings::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let kv = parse_key_values(&text).map_err(|e| Failure::Usage(e.to_string()))?;
        s.apply(&kv).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    macro_rules! take {
        ($($field:ident => $target:ident),*) => {
            $(if let Some(v) = common.$field.clone() { s.$target = v; })*
        };
    }
    take!(methods => methods, trials => trials, steps => steps, batch => batch, clip => clip,
          seed => seed, data_dir => data_dir, split_seed => split_seed,
          synthetic_train => synthetic_train, synthetic_test => synthetic_test, out => out);
    if let Some(split) = &common.split {
        s.split = gravilon::data::SplitMode::from_name(split)
            .ok_or_else(|| Failure::Usage(format!("unknown split '{split}'")))?;
    }
    if common.synthetic {
        s.synthetic = true;
    }
    if common.serial {
        s.parallel = false;
    }
    Ok(s)
}

fn run_benchmark(s: &RunSettings, mode: Mode) -> Result<(), Failure> {
    let methods = MethodSpec::parse_list(&s.methods).map_err(|e| Failure::Usage(e.to_string()))?;
    if s.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let template = s.trial_template(mode);
    template.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let data = load_data(&template.data)?;
    let cap = match template.stop {
        StopRule::Target { cap, .. } => Some(cap),
        StopRule::FixedSteps => None,
    };
    let cfg = ExperimentConfig {
        methods,
        trials: s.trials,
        base_seed: s.seed,
        template,
        parallel: s.parallel,
    };
    let results = run_experiment(&cfg, &data)?;
    write_csv_file(&results, &s.out)?;
    fs::write(s.out.with_extension("manifest"), s.to_manifest(mode)).map_err(Error::from)?;

    let summary = summarize(&results, cap);
    for m in &summary.methods {
        match mode {
            Mode::FixedSteps => println!(
                "{:<16} trials={} failed={} mean_acc={:.6} best_acc={:.6}",
                m.method, m.trials, m.failed, m.mean_final_test_acc, m.best_final_test_acc
            ),
            Mode::StepsToTarget => println!(
                "{:<16} trials={} failed={} reached={} mean_steps={} mean_acc={:.6}",
                m.method,
                m.trials,
                m.failed,
                m.reached,
                m.mean_steps_to_target
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.2}")),
                m.mean_final_test_acc
            ),
        }
    }
    println!("wrote {}", s.out.display());
    if results.iter().any(|r| r.failed()) {
        return Err(Failure::Diverged(format!(
            "{} trial(s) diverged; see the failed column",
            results.iter().filter(|r| r.failed()).count()
        )));
    }
    Ok(())
}

fn testbed(args: &TestbedArgs) -> Result<(), Failure> {
    let x0 = args
        .x0
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("bad --x0 '{}'", args.x0)))?;
    let objective = Objective::by_name(&args.objective, x0.len())
        .ok_or_else(|| Failure::Usage(format!("unknown objective '{}'", args.objective)))?;
    let spec = MethodSpec::parse(&args.method).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut state = match spec.method {
        Method::Gravilon => OptimizerState::gravilon(),
        // the testbed runs plain momentum without decay or scaling
        Method::GravilonM => OptimizerState::gravilon_momentum(0.9, 0.0, 1.0),
        m => OptimizerState::new(m, HyperParams { ..spec.hyper }),
    };
    let traj = run_descent(&objective, &mut state, &x0, args.max_steps, args.stop_tol)
        .map_err(|d| Failure::Diverged(d.to_string()))?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(Error::from)?;
            traj.write_csv(file).map_err(Error::from)?;
        }
        None => traj.write_csv(std::io::stdout().lock()).map_err(Error::from)?,
    }
    eprintln!(
        "steps={} f_final={:e} rate={}",
        traj.steps(),
        traj.last_value(),
        geometric_rate(&traj).map_or_else(|e| e.to_string(), |r| format!("{r:.6}"))
    );
    Ok(())
}

fn gradcheck(args: &GradcheckArgs) -> Result<(), Failure> {
    let params = init_params(args.seed);
    let data: Dataset = synthetic_dataset(args.batch, args.seed, "gradcheck");
    let labels = LabelBatch::digits(&data.labels)?;
    let report = grad_check(&params, &data.images, &labels, args.epsilon, args.samples, args.seed)?;
    println!(
        "checked={} max_rel_error={:.3e} worst_index={}",
        report.entries.len(),
        report.max_rel_error,
        report.worst_index
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Accuracy(a) => settings(&a.common).and_then(|mut s| {
            if a.eval_every.is_some() {
                s.eval_every = a.eval_every;
            }
            run_benchmark(&s, Mode::FixedSteps)
        }),
        Command::Steps(a) => settings(&a.common).and_then(|mut s| {
            if let Some(t) = a.target {
                s.target = t;
            }
            if let Some(c) = a.cap {
                s.cap = c;
            }
            if a.eval_every.is_some() {
                s.eval_every = a.eval_every;
            }
            if let Some(e) = a.eval_subset {
                s.eval_subset = e;
            }
            run_benchmark(&s, Mode::StepsToTarget)
        }),
        Command::Testbed(a) => testbed(a),
        Command::Gradcheck(a) => gradcheck(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Diverged(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
