use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::data::{SplitMode, DEFAULT_BATCH_SIZE};
use crate::error::{Error, Result};
use crate::optim::{HyperParams, Method, OptimizerState};

/// A method plus its hyperparameters and the label used in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub hyper: HyperParams,
    pub label: String,
}

impl MethodSpec {
    /// `method` with its benchmark defaults.
    pub fn new(method: Method) -> Self {
        MethodSpec {
            method,
            hyper: HyperParams::defaults_for(method),
            label: method.name().to_string(),
        }
    }

    /// `method` with learning rate `alpha`, labelled `name:alpha`.
    pub fn with_alpha(method: Method, alpha: f64) -> Self {
        MethodSpec {
            method,
            hyper: HyperParams::defaults_for(method).with_alpha(alpha),
            label: format!("{}:{}", method.name(), alpha),
        }
    }

    /// Parses `name` or `name:learning_rate`, e.g. `adagrad:0.01`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, alpha) = match text.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        let method = Method::from_name(name)
            .ok_or_else(|| Error::invalid(format!("unknown method '{name}'")))?;
        match alpha {
            None => Ok(MethodSpec::new(method)),
            Some(_) if !method.uses_learning_rate() => Err(Error::invalid(format!(
                "{method} has no learning rate to set"
            ))),
            Some(a) => {
                let alpha: f64 = a
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad learning rate '{a}'")))?;
                if alpha <= 0.0 || !alpha.is_finite() {
                    return Err(Error::invalid(format!("learning rate must be positive, got {alpha}")));
                }
                Ok(MethodSpec::with_alpha(method, alpha))
            }
        }
    }

    /// Comma-separated list of specs.
    pub fn parse_list(text: &str) -> Result<Vec<Self>> {
        let specs = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(MethodSpec::parse)
            .collect::<Result<Vec<_>>>()?;
        if specs.is_empty() {
            return Err(Error::invalid("no methods given"));
        }
        Ok(specs)
    }

    pub fn fresh_state(&self) -> OptimizerState {
        OptimizerState::new(self.method, self.hyper)
    }
}

/// Where training and evaluation images come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Mnist {
        dir: PathBuf,
        mode: SplitMode,
        split_seed: u64,
    },
    /// Generated offline; see [`crate::data::synthetic_split`].
    Synthetic { train: usize, test: usize, seed: u64 },
}

/// When a trial stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Train for exactly `TrialConfig::steps` updates.
    FixedSteps,
    /// Train until the train-subset accuracy reaches `target`, or `cap` steps.
    Target { target: f64, cap: usize },
}

pub const DEFAULT_STEPS: usize = 2500;
pub const DEFAULT_CLIP: f64 = 1.0;
pub const DEFAULT_TARGET: f64 = 0.95;
pub const DEFAULT_CAP: usize = 20_000;
pub const DEFAULT_EVAL_SUBSET: usize = 2048;
pub const DEFAULT_TARGET_EVAL_EVERY: usize = 10;
pub const DEFAULT_FIXED_EVAL_EVERY: usize = 100;
pub const DEFAULT_TRIALS: usize = 15;

/// Everything that determines one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub method: MethodSpec,
    /// Update count in fixed-steps mode; ignored when stopping on a target.
    pub steps: usize,
    pub batch_size: usize,
    /// Global-norm clip threshold; `None` disables clipping.
    pub clip_threshold: Option<f64>,
    pub seed: u64,
    pub eval_every: usize,
    pub train_eval_subset: usize,
    pub stop: StopRule,
    pub data: DataSource,
}

impl TrialConfig {
    /// Accuracy after a fixed number of steps: 2500 steps, batch 256,
    /// clip 1, evaluation every 100 steps.
    pub fn fixed_steps(method: MethodSpec, data: DataSource) -> Self {
        TrialConfig {
            method,
            steps: DEFAULT_STEPS,
            batch_size: DEFAULT_BATCH_SIZE,
            clip_threshold: Some(DEFAULT_CLIP),
            seed: 0,
            eval_every: DEFAULT_FIXED_EVAL_EVERY,
            train_eval_subset: DEFAULT_EVAL_SUBSET,
            stop: StopRule::FixedSteps,
            data,
        }
    }

    /// Steps until 95% accuracy on a 2048-image training subsample,
    /// checked every 10 steps and capped at 20000.
    pub fn steps_to_target(method: MethodSpec, data: DataSource) -> Self {
        TrialConfig {
            eval_every: DEFAULT_TARGET_EVAL_EVERY,
            stop: StopRule::Target {
                target: DEFAULT_TARGET,
                cap: DEFAULT_CAP,
            },
            ..TrialConfig::fixed_steps(method, data)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if self.eval_every == 0 {
            return Err(Error::invalid("eval_every must be positive"));
        }
        if self.train_eval_subset == 0 {
            return Err(Error::invalid("train_eval_subset must be positive"));
        }
        if let Some(c) = self.clip_threshold {
            if c <= 0.0 || c.is_nan() {
                return Err(Error::invalid(format!("clip threshold must be positive, got {c}")));
            }
        }
        if let StopRule::Target { target, .. } = self.stop {
            if !(0.0..=1.0).contains(&target) {
                return Err(Error::invalid(format!("target {target} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Experiment mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FixedSteps,
    StepsToTarget,
}

/// Flat settings behind the CLI and `key=value` config files.
///
/// Every field has a default; a config file overrides defaults and command
/// line flags override the file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub methods: String,
    pub trials: usize,
    pub steps: usize,
    pub batch: usize,
    pub clip: f64,
    pub seed: u64,
    pub data_dir: PathBuf,
    pub split: SplitMode,
    pub split_seed: u64,
    pub synthetic: bool,
    pub synthetic_train: usize,
    pub synthetic_test: usize,
    pub target: f64,
    pub cap: usize,
    pub eval_every: Option<usize>,
    pub eval_subset: usize,
    pub parallel: bool,
    pub out: PathBuf,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            methods: "gravilon".into(),
            trials: DEFAULT_TRIALS,
            steps: DEFAULT_STEPS,
            batch: DEFAULT_BATCH_SIZE,
            clip: DEFAULT_CLIP,
            seed: 0,
            data_dir: PathBuf::from("data/mnist"),
            split: SplitMode::Holdout,
            split_seed: 0,
            synthetic: false,
            synthetic_train: 5000,
            synthetic_test: 1000,
            target: DEFAULT_TARGET,
            cap: DEFAULT_CAP,
            eval_every: None,
            eval_subset: DEFAULT_EVAL_SUBSET,
            parallel: true,
            out: PathBuf::from("results.csv"),
        }
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format("config", format!("line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::format("config", format!("bad value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(Error::format("config", format!("bad value '{value}' for {key}"))),
    }
}

impl RunSettings {
    /// Applies parsed `key=value` pairs. Unknown keys are an error.
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in kv {
            match k.as_str() {
                "methods" => self.methods = v.clone(),
                "trials" => self.trials = parse_field(k, v)?,
                "steps" => self.steps = parse_field(k, v)?,
                "batch" => self.batch = parse_field(k, v)?,
                "clip" => self.clip = parse_field(k, v)?,
                "seed" => self.seed = parse_field(k, v)?,
                "data_dir" => self.data_dir = PathBuf::from(v),
                "split" => {
                    self.split = SplitMode::from_name(v)
                        .ok_or_else(|| Error::format("config", format!("bad split '{v}'")))?
                }
                "split_seed" => self.split_seed = parse_field(k, v)?,
                "synthetic" => self.synthetic = parse_bool(k, v)?,
                "synthetic_train" => self.synthetic_train = parse_field(k, v)?,
                "synthetic_test" => self.synthetic_test = parse_field(k, v)?,
                "target" => self.target = parse_field(k, v)?,
                "cap" => self.cap = parse_field(k, v)?,
                "eval_every" => self.eval_every = Some(parse_field(k, v)?),
                "eval_subset" => self.eval_subset = parse_field(k, v)?,
                "parallel" => self.parallel = parse_bool(k, v)?,
                "out" => self.out = PathBuf::from(v),
                other => {
                    return Err(Error::format("config", format!("unknown key '{other}'")));
                }
            }
        }
        Ok(())
    }

    pub fn data_source(&self) -> DataSource {
        if self.synthetic {
            DataSource::Synthetic {
                train: self.synthetic_train,
                test: self.synthetic_test,
                seed: self.split_seed,
            }
        } else {
            DataSource::Mnist {
                dir: self.data_dir.clone(),
                mode: self.split,
                split_seed: self.split_seed,
            }
        }
    }

    /// Per-trial template for `mode`; `method` and `seed` are filled per trial.
    pub fn trial_template(&self, mode: Mode) -> TrialConfig {
        let placeholder = MethodSpec::new(Method::Gravilon);
        let mut cfg = match mode {
            Mode::FixedSteps => TrialConfig::fixed_steps(placeholder, self.data_source()),
            Mode::StepsToTarget => {
                let mut c = TrialConfig::steps_to_target(placeholder, self.data_source());
                c.stop = StopRule::Target {
                    target: self.target,
                    cap: self.cap,
                };
                c
            }
        };
        cfg.steps = self.steps;
        cfg.batch_size = self.batch;
        cfg.clip_threshold = (self.clip > 0.0).then_some(self.clip);
        cfg.train_eval_subset = self.eval_subset;
        if let Some(e) = self.eval_every {
            cfg.eval_every = e;
        }
        cfg
    }

    /// All effective settings as `key=value` lines.
    pub fn to_manifest(&self, mode: Mode) -> String {
        let mut s = String::new();
        let mode_name = match mode {
            Mode::FixedSteps => "fixed_steps",
            Mode::StepsToTarget => "steps_to_target",
        };
        let eval_every = self.trial_template(mode).eval_every;
        let _ = writeln!(s, "mode={mode_name}");
        let _ = writeln!(s, "methods={}", self.methods);
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "steps={}", self.steps);
        let _ = writeln!(s, "batch={}", self.batch);
        let _ = writeln!(s, "clip={}", self.clip);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "data_dir={}", self.data_dir.display());
        let _ = writeln!(s, "split={}", self.split.name());
        let _ = writeln!(s, "split_seed={}", self.split_seed);
        let _ = writeln!(s, "synthetic={}", self.synthetic);
        let _ = writeln!(s, "synthetic_train={}", self.synthetic_train);
        let _ = writeln!(s, "synthetic_test={}", self.synthetic_test);
        let _ = writeln!(s, "target={}", self.target);
        let _ = writeln!(s, "cap={}", self.cap);
        let _ = writeln!(s, "eval_every={eval_every}");
        let _ = writeln!(s, "eval_subset={}", self.eval_subset);
        let _ = writeln!(s, "parallel={}", self.parallel);
        let _ = writeln!(s, "out={}", self.out.display());
        s
    }
}
