use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{DataSource, StopRule, TrialConfig};
use crate::data::{load_mnist, synthetic_split, BatchPlan, Dataset, Split, PIXELS};
use crate::error::{Error, Result};
use crate::nn::{accuracy, init_params_for, loss_and_grad, MNIST_LAYERS};
use crate::optim::clip_gradient_in_place;

/// Accuracies measured at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub step: usize,
    pub train_subset_acc: f64,
    pub test_acc: f64,
}

/// Why a trial stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub step: usize,
    pub detail: String,
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub method: String,
    pub seed: u64,
    pub steps_run: usize,
    /// First evaluated step whose train-subset accuracy met the target.
    pub steps_to_target: Option<usize>,
    /// Test accuracy at the last evaluation.
    pub final_test_accuracy: f64,
    /// Highest test accuracy over all evaluations.
    pub best_test_accuracy: f64,
    pub eval_trace: Vec<EvalPoint>,
    pub failure: Option<Failure>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Seed for an independent random stream of a trial.
pub(crate) fn stream_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const STREAM_BATCHES: u64 = 1;
const STREAM_EVAL_SUBSET: u64 = 2;

/// Loads the data a config points at.
pub fn load_data(source: &DataSource) -> Result<Split> {
    match source {
        DataSource::Mnist { dir, mode, split_seed } => load_mnist(dir, *mode, *split_seed),
        DataSource::Synthetic { train, test, seed } => {
            if *train == 0 || *test == 0 {
                return Err(Error::invalid("synthetic datasets must be nonempty"));
            }
            Ok(synthetic_split(*train, *test, *seed))
        }
    }
}

/// Loads the configured data and runs one trial.
pub fn run_trial(config: &TrialConfig) -> Result<TrialResult> {
    let data = load_data(&config.data)?;
    run_trial_on(config, &data)
}

/// Runs one trial on already loaded data.
///
/// Parameters are initialized from `config.seed`; batch order and the
/// train-evaluation subsample use separate streams derived from it, so the
/// result is a pure function of `(config, data)`. A non-finite loss,
/// gradient or parameter ends the trial with `failure` set rather than an
/// error.
pub fn run_trial_on(config: &TrialConfig, data: &Split) -> Result<TrialResult> {
    config.validate()?;
    if data.train.images.rows() != PIXELS {
        return Err(Error::contract("training images must have 784 pixels"));
    }
    let train = &data.train;
    let test = &data.test;

    let mut params = init_params_for(&MNIST_LAYERS, config.seed)?;
    let mut flat = params.to_flat();
    let mut state = config.method.fresh_state();
    let mut plan = BatchPlan::new(train.len(), config.batch_size, stream_seed(config.seed, STREAM_BATCHES))?;
    let subset = eval_subset(train, config.train_eval_subset, config.seed);

    let (limit, target) = match config.stop {
        StopRule::FixedSteps => (config.steps, None),
        StopRule::Target { target, cap } => (cap, Some(target)),
    };

    let mut result = TrialResult {
        method: config.method.label.clone(),
        seed: config.seed,
        steps_run: 0,
        steps_to_target: None,
        final_test_accuracy: f64::NAN,
        best_test_accuracy: f64::NAN,
        eval_trace: Vec::new(),
        failure: None,
    };

    let evaluate = |params: &_, step: usize| -> Result<EvalPoint> {
        Ok(EvalPoint {
            step,
            train_subset_acc: accuracy(params, &subset)?,
            test_acc: accuracy(params, test)?,
        })
    };
    let reached = |p: &EvalPoint| target.is_some_and(|t| p.train_subset_acc >= t);

    let first = evaluate(&params, 0)?;
    result.eval_trace.push(first);
    if reached(&first) {
        result.steps_to_target = Some(0);
    }

    let mut step = 0;
    while result.steps_to_target.is_none() && step < limit {
        let batch = plan.next_batch(train)?;
        let (loss, mut grads) = loss_and_grad(&params, &batch.images, &batch.labels)?;
        step += 1;
        if !loss.is_finite() || !grads.is_finite() {
            result.failure = Some(Failure {
                step,
                detail: format!("non-finite loss or gradient (loss = {loss})"),
            });
            break;
        }
        if let Some(threshold) = config.clip_threshold {
            clip_gradient_in_place(&mut grads, threshold)?;
        }
        if let Err(e) = state.step(&mut flat, &grads, loss) {
            result.failure = Some(Failure {
                step,
                detail: e.to_string(),
            });
            break;
        }
        if !flat.is_finite() {
            result.failure = Some(Failure {
                step,
                detail: "non-finite parameters".into(),
            });
            break;
        }
        params.load_flat(&flat)?;

        if step % config.eval_every == 0 || (target.is_none() && step == limit) {
            let point = evaluate(&params, step)?;
            result.eval_trace.push(point);
            if reached(&point) {
                result.steps_to_target = Some(step);
            }
        }
    }
    result.steps_run = step;

    if result.failure.is_none() {
        result.final_test_accuracy = result.eval_trace.last().map_or(f64::NAN, |p| p.test_acc);
        result.best_test_accuracy = result
            .eval_trace
            .iter()
            .map(|p| p.test_acc)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(result)
}

fn eval_subset(train: &Dataset, size: usize, seed: u64) -> Dataset {
    if size >= train.len() {
        return train.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, STREAM_EVAL_SUBSET));
    let mut idx = rand::seq::index::sample(&mut rng, train.len(), size).into_vec();
    idx.sort_unstable();
    train.subset(&idx, format!("{}-eval", train.name))
}
