use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use super::config::{MethodSpec, Mode, StopRule, TrialConfig};
use super::trial::{run_trial_on, TrialResult};
use crate::data::Split;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "method,seed,steps_run,steps_to_target,final_test_acc,best_test_acc,failed";

/// A batch of trials over several methods.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub methods: Vec<MethodSpec>,
    pub trials: usize,
    pub base_seed: u64,
    /// Settings shared by every trial; `method` and `seed` are overwritten.
    pub template: TrialConfig,
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn mode(&self) -> Mode {
        match self.template.stop {
            StopRule::FixedSteps => Mode::FixedSteps,
            StopRule::Target { .. } => Mode::StepsToTarget,
        }
    }

    /// Trial configs ordered by (method, seed).
    pub fn trial_configs(&self) -> Vec<TrialConfig> {
        self.methods
            .iter()
            .flat_map(|m| {
                (0..self.trials as u64).map(move |k| TrialConfig {
                    method: m.clone(),
                    seed: self.base_seed + k,
                    ..self.template.clone()
                })
            })
            .collect()
    }
}

/// Aggregates for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub trials: usize,
    pub failed: usize,
    /// Mean of per-trial final test accuracy over successful trials.
    pub mean_final_test_acc: f64,
    /// Mean of per-trial best test accuracy over successful trials.
    pub mean_best_test_acc: f64,
    /// Largest final test accuracy of any trial.
    pub best_final_test_acc: f64,
    /// Trials that reached the target.
    pub reached: usize,
    /// Mean steps-to-target over the trials that reached it.
    pub mean_steps_to_target: Option<f64>,
    /// Mean steps-to-target counting capped trials at the cap, a lower
    /// bound on the true mean.
    pub mean_steps_censored: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub methods: Vec<MethodSummary>,
}

impl ExperimentSummary {
    pub fn get(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == label)
    }
}

/// Runs every (method, seed) trial on shared data.
///
/// With `parallel` set, trials are spread over the rayon pool; results are
/// always returned in (method, seed) order, so output does not depend on
/// scheduling.
pub fn run_experiment(config: &ExperimentConfig, data: &Split) -> Result<Vec<TrialResult>> {
    if config.trials == 0 {
        return Err(Error::invalid("an experiment needs at least one trial"));
    }
    if config.methods.is_empty() {
        return Err(Error::invalid("an experiment needs at least one method"));
    }
    let configs = config.trial_configs();
    if config.parallel {
        configs.par_iter().map(|c| run_trial_on(c, data)).collect()
    } else {
        configs.iter().map(|c| run_trial_on(c, data)).collect()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-method aggregation in first-appearance order.
pub fn summarize(results: &[TrialResult], cap: Option<usize>) -> ExperimentSummary {
    let mut labels: Vec<&str> = Vec::new();
    for r in results {
        if !labels.contains(&r.method.as_str()) {
            labels.push(&r.method);
        }
    }
    let methods = labels
        .into_iter()
        .map(|label| {
            let all: Vec<&TrialResult> = results.iter().filter(|r| r.method == label).collect();
            let ok: Vec<&TrialResult> = all.iter().copied().filter(|r| !r.failed()).collect();
            MethodSummary {
                method: label.to_string(),
                trials: all.len(),
                failed: all.len() - ok.len(),
                mean_final_test_acc: mean(ok.iter().map(|r| r.final_test_accuracy)).unwrap_or(f64::NAN),
                mean_best_test_acc: mean(ok.iter().map(|r| r.best_test_accuracy)).unwrap_or(f64::NAN),
                best_final_test_acc: ok
                    .iter()
                    .map(|r| r.final_test_accuracy)
                    .fold(f64::NAN, f64::max),
                reached: ok.iter().filter(|r| r.steps_to_target.is_some()).count(),
                mean_steps_to_target: mean(ok.iter().filter_map(|r| r.steps_to_target.map(|s| s as f64))),
                mean_steps_censored: cap.and_then(|cap| {
                    mean(ok.iter().map(|r| r.steps_to_target.unwrap_or(cap) as f64))
                }),
            }
        })
        .collect();
    ExperimentSummary { methods }
}

/// Writes one row per trial under [`CSV_HEADER`].
///
/// Accuracies use six decimals; an absent steps-to-target is an empty
/// field; failed trials have `failed = 1` and empty accuracy fields.
pub fn write_csv<W: Write>(results: &[TrialResult], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        let steps = r.steps_to_target.map(|s| s.to_string()).unwrap_or_default();
        let (fin, best) = if r.failed() {
            (String::new(), String::new())
        } else {
            (
                format!("{:.6}", r.final_test_accuracy),
                format!("{:.6}", r.best_test_accuracy),
            )
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.seed,
            r.steps_run,
            steps,
            fin,
            best,
            u8::from(r.failed())
        )?;
    }
    Ok(())
}

pub fn write_csv_file(results: &[TrialResult], path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(results, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub method: String,
    pub seed: u64,
    pub steps_run: usize,
    pub steps_to_target: Option<usize>,
    pub final_test_acc: Option<f64>,
    pub best_test_acc: Option<f64>,
    pub failed: bool,
}

fn opt_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::format("csv", format!("line {line}: bad field '{s}'")))
}

/// Parses a file produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        _ => return Err(Error::format("csv", "missing or unexpected header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::format("csv", format!("line {n}: expected 7 fields")));
        }
        let required = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::format("csv", format!("line {n}: bad field '{s}'")))
        };
        rows.push(CsvRow {
            method: f[0].to_string(),
            seed: required(f[1])?,
            steps_run: required(f[2])? as usize,
            steps_to_target: opt_field(f[3], n)?,
            final_test_acc: opt_field(f[4], n)?,
            best_test_acc: opt_field(f[5], n)?,
            failed: match f[6] {
                "0" => false,
                "1" => true,
                other => return Err(Error::format("csv", format!("line {n}: bad flag '{other}'"))),
            },
        });
    }
    Ok(rows)
}
