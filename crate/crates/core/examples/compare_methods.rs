// Multi-seed comparison of several methods, written as CSV.
//
// ```text
// cargo run --release --example compare_methods -- data/mnist
// ```
//
// Falls back to synthetic data when no directory is given.

use std::path::PathBuf;

use gravilon::data::SplitMode;
use gravilon::harness::{
    load_data, run_experiment, summarize, write_csv, DataSource, ExperimentConfig, MethodSpec,
    TrialConfig,
};

pub fn run(dir: Option<PathBuf>, steps: usize, trials: usize) -> gravilon::Result<()> {
    let source = match dir {
        Some(dir) => DataSource::Mnist {
            dir,
            mode: SplitMode::Holdout,
            split_seed: 0,
        },
        None => DataSource::Synthetic {
            train: 3000,
            test: 600,
            seed: 0,
        },
    };
    let mut template = TrialConfig::fixed_steps(MethodSpec::parse("gravilon")?, source);
    template.steps = steps;
    template.eval_every = steps.max(1);

    let config = ExperimentConfig {
        methods: MethodSpec::parse_list("gravilon,sgd,adam,adagrad:0.1,rmsprop")?,
        trials,
        base_seed: 0,
        parallel: true,
        template,
    };
    let data = load_data(&config.template.data)?;
    let results = run_experiment(&config, &data)?;

    let mut csv = Vec::new();
    write_csv(&results, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));

    println!();
    for m in summarize(&results, None).methods {
        println!(
            "{:<14} mean {:.4}  best {:.4}  failed {}",
            m.method, m.mean_final_test_acc, m.best_final_test_acc, m.failed
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gravilon::Result<()> {
    run(std::env::args_os().nth(1).map(PathBuf::from), 2500, 3)
}
