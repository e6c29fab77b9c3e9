// One training run of the 784-128-128-10 network.
//
// ```text
// cargo run --release --example train_mnist -- data/mnist gravilon 2500
// cargo run --release --example train_mnist -- synthetic adam 300
// ```

use std::path::PathBuf;

use gravilon::data::SplitMode;
use gravilon::harness::{run_trial, DataSource, MethodSpec, TrialConfig};

pub fn run(source: &str, method: &str, steps: usize) -> gravilon::Result<()> {
    let data = if source == "synthetic" {
        DataSource::Synthetic {
            train: 4000,
            test: 1000,
            seed: 0,
        }
    } else {
        DataSource::Mnist {
            dir: PathBuf::from(source),
            mode: SplitMode::Holdout,
            split_seed: 0,
        }
    };
    let mut config = TrialConfig::fixed_steps(MethodSpec::parse(method)?, data);
    config.steps = steps;
    config.eval_every = (steps / 10).max(1);

    let result = run_trial(&config)?;
    println!("{:>6} {:>10} {:>10}", "step", "train", "test");
    for p in &result.eval_trace {
        println!("{:>6} {:>10.4} {:>10.4}", p.step, p.train_subset_acc, p.test_acc);
    }
    match &result.failure {
        Some(f) => println!("diverged at step {}: {}", f.step, f.detail),
        None => println!(
            "{}: final test accuracy {:.4}, best {:.4}",
            result.method, result.final_test_accuracy, result.best_test_accuracy
        ),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gravilon::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let source = args.first().map_or("data/mnist", String::as_str);
    let method = args.get(1).map_or("gravilon", String::as_str);
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2500);
    run(source, method, steps)
}
