// Backpropagation against central finite differences.
//
// ```text
// cargo run --release --example gradient_check
// ```

use gravilon::data::synthetic_dataset;
use gravilon::nn::{grad_check, grad_check_against, init_params, loss_and_grad, sample_coordinates, LabelBatch};

pub fn run(seeds: u64) -> gravilon::Result<()> {
    for seed in 0..seeds {
        let params = init_params(seed);
        let batch = synthetic_dataset(16, seed, "check");
        let labels = LabelBatch::digits(&batch.labels)?;
        let report = grad_check(&params, &batch.images, &labels, 1e-5, 50, seed)?;
        let (i, a, n) = report.entries[0];
        println!(
            "seed {seed}: max relative error {:.2e} (coordinate {i}: analytic {a:.6e}, numeric {n:.6e})",
            report.max_rel_error
        );
    }

    // a wrong gradient is caught
    let params = init_params(0);
    let batch = synthetic_dataset(16, 0, "check");
    let labels = LabelBatch::digits(&batch.labels)?;
    let (_, mut grads) = loss_and_grad(&params, &batch.images, &labels)?;
    let coords = sample_coordinates(params.num_params(), 50, 0);
    let victim = coords[10];
    grads.values_mut()[victim] *= 2.0;
    let report = grad_check_against(&params, &batch.images, &labels, &grads, &coords, 1e-5)?;
    println!(
        "doubled coordinate {victim}: max relative error {:.3} at {}",
        report.max_rel_error, report.worst_index
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> gravilon::Result<()> {
    run(10)
}
