// IDX files, the 50k/10k split and mini-batching.
//
// ```text
// cargo run --release --example mnist_data -- data/mnist
// ```
//
// Without a directory argument a small synthetic IDX set is written to a
// temporary directory and read back.

use std::path::{Path, PathBuf};

use gravilon::data::{
    load_mnist, load_mnist_pair, synthetic_raw, write_idx_images, write_idx_labels, BatchPlan,
    SplitMode, TRAIN_IMAGES, TRAIN_LABELS,
};

fn describe(dir: &Path) -> gravilon::Result<()> {
    let full = load_mnist_pair(dir.join(TRAIN_IMAGES), dir.join(TRAIN_LABELS), "train")?;
    println!("{}: {} images of {} pixels", full.name, full.len(), full.images.rows());
    println!("class counts {:?}", full.class_counts());
    if full.len() == 60_000 {
        let split = load_mnist(dir, SplitMode::Holdout, 0)?;
        println!(
            "holdout split: train {} {:?}, test {} {:?}",
            split.train.len(),
            split.train.class_counts(),
            split.test.len(),
            split.test.class_counts()
        );
        let mut plan = BatchPlan::new(split.train.len(), 256, 1)?;
        println!("batches per epoch: {}", plan.batches_per_epoch());
        let first = plan.next_batch(&split.train)?;
        println!("first batch: {} samples, indices {:?} ...", first.labels.len(), &first.indices[..5]);
    }
    Ok(())
}

pub fn run(dir: Option<PathBuf>) -> gravilon::Result<()> {
    match dir {
        Some(dir) => describe(&dir),
        None => {
            let tmp = std::env::temp_dir().join(format!("gravilon-idx-{}", std::process::id()));
            std::fs::create_dir_all(&tmp)?;
            let (raw, labels) = synthetic_raw(500, 3);
            write_idx_images(tmp.join(TRAIN_IMAGES), &raw)?;
            write_idx_labels(tmp.join(TRAIN_LABELS), &labels)?;
            let result = describe(&tmp);
            std::fs::remove_dir_all(&tmp)?;
            result
        }
    }
}

#[allow(dead_code)]
fn main() -> gravilon::Result<()> {
    run(std::env::args_os().nth(1).map(PathBuf::from))
}
