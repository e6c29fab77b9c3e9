use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::idx::{load_idx_images, load_idx_labels, RawImages, IMAGE_SIDE};
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;
pub const MNIST_TRAIN_COUNT: usize = 60_000;
pub const SPLIT_TRAIN: usize = 50_000;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Labeled images, one normalized `784 × 1` column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Matrix,
    pub labels: Vec<u8>,
    pub name: String,
}

impl Dataset {
    pub fn new(images: Matrix, labels: Vec<u8>, name: impl Into<String>) -> Result<Self> {
        if images.cols() != labels.len() {
            return Err(Error::contract(format!(
                "{} images but {} labels",
                images.cols(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::invalid(format!("label {l} out of range")));
        }
        if images.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("pixel values must lie in [0, 1]"));
        }
        Ok(Dataset {
            images,
            labels,
            name: name.into(),
        })
    }

    /// Normalizes raw bytes into a dataset.
    pub fn from_raw(raw: &RawImages, labels: Vec<u8>, name: impl Into<String>) -> Result<Self> {
        if raw.count != labels.len() {
            return Err(Error::contract(format!(
                "{} images but {} labels",
                raw.count,
                labels.len()
            )));
        }
        let per = raw.pixels_per_image();
        let mut images = Matrix::zeros(per, raw.count);
        let count = raw.count;
        let data = images.data_mut();
        for (i, px) in raw.pixels.chunks_exact(per).enumerate() {
            for (p, &b) in px.iter().enumerate() {
                data[p * count + i] = f64::from(b) / 255.0;
            }
        }
        Dataset::new(images, labels, name)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Dataset {
        Dataset {
            images: self.images.select_columns(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: name.into(),
        }
    }

    /// Number of samples per class 0..=9.
    pub fn class_counts(&self) -> [usize; 10] {
        let mut counts = [0; 10];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// Pixel bytes to `[0, 1]` by dividing by 255.
pub fn normalize(raw: &[u8]) -> Vec<f64> {
    raw.iter().map(|&b| f64::from(b) / 255.0).collect()
}

/// Which held-out set to evaluate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Random 50k/10k partition of the 60k training archive.
    #[default]
    Holdout,
    /// The full 60k training archive against the official 10k test file.
    Canonical,
}

impl SplitMode {
    pub fn name(self) -> &'static str {
        match self {
            SplitMode::Holdout => "holdout",
            SplitMode::Canonical => "canonical",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "holdout" => Some(SplitMode::Holdout),
            "canonical" => Some(SplitMode::Canonical),
            _ => None,
        }
    }
}

/// Train/test pair.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Seeded uniform permutation of `0..total` cut into `(first n_train, rest)`.
pub fn random_partition(total: usize, n_train: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order.split_off(n_train.min(total));
    (order, test)
}

/// Random 50,000 / 10,000 split of the 60,000-image training archive.
pub fn split(source: &Dataset, seed: u64) -> Result<Split> {
    if source.len() != MNIST_TRAIN_COUNT {
        return Err(Error::invalid(format!(
            "split expects {MNIST_TRAIN_COUNT} samples, got {}",
            source.len()
        )));
    }
    let (train, test) = random_partition(source.len(), SPLIT_TRAIN, seed);
    Ok(Split {
        train: source.subset(&train, format!("{}-train", source.name)),
        test: source.subset(&test, format!("{}-test", source.name)),
        seed,
    })
}

pub fn load_mnist_pair(images: impl AsRef<Path>, labels: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let raw = load_idx_images(images)?;
    let labels = load_idx_labels(labels)?;
    Dataset::from_raw(&raw, labels, name)
}

/// Loads MNIST from a directory holding the four uncompressed IDX files.
pub fn load_mnist(dir: impl AsRef<Path>, mode: SplitMode, seed: u64) -> Result<Split> {
    let dir = dir.as_ref();
    let train = load_mnist_pair(dir.join(TRAIN_IMAGES), dir.join(TRAIN_LABELS), "mnist")?;
    match mode {
        SplitMode::Holdout => split(&train, seed),
        SplitMode::Canonical => {
            let test = load_mnist_pair(dir.join(TEST_IMAGES), dir.join(TEST_LABELS), "mnist-t10k")?;
            Ok(Split { train, test, seed })
        }
    }
}

/// Seed of the class prototypes shared by every synthetic dataset.
const PROTOTYPE_SEED: u64 = 0x6d6e_6973_7400;

/// Deterministic MNIST-shaped images with learnable class structure.
///
/// Each class owns a fixed random prototype of lit pixels. A sample keeps
/// each prototype pixel with probability 0.8 at a random intensity in
/// 150..=255 and lights stray pixels with probability 0.04. Prototypes are
/// shared across seeds, so datasets built with different seeds are draws
/// from the same distribution.
pub fn synthetic_raw(count: usize, seed: u64) -> (RawImages, Vec<u8>) {
    let mut proto_rng = ChaCha8Rng::seed_from_u64(PROTOTYPE_SEED);
    let prototypes: Vec<Vec<bool>> = (0..10)
        .map(|_| (0..PIXELS).map(|_| proto_rng.gen_bool(0.18)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = Vec::with_capacity(count * PIXELS);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let label: u8 = rng.gen_range(0..10);
        for &lit in &prototypes[label as usize] {
            let on = if lit { rng.gen_bool(0.8) } else { rng.gen_bool(0.04) };
            pixels.push(if on { rng.gen_range(150..=255) } else { 0 });
        }
        labels.push(label);
    }
    let raw = RawImages {
        count,
        rows: IMAGE_SIDE,
        cols: IMAGE_SIDE,
        pixels,
    };
    (raw, labels)
}

pub fn synthetic_dataset(count: usize, seed: u64, name: &str) -> Dataset {
    let (raw, labels) = synthetic_raw(count, seed);
    Dataset::from_raw(&raw, labels, name).expect("synthetic data is well formed")
}

/// Independent synthetic train and test sets.
pub fn synthetic_split(train: usize, test: usize, seed: u64) -> Split {
    Split {
        train: synthetic_dataset(train, seed, "synthetic-train"),
        test: synthetic_dataset(test, seed ^ 0x9e37_79b9_7f4a_7c15, "synthetic-test"),
        seed,
    }
}
