//! MNIST ingestion, splitting and mini-batching.
//!
//! Real MNIST is read from the four uncompressed IDX files in a directory;
//! nothing is downloaded. [`synthetic_split`] builds an offline stand-in
//! with the same shapes.

mod batch;
mod dataset;
pub mod idx;

pub use batch::{Batch, BatchPlan, DEFAULT_BATCH_SIZE};
pub use dataset::{
    load_mnist, load_mnist_pair, normalize, random_partition, split, synthetic_dataset,
    synthetic_raw, synthetic_split, Dataset, Split, SplitMode, MNIST_TRAIN_COUNT, PIXELS,
    SPLIT_TRAIN, TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS,
};
pub use idx::{load_idx_images, load_idx_labels, write_idx_images, write_idx_labels, RawImages};
