use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::{LabelBatch, Matrix};

pub const DEFAULT_BATCH_SIZE: usize = 256;

/// One mini-batch: images as columns plus labels.
#[derive(Debug, Clone)]
pub struct Batch {
    pub images: Matrix,
    pub labels: LabelBatch,
    pub indices: Vec<usize>,
}

/// Sampling without replacement, reshuffled every epoch.
///
/// The final batch of an epoch holds whatever indices remain, so it may be
/// smaller than `batch_size`.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    batch_size: usize,
    order: Vec<usize>,
    cursor: usize,
    epoch: usize,
    rng: ChaCha8Rng,
}

impl BatchPlan {
    pub fn new(len: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("cannot batch an empty dataset"));
        }
        if batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut rng);
        Ok(BatchPlan {
            batch_size,
            order,
            cursor: 0,
            epoch: 0,
            rng,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Completed passes over the data.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Batches per epoch.
    pub fn batches_per_epoch(&self) -> usize {
        self.order.len().div_ceil(self.batch_size)
    }

    /// Indices of the next batch.
    pub fn next_indices(&mut self) -> Vec<usize> {
        if self.cursor == self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
            self.epoch += 1;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let out = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        out
    }

    /// Gathers the next batch from `train`.
    pub fn next_batch(&mut self, train: &Dataset) -> Result<Batch> {
        if train.len() != self.order.len() {
            return Err(Error::contract(format!(
                "plan covers {} samples but dataset has {}",
                self.order.len(),
                train.len()
            )));
        }
        let indices = self.next_indices();
        let labels: Vec<u8> = indices.iter().map(|&i| train.labels[i]).collect();
        Ok(Batch {
            images: train.images.select_columns(&indices),
            labels: LabelBatch::digits(&labels)?,
            indices,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_of_50000_in_batches_of_256() {
        let mut plan = BatchPlan::new(50_000, 256, 1).unwrap();
        assert_eq!(plan.batches_per_epoch(), 196);
        let mut seen = vec![false; 50_000];
        let mut sizes = Vec::new();
        for _ in 0..196 {
            let b = plan.next_indices();
            sizes.push(b.len());
            for i in b {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert!(sizes[..195].iter().all(|&s| s == 256));
        assert_eq!(sizes[195], 80);
        assert_eq!(plan.epoch(), 0);
        plan.next_indices();
        assert_eq!(plan.epoch(), 1);
    }

    #[test]
    fn reshuffles_between_epochs() {
        let mut plan = BatchPlan::new(100, 100, 2).unwrap();
        let first = plan.next_indices();
        let second = plan.next_indices();
        assert_ne!(first, second);
        let mut sorted = second.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = BatchPlan::new(1000, 64, 9).unwrap();
        let mut b = BatchPlan::new(1000, 64, 9).unwrap();
        for _ in 0..40 {
            assert_eq!(a.next_indices(), b.next_indices());
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(matches!(BatchPlan::new(0, 256, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn batch_gathers_columns() {
        let ds = crate::data::synthetic_dataset(10, 3, "s");
        let mut plan = BatchPlan::new(10, 4, 0).unwrap();
        let b = plan.next_batch(&ds).unwrap();
        assert_eq!(b.images.shape(), (784, 4));
        for (j, &i) in b.indices.iter().enumerate() {
            assert_eq!(b.images.col(j), ds.images.col(i));
            assert_eq!(b.labels.labels[j], ds.labels[i]);
        }
    }
}
