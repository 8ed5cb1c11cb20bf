//! Blocked (instance, seed) lists.
//!
//! Every evaluation within one configurator run reads its runs from the same
//! list, so any two configurations compared on their first `N` runs see
//! exactly the same instances and seeds. The list is built batch by batch:
//! each batch is a fresh random permutation of the training set, and every
//! entry gets an independently drawn seed. It grows on demand; the instance
//! order and the seeds come from separate streams, so the contents of a
//! prefix never depend on how far the list has been extended.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyTrainingSet;

impl core::fmt::Display for EmptyTrainingSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("the training set is empty")
    }
}

impl core::error::Error for EmptyTrainingSet {}

#[derive(Debug, Clone)]
pub struct InstanceSeedList {
    training_size: usize,
    /// pinned seed per training instance, if any
    fixed_seeds: Vec<Option<u32>>,
    pairs: Vec<(usize, u32)>,
    batch: Vec<usize>,
    order_rng: ChaCha8Rng,
    seed_rng: ChaCha8Rng,
}

impl InstanceSeedList {
    pub fn new(
        training_size: usize,
        order_rng: ChaCha8Rng,
        seed_rng: ChaCha8Rng,
    ) -> Result<Self, EmptyTrainingSet> {
        Self::with_fixed_seeds(alloc::vec![None; training_size], order_rng, seed_rng)
    }

    /// Like [`InstanceSeedList::new`], but instances with a pinned seed always
    /// run with it.
    pub fn with_fixed_seeds(
        fixed_seeds: Vec<Option<u32>>,
        order_rng: ChaCha8Rng,
        seed_rng: ChaCha8Rng,
    ) -> Result<Self, EmptyTrainingSet> {
        if fixed_seeds.is_empty() {
            return Err(EmptyTrainingSet);
        }
        Ok(InstanceSeedList {
            training_size: fixed_seeds.len(),
            fixed_seeds,
            pairs: Vec::new(),
            batch: Vec::new(),
            order_rng,
            seed_rng,
        })
    }

    /// Builds a list of `target_length` pairs from one seed.
    pub fn build(training_size: usize, target_length: usize, seed: u64) -> Result<Self, EmptyTrainingSet> {
        let mut order = ChaCha8Rng::seed_from_u64(seed);
        order.set_stream(0);
        let mut seeds = ChaCha8Rng::seed_from_u64(seed);
        seeds.set_stream(1);
        let mut list = Self::new(training_size, order, seeds)?;
        list.ensure(target_length);
        Ok(list)
    }

    pub fn training_size(&self) -> usize {
        self.training_size
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Extends the list to at least `length` pairs.
    pub fn ensure(&mut self, length: usize) {
        while self.pairs.len() < length {
            if self.batch.is_empty() {
                let mut perm: Vec<usize> = (0..self.training_size).collect();
                perm.shuffle(&mut self.order_rng);
                perm.reverse();
                self.batch = perm;
            }
            let inst = self.batch.pop().expect("batch refilled above");
            let drawn: u32 = self.seed_rng.gen();
            let seed = self.fixed_seeds[inst].unwrap_or(drawn);
            self.pairs.push((inst, seed));
        }
    }

    /// `(training instance index, seed)` at 1-based position `index`,
    /// extending the list if needed.
    pub fn pair(&mut self, index: usize) -> (usize, u32) {
        assert!(index >= 1, "positions are 1-based");
        self.ensure(index);
        self.pairs[index - 1]
    }

    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.pairs
    }
}
