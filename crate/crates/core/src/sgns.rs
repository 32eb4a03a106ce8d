//! Skip-gram with negative sampling, shared by the node and document
//! embedding trainers.
//!
//! Parameters live in [`Weights`], a row-major matrix of `f32` stored as
//! relaxed atomics so several workers can apply unsynchronized updates to
//! the same rows. With a single worker every update is applied in a fixed
//! order and training is bit-for-bit reproducible.

use std::sync::atomic::{AtomicU32, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};

/// Hyperparameters for SGNS training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dimensions: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    /// Starting learning rate; decays linearly to `min_learning_rate`.
    pub learning_rate: f32,
    pub min_learning_rate: f32,
    /// Tokens seen fewer times than this are dropped from the vocabulary.
    pub min_count: usize,
    pub seed: u64,
    /// 1 is the deterministic mode; more workers trade reproducibility for
    /// speed.
    pub threads: usize,
}

impl TrainConfig {
    /// Defaults for node embeddings.
    pub fn node2vec() -> Self {
        TrainConfig {
            dimensions: 128,
            window: 10,
            negative_samples: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            min_count: 0,
            seed: crate::DEFAULT_SEED,
            threads: 1,
        }
    }

    /// Defaults for document embeddings.
    pub fn docvec() -> Self {
        TrainConfig {
            dimensions: 100,
            window: 1,
            negative_samples: 5,
            epochs: 20,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            min_count: 5,
            seed: crate::DEFAULT_SEED,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dimensions < 2 {
            return fail("dimensions must be at least 2");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.negative_samples < 1 || self.epochs < 1 || self.threads < 1 {
            return fail("negative_samples, epochs and threads must be positive");
        }
        if [self.learning_rate, self.min_learning_rate].iter().any(|r| r.is_nan() || *r <= 0.0) {
            return fail("learning rates must be positive");
        }
        Ok(())
    }

    /// `key=value` pairs recorded in model file headers.
    pub(crate) fn header_fields(&self) -> String {
        format!(
            "dimensions={} window={} negative={} epochs={} alpha={} min_alpha={} min_count={} seed={} threads={}",
            self.dimensions,
            self.window,
            self.negative_samples,
            self.epochs,
            self.learning_rate,
            self.min_learning_rate,
            self.min_count,
            self.seed,
            self.threads
        )
    }

    /// Learning rate after `done` of `total` scheduled updates.
    pub(crate) fn rate_at(&self, done: u64, total: u64) -> f32 {
        let progress = if total == 0 { 0.0 } else { done as f64 / total as f64 };
        let lr = self.learning_rate as f64 * (1.0 - progress);
        lr.max(self.min_learning_rate as f64) as f32
    }
}

/// Row-major `rows x dim` matrix with interior mutability.
pub(crate) struct Weights {
    dim: usize,
    data: Vec<AtomicU32>,
}

impl Weights {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Weights {
            dim,
            data: (0..rows * dim).map(|_| AtomicU32::new(0)).collect(),
        }
    }

    /// Uniform in `(-0.5/dim, 0.5/dim)`.
    pub fn random(rows: usize, dim: usize, rng: &mut impl Rng) -> Self {
        Weights {
            dim,
            data: (0..rows * dim)
                .map(|_| AtomicU32::new(init_component(rng, dim).to_bits()))
                .collect(),
        }
    }

    #[cfg(test)]
    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn read(&self, row: usize, out: &mut [f32]) {
        let cells = &self.data[row * self.dim..(row + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * delta`
    pub fn add(&self, row: usize, delta: &[f32], scale: f32) {
        let cells = &self.data[row * self.dim..(row + 1) * self.dim];
        for (c, d) in cells.iter().zip(delta) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn into_rows(self) -> Vec<Vec<f32>> {
        let dim = self.dim;
        let flat: Vec<f32> = self
            .data
            .into_iter()
            .map(|c| f32::from_bits(c.into_inner()))
            .collect();
        flat.chunks(dim).map(<[f32]>::to_vec).collect()
    }

    #[cfg(test)]
    pub fn from_rows(rows: &[Vec<f32>], dim: usize) -> Self {
        Weights {
            dim,
            data: rows
                .iter()
                .flat_map(|r| r.iter().map(|v| AtomicU32::new(v.to_bits())))
                .collect(),
        }
    }
}

pub(crate) fn init_component(rng: &mut impl Rng, dim: usize) -> f32 {
    (rng.gen::<f32>() - 0.5) / dim as f32
}

/// Noise distribution: unigram counts raised to the 0.75 power.
pub(crate) fn noise_table(counts: &[u64]) -> Option<AliasTable> {
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    AliasTable::new(&weights)
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x.clamp(-30.0, 30.0)).exp())
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Read/write access to a matrix of output vectors.
pub(crate) trait Rows {
    fn read(&self, row: usize, out: &mut [f32]);
    fn add(&self, row: usize, delta: &[f32], scale: f32);
}

impl Rows for Weights {
    fn read(&self, row: usize, out: &mut [f32]) {
        Weights::read(self, row, out)
    }

    fn add(&self, row: usize, delta: &[f32], scale: f32) {
        Weights::add(self, row, delta, scale)
    }
}

/// Flat row-major slice that is never written to.
pub(crate) struct Frozen<'a> {
    pub data: &'a [f32],
    pub dim: usize,
}

impl Rows for Frozen<'_> {
    fn read(&self, row: usize, out: &mut [f32]) {
        out.copy_from_slice(&self.data[row * self.dim..(row + 1) * self.dim]);
    }

    fn add(&self, _: usize, _: &[f32], _: f32) {
        unreachable!("frozen rows are read-only")
    }
}

/// One negative-sampling objective: an input vector, a shared output matrix
/// and its noise distribution.
pub(crate) struct Objective<'a, R: Rows> {
    pub output: &'a R,
    pub noise: &'a AliasTable,
    pub negatives: usize,
    /// When false, output vectors are frozen (inference).
    pub update_output: bool,
}

impl<R: Rows> Objective<'_, R> {
    /// Performs one gradient step of `center` toward `target` and away from
    /// sampled negatives. The gradient for `center` is accumulated into
    /// `grad`; the caller applies it. Returns the pre-update loss.
    pub fn step(
        &self,
        center: &[f32],
        target: usize,
        lr: f32,
        rng: &mut impl Rng,
        grad: &mut [f32],
        scratch: &mut [f32],
    ) -> f64 {
        let mut loss = 0.0f64;
        for k in 0..=self.negatives {
            let (row, label) = if k == 0 {
                (target, 1.0f32)
            } else {
                let n = self.noise.sample(rng);
                if n == target {
                    continue;
                }
                (n, 0.0)
            };
            self.output.read(row, scratch);
            let score = sigmoid(dot(center, scratch));
            let p = if label > 0.0 { score } else { 1.0 - score };
            loss -= (p.max(1e-7) as f64).ln();
            let g = (label - score) * lr;
            for (acc, o) in grad.iter_mut().zip(scratch.iter()) {
                *acc += g * o;
            }
            if self.update_output {
                self.output.add(row, center, g);
            }
        }
        loss
    }
}

/// Result of skip-gram training over token sequences.
pub(crate) struct SkipGram {
    pub input: Vec<Vec<f32>>,
    pub epoch_losses: Vec<f64>,
}

/// Trains skip-gram vectors over sequences of vocabulary rows.
pub(crate) fn train_skipgram(
    sequences: &[Vec<u32>],
    counts: &[u64],
    cfg: &TrainConfig,
) -> Result<SkipGram> {
    let vocab = counts.len();
    let noise = noise_table(counts)
        .ok_or_else(|| Error::EmptyTraining("empty vocabulary".into()))?;
    let trainable: Vec<&Vec<u32>> = sequences.iter().filter(|s| s.len() >= 2).collect();
    if trainable.is_empty() {
        return Err(Error::EmptyTraining("no sequence has two or more tokens".into()));
    }

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let input = Weights::random(vocab, cfg.dimensions, &mut init_rng);
    let output = Weights::zeros(vocab, cfg.dimensions);
    let objective = Objective {
        output: &output,
        noise: &noise,
        negatives: cfg.negative_samples,
        update_output: true,
    };

    let per_epoch: u64 = trainable.iter().map(|s| s.len() as u64).sum();
    let total = per_epoch * cfg.epochs as u64;
    let shards = shard(&trainable, cfg.threads);

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let run = |(shard_no, seqs): (usize, &[&Vec<u32>])| -> (f64, u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((epoch as u64) << 32) | (shard_no as u64 + 1));
            let mut done = epoch as u64 * per_epoch
                + (shard_no as u64 * per_epoch) / shards.len() as u64;
            let (mut loss, mut pairs) = (0.0, 0u64);
            let dim = cfg.dimensions;
            let (mut center, mut grad, mut scratch) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
            for seq in seqs {
                for (pos, &c) in seq.iter().enumerate() {
                    let lr = cfg.rate_at(done, total);
                    done += 1;
                    let reach = rng.gen_range(1..=cfg.window);
                    let lo = pos.saturating_sub(reach);
                    let hi = (pos + reach).min(seq.len() - 1);
                    for ctx in lo..=hi {
                        if ctx == pos {
                            continue;
                        }
                        input.read(c as usize, &mut center);
                        grad.iter_mut().for_each(|g| *g = 0.0);
                        loss += objective.step(&center, seq[ctx] as usize, lr, &mut rng, &mut grad, &mut scratch);
                        pairs += 1;
                        input.add(c as usize, &grad, 1.0);
                    }
                }
            }
            (loss, pairs)
        };
        let results: Vec<(f64, u64)> = if shards.len() == 1 {
            vec![run((0, shards[0]))]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let run = &run;
                        scope.spawn(move || run((i, s)))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };
        let (loss, pairs) = results
            .iter()
            .fold((0.0, 0u64), |(l, p), (dl, dp)| (l + dl, p + dp));
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
        log::debug!("skip-gram epoch {} loss {:.5}", epoch + 1, epoch_losses[epoch]);
    }

    Ok(SkipGram {
        input: input.into_rows(),
        epoch_losses,
    })
}

/// Splits items into at most `workers` contiguous, non-empty shards.
pub(crate) fn shard<T>(items: &[T], workers: usize) -> Vec<&[T]> {
    let workers = workers.clamp(1, items.len().max(1));
    let size = items.len().div_ceil(workers).max(1);
    items.chunks(size).collect()
}

pub(crate) fn cosine_dense(a: &[f32], b: &[f32]) -> Option<f64> {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (*x as f64, *y as f64);
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return None;
    }
    Some((ab / (aa * bb).sqrt()).clamp(-1.0, 1.0))
}
