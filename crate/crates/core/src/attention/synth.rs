//! Seeded synthetic instances for verification and benchmarking.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AttentionInstance, PartSet};
use crate::matrix::Matrix;
use crate::voxgrid::PartId;

/// Matrix with entries uniform in `[-1, 1)`.
pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).expect("shape")
}

/// `len` labels in `1..=parts` with group sizes differing by at most one,
/// shuffled so that parts are interleaved in token order.
pub fn balanced_labels<R: Rng>(rng: &mut R, len: usize, parts: u32) -> Vec<PartId> {
    let mut labels: Vec<PartId> = (0..len).map(|i| (i as u32 % parts) + 1).collect();
    labels.shuffle(rng);
    labels
}

/// Labels drawn independently and uniformly from `1..=parts`.
pub fn random_labels<R: Rng>(rng: &mut R, len: usize, parts: u32) -> Vec<PartId> {
    (0..len).map(|_| rng.random_range(1..=parts)).collect()
}

/// Each key admits each part with probability `density`.
pub fn random_part_sets<R: Rng>(rng: &mut R, keys: usize, parts: u32, density: f64) -> Vec<PartSet> {
    (0..keys)
        .map(|_| (1..=parts).filter(|_| rng.random_bool(density)).collect())
        .collect()
}

/// Random self-attention instance with independent q, k, v.
pub fn self_instance<R: Rng>(rng: &mut R, len: usize, dim: usize, value_dim: usize, labels: Vec<PartId>) -> AttentionInstance {
    let q = uniform_matrix(rng, len, dim);
    let k = uniform_matrix(rng, len, dim);
    let v = uniform_matrix(rng, len, value_dim);
    AttentionInstance::part_self(q, k, v, labels).expect("consistent synthetic instance")
}

/// Random cross-attention instance.
pub fn cross_instance<R: Rng>(
    rng: &mut R,
    dim: usize,
    value_dim: usize,
    labels: Vec<PartId>,
    sets: Vec<PartSet>,
) -> AttentionInstance {
    let q = uniform_matrix(rng, labels.len(), dim);
    let k = uniform_matrix(rng, sets.len(), dim);
    let v = uniform_matrix(rng, sets.len(), value_dim);
    AttentionInstance::part_cross(q, k, v, labels, sets).expect("consistent synthetic instance")
}
