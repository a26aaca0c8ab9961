//! Part-restricted self and cross attention.
//!
//! Two routes compute the same thing:
//!
//! * [`full_attention`] with an explicit boolean [`Mask`], where masked logits
//!   are dropped before the softmax. This is the reference.
//! * [`part_self_attention`] and [`part_cross_attention`], which never build a
//!   mask. Tokens are grouped by part and each group runs a small dense
//!   attention over exactly the keys it may see.
//!
//! A query row whose mask admits no key attends to every key instead. This
//! only happens in cross attention, for a part that no image token carries.

mod bench;
mod flops;
mod kernel;
pub mod synth;

pub use bench::{bench_attention, BenchConfig, BenchRecord, CSV_HEADER};
pub use flops::{count_flops, FlopReport};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use kernel::{dense_block, BlockDims};

use crate::matrix::Matrix;
use crate::voxgrid::PartId;

/// Set of part indices admitted by one key.
pub type PartSet = BTreeSet<PartId>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttentionError {
    #[error("dimension mismatch: {what} is {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0} must be at least 1")]
    ZeroDimension(&'static str),
    #[error("part index 0 at position {0}; parts are numbered from 1")]
    ZeroPart(usize),
    #[error("instance has no query labels")]
    MissingLabels,
    #[error("instance has no key part sets")]
    MissingPartSets,
    #[error("self attention requires as many keys as queries")]
    NotSelfAttention,
    #[error("group sizes sum to {found}, expected {expected}")]
    GroupSizes { expected: usize, found: usize },
    #[error("{0}")]
    Config(String),
}

/// Self or cross attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    SelfAttention,
    CrossAttention,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::SelfAttention => "self",
            Mode::CrossAttention => "cross",
        })
    }
}

impl FromStr for Mode {
    type Err = AttentionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "self" => Ok(Mode::SelfAttention),
            "cross" => Ok(Mode::CrossAttention),
            other => Err(AttentionError::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Queries, keys and values plus the part information used for masking.
#[derive(Debug, Clone)]
pub struct AttentionInstance {
    queries: Matrix,
    keys: Matrix,
    values: Matrix,
    query_labels: Option<Vec<PartId>>,
    key_part_sets: Option<Vec<PartSet>>,
    scale: f64,
}

impl AttentionInstance {
    /// Unlabeled instance, usable only with [`full_attention`].
    pub fn dense(queries: Matrix, keys: Matrix, values: Matrix) -> Result<Self, AttentionError> {
        let d = queries.cols();
        if d == 0 {
            return Err(AttentionError::ZeroDimension("query dimension"));
        }
        if values.cols() == 0 {
            return Err(AttentionError::ZeroDimension("value dimension"));
        }
        check("key dimension", d, keys.cols())?;
        check("value rows", keys.rows(), values.rows())?;
        Ok(Self {
            queries,
            keys,
            values,
            query_labels: None,
            key_part_sets: None,
            scale: 1.0 / (d as f64).sqrt(),
        })
    }

    /// Self attention where token `i` sees token `j` iff `labels[i] == labels[j]`.
    pub fn part_self(
        queries: Matrix,
        keys: Matrix,
        values: Matrix,
        labels: Vec<PartId>,
    ) -> Result<Self, AttentionError> {
        let mut inst = Self::dense(queries, keys, values)?;
        if inst.keys.rows() != inst.queries.rows() {
            return Err(AttentionError::NotSelfAttention);
        }
        check_labels(&labels, inst.queries.rows())?;
        inst.query_labels = Some(labels);
        Ok(inst)
    }

    /// Self attention with `q = k = v = features`.
    pub fn part_self_shared(features: &Matrix, labels: Vec<PartId>) -> Result<Self, AttentionError> {
        Self::part_self(features.clone(), features.clone(), features.clone(), labels)
    }

    /// Cross attention where query `i` sees key `j` iff `labels[i]` is in `key_part_sets[j]`.
    pub fn part_cross(
        queries: Matrix,
        keys: Matrix,
        values: Matrix,
        labels: Vec<PartId>,
        key_part_sets: Vec<PartSet>,
    ) -> Result<Self, AttentionError> {
        let mut inst = Self::dense(queries, keys, values)?;
        check_labels(&labels, inst.queries.rows())?;
        check("key part sets", inst.keys.rows(), key_part_sets.len())?;
        if let Some(j) = key_part_sets.iter().position(|s| s.contains(&0)) {
            return Err(AttentionError::ZeroPart(j));
        }
        inst.query_labels = Some(labels);
        inst.key_part_sets = Some(key_part_sets);
        Ok(inst)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn queries(&self) -> &Matrix {
        &self.queries
    }
    pub fn keys(&self) -> &Matrix {
        &self.keys
    }
    pub fn values(&self) -> &Matrix {
        &self.values
    }
    pub fn query_labels(&self) -> Option<&[PartId]> {
        self.query_labels.as_deref()
    }
    pub fn key_part_sets(&self) -> Option<&[PartSet]> {
        self.key_part_sets.as_deref()
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_cross(&self) -> bool {
        self.key_part_sets.is_some()
    }

    /// The mask implied by the instance's part information.
    pub fn part_mask(&self) -> Result<Mask, AttentionError> {
        let labels = self.query_labels.as_ref().ok_or(AttentionError::MissingLabels)?;
        Ok(match &self.key_part_sets {
            Some(sets) => Mask::part_cross(labels, sets),
            None => Mask::part_self(labels),
        })
    }

    fn dims(&self, queries: usize, keys: usize) -> BlockDims {
        BlockDims {
            queries,
            keys,
            dim: self.queries.cols(),
            value_dim: self.values.cols(),
        }
    }
}

fn check(what: &'static str, expected: usize, found: usize) -> Result<(), AttentionError> {
    if expected == found {
        Ok(())
    } else {
        Err(AttentionError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

fn check_labels(labels: &[PartId], rows: usize) -> Result<(), AttentionError> {
    check("query labels", rows, labels.len())?;
    match labels.iter().position(|&a| a == 0) {
        Some(i) => Err(AttentionError::ZeroPart(i)),
        None => Ok(()),
    }
}

/// Boolean `L x M` admission mask; `true` means query `i` may attend key `j`.
#[derive(Clone, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                bits.push(f(i, j));
            }
        }
        Self { rows, cols, bits }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| i == j)
    }

    /// `mask(i, j) = [a_i == a_j]`.
    pub fn part_self(labels: &[PartId]) -> Self {
        Self::from_fn(labels.len(), labels.len(), |i, j| labels[i] == labels[j])
    }

    /// `mask(i, j) = [a_i in sets_j]`.
    pub fn part_cross(labels: &[PartId], sets: &[PartSet]) -> Self {
        Self::from_fn(labels.len(), sets.len(), |i, j| sets[j].contains(&labels[i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.cols..(i + 1) * self.cols]
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: String = self.row(i).iter().map(|&b| if b { '1' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Softmax attention, optionally restricted by `mask`.
///
/// Masked logits are treated as negative infinity. A row with no admitted key
/// attends to all keys.
pub fn full_attention(inst: &AttentionInstance, mask: Option<&Mask>) -> Result<Matrix, AttentionError> {
    let (l, m) = (inst.queries.rows(), inst.keys.rows());
    let dv = inst.values.cols();
    let mut out = Matrix::zeros(l, dv);
    let Some(mask) = mask else {
        let mut scratch = Vec::new();
        dense_block(
            inst.queries.as_slice(),
            inst.keys.as_slice(),
            inst.values.as_slice(),
            inst.dims(l, m),
            inst.scale,
            out.as_mut_slice(),
            &mut scratch,
        );
        return Ok(out);
    };
    check("mask rows", l, mask.rows())?;
    check("mask cols", m, mask.cols())?;

    let mut logits = vec![0.0f64; m];
    for i in 0..l {
        let row_mask = mask.row(i);
        let admit_all = !row_mask.iter().any(|&b| b);
        let qi = inst.queries.row(i);
        for (j, logit) in logits.iter_mut().enumerate() {
            *logit = if admit_all || row_mask[j] {
                kernel::dot(qi, inst.keys.row(j)) * inst.scale
            } else {
                f64::NEG_INFINITY
            };
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let oi = out.row_mut(i);
        for (j, &logit) in logits.iter().enumerate() {
            if logit == f64::NEG_INFINITY {
                continue;
            }
            let w = (logit - max).exp();
            sum += w;
            for (o, v) in oi.iter_mut().zip(inst.values.row(j)) {
                *o += w * v;
            }
        }
        for o in oi.iter_mut() {
            *o /= sum;
        }
    }
    Ok(out)
}

/// Stable grouping of token indices by part.
///
/// `order` lists tokens part by part (ascending part index, canonical order
/// within a part); `offsets[g]..offsets[g + 1]` is the range of part `g + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartPermutation {
    order: Vec<usize>,
    offsets: Vec<usize>,
}

impl PartPermutation {
    pub fn new(labels: &[PartId]) -> Self {
        let k = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0usize; k];
        for &a in labels {
            counts[a as usize - 1] += 1;
        }
        let mut offsets = vec![0usize; k + 1];
        for g in 0..k {
            offsets[g + 1] = offsets[g] + counts[g];
        }
        let mut cursor = offsets.clone();
        let mut order = vec![0usize; labels.len()];
        for (i, &a) in labels.iter().enumerate() {
            let g = a as usize - 1;
            order[cursor[g]] = i;
            cursor[g] += 1;
        }
        Self { order, offsets }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn num_parts(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Permuted positions held by part `part` (1-based).
    pub fn range(&self, part: PartId) -> std::ops::Range<usize> {
        let g = part as usize - 1;
        self.offsets[g]..self.offsets[g + 1]
    }

    /// Tokens of part `part` in canonical order.
    pub fn group(&self, part: PartId) -> &[usize] {
        &self.order[self.range(part)]
    }

    /// Undo the permutation: row `p` of `permuted` goes to row `order[p]`.
    pub fn scatter(&self, permuted: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(permuted.rows(), permuted.cols());
        for (p, &i) in self.order.iter().enumerate() {
            out.row_mut(i).copy_from_slice(permuted.row(p));
        }
        out
    }
}

/// Part self attention computed as independent dense attention per part.
pub fn part_self_attention(inst: &AttentionInstance) -> Result<Matrix, AttentionError> {
    if inst.is_cross() || inst.keys.rows() != inst.queries.rows() {
        return Err(AttentionError::NotSelfAttention);
    }
    let labels = inst.query_labels.as_ref().ok_or(AttentionError::MissingLabels)?;
    let perm = PartPermutation::new(labels);
    let q = inst.queries.gather_rows(perm.order());
    let k = inst.keys.gather_rows(perm.order());
    let v = inst.values.gather_rows(perm.order());
    let (d, dv) = (q.cols(), v.cols());

    let mut permuted_out = Matrix::zeros(q.rows(), dv);
    let mut scratch = Vec::new();
    for part in 1..=perm.num_parts() as PartId {
        let r = perm.range(part);
        if r.is_empty() {
            continue;
        }
        let n = r.len();
        dense_block(
            &q.as_slice()[r.start * d..r.end * d],
            &k.as_slice()[r.start * d..r.end * d],
            &v.as_slice()[r.start * dv..r.end * dv],
            inst.dims(n, n),
            inst.scale,
            &mut permuted_out.as_mut_slice()[r.start * dv..r.end * dv],
            &mut scratch,
        );
    }
    Ok(perm.scatter(&permuted_out))
}

/// For each part `1..=num_parts`, the keys whose part set contains it.
pub fn admissible_keys(sets: &[PartSet], num_parts: usize) -> Vec<Vec<usize>> {
    let mut keys = vec![Vec::new(); num_parts];
    for (j, set) in sets.iter().enumerate() {
        for &g in set {
            if let Some(list) = keys.get_mut(g as usize - 1) {
                list.push(j);
            }
        }
    }
    keys
}

/// Part cross attention: queries grouped by part, each group attending to
/// the gathered keys that admit its part (or all keys if none do).
pub fn part_cross_attention(inst: &AttentionInstance) -> Result<Matrix, AttentionError> {
    let labels = inst.query_labels.as_ref().ok_or(AttentionError::MissingLabels)?;
    let sets = inst.key_part_sets.as_ref().ok_or(AttentionError::MissingPartSets)?;
    let perm = PartPermutation::new(labels);
    let key_lists = admissible_keys(sets, perm.num_parts());
    let all_keys: Vec<usize> = (0..inst.keys.rows()).collect();
    let dv = inst.values.cols();

    let mut out = Matrix::zeros(inst.queries.rows(), dv);
    let mut scratch = Vec::new();
    for part in 1..=perm.num_parts() as PartId {
        let group = perm.group(part);
        if group.is_empty() {
            continue;
        }
        let admitted = &key_lists[part as usize - 1];
        let admitted = if admitted.is_empty() { &all_keys } else { admitted };
        let q = inst.queries.gather_rows(group);
        let k = inst.keys.gather_rows(admitted);
        let v = inst.values.gather_rows(admitted);
        let mut block = Matrix::zeros(group.len(), dv);
        dense_block(
            q.as_slice(),
            k.as_slice(),
            v.as_slice(),
            inst.dims(group.len(), admitted.len()),
            inst.scale,
            block.as_mut_slice(),
            &mut scratch,
        );
        for (row, &i) in group.iter().enumerate() {
            out.row_mut(i).copy_from_slice(block.row(row));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> Matrix {
        Matrix::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn equal_logits_average_values() {
        let inst = AttentionInstance::dense(col(&[0.0, 0.0]), col(&[1.0, 1.0]), col(&[1.0, 3.0])).unwrap();
        let out = full_attention(&inst, None).unwrap();
        assert_eq!(out.as_slice(), &[2.0, 2.0]);
        let masked = full_attention(&inst, Some(&Mask::from_fn(2, 2, |_, _| true))).unwrap();
        assert_eq!(masked.as_slice(), &[2.0, 2.0]);
    }

    #[test]
    fn identity_mask_returns_values() {
        let q = Matrix::from_rows(&[[0.3, -1.0], [2.0, 0.5], [-0.7, 0.1]]);
        let v = Matrix::from_rows(&[[1.0], [-2.0], [5.5]]);
        let inst = AttentionInstance::dense(q.clone(), q, v.clone()).unwrap();
        let out = full_attention(&inst, Some(&Mask::identity(3))).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn singleton_parts_return_values() {
        let q = Matrix::from_rows(&[[0.3, -1.0], [2.0, 0.5], [-0.7, 0.1]]);
        let v = Matrix::from_rows(&[[1.0, 0.0], [-2.0, 4.0], [5.5, 1.0]]);
        let inst = AttentionInstance::part_self(q.clone(), q, v.clone(), vec![3, 1, 2]).unwrap();
        assert_eq!(part_self_attention(&inst).unwrap(), v);
    }

    #[test]
    fn fully_masked_row_attends_to_all_keys() {
        let inst = AttentionInstance::part_cross(
            col(&[0.0, 0.0]),
            col(&[1.0, 1.0]),
            col(&[1.0, 3.0]),
            vec![1, 2],
            vec![PartSet::from([1]), PartSet::new()],
        )
        .unwrap();
        let mask = inst.part_mask().unwrap();
        assert!(!mask.get(1, 0) && !mask.get(1, 1));
        let oracle = full_attention(&inst, Some(&mask)).unwrap();
        assert_eq!(oracle.as_slice(), &[1.0, 2.0]);
        assert_eq!(part_cross_attention(&inst).unwrap().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn permutation_is_stable() {
        let perm = PartPermutation::new(&[2, 1, 2, 3, 1]);
        assert_eq!(perm.order(), &[1, 4, 0, 2, 3]);
        assert_eq!(perm.range(2), 2..4);
        assert_eq!(perm.group(3), &[3]);
    }

    #[test]
    fn constructor_errors() {
        let m = Matrix::from_rows(&[[1.0, 2.0]]);
        let bad_k = Matrix::from_rows(&[[1.0]]);
        assert!(matches!(
            AttentionInstance::dense(m.clone(), bad_k, m.clone()),
            Err(AttentionError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            AttentionInstance::part_self(m.clone(), m.clone(), m.clone(), vec![0]),
            Err(AttentionError::ZeroPart(0))
        ));
        let two = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(
            AttentionInstance::part_self(m.clone(), two.clone(), two, vec![1]),
            Err(AttentionError::NotSelfAttention)
        ));
        let inst = AttentionInstance::dense(m.clone(), m.clone(), m).unwrap();
        assert!(matches!(
            full_attention(&inst, Some(&Mask::identity(2))),
            Err(AttentionError::DimensionMismatch { .. })
        ));
        assert!(matches!(part_self_attention(&inst), Err(AttentionError::MissingLabels)));
    }
}
