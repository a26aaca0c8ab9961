//! Average-linkage agglomerative clustering of voxel features.
//!
//! Merges always take the globally closest pair of clusters under average
//! linkage of Euclidean distances. Each cluster is identified by its lowest
//! token index and equal distances resolve to the lexicographically smallest
//! `(i, j)` pair, so the result is fully determined by the input.
//!
//! Each live cluster keeps a lower bound on the distance to its nearest
//! higher-indexed neighbour in an ordered queue; bounds that turn out stale
//! are recomputed lazily when they reach the front. This is the "generic"
//! scheme from the hierarchical clustering literature and typically runs in
//! close to quadratic time. Memory is one condensed `L (L - 1) / 2` distance
//! matrix.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::AnnotateError;
use crate::matrix::Matrix;
use crate::voxgrid::{PartLabeling, SparseVoxelGrid};

/// Largest voxel count accepted by [`cluster_parts`] (4 GiB of distances).
pub const MAX_CLUSTER_VOXELS: usize = 32_768;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Condensed {
    n: usize,
    data: Vec<f64>,
}

impl Condensed {
    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.n * i - i * (i + 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.index(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.data[k] = v;
    }
}

struct Agglomeration {
    dist: Condensed,
    size: Vec<usize>,
    active: Vec<bool>,
    nearest: Vec<usize>,
    bound: Vec<f64>,
    queue: BTreeSet<(Dist, usize)>,
    parent: Vec<usize>,
}

impl Agglomeration {
    fn new(features: &Matrix) -> Self {
        let n = features.rows();
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            let a = features.row(i);
            for j in i + 1..n {
                let b = features.row(j);
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                data.push(sq.sqrt());
            }
        }
        let mut state = Self {
            dist: Condensed { n, data },
            size: vec![1; n],
            active: vec![true; n],
            nearest: vec![usize::MAX; n],
            bound: vec![f64::INFINITY; n],
            queue: BTreeSet::new(),
            parent: (0..n).collect(),
        };
        for i in 0..n {
            state.refresh(i);
        }
        state
    }

    /// Recomputes the exact nearest higher-indexed neighbour of `i`.
    fn refresh(&mut self, i: usize) {
        self.queue.remove(&(Dist(self.bound[i]), i));
        let mut best = (f64::INFINITY, usize::MAX);
        for j in i + 1..self.dist.n {
            if self.active[j] {
                let d = self.dist.get(i, j);
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        self.bound[i] = best.0;
        self.nearest[i] = best.1;
        if best.1 != usize::MAX {
            self.queue.insert((Dist(best.0), i));
        }
    }

    fn set_nearest(&mut self, i: usize, j: usize, d: f64) {
        self.queue.remove(&(Dist(self.bound[i]), i));
        self.bound[i] = d;
        self.nearest[i] = j;
        self.queue.insert((Dist(d), i));
    }

    fn is_exact(&self, i: usize) -> bool {
        let j = self.nearest[i];
        j != usize::MAX && self.active[j] && self.dist.get(i, j) == self.bound[i]
    }

    /// Closest pair `(a, b)`, `a < b`.
    fn closest_pair(&mut self) -> (usize, usize) {
        loop {
            let &(_, a) = self.queue.first().expect("at least two clusters");
            if self.is_exact(a) {
                return (a, self.nearest[a]);
            }
            self.refresh(a);
        }
    }

    fn merge(&mut self, a: usize, b: usize) {
        debug_assert!(a < b);
        self.queue.remove(&(Dist(self.bound[b]), b));
        self.active[b] = false;
        self.parent[b] = a;
        let (na, nb) = (self.size[a] as f64, self.size[b] as f64);
        for x in 0..self.dist.n {
            if !self.active[x] || x == a {
                continue;
            }
            let d = (na * self.dist.get(a, x) + nb * self.dist.get(b, x)) / (na + nb);
            self.dist.set(a, x, d);
        }
        self.size[a] += self.size[b];

        for x in 0..a {
            if !self.active[x] {
                continue;
            }
            if self.nearest[x] == b {
                // bound stays a valid lower bound for the merged cluster
                self.nearest[x] = a;
            }
            let d = self.dist.get(x, a);
            if d < self.bound[x] || (d == self.bound[x] && a < self.nearest[x]) {
                self.set_nearest(x, a, d);
            }
        }
        self.refresh(a);
    }

    fn root(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    /// Labels in `1..=K`, numbered by each cluster's lowest token index.
    fn labels(&self) -> Vec<u32> {
        let n = self.dist.n;
        let mut label_of_root = vec![0u32; n];
        let mut next = 0;
        for (label, &active) in label_of_root.iter_mut().zip(&self.active) {
            if active {
                next += 1;
                *label = next;
            }
        }
        (0..n).map(|i| label_of_root[self.root(i)]).collect()
    }
}

/// Clusters the rows of `features` into exactly `num_parts` groups.
pub fn agglomerate(features: &Matrix, num_parts: u32) -> Result<PartLabeling, AnnotateError> {
    let n = features.rows();
    if num_parts == 0 {
        return Err(AnnotateError::ZeroParts);
    }
    if num_parts as usize > n {
        return Err(AnnotateError::TooManyParts {
            parts: num_parts,
            voxels: n,
        });
    }
    if n > MAX_CLUSTER_VOXELS {
        return Err(AnnotateError::TooManyVoxels(n));
    }
    let mut state = Agglomeration::new(features);
    for _ in num_parts as usize..n {
        let (a, b) = state.closest_pair();
        state.merge(a, b);
    }
    Ok(PartLabeling::new(state.labels(), num_parts).expect("labels in range"))
}

/// Clusters the voxels of `grid` by their features.
pub fn cluster_parts(grid: &SparseVoxelGrid, num_parts: u32) -> Result<PartLabeling, AnnotateError> {
    let features = grid.features().ok_or(AnnotateError::MissingFeatures)?;
    agglomerate(&features.map(f64::from), num_parts)
}
