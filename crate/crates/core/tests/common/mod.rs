//! Straightforward reference implementations shared by the integration tests.
//! None of these call into the code paths they are used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use partvox::matrix::Matrix;

/// Softmax attention written out longhand. `admit(i, j)` selects keys; a row
/// with no admitted key falls back to all keys.
pub fn naive_attention(q: &Matrix, k: &Matrix, v: &Matrix, scale: f64, admit: impl Fn(usize, usize) -> bool) -> Matrix {
    let (l, m, dv) = (q.rows(), k.rows(), v.cols());
    let mut out = Matrix::zeros(l, dv);
    for i in 0..l {
        let mut keys: Vec<usize> = (0..m).filter(|&j| admit(i, j)).collect();
        if keys.is_empty() {
            keys = (0..m).collect();
        }
        let logits: Vec<f64> = keys
            .iter()
            .map(|&j| {
                let mut s = 0.0;
                for c in 0..q.cols() {
                    s += q.row(i)[c] * k.row(j)[c];
                }
                s * scale
            })
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        for (w, &j) in weights.iter().zip(&keys) {
            for c in 0..dv {
                out.row_mut(i)[c] += w / total * v.row(j)[c];
            }
        }
    }
    out
}

/// Average-linkage agglomeration recomputing every cluster distance from the
/// original points at every step. Ties go to the lexicographically smallest
/// pair of clusters, each cluster named by its smallest member.
pub fn naive_average_linkage(features: &Matrix, parts: usize) -> Vec<u32> {
    let n = features.rows();
    let dist = |a: usize, b: usize| -> f64 {
        features
            .row(a)
            .iter()
            .zip(features.row(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > parts {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut sum = 0.0;
                for &x in &clusters[a] {
                    for &y in &clusters[b] {
                        sum += dist(x, y);
                    }
                }
                let avg = sum / (clusters[a].len() * clusters[b].len()) as f64;
                if avg < best.0 {
                    best = (avg, a, b);
                }
            }
        }
        let (_, a, b) = best;
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        clusters[a].sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    let mut labels = vec![0u32; n];
    for (g, c) in clusters.iter().enumerate() {
        for &i in c {
            labels[i] = g as u32 + 1;
        }
    }
    labels
}

/// Pinhole projection of a normalized-space point given the raw camera numbers.
pub struct RawCamera {
    pub r: [[f64; 3]; 3],
    pub t: [f64; 3],
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: u32,
    pub h: u32,
    pub p: u32,
}

impl RawCamera {
    pub fn pixel(&self, x: [f64; 3]) -> Option<(f64, f64)> {
        let c: Vec<f64> = (0..3)
            .map(|i| self.r[i][0] * x[0] + self.r[i][1] * x[1] + self.r[i][2] * x[2] + self.t[i])
            .collect();
        if c[2] <= 0.0 {
            return None;
        }
        let u = self.f * c[0] / c[2] + self.cx;
        let v = self.f * c[1] / c[2] + self.cy;
        (u >= 0.0 && v >= 0.0 && u < self.w as f64 && v < self.h as f64).then_some((u, v))
    }

    /// Per-token part sets by scanning voxels once per token.
    pub fn token_sets(&self, resolution: u32, coords: &[[u32; 3]], labels: &[u32]) -> Vec<BTreeSet<u32>> {
        let cols = self.w.div_ceil(self.p);
        let rows = self.h.div_ceil(self.p);
        let n = resolution as f64;
        let mut sets = Vec::new();
        for row in 0..rows {
            for col in 0..cols {
                let mut set = BTreeSet::new();
                for (c, &a) in coords.iter().zip(labels) {
                    let x = [0, 1, 2].map(|k| (c[k] as f64 + 0.5) / n - 0.5);
                    if let Some((u, v)) = self.pixel(x) {
                        if (u / self.p as f64).floor() as u32 == col && (v / self.p as f64).floor() as u32 == row {
                            set.insert(a);
                        }
                    }
                }
                sets.push(set);
            }
        }
        sets
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in &self.r {
            s += &format!("{} {} {}\n", row[0], row[1], row[2]);
        }
        s += &format!("{} {} {}\n", self.t[0], self.t[1], self.t[2]);
        s += &format!("{} {} {} {} {} {}\n", self.f, self.cx, self.cy, self.w, self.h, self.p);
        s
    }
}
