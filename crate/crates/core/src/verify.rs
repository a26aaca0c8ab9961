//! Seeded randomized equivalence checks, run by `partvox verify`.
//!
//! Each suite compares a fast path with an independent route to the same
//! answer: blocked part attention against the masked dense reference, the
//! token-mask builder against per-token brute force, and the residual part
//! block against `features + masked attention`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attention::{full_attention, part_cross_attention, part_self_attention, synth, Mask, PartSet};
use crate::blockstack::{part_block, run_blocks, Block};
use crate::matrix::Matrix;
use crate::projection::{build_token_mask, voxel_center, CameraParams};
use crate::voxgrid::{Coord, PartId, SparseVoxelGrid};

/// Relative tolerance for double-precision equivalence.
pub const REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub cases: usize,
    pub seed: u64,
    /// Corrupts every fast-path result; used to check the checks.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::ok)
    }

    pub fn total_checks(&self) -> usize {
        self.suites.iter().map(|s| s.total).sum()
    }
}

pub fn run_all(options: &VerifyOptions) -> VerifyReport {
    type Check = fn(&mut ChaCha8Rng, bool) -> bool;
    let suites: [(&'static str, Check); 5] = [
        ("part_self_attention", check_self),
        ("part_cross_attention", check_cross),
        ("token_mask", check_projection),
        ("part_block", check_part_block),
        ("part_isolation", check_isolation),
    ];
    let suites = suites
        .iter()
        .enumerate()
        .map(|(s, &(name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(s as u64 * 0x9E37_79B9));
            let passed = (0..options.cases)
                .filter(|_| check(&mut rng, options.inject_fault))
                .count();
            SuiteResult {
                name,
                passed,
                total: options.cases,
            }
        })
        .collect();
    VerifyReport { suites }
}

fn corrupt(m: &mut Matrix, fault: bool) {
    if fault {
        if let Some(x) = m.as_mut_slice().first_mut() {
            *x += 1.0;
        }
    }
}

fn check_self(rng: &mut ChaCha8Rng, fault: bool) -> bool {
    let len = rng.random_range(4..=256);
    let parts = rng.random_range(1..=8);
    let d = rng.random_range(1..=16);
    let dv = rng.random_range(1..=16);
    let labels = synth::random_labels(rng, len, parts);
    let inst = synth::self_instance(rng, len, d, dv, labels);
    let (Ok(mut fast), Ok(mask)) = (part_self_attention(&inst), inst.part_mask()) else {
        return false;
    };
    corrupt(&mut fast, fault);
    full_attention(&inst, Some(&mask)).is_ok_and(|oracle| fast.max_relative_error(&oracle) <= REL_TOL)
}

fn check_cross(rng: &mut ChaCha8Rng, fault: bool) -> bool {
    let len = rng.random_range(4..=128);
    let keys = rng.random_range(1..=64);
    let parts = rng.random_range(1..=8);
    let d = rng.random_range(1..=16);
    let dv = rng.random_range(1..=16);
    let labels = synth::random_labels(rng, len, parts);
    let density = rng.random_range(0.0..0.5);
    let sets = synth::random_part_sets(rng, keys, parts, density);
    let inst = synth::cross_instance(rng, d, dv, labels, sets);
    let (Ok(mut fast), Ok(mask)) = (part_cross_attention(&inst), inst.part_mask()) else {
        return false;
    };
    corrupt(&mut fast, fault);
    full_attention(&inst, Some(&mask)).is_ok_and(|oracle| fast.max_relative_error(&oracle) <= REL_TOL)
}

/// Random labeled grid with at most `max_len` voxels.
pub fn random_labeled_grid<R: Rng>(rng: &mut R, resolution: u32, max_len: usize, parts: u32) -> SparseVoxelGrid {
    let len = rng.random_range(1..=max_len);
    let coords: BTreeSet<Coord> = (0..len)
        .map(|_| [0; 3].map(|_: u32| rng.random_range(0..resolution)))
        .collect();
    let coords: Vec<Coord> = coords.into_iter().collect();
    let labels = synth::random_labels(rng, coords.len(), parts);
    SparseVoxelGrid::from_coords(resolution, coords)
        .expect("valid coords")
        .with_labels(labels, parts)
        .expect("valid labels")
}

fn check_projection(rng: &mut ChaCha8Rng, fault: bool) -> bool {
    let parts = rng.random_range(1..=6);
    let grid = random_labeled_grid(rng, 16, 200, parts);
    let eye = [
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
    ];
    let Ok(camera) = CameraParams::look_at(eye, [0.0; 3], [0.0, 1.0, 0.0], 180.0, [224, 224], 14) else {
        return true;
    };
    let Ok(mask) = build_token_mask(&grid, &camera) else {
        return false;
    };
    let mut sets = mask.into_part_sets();
    if fault {
        sets[0].insert(u32::MAX);
    }
    sets == brute_force_token_sets(&grid, &camera)
}

/// For every token, scans every voxel and keeps parts whose center lands in it.
pub fn brute_force_token_sets(grid: &SparseVoxelGrid, camera: &CameraParams) -> Vec<PartSet> {
    let (rows, cols) = camera.token_grid();
    let p = camera.patch_size() as f64;
    let [w, h] = camera.image_size();
    let r = camera.rotation();
    let t = camera.translation();
    let [cx, cy] = camera.principal_point();
    let labels: &[PartId] = grid.labels().expect("labeled grid");
    let mut sets = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let (u0, v0) = (col as f64 * p, row as f64 * p);
            let mut set = PartSet::new();
            for (coord, &label) in grid.coords().iter().zip(labels) {
                let x = voxel_center(*coord, grid.resolution());
                let c: Vec<f64> = (0..3)
                    .map(|i| r[i][0] * x[0] + r[i][1] * x[1] + r[i][2] * x[2] + t[i])
                    .collect();
                if c[2] <= 0.0 {
                    continue;
                }
                let u = camera.focal() * c[0] / c[2] + cx;
                let v = camera.focal() * c[1] / c[2] + cy;
                let in_image = u >= 0.0 && v >= 0.0 && u < w as f64 && v < h as f64;
                let in_patch = u >= u0 && u < u0 + p && v >= v0 && v < v0 + p;
                if in_image && in_patch {
                    set.insert(label);
                }
            }
            sets.push(set);
        }
    }
    sets
}

fn random_features(rng: &mut ChaCha8Rng, rows: usize) -> Matrix {
    let c = rng.random_range(1..=8);
    synth::uniform_matrix(rng, rows, c)
}

fn check_part_block(rng: &mut ChaCha8Rng, fault: bool) -> bool {
    let parts = rng.random_range(1..=4);
    let grid = random_labeled_grid(rng, 8, 120, parts);
    let features = random_features(rng, grid.len());
    let Ok(mut fast) = part_block(&grid, &features) else {
        return false;
    };
    corrupt(&mut fast, fault);
    let labels = grid.labels().unwrap();
    let inst = crate::attention::AttentionInstance::dense(features.clone(), features.clone(), features.clone())
        .expect("shapes");
    let mask = Mask::part_self(labels);
    full_attention(&inst, Some(&mask))
        .is_ok_and(|att| fast.max_relative_error(&features.add(&att)) <= REL_TOL)
}

fn check_isolation(rng: &mut ChaCha8Rng, fault: bool) -> bool {
    let parts = rng.random_range(2..=4);
    let grid = random_labeled_grid(rng, 8, 120, parts);
    let features = random_features(rng, grid.len());
    let labels = grid.labels().unwrap();
    let target = labels[rng.random_range(0..labels.len())];
    let mut perturbed = features.clone();
    for (i, &a) in labels.iter().enumerate() {
        if a == target {
            for x in perturbed.row_mut(i) {
                *x += rng.random_range(-1.0..1.0);
            }
        }
    }
    let blocks = [Block::Part; 3];
    let (Ok(base), Ok(mut moved)) = (run_blocks(&grid, &features, &blocks), run_blocks(&grid, &perturbed, &blocks)) else {
        return false;
    };
    if fault {
        if let Some(i) = labels.iter().position(|&a| a != target) {
            moved.row_mut(i)[0] += 1.0;
        }
    }
    labels
        .iter()
        .enumerate()
        .filter(|&(_, &a)| a != target)
        .all(|(i, _)| base.row(i) == moved.row(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass() {
        let report = run_all(&VerifyOptions {
            cases: 10,
            seed: 42,
            inject_fault: false,
        });
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.total_checks(), 50);
    }

    #[test]
    fn injected_fault_is_caught() {
        let report = run_all(&VerifyOptions {
            cases: 5,
            seed: 1,
            inject_fault: true,
        });
        assert!(!report.all_passed());
    }

    #[test]
    fn zero_cases() {
        let report = run_all(&VerifyOptions::default());
        assert!(report.all_passed());
        assert_eq!(report.total_checks(), 0);
    }
}
