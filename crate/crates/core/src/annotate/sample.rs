//! Area-weighted surface sampling and point voxelization.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::{TriangleMesh, Vec3};
use super::AnnotateError;
use crate::matrix::Matrix;
use crate::voxgrid::{Coord, GridParts, SparseVoxelGrid};

/// Points in normalized object space, optionally with per-point features.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSampleSet {
    positions: Vec<Vec3>,
    features: Option<Matrix<f32>>,
    /// Triangle each point was drawn from.
    triangles: Vec<usize>,
}

impl PointSampleSet {
    pub fn from_positions(positions: Vec<Vec3>) -> Self {
        let triangles = vec![usize::MAX; positions.len()];
        Self {
            positions,
            features: None,
            triangles,
        }
    }

    /// Attaches one feature row per point.
    pub fn with_features(mut self, features: Matrix<f32>) -> Result<Self, AnnotateError> {
        if features.rows() != self.positions.len() {
            return Err(AnnotateError::FeatureRows {
                expected: self.positions.len(),
                found: features.rows(),
            });
        }
        if features.cols() == 0 {
            return Err(AnnotateError::FeatureRows {
                expected: self.positions.len(),
                found: 0,
            });
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn features(&self) -> Option<&Matrix<f32>> {
        self.features.as_ref()
    }

    /// Source triangle per point (`usize::MAX` when built from raw positions).
    pub fn source_triangles(&self) -> &[usize] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Draws `count` points uniformly over the surface: triangles are chosen with
/// probability proportional to area, then a uniform barycentric point inside.
pub fn sample_surface(mesh: &TriangleMesh, count: usize, seed: u64) -> Result<PointSampleSet, AnnotateError> {
    if count == 0 {
        return Err(AnnotateError::ZeroSamples);
    }
    let areas: Vec<f64> = (0..mesh.triangles().len()).map(|t| mesh.triangle_area(t)).collect();
    let chooser = WeightedIndex::new(&areas).map_err(|_| AnnotateError::NoSurfaceArea)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(count);
    let mut triangles = Vec::with_capacity(count);
    for _ in 0..count {
        let t = chooser.sample(&mut rng);
        let [a, b, c] = mesh.corners(t);
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        let s = r1.sqrt();
        let (wa, wb, wc) = (1.0 - s, s * (1.0 - r2), s * r2);
        let p = [0, 1, 2].map(|k| (wa * a[k] + wb * b[k] + wc * c[k]).clamp(-0.5, 0.5));
        positions.push(p);
        triangles.push(t);
    }
    Ok(PointSampleSet {
        positions,
        features: None,
        triangles,
    })
}

/// Voxel index of a normalized coordinate: `floor((x + 0.5) N)` clamped to `[0, N-1]`.
pub fn voxel_index(x: f64, resolution: u32) -> u32 {
    let i = ((x + 0.5) * resolution as f64).floor();
    if i.is_nan() || i < 0.0 {
        0
    } else {
        (i as u64).min(resolution as u64 - 1) as u32
    }
}

/// Marks every voxel containing at least one point; per-voxel features are
/// the mean of the contained points' features.
pub fn voxelize(points: &PointSampleSet, resolution: u32) -> Result<SparseVoxelGrid, AnnotateError> {
    if resolution == 0 {
        return Err(AnnotateError::ZeroResolution);
    }
    let cells: Vec<Coord> = points
        .positions
        .iter()
        .map(|p| p.map(|x| voxel_index(x, resolution)))
        .collect();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| cells[i]);

    let mut coords: Vec<Coord> = Vec::new();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if coords.last() != Some(&cells[i]) {
            coords.push(cells[i]);
            runs.push((pos, pos));
        }
        runs.last_mut().unwrap().1 = pos + 1;
    }

    let mut parts = GridParts::new(resolution, coords);
    if let Some(f) = &points.features {
        let c = f.cols();
        let mut means = Matrix::<f32>::zeros(runs.len(), c);
        let mut acc = vec![0.0f64; c];
        for (row, &(start, end)) in runs.iter().enumerate() {
            acc.fill(0.0);
            for &i in &order[start..end] {
                for (a, &x) in acc.iter_mut().zip(f.row(i)) {
                    *a += x as f64;
                }
            }
            let n = (end - start) as f64;
            for (m, a) in means.row_mut(row).iter_mut().zip(&acc) {
                *m = (a / n) as f32;
            }
        }
        parts.features = Some(means);
    }
    Ok(SparseVoxelGrid::from_parts(parts)?)
}

/// Voxel center in normalized space, `(p + 0.5) / N - 0.5` per axis.
pub fn geometric_features(grid: &SparseVoxelGrid) -> Matrix<f32> {
    let n = grid.resolution() as f64;
    let mut m = Matrix::<f32>::zeros(grid.len(), 3);
    for (i, p) in grid.coords().iter().enumerate() {
        for (dst, &c) in m.row_mut(i).iter_mut().zip(p) {
            *dst = ((c as f64 + 0.5) / n - 0.5) as f32;
        }
    }
    m
}
