//! Mesh to part-labeled sparse voxels.
//!
//! The pipeline is: normalize the mesh into `[-0.5, 0.5]^3`, sample surface
//! points, voxelize, attach per-voxel features (the mean of external per-point
//! features, or voxel centers as a geometric fallback), cluster the voxels
//! into `K` parts, then score the segmentation with the two filter metrics.

mod cluster;
mod mesh;
mod metrics;
mod sample;

pub use cluster::{agglomerate, cluster_parts, MAX_CLUSTER_VOXELS};
pub use mesh::{normalize_mesh, TriangleMesh, Vec3};
pub use metrics::{
    face_neighbors, filter_sample, neighborhood_inconsistency, squared_ratio_sum, FilterReport, FilterThresholds,
};
pub use sample::{geometric_features, sample_surface, voxel_index, voxelize, PointSampleSet};

use std::io::{self, Read};

use crate::matrix::Matrix;
use crate::voxgrid::{PartLabeling, SparseVoxelGrid, Violation};

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("mesh bounding box has zero extent")]
    DegenerateMesh,
    #[error("mesh has no triangle with positive area")]
    NoSurfaceArea,
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("grid has no features")]
    MissingFeatures,
    #[error("grid has no part labels")]
    MissingLabels,
    #[error("part count must be at least 1")]
    ZeroParts,
    #[error("cannot split {voxels} voxels into {parts} parts")]
    TooManyParts { parts: u32, voxels: usize },
    #[error("{0} voxels exceed the clustering limit of {MAX_CLUSTER_VOXELS}")]
    TooManyVoxels(usize),
    #[error("feature rows: expected {expected}, found {found}")]
    FeatureRows { expected: usize, found: usize },
    #[error("label count: expected {expected}, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("labeling is empty")]
    EmptyLabeling,
    #[error("{0}")]
    Threshold(String),
    #[error("invalid grid: {0}")]
    Grid(#[from] Violation),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Where per-voxel clustering features come from.
#[derive(Debug, Clone)]
pub enum FeatureSource {
    /// Voxel centers in normalized space.
    Geometric,
    /// One row per sampled point, in sampling order.
    PerPoint(Matrix<f32>),
}

#[derive(Debug, Clone)]
pub struct AnnotateConfig {
    pub resolution: u32,
    pub parts: u32,
    pub samples: usize,
    pub seed: u64,
    pub thresholds: FilterThresholds,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            parts: 8,
            samples: 500_000,
            seed: 0,
            thresholds: FilterThresholds::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Annotation {
    /// Voxels with clustering features and part labels.
    pub grid: SparseVoxelGrid,
    pub labeling: PartLabeling,
    pub report: FilterReport,
}

/// Runs the full annotation pipeline on a raw mesh.
pub fn annotate(mesh: &TriangleMesh, config: &AnnotateConfig, features: FeatureSource) -> Result<Annotation, AnnotateError> {
    config.thresholds.validate()?;
    let mesh = normalize_mesh(mesh)?;
    let mut points = sample_surface(&mesh, config.samples, config.seed)?;
    let geometric = match features {
        FeatureSource::Geometric => true,
        FeatureSource::PerPoint(f) => {
            points = points.with_features(f)?;
            false
        }
    };
    let mut grid = voxelize(&points, config.resolution)?;
    if geometric {
        let f = geometric_features(&grid);
        grid = grid.with_features(f)?;
    }
    let labeling = cluster_parts(&grid, config.parts)?;
    let grid = grid.with_labels(labeling.labels().to_vec(), config.parts)?;
    let report = filter_sample(&grid, &labeling, config.thresholds)?;
    Ok(Annotation { grid, labeling, report })
}

/// Reads raw little-endian `f32` rows of width `dim`.
pub fn read_point_features<R: Read>(mut reader: R, dim: usize) -> Result<Matrix<f32>, AnnotateError> {
    if dim == 0 {
        return Err(AnnotateError::FeatureRows { expected: 1, found: 0 });
    }
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() % (4 * dim) != 0 {
        return Err(AnnotateError::Mesh(format!(
            "feature file of {} bytes is not a whole number of {dim}-wide f32 rows",
            bytes.len()
        )));
    }
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let rows = data.len() / dim;
    Ok(Matrix::from_vec(rows, dim, data).expect("length checked"))
}

/// Two equal spheres of radius `radius` centered at `(±offset, 0, 0)`.
pub fn two_spheres(offset: f64, radius: f64, stacks: usize, slices: usize) -> TriangleMesh {
    let mut mesh = TriangleMesh::uv_sphere([-offset, 0.0, 0.0], radius, stacks, slices);
    mesh.merge(&TriangleMesh::uv_sphere([offset, 0.0, 0.0], radius, stacks, slices));
    mesh
}
