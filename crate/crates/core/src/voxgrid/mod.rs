//! Part-labeled sparse voxel grids.
//!
//! A [`SparseVoxelGrid`] holds `L` active voxels of an `N x N x N` lattice,
//! optionally carrying an `L x C` feature matrix and a part index per voxel.
//! Voxels are always kept in ascending lexicographic `(x, y, z)` order, which
//! is the token order used by every attention routine in this crate.

mod uvox;

pub use uvox::{read_uvox, write_uvox, UvoxError, UVOX_MAGIC, UVOX_VERSION};

use std::fmt;

use crate::matrix::Matrix;

/// Integer voxel coordinate `(x, y, z)`.
pub type Coord = [u32; 3];

/// Part index. Valid part indices are `1..=K`.
pub type PartId = u32;

/// First broken invariant found by [`GridParts::validate`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("resolution must be positive")]
    ZeroResolution,
    #[error("coordinate ({},{},{}) at row {row} out of range for resolution {resolution}", coord[0], coord[1], coord[2])]
    OutOfRange {
        row: usize,
        coord: Coord,
        resolution: u32,
    },
    #[error("duplicate coordinate at rows {first},{second}")]
    Duplicate { first: usize, second: usize },
    #[error("coordinates not in ascending order at row {row}")]
    Unsorted { row: usize },
    #[error("feature matrix has {found} rows, expected {expected}")]
    FeatureRows { expected: usize, found: usize },
    #[error("feature matrix must have at least one channel")]
    EmptyFeatures,
    #[error("label list has {found} entries, expected {expected}")]
    LabelCount { expected: usize, found: usize },
    #[error("label {label} at row {row} outside 1..={num_parts}")]
    LabelOutOfRange {
        row: usize,
        label: PartId,
        num_parts: u32,
    },
    #[error("labels and part count must be given together")]
    PartCountMismatch,
    #[error("part count must be positive")]
    ZeroParts,
}

/// Unchecked grid contents. Use [`SparseVoxelGrid::from_parts`] to get a
/// canonical, validated grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridParts {
    pub resolution: u32,
    pub coords: Vec<Coord>,
    pub features: Option<Matrix<f32>>,
    pub labels: Option<Vec<PartId>>,
    pub num_parts: Option<u32>,
}

impl GridParts {
    pub fn new(resolution: u32, coords: Vec<Coord>) -> Self {
        Self {
            resolution,
            coords,
            features: None,
            labels: None,
            num_parts: None,
        }
    }

    /// Checks every grid invariant, returning the first violation.
    pub fn validate(&self) -> Result<(), Violation> {
        if self.resolution == 0 {
            return Err(Violation::ZeroResolution);
        }
        let n = self.resolution;
        for (row, c) in self.coords.iter().enumerate() {
            if c.iter().any(|&v| v >= n) {
                return Err(Violation::OutOfRange {
                    row,
                    coord: *c,
                    resolution: n,
                });
            }
        }
        for (row, pair) in self.coords.windows(2).enumerate() {
            match pair[0].cmp(&pair[1]) {
                std::cmp::Ordering::Less => {}
                std::cmp::Ordering::Equal => {
                    return Err(Violation::Duplicate {
                        first: row,
                        second: row + 1,
                    })
                }
                std::cmp::Ordering::Greater => return Err(Violation::Unsorted { row: row + 1 }),
            }
        }
        let len = self.coords.len();
        if let Some(f) = &self.features {
            if f.cols() == 0 {
                return Err(Violation::EmptyFeatures);
            }
            if f.rows() != len {
                return Err(Violation::FeatureRows {
                    expected: len,
                    found: f.rows(),
                });
            }
        }
        match (&self.labels, self.num_parts) {
            (None, None) => {}
            (Some(labels), Some(k)) => {
                if k == 0 {
                    return Err(Violation::ZeroParts);
                }
                if labels.len() != len {
                    return Err(Violation::LabelCount {
                        expected: len,
                        found: labels.len(),
                    });
                }
                if let Some((row, &label)) = labels
                    .iter()
                    .enumerate()
                    .find(|(_, &a)| a == 0 || a > k)
                {
                    return Err(Violation::LabelOutOfRange {
                        row,
                        label,
                        num_parts: k,
                    });
                }
            }
            _ => return Err(Violation::PartCountMismatch),
        }
        Ok(())
    }

    /// Reorders coords into canonical order, co-permuting features and labels.
    /// Rows whose side data has the wrong length are left untouched so that
    /// validation reports the mismatch.
    fn canonicalize(&mut self) {
        if self.coords.windows(2).all(|w| w[0] < w[1]) {
            return;
        }
        let len = self.coords.len();
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by_key(|&i| self.coords[i]);
        self.coords = order.iter().map(|&i| self.coords[i]).collect();
        if let Some(f) = &self.features {
            if f.rows() == len {
                self.features = Some(f.gather_rows(&order));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() == len {
                self.labels = Some(order.iter().map(|&i| labels[i]).collect());
            }
        }
    }
}

/// Validated sparse voxel grid in canonical token order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVoxelGrid {
    parts: GridParts,
}

impl SparseVoxelGrid {
    /// Sorts into canonical order (co-permuting features and labels) and validates.
    pub fn from_parts(mut parts: GridParts) -> Result<Self, Violation> {
        parts.canonicalize();
        parts.validate()?;
        Ok(Self { parts })
    }

    pub fn from_coords(resolution: u32, coords: Vec<Coord>) -> Result<Self, Violation> {
        Self::from_parts(GridParts::new(resolution, coords))
    }

    pub fn empty(resolution: u32) -> Result<Self, Violation> {
        Self::from_coords(resolution, Vec::new())
    }

    /// Attaches features whose rows follow the grid's canonical order.
    pub fn with_features(mut self, features: Matrix<f32>) -> Result<Self, Violation> {
        self.parts.features = Some(features);
        self.parts.validate()?;
        Ok(self)
    }

    /// Attaches part labels whose entries follow the grid's canonical order.
    pub fn with_labels(mut self, labels: Vec<PartId>, num_parts: u32) -> Result<Self, Violation> {
        self.parts.labels = Some(labels);
        self.parts.num_parts = Some(num_parts);
        self.parts.validate()?;
        Ok(self)
    }

    pub fn without_features(mut self) -> Self {
        self.parts.features = None;
        self
    }

    pub fn resolution(&self) -> u32 {
        self.parts.resolution
    }

    pub fn len(&self) -> usize {
        self.parts.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.coords.is_empty()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.parts.coords
    }

    pub fn features(&self) -> Option<&Matrix<f32>> {
        self.parts.features.as_ref()
    }

    pub fn labels(&self) -> Option<&[PartId]> {
        self.parts.labels.as_deref()
    }

    pub fn num_parts(&self) -> Option<u32> {
        self.parts.num_parts
    }

    /// Group bookkeeping for the grid's labels, if any.
    pub fn labeling(&self) -> Option<PartLabeling> {
        let labels = self.parts.labels.as_ref()?;
        let k = self.parts.num_parts?;
        PartLabeling::new(labels.clone(), k).ok()
    }

    /// Row of the voxel at `coord`, if active.
    pub fn index_of(&self, coord: Coord) -> Option<usize> {
        self.parts.coords.binary_search(&coord).ok()
    }

    /// Always `Ok` for a constructed grid.
    pub fn validate(&self) -> Result<(), Violation> {
        self.parts.validate()
    }

    pub fn as_parts(&self) -> &GridParts {
        &self.parts
    }

    pub fn into_parts(self) -> GridParts {
        self.parts
    }
}

/// Errors building a [`PartLabeling`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelingError {
    #[error("part count must be positive")]
    ZeroParts,
    #[error("label {label} at token {index} outside 1..={num_parts}")]
    OutOfRange {
        index: usize,
        label: PartId,
        num_parts: u32,
    },
}

/// Part indices with per-group token bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartLabeling {
    labels: Vec<PartId>,
    num_parts: u32,
    groups: Vec<Vec<usize>>,
}

impl PartLabeling {
    pub fn new(labels: Vec<PartId>, num_parts: u32) -> Result<Self, LabelingError> {
        if num_parts == 0 {
            return Err(LabelingError::ZeroParts);
        }
        let mut groups = vec![Vec::new(); num_parts as usize];
        for (index, &label) in labels.iter().enumerate() {
            if label == 0 || label > num_parts {
                return Err(LabelingError::OutOfRange {
                    index,
                    label,
                    num_parts,
                });
            }
            groups[(label - 1) as usize].push(index);
        }
        Ok(Self {
            labels,
            num_parts,
            groups,
        })
    }

    /// Labeling with `num_parts = max(labels)`, or 1 for an empty list.
    pub fn from_labels(labels: Vec<PartId>) -> Result<Self, LabelingError> {
        let k = labels.iter().copied().max().unwrap_or(1).max(1);
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[PartId] {
        &self.labels
    }

    pub fn num_parts(&self) -> u32 {
        self.num_parts
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Ascending token indices of part `part` (1-based).
    pub fn group(&self, part: PartId) -> &[usize] {
        &self.groups[(part - 1) as usize]
    }

    /// Token indices per part, in part order `1..=K`.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }
}

impl fmt::Display for PartLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} tokens in {} parts {:?}", self.len(), self.num_parts, self.group_sizes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_coordinate_reported_with_rows() {
        let parts = GridParts::new(8, vec![[3, 3, 3], [3, 3, 3]]);
        let err = SparseVoxelGrid::from_parts(parts).unwrap_err();
        assert_eq!(err, Violation::Duplicate { first: 0, second: 1 });
        assert_eq!(err.to_string(), "duplicate coordinate at rows 0,1");
    }

    #[test]
    fn out_of_range_coordinate() {
        let parts = GridParts::new(128, vec![[128, 0, 0]]);
        let err = parts.validate().unwrap_err();
        assert!(matches!(err, Violation::OutOfRange { row: 0, .. }));
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn empty_grid_is_valid() {
        let g = SparseVoxelGrid::empty(64).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.validate(), Ok(()));
    }

    #[test]
    fn unsorted_parts_fail_validation_but_constructor_sorts() {
        let mut parts = GridParts::new(4, vec![[1, 0, 0], [0, 2, 0], [0, 1, 3]]);
        parts.features = Some(Matrix::from_rows(&[[1.0f32], [2.0], [3.0]]));
        parts.labels = Some(vec![1, 2, 2]);
        parts.num_parts = Some(2);
        assert_eq!(parts.validate(), Err(Violation::Unsorted { row: 1 }));
        let g = SparseVoxelGrid::from_parts(parts).unwrap();
        assert_eq!(g.coords(), &[[0, 1, 3], [0, 2, 0], [1, 0, 0]]);
        assert_eq!(g.features().unwrap().as_slice(), &[3.0, 2.0, 1.0]);
        assert_eq!(g.labels().unwrap(), &[2, 2, 1]);
    }

    #[test]
    fn label_checks() {
        let g = SparseVoxelGrid::from_coords(4, vec![[0, 0, 0], [0, 0, 1]]).unwrap();
        assert!(matches!(
            g.clone().with_labels(vec![1, 3], 2),
            Err(Violation::LabelOutOfRange { row: 1, label: 3, .. })
        ));
        assert!(matches!(
            g.clone().with_labels(vec![0, 1], 2),
            Err(Violation::LabelOutOfRange { row: 0, .. })
        ));
        assert!(matches!(
            g.clone().with_labels(vec![1], 2),
            Err(Violation::LabelCount { .. })
        ));
        let mut parts = g.clone().into_parts();
        parts.num_parts = Some(2);
        assert_eq!(parts.validate(), Err(Violation::PartCountMismatch));
    }

    #[test]
    fn labeling_partitions_tokens() {
        let l = PartLabeling::new(vec![2, 1, 2, 3, 1], 4).unwrap();
        assert_eq!(l.group(1), &[1, 4]);
        assert_eq!(l.group(2), &[0, 2]);
        assert_eq!(l.group(3), &[3]);
        assert!(l.group(4).is_empty());
        assert_eq!(l.group_sizes(), vec![2, 2, 1, 0]);
        assert!(PartLabeling::new(vec![5], 4).is_err());
    }
}
