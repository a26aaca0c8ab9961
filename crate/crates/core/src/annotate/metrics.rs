//! Segmentation quality metrics and the sample filter.

use serde::Serialize;

use super::AnnotateError;
use crate::voxgrid::{Coord, PartId, PartLabeling, SparseVoxelGrid};

/// Sum over parts of the squared voxel share, `sum_g (L_g / L)^2`.
///
/// Lies in `[1/K, 1]`; `1/K` for perfectly balanced parts and 1 for a single part.
pub fn squared_ratio_sum(labeling: &PartLabeling) -> Result<f64, AnnotateError> {
    let total = labeling.len() as u128;
    if total == 0 {
        return Err(AnnotateError::EmptyLabeling);
    }
    let squares: u128 = labeling.groups().iter().map(|g| (g.len() as u128).pow(2)).sum();
    Ok(squares as f64 / (total * total) as f64)
}

const FACE_OFFSETS: [[i64; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

/// Active 6-connected neighbours of voxel `i`, as row indices.
pub fn face_neighbors(grid: &SparseVoxelGrid, i: usize) -> impl Iterator<Item = usize> + '_ {
    neighbors_in(grid.coords(), grid.resolution(), i)
}

fn neighbors_in(coords: &[Coord], resolution: u32, i: usize) -> impl Iterator<Item = usize> + '_ {
    let p = coords[i];
    FACE_OFFSETS.iter().filter_map(move |off| {
        let mut q = [0u32; 3];
        for k in 0..3 {
            let v = p[k] as i64 + off[k];
            if v < 0 || v >= resolution as i64 {
                return None;
            }
            q[k] = v as u32;
        }
        coords.binary_search(&q).ok()
    })
}

fn inconsistency(coords: &[Coord], resolution: u32, labels: &[PartId]) -> Result<f64, AnnotateError> {
    if coords.is_empty() {
        return Err(AnnotateError::EmptyLabeling);
    }
    if labels.len() != coords.len() {
        return Err(AnnotateError::LabelCount {
            expected: coords.len(),
            found: labels.len(),
        });
    }
    let inconsistent = (0..coords.len())
        .filter(|&i| neighbors_in(coords, resolution, i).any(|j| labels[j] != labels[i]))
        .count();
    Ok(inconsistent as f64 / coords.len() as f64)
}

/// Fraction of voxels with at least one face-adjacent active neighbour of a
/// different part. Voxels without active neighbours count as consistent.
pub fn neighborhood_inconsistency(grid: &SparseVoxelGrid) -> Result<f64, AnnotateError> {
    let labels = grid.labels().ok_or(AnnotateError::MissingLabels)?;
    inconsistency(grid.coords(), grid.resolution(), labels)
}

/// Upper limits on both metrics; a sample passes when neither is exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterThresholds {
    pub ratio: f64,
    pub inconsistency: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            ratio: 0.25,
            inconsistency: 0.25,
        }
    }
}

impl FilterThresholds {
    pub fn validate(&self) -> Result<(), AnnotateError> {
        for (name, v) in [("ratio", self.ratio), ("inconsistency", self.inconsistency)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(AnnotateError::Threshold(format!("{name} threshold {v} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterReport {
    pub squared_ratio_sum: f64,
    pub neighborhood_inconsistency: f64,
    pub accepted: bool,
}

/// Scores `labeling` over the voxels of `grid` and applies the thresholds.
pub fn filter_sample(
    grid: &SparseVoxelGrid,
    labeling: &PartLabeling,
    thresholds: FilterThresholds,
) -> Result<FilterReport, AnnotateError> {
    thresholds.validate()?;
    let ratio = squared_ratio_sum(labeling)?;
    let incons = inconsistency(grid.coords(), grid.resolution(), labeling.labels())?;
    Ok(FilterReport {
        squared_ratio_sum: ratio,
        neighborhood_inconsistency: incons,
        accepted: ratio <= thresholds.ratio && incons <= thresholds.inconsistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(coords: Vec<Coord>, labels: Vec<PartId>) -> SparseVoxelGrid {
        let k = labels.iter().copied().max().unwrap();
        SparseVoxelGrid::from_coords(8, coords).unwrap().with_labels(labels, k).unwrap()
    }

    #[test]
    fn ratio_values() {
        let one = PartLabeling::new(vec![1; 5], 1).unwrap();
        assert_eq!(squared_ratio_sum(&one).unwrap(), 1.0);
        let eight = PartLabeling::new((0..64).map(|i| i % 8 + 1).collect(), 8).unwrap();
        assert_eq!(squared_ratio_sum(&eight).unwrap(), 0.125);
        let three_one = PartLabeling::new(vec![1, 1, 2, 1], 2).unwrap();
        assert_eq!(squared_ratio_sum(&three_one).unwrap(), 0.625);
        let empty = PartLabeling::new(vec![], 1).unwrap();
        assert!(squared_ratio_sum(&empty).is_err());
    }

    #[test]
    fn inconsistency_values() {
        let uniform = labeled(vec![[0, 0, 0], [0, 0, 1], [0, 1, 1]], vec![1, 1, 1]);
        assert_eq!(neighborhood_inconsistency(&uniform).unwrap(), 0.0);
        let pair = labeled(vec![[2, 2, 2], [2, 2, 3]], vec![1, 2]);
        assert_eq!(neighborhood_inconsistency(&pair).unwrap(), 1.0);
        let with_isolated = labeled(vec![[2, 2, 2], [2, 2, 3], [6, 6, 6]], vec![1, 2, 1]);
        assert_eq!(neighborhood_inconsistency(&with_isolated).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn diagonal_contact_is_not_a_neighbor() {
        let g = labeled(vec![[0, 0, 0], [1, 1, 0]], vec![1, 2]);
        assert_eq!(neighborhood_inconsistency(&g).unwrap(), 0.0);
    }

    #[test]
    fn missing_labels() {
        let g = SparseVoxelGrid::from_coords(4, vec![[0, 0, 0]]).unwrap();
        assert!(matches!(neighborhood_inconsistency(&g), Err(AnnotateError::MissingLabels)));
    }

    #[test]
    fn filter_decisions() {
        let g = SparseVoxelGrid::from_coords(8, (0..8).map(|x| [x, 0, 0]).collect()).unwrap();
        let single = PartLabeling::new(vec![1; 8], 1).unwrap();
        let r = filter_sample(&g, &single, FilterThresholds::default()).unwrap();
        assert_eq!(r.squared_ratio_sum, 1.0);
        assert!(!r.accepted);

        // 8 planes of an 8x8x8 block, one part per plane along x
        let mut coords = Vec::new();
        for x in 0..8 {
            for y in 0..8 {
                for z in 0..8 {
                    coords.push([x, y, z]);
                }
            }
        }
        let block = SparseVoxelGrid::from_coords(8, coords).unwrap();
        let planes: Vec<PartId> = block.coords().iter().map(|c| c[0] + 1).collect();
        let r = filter_sample(&block, &PartLabeling::new(planes, 8).unwrap(), FilterThresholds::default()).unwrap();
        assert_eq!(r.squared_ratio_sum, 0.125);
        // every voxel touches the next plane
        assert_eq!(r.neighborhood_inconsistency, 1.0);
        assert!(!r.accepted);

        let checker: Vec<PartId> = block.coords().iter().map(|c| (c[0] + c[1] + c[2]) % 2 + 1).collect();
        let r = filter_sample(&block, &PartLabeling::new(checker, 2).unwrap(), FilterThresholds::default()).unwrap();
        assert_eq!(r.neighborhood_inconsistency, 1.0);
        assert!(!r.accepted);
    }

    #[test]
    fn balanced_consistent_parts_accepted() {
        // eight separated 2x2x2 cubes, one part each
        let mut coords = Vec::new();
        let mut labels = Vec::new();
        for part in 0..8u32 {
            let base = [(part & 1) * 4, ((part >> 1) & 1) * 4, ((part >> 2) & 1) * 4];
            for dx in 0..2 {
                for dy in 0..2 {
                    for dz in 0..2 {
                        coords.push([base[0] + dx, base[1] + dy, base[2] + dz]);
                        labels.push(part + 1);
                    }
                }
            }
        }
        let g = SparseVoxelGrid::from_parts(crate::voxgrid::GridParts {
            resolution: 8,
            coords,
            features: None,
            labels: Some(labels),
            num_parts: Some(8),
        })
        .unwrap();
        let r = filter_sample(&g, &g.labeling().unwrap(), FilterThresholds::default()).unwrap();
        assert_eq!((r.squared_ratio_sum, r.neighborhood_inconsistency), (0.125, 0.0));
        assert!(r.accepted);
    }

    #[test]
    fn threshold_validation() {
        let g = SparseVoxelGrid::from_coords(4, vec![[0, 0, 0]]).unwrap();
        let l = PartLabeling::new(vec![1], 1).unwrap();
        let bad = FilterThresholds {
            ratio: 0.0,
            inconsistency: 0.25,
        };
        assert!(filter_sample(&g, &l, bad).is_err());
    }
}
