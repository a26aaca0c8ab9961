//! Residual attention stack over sparse voxel features.
//!
//! Two parameter-free residual blocks, with `q = k = v = features` and scale
//! `1/sqrt(C)`:
//!
//! * [`coarse_full_block`]: pool voxels one level (`N -> N/2`, mean of
//!   children), run unmasked attention over the coarse tokens, copy each
//!   coarse result back to its children and add.
//! * [`part_block`]: add part self attention at full resolution.
//!
//! [`run_stack`] repeats one coarse block followed by three part blocks. The
//! coarse block is the only path by which information crosses part
//! boundaries.

use crate::attention::{full_attention, part_self_attention, AttentionError, AttentionInstance};
use crate::matrix::Matrix;
use crate::voxgrid::{Coord, SparseVoxelGrid, Violation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StackError {
    #[error("resolution {0} is not even")]
    OddResolution(u32),
    #[error("grid has no features")]
    MissingFeatures,
    #[error("grid has no part labels")]
    MissingLabels,
    #[error("features are {found_rows}x{found_cols}, expected {rows}x{cols}")]
    FeatureShape {
        rows: usize,
        cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("stack needs at least one unit and one channel")]
    EmptyConfig,
    #[error(transparent)]
    Attention(#[from] AttentionError),
    #[error(transparent)]
    Grid(#[from] Violation),
}

/// Fine-to-coarse parent map for one octree level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseMap {
    parents: Vec<usize>,
    child_counts: Vec<usize>,
    coarse: SparseVoxelGrid,
}

impl CoarseMap {
    /// Parent of fine voxel `p` is `p / 2`; coords only.
    pub fn from_grid(grid: &SparseVoxelGrid) -> Result<Self, StackError> {
        let n = grid.resolution();
        if !n.is_multiple_of(2) {
            return Err(StackError::OddResolution(n));
        }
        let parent_of = |p: &Coord| p.map(|c| c / 2);
        let mut coarse: Vec<Coord> = grid.coords().iter().map(parent_of).collect();
        coarse.sort_unstable();
        coarse.dedup();
        let parents: Vec<usize> = grid
            .coords()
            .iter()
            .map(|p| coarse.binary_search(&parent_of(p)).expect("parent present"))
            .collect();
        let mut child_counts = vec![0usize; coarse.len()];
        for &q in &parents {
            child_counts[q] += 1;
        }
        let coarse = SparseVoxelGrid::from_coords(n / 2, coarse)?;
        Ok(Self {
            parents,
            child_counts,
            coarse,
        })
    }

    /// Coarse row of each fine voxel.
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn child_counts(&self) -> &[usize] {
        &self.child_counts
    }

    pub fn coarse(&self) -> &SparseVoxelGrid {
        &self.coarse
    }

    pub fn fine_len(&self) -> usize {
        self.parents.len()
    }

    /// Mean of each coarse voxel's children.
    pub fn pool(&self, fine: &Matrix) -> Result<Matrix, StackError> {
        check_rows(fine, self.fine_len())?;
        let mut out = Matrix::zeros(self.coarse.len(), fine.cols());
        for (i, &q) in self.parents.iter().enumerate() {
            for (o, &x) in out.row_mut(q).iter_mut().zip(fine.row(i)) {
                *o += x;
            }
        }
        for (q, &count) in self.child_counts.iter().enumerate() {
            let c = count as f64;
            for o in out.row_mut(q) {
                *o /= c;
            }
        }
        Ok(out)
    }
}

fn check_rows(m: &Matrix, rows: usize) -> Result<(), StackError> {
    if m.rows() != rows {
        return Err(StackError::FeatureShape {
            rows,
            cols: m.cols(),
            found_rows: m.rows(),
            found_cols: m.cols(),
        });
    }
    Ok(())
}

/// Coarse map whose coarse grid carries the mean features of the fine grid.
pub fn downsample(grid: &SparseVoxelGrid) -> Result<CoarseMap, StackError> {
    let features = grid.features().ok_or(StackError::MissingFeatures)?;
    let mut map = CoarseMap::from_grid(grid)?;
    let pooled = map.pool(&features.map(f64::from))?;
    map.coarse = map.coarse.clone().with_features(pooled.map(|x| x as f32))?;
    Ok(map)
}

/// Each fine voxel receives its parent's row.
pub fn upsample(map: &CoarseMap, coarse_features: &Matrix) -> Result<Matrix, StackError> {
    check_rows(coarse_features, map.coarse.len())?;
    Ok(coarse_features.gather_rows(&map.parents))
}

fn self_attention_unmasked(features: &Matrix) -> Result<Matrix, StackError> {
    let inst = AttentionInstance::dense(features.clone(), features.clone(), features.clone())?;
    Ok(full_attention(&inst, None)?)
}

/// `features + upsample(attention(downsample(features)))`.
pub fn coarse_full_block(grid: &SparseVoxelGrid, features: &Matrix) -> Result<Matrix, StackError> {
    check_rows(features, grid.len())?;
    if grid.is_empty() {
        return Ok(features.clone());
    }
    let map = CoarseMap::from_grid(grid)?;
    coarse_full_with(&map, features)
}

fn coarse_full_with(map: &CoarseMap, features: &Matrix) -> Result<Matrix, StackError> {
    let coarse = map.pool(features)?;
    let attended = self_attention_unmasked(&coarse)?;
    Ok(features.add(&upsample(map, &attended)?))
}

/// `features + part_self_attention(features)` using the grid's labels.
pub fn part_block(grid: &SparseVoxelGrid, features: &Matrix) -> Result<Matrix, StackError> {
    let labels = grid.labels().ok_or(StackError::MissingLabels)?;
    check_rows(features, grid.len())?;
    if grid.is_empty() {
        return Ok(features.clone());
    }
    let inst = AttentionInstance::part_self_shared(features, labels.to_vec())?;
    Ok(features.add(&part_self_attention(&inst)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    CoarseFull,
    Part,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackConfig {
    pub units: usize,
    pub channels: usize,
}

impl StackConfig {
    pub fn new(units: usize, channels: usize) -> Result<Self, StackError> {
        if units == 0 || channels == 0 {
            return Err(StackError::EmptyConfig);
        }
        Ok(Self { units, channels })
    }

    /// `units` repetitions of one coarse block and three part blocks.
    pub fn blocks(&self) -> Vec<Block> {
        [Block::CoarseFull, Block::Part, Block::Part, Block::Part].repeat(self.units)
    }
}

/// Applies `blocks` in order.
pub fn run_blocks(grid: &SparseVoxelGrid, features: &Matrix, blocks: &[Block]) -> Result<Matrix, StackError> {
    check_rows(features, grid.len())?;
    if blocks.contains(&Block::Part) && grid.labels().is_none() {
        return Err(StackError::MissingLabels);
    }
    let map = if blocks.contains(&Block::CoarseFull) && !grid.is_empty() {
        Some(CoarseMap::from_grid(grid)?)
    } else {
        None
    };
    let mut x = features.clone();
    for block in blocks {
        x = match (block, &map) {
            (Block::CoarseFull, Some(map)) => coarse_full_with(map, &x)?,
            (Block::CoarseFull, None) => x,
            (Block::Part, _) => part_block(grid, &x)?,
        };
    }
    Ok(x)
}

pub fn run_stack(grid: &SparseVoxelGrid, features: &Matrix, config: &StackConfig) -> Result<Matrix, StackError> {
    if config.units == 0 || config.channels == 0 {
        return Err(StackError::EmptyConfig);
    }
    if features.cols() != config.channels {
        return Err(StackError::FeatureShape {
            rows: grid.len(),
            cols: config.channels,
            found_rows: features.rows(),
            found_cols: features.cols(),
        });
    }
    run_blocks(grid, features, &config.blocks())
}
