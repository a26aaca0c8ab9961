//! Part attention over sparse voxel grids.
//!
//! Tokens of a sparse voxel grid carry a part index. Part self attention lets a
//! token attend only to tokens of the same part, and part cross attention lets
//! it attend only to image tokens whose projected part set contains its part.
//! Grouping tokens by part turns one `L x L` attention into `K` small dense
//! ones, cutting the cost by up to a factor of `K`.
//!
//! # Modules
//!
//! * [`voxgrid`]: [`SparseVoxelGrid`], [`PartLabeling`] and the UVOX file format.
//! * [`annotate`]: mesh sampling, voxelization, agglomerative part clustering
//!   and the two segmentation filter metrics.
//! * [`attention`]: blocked part self/cross attention, the masked dense
//!   reference, FLOP accounting and a timing harness.
//! * [`projection`]: pinhole projection of labeled voxels to per-patch part sets.
//! * [`blockstack`]: residual stack of coarse full-attention and part-attention blocks.
//! * [`verify`]: randomized equivalence suites behind `partvox verify`.
//! * [`cli`]: the `partvox` command line.
//!
//! # Examples
//!
//! ```text
//! examples/
//! ├── uvox_roundtrip.rs        build a grid, write and read UVOX
//! ├── annotate_two_spheres.rs  mesh -> labeled voxels -> filter report
//! ├── part_self_attention.rs   blocked vs masked attention, FLOP ratio
//! ├── part_cross_attention.rs  camera projection -> token sets -> cross attention
//! ├── block_stack.rs           residual stack and cross-part isolation
//! ├── filter_percentiles.rs    filter metric percentiles over a synthetic corpus
//! └── bench_speedup.rs         wall-clock speedup, CSV output
//! ```
//!
//! Run one with `cargo run --release --example part_self_attention`.
//!
//! ```
//! use partvox::attention::{full_attention, part_self_attention, AttentionInstance};
//! use partvox::matrix::Matrix;
//!
//! let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
//! let inst = AttentionInstance::part_self_shared(&x, vec![1, 2, 1]).unwrap();
//! let blocked = part_self_attention(&inst).unwrap();
//! let oracle = full_attention(&inst, Some(&inst.part_mask().unwrap())).unwrap();
//! assert!(blocked.max_relative_error(&oracle) < 1e-12);
//! // token 1 is alone in part 2 and sees only itself
//! assert_eq!(blocked.row(1), &[0.0, 1.0]);
//! ```

pub mod annotate;
pub mod attention;
pub mod blockstack;
pub mod cli;
pub mod matrix;
pub mod projection;
pub mod verify;
pub mod voxgrid;

pub use matrix::Matrix;
pub use voxgrid::{PartLabeling, SparseVoxelGrid};
