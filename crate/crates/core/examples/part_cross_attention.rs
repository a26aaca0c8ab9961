//! Projects a labeled grid into a camera's patch grid, then runs part cross
//! attention from voxel tokens to the image tokens.
//!
//! ```text
//! cargo run --release --example part_cross_attention
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use partvox::attention::{count_flops, full_attention, part_cross_attention, synth};
use partvox::projection::{build_token_mask, CameraParams};
use partvox::SparseVoxelGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Three boxes on a 16^3 grid; part 3 sits on the far side of part 1.
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for x in 0..16 {
        for y in 4..12 {
            for z in 4..12 {
                let part = match (x, z) {
                    (0..=5, 4..=7) => 1,
                    (0..=5, _) => 3,
                    (10.., _) => 2,
                    _ => continue,
                };
                coords.push([x, y, z]);
                labels.push(part);
            }
        }
    }
    let grid = SparseVoxelGrid::from_coords(16, coords)?.with_labels(labels, 3)?;

    let camera = CameraParams::default_view([0.4, 0.9, -1.6])?;
    let mask = build_token_mask(&grid, &camera)?;
    let (rows, cols) = mask.shape();
    println!("{rows}x{cols} image tokens, parts seen {:?}", mask.covered_parts());
    for row in 0..rows {
        let line: String = (0..cols)
            .map(|col| match mask.part_sets()[row * cols + col].len() {
                0 => '.',
                1 => char::from_digit(*mask.part_sets()[row * cols + col].first().unwrap(), 10).unwrap(),
                _ => '+',
            })
            .collect();
        println!("  {line}");
    }
    println!("('+' marks patches shared by several parts)");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let labels = grid.labels().unwrap().to_vec();
    let sets = mask.into_part_sets();
    let inst = synth::cross_instance(&mut rng, 32, 32, labels, sets.clone());
    let out = part_cross_attention(&inst)?;
    let oracle = full_attention(&inst, Some(&inst.part_mask()?))?;
    println!("max relative error vs masked dense {:.2e}", out.max_relative_error(&oracle));

    let sizes = grid.labeling().unwrap().group_sizes();
    let flops = count_flops(grid.len(), sets.len(), 32, 32, &sizes, Some(&sets))?;
    println!("cross-attention flop ratio {:.2}", flops.ratio);
    Ok(())
}
