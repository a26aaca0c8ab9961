//! Runs the residual block stack and shows that part blocks alone keep parts
//! isolated while a coarse full-attention block mixes them.
//!
//! ```text
//! cargo run --release --example block_stack -- [units]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use partvox::attention::synth;
use partvox::blockstack::{downsample, run_blocks, run_stack, Block, StackConfig};
use partvox::SparseVoxelGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let units: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for x in 0..8 {
        for y in 0..8 {
            for z in 0..2 {
                coords.push([x, y, z]);
                labels.push(if x + y < 8 { 1 } else { 2 });
            }
        }
    }
    let grid = SparseVoxelGrid::from_coords(8, coords)?.with_labels(labels.clone(), 2)?;
    let channels = 16;
    let features = synth::uniform_matrix(&mut rng, grid.len(), channels);
    let map = downsample(&grid.clone().with_features(features.map(|x| x as f32))?)?;
    println!("{} voxels, {} coarse cells", grid.len(), map.coarse().len());

    let config = StackConfig::new(units, channels)?;
    println!("stack: {:?}", config.blocks());
    let out = run_stack(&grid, &features, &config)?;
    println!("output {}x{}, first row {:?}", out.rows(), out.cols(), &out.row(0)[..4]);

    let mut perturbed = features.clone();
    for (i, &a) in labels.iter().enumerate() {
        if a == 2 {
            for x in perturbed.row_mut(i) {
                *x += rng.random_range(-1.0..1.0);
            }
        }
    }
    let changed_in_part_1 = |blocks: &[Block]| -> Result<usize, Box<dyn std::error::Error>> {
        let a = run_blocks(&grid, &features, blocks)?;
        let b = run_blocks(&grid, &perturbed, blocks)?;
        Ok((0..grid.len()).filter(|&i| labels[i] == 1 && a.row(i) != b.row(i)).count())
    };
    let part_only = [Block::Part; 3];
    println!(
        "perturb part 2, part blocks only: {} of part 1's rows change",
        changed_in_part_1(&part_only)?
    );
    println!(
        "perturb part 2, with a coarse block: {} of part 1's rows change",
        changed_in_part_1(&config.blocks())?
    );
    Ok(())
}
