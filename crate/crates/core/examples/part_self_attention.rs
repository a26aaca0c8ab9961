//! Blocked part self attention against the masked dense reference, with the
//! FLOP ratio of the two.
//!
//! ```text
//! cargo run --release --example part_self_attention -- [tokens] [dim] [parts]
//! ```

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use partvox::attention::{count_flops, full_attention, part_self_attention, synth};
use partvox::PartLabeling;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let tokens = args.first().copied().unwrap_or(2048);
    let dim = args.get(1).copied().unwrap_or(64);
    let parts = args.get(2).copied().unwrap_or(8) as u32;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let labels = synth::random_labels(&mut rng, tokens, parts);
    let inst = synth::self_instance(&mut rng, tokens, dim, dim, labels.clone());

    let t = Instant::now();
    let blocked = part_self_attention(&inst)?;
    let blocked_ms = t.elapsed().as_secs_f64() * 1e3;
    let t = Instant::now();
    let oracle = full_attention(&inst, Some(&inst.part_mask()?))?;
    let masked_ms = t.elapsed().as_secs_f64() * 1e3;

    let sizes = PartLabeling::new(labels, parts)?.group_sizes();
    let flops = count_flops(tokens, tokens, dim, dim, &sizes, None)?;
    println!("L={tokens} d={dim} K={parts}, group sizes {sizes:?}");
    println!("max relative error {:.2e}", blocked.max_relative_error(&oracle));
    println!("blocked {blocked_ms:.1} ms, masked dense {masked_ms:.1} ms");
    println!(
        "flops: full {} part {} ratio {:.3}",
        flops.full_flops, flops.part_flops, flops.ratio
    );
    Ok(())
}
