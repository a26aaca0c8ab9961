//! Times blocked part attention against dense attention and prints CSV rows.
//!
//! ```text
//! cargo run --release --example bench_speedup -- [tokens] [dim] [parts] [reps]
//! ```

use partvox::attention::{bench_attention, BenchConfig, Mode, CSV_HEADER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let arg = |i: usize, default: usize| args.get(i).copied().unwrap_or(default);
    let tokens = arg(0, 16384);
    let dim = arg(1, 64);
    let parts = arg(2, 8) as u32;
    let repetitions = arg(3, 3);

    println!("{CSV_HEADER}");
    for mode in [Mode::SelfAttention, Mode::CrossAttention] {
        let config = BenchConfig {
            mode,
            tokens,
            dim,
            parts,
            repetitions,
            ..Default::default()
        };
        let record = bench_attention(&config)?;
        println!("{}", record.csv_row());
    }
    Ok(())
}
