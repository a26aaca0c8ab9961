//! Filter metric percentiles over a synthetic corpus of sphere clusters.
//!
//! ```text
//! cargo run --release --example filter_percentiles -- [meshes] [parts]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use partvox::annotate::{annotate, AnnotateConfig, FeatureSource, TriangleMesh};

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let (lo, hi) = (rank.floor() as usize, rank.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let meshes = args.first().copied().unwrap_or(40);
    let parts = args.get(1).copied().unwrap_or(8) as u32;
    let config = AnnotateConfig {
        resolution: 32,
        parts,
        samples: 50_000,
        ..Default::default()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut ratios, mut incons, mut accepted) = (Vec::new(), Vec::new(), 0);
    for i in 0..meshes {
        // 1 to 12 random spheres per mesh.
        let mut mesh = TriangleMesh::uv_sphere([0.0; 3], rng.random_range(0.1..0.4), 10, 14);
        for _ in 0..rng.random_range(0..12) {
            let c = [0; 3].map(|_: i32| rng.random_range(-0.6..0.6));
            mesh.merge(&TriangleMesh::uv_sphere(c, rng.random_range(0.05..0.3), 10, 14));
        }
        let a = annotate(&mesh, &AnnotateConfig { seed: i as u64, ..config.clone() }, FeatureSource::Geometric)?;
        ratios.push(a.report.squared_ratio_sum);
        incons.push(a.report.neighborhood_inconsistency);
        accepted += usize::from(a.report.accepted);
    }
    ratios.sort_by(f64::total_cmp);
    incons.sort_by(f64::total_cmp);

    println!("{meshes} meshes, K={parts}, {accepted} accepted at 0.25/0.25");
    println!("{:>10} {:>18} {:>26}", "percentile", "squared_ratio_sum", "neighborhood_inconsistency");
    for p in [5.0, 25.0, 50.0, 75.0, 95.0] {
        println!("{p:>10} {:>18.4} {:>26.4}", percentile(&ratios, p), percentile(&incons, p));
    }
    Ok(())
}
