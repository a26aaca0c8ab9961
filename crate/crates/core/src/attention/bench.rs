use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    count_flops, full_attention, part_cross_attention, part_self_attention, synth, AttentionError,
    AttentionInstance, FlopReport, Mode, PartSet,
};
use crate::matrix::Matrix;

pub const CSV_HEADER: &str = "mode,L,d,K,part_ms,full_ms,flop_ratio,wall_ratio";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub mode: Mode,
    pub tokens: usize,
    pub dim: usize,
    pub parts: u32,
    pub repetitions: usize,
    pub seed: u64,
    /// Number of keys in cross mode: one 16x16 patch grid by default.
    pub image_tokens: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            mode: Mode::SelfAttention,
            tokens: 16384,
            dim: 64,
            parts: 8,
            repetitions: 3,
            seed: 0,
            image_tokens: 256,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub mode: Mode,
    pub tokens: usize,
    pub dim: usize,
    pub parts: u32,
    /// Median wall time of the part path.
    pub part_ms: f64,
    /// Median wall time of the dense unmasked path.
    pub full_ms: f64,
    pub flops: FlopReport,
}

impl BenchRecord {
    pub fn wall_ratio(&self) -> f64 {
        self.full_ms / self.part_ms
    }

    /// One row under [`CSV_HEADER`], without a trailing newline.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{:.3},{:?},{:.3}",
            self.mode,
            self.tokens,
            self.dim,
            self.parts,
            self.part_ms,
            self.full_ms,
            self.flops.ratio,
            self.wall_ratio()
        )
    }
}

/// Synthetic instance with balanced groups. Cross mode gives image token `j`
/// the single part `j mod K + 1`.
pub fn bench_instance(config: &BenchConfig) -> Result<AttentionInstance, AttentionError> {
    validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let labels = synth::balanced_labels(&mut rng, config.tokens, config.parts);
    Ok(match config.mode {
        Mode::SelfAttention => synth::self_instance(&mut rng, config.tokens, config.dim, config.dim, labels),
        Mode::CrossAttention => {
            let sets = (0..config.image_tokens)
                .map(|j| PartSet::from([(j as u32 % config.parts) + 1]))
                .collect();
            synth::cross_instance(&mut rng, config.dim, config.dim, labels, sets)
        }
    })
}

fn validate(config: &BenchConfig) -> Result<(), AttentionError> {
    if config.parts == 0 {
        return Err(AttentionError::ZeroDimension("parts"));
    }
    if config.dim == 0 {
        return Err(AttentionError::ZeroDimension("dim"));
    }
    if config.repetitions == 0 {
        return Err(AttentionError::ZeroDimension("repetitions"));
    }
    if config.tokens < config.parts as usize {
        return Err(AttentionError::Config(format!(
            "tokens ({}) must be at least parts ({})",
            config.tokens, config.parts
        )));
    }
    if config.mode == Mode::CrossAttention && config.image_tokens == 0 {
        return Err(AttentionError::ZeroDimension("image tokens"));
    }
    Ok(())
}

/// Times the part path against dense attention on the same instance.
pub fn bench_attention(config: &BenchConfig) -> Result<BenchRecord, AttentionError> {
    let inst = bench_instance(config)?;
    let labels = inst.query_labels().expect("labeled");
    let mut sizes = vec![0usize; config.parts as usize];
    for &a in labels {
        sizes[a as usize - 1] += 1;
    }
    let flops = count_flops(
        inst.queries().rows(),
        inst.keys().rows(),
        inst.queries().cols(),
        inst.values().cols(),
        &sizes,
        inst.key_part_sets(),
    )?;

    let part = || match config.mode {
        Mode::SelfAttention => part_self_attention(&inst),
        Mode::CrossAttention => part_cross_attention(&inst),
    };
    let full = || full_attention(&inst, None);
    let part_ms = median_ms(config.repetitions, part)?;
    let full_ms = median_ms(config.repetitions, full)?;

    Ok(BenchRecord {
        mode: config.mode,
        tokens: config.tokens,
        dim: config.dim,
        parts: config.parts,
        part_ms,
        full_ms,
        flops,
    })
}

fn median_ms(
    reps: usize,
    mut f: impl FnMut() -> Result<Matrix, AttentionError>,
) -> Result<f64, AttentionError> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        let out = f()?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(out);
        times.push(elapsed);
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    })
}
