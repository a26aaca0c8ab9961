//! Acceptance gate. Runs every criterion at its stated tolerance and runtime
//! budget, printing one PASS/FAIL line each, and exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use partvox::annotate::{
    annotate, filter_sample, neighborhood_inconsistency, squared_ratio_sum, two_spheres, AnnotateConfig,
    FeatureSource, FilterThresholds,
};
use partvox::attention::{
    bench_attention, count_flops, full_attention, part_cross_attention, part_self_attention, synth, BenchConfig,
    Mode,
};
use partvox::blockstack::{run_blocks, Block};
use partvox::matrix::Matrix;
use partvox::projection::{build_token_mask, CameraParams};
use partvox::voxgrid::{read_uvox, write_uvox, Coord, GridParts, PartId, UvoxError, Violation};
use partvox::{PartLabeling, SparseVoxelGrid};

use common::{naive_attention, RawCamera};

type Check = fn() -> Result<String, String>;

const TOL: f64 = 1e-5;

fn main() -> ExitCode {
    let criteria: [(&str, u64, Check); 9] = [
        ("part self attention matches masked oracle", 120, self_oracle),
        ("part cross attention matches masked oracle", 120, cross_oracle),
        ("flop ratio is exact", 10, flop_ratio),
        ("blocked self attention is at least 3x faster", 300, speedup),
        ("filter metric values and thresholds", 10, filter_metrics),
        ("part blocks isolate parts", 30, isolation),
        ("two-spheres annotation end to end", 60, two_spheres_pipeline),
        ("token mask matches brute-force projection", 10, projection),
        ("uvox round trips and malformed headers", 30, serialization),
    ];
    let mut failed = 0;
    for (n, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (ok, detail) = match result {
            Ok(d) if over => (false, format!("{d}; over the {budget}s budget")),
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {}: {name} ({detail}) [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            n + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn self_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let len = rng.random_range(16..=2048);
        let parts = rng.random_range(1..=16);
        let d = rng.random_range(8..=64);
        let labels = synth::random_labels(&mut rng, len, parts);
        let inst = synth::self_instance(&mut rng, len, d, d, labels.clone());
        let fast = part_self_attention(&inst).map_err(|e| e.to_string())?;
        let mask = inst.part_mask().map_err(|e| e.to_string())?;
        let oracle = full_attention(&inst, Some(&mask)).map_err(|e| e.to_string())?;
        let err = fast.max_relative_error(&oracle);
        worst = worst.max(err);
        if case % 10 == 0 {
            let naive = naive_attention(inst.queries(), inst.keys(), inst.values(), inst.scale(), |i, j| {
                labels[i] == labels[j]
            });
            worst = worst.max(fast.max_relative_error(&naive));
        }
        ensure(worst <= TOL, || format!("case {case}: L={len} K={parts} d={d} error {worst:e}"))?;
    }
    Ok(format!("100 instances, max rel error {worst:.2e}"))
}

fn cross_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut fallback_cases = 0;
    for case in 0..100 {
        let len = rng.random_range(16..=2048);
        let keys = rng.random_range(16..=1024);
        let parts = rng.random_range(1..=16);
        let d = rng.random_range(8..=64);
        let labels = synth::random_labels(&mut rng, len, parts);
        // Sparse sets every third case so some parts have no admissible key.
        let density = if case % 3 == 0 { 0.002 } else { rng.random_range(0.05..0.6) };
        let sets = synth::random_part_sets(&mut rng, keys, parts, density);
        let covered: BTreeSet<PartId> = sets.iter().flatten().copied().collect();
        if labels.iter().any(|a| !covered.contains(a)) {
            fallback_cases += 1;
        }
        let inst = synth::cross_instance(&mut rng, d, d, labels.clone(), sets.clone());
        let fast = part_cross_attention(&inst).map_err(|e| e.to_string())?;
        let mask = inst.part_mask().map_err(|e| e.to_string())?;
        let oracle = full_attention(&inst, Some(&mask)).map_err(|e| e.to_string())?;
        worst = worst.max(fast.max_relative_error(&oracle));
        if case % 10 == 0 {
            let naive = naive_attention(inst.queries(), inst.keys(), inst.values(), inst.scale(), |i, j| {
                sets[j].contains(&labels[i])
            });
            worst = worst.max(fast.max_relative_error(&naive));
        }
        ensure(worst <= TOL, || format!("case {case}: L={len} M={keys} K={parts} d={d} error {worst:e}"))?;
    }
    ensure(fallback_cases > 0, || "no instance exercised the empty-part fallback".into())?;
    Ok(format!("100 instances, {fallback_cases} with fallback parts, max rel error {worst:.2e}"))
}

fn flop_ratio() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..1000 {
        let parts = rng.random_range(1..=32);
        let sizes: Vec<usize> = (0..parts).map(|_| rng.random_range(0..5000)).collect();
        let l: usize = sizes.iter().sum();
        if l == 0 {
            continue;
        }
        let (d, dv) = (rng.random_range(1..=128), rng.random_range(1..=128));
        let r = count_flops(l, l, d, dv, &sizes, None).map_err(|e| e.to_string())?;
        let sq: u128 = sizes.iter().map(|&s| (s * s) as u128).sum();
        let width = 2 * (d + dv) as u128;
        ensure(r.full_flops as u128 == width * (l * l) as u128, || "full count".into())?;
        ensure(r.part_flops as u128 == width * sq, || "part count".into())?;
        ensure(r.full_flops as u128 * sq == r.part_flops as u128 * (l * l) as u128, || {
            format!("ratio for sizes {sizes:?}")
        })?;
    }
    for k in [2usize, 4, 8, 16] {
        for group in [1usize, 7, 1024] {
            let sizes = vec![group; k];
            let l = group * k;
            let r = count_flops(l, l, 64, 64, &sizes, None).map_err(|e| e.to_string())?;
            ensure(r.full_flops == k as u64 * r.part_flops && r.ratio == k as f64, || {
                format!("balanced K={k}: ratio {}", r.ratio)
            })?;
        }
    }
    Ok("1000 random partitions, balanced K in {2,4,8,16}".into())
}

fn speedup() -> Result<String, String> {
    let config = BenchConfig {
        mode: Mode::SelfAttention,
        tokens: 16384,
        dim: 64,
        parts: 8,
        repetitions: 3,
        seed: 0,
        ..Default::default()
    };
    let record = bench_attention(&config).map_err(|e| e.to_string())?;
    let ratio = record.wall_ratio();
    let detail = format!(
        "median part {:.0} ms, full {:.0} ms, speedup {ratio:.2}x",
        record.part_ms, record.full_ms
    );
    ensure(ratio >= 3.0, || detail.clone())?;
    Ok(detail)
}

fn cube(n: u32) -> Vec<Coord> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                out.push([x, y, z]);
            }
        }
    }
    out
}

fn labeled(coords: Vec<Coord>, labels: Vec<PartId>, k: u32) -> Result<SparseVoxelGrid, String> {
    SparseVoxelGrid::from_coords(16, coords)
        .and_then(|g| g.with_labels(labels, k))
        .map_err(|e| e.to_string())
}

fn filter_metrics() -> Result<String, String> {
    let ratio = |labels: Vec<PartId>, k| {
        PartLabeling::new(labels, k)
            .map_err(|e| e.to_string())
            .and_then(|l| squared_ratio_sum(&l).map_err(|e| e.to_string()))
    };
    let eight: Vec<PartId> = (0..64).map(|i| i % 8 + 1).collect();
    for (got, want, what) in [
        (ratio(vec![1; 10], 1)?, 1.0, "single part"),
        (ratio(eight, 8)?, 0.125, "8 balanced parts"),
        (ratio(vec![1, 1, 1, 2], 2)?, 0.625, "sizes 3:1"),
    ] {
        ensure(got == want, || format!("squared_ratio_sum {what}: {got}"))?;
    }

    let incons = |g: &SparseVoxelGrid| neighborhood_inconsistency(g).map_err(|e| e.to_string());
    let uniform = labeled(cube(3), vec![1; 27], 1)?;
    let pair = labeled(vec![[0, 0, 0], [0, 0, 1]], vec![1, 2], 2)?;
    let pair_isolated = labeled(vec![[0, 0, 0], [0, 0, 1], [5, 5, 5]], vec![1, 2, 1], 2)?;
    for (got, want, what) in [
        (incons(&uniform)?, 0.0, "uniform labels"),
        (incons(&pair)?, 1.0, "adjacent differing pair"),
        (incons(&pair_isolated)?, 2.0 / 3.0, "pair plus isolated voxel"),
    ] {
        ensure(got == want, || format!("neighborhood_inconsistency {what}: {got}"))?;
    }

    // A sample is dropped only when a metric exceeds 0.25.
    let t = FilterThresholds::default();
    let accepted = |g: &SparseVoxelGrid| {
        let l = g.labeling().ok_or("unlabeled")?;
        filter_sample(g, &l, t).map(|r| r.accepted).map_err(|e| e.to_string())
    };
    let slabs = |k: u32| {
        let coords = cube(8);
        let labels = coords.iter().map(|c| c[0] * k / 8 + 1).collect();
        labeled(coords, labels, k)
    };
    // Unit-width slabs: ratio 0.125, every voxel touches another slab.
    let thin = slabs(8)?;
    // Width-2 slabs: ratio 0.25 exactly, inconsistency 6/8.
    let four = slabs(4)?;
    // 8^3 octant blocks of a 16^3 cube: inconsistency 1 - (7/8)^3.
    let octants = {
        let coords = cube(16);
        let labels = coords.iter().map(|c| (c[0] / 8) * 4 + (c[1] / 8) * 2 + c[2] / 8 + 1).collect();
        labeled(coords, labels, 8)?
    };
    let oct_incons = incons(&octants)?;
    ensure(oct_incons == 169.0 / 512.0, || format!("octant inconsistency {oct_incons}"))?;
    let quarters = {
        let coords = cube(16);
        let labels = coords.iter().map(|c| (c[0] / 8) * 2 + c[1] / 8 + 1).collect();
        labeled(coords, labels, 4)?
    };
    let q_incons = incons(&quarters)?;
    ensure(q_incons == 0.234375, || format!("quarter inconsistency {q_incons}"))?;
    let single = labeled(cube(4), vec![1; 64], 1)?;
    for (grid, want, what) in [
        (&quarters, true, "ratio 0.25 and inconsistency 0.234375"),
        (&octants, false, "ratio 0.125 and inconsistency 169/512"),
        (&thin, false, "inconsistency 1.0"),
        (&four, false, "inconsistency 0.75"),
        (&single, false, "ratio 1.0"),
    ] {
        let got = accepted(grid)?;
        ensure(got == want, || format!("{what}: accepted = {got}"))?;
    }
    Ok("all six rational values exact, boundary 0.25 accepted".into())
}

fn isolation() -> Result<String, String> {
    // Checkerboard labels: every coarse cell holds voxels of both parts.
    let coords = cube(4);
    let labels: Vec<PartId> = coords.iter().map(|c| (c[0] + c[1] + c[2]) % 2 + 1).collect();
    let grid = SparseVoxelGrid::from_coords(4, coords)
        .and_then(|g| g.with_labels(labels.clone(), 2))
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let channels = 8;
    let mut broken = 0;
    for trial in 0..20 {
        let features = synth::uniform_matrix(&mut rng, grid.len(), channels);
        let target = rng.random_range(1..=2);
        let mut perturbed = features.clone();
        for (i, &a) in labels.iter().enumerate() {
            if a == target {
                for x in perturbed.row_mut(i) {
                    *x += rng.random_range(-1.0..1.0);
                }
            }
        }
        for depth in [1, 3, 6] {
            let blocks = vec![Block::Part; depth];
            let a = run_blocks(&grid, &features, &blocks).map_err(|e| e.to_string())?;
            let b = run_blocks(&grid, &perturbed, &blocks).map_err(|e| e.to_string())?;
            for (i, &l) in labels.iter().enumerate() {
                let same = a.row(i).iter().zip(b.row(i)).all(|(x, y)| x.to_bits() == y.to_bits());
                ensure(l == target || same, || format!("trial {trial}, depth {depth}: row {i} changed"))?;
            }
        }
        let blocks = [Block::CoarseFull, Block::Part, Block::Part, Block::Part];
        let a = run_blocks(&grid, &features, &blocks).map_err(|e| e.to_string())?;
        let b = run_blocks(&grid, &perturbed, &blocks).map_err(|e| e.to_string())?;
        if labels.iter().enumerate().any(|(i, &l)| l != target && a.row(i) != b.row(i)) {
            broken += 1;
        }
    }
    ensure(broken == 20, || format!("coarse block leaked across parts in only {broken} of 20 trials"))?;
    Ok("20 perturbations bit-identical at depths 1, 3, 6; coarse block leaks in 20 of 20".into())
}

fn two_spheres_pipeline() -> Result<String, String> {
    let mesh = two_spheres(0.3, 0.15, 24, 32);
    let config = AnnotateConfig {
        resolution: 64,
        parts: 2,
        samples: 500_000,
        seed: 7,
        ..Default::default()
    };
    let run = || -> Result<(Vec<u8>, partvox::annotate::Annotation), String> {
        let a = annotate(&mesh, &config, FeatureSource::Geometric).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        write_uvox(&a.grid, &mut bytes).map_err(|e| e.to_string())?;
        Ok((bytes, a))
    };
    let (first, a) = run()?;
    let (second, _) = run()?;

    let half = config.resolution / 2;
    let separated = a
        .grid
        .coords()
        .iter()
        .zip(a.labeling.labels())
        .all(|(c, &label)| label == if c[0] < half { 1 } else { 2 });
    let incons = a.report.neighborhood_inconsistency;
    let ratio = a.report.squared_ratio_sum;
    let identical = first == second;
    let detail = format!(
        "{} voxels, separated {separated}, inconsistency {incons}, squared_ratio_sum {ratio}, accepted {}, \
         byte-identical rerun {identical}",
        a.grid.len(),
        a.report.accepted
    );
    let mut problems = Vec::new();
    if !separated {
        problems.push("labels do not separate the spheres".to_string());
    }
    if incons >= 0.05 {
        problems.push(format!("inconsistency {incons} >= 0.05"));
    }
    if !a.report.accepted {
        // Two parts force squared_ratio_sum >= 1/2, above the 0.25 default.
        problems.push(format!("rejected by default filters (squared_ratio_sum {ratio} > 0.25)"));
    }
    if !identical {
        problems.push("rerun produced different bytes".into());
    }
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

/// Three parts on a 16^3 grid. Parts 1 and 2 are stacked in depth so they
/// share image patches; part 3 sits apart.
fn three_part_scene() -> Result<SparseVoxelGrid, String> {
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for x in 2..7 {
        for y in 2..7 {
            coords.push([x, y, 3]);
            labels.push(1);
            coords.push([x, y, 12]);
            labels.push(2);
        }
    }
    for x in 10..14 {
        for y in 9..14 {
            for z in 7..9 {
                coords.push([x, y, z]);
                labels.push(3);
            }
        }
    }
    SparseVoxelGrid::from_coords(16, coords)
        .and_then(|g| g.with_labels(labels, 3))
        .map_err(|e| e.to_string())
}

fn projection() -> Result<String, String> {
    let grid = three_part_scene()?;
    let (s, c) = (0.6f64.sin(), 0.6f64.cos());
    let cameras = [
        RawCamera {
            r: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            t: [0.0, 0.0, 2.0],
            f: 200.0,
            cx: 112.0,
            cy: 112.0,
            w: 224,
            h: 224,
            p: 14,
        },
        // Rotated about y, off-center principal point, ragged last patches.
        RawCamera {
            r: [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]],
            t: [0.1, -0.05, 1.7],
            f: 150.0,
            cx: 100.0,
            cy: 90.0,
            w: 230,
            h: 200,
            p: 16,
        },
        // Looking away: nothing visible.
        RawCamera {
            r: [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
            t: [0.0, 0.0, -2.0],
            f: 200.0,
            cx: 112.0,
            cy: 112.0,
            w: 224,
            h: 224,
            p: 14,
        },
    ];
    let coords = grid.coords().to_vec();
    let labels = grid.labels().ok_or("unlabeled")?.to_vec();
    let mut unions = 0;
    for (n, raw) in cameras.iter().enumerate() {
        let camera: CameraParams = raw.to_text().parse().map_err(|e: partvox::projection::ProjectionError| e.to_string())?;
        let mask = build_token_mask(&grid, &camera).map_err(|e| e.to_string())?;
        let expected = raw.token_sets(16, &coords, &labels);
        ensure(mask.part_sets() == expected.as_slice(), || format!("camera {n}: token sets differ"))?;
        let covered: BTreeSet<PartId> = expected.iter().flatten().copied().collect();
        match n {
            0 | 1 => ensure(covered.len() == 3, || format!("camera {n} sees parts {covered:?}"))?,
            _ => ensure(covered.is_empty(), || format!("camera {n} sees parts {covered:?}"))?,
        }
        if n == 0 {
            unions = expected.iter().filter(|s| s.len() > 1).count();
            ensure(expected.iter().any(|s| s.contains(&1) && s.contains(&2)), || {
                "no patch holds both stacked parts".into()
            })?;
        }
    }
    Ok(format!("3 cameras exact, {unions} multi-part patches"))
}

fn random_grid(rng: &mut ChaCha8Rng) -> SparseVoxelGrid {
    let resolution = rng.random_range(1..=64u32);
    let max = (resolution as usize).pow(3).min(400);
    let len = rng.random_range(0..=max);
    let coords: BTreeSet<Coord> = (0..len)
        .map(|_| [0; 3].map(|_: u32| rng.random_range(0..resolution)))
        .collect();
    let coords: Vec<Coord> = coords.into_iter().collect();
    let n = coords.len();
    let mut grid = SparseVoxelGrid::from_coords(resolution, coords).expect("valid coords");
    if rng.random_bool(0.7) {
        let c = rng.random_range(1..=8);
        // Arbitrary bit patterns, NaN payloads and subnormals included.
        let data = (0..n * c).map(|_| f32::from_bits(rng.random())).collect();
        grid = grid.with_features(Matrix::from_vec(n, c, data).unwrap()).unwrap();
    }
    if rng.random_bool(0.7) {
        let k = rng.random_range(1..=255);
        let labels = synth::random_labels(rng, n, k);
        grid = grid.with_labels(labels, k).unwrap();
    }
    grid
}

fn same_bits(a: &SparseVoxelGrid, b: &SparseVoxelGrid) -> bool {
    let fa = a.features().map(|f| (f.cols(), f.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>()));
    let fb = b.features().map(|f| (f.cols(), f.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>()));
    a.resolution() == b.resolution()
        && a.coords() == b.coords()
        && a.labels() == b.labels()
        && a.num_parts() == b.num_parts()
        && fa == fb
}

fn serialization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut sample = Vec::new();
    for trial in 0..1000 {
        let grid = random_grid(&mut rng);
        let mut bytes = Vec::new();
        write_uvox(&grid, &mut bytes).map_err(|e| e.to_string())?;
        let back = read_uvox(bytes.as_slice()).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(same_bits(&grid, &back), || format!("trial {trial}: grid changed"))?;
        let mut again = Vec::new();
        write_uvox(&back, &mut again).map_err(|e| e.to_string())?;
        ensure(again == bytes, || format!("trial {trial}: bytes changed"))?;
        if sample.is_empty() && grid.len() > 3 && grid.features().is_some() && grid.labels().is_some() {
            sample = bytes;
        }
    }

    let expect = |bytes: &[u8], what: &str, ok: fn(&UvoxError) -> bool| -> Result<(), String> {
        match read_uvox(bytes) {
            Err(e) if ok(&e) => Ok(()),
            Err(e) => Err(format!("{what}: wrong error {e}")),
            Ok(_) => Err(format!("{what}: accepted")),
        }
    };
    let mut bad = sample.clone();
    bad[..4].copy_from_slice(b"XVOX");
    expect(&bad, "magic XVOX", |e| e.to_string() == "bad magic")?;
    let mut bad = sample.clone();
    bad[4..8].copy_from_slice(&2u32.to_le_bytes());
    expect(&bad, "version 2", |e| matches!(e, UvoxError::UnsupportedVersion(2)))?;
    for cut in 0..sample.len() {
        expect(&sample[..cut], "truncated stream", |e| e.to_string() == "truncated payload")?;
    }
    let mut bad = sample.clone();
    bad[28..32].copy_from_slice(&0u32.to_le_bytes());
    expect(&bad, "flags without sections", |e| matches!(e, UvoxError::Header(_)))?;
    let mut bad = sample.clone();
    bad[28] |= 4;
    expect(&bad, "unknown flag", |e| matches!(e, UvoxError::Header(_)))?;
    let mut bad = sample.clone();
    bad[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
    expect(&bad, "count beyond N^3", |e| matches!(e, UvoxError::Header(_)))?;

    // Decoded payloads that break grid invariants.
    let write_raw = |parts: GridParts| -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(b"UVOX");
        for v in [1u32, parts.resolution] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&(parts.coords.len() as u64).to_le_bytes());
        for v in [0u32, 0, 0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for c in &parts.coords {
            for v in c {
                b.extend_from_slice(&v.to_le_bytes());
            }
        }
        b
    };
    let dup = write_raw(GridParts::new(8, vec![[3, 3, 3], [3, 3, 3]]));
    expect(&dup, "duplicate", |e| matches!(e, UvoxError::Invalid(Violation::Duplicate { first: 0, second: 1 })))?;
    let unsorted = write_raw(GridParts::new(8, vec![[4, 0, 0], [1, 0, 0]]));
    expect(&unsorted, "unsorted", |e| matches!(e, UvoxError::Invalid(Violation::Unsorted { .. })))?;
    let out_of_range = write_raw(GridParts::new(8, vec![[8, 0, 0]]));
    expect(&out_of_range, "out of range", |e| matches!(e, UvoxError::Invalid(Violation::OutOfRange { .. })))?;
    let mut bad_label = sample.clone();
    let len = u64::from_le_bytes(sample[12..20].try_into().unwrap()) as usize;
    bad_label[32 + 12 * len] = 0;
    expect(&bad_label, "label 0", |e| matches!(e, UvoxError::Invalid(_)))?;

    Ok(format!("1000 round trips bit-identical, {} truncations and 9 corrupt inputs rejected", sample.len()))
}

