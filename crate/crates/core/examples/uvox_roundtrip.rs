//! Builds a small labeled grid with features, writes it as UVOX and reads it back.
//!
//! ```text
//! cargo run --example uvox_roundtrip -- [path]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use partvox::matrix::Matrix;
use partvox::voxgrid::{read_uvox, write_uvox};
use partvox::SparseVoxelGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("roundtrip.uvox").display().to_string());

    // Constructors accept any order and sort into canonical (x, y, z) order.
    let coords = vec![[3, 0, 1], [0, 2, 2], [1, 1, 1], [0, 0, 0]];
    let features = Matrix::from_rows(&[[0.3f32, 1.0], [0.0, 2.0], [0.1, 3.0], [0.0, 4.0]]);
    let grid = SparseVoxelGrid::from_coords(4, coords)?
        .with_features(features)?
        .with_labels(vec![1, 2, 1, 2], 2)?;
    println!("coords in canonical order: {:?}", grid.coords());

    let mut w = BufWriter::new(File::create(&path)?);
    let bytes = write_uvox(&grid, &mut w)?;
    w.flush()?;
    println!("wrote {bytes} bytes to {path}");

    let back = read_uvox(BufReader::new(File::open(&path)?))?;
    assert_eq!(back.coords(), grid.coords());
    assert_eq!(back.labels(), grid.labels());
    assert_eq!(back.features(), grid.features());
    println!("{}", back.labeling().expect("labeled"));

    let mut corrupt = std::fs::read(&path)?;
    corrupt[..4].copy_from_slice(b"XVOX");
    println!("corrupted magic: {}", read_uvox(corrupt.as_slice()).unwrap_err());
    let truncated = &std::fs::read(&path)?[..40];
    println!("cut after 40 bytes: {}", read_uvox(truncated).unwrap_err());
    Ok(())
}
