//! UVOX binary codec.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic   "UVOX"
//! u32     version (1)
//! u32     resolution N
//! u64     voxel count L
//! u32     feature channels C (0 without features)
//! u32     part count K (0 without labels)
//! u32     flags: bit0 features, bit1 labels
//! L*3 u32 coords
//! L   u8  labels        (if bit1)
//! L*C f32 features      (if bit0, row-major)
//! ```

use std::io::{self, Read, Write};

use super::{GridParts, SparseVoxelGrid, Violation};
use crate::matrix::Matrix;

pub const UVOX_MAGIC: [u8; 4] = *b"UVOX";
pub const UVOX_VERSION: u32 = 1;

const FLAG_FEATURES: u32 = 1;
const FLAG_LABELS: u32 = 1 << 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 4 + 4 + 4;

#[derive(Debug, thiserror::Error)]
pub enum UvoxError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload")]
    Truncated,
    #[error("inconsistent header: {0}")]
    Header(&'static str),
    #[error("part count {0} does not fit in a u8 label")]
    TooManyParts(u32),
    #[error("invalid grid: {0}")]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for UvoxError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            UvoxError::Truncated
        } else {
            UvoxError::Io(e)
        }
    }
}

/// Writes `grid` and returns the number of bytes written.
pub fn write_uvox<W: Write>(grid: &SparseVoxelGrid, mut sink: W) -> Result<u64, UvoxError> {
    grid.validate()?;
    let k = grid.num_parts().unwrap_or(0);
    if k > u8::MAX as u32 {
        return Err(UvoxError::TooManyParts(k));
    }
    let channels = grid.features().map_or(0, |f| f.cols());
    let channels = u32::try_from(channels).map_err(|_| UvoxError::Header("too many channels"))?;
    let mut flags = 0;
    if grid.features().is_some() {
        flags |= FLAG_FEATURES;
    }
    if grid.labels().is_some() {
        flags |= FLAG_LABELS;
    }

    let len = grid.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + len * (12 + 1 + 4 * channels as usize));
    buf.extend_from_slice(&UVOX_MAGIC);
    buf.extend_from_slice(&UVOX_VERSION.to_le_bytes());
    buf.extend_from_slice(&grid.resolution().to_le_bytes());
    buf.extend_from_slice(&(len as u64).to_le_bytes());
    buf.extend_from_slice(&channels.to_le_bytes());
    buf.extend_from_slice(&k.to_le_bytes());
    buf.extend_from_slice(&flags.to_le_bytes());
    for c in grid.coords() {
        for v in c {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(labels) = grid.labels() {
        buf.extend(labels.iter().map(|&a| a as u8));
    }
    if let Some(f) = grid.features() {
        for v in f.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    sink.write_all(&buf)?;
    Ok(buf.len() as u64)
}

/// Reads one grid. Trailing bytes after the payload are not consumed.
pub fn read_uvox<R: Read>(mut source: R) -> Result<SparseVoxelGrid, UvoxError> {
    let mut magic = [0u8; 4];
    source.read_exact(&mut magic)?;
    if magic != UVOX_MAGIC {
        return Err(UvoxError::BadMagic);
    }
    let version = read_u32(&mut source)?;
    if version != UVOX_VERSION {
        return Err(UvoxError::UnsupportedVersion(version));
    }
    let resolution = read_u32(&mut source)?;
    let len = read_u64(&mut source)?;
    let channels = read_u32(&mut source)?;
    let num_parts = read_u32(&mut source)?;
    let flags = read_u32(&mut source)?;

    if flags & !(FLAG_FEATURES | FLAG_LABELS) != 0 {
        return Err(UvoxError::Header("unknown flag bits"));
    }
    let has_features = flags & FLAG_FEATURES != 0;
    let has_labels = flags & FLAG_LABELS != 0;
    if has_features != (channels > 0) {
        return Err(UvoxError::Header("feature flag disagrees with channel count"));
    }
    if has_labels != (num_parts > 0) {
        return Err(UvoxError::Header("label flag disagrees with part count"));
    }
    if num_parts > u8::MAX as u32 {
        return Err(UvoxError::TooManyParts(num_parts));
    }
    let cube = (resolution as u128).pow(3);
    if len as u128 > cube {
        return Err(UvoxError::Header("voxel count exceeds N^3"));
    }
    let len = usize::try_from(len).map_err(|_| UvoxError::Header("voxel count too large"))?;

    let coord_bytes = read_section(&mut source, len.checked_mul(12))?;
    let coords = coord_bytes
        .chunks_exact(12)
        .map(|c| {
            [
                u32::from_le_bytes(c[0..4].try_into().unwrap()),
                u32::from_le_bytes(c[4..8].try_into().unwrap()),
                u32::from_le_bytes(c[8..12].try_into().unwrap()),
            ]
        })
        .collect();
    let labels = if has_labels {
        let bytes = read_section(&mut source, Some(len))?;
        Some(bytes.into_iter().map(u32::from).collect())
    } else {
        None
    };
    let features = if has_features {
        let c = channels as usize;
        let bytes = read_section(&mut source, len.checked_mul(c).and_then(|n| n.checked_mul(4)))?;
        let data = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Some(Matrix::from_vec(len, c, data).expect("section length checked"))
    } else {
        None
    };

    let parts = GridParts {
        resolution,
        coords,
        features,
        labels,
        num_parts: has_labels.then_some(num_parts),
    };
    // Stored order must already be canonical.
    parts.validate()?;
    Ok(SparseVoxelGrid { parts })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, UvoxError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, UvoxError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Reads exactly `len` bytes without trusting `len` for the up-front allocation.
fn read_section<R: Read>(r: &mut R, len: Option<usize>) -> Result<Vec<u8>, UvoxError> {
    let len = len.ok_or(UvoxError::Header("section size overflows"))?;
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(UvoxError::Truncated);
    }
    Ok(buf)
}
