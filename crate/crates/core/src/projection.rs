//! Image-token part sets for part cross attention.
//!
//! Every labeled voxel center is projected through a pinhole camera. An image
//! token (one `P x P` patch) admits every part that lands inside it. There is
//! no depth test, so hidden voxels still contribute.
//!
//! Conventions: the world frame is the normalized object cube
//! `[-0.5, 0.5]^3`, the camera looks down `+z`, the image origin is the
//! top-left corner and `v` grows downward.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::attention::PartSet;
use crate::voxgrid::{Coord, PartId, SparseVoxelGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProjectionError {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("grid has no part labels")]
    MissingLabels,
}

/// Pinhole camera with world-to-camera extrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraParams {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
    focal: f64,
    principal_point: [f64; 2],
    image_size: [u32; 2],
    patch_size: u32,
}

const ORTHONORMAL_TOL: f64 = 1e-6;

impl CameraParams {
    pub fn new(
        rotation: [[f64; 3]; 3],
        translation: [f64; 3],
        focal: f64,
        principal_point: [f64; 2],
        image_size: [u32; 2],
        patch_size: u32,
    ) -> Result<Self, ProjectionError> {
        let bad = |m: String| Err(ProjectionError::InvalidCamera(m));
        if !(focal > 0.0 && focal.is_finite()) {
            return bad(format!("focal length {focal} must be positive"));
        }
        if patch_size == 0 {
            return bad("patch size must be at least 1".into());
        }
        if image_size[0] == 0 || image_size[1] == 0 {
            return bad("image size must be positive".into());
        }
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| rotation[i][k] * rotation[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (d - want).abs() > ORTHONORMAL_TOL {
                    return bad("rotation is not orthonormal".into());
                }
            }
        }
        Ok(Self {
            rotation,
            translation,
            focal,
            principal_point,
            image_size,
            patch_size,
        })
    }

    /// Camera at `eye` looking at `target`; `up` fixes the roll (image up).
    pub fn look_at(
        eye: [f64; 3],
        target: [f64; 3],
        up: [f64; 3],
        focal: f64,
        image_size: [u32; 2],
        patch_size: u32,
    ) -> Result<Self, ProjectionError> {
        let forward = normalize(sub(target, eye))
            .ok_or_else(|| ProjectionError::InvalidCamera("eye equals target".into()))?;
        let down = [-up[0], -up[1], -up[2]];
        let right = normalize(cross(down, forward))
            .ok_or_else(|| ProjectionError::InvalidCamera("up is parallel to view direction".into()))?;
        let down = cross(forward, right);
        let rotation = [right, down, forward];
        let translation = [
            -dot3(right, eye),
            -dot3(down, eye),
            -dot3(forward, eye),
        ];
        let principal = [image_size[0] as f64 / 2.0, image_size[1] as f64 / 2.0];
        Self::new(rotation, translation, focal, principal, image_size, patch_size)
    }

    /// 224x224 image, 14-pixel patches (a 16x16 token grid).
    pub fn default_view(eye: [f64; 3]) -> Result<Self, ProjectionError> {
        Self::look_at(eye, [0.0; 3], [0.0, 1.0, 0.0], 224.0, [224, 224], 14)
    }

    pub fn rotation(&self) -> &[[f64; 3]; 3] {
        &self.rotation
    }
    pub fn translation(&self) -> [f64; 3] {
        self.translation
    }
    pub fn focal(&self) -> f64 {
        self.focal
    }
    pub fn principal_point(&self) -> [f64; 2] {
        self.principal_point
    }
    pub fn image_size(&self) -> [u32; 2] {
        self.image_size
    }
    pub fn patch_size(&self) -> u32 {
        self.patch_size
    }

    /// Token grid `(rows, cols)` = `(ceil(H / P), ceil(W / P))`.
    pub fn token_grid(&self) -> (usize, usize) {
        let p = self.patch_size;
        (self.image_size[1].div_ceil(p) as usize, self.image_size[0].div_ceil(p) as usize)
    }

    /// Pixel of a world point, or `None` if behind the camera or off-image.
    pub fn project_point(&self, w: [f64; 3]) -> Option<[f64; 2]> {
        let r = &self.rotation;
        let c = [
            dot3(r[0], w) + self.translation[0],
            dot3(r[1], w) + self.translation[1],
            dot3(r[2], w) + self.translation[2],
        ];
        if c[2] <= 0.0 {
            return None;
        }
        let u = self.focal * c[0] / c[2] + self.principal_point[0];
        let v = self.focal * c[1] / c[2] + self.principal_point[1];
        let inside = u >= 0.0 && v >= 0.0 && u < self.image_size[0] as f64 && v < self.image_size[1] as f64;
        inside.then_some([u, v])
    }

    /// Row-major token index of an in-image pixel.
    pub fn token_of(&self, pixel: [f64; 2]) -> usize {
        let (_, cols) = self.token_grid();
        let p = self.patch_size as f64;
        let row = (pixel[1] / p).floor() as usize;
        let col = (pixel[0] / p).floor() as usize;
        row * cols + col
    }

    /// Text form: `R` row-major, `t`, then `f cx cy W H P`, whitespace separated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in &self.rotation {
            let _ = writeln!(s, "{} {} {}", row[0], row[1], row[2]);
        }
        let t = self.translation;
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            self.focal,
            self.principal_point[0],
            self.principal_point[1],
            self.image_size[0],
            self.image_size[1],
            self.patch_size
        );
        s
    }
}

impl FromStr for CameraParams {
    type Err = ProjectionError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let nums = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| ProjectionError::Parse(format!("not a number: {tok:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() != 18 {
            return Err(ProjectionError::Parse(format!(
                "camera file has {} numbers, expected 18",
                nums.len()
            )));
        }
        let int = |x: f64, what: &str| -> Result<u32, ProjectionError> {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(ProjectionError::Parse(format!("{what} must be a non-negative integer, got {x}")))
            }
        };
        let rotation = [
            [nums[0], nums[1], nums[2]],
            [nums[3], nums[4], nums[5]],
            [nums[6], nums[7], nums[8]],
        ];
        Self::new(
            rotation,
            [nums[9], nums[10], nums[11]],
            nums[12],
            [nums[13], nums[14]],
            [int(nums[15], "W")?, int(nums[16], "H")?],
            int(nums[17], "P")?,
        )
    }
}

/// World position of a voxel center: `(p + 0.5) / N - 0.5`.
pub fn voxel_center(p: Coord, resolution: u32) -> [f64; 3] {
    let n = resolution as f64;
    p.map(|c| (c as f64 + 0.5) / n - 0.5)
}

pub fn project_voxel(p: Coord, resolution: u32, camera: &CameraParams) -> Option<[f64; 2]> {
    camera.project_point(voxel_center(p, resolution))
}

/// Per-token part sets over a `rows x cols` patch grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTokenMask {
    rows: usize,
    cols: usize,
    part_sets: Vec<PartSet>,
}

impl ImageTokenMask {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            part_sets: vec![PartSet::new(); rows * cols],
        }
    }

    pub fn from_sets(rows: usize, cols: usize, part_sets: Vec<PartSet>) -> Result<Self, ProjectionError> {
        if part_sets.len() != rows * cols {
            return Err(ProjectionError::Parse(format!(
                "{} token sets for a {rows}x{cols} grid",
                part_sets.len()
            )));
        }
        if part_sets.iter().any(|s| s.contains(&0)) {
            return Err(ProjectionError::Parse("part index 0 in token set".into()));
        }
        Ok(Self { rows, cols, part_sets })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.part_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.part_sets.is_empty()
    }

    pub fn part_sets(&self) -> &[PartSet] {
        &self.part_sets
    }

    pub fn into_part_sets(self) -> Vec<PartSet> {
        self.part_sets
    }

    pub fn insert(&mut self, token: usize, part: PartId) {
        self.part_sets[token].insert(part);
    }

    /// Parts that appear in at least one token.
    pub fn covered_parts(&self) -> PartSet {
        self.part_sets.iter().flatten().copied().collect()
    }

    /// Parses the `j: g1 g2 ...` text form for a grid of the given shape.
    pub fn parse(text: &str, rows: usize, cols: usize) -> Result<Self, ProjectionError> {
        let mut mask = Self::empty(rows, cols);
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| ProjectionError::Parse(format!("missing ':' in {line:?}")))?;
            let j: usize = head
                .trim()
                .parse()
                .map_err(|_| ProjectionError::Parse(format!("bad token index in {line:?}")))?;
            if j >= mask.len() {
                return Err(ProjectionError::Parse(format!("token {j} outside {rows}x{cols} grid")));
            }
            for g in tail.split_whitespace() {
                let g: PartId = g
                    .parse()
                    .map_err(|_| ProjectionError::Parse(format!("bad part index {g:?}")))?;
                if g == 0 {
                    return Err(ProjectionError::Parse("part index 0 in token set".into()));
                }
                mask.insert(j, g);
            }
        }
        Ok(mask)
    }
}

/// One line per token: `j:` followed by its sorted part indices.
impl fmt::Display for ImageTokenMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, set) in self.part_sets.iter().enumerate() {
            write!(f, "{j}:")?;
            for g in set {
                write!(f, " {g}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Union of projected part indices per image token.
pub fn build_token_mask(grid: &SparseVoxelGrid, camera: &CameraParams) -> Result<ImageTokenMask, ProjectionError> {
    let labels = grid.labels().ok_or(ProjectionError::MissingLabels)?;
    let (rows, cols) = camera.token_grid();
    let mut mask = ImageTokenMask::empty(rows, cols);
    for (&p, &a) in grid.coords().iter().zip(labels) {
        if let Some(pixel) = project_voxel(p, grid.resolution(), camera) {
            mask.insert(camera.token_of(pixel), a);
        }
    }
    Ok(mask)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot3(a, a).sqrt();
    (n > 1e-12).then(|| a.map(|x| x / n))
}
