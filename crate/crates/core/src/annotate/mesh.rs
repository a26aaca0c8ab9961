//! Triangle meshes: construction, wavefront OBJ I/O and normalization.

use std::io::{self, BufRead, Write};

use super::AnnotateError;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, AnnotateError> {
        if let Some((t, tri)) = triangles
            .iter()
            .enumerate()
            .find(|(_, tri)| tri.iter().any(|&i| i >= vertices.len()))
        {
            return Err(AnnotateError::Mesh(format!(
                "triangle {t} references vertex {} of {}",
                tri.iter().max().unwrap(),
                vertices.len()
            )));
        }
        Ok(Self { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        let u = sub(b, a);
        let v = sub(c, a);
        let n = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Axis-aligned bounding box `(min, max)`; `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (
                [lo[0].min(v[0]), lo[1].min(v[1]), lo[2].min(v[2])],
                [hi[0].max(v[0]), hi[1].max(v[1]), hi[2].max(v[2])],
            )
        }))
    }

    /// Appends `other`, reindexing its triangles.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
    }

    /// Latitude/longitude sphere with `stacks >= 2` rings and `slices >= 3` segments.
    pub fn uv_sphere(center: Vec3, radius: f64, stacks: usize, slices: usize) -> Self {
        let stacks = stacks.max(2);
        let slices = slices.max(3);
        let mut vertices = vec![[center[0], center[1], center[2] + radius]];
        for s in 1..stacks {
            let theta = std::f64::consts::PI * s as f64 / stacks as f64;
            for k in 0..slices {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / slices as f64;
                vertices.push([
                    center[0] + radius * theta.sin() * phi.cos(),
                    center[1] + radius * theta.sin() * phi.sin(),
                    center[2] + radius * theta.cos(),
                ]);
            }
        }
        vertices.push([center[0], center[1], center[2] - radius]);
        let south = vertices.len() - 1;
        let ring = |s: usize, k: usize| 1 + (s - 1) * slices + (k % slices);

        let mut triangles = Vec::new();
        for k in 0..slices {
            triangles.push([0, ring(1, k), ring(1, k + 1)]);
        }
        for s in 1..stacks - 1 {
            for k in 0..slices {
                let (a, b) = (ring(s, k), ring(s, k + 1));
                let (c, d) = (ring(s + 1, k), ring(s + 1, k + 1));
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            }
        }
        for k in 0..slices {
            triangles.push([south, ring(stacks - 1, k + 1), ring(stacks - 1, k)]);
        }
        Self { vertices, triangles }
    }

    /// Parses `v x y z` and `f a b c ...` records; polygons are fan-triangulated.
    /// Face corners may use `i`, `i/t`, `i//n` or `i/t/n` forms and negative
    /// (relative) indices. Other records are ignored.
    pub fn read_obj<R: BufRead>(reader: R) -> Result<Self, AnnotateError> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |msg: String| AnnotateError::Mesh(format!("line {}: {msg}", lineno + 1));
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("v") => {
                    let coords: Vec<f64> = tokens
                        .take(3)
                        .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad coordinate {t:?}"))))
                        .collect::<Result<_, _>>()?;
                    if coords.len() != 3 {
                        return Err(err("vertex needs three coordinates".into()));
                    }
                    vertices.push([coords[0], coords[1], coords[2]]);
                }
                Some("f") => {
                    let corners: Vec<usize> = tokens
                        .map(|t| {
                            let idx = t.split('/').next().unwrap_or("");
                            let idx: i64 = idx.parse().map_err(|_| err(format!("bad face index {t:?}")))?;
                            resolve_index(idx, vertices.len()).ok_or_else(|| err(format!("face index {idx} out of range")))
                        })
                        .collect::<Result<_, _>>()?;
                    if corners.len() < 3 {
                        return Err(err("face needs at least three corners".into()));
                    }
                    for k in 1..corners.len() - 1 {
                        triangles.push([corners[0], corners[k], corners[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn write_obj<W: Write>(&self, mut w: W) -> io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}

fn resolve_index(idx: i64, count: usize) -> Option<usize> {
    let count = count as i64;
    let zero_based = match idx {
        i if i > 0 => i - 1,
        i if i < 0 => count + i,
        _ => return None,
    };
    (0..count).contains(&zero_based).then_some(zero_based as usize)
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Uniformly scales and translates so the bounding box is centered at the
/// origin with its longest side equal to 1.
pub fn normalize_mesh(mesh: &TriangleMesh) -> Result<TriangleMesh, AnnotateError> {
    let (lo, hi) = mesh.bounds().ok_or(AnnotateError::DegenerateMesh)?;
    let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(AnnotateError::DegenerateMesh);
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])];
    let vertices = mesh
        .vertices
        .iter()
        .map(|v| [(v[0] - center[0]) / extent, (v[1] - center[1]) / extent, (v[2] - center[2]) / extent])
        .collect();
    Ok(TriangleMesh {
        vertices,
        triangles: mesh.triangles.clone(),
    })
}
