//! Point-cloud and mesh data model, mesh sampling, normalization, and the
//! jitter/translate/rotate transforms used by the robustness probe.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn sub(&self, o: &Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(&self, o: &Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(&self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dist(&self, o: &Point3) -> f64 {
        self.sub(o).norm()
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }
}

/// Ordered list of 3D points. Losses treat it with set semantics; the order
/// only matters for file round-trips and per-point label alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub label: Option<u32>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        PointCloud { points, label: None }
    }

    pub fn with_label(points: Vec<Point3>, label: u32) -> Self {
        PointCloud { points, label: Some(label) }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point3 {
        let n = self.points.len() as f64;
        let mut c = Point3::new(0.0, 0.0, 0.0);
        for p in &self.points {
            c = c.add(p);
        }
        c.scale(1.0 / n)
    }
}

/// Triangle mesh; also reused as the container for 2D Delaunay output
/// (z = 0, faces indexing the input pixel list).
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Validates face indices and distinctness.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for f in &faces {
            for &i in f {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, nverts: n });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::NonTriangleFace(2));
            }
        }
        Ok(TriMesh { vertices, faces })
    }

    pub fn triangle_area(&self, f: &[usize; 3]) -> f64 {
        let a = self.vertices[f[0]];
        let b = self.vertices[f[1]];
        let c = self.vertices[f[2]];
        b.sub(&a).cross(&c.sub(&a)).norm() * 0.5
    }
}

/// One probe transform.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    /// Per-coordinate Gaussian noise with the given sigma, clipped to ±clip.
    Jitter { sigma: f64, clip: f64 },
    /// One uniform offset in [-range, range]^3 shared by all points.
    Translate { range: f64 },
    /// One rigid rotation about the origin; None samples each Euler angle
    /// uniformly in [0, 2π).
    Rotate { angles: Option<[f64; 3]> },
}

impl TransformSpec {
    pub fn default_jitter() -> Self {
        TransformSpec::Jitter { sigma: 0.01, clip: 0.05 }
    }

    pub fn default_translate() -> Self {
        TransformSpec::Translate { range: 0.2 }
    }

    pub fn default_rotate() -> Self {
        TransformSpec::Rotate { angles: None }
    }
}

/// Rotation matrix from Euler angles, composed as Rz(yaw)·Ry(pitch)·Rx(roll).
pub fn euler_to_matrix(yaw: f64, pitch: f64, roll: f64) -> [[f64; 3]; 3] {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
    let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
    mat_mul(&mat_mul(&rz, &ry), &rx)
}

pub fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    m
}

pub fn mat_apply(m: &[[f64; 3]; 3], p: &Point3) -> Point3 {
    Point3::new(
        m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
        m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
        m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
    )
}

pub fn mat_transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

/// Center the cloud at the origin and scale its max norm to 1. A cloud of
/// coincident points is centered but left unscaled.
pub fn normalize_unit_sphere(cloud: &PointCloud) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud("normalize_unit_sphere"));
    }
    let c = cloud.centroid();
    let mut centered: Vec<Point3> = cloud.points.iter().map(|p| p.sub(&c)).collect();
    let max_norm = centered.iter().map(|p| p.norm()).fold(0.0_f64, f64::max);
    if max_norm > 1e-12 {
        let s = 1.0 / max_norm;
        for p in &mut centered {
            *p = p.scale(s);
        }
    }
    Ok(PointCloud { points: centered, label: cloud.label })
}

/// Apply one probe transform; point count is always preserved.
pub fn apply_transform<R: Rng>(cloud: &PointCloud, spec: &TransformSpec, rng: &mut R) -> PointCloud {
    let points = match spec {
        TransformSpec::Jitter { sigma, clip } => cloud
            .points
            .iter()
            .map(|p| {
                let mut noise = [0.0; 3];
                for n in &mut noise {
                    let g: f64 = StandardNormal.sample(rng);
                    *n = (g * sigma).clamp(-clip, *clip);
                }
                Point3::new(p.x + noise[0], p.y + noise[1], p.z + noise[2])
            })
            .collect(),
        TransformSpec::Translate { range } => {
            let v = Point3::new(
                rng.gen_range(-range..=*range),
                rng.gen_range(-range..=*range),
                rng.gen_range(-range..=*range),
            );
            cloud.points.iter().map(|p| p.add(&v)).collect()
        }
        TransformSpec::Rotate { angles } => {
            let [yaw, pitch, roll] = angles.unwrap_or_else(|| {
                [
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ]
            });
            let m = euler_to_matrix(yaw, pitch, roll);
            cloud.points.iter().map(|p| mat_apply(&m, p)).collect()
        }
    };
    PointCloud { points, label: cloud.label }
}

/// Area-weighted surface sampling: triangle chosen with probability
/// proportional to area, barycentric-uniform within the triangle.
pub fn sample_mesh<R: Rng>(mesh: &TriMesh, n: usize, rng: &mut R) -> Result<PointCloud> {
    assert!(n >= 1, "sample_mesh needs n >= 1");
    let areas: Vec<f64> = mesh.faces.iter().map(|f| mesh.triangle_area(f)).collect();
    let mut cumulative = Vec::with_capacity(areas.len());
    let mut total = 0.0;
    for a in &areas {
        total += a;
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::DegenerateMesh);
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let t = rng.gen_range(0.0..total);
        let idx = match cumulative.binary_search_by(|c| c.partial_cmp(&t).unwrap()) {
            Ok(i) | Err(i) => i.min(cumulative.len() - 1),
        };
        let f = &mesh.faces[idx];
        let a = mesh.vertices[f[0]];
        let b = mesh.vertices[f[1]];
        let c = mesh.vertices[f[2]];
        let r1: f64 = rng.gen::<f64>();
        let r2: f64 = rng.gen::<f64>();
        let s = r1.sqrt();
        let (u, v, w) = (1.0 - s, s * (1.0 - r2), s * r2);
        points.push(Point3::new(
            u * a.x + v * b.x + w * c.x,
            u * a.y + v * b.y + w * c.y,
            u * a.z + v * b.z + w * c.z,
        ));
    }
    Ok(PointCloud::new(points))
}
