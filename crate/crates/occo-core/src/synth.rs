//! Synthetic benchmark geometry: sphere/cube/cylinder meshes with varied
//! proportions and poses, plus part-labeled cloud sampling for the
//! dissection probe.

use rand::Rng;

use crate::cloud::{euler_to_matrix, mat_apply, Point3, PointCloud, TriMesh};
use crate::dataset::SourceObject;
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Sphere,
    Cube,
    Cylinder,
}

impl ShapeKind {
    pub fn from_index(i: usize) -> Self {
        match i % 3 {
            0 => ShapeKind::Sphere,
            1 => ShapeKind::Cube,
            _ => ShapeKind::Cylinder,
        }
    }

    pub fn label(&self) -> u32 {
        match self {
            ShapeKind::Sphere => 0,
            ShapeKind::Cube => 1,
            ShapeKind::Cylinder => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Sphere => "sphere",
            ShapeKind::Cube => "cube",
            ShapeKind::Cylinder => "cylinder",
        }
    }
}

fn uv_sphere(stacks: usize, slices: usize) -> TriMesh {
    let mut vertices = vec![Point3::new(0.0, 0.0, 1.0)];
    for i in 1..stacks {
        let phi = std::f64::consts::PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let theta = std::f64::consts::TAU * j as f64 / slices as f64;
            vertices.push(Point3::new(
                phi.sin() * theta.cos(),
                phi.sin() * theta.sin(),
                phi.cos(),
            ));
        }
    }
    vertices.push(Point3::new(0.0, 0.0, -1.0));
    let south = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * slices + (j % slices);
    let mut faces = Vec::new();
    for j in 0..slices {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
        faces.push([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh { vertices, faces }
}

fn box_mesh(hx: f64, hy: f64, hz: f64) -> TriMesh {
    let vertices = vec![
        Point3::new(-hx, -hy, -hz),
        Point3::new(hx, -hy, -hz),
        Point3::new(hx, hy, -hz),
        Point3::new(-hx, hy, -hz),
        Point3::new(-hx, -hy, hz),
        Point3::new(hx, -hy, hz),
        Point3::new(hx, hy, hz),
        Point3::new(-hx, hy, hz),
    ];
    let quads: [[usize; 4]; 6] = [
        [0, 1, 2, 3],
        [4, 7, 6, 5],
        [0, 4, 5, 1],
        [2, 6, 7, 3],
        [0, 3, 7, 4],
        [1, 5, 6, 2],
    ];
    let mut faces = Vec::new();
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriMesh { vertices, faces }
}

fn cylinder_mesh(radius: f64, half_height: f64, segments: usize) -> TriMesh {
    let mut vertices = Vec::new();
    for &z in &[half_height, -half_height] {
        for j in 0..segments {
            let theta = std::f64::consts::TAU * j as f64 / segments as f64;
            vertices.push(Point3::new(radius * theta.cos(), radius * theta.sin(), z));
        }
    }
    let top_center = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, half_height));
    let bottom_center = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, -half_height));
    let mut faces = Vec::new();
    for j in 0..segments {
        let jn = (j + 1) % segments;
        let (t0, t1) = (j, jn);
        let (b0, b1) = (segments + j, segments + jn);
        faces.push([t0, b0, b1]);
        faces.push([t0, b1, t1]);
        faces.push([top_center, t0, t1]);
        faces.push([bottom_center, b1, b0]);
    }
    TriMesh { vertices, faces }
}

/// A mesh of the given kind with seed-derived proportions.
pub fn shape_mesh(kind: ShapeKind, seed: u64) -> TriMesh {
    let mut rng = rng_for(seed, "shape", &[kind.label() as u64]);
    match kind {
        ShapeKind::Sphere => uv_sphere(12, 18),
        ShapeKind::Cube => {
            let hx = rng.gen_range(0.5..1.0);
            let hy = rng.gen_range(0.5..1.0);
            let hz = rng.gen_range(0.5..1.0);
            box_mesh(hx, hy, hz)
        }
        ShapeKind::Cylinder => {
            let r = rng.gen_range(0.4..0.8);
            let h = rng.gen_range(0.6..1.2);
            cylinder_mesh(r, h, 24)
        }
    }
}

fn rotate_mesh(mesh: &TriMesh, yaw: f64, pitch: f64, roll: f64) -> TriMesh {
    let m = euler_to_matrix(yaw, pitch, roll);
    TriMesh {
        vertices: mesh.vertices.iter().map(|p| mat_apply(&m, p)).collect(),
        faces: mesh.faces.clone(),
    }
}

/// Object pose distribution for the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoseMode {
    /// Axis-aligned canonical pose.
    Canonical,
    /// Random rotation about the z axis only.
    Yaw,
    /// Random rotation over all three Euler angles.
    Free,
}

/// Round-robin labeled benchmark objects; each object gets seed-derived
/// proportions and a pose drawn from the requested mode.
pub fn benchmark_objects(count: usize, master_seed: u64, pose: PoseMode) -> Vec<SourceObject> {
    (0..count)
        .map(|i| {
            let kind = ShapeKind::from_index(i);
            let mut mesh = shape_mesh(kind, master_seed.wrapping_add(i as u64 * 7919));
            let mut rng = rng_for(master_seed, "pose", &[i as u64]);
            match pose {
                PoseMode::Canonical => {}
                PoseMode::Yaw => {
                    mesh = rotate_mesh(&mesh, rng.gen_range(0.0..std::f64::consts::TAU), 0.0, 0.0);
                }
                PoseMode::Free => {
                    mesh = rotate_mesh(
                        &mesh,
                        rng.gen_range(0.0..std::f64::consts::TAU),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    );
                }
            }
            SourceObject::Mesh {
                name: format!("{}_{i:04}", kind.name()),
                mesh,
                label: Some(kind.label()),
            }
        })
        .collect()
}

/// Sample a cloud with per-point part labels. Cubes label the six faces
/// (0..6); cylinders label side/top/bottom (0..3); spheres label the eight
/// octants (0..8).
pub fn sample_labeled(kind: ShapeKind, n: usize, seed: u64) -> (PointCloud, Vec<u32>) {
    let mesh = shape_mesh(kind, seed);
    let mut rng = rng_for(seed, "labeled-sample", &[]);
    let cloud = crate::cloud::sample_mesh(&mesh, n, &mut rng).expect("synthetic mesh is sampleable");
    let bound = |vals: &[f64]| vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let labels = cloud
        .points
        .iter()
        .map(|p| match kind {
            ShapeKind::Sphere => {
                (u32::from(p.x >= 0.0) << 2) | (u32::from(p.y >= 0.0) << 1) | u32::from(p.z >= 0.0)
            }
            ShapeKind::Cube => {
                let hx = bound(&mesh.vertices.iter().map(|v| v.x).collect::<Vec<_>>());
                let hy = bound(&mesh.vertices.iter().map(|v| v.y).collect::<Vec<_>>());
                let hz = bound(&mesh.vertices.iter().map(|v| v.z).collect::<Vec<_>>());
                let dx = hx - p.x.abs();
                let dy = hy - p.y.abs();
                let dz = hz - p.z.abs();
                if dx <= dy && dx <= dz {
                    u32::from(p.x >= 0.0)
                } else if dy <= dz {
                    2 + u32::from(p.y >= 0.0)
                } else {
                    4 + u32::from(p.z >= 0.0)
                }
            }
            ShapeKind::Cylinder => {
                let hz = bound(&mesh.vertices.iter().map(|v| v.z).collect::<Vec<_>>());
                if (p.z - hz).abs() < 1e-9 {
                    1
                } else if (p.z + hz).abs() < 1e-9 {
                    2
                } else {
                    0
                }
            }
        })
        .collect();
    (cloud, labels)
}
