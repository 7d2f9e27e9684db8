//! Dataset generation and the binary sample container.
//!
//! Container layout (magic "OCCO", all integers and floats little-endian):
//! version u16, record count u32, then per record: object id u32, view id
//! u16, three u32 counts, and the occluded/coarse/fine points as 32-bit
//! floats, xyz-interleaved. A JSON manifest sits alongside with seeds, view
//! parameters, and per-sample visible fractions.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, RigidPose, ViewSpec};
use crate::cloud::{normalize_unit_sphere, sample_mesh, Point3, PointCloud, TriMesh};
use crate::error::{Error, Result};
use crate::occlusion::{occlude, DEFAULT_EPS_DEPTH};
use crate::seed::{derive_seed, rng_for};

pub const OCCO_MAGIC: &[u8; 4] = b"OCCO";
pub const OCCO_VERSION: u16 = 1;

/// One training sample: occluded input plus the coarse/fine ground truth.
#[derive(Debug, Clone)]
pub struct CompletionSample {
    pub object_id: u32,
    pub view_id: u16,
    pub occluded: PointCloud,
    pub coarse_gt: PointCloud,
    pub fine_gt: PointCloud,
}

/// Geometry source for one object: a mesh (area-weighted sampling) or an
/// existing cloud (subsampled).
#[derive(Debug, Clone)]
pub enum SourceObject {
    Mesh { name: String, mesh: TriMesh, label: Option<u32> },
    Cloud { name: String, cloud: PointCloud },
}

impl SourceObject {
    pub fn name(&self) -> &str {
        match self {
            SourceObject::Mesh { name, .. } => name,
            SourceObject::Cloud { name, .. } => name,
        }
    }

    pub fn label(&self) -> Option<u32> {
        match self {
            SourceObject::Mesh { label, .. } => *label,
            SourceObject::Cloud { cloud, .. } => cloud.label,
        }
    }

    fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<PointCloud> {
        match self {
            SourceObject::Mesh { mesh, .. } => sample_mesh(mesh, n, rng),
            SourceObject::Cloud { cloud, .. } => {
                if cloud.is_empty() {
                    return Err(Error::EmptyCloud("source cloud"));
                }
                let points = if cloud.len() >= n {
                    let mut idx: Vec<usize> = (0..cloud.len()).collect();
                    idx.shuffle(rng);
                    idx[..n].iter().map(|&i| cloud.points[i]).collect()
                } else {
                    (0..n)
                        .map(|_| cloud.points[rng.gen_range(0..cloud.len())])
                        .collect()
                };
                Ok(PointCloud::new(points))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub views_per_object: usize,
    pub n_input: usize,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub intrinsics: CameraIntrinsics,
    pub standoff: f64,
    pub eps_depth: f64,
    pub master_seed: u64,
}

impl GenParams {
    pub fn new(views_per_object: usize, n_input: usize, n_coarse: usize, n_fine: usize, master_seed: u64) -> Self {
        GenParams {
            views_per_object,
            n_input,
            n_coarse,
            n_fine,
            intrinsics: CameraIntrinsics::standard(),
            standoff: ViewSpec::DEFAULT_STANDOFF,
            eps_depth: DEFAULT_EPS_DEPTH,
            master_seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestIntrinsics {
    pub f: f64,
    pub gamma: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestObject {
    pub object_id: u32,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestSample {
    pub object_id: u32,
    pub view_id: u16,
    pub seed: u64,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub visible_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkipRecord {
    pub object_id: u32,
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u16,
    pub master_seed: u64,
    pub intrinsics: ManifestIntrinsics,
    pub standoff: f64,
    pub eps_depth: f64,
    pub views_per_object: usize,
    pub n_input: usize,
    pub n_coarse: usize,
    pub n_fine: usize,
    /// Wall-clock creation time; the only non-reproducible field.
    pub created_unix_ms: u128,
    pub objects: Vec<ManifestObject>,
    pub samples: Vec<ManifestSample>,
    pub skipped: Vec<SkipRecord>,
}

fn normalized_source(obj: &SourceObject) -> Result<SourceObject> {
    // Objects are normalized to the unit sphere before any sampling so the
    // default standoff always clears the object radius.
    match obj {
        SourceObject::Mesh { name, mesh, label } => {
            let vertex_cloud = PointCloud::new(mesh.vertices.clone());
            if vertex_cloud.is_empty() {
                return Err(Error::DegenerateMesh);
            }
            let normalized = normalize_unit_sphere(&vertex_cloud)?;
            Ok(SourceObject::Mesh {
                name: name.clone(),
                mesh: TriMesh { vertices: normalized.points, faces: mesh.faces.clone() },
                label: *label,
            })
        }
        SourceObject::Cloud { name, cloud } => Ok(SourceObject::Cloud {
            name: name.clone(),
            cloud: normalize_unit_sphere(cloud)?,
        }),
    }
}

fn subsample_coarse(fine: &PointCloud, n_coarse: usize, rng: &mut impl Rng) -> PointCloud {
    let mut idx: Vec<usize> = (0..fine.len()).collect();
    idx.shuffle(rng);
    let take = n_coarse.min(fine.len());
    PointCloud::new(idx[..take].iter().map(|&i| fine.points[i]).collect())
}

type ObjectOutput = (Vec<(CompletionSample, ManifestSample)>, Option<SkipRecord>);

fn generate_object(obj_id: u32, obj: &SourceObject, params: &GenParams) -> ObjectOutput {
    let skip = |reason: String| {
        (Vec::new(), Some(SkipRecord { object_id: obj_id, name: obj.name().to_string(), reason }))
    };
    let normalized = match normalized_source(obj) {
        Ok(s) => s,
        Err(e) => return skip(e.to_string()),
    };
    let oid = u64::from(obj_id);
    let fine_gt = match normalized.sample(
        params.n_fine,
        &mut rng_for(params.master_seed, "fine", &[oid]),
    ) {
        Ok(c) => c,
        Err(e) => return skip(e.to_string()),
    };
    let coarse_gt = subsample_coarse(
        &fine_gt,
        params.n_coarse,
        &mut rng_for(params.master_seed, "coarse", &[oid]),
    );
    let input = match normalized.sample(
        params.n_input,
        &mut rng_for(params.master_seed, "input", &[oid]),
    ) {
        Ok(c) => c,
        Err(e) => return skip(e.to_string()),
    };

    let mut outputs = Vec::with_capacity(params.views_per_object);
    for v in 0..params.views_per_object {
        let view_seed = derive_seed(params.master_seed, "view", &[oid, v as u64]);
        let mut rng = rng_for(params.master_seed, "view", &[oid, v as u64]);
        let yaw = rng.gen_range(0.0..std::f64::consts::TAU);
        let pitch = rng.gen_range(0.0..std::f64::consts::TAU);
        let roll = rng.gen_range(0.0..std::f64::consts::TAU);
        let view = ViewSpec::new(
            params.intrinsics,
            RigidPose::from_euler(yaw, pitch, roll),
            params.standoff,
        );
        match occlude(&input, &view, params.eps_depth) {
            Ok(occ) => {
                let sample = CompletionSample {
                    object_id: obj_id,
                    view_id: v as u16,
                    occluded: occ.cloud.clone(),
                    coarse_gt: coarse_gt.clone(),
                    fine_gt: fine_gt.clone(),
                };
                let manifest = ManifestSample {
                    object_id: obj_id,
                    view_id: v as u16,
                    seed: view_seed,
                    yaw,
                    pitch,
                    roll,
                    visible_fraction: occ.visible_fraction(),
                };
                outputs.push((sample, manifest));
            }
            Err(e) => return skip(format!("view {v}: {e}")),
        }
    }
    (outputs, None)
}

/// Generate objects × views completion samples. Objects that fail (degenerate
/// geometry, pathological occlusion) are skipped and recorded; generation
/// fails only when nothing survives. Per-object work is derived from labeled
/// seeds, so parallel and serial runs produce identical output.
pub fn generate_dataset(
    objects: &[SourceObject],
    params: &GenParams,
) -> Result<(Vec<CompletionSample>, Manifest)> {
    if objects.is_empty() {
        return Err(Error::InvalidInput("no input objects".into()));
    }
    let per_object: Vec<ObjectOutput> = objects
        .par_iter()
        .enumerate()
        .map(|(i, obj)| generate_object(i as u32, obj, params))
        .collect();

    let mut samples = Vec::new();
    let mut manifest_samples = Vec::new();
    let mut skipped = Vec::new();
    for (outputs, skip) in per_object {
        for (s, m) in outputs {
            samples.push(s);
            manifest_samples.push(m);
        }
        if let Some(rec) = skip {
            skipped.push(rec);
        }
    }
    if samples.is_empty() {
        return Err(Error::AllObjectsSkipped);
    }
    let manifest = Manifest {
        format_version: OCCO_VERSION,
        master_seed: params.master_seed,
        intrinsics: ManifestIntrinsics {
            f: params.intrinsics.f,
            gamma: params.intrinsics.gamma,
            w: params.intrinsics.w,
            h: params.intrinsics.h,
        },
        standoff: params.standoff,
        eps_depth: params.eps_depth,
        views_per_object: params.views_per_object,
        n_input: params.n_input,
        n_coarse: params.n_coarse,
        n_fine: params.n_fine,
        created_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        objects: objects
            .iter()
            .enumerate()
            .map(|(i, o)| ManifestObject {
                object_id: i as u32,
                name: o.name().to_string(),
                label: o.label(),
            })
            .collect(),
        samples: manifest_samples,
        skipped,
    };
    Ok((samples, manifest))
}

fn write_cloud(out: &mut impl Write, cloud: &PointCloud) -> Result<()> {
    for p in &cloud.points {
        for v in [p.x, p.y, p.z] {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Serialize samples into the OCCO container.
pub fn write_dataset(samples: &[CompletionSample], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    out.write_all(OCCO_MAGIC)?;
    out.write_all(&OCCO_VERSION.to_le_bytes())?;
    out.write_all(&(samples.len() as u32).to_le_bytes())?;
    for s in samples {
        out.write_all(&s.object_id.to_le_bytes())?;
        out.write_all(&s.view_id.to_le_bytes())?;
        out.write_all(&(s.occluded.len() as u32).to_le_bytes())?;
        out.write_all(&(s.coarse_gt.len() as u32).to_le_bytes())?;
        out.write_all(&(s.fine_gt.len() as u32).to_le_bytes())?;
        write_cloud(&mut out, &s.occluded)?;
        write_cloud(&mut out, &s.coarse_gt)?;
        write_cloud(&mut out, &s.fine_gt)?;
    }
    Ok(out.flush()?)
}

fn read_cloud(inp: &mut impl Read, n: usize) -> Result<PointCloud> {
    let mut buf = vec![0u8; n * 12];
    inp.read_exact(&mut buf)
        .map_err(|_| Error::MalformedHeader("dataset truncated".into()))?;
    let points = buf
        .chunks_exact(12)
        .map(|c| {
            let x = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let y = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            let z = f32::from_le_bytes([c[8], c[9], c[10], c[11]]);
            Point3::new(f64::from(x), f64::from(y), f64::from(z))
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Parse an OCCO container.
pub fn read_dataset(path: &Path) -> Result<Vec<CompletionSample>> {
    let file = std::fs::File::open(path)?;
    let mut inp = std::io::BufReader::new(file);
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)
        .map_err(|_| Error::MalformedHeader("dataset too short".into()))?;
    if &magic != OCCO_MAGIC {
        return Err(Error::MalformedHeader("bad dataset magic".into()));
    }
    let mut u16buf = [0u8; 2];
    inp.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != OCCO_VERSION {
        return Err(Error::MalformedHeader(format!("unsupported dataset version {version}")));
    }
    let mut u32buf = [0u8; 4];
    inp.read_exact(&mut u32buf)?;
    let count = u32::from_le_bytes(u32buf);
    let mut samples = Vec::with_capacity(count as usize);
    for _ in 0..count {
        inp.read_exact(&mut u32buf)?;
        let object_id = u32::from_le_bytes(u32buf);
        inp.read_exact(&mut u16buf)?;
        let view_id = u16::from_le_bytes(u16buf);
        inp.read_exact(&mut u32buf)?;
        let n_occ = u32::from_le_bytes(u32buf) as usize;
        inp.read_exact(&mut u32buf)?;
        let n_coarse = u32::from_le_bytes(u32buf) as usize;
        inp.read_exact(&mut u32buf)?;
        let n_fine = u32::from_le_bytes(u32buf) as usize;
        samples.push(CompletionSample {
            object_id,
            view_id,
            occluded: read_cloud(&mut inp, n_occ)?,
            coarse_gt: read_cloud(&mut inp, n_coarse)?,
            fine_gt: read_cloud(&mut inp, n_fine)?,
        });
    }
    Ok(samples)
}
