//! Pinhole camera projection into and out of a view's camera frame.
//!
//! A point p maps to K·(R·p + t + standoff·e_z); pixels are
//! (x_cam/z_cam, y_cam/z_cam) — the focal length is applied once, through K.
//! The standoff pushes the object along +z after rotation so that every
//! depth is positive, and is inverted exactly on unprojection.

use rand::Rng;

use crate::cloud::{euler_to_matrix, mat_apply, mat_transpose, Point3, PointCloud};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// Focal length in pixels.
    pub f: f64,
    /// Axis skew.
    pub gamma: f64,
    /// Image width in pixels.
    pub w: f64,
    /// Image height in pixels.
    pub h: f64,
}

impl CameraIntrinsics {
    /// f=1000, γ=0, 1600×1200.
    pub fn standard() -> Self {
        CameraIntrinsics { f: 1000.0, gamma: 0.0, w: 1600.0, h: 1200.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.f == 0.0 {
            return Err(Error::SingularIntrinsics);
        }
        if !(self.f > 0.0 && self.w > 0.0 && self.h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "intrinsics require f, w, h > 0 (got f={}, w={}, h={})",
                self.f, self.w, self.h
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidPose {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl RigidPose {
    pub fn identity() -> Self {
        RigidPose {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0, 0.0, 0.0],
        }
    }

    pub fn from_euler(yaw: f64, pitch: f64, roll: f64) -> Self {
        RigidPose { rotation: euler_to_matrix(yaw, pitch, roll), translation: [0.0, 0.0, 0.0] }
    }

    /// RᵀR = I and det(R) = 1 within 1e-9.
    pub fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        let rt = mat_transpose(r);
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    v += rt[i][k] * r[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (v - expect).abs() > 1e-9 {
                    return Err(Error::InvalidInput("pose rotation is not orthonormal".into()));
                }
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("pose rotation determinant is not +1".into()));
        }
        Ok(())
    }
}

/// One occlusion viewpoint: intrinsics, rigid pose, and the post-rotation
/// push along +z that keeps depths positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSpec {
    pub intrinsics: CameraIntrinsics,
    pub pose: RigidPose,
    pub standoff: f64,
}

impl ViewSpec {
    pub const DEFAULT_STANDOFF: f64 = 3.0;

    pub fn new(intrinsics: CameraIntrinsics, pose: RigidPose, standoff: f64) -> Self {
        ViewSpec { intrinsics, pose, standoff }
    }

    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        self.pose.validate()?;
        if !(self.standoff > 0.0) {
            return Err(Error::InvalidInput("standoff must be > 0".into()));
        }
        Ok(())
    }
}

/// A projected point: homogeneous camera coordinates, pixel coordinates,
/// depth, and the index of the source point in the input cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CamPoint {
    pub x_cam: f64,
    pub y_cam: f64,
    pub z_cam: f64,
    pub u: f64,
    pub v: f64,
    pub depth: f64,
    pub source_index: usize,
}

/// Project every point into the view's camera frame.
pub fn project_to_camera(cloud: &PointCloud, view: &ViewSpec) -> Result<Vec<CamPoint>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud("project_to_camera"));
    }
    view.validate()?;
    let k = &view.intrinsics;
    let mut out = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points.iter().enumerate() {
        let rp = mat_apply(&view.pose.rotation, p);
        let cx = rp.x + view.pose.translation[0];
        let cy = rp.y + view.pose.translation[1];
        let cz = rp.z + view.pose.translation[2] + view.standoff;
        let x_cam = k.f * cx + k.gamma * cy + 0.5 * k.w * cz;
        let y_cam = k.f * cy + 0.5 * k.h * cz;
        let z_cam = cz;
        if z_cam <= 0.0 {
            return Err(Error::NonPositiveDepth { index: i, depth: z_cam });
        }
        out.push(CamPoint {
            x_cam,
            y_cam,
            z_cam,
            u: x_cam / z_cam,
            v: y_cam / z_cam,
            depth: z_cam,
            source_index: i,
        });
    }
    Ok(out)
}

/// Invert the projection back to the world frame.
pub fn unproject(campoints: &[CamPoint], view: &ViewSpec) -> Result<PointCloud> {
    view.validate()?;
    let k = &view.intrinsics;
    let rt = mat_transpose(&view.pose.rotation);
    let mut points = Vec::with_capacity(campoints.len());
    for cp in campoints {
        if cp.z_cam <= 0.0 {
            return Err(Error::NonPositiveDepth { index: cp.source_index, depth: cp.z_cam });
        }
        // Forward-substitute K⁻¹, then undo the standoff and the pose.
        let cz = cp.z_cam;
        let cy = (cp.y_cam - 0.5 * k.h * cz) / k.f;
        let cx = (cp.x_cam - k.gamma * cy - 0.5 * k.w * cz) / k.f;
        let p = Point3::new(
            cx - view.pose.translation[0],
            cy - view.pose.translation[1],
            cz - view.pose.translation[2] - view.standoff,
        );
        points.push(mat_apply(&rt, &p));
    }
    Ok(PointCloud::new(points))
}

/// Sample view specs with Euler angles uniform on [0, 2π), zero translation,
/// and the standard intrinsics.
pub fn sample_views(count: usize, master_seed: u64) -> Vec<ViewSpec> {
    sample_views_with(count, master_seed, CameraIntrinsics::standard(), ViewSpec::DEFAULT_STANDOFF)
}

pub fn sample_views_with(
    count: usize,
    master_seed: u64,
    intrinsics: CameraIntrinsics,
    standoff: f64,
) -> Vec<ViewSpec> {
    (0..count)
        .map(|i| {
            let mut rng = rng_for(master_seed, "view", &[i as u64]);
            let yaw = rng.gen_range(0.0..std::f64::consts::TAU);
            let pitch = rng.gen_range(0.0..std::f64::consts::TAU);
            let roll = rng.gen_range(0.0..std::f64::consts::TAU);
            ViewSpec::new(intrinsics, RigidPose::from_euler(yaw, pitch, roll), standoff)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn standard_view() -> ViewSpec {
        ViewSpec::new(CameraIntrinsics::standard(), RigidPose::identity(), 0.0)
    }

    #[test]
    fn principal_point_projects_to_image_center() {
        // Camera-frame (0,0,2) with identity pose: standoff carries the z.
        let mut view = standard_view();
        view.standoff = 2.0;
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0)]);
        let cps = project_to_camera(&cloud, &view).unwrap();
        assert_eq!((cps[0].u, cps[0].v, cps[0].depth), (800.0, 600.0, 2.0));
    }

    #[test]
    fn off_axis_point_matches_hand_evaluation() {
        // Camera-frame (0.4, 0, 2): u = (1000·0.4 + 800·2)/2 = 1000.
        let mut view = standard_view();
        view.standoff = 2.0;
        let cloud = PointCloud::new(vec![Point3::new(0.4, 0.0, 0.0)]);
        let cps = project_to_camera(&cloud, &view).unwrap();
        assert!((cps[0].u - 1000.0).abs() < 1e-12);
        assert!((cps[0].v - 600.0).abs() < 1e-12);
    }

    #[test]
    fn insufficient_standoff_is_an_error() {
        let mut view = standard_view();
        view.standoff = 0.5;
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, -1.0)]);
        assert!(matches!(
            project_to_camera(&cloud, &view),
            Err(Error::NonPositiveDepth { .. })
        ));
    }

    #[test]
    fn round_trip_identity_pose_exact() {
        let mut view = standard_view();
        view.standoff = 3.0;
        let cloud = PointCloud::new(vec![Point3::new(0.25, -0.5, 0.125)]);
        let back = unproject(&project_to_camera(&cloud, &view).unwrap(), &view).unwrap();
        assert!(back.points[0].dist(&cloud.points[0]) < 1e-12);
    }

    #[test]
    fn round_trip_random_views_under_1e9() {
        let mut rng = crate::seed::rng_for(42, "camera", &[]);
        let mut max_err = 0.0_f64;
        for trial in 0..1000 {
            let n = rng.gen_range(1..=100);
            let cloud = PointCloud::new(
                (0..n)
                    .map(|_| {
                        Point3::new(
                            rng.gen::<f64>() * 2.0 - 1.0,
                            rng.gen::<f64>() * 2.0 - 1.0,
                            rng.gen::<f64>() * 2.0 - 1.0,
                        )
                    })
                    .collect(),
            );
            let view = sample_views(1, 10_000 + trial)[0].clone();
            let back = unproject(&project_to_camera(&cloud, &view).unwrap(), &view).unwrap();
            for (a, b) in cloud.points.iter().zip(&back.points) {
                max_err = max_err
                    .max((a.x - b.x).abs())
                    .max((a.y - b.y).abs())
                    .max((a.z - b.z).abs());
            }
        }
        assert!(max_err < 1e-9, "max abs round-trip error {max_err}");
    }

    #[test]
    fn sampled_views_carry_standard_intrinsics() {
        let views = sample_views(10, 7);
        assert_eq!(views.len(), 10);
        for v in &views {
            assert_eq!(v.intrinsics.f, 1000.0);
            assert_eq!(v.intrinsics.w, 1600.0);
            assert_eq!(v.intrinsics.h, 1200.0);
            v.validate().unwrap();
        }
    }

    #[test]
    fn view_sampling_is_reproducible() {
        let a = sample_views(1, 99)[0].clone();
        let b = sample_views(1, 99)[0].clone();
        assert_eq!(a.pose.rotation, b.pose.rotation);
    }
}
