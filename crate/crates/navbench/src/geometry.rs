//! Shared geometric primitives: pinhole camera, rigid poses, point clouds
//! and the planar robot state.
//!
//! Conventions used throughout the crate:
//!
//! - World frame: right-handed, z up, metres.
//! - Camera frame: +z forward (optical axis), +x right, +y down.
//! - A sensor [`Pose3`] maps sensor-frame coordinates into the world frame
//!   (i.e. it is the pose *of* the sensor *in* the world).
//! - Image coordinates: `u` along +x (columns), `v` along +y (rows), origin
//!   at the top-left pixel corner; the principal point is in pixel units.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rigid transform taking sensor-frame points to world-frame points.
pub type Pose3 = Isometry3<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("depth must be strictly positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
}

/// Pinhole camera intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    /// Focal length in pixels, x.
    pub fx: f64,
    /// Focal length in pixels, y.
    pub fy: f64,
    /// Principal point, x (pixels).
    pub cx: f64,
    /// Principal point, y (pixels).
    pub cy: f64,
    /// Image width in pixels.
    pub width: usize,
    /// Image height in pixels.
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, GeometryError> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    /// Intrinsics for a given horizontal field of view with square pixels
    /// and the principal point at the image centre.
    pub fn from_hfov(width: usize, height: usize, hfov_rad: f64) -> Result<Self, GeometryError> {
        if !(hfov_rad > 0.0 && hfov_rad < std::f64::consts::PI) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "horizontal fov out of range: {hfov_rad}"
            )));
        }
        let fx = width as f64 / (2.0 * (hfov_rad / 2.0).tan());
        Self::new(fx, fx, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    /// Checks the basic sanity constraints (positive focal lengths, finite
    /// values, non-empty image). Deserialised configs go through this.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite =
            [self.fx, self.fy, self.cx, self.cy].iter().all(|x| x.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "fx={} fy={} cx={} cy={}",
                self.fx, self.fy, self.cx, self.cy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "empty image {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Projects a world point into the image of a camera at `pose`.
///
/// Returns `(u, v, depth)` with `depth` the camera-frame z coordinate, or
/// `None` when the point is behind the camera or lands outside the image.
pub fn project(
    p_world: &Point3<f64>,
    pose: &Pose3,
    k: &CameraIntrinsics,
) -> Option<(f64, f64, f64)> {
    let p_cam = pose.inverse_transform_point(p_world);
    let z = p_cam.z;
    if z <= 0.0 {
        return None;
    }
    let u = k.fx * p_cam.x / z + k.cx;
    let v = k.fy * p_cam.y / z + k.cy;
    if u < 0.0 || u >= k.width as f64 || v < 0.0 || v >= k.height as f64 {
        return None;
    }
    Some((u, v, z))
}

/// Lifts pixel `(u, v)` with camera-frame depth `z` back to a world point.
pub fn backproject(
    u: f64,
    v: f64,
    z: f64,
    pose: &Pose3,
    k: &CameraIntrinsics,
) -> Result<Point3<f64>, GeometryError> {
    if !(z > 0.0) {
        return Err(GeometryError::NonPositiveDepth(z));
    }
    let p_cam = Point3::new((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
    Ok(pose.transform_point(&p_cam))
}

/// Pose of a camera sitting at `position`, yawed by `yaw` about world z and
/// pitched down by `pitch_down` about its own x axis.
///
/// At zero pitch the optical axis is horizontal along the yaw direction,
/// +x points to the right of travel and +y points at the ground.
pub fn camera_pose(position: Point3<f64>, yaw: f64, pitch_down: f64) -> Pose3 {
    // Columns: world directions of the camera x (right), y (down), z (forward).
    let base = nalgebra::Matrix3::from_columns(&[
        Vector3::new(yaw.sin(), -yaw.cos(), 0.0),
        Vector3::new(0.0, 0.0, -1.0),
        Vector3::new(yaw.cos(), yaw.sin(), 0.0),
    ]);
    let rot = UnitQuaternion::from_matrix(&base)
        * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), -pitch_down);
    Isometry3::from_parts(Translation3::from(position.coords), rot)
}

/// Dense, unordered 3D points in the world frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Planar robot state: SE(2) pose plus the current body velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    /// Heading, wrapped to (-pi, pi].
    pub theta: f64,
    /// Forward velocity (m/s).
    pub v: f64,
    /// Yaw rate (rad/s).
    pub omega: f64,
}

impl RobotState {
    pub fn at(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: wrap_angle(theta), v: 0.0, omega: 0.0 }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Smallest signed difference `a - b` between two angles.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::from_hfov(320, 240, std::f64::consts::FRAC_PI_2).unwrap()
    }

    #[test]
    fn hfov_focal_length() {
        let k = test_intrinsics();
        // 90 degree hfov over 320 px: fx = 160 / tan(45 deg) = 160.
        assert_relative_eq!(k.fx, 160.0, epsilon = 1e-12);
        assert_relative_eq!(k.cx, 160.0);
        assert_relative_eq!(k.cy, 120.0);
    }

    #[test]
    fn project_backproject_round_trip() {
        let k = test_intrinsics();
        let pose = camera_pose(Point3::new(1.0, -2.0, 0.8), 0.7, 0.3);
        for &(x, y, z) in &[(5.0, -1.0, 0.2), (3.0, -2.0, 1.5), (8.0, 2.0, -0.5)] {
            let p = Point3::new(x, y, z);
            if let Some((u, v, d)) = project(&p, &pose, &k) {
                let q = backproject(u, v, d, &pose, &k).unwrap();
                assert_relative_eq!(p, q, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn points_behind_camera_are_out_of_view() {
        let k = test_intrinsics();
        let pose = camera_pose(Point3::new(0.0, 0.0, 1.0), 0.0, 0.0);
        // Camera looks along +x; a point behind it is invisible.
        assert!(project(&Point3::new(-1.0, 0.0, 1.0), &pose, &k).is_none());
        // Straight ahead projects to the principal point.
        let (u, v, d) = project(&Point3::new(4.0, 0.0, 1.0), &pose, &k).unwrap();
        assert_relative_eq!(u, k.cx, epsilon = 1e-9);
        assert_relative_eq!(v, k.cy, epsilon = 1e-9);
        assert_relative_eq!(d, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_appears_in_lower_image_half() {
        let k = test_intrinsics();
        let pose = camera_pose(Point3::new(0.0, 0.0, 1.0), 0.0, 0.0);
        let (_, v, _) = project(&Point3::new(5.0, 0.0, 0.0), &pose, &k).unwrap();
        assert!(v > k.cy, "ground point should project below the horizon, got v={v}");
    }

    #[test]
    fn backproject_rejects_non_positive_depth() {
        let k = test_intrinsics();
        let pose = Pose3::identity();
        assert!(backproject(10.0, 10.0, 0.0, &pose, &k).is_err());
        assert!(backproject(10.0, 10.0, -2.0, &pose, &k).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        for i in -20..=20 {
            let a = i as f64 * 0.7;
            let w = wrap_angle(a);
            assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI + 1e-12);
            // Same direction.
            assert_relative_eq!(a.sin(), w.sin(), epsilon = 1e-9);
            assert_relative_eq!(a.cos(), w.cos(), epsilon = 1e-9);
        }
    }
}
