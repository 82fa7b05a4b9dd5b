//! Simulated range sensors: a spinning multi-channel LiDAR and a depth
//! camera. Both are thin loops over [`World::raycast`]; the camera also
//! reports which pixels landed on grass so the synthetic-depth stage can
//! degrade them the way fuzzy vegetation degrades real monocular output.

use nalgebra::{Point3, Vector3};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{camera_pose, CameraIntrinsics, Pose3, RobotState};
use crate::seeding;

use super::World;

/// Spinning LiDAR geometry and noise model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LidarSpec {
    /// Number of elevation rings.
    pub channels: usize,
    /// Azimuth samples per revolution.
    pub azimuth_steps: usize,
    /// Full vertical fan angle (rad), centred on the horizon.
    pub vertical_fov: f64,
    pub max_range: f64,
    /// 1-sigma additive range noise (m).
    pub range_noise_sigma: f64,
    /// Sensor height above the terrain under the robot (m).
    pub mount_height: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        LidarSpec {
            channels: 32,
            azimuth_steps: 360,
            vertical_fov: std::f64::consts::FRAC_PI_2,
            max_range: 30.0,
            range_noise_sigma: 0.01,
            mount_height: 0.8,
        }
    }
}

/// One full LiDAR revolution from the robot's pose, in world coordinates.
///
/// Rays that strike nothing within `max_range` produce no point. Range noise
/// is applied along the ray, seeded per call.
pub fn raycast_lidar(
    world: &World,
    state: &RobotState,
    spec: &LidarSpec,
    seed: u64,
) -> crate::geometry::PointCloud {
    let mut rng = seeding::rng(seed);
    let noise = Normal::new(0.0, spec.range_noise_sigma.max(1e-12)).unwrap();
    let origin = Point3::new(
        state.x,
        state.y,
        world.terrain_height(state.x, state.y) + spec.mount_height,
    );
    let mut points = Vec::with_capacity(spec.channels * spec.azimuth_steps / 2);
    for ring in 0..spec.channels {
        let frac = if spec.channels > 1 {
            ring as f64 / (spec.channels - 1) as f64
        } else {
            0.5
        };
        let elev = -0.5 * spec.vertical_fov + frac * spec.vertical_fov;
        let (sin_e, cos_e) = elev.sin_cos();
        for step in 0..spec.azimuth_steps {
            let az = state.theta + std::f64::consts::TAU * step as f64 / spec.azimuth_steps as f64;
            let dir = Vector3::new(cos_e * az.cos(), cos_e * az.sin(), sin_e);
            if let Some(hit) = world.raycast(origin, dir, spec.max_range) {
                let t = (hit.t + noise.sample(&mut rng)).max(0.0);
                points.push(origin + dir * t);
            }
        }
    }
    crate::geometry::PointCloud { points }
}

/// Forward depth camera mounted on the robot.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraMount {
    /// Optical centre height above the terrain under the robot (m).
    pub height: f64,
    /// Downward pitch of the optical axis (rad).
    pub pitch_down: f64,
}

impl Default for CameraMount {
    fn default() -> Self {
        CameraMount {
            height: 1.0,
            pitch_down: 0.35,
        }
    }
}

impl CameraMount {
    /// Camera-to-world pose for a robot state.
    pub fn pose(&self, world: &World, state: &RobotState) -> Pose3 {
        let z = world.terrain_height(state.x, state.y) + self.height;
        camera_pose(Point3::new(state.x, state.y, z), state.theta, self.pitch_down)
    }
}

/// Dense depth frame. `values` holds z-depth (camera-frame forward distance,
/// not ray range) so a fronto-parallel wall reads as a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl DepthImage {
    pub fn idx(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Render a ground-truth depth frame plus a per-pixel grass mask.
///
/// The mask marks pixels whose nearest surface is a grass patch; the
/// synthetic-depth stage widens and blurs those regions.
pub fn render_view(
    world: &World,
    pose: &Pose3,
    intrinsics: &CameraIntrinsics,
    max_range: f64,
) -> (DepthImage, Vec<bool>) {
    let (w, h) = (intrinsics.width, intrinsics.height);
    let mut values = vec![0.0; w * h];
    let mut valid = vec![false; w * h];
    let mut grass = vec![false; w * h];
    let origin = Point3::from(pose.translation.vector);
    for v in 0..h {
        for u in 0..w {
            // Camera-frame ray through pixel (u, v); z normalises to 1, so a
            // hit at range t has z-depth t / |raw|.
            let raw = Vector3::new(
                (u as f64 - intrinsics.cx) / intrinsics.fx,
                (v as f64 - intrinsics.cy) / intrinsics.fy,
                1.0,
            );
            let norm = raw.norm();
            let dir_world = pose.rotation * (raw / norm);
            // Cast a little past max_range: the limit applies to z-depth.
            if let Some(hit) = world.raycast(origin, dir_world, max_range * norm) {
                let z = hit.t / norm;
                if z <= max_range {
                    let i = v * w + u;
                    values[i] = z;
                    valid[i] = true;
                    grass[i] = hit.grass;
                }
            }
        }
    }
    (
        DepthImage {
            width: w,
            height: h,
            values,
            valid,
        },
        grass,
    )
}

/// Ground-truth depth only (grass mask discarded).
pub fn render_depth(
    world: &World,
    pose: &Pose3,
    intrinsics: &CameraIntrinsics,
    max_range: f64,
) -> DepthImage {
    render_view(world, pose, intrinsics, max_range).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RobotState;
    use crate::sim::{generate_world, Difficulty, Primitive, Terrain};

    fn flat_world(obstacles: Vec<Primitive>) -> World {
        World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles,
        }
    }

    fn small_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::from_hfov(64, 48, std::f64::consts::FRAC_PI_2).unwrap()
    }

    #[test]
    fn wall_reads_constant_z_depth() {
        // Fronto-parallel wall 5 m ahead: every pixel at or above the horizon
        // must read exactly 5.0 even though ray ranges grow toward the
        // corners; pixels below the horizon see the nearer ground instead.
        let w = flat_world(vec![Primitive::Box {
            cx: 5.05,
            cy: 0.0,
            half_x: 0.05,
            half_y: 50.0,
            z0: 0.0,
            z1: 50.0,
        }]);
        let k = small_intrinsics();
        let mount = CameraMount {
            height: 1.0,
            pitch_down: 0.0,
        };
        let state = RobotState::at(0.0, 0.0, 0.0);
        let depth = render_depth(&w, &mount.pose(&w, &state), &k, 30.0);
        assert_eq!(depth.valid_count(), 64 * 48);
        let horizon = k.cy.floor() as usize;
        for v in 0..=horizon {
            for u in 0..depth.width {
                let z = depth.values[depth.idx(u, v)];
                assert!((z - 5.0).abs() < 1e-9, "z-depth {z} at ({u}, {v})");
            }
        }
        // Bottom row: ground well in front of the wall.
        assert!(depth.values[depth.idx(0, 47)] < 5.0);
    }

    #[test]
    fn sky_pixels_are_invalid_ground_pixels_match_projection() {
        let w = flat_world(vec![]);
        let k = small_intrinsics();
        let mount = CameraMount::default();
        let state = RobotState::at(0.0, 0.0, 0.0);
        let pose = mount.pose(&w, &state);
        let depth = render_depth(&w, &pose, &k, 30.0);
        // Top rows look above the horizon on flat ground: invalid.
        assert!(!depth.valid[depth.idx(32, 0)]);
        // Bottom centre pixel: check against the analytic ground intersection.
        let (u, v) = (32usize, 47usize);
        let raw = Vector3::new((u as f64 - k.cx) / k.fx, (v as f64 - k.cy) / k.fy, 1.0);
        let dir = pose.rotation * raw.normalize();
        let t = -pose.translation.z / dir.z;
        let expect = t / raw.norm();
        let got = depth.values[depth.idx(u, v)];
        assert!(depth.valid[depth.idx(u, v)]);
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }

    #[test]
    fn grass_mask_marks_only_grass_hits() {
        let w = flat_world(vec![
            Primitive::Grass {
                polygon: vec![(3.0, -2.0), (6.0, -2.0), (6.0, 2.0), (3.0, 2.0)],
                height: 0.8,
                soft_edge: 0.3,
            },
            Primitive::Box {
                cx: 10.0,
                cy: 0.0,
                half_x: 0.5,
                half_y: 8.0,
                z0: 0.0,
                z1: 3.0,
            },
        ]);
        let k = small_intrinsics();
        let mount = CameraMount::default();
        let state = RobotState::at(0.0, 0.0, 0.0);
        let (depth, grass) = render_view(&w, &mount.pose(&w, &state), &k, 30.0);
        let n_grass = grass.iter().filter(|&&g| g).count();
        assert!(n_grass > 50, "grass patch should dominate the lower image");
        // Grass pixels carry the grass surface depth, which is closer than the
        // wall behind it at the same pixel would be.
        for v in 0..depth.height {
            for u in 0..depth.width {
                let i = depth.idx(u, v);
                if grass[i] {
                    assert!(depth.valid[i]);
                    assert!(depth.values[i] < 10.0);
                }
            }
        }
    }

    #[test]
    fn lidar_on_flat_ground_returns_ring_ranges() {
        let w = flat_world(vec![]);
        let spec = LidarSpec {
            range_noise_sigma: 0.0,
            ..LidarSpec::default()
        };
        let cloud = raycast_lidar(&w, &RobotState::at(0.0, 0.0, 0.0), &spec, 1);
        assert!(!cloud.points.is_empty());
        // Every return lies on the ground plane within numerical tolerance.
        for p in &cloud.points {
            assert!(p.z.abs() < 1e-6, "ground return at z={}", p.z);
            assert!(p.x.hypot(p.y) <= spec.max_range + 1e-6);
        }
        // Down-fan rays at 45 degrees land 0.8 m out; verify the closest ring.
        let min_r = cloud
            .points
            .iter()
            .map(|p| p.x.hypot(p.y))
            .fold(f64::INFINITY, f64::min);
        assert!((min_r - spec.mount_height).abs() < 1e-6);
    }

    #[test]
    fn lidar_noise_is_seeded() {
        let w = generate_world(Difficulty::Medium, 4);
        let spec = LidarSpec::default();
        let state = RobotState::at(0.0, 0.0, 0.3);
        let a = raycast_lidar(&w, &state, &spec, 77);
        let b = raycast_lidar(&w, &state, &spec, 77);
        let c = raycast_lidar(&w, &state, &spec, 78);
        assert_eq!(a.points, b.points);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn lidar_sees_an_obstacle_as_a_vertical_stack() {
        let w = flat_world(vec![Primitive::Cylinder {
            cx: 3.0,
            cy: 0.0,
            radius: 0.3,
            z0: 0.0,
            z1: 2.0,
        }]);
        let spec = LidarSpec {
            range_noise_sigma: 0.0,
            ..LidarSpec::default()
        };
        let cloud = raycast_lidar(&w, &RobotState::at(0.0, 0.0, 0.0), &spec, 0);
        let on_cylinder: Vec<_> = cloud
            .points
            .iter()
            .filter(|p| (p.x.hypot(p.y) - 2.7).abs() < 0.05 && p.z > 0.05)
            .collect();
        assert!(
            on_cylinder.len() >= 4,
            "expected several rings on the trunk, got {}",
            on_cylinder.len()
        );
    }
}
