//! Elastic-band local trajectory optimisation.
//!
//! A short band of timed poses is initialised along the global path ahead
//! of the robot and refined by damped gradient descent on a weighted sum of
//! transit time, obstacle clearance, global-path attraction, nonholonomic
//! consistency and velocity-limit penalties. Gradients come from central
//! finite differences — the band is small, so this stays cheap and keeps
//! the cost function trivially extensible.

use super::{Costmap, GlobalPath, PlanError};
use crate::geometry::{angle_diff, wrap_angle, RobotState};
use crate::planning::costmap::DistanceField;
use serde::{Deserialize, Serialize};

/// Desired spacing between band poses along the global path (m).
const BAND_SPACING: f64 = 0.3;
/// Look-ahead horizon along the global path (m).
const HORIZON: f64 = 5.0;
/// Lower clamp for segment time steps (s).
const DT_MIN: f64 = 0.01;
/// Finite-difference step for positions/headings/times.
const FD_STEP: f64 = 1e-4;
/// Backtracking halvings before declaring the iteration converged.
const MAX_HALVINGS: u32 = 20;

/// Weight presets: tuned-for-simulation follows the global plan slavishly,
/// real-world parameters trade path adherence for obstacle margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    SimTuned,
    RealParams,
}

/// Local-planner configuration (weights, limits, optimisation budget).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub mode: PlannerMode,
    /// Robot disc radius (m); the costmap is inflated by this.
    pub robot_radius: f64,
    /// Forward velocity limit (m/s).
    pub v_max: f64,
    /// Reverse velocity limit (m/s), within [-v_max, 0].
    pub v_min: f64,
    /// Yaw-rate limit (rad/s).
    pub omega_max: f64,
    /// Longitudinal acceleration limit (m/s^2), enforced by the platform.
    pub a_max: f64,
    /// Desired extra margin to obstacles beyond the inflated footprint (m).
    pub obstacle_clearance: f64,
    pub w_time: f64,
    pub w_obstacle: f64,
    pub w_viapoint: f64,
    pub w_kinematic: f64,
    pub w_velocity: f64,
    /// Outer gradient-descent iterations.
    pub iterations: usize,
    /// Dimensionless initial step scale; the largest variable moves at most
    /// this far per accepted step.
    pub step_size: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self::preset(PlannerMode::RealParams)
    }
}

impl PlannerConfig {
    pub fn preset(mode: PlannerMode) -> Self {
        let base = Self {
            mode,
            robot_radius: 0.6,
            v_max: 1.5,
            v_min: -0.5,
            omega_max: 1.0,
            a_max: 2.0,
            obstacle_clearance: 0.3,
            w_time: 1.0,
            w_obstacle: 10.0,
            w_viapoint: 1.0,
            w_kinematic: 10.0,
            w_velocity: 5.0,
            iterations: 100,
            step_size: 0.1,
        };
        match mode {
            PlannerMode::RealParams => base,
            // Follow the global plan as closely as possible; obstacle
            // repulsion off, strong via-point attraction.
            PlannerMode::SimTuned => Self {
                w_obstacle: 0.0,
                w_viapoint: 50.0,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_max > 0.0) {
            return Err(format!("v_max must be positive, got {}", self.v_max));
        }
        if !(-self.v_max..=0.0).contains(&self.v_min) {
            return Err(format!("v_min must lie in [-v_max, 0], got {}", self.v_min));
        }
        if !(self.omega_max > 0.0) || !(self.a_max > 0.0) {
            return Err("omega_max and a_max must be positive".into());
        }
        if self.robot_radius < 0.0 || self.obstacle_clearance < 0.0 {
            return Err("radii must be non-negative".into());
        }
        if !(self.step_size > 0.0) {
            return Err(format!("step_size must be positive, got {}", self.step_size));
        }
        for (name, w) in [
            ("w_time", self.w_time),
            ("w_obstacle", self.w_obstacle),
            ("w_viapoint", self.w_viapoint),
            ("w_kinematic", self.w_kinematic),
            ("w_velocity", self.w_velocity),
        ] {
            if w < 0.0 || !w.is_finite() {
                return Err(format!("{name} must be a non-negative finite weight, got {w}"));
            }
        }
        Ok(())
    }
}

/// Timed pose band: `poses.len() == dts.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTrajectory {
    /// (x, y, heading) per band pose; first and last are fixed.
    pub poses: Vec<(f64, f64, f64)>,
    /// Time allotted to each segment (s).
    pub dts: Vec<f64>,
    /// Final value of the optimisation objective.
    pub cost: f64,
}

/// Builds the initial band by sampling the global path ahead of the robot.
pub(crate) fn initialize_band(
    path: &GlobalPath,
    state: &RobotState,
    cfg: &PlannerConfig,
) -> LocalTrajectory {
    let cum = path.cumulative_lengths();
    let total = path.total_length;

    // Arc position of the path point nearest to the robot.
    let mut s0 = 0.0;
    let mut best = f64::INFINITY;
    for (i, w) in path.waypoints.windows(2).enumerate() {
        let (ax, ay) = w[0];
        let (bx, by) = w[1];
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((state.x - ax) * dx + (state.y - ay) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (px, py) = (ax + t * dx, ay + t * dy);
        let d2 = (state.x - px).powi(2) + (state.y - py).powi(2);
        if d2 < best {
            best = d2;
            s0 = cum[i] + t * len2.sqrt();
        }
    }
    if path.waypoints.len() == 1 {
        s0 = 0.0;
    }

    let horizon = (total - s0).min(HORIZON).max(0.0);
    let n = ((horizon / BAND_SPACING).ceil() as usize + 1).max(2);

    let mut poses: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    poses.push((state.x, state.y, state.theta));
    for k in 1..n {
        let s = s0 + horizon * k as f64 / (n - 1) as f64;
        let (x, y) = point_at(path, &cum, s);
        poses.push((x, y, 0.0));
    }
    // Headings point along the band.
    for k in 1..n {
        let (px, py, _) = poses[k - 1];
        let (x, y, _) = poses[k];
        let heading = if (x - px).abs() + (y - py).abs() > 1e-12 {
            (y - py).atan2(x - px)
        } else if k >= 2 {
            poses[k - 1].2
        } else {
            state.theta
        };
        poses[k].2 = heading;
    }

    let dts = poses
        .windows(2)
        .map(|w| {
            let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            (d / cfg.v_max).max(DT_MIN)
        })
        .collect();

    LocalTrajectory { poses, dts, cost: f64::INFINITY }
}

fn point_at(path: &GlobalPath, cum: &[f64], s: f64) -> (f64, f64) {
    if path.waypoints.len() == 1 || s <= 0.0 {
        return path.waypoints[0];
    }
    let last = *cum.last().unwrap();
    if s >= last {
        return *path.waypoints.last().unwrap();
    }
    // cum is sorted; find the segment containing s.
    let mut i = match cum.binary_search_by(|c| c.total_cmp(&s)) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    i = i.min(path.waypoints.len() - 2);
    let seg = cum[i + 1] - cum[i];
    let t = if seg > 0.0 { (s - cum[i]) / seg } else { 0.0 };
    let (ax, ay) = path.waypoints[i];
    let (bx, by) = path.waypoints[i + 1];
    (ax + t * (bx - ax), ay + t * (by - ay))
}

#[inline]
fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

/// Objective over the band. `via` holds one attraction target per pose
/// (fixed during an outer iteration, like classic via-point association).
pub(crate) fn band_cost(
    poses: &[(f64, f64, f64)],
    dts: &[f64],
    field: &DistanceField,
    via: &[(f64, f64)],
    cfg: &PlannerConfig,
) -> f64 {
    let mut cost = 0.0;

    cost += cfg.w_time * dts.iter().sum::<f64>();

    if cfg.w_obstacle > 0.0 {
        for &(x, y, _) in poses {
            let pen = hinge(cfg.obstacle_clearance - field.sample(x, y));
            if pen > 0.0 && pen.is_finite() {
                cost += cfg.w_obstacle * pen * pen;
            } else if pen.is_infinite() {
                return f64::INFINITY; // Buried in a map with no free cells.
            }
        }
    }

    if cfg.w_viapoint > 0.0 {
        for (k, &(x, y, _)) in poses.iter().enumerate() {
            let (vx, vy) = via[k];
            cost += cfg.w_viapoint * ((x - vx).powi(2) + (y - vy).powi(2));
        }
    }

    for k in 0..dts.len() {
        let (x0, y0, th0) = poses[k];
        let (x1, y1, th1) = poses[k + 1];
        let (dx, dy) = (x1 - x0, y1 - y0);
        let thm = th0 + 0.5 * angle_diff(th1, th0);
        let lon = thm.cos() * dx + thm.sin() * dy;
        let lat = -thm.sin() * dx + thm.cos() * dy;

        cost += cfg.w_kinematic * lat * lat;

        let dt = dts[k].max(DT_MIN);
        let v = lon / dt;
        let om = angle_diff(th1, th0) / dt;
        let pv = hinge(v.abs() - cfg.v_max);
        let pw = hinge(om.abs() - cfg.omega_max);
        cost += cfg.w_velocity * (pv * pv + pw * pw);
    }

    cost
}

fn nearest_waypoint(path: &GlobalPath, x: f64, y: f64) -> (f64, f64) {
    let mut best = (x, y);
    let mut bd = f64::INFINITY;
    for &(wx, wy) in &path.waypoints {
        let d = (wx - x).powi(2) + (wy - y).powi(2);
        if d < bd {
            bd = d;
            best = (wx, wy);
        }
    }
    best
}

/// Optimises the band ahead of the robot and checks final feasibility.
///
/// Runs `cfg.iterations` damped gradient-descent steps (each backed by a
/// backtracking line search, so the objective never increases). The result
/// is [`PlanError::Infeasible`] if any optimised pose still sits on a
/// blocked costmap cell.
pub fn teb_optimize(
    path: &GlobalPath,
    cmap: &Costmap,
    state: &RobotState,
    cfg: &PlannerConfig,
) -> Result<LocalTrajectory, PlanError> {
    assert!(!path.waypoints.is_empty(), "global path must be non-empty");
    let mut band = initialize_band(path, state, cfg);
    let field = cmap.signed_distance_field();
    let n = band.poses.len();

    // Free variables: poses 1..n-1 (x, y, theta) and all segment times.
    let free_poses = n.saturating_sub(2);
    let dim = free_poses * 3 + band.dts.len();

    let mut via: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    let mut grad = vec![0.0; dim];

    let eval = |poses: &[(f64, f64, f64)], dts: &[f64], via: &[(f64, f64)]| {
        band_cost(poses, dts, &field, via, cfg)
    };

    let mut cost = f64::INFINITY;
    for _ in 0..cfg.iterations {
        for (k, &(x, y, _)) in band.poses.iter().enumerate() {
            via[k] = nearest_waypoint(path, x, y);
        }
        cost = eval(&band.poses, &band.dts, &via);

        // Central finite differences.
        let mut poses = band.poses.clone();
        let mut dts = band.dts.clone();
        for p in 0..free_poses {
            for axis in 0..3 {
                let k = p + 1;
                let orig = poses[k];
                let bump = |pose: (f64, f64, f64), s: f64| match axis {
                    0 => (pose.0 + s, pose.1, pose.2),
                    1 => (pose.0, pose.1 + s, pose.2),
                    _ => (pose.0, pose.1, pose.2 + s),
                };
                poses[k] = bump(orig, FD_STEP);
                let cp = eval(&poses, &dts, &via);
                poses[k] = bump(orig, -FD_STEP);
                let cm = eval(&poses, &dts, &via);
                poses[k] = orig;
                grad[p * 3 + axis] = (cp - cm) / (2.0 * FD_STEP);
            }
        }
        for t in 0..dts.len() {
            let orig = dts[t];
            dts[t] = orig + FD_STEP;
            let cp = eval(&poses, &dts, &via);
            dts[t] = (orig - FD_STEP).max(DT_MIN);
            let cm = eval(&poses, &dts, &via);
            dts[t] = orig;
            grad[free_poses * 3 + t] = (cp - cm) / (2.0 * FD_STEP);
        }

        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < 1e-12 {
            break;
        }

        // Damped step with backtracking: largest coordinate moves at most
        // step_size, halved until the cost decreases.
        let mut lambda = cfg.step_size / gmax;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let mut cand_poses = band.poses.clone();
            let mut cand_dts = band.dts.clone();
            for p in 0..free_poses {
                let k = p + 1;
                cand_poses[k].0 -= lambda * grad[p * 3];
                cand_poses[k].1 -= lambda * grad[p * 3 + 1];
                cand_poses[k].2 = wrap_angle(cand_poses[k].2 - lambda * grad[p * 3 + 2]);
            }
            for t in 0..cand_dts.len() {
                cand_dts[t] = (cand_dts[t] - lambda * grad[free_poses * 3 + t]).max(DT_MIN);
            }
            let cand_cost = eval(&cand_poses, &cand_dts, &via);
            if cand_cost < cost {
                band.poses = cand_poses;
                band.dts = cand_dts;
                cost = cand_cost;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break; // Line search exhausted: treat as converged.
        }
    }

    if cost.is_infinite() {
        // Zero iterations: report the cost of the initial band.
        for (k, &(x, y, _)) in band.poses.iter().enumerate() {
            via[k] = nearest_waypoint(path, x, y);
        }
        cost = eval(&band.poses, &band.dts, &via);
    }
    band.cost = cost;

    for &(x, y, _) in &band.poses {
        if cmap.is_blocked_world(x, y) {
            return Err(PlanError::Infeasible);
        }
    }
    Ok(band)
}

/// Velocity command realising the first band segment, clamped to the
/// platform limits: longitudinal displacement in the current heading frame
/// over the first time step, and the heading change rate.
pub fn first_command(traj: &LocalTrajectory, cfg: &PlannerConfig) -> (f64, f64) {
    if traj.poses.len() < 2 || traj.dts.is_empty() {
        return (0.0, 0.0);
    }
    let (x0, y0, th0) = traj.poses[0];
    let (x1, y1, th1) = traj.poses[1];
    let dt = traj.dts[0].max(DT_MIN);
    let v = (th0.cos() * (x1 - x0) + th0.sin() * (y1 - y0)) / dt;
    let omega = angle_diff(th1, th0) / dt;
    (v.clamp(cfg.v_min, cfg.v_max), omega.clamp(-cfg.omega_max, cfg.omega_max))
}
