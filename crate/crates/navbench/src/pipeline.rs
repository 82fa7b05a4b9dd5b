//! The closed perception → segmentation → mapping → planning loop.
//!
//! One episode is a single-threaded fixed-step simulation. Each module runs
//! at its own rate on whatever its upstream last produced — exactly how the
//! onboard stack behaves, minus the threads. The longer mono processing
//! chain therefore shows up as genuinely staler maps, which is the latency
//! effect the benchmark is built to expose.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csf::{classify, simulate_cloth, ClothParams};
use crate::depth::{
    edge_mask, fit_scale_shift, metricize, smooth_scale_shift, EdgeMask, MetricizeOptions,
    ScaleShift,
};
use crate::elevation::{ElevationGrid, ElevationParams};
use crate::geometry::{CameraIntrinsics, PointCloud, RobotState};
use crate::planning::{astar, build_costmap, first_command, teb_optimize, Costmap, PlannerConfig};
use crate::seeding;
use crate::sim::{
    raycast_lidar, render_view, sample_anchors, step_robot, synthesize_relative_depth,
    AnchorModel, CameraMount, DepthArtifacts, LidarSpec, Primitive, World,
};

/// Goal acceptance radius (m): the run succeeds inside this distance.
pub const SUCCESS_RADIUS: f64 = 2.0;

/// How often the trajectory is sampled into the run record (s).
const TRAJECTORY_PERIOD: f64 = 0.1;

/// Margin kept between a projected intermediate goal and the map edge (m).
const GOAL_MARGIN: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("rates must be positive, got {0} Hz")]
    NonPositiveRate(f64),
    #[error("sim_dt must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("tick period {period} s is not an integer multiple of sim_dt {sim_dt} s")]
    RateNotDivisible { period: f64, sim_dt: f64 },
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("invalid planner config: {0}")]
    Planner(String),
    #[error("invalid cloth config: {0}")]
    Cloth(String),
    #[error("invalid elevation config: {0}")]
    Elevation(String),
}

/// Which sensor feeds the mapping stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceptionMode {
    Lidar,
    Mono,
}

impl PerceptionMode {
    pub fn name(self) -> &'static str {
        match self {
            PerceptionMode::Lidar => "lidar",
            PerceptionMode::Mono => "mono",
        }
    }
}

impl std::str::FromStr for PerceptionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lidar" => Ok(PerceptionMode::Lidar),
            "mono" => Ok(PerceptionMode::Mono),
            other => Err(format!("unknown mode `{other}` (lidar|mono)")),
        }
    }
}

/// Module tick rates (Hz). Defaults mirror the onboard frequency table:
/// LiDAR perception runs at 20 Hz with mapping at 16 Hz, the mono chain at
/// 10 Hz with mapping at 6 Hz; planning is 12 Hz in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    pub perception_hz: f64,
    pub mapping_hz: f64,
    pub planning_hz: f64,
}

impl Rates {
    pub fn for_mode(mode: PerceptionMode) -> Self {
        match mode {
            PerceptionMode::Lidar => Rates {
                perception_hz: 20.0,
                mapping_hz: 16.0,
                planning_hz: 12.0,
            },
            PerceptionMode::Mono => Rates {
                perception_hz: 10.0,
                mapping_hz: 6.0,
                planning_hz: 12.0,
            },
        }
    }
}

/// Forward camera geometry for mono mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view (rad).
    pub hfov: f64,
    pub mount: CameraMount,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 320,
            height: 240,
            hfov: std::f64::consts::FRAC_PI_2,
            mount: CameraMount::default(),
        }
    }
}

impl CameraConfig {
    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics::from_hfov(self.width, self.height, self.hfov)
            .expect("camera config validated")
    }
}

/// Knobs of the mono depth-recovery chain that are not artifacts of the
/// simulated network itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonoChain {
    /// Trim anchor outliers around the median residual before refitting.
    pub robust_fit: bool,
    /// Sobel threshold as a fraction of the frame's disparity range.
    pub edge_grad_threshold: f64,
    /// Chebyshev dilation radius of the edge mask (px).
    pub edge_dilation: usize,
    pub metricize: MetricizeOptions,
}

impl Default for MonoChain {
    fn default() -> Self {
        MonoChain {
            robust_fit: true,
            edge_grad_threshold: 0.05,
            edge_dilation: 5,
            metricize: MetricizeOptions::default(),
        }
    }
}

/// Everything one episode needs besides the world and the goal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub perception_mode: PerceptionMode,
    pub rates: Rates,
    /// Fixed integration step (s). All tick periods must be integer
    /// multiples of it.
    pub sim_dt: f64,
    /// Ablation flag: apply the Sobel edge mask before back-projection.
    pub edge_masking: bool,
    /// Ablation flag: EMA-smooth the per-frame scale/shift estimate.
    pub smoothing: bool,
    /// EMA weight on the previous estimate when smoothing is on.
    pub alpha: f64,
    pub planner: PlannerConfig,
    pub csf: ClothParams,
    pub elevation: ElevationParams,
    pub lidar: LidarSpec,
    pub camera: CameraConfig,
    pub artifacts: DepthArtifacts,
    pub anchors: AnchorModel,
    pub mono: MonoChain,
    /// Consecutive failed planning ticks before the episode aborts.
    pub max_consecutive_infeasible: usize,
    /// Extra inflation on top of the robot radius (m). Covers cell-centre
    /// quantization and the band's pose spacing, both of which let the
    /// continuous robot cut slightly inside the discrete free region.
    pub inflation_padding: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            perception_mode: PerceptionMode::Lidar,
            rates: Rates::for_mode(PerceptionMode::Lidar),
            // 1/240 s: the finest grid that divides every default tick
            // period (20, 16, 12, 10 and 6 Hz) exactly.
            sim_dt: 1.0 / 240.0,
            edge_masking: true,
            smoothing: true,
            alpha: 0.8,
            planner: PlannerConfig::default(),
            csf: ClothParams::default(),
            elevation: ElevationParams::default(),
            lidar: LidarSpec::default(),
            camera: CameraConfig::default(),
            artifacts: DepthArtifacts::default(),
            anchors: AnchorModel::default(),
            mono: MonoChain::default(),
            max_consecutive_infeasible: 10,
            inflation_padding: 0.15,
        }
    }
}

impl PipelineConfig {
    pub fn for_mode(mode: PerceptionMode) -> Self {
        PipelineConfig {
            perception_mode: mode,
            rates: Rates::for_mode(mode),
            ..PipelineConfig::default()
        }
    }

    /// Steps per tick for a module rate, or an error when the period does
    /// not land on the integration grid.
    fn steps_for(&self, hz: f64) -> Result<u64, ConfigError> {
        if hz <= 0.0 {
            return Err(ConfigError::NonPositiveRate(hz));
        }
        let period = 1.0 / hz;
        let steps = period / self.sim_dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(ConfigError::RateNotDivisible {
                period,
                sim_dt: self.sim_dt,
            });
        }
        Ok(steps.round() as u64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sim_dt <= 0.0 {
            return Err(ConfigError::NonPositiveDt(self.sim_dt));
        }
        for hz in [
            self.rates.perception_hz,
            self.rates.mapping_hz,
            self.rates.planning_hz,
        ] {
            self.steps_for(hz)?;
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(ConfigError::AlphaOutOfRange(self.alpha));
        }
        self.planner
            .validate()
            .map_err(|e| ConfigError::Planner(e.to_string()))?;
        self.csf
            .validate()
            .map_err(|e| ConfigError::Cloth(e.to_string()))?;
        self.elevation
            .validate()
            .map_err(|e| ConfigError::Elevation(e.to_string()))?;
        CameraIntrinsics::from_hfov(self.camera.width, self.camera.height, self.camera.hfov)
            .map_err(|e| ConfigError::Planner(e.to_string()))?;
        Ok(())
    }
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Timeout,
    Collision,
    PlannerAbort,
}

/// One episode's result: outcome, odometry length, and a decimated
/// trajectory for distance-rate scoring and plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub outcome: Outcome,
    /// Sum of consecutive displacements of the recorded trajectory (m).
    pub path_length: f64,
    /// (t, state) samples every 100 ms plus the final state.
    pub trajectory: Vec<(f64, RobotState)>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

/// Default episode wall-clock budget: four times the straight-line optimum
/// plus a fixed grace period.
pub fn default_time_budget(start: (f64, f64), goal: (f64, f64), v_max: f64) -> f64 {
    4.0 * (goal.0 - start.0).hypot(goal.1 - start.1) / v_max + 60.0
}

/// Mono perception state that persists across frames.
struct MonoState {
    intrinsics: CameraIntrinsics,
    ema: Option<ScaleShift>,
    /// Widest grass soft edge in the world, sizing the silhouette blur.
    soft_edge: f64,
}

/// Run one closed-loop episode. Deterministic for a given
/// (world, cfg, seed); all failure modes are outcomes, not errors.
///
/// The config must be valid (see [`PipelineConfig::validate`]); an invalid
/// one is a caller bug and panics.
pub fn run_episode(
    world: &World,
    start: RobotState,
    goal: (f64, f64),
    cfg: &PipelineConfig,
    seed: u64,
    time_budget: f64,
) -> RunRecord {
    cfg.validate().expect("pipeline config must be validated");
    let perception_steps = cfg.steps_for(cfg.rates.perception_hz).unwrap();
    let mapping_steps = cfg.steps_for(cfg.rates.mapping_hz).unwrap();
    let planning_steps = cfg.steps_for(cfg.rates.planning_hz).unwrap();

    let lidar_salt = seeding::mix(seed, 0x11DA);
    let synth_salt = seeding::mix(seed, 0x0DE9);
    let anchor_salt = seeding::mix(seed, 0xA2C4);

    let mut state = start;
    let mut grid = ElevationGrid::new(&cfg.elevation, (start.x, start.y))
        .expect("elevation config must be validated");
    let mut cloud: Option<PointCloud> = None;
    let mut mono = MonoState {
        intrinsics: cfg.camera.intrinsics(),
        ema: None,
        soft_edge: world
            .obstacles
            .iter()
            .filter_map(|p| match *p {
                Primitive::Grass { soft_edge, .. } => Some(soft_edge),
                _ => None,
            })
            .fold(0.3, f64::max),
    };
    let mut cmd = (0.0, 0.0);
    let mut infeasible = 0usize;
    let mut frame = 0u64;
    let mut map_tick = 0u64;
    let mut trajectory = vec![(0.0, state)];
    let mut next_sample = TRAJECTORY_PERIOD;

    let goal_reached =
        |s: &RobotState| (s.x - goal.0).hypot(s.y - goal.1) <= SUCCESS_RADIUS;

    let outcome = if goal_reached(&state) {
        Outcome::Success
    } else {
        let mut step: u64 = 0;
        let outcome = loop {
            let t = step as f64 * cfg.sim_dt;
            if t >= time_budget {
                break Outcome::Timeout;
            }

            if step % perception_steps == 0 {
                if let Some(new_cloud) = sense(world, &state, cfg, &mut mono, frame, lidar_salt, synth_salt, anchor_salt) {
                    cloud = Some(new_cloud);
                }
                frame += 1;
            }

            if step % mapping_steps == 0 {
                if let Some(c) = &cloud {
                    update_map(&mut grid, c, &state, cfg, map_tick);
                    map_tick += 1;
                }
            }

            if step % planning_steps == 0 {
                match plan(&grid, &state, goal, cfg) {
                    Some(c) => {
                        cmd = c;
                        infeasible = 0;
                    }
                    None => {
                        cmd = (0.0, 0.0);
                        infeasible += 1;
                        if infeasible >= cfg.max_consecutive_infeasible {
                            break Outcome::PlannerAbort;
                        }
                    }
                }
            }

            match step_robot(
                &state,
                cmd,
                cfg.sim_dt,
                world,
                cfg.planner.robot_radius,
                cfg.planner.a_max,
            ) {
                Ok(next) => state = next,
                Err(_) => {
                    step += 1;
                    break Outcome::Collision;
                }
            }
            step += 1;
            let now = step as f64 * cfg.sim_dt;
            if now + 1e-12 >= next_sample {
                trajectory.push((now, state));
                next_sample += TRAJECTORY_PERIOD;
            }
            if goal_reached(&state) {
                break Outcome::Success;
            }
        };
        let t_end = step as f64 * cfg.sim_dt;
        if trajectory.last().map(|&(t, _)| t) != Some(t_end) && t_end > 0.0 {
            trajectory.push((t_end, state));
        }
        outcome
    };

    let path_length = trajectory
        .windows(2)
        .map(|w| (w[1].1.x - w[0].1.x).hypot(w[1].1.y - w[0].1.y))
        .sum();
    RunRecord {
        seed,
        outcome,
        path_length,
        trajectory,
    }
}

/// One perception tick: produce a world-frame point cloud, or `None` to keep
/// the previous one (mono recovery can fail on a bad frame).
#[allow(clippy::too_many_arguments)]
fn sense(
    world: &World,
    state: &RobotState,
    cfg: &PipelineConfig,
    mono: &mut MonoState,
    frame: u64,
    lidar_salt: u64,
    synth_salt: u64,
    anchor_salt: u64,
) -> Option<PointCloud> {
    match cfg.perception_mode {
        PerceptionMode::Lidar => Some(raycast_lidar(
            world,
            state,
            &cfg.lidar,
            seeding::mix(lidar_salt, frame),
        )),
        PerceptionMode::Mono => {
            let pose = cfg.camera.mount.pose(world, state);
            let (gt, grass) = render_view(
                world,
                &pose,
                &mono.intrinsics,
                cfg.mono.metricize.max_range,
            );
            let disp = synthesize_relative_depth(
                &gt,
                &grass,
                &cfg.artifacts,
                mono.intrinsics.fx,
                mono.soft_edge,
                seeding::mix(synth_salt, frame),
            );
            let anchors =
                sample_anchors(&gt, &cfg.anchors, seeding::mix(anchor_salt, frame)).ok()?;
            let fitted = fit_scale_shift(&disp, &anchors, cfg.mono.robust_fit).ok()?;
            let alpha = if cfg.smoothing { cfg.alpha } else { 0.0 };
            let smoothed = match mono.ema {
                Some(prev) => smooth_scale_shift(prev, fitted, alpha).ok()?,
                None => fitted,
            };
            mono.ema = Some(smoothed);
            let mask = if cfg.edge_masking {
                edge_mask(&disp, cfg.mono.edge_grad_threshold, cfg.mono.edge_dilation)
            } else {
                EdgeMask::empty(disp.width, disp.height)
            };
            metricize(
                &disp,
                smoothed,
                &mask,
                &cfg.mono.metricize,
                &pose,
                &mono.intrinsics,
            )
            .ok()
        }
    }
}

/// One mapping tick: segment the latest cloud and fold it into the grid.
fn update_map(
    grid: &mut ElevationGrid,
    cloud: &PointCloud,
    state: &RobotState,
    cfg: &PipelineConfig,
    tick: u64,
) {
    if cloud.points.is_empty() {
        return;
    }
    let Ok(cloth) = simulate_cloth(cloud, &cfg.csf) else {
        return;
    };
    let seg = classify(cloud, &cloth, cfg.csf.class_threshold);
    grid.recenter((state.x, state.y));
    grid.integrate(&seg, tick, cfg.elevation.min_ground_points);
}

/// One planning tick: costmap → global path → elastic band → command.
/// `None` means this tick failed to produce a command.
fn plan(
    grid: &ElevationGrid,
    state: &RobotState,
    goal: (f64, f64),
    cfg: &PipelineConfig,
) -> Option<(f64, f64)> {
    let inflate = cfg.planner.robot_radius + cfg.inflation_padding;
    let mut costmap = build_costmap(grid, cfg.elevation.height_threshold, inflate);
    let target = project_goal(&costmap, (state.x, state.y), goal);
    let path = match astar(&costmap, (state.x, state.y), target) {
        Ok(p) => p,
        Err(crate::planning::PlanError::StartBlocked) => {
            // Recovery: the robot demonstrably occupies its footprint, so
            // inflation covering it is noise. Clear it and try once more.
            // Doing this unconditionally would let the robot chew through
            // real walls one replanned disc at a time.
            clear_robot_disc(&mut costmap, state, inflate);
            astar(&costmap, (state.x, state.y), target).ok()?
        }
        Err(_) => return None,
    };
    let band = teb_optimize(&path, &costmap, state, &cfg.planner).ok()?;
    Some(first_command(&band, &cfg.planner))
}

fn clear_robot_disc(costmap: &mut Costmap, state: &RobotState, radius: f64) {
    let r_cells = (radius / costmap.resolution()).ceil() as i64;
    if let Some((ci, cj)) = costmap.world_to_cell(state.x, state.y) {
        for dj in -r_cells..=r_cells {
            for di in -r_cells..=r_cells {
                let (i, j) = (ci as i64 + di, cj as i64 + dj);
                if i < 0 || j < 0 || i >= costmap.width() as i64 || j >= costmap.height() as i64 {
                    continue;
                }
                let (x, y) = costmap.cell_to_world(i as usize, j as usize);
                if (x - state.x).hypot(y - state.y) <= radius {
                    costmap.set_blocked(i as usize, j as usize, false);
                }
            }
        }
    }
}

/// Clamp an out-of-map goal onto the segment robot→goal at the map edge
/// (with margin), then walk it back to the nearest free cell along the same
/// segment so A* has a reachable target.
fn project_goal(costmap: &Costmap, robot: (f64, f64), goal: (f64, f64)) -> (f64, f64) {
    let min_x = costmap.origin().0 - 0.5 * costmap.resolution() + GOAL_MARGIN;
    let max_x = costmap.origin().0 + (costmap.width() as f64 - 0.5) * costmap.resolution() - GOAL_MARGIN;
    let min_y = costmap.origin().1 - 0.5 * costmap.resolution() + GOAL_MARGIN;
    let max_y = costmap.origin().1 + (costmap.height() as f64 - 0.5) * costmap.resolution() - GOAL_MARGIN;

    let (dx, dy) = (goal.0 - robot.0, goal.1 - robot.1);
    let mut t_max: f64 = 1.0;
    if dx.abs() > 1e-12 {
        let bound = if dx > 0.0 { max_x } else { min_x };
        t_max = t_max.min((bound - robot.0) / dx);
    }
    if dy.abs() > 1e-12 {
        let bound = if dy > 0.0 { max_y } else { min_y };
        t_max = t_max.min((bound - robot.1) / dy);
    }
    let t_max = t_max.clamp(0.0, 1.0);
    let mut target = (robot.0 + t_max * dx, robot.1 + t_max * dy);

    // Walk back toward the robot until the target cell is free.
    let seg_len = (target.0 - robot.0).hypot(target.1 - robot.1);
    let step = costmap.resolution();
    let mut travelled = 0.0;
    while travelled < seg_len {
        match costmap.world_to_cell(target.0, target.1) {
            Some((i, j)) if !costmap.is_blocked(i, j) => break,
            _ => {
                let scale = (seg_len - travelled - step) / (seg_len - travelled);
                target = (
                    robot.0 + (target.0 - robot.0) * scale.max(0.0),
                    robot.1 + (target.1 - robot.1) * scale.max(0.0),
                );
                travelled += step;
            }
        }
    }
    target
}
