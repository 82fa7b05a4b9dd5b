//! Benchmark harness: scenario grids over procedural worlds, ground-truth
//! reference paths, SR/SPL/DR metrics, and deterministic reports.
//!
//! A *scenario* is one generated world plus one goal; its N runs share the
//! world and differ only in the run seed (sensor noise, depth artifacts,
//! anchor glitches). Run seeds derive from the scenario world seed and the
//! run index alone — never from the perception mode or config — so runs are
//! paired across modes and across ablation variants.

mod metrics;
mod reference;
mod report;

pub use metrics::{compute_metrics, ScenarioMetrics, PROGRESS_DELTA};
pub use reference::{ground_truth_costmap, reference_trajectory, BenchError, ReferenceTrajectory};
pub use report::{AblationRow, CellReport, GoalAverage, Report, RunSummary, SkippedWorld};

use rayon::prelude::*;

use crate::geometry::RobotState;
use crate::pipeline::{
    default_time_budget, run_episode, PerceptionMode, PipelineConfig, Rates, RunRecord,
};
use crate::planning::PlannerMode;
use crate::seeding;
use crate::sim::{generate_world, Difficulty, Primitive, Terrain, World, GOAL_DISTANCES};

/// All benchmark runs start at the world origin facing +x (the goal axis).
pub const START: (f64, f64) = (0.0, 0.0);
/// Runs per scenario in the full grid.
pub const DEFAULT_RUNS_PER_SCENARIO: usize = 10;

const SCENARIO_SALT: u64 = 0x5CE0;
const RUN_SALT: u64 = 0x20EE;
const MAX_WORLD_ATTEMPTS: u64 = 64;

/// A pipeline configuration with a label for reports.
#[derive(Debug, Clone)]
pub struct NamedConfig {
    pub label: String,
    pub config: PipelineConfig,
}

impl NamedConfig {
    pub fn new(label: impl Into<String>, config: PipelineConfig) -> Self {
        Self {
            label: label.into(),
            config,
        }
    }
}

/// Specialize a base config for one grid cell: perception rates follow the
/// mode, and the sim-tuned preset adapts cloth rigidness to the terrain tier
/// (1 flat, 2 medium, 3 hard) so the cloth always converges well.
pub fn cell_config(
    base: &PipelineConfig,
    mode: PerceptionMode,
    difficulty: Difficulty,
) -> PipelineConfig {
    let mut cfg = base.clone();
    // Swapping mode swaps to that mode's stock rates; a config already in
    // the requested mode keeps whatever rates it carries (file overrides).
    if cfg.perception_mode != mode {
        cfg.rates = Rates::for_mode(mode);
    }
    cfg.perception_mode = mode;
    if cfg.planner.mode == PlannerMode::SimTuned {
        cfg.csf.rigidness = match difficulty {
            Difficulty::Easy => 1,
            Difficulty::Medium => 2,
            Difficulty::Hard => 3,
        };
    }
    cfg
}

struct ScenarioSpec {
    difficulty: Difficulty,
    goal_m: f64,
    world_seed: u64,
    /// Base for run seeds; equals `world_seed` for generated worlds.
    seed_base: u64,
    world: World,
    reference: ReferenceTrajectory,
}

/// Draw one world per (difficulty, goal). Worlds without a ground-truth
/// path are logged and re-drawn with the next seed.
fn draw_scenarios(
    difficulties: &[Difficulty],
    goals: &[f64],
    master_seed: u64,
    robot_radius: f64,
) -> (Vec<ScenarioSpec>, Vec<SkippedWorld>) {
    let mut scenarios = Vec::new();
    let mut skipped = Vec::new();
    for (d_idx, &difficulty) in difficulties.iter().enumerate() {
        for (g_idx, &goal_m) in goals.iter().enumerate() {
            let base = seeding::mix(
                master_seed,
                SCENARIO_SALT ^ (((d_idx as u64) << 8) | g_idx as u64),
            );
            let mut drawn = false;
            for attempt in 0..MAX_WORLD_ATTEMPTS {
                let world_seed = seeding::mix(base, attempt);
                let world = generate_world(difficulty, world_seed);
                match reference_trajectory(&world, START, (goal_m, 0.0), robot_radius) {
                    Ok(reference) => {
                        scenarios.push(ScenarioSpec {
                            difficulty,
                            goal_m,
                            world_seed,
                            seed_base: world_seed,
                            world,
                            reference,
                        });
                        drawn = true;
                        break;
                    }
                    Err(e) => skipped.push(SkippedWorld {
                        difficulty,
                        goal_m,
                        world_seed,
                        reason: e.to_string(),
                    }),
                }
            }
            assert!(
                drawn,
                "no feasible {} world for the {goal_m} m goal in {MAX_WORLD_ATTEMPTS} draws",
                difficulty.name()
            );
        }
    }
    (scenarios, skipped)
}

/// One benchmark scenario, as `run_matrix` would draw it: the world shared
/// by every run of a (difficulty, goal) cell plus its ground-truth reference.
pub struct Scenario {
    pub difficulty: Difficulty,
    pub goal_m: f64,
    pub world_seed: u64,
    pub world: World,
    pub reference: ReferenceTrajectory,
}

/// Draw the single scenario `run_matrix(&[difficulty], &[goal_m], ..)` would
/// use, so one-off episodes land on the same worlds as the full grid.
/// Panics if no feasible world turns up within the redraw budget.
pub fn draw_scenario(
    difficulty: Difficulty,
    goal_m: f64,
    master_seed: u64,
    robot_radius: f64,
) -> Scenario {
    let (mut scenarios, _) = draw_scenarios(&[difficulty], &[goal_m], master_seed, robot_radius);
    let s = scenarios.pop().expect("one scenario requested");
    Scenario {
        difficulty: s.difficulty,
        goal_m: s.goal_m,
        world_seed: s.world_seed,
        world: s.world,
        reference: s.reference,
    }
}

/// Seed for run `run` of a scenario. Depends only on the scenario and the
/// run index — not on mode or config — so comparisons stay paired.
pub fn run_seed(world_seed: u64, run: usize) -> u64 {
    seeding::mix(world_seed, RUN_SALT ^ run as u64)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("worker pool")
            .install(f),
        None => f(),
    }
}

/// Run every (config, mode, scenario, run) cell and aggregate. Episodes are
/// scheduled on the worker pool; results land in a vector indexed by job
/// order, and aggregation is sequential, so reports are byte-identical for
/// identical inputs regardless of thread count.
fn execute(
    scenarios: Vec<ScenarioSpec>,
    skipped: Vec<SkippedWorld>,
    modes: &[PerceptionMode],
    configs: &[NamedConfig],
    runs_per_scenario: usize,
    master_seed: u64,
    jobs: Option<usize>,
) -> Report {
    struct Job<'a> {
        scen: &'a ScenarioSpec,
        cfg: PipelineConfig,
        seed: u64,
    }

    let mut job_list = Vec::new();
    for nc in configs {
        for &mode in modes {
            for scen in &scenarios {
                let cfg = cell_config(&nc.config, mode, scen.difficulty);
                cfg.validate().unwrap_or_else(|e| {
                    panic!(
                        "config {:?} invalid for mode {} / {}: {e}",
                        nc.label,
                        mode.name(),
                        scen.difficulty.name()
                    )
                });
                for run in 0..runs_per_scenario {
                    job_list.push(Job {
                        scen,
                        cfg: cfg.clone(),
                        seed: run_seed(scen.seed_base, run),
                    });
                }
            }
        }
    }

    let records: Vec<RunRecord> = with_pool(jobs, || {
        job_list
            .par_iter()
            .map(|job| {
                let goal = (job.scen.goal_m, 0.0);
                let budget = default_time_budget(START, goal, job.cfg.planner.v_max);
                run_episode(
                    &job.scen.world,
                    RobotState::at(START.0, START.1, 0.0),
                    goal,
                    &job.cfg,
                    job.seed,
                    budget,
                )
            })
            .collect()
    });

    let mut cells = Vec::new();
    let mut cell_records = Vec::new();
    let mut offset = 0;
    for nc in configs {
        for &mode in modes {
            for scen in &scenarios {
                let recs = records[offset..offset + runs_per_scenario].to_vec();
                offset += runs_per_scenario;
                let m = compute_metrics(&recs, &scen.reference, PROGRESS_DELTA)
                    .expect("batch is non-empty");
                cells.push(CellReport {
                    config_label: nc.label.clone(),
                    mode,
                    difficulty: scen.difficulty,
                    goal_m: scen.goal_m,
                    world_seed: scen.world_seed,
                    reference_length: scen.reference.total,
                    config: cell_config(&nc.config, mode, scen.difficulty),
                    metrics: m,
                    runs: recs
                        .iter()
                        .enumerate()
                        .map(|(i, r)| RunSummary::from_record(i, r))
                        .collect(),
                });
                cell_records.push(recs);
            }
        }
    }

    let mut goals_list: Vec<f64> = Vec::new();
    for s in &scenarios {
        if !goals_list.contains(&s.goal_m) {
            goals_list.push(s.goal_m);
        }
    }
    let mut goal_averages = Vec::new();
    for nc in configs {
        for &mode in modes {
            for &goal_m in &goals_list {
                let sel: Vec<&CellReport> = cells
                    .iter()
                    .filter(|c| c.config_label == nc.label && c.mode == mode && c.goal_m == goal_m)
                    .collect();
                if sel.is_empty() {
                    continue;
                }
                let n = sel.len() as f64;
                goal_averages.push(GoalAverage {
                    config_label: nc.label.clone(),
                    mode,
                    goal_m,
                    sr: sel.iter().map(|c| c.metrics.sr).sum::<f64>() / n,
                    spl: sel.iter().map(|c| c.metrics.spl).sum::<f64>() / n,
                    dr: sel.iter().map(|c| c.metrics.dr).sum::<f64>() / n,
                });
            }
        }
    }

    Report {
        master_seed,
        runs_per_scenario,
        start: START,
        cells,
        goal_averages,
        skipped_worlds: skipped,
        cell_records,
    }
}

/// Run the benchmark grid: every (difficulty, goal) draws a world, every
/// (config, mode) runs `runs_per_scenario` paired episodes on it.
///
/// Panics on an invalid config or an empty grid; failed *runs* are recorded
/// outcomes, not errors.
pub fn run_matrix(
    difficulties: &[Difficulty],
    goals: &[f64],
    modes: &[PerceptionMode],
    configs: &[NamedConfig],
    runs_per_scenario: usize,
    master_seed: u64,
    jobs: Option<usize>,
) -> Report {
    assert!(
        !difficulties.is_empty()
            && !goals.is_empty()
            && !modes.is_empty()
            && !configs.is_empty()
            && runs_per_scenario > 0,
        "benchmark grid must be non-empty"
    );
    let robot_radius = configs[0].config.planner.robot_radius;
    let (scenarios, skipped) = draw_scenarios(difficulties, goals, master_seed, robot_radius);
    execute(
        scenarios,
        skipped,
        modes,
        configs,
        runs_per_scenario,
        master_seed,
        jobs,
    )
}

/// The full protocol: 3 difficulties x 3 goals x N runs for the given modes.
pub fn run_full_matrix(
    modes: &[PerceptionMode],
    config: NamedConfig,
    runs_per_scenario: usize,
    master_seed: u64,
    jobs: Option<usize>,
) -> Report {
    run_matrix(
        &Difficulty::ALL,
        &GOAL_DISTANCES,
        modes,
        &[config],
        runs_per_scenario,
        master_seed,
        jobs,
    )
}

/// The four mono depth-chain variants: {edge masking} x {EMA smoothing}.
pub fn ablation_configs(base: &PipelineConfig) -> Vec<NamedConfig> {
    [
        ("mask+smooth", true, true),
        ("mask-only", true, false),
        ("smooth-only", false, true),
        ("none", false, false),
    ]
    .into_iter()
    .map(|(label, mask, smooth)| {
        let mut cfg = base.clone();
        cfg.perception_mode = PerceptionMode::Mono;
        cfg.edge_masking = mask;
        cfg.smoothing = smooth;
        NamedConfig::new(label, cfg)
    })
    .collect()
}

/// 2x2 ablation of the mono depth chain at the 10 m goal, shared seeds
/// across the four variants.
pub fn run_ablation(
    difficulties: &[Difficulty],
    runs_per_scenario: usize,
    master_seed: u64,
    base: &PipelineConfig,
    jobs: Option<usize>,
) -> Report {
    run_matrix(
        difficulties,
        &[10.0],
        &[PerceptionMode::Mono],
        &ablation_configs(base),
        runs_per_scenario,
        master_seed,
        jobs,
    )
}

/// Hand-built corridor: the only route to the 20 m goal is a 3 m gap in a
/// wall at x = 10, flanked by tall grass. Solid walls span the full world so
/// there is no way around, and the grass is the only soft cover near the
/// route — a worst case for blurred mono depth, while whoever sees the gap
/// cleanly drives straight through.
pub fn corridor_world() -> World {
    let wall = |lo: f64, hi: f64| Primitive::Box {
        cx: 10.0,
        cy: (lo + hi) / 2.0,
        half_x: 0.3,
        half_y: (hi - lo) / 2.0,
        z0: -0.5,
        z1: 1.5,
    };
    let grass = |lo: f64, hi: f64| Primitive::Grass {
        polygon: vec![(9.0, lo), (11.0, lo), (11.0, hi), (9.0, hi)],
        height: 0.8,
        soft_edge: 0.3,
    };
    World {
        half_size: 40.0,
        terrain: Terrain::Flat,
        obstacles: vec![
            wall(1.5, 40.0),
            wall(-40.0, -1.5),
            grass(1.5, 5.0),
            grass(-5.0, -1.5),
        ],
    }
}

/// Run the corridor comparison: paired episodes per mode on the fixed world,
/// goal 20 m. Reported under the hard tier (it is a worst-case scenario).
pub fn run_corridor(
    modes: &[PerceptionMode],
    configs: &[NamedConfig],
    runs_per_scenario: usize,
    master_seed: u64,
    jobs: Option<usize>,
) -> Report {
    assert!(!modes.is_empty() && !configs.is_empty() && runs_per_scenario > 0);
    let world = corridor_world();
    let goal_m = 20.0;
    let reference = reference_trajectory(
        &world,
        START,
        (goal_m, 0.0),
        configs[0].config.planner.robot_radius,
    )
    .expect("corridor world has a ground-truth path");
    let scen = ScenarioSpec {
        difficulty: Difficulty::Hard,
        goal_m,
        world_seed: master_seed,
        seed_base: master_seed,
        world,
        reference,
    };
    execute(
        vec![scen],
        Vec::new(),
        modes,
        configs,
        runs_per_scenario,
        master_seed,
        jobs,
    )
}
