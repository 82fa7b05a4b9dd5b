//! Command-line front end: single episodes, the benchmark grid, the
//! masking/smoothing ablation, and world export.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use navbench::bench::{
    self, cell_config, corridor_world, run_ablation, run_matrix, run_seed, NamedConfig, START,
};
use navbench::config::{load_config, parse_config_arg, ConfigArg};
use navbench::geometry::RobotState;
use navbench::pipeline::{default_time_budget, run_episode, PerceptionMode, RunRecord};
use navbench::sim::{generate_world, Difficulty, GOAL_DISTANCES};

#[derive(Parser)]
#[command(
    name = "navbench",
    version,
    about = "Off-road navigation benchmark: LiDAR vs rescaled monocular depth"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single episode and write its record and trajectory.
    Run(RunArgs),
    /// Run the benchmark grid and render the results tables.
    Bench(BenchArgs),
    /// Run the 2x2 edge-masking / smoothing ablation (mono only).
    Ablate(AblateArgs),
    /// Print a generated scenario world as RON.
    World(WorldArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Lidar,
    Mono,
}

impl From<ModeArg> for PerceptionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lidar => PerceptionMode::Lidar,
            ModeArg::Mono => PerceptionMode::Mono,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum DifficultyArg {
    Easy,
    Medium,
    Hard,
}

impl From<DifficultyArg> for Difficulty {
    fn from(d: DifficultyArg) -> Self {
        match d {
            DifficultyArg::Easy => Difficulty::Easy,
            DifficultyArg::Medium => Difficulty::Medium,
            DifficultyArg::Hard => Difficulty::Hard,
        }
    }
}

fn parse_goal(s: &str) -> Result<f64, String> {
    match s {
        "10" => Ok(10.0),
        "20" => Ok(20.0),
        "30" => Ok(30.0),
        _ => Err(format!("goal must be one of 10, 20, 30 (got {s})")),
    }
}

/// Comma-separated mode list; a newtype so clap treats it as one value.
#[derive(Clone)]
struct ModeList(Vec<PerceptionMode>);

fn parse_modes(s: &str) -> Result<ModeList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.trim() {
            "lidar" => out.push(PerceptionMode::Lidar),
            "mono" => out.push(PerceptionMode::Mono),
            other => return Err(format!("unknown mode {other:?} (use lidar, mono)")),
        }
    }
    if out.is_empty() {
        return Err("at least one mode required".into());
    }
    Ok(ModeList(out))
}

#[derive(Args)]
struct RunArgs {
    /// Scenario tier.
    #[arg(long, value_enum, default_value_t = DifficultyArg::Easy)]
    difficulty: DifficultyArg,
    /// Goal distance along +x in metres.
    #[arg(long, value_parser = parse_goal, default_value = "10")]
    goal: f64,
    /// Sensor feeding the mapping stack.
    #[arg(long, value_enum, default_value_t = ModeArg::Lidar)]
    mode: ModeArg,
    /// Planner preset (real-params, sim-tuned) or a TOML config file.
    #[arg(long)]
    config: Option<String>,
    /// Master seed; also draws the scenario world.
    #[arg(long, env = "NAVBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory for record.json and trajectory.csv.
    #[arg(long, default_value = "navbench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated sensor modes to compare.
    #[arg(long, value_parser = parse_modes, default_value = "lidar,mono")]
    modes: ModeList,
    /// Planner preset (real-params, sim-tuned) or a TOML config file.
    #[arg(long)]
    config: Option<String>,
    /// Runs per scenario.
    #[arg(long, default_value_t = bench::DEFAULT_RUNS_PER_SCENARIO)]
    n: usize,
    /// Master seed for world draws and run streams.
    #[arg(long, env = "NAVBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for report.json, tables.txt, trajectories.csv.
    #[arg(long, default_value = "navbench-out")]
    out: PathBuf,
    /// Smoke grid: 3 runs per scenario, easy and medium tiers only.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct AblateArgs {
    /// Restrict to one tier (default: all three).
    #[arg(long, value_enum)]
    difficulty: Option<DifficultyArg>,
    /// Base config the four variants are derived from.
    #[arg(long)]
    config: Option<String>,
    /// Runs per scenario.
    #[arg(long, default_value_t = bench::DEFAULT_RUNS_PER_SCENARIO)]
    n: usize,
    /// Master seed for world draws and run streams.
    #[arg(long, env = "NAVBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for the report and the ablation table.
    #[arg(long, default_value = "navbench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct WorldArgs {
    /// Scenario tier.
    #[arg(long, value_enum, default_value_t = DifficultyArg::Easy)]
    difficulty: DifficultyArg,
    /// World seed.
    #[arg(long, env = "NAVBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Export the fixed grass-corridor world instead of a generated one.
    #[arg(long)]
    corridor: bool,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Ablate(a) => cmd_ablate(a),
        Cmd::World(a) => cmd_world(a),
    }
    .map_or_else(
        |e| {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        },
        |()| ExitCode::SUCCESS,
    )
}

fn config_arg(s: &Option<String>) -> Option<ConfigArg> {
    s.as_deref().map(parse_config_arg)
}

/// Label reports by preset name, file stem, or "default".
fn config_label(arg: &Option<ConfigArg>) -> String {
    match arg {
        None => "default".into(),
        Some(ConfigArg::Preset(p)) => match p {
            navbench::planning::PlannerMode::RealParams => "real-params".into(),
            navbench::planning::PlannerMode::SimTuned => "sim-tuned".into(),
        },
        Some(ConfigArg::File(path)) => path
            .file_stem()
            .map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned()),
    }
}

/// Everything needed to reproduce and inspect a single episode.
#[derive(Serialize)]
struct SingleRunReport {
    difficulty: Difficulty,
    goal_m: f64,
    mode: PerceptionMode,
    master_seed: u64,
    world_seed: u64,
    run_seed: u64,
    goal_distance: f64,
    config: navbench::pipeline::PipelineConfig,
    #[serde(flatten)]
    record: RunRecord,
}

fn cmd_run(a: RunArgs) -> Result<(), String> {
    let arg = config_arg(&a.config);
    let mode = PerceptionMode::from(a.mode);
    let difficulty = Difficulty::from(a.difficulty);
    let cfg = load_config(arg.as_ref(), Some(mode)).map_err(|e| e.to_string())?;
    let cfg = cell_config(&cfg, mode, difficulty);

    let scen = bench::draw_scenario(difficulty, a.goal, a.seed, cfg.planner.robot_radius);
    let seed = run_seed(scen.world_seed, 0);
    let goal = (a.goal, 0.0);
    let budget = default_time_budget(START, goal, cfg.planner.v_max);
    let record = run_episode(
        &scen.world,
        RobotState::at(START.0, START.1, 0.0),
        goal,
        &cfg,
        seed,
        budget,
    );

    let (gx, gy) = goal;
    let goal_distance = record
        .trajectory
        .last()
        .map_or(f64::INFINITY, |(_, s)| (s.x - gx).hypot(s.y - gy));
    println!(
        "outcome {:?}  path length {:.2} m  goal distance {:.2} m",
        record.outcome, record.path_length, goal_distance
    );

    std::fs::create_dir_all(&a.out).map_err(|e| format!("create {}: {e}", a.out.display()))?;
    let report = SingleRunReport {
        difficulty,
        goal_m: a.goal,
        mode,
        master_seed: a.seed,
        world_seed: scen.world_seed,
        run_seed: seed,
        goal_distance,
        config: cfg,
        record,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    let record_path = a.out.join("record.json");
    std::fs::write(&record_path, json + "\n").map_err(|e| e.to_string())?;

    let mut csv = String::from("t,x,y,theta\n");
    for (t, s) in &report.record.trajectory {
        csv.push_str(&format!("{t:.3},{:.4},{:.4},{:.4}\n", s.x, s.y, s.theta));
    }
    let traj_path = a.out.join("trajectory.csv");
    std::fs::write(&traj_path, csv).map_err(|e| e.to_string())?;
    println!("wrote {} and {}", record_path.display(), traj_path.display());
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), String> {
    let arg = config_arg(&a.config);
    let cfg = load_config(arg.as_ref(), None).map_err(|e| e.to_string())?;
    let named = NamedConfig::new(config_label(&arg), cfg);

    let (difficulties, n): (&[Difficulty], usize) = if a.quick {
        (&[Difficulty::Easy, Difficulty::Medium], 3)
    } else {
        (&Difficulty::ALL, a.n)
    };
    let report = run_matrix(
        difficulties,
        &GOAL_DISTANCES,
        &a.modes.0,
        &[named],
        n,
        a.seed,
        a.jobs,
    );
    print!("{}", report.render_tables());
    report
        .write_all(&a.out)
        .map_err(|e| format!("write {}: {e}", a.out.display()))?;
    println!("report written to {}", a.out.display());
    Ok(())
}

fn cmd_ablate(a: AblateArgs) -> Result<(), String> {
    let arg = config_arg(&a.config);
    let base = load_config(arg.as_ref(), Some(PerceptionMode::Mono)).map_err(|e| e.to_string())?;
    let difficulties: Vec<Difficulty> = match a.difficulty {
        Some(d) => vec![d.into()],
        None => Difficulty::ALL.to_vec(),
    };
    let report = run_ablation(&difficulties, a.n, a.seed, &base, a.jobs);
    let table = report.render_ablation_table();
    print!("{table}");
    report
        .write_all(&a.out)
        .map_err(|e| format!("write {}: {e}", a.out.display()))?;
    std::fs::write(a.out.join("ablation.txt"), table).map_err(|e| e.to_string())?;
    println!("report written to {}", a.out.display());
    Ok(())
}

fn cmd_world(a: WorldArgs) -> Result<(), String> {
    let world = if a.corridor {
        corridor_world()
    } else {
        generate_world(a.difficulty.into(), a.seed)
    };
    let text = ron::ser::to_string_pretty(&world, ron::ser::PrettyConfig::default())
        .map_err(|e| e.to_string())?;
    // Tolerate a closed pipe (`navbench world | head`).
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(|e| e.to_string()),
    }
}
