//! Report assembly: JSON document, plain-text tables, trajectory CSV.
//!
//! Everything here is deterministic: struct field order fixes the JSON
//! layout, cells are stored in grid order, and no timestamps or host info
//! leak in, so identical inputs produce identical bytes.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::ScenarioMetrics;
use crate::pipeline::{Outcome, PerceptionMode, PipelineConfig, RunRecord};
use crate::sim::Difficulty;

/// One run, without the full trajectory (that lives in `trajectories.csv`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_index: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub path_length: f64,
    pub duration_s: f64,
}

impl RunSummary {
    pub fn from_record(run_index: usize, record: &RunRecord) -> Self {
        Self {
            run_index,
            seed: record.seed,
            outcome: record.outcome,
            path_length: record.path_length,
            duration_s: record.trajectory.last().map_or(0.0, |(t, _)| *t),
        }
    }
}

/// Results for one (config, mode, difficulty, goal) grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub config_label: String,
    pub mode: PerceptionMode,
    pub difficulty: Difficulty,
    pub goal_m: f64,
    pub world_seed: u64,
    pub reference_length: f64,
    /// Exact configuration the episodes in this cell ran with.
    pub config: PipelineConfig,
    pub metrics: ScenarioMetrics,
    pub runs: Vec<RunSummary>,
}

/// Per-goal averages across difficulties, one row per (config, mode, goal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalAverage {
    pub config_label: String,
    pub mode: PerceptionMode,
    pub goal_m: f64,
    pub sr: f64,
    pub spl: f64,
    pub dr: f64,
}

/// Scenario world draws that had no ground-truth-feasible path and were
/// re-drawn with the next seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedWorld {
    pub difficulty: Difficulty,
    pub goal_m: f64,
    pub world_seed: u64,
    pub reason: String,
}

/// Ablation view: one row per config variant of the mono depth chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub label: String,
    pub edge_masking: bool,
    pub smoothing: bool,
    /// (difficulty, SR, SPL) per difficulty in grid order.
    pub per_difficulty: Vec<(Difficulty, f64, f64)>,
    pub average_spl: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub master_seed: u64,
    pub runs_per_scenario: usize,
    pub start: (f64, f64),
    pub cells: Vec<CellReport>,
    pub goal_averages: Vec<GoalAverage>,
    pub skipped_worlds: Vec<SkippedWorld>,
    /// Full per-run trajectories, written to the CSV instead of the JSON.
    #[serde(skip)]
    pub cell_records: Vec<Vec<RunRecord>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Distinct config labels in first-appearance order.
    fn config_labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = Vec::new();
        for cell in &self.cells {
            if !labels.contains(&cell.config_label.as_str()) {
                labels.push(&cell.config_label);
            }
        }
        labels
    }

    fn modes(&self) -> Vec<PerceptionMode> {
        let mut modes = Vec::new();
        for cell in &self.cells {
            if !modes.contains(&cell.mode) {
                modes.push(cell.mode);
            }
        }
        modes
    }

    fn goals(&self) -> Vec<f64> {
        let mut goals = Vec::new();
        for cell in &self.cells {
            if !goals.iter().any(|&g: &f64| g == cell.goal_m) {
                goals.push(cell.goal_m);
            }
        }
        goals
    }

    fn difficulties(&self) -> Vec<Difficulty> {
        let mut out = Vec::new();
        for cell in &self.cells {
            if !out.contains(&cell.difficulty) {
                out.push(cell.difficulty);
            }
        }
        out
    }

    fn cell(
        &self,
        label: &str,
        mode: PerceptionMode,
        difficulty: Difficulty,
        goal_m: f64,
    ) -> Option<&CellReport> {
        self.cells.iter().find(|c| {
            c.config_label == label && c.mode == mode && c.difficulty == difficulty && c.goal_m == goal_m
        })
    }

    /// Render SR/SPL/DR tables, one block per (config, mode), goals as
    /// column groups and difficulties as rows, with a per-goal average row.
    pub fn render_tables(&self) -> String {
        let goals = self.goals();
        let difficulties = self.difficulties();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "navbench results — master seed {}, {} runs per scenario",
            self.master_seed, self.runs_per_scenario
        );
        for label in self.config_labels() {
            for mode in self.modes() {
                if !self
                    .cells
                    .iter()
                    .any(|c| c.config_label == label && c.mode == mode)
                {
                    continue;
                }
                let _ = writeln!(out, "\nconfig {label:?} — mode {}", mode.name());
                let mut header = format!("{:<10} |", "difficulty");
                let mut sub = format!("{:<10} |", "");
                for g in &goals {
                    let _ = write!(header, " {:^20} |", format!("{g:.0} m"));
                    let _ = write!(sub, " {:>6} {:>6} {:>6} |", "SR", "SPL", "DR");
                }
                let _ = writeln!(out, "{header}");
                let _ = writeln!(out, "{sub}");
                for &d in &difficulties {
                    let mut row = format!("{:<10} |", d.name());
                    for &g in &goals {
                        match self.cell(label, mode, d, g) {
                            Some(c) => {
                                let _ = write!(
                                    row,
                                    " {:>6.2} {:>6.2} {:>6.2} |",
                                    c.metrics.sr, c.metrics.spl, c.metrics.dr
                                );
                            }
                            None => {
                                let _ = write!(row, " {:>6} {:>6} {:>6} |", "-", "-", "-");
                            }
                        }
                    }
                    let _ = writeln!(out, "{row}");
                }
                let mut avg_row = format!("{:<10} |", "average");
                for &g in &goals {
                    match self.goal_averages.iter().find(|a| {
                        a.config_label == label && a.mode == mode && a.goal_m == g
                    }) {
                        Some(a) => {
                            let _ = write!(avg_row, " {:>6.2} {:>6.2} {:>6.2} |", a.sr, a.spl, a.dr);
                        }
                        None => {
                            let _ = write!(avg_row, " {:>6} {:>6} {:>6} |", "-", "-", "-");
                        }
                    }
                }
                let _ = writeln!(out, "{avg_row}");
            }
        }
        let over_unity: usize = self.cells.iter().map(|c| c.metrics.spl_over_unity).sum();
        if over_unity > 0 {
            let _ = writeln!(
                out,
                "\nnote: {over_unity} successful run(s) beat the reference length (SPL ratio > 1, unclamped)"
            );
        }
        if !self.skipped_worlds.is_empty() {
            let _ = writeln!(out, "\nskipped world draws (no ground-truth path):");
            for s in &self.skipped_worlds {
                let _ = writeln!(
                    out,
                    "  {} {:.0} m seed {}: {}",
                    s.difficulty.name(),
                    s.goal_m,
                    s.world_seed,
                    s.reason
                );
            }
        }
        out
    }

    /// Rows for the mono-chain ablation table, grouped by config label.
    pub fn ablation_rows(&self) -> Vec<AblationRow> {
        let difficulties = self.difficulties();
        self.config_labels()
            .into_iter()
            .map(|label| {
                let mut per_difficulty = Vec::new();
                let mut spl_sum = 0.0;
                let mut count = 0usize;
                let mut edge_masking = false;
                let mut smoothing = false;
                for &d in &difficulties {
                    let cells: Vec<&CellReport> = self
                        .cells
                        .iter()
                        .filter(|c| c.config_label == label && c.difficulty == d)
                        .collect();
                    if cells.is_empty() {
                        continue;
                    }
                    edge_masking = cells[0].config.edge_masking;
                    smoothing = cells[0].config.smoothing;
                    let sr = cells.iter().map(|c| c.metrics.sr).sum::<f64>() / cells.len() as f64;
                    let spl = cells.iter().map(|c| c.metrics.spl).sum::<f64>() / cells.len() as f64;
                    per_difficulty.push((d, sr, spl));
                    spl_sum += spl;
                    count += 1;
                }
                AblationRow {
                    label: label.to_string(),
                    edge_masking,
                    smoothing,
                    average_spl: if count > 0 { spl_sum / count as f64 } else { 0.0 },
                    per_difficulty,
                }
            })
            .collect()
    }

    /// Render the ablation table: config rows, SPL per difficulty, average.
    pub fn render_ablation_table(&self) -> String {
        let rows = self.ablation_rows();
        let difficulties = self.difficulties();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "mono depth-chain ablation — average SPL, master seed {}, {} runs per scenario",
            self.master_seed, self.runs_per_scenario
        );
        let mut header = format!("{:<14} | {:^4} | {:^6} |", "config", "mask", "smooth");
        for d in &difficulties {
            let _ = write!(header, " {:>6} |", d.name());
        }
        let _ = write!(header, " {:>7}", "average");
        let _ = writeln!(out, "{header}");
        for row in &rows {
            let mut line = format!(
                "{:<14} | {:^4} | {:^6} |",
                row.label,
                if row.edge_masking { "on" } else { "off" },
                if row.smoothing { "on" } else { "off" }
            );
            for &(_, _, spl) in &row.per_difficulty {
                let _ = write!(line, " {spl:>6.2} |");
            }
            let _ = write!(line, " {:>7.2}", row.average_spl);
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// Flat CSV of every recorded trajectory sample across all cells.
    pub fn trajectories_csv(&self) -> String {
        let mut out = String::from("config,mode,difficulty,goal_m,run,t,x,y,theta\n");
        for (cell, records) in self.cells.iter().zip(&self.cell_records) {
            for (run_index, record) in records.iter().enumerate() {
                for (t, s) in &record.trajectory {
                    let _ = writeln!(
                        out,
                        "{},{},{},{:.1},{},{:.3},{:.4},{:.4},{:.4}",
                        cell.config_label,
                        cell.mode.name(),
                        cell.difficulty.name(),
                        cell.goal_m,
                        run_index,
                        t,
                        s.x,
                        s.y,
                        s.theta
                    );
                }
            }
        }
        out
    }

    /// Write `report.json`, `tables.txt`, and `trajectories.csv` into `dir`.
    pub fn write_all(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        std::fs::write(dir.join("tables.txt"), self.render_tables())?;
        std::fs::write(dir.join("trajectories.csv"), self.trajectories_csv())?;
        Ok(())
    }
}
