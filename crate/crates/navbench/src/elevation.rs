//! Robot-centric rolling elevation grid.
//!
//! A fixed-footprint 2.5D grid that follows the robot: obstacle cells store
//! the height of whatever sticks out of the ground plus the tick it was
//! last seen, ground cells record driveable evidence, everything else is
//! unknown. Recentring shifts content by whole cells so world anchoring is
//! exact — no resampling, no drift.

use crate::csf::GroundSegmentation;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ElevationError {
    #[error("grid dimensions must be odd so the robot sits on a centre cell, got {0}x{1}")]
    EvenDimensions(usize, usize),
    #[error("invalid elevation parameters: {0}")]
    InvalidParams(String),
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    /// Never observed.
    Unknown,
    /// Seen with enough ground evidence to drive over.
    Ground,
    /// Something sticks out: height above local ground (m) and the tick of
    /// the most recent observation.
    Obstacle { height: f64, last_seen: u64 },
}

/// Sizing and evidence thresholds for the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElevationParams {
    /// Cells per side, odd.
    pub width: usize,
    pub height: usize,
    /// Cell edge length (m).
    pub resolution: f64,
    /// Ground points per frame needed to clear/claim a cell as ground.
    pub min_ground_points: usize,
    /// Obstacle height above which a cell blocks the costmap (m).
    pub height_threshold: f64,
}

impl Default for ElevationParams {
    fn default() -> Self {
        Self {
            width: 201,
            height: 201,
            resolution: 0.1,
            min_ground_points: 3,
            height_threshold: 0.30,
        }
    }
}

impl ElevationParams {
    pub fn validate(&self) -> Result<(), ElevationError> {
        if self.width % 2 == 0 || self.height % 2 == 0 {
            return Err(ElevationError::EvenDimensions(self.width, self.height));
        }
        if !(self.resolution > 0.0) {
            return Err(ElevationError::InvalidParams(format!(
                "resolution={}",
                self.resolution
            )));
        }
        if self.min_ground_points == 0 {
            return Err(ElevationError::InvalidParams("min_ground_points=0".into()));
        }
        Ok(())
    }
}

/// The rolling grid itself. The centre is always snapped to a whole-cell
/// position so recentring is an integer shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationGrid {
    width: usize,
    height: usize,
    resolution: f64,
    /// World xy of the centre cell's centre.
    center: (f64, f64),
    cells: Vec<Cell>,
}

impl ElevationGrid {
    pub fn new(params: &ElevationParams, center: (f64, f64)) -> Result<Self, ElevationError> {
        params.validate()?;
        let snapped = snap(center, params.resolution);
        Ok(Self {
            width: params.width,
            height: params.height,
            resolution: params.resolution,
            center: snapped,
            cells: vec![Cell::Unknown; params.width * params.height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    /// Grid indices for a world position, or `None` outside the footprint.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = ((x - self.center.0) / self.resolution).round() as isize
            + (self.width as isize - 1) / 2;
        let j = ((y - self.center.1) / self.resolution).round() as isize
            + (self.height as isize - 1) / 2;
        (i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height)
            .then(|| (i as usize, j as usize))
    }

    /// World position of a cell's centre.
    pub fn cell_to_world(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.center.0 + (i as isize - (self.width as isize - 1) / 2) as f64 * self.resolution,
            self.center.1 + (j as isize - (self.height as isize - 1) / 2) as f64 * self.resolution,
        )
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.width + i]
    }

    /// Folds one classified frame into the grid.
    ///
    /// Any obstacle point claims its cell with the frame's maximum height
    /// there and a fresh `last_seen`. A cell with no obstacle points this
    /// frame but at least `min_ground_points` ground points becomes ground
    /// — that is how stale phantom obstacles get cleared. Untouched cells
    /// keep whatever they held.
    pub fn integrate(&mut self, seg: &GroundSegmentation, tick: u64, min_ground_points: usize) {
        let n = self.width * self.height;
        let mut max_h: Vec<f64> = vec![f64::NEG_INFINITY; n];
        let mut ground_count: Vec<u32> = vec![0; n];

        for o in &seg.obstacles {
            if let Some((i, j)) = self.world_to_cell(o.point.x, o.point.y) {
                let idx = j * self.width + i;
                max_h[idx] = max_h[idx].max(o.height);
            }
        }
        for p in &seg.ground.points {
            if let Some((i, j)) = self.world_to_cell(p.x, p.y) {
                ground_count[j * self.width + i] += 1;
            }
        }

        for idx in 0..n {
            if max_h[idx] > f64::NEG_INFINITY {
                self.cells[idx] = Cell::Obstacle { height: max_h[idx], last_seen: tick };
            } else if ground_count[idx] as usize >= min_ground_points {
                self.cells[idx] = Cell::Ground;
            }
        }
    }

    /// Moves the grid centre to (the snapped) `new_center`, shifting the
    /// content by whole cells. Cells scrolled in are unknown; cells
    /// scrolled out are discarded.
    pub fn recenter(&mut self, new_center: (f64, f64)) {
        let snapped = snap(new_center, self.resolution);
        let dx = ((snapped.0 - self.center.0) / self.resolution).round() as isize;
        let dy = ((snapped.1 - self.center.1) / self.resolution).round() as isize;
        if dx == 0 && dy == 0 {
            self.center = snapped;
            return;
        }
        let mut fresh = vec![Cell::Unknown; self.width * self.height];
        for j in 0..self.height as isize {
            let src_j = j + dy;
            if src_j < 0 || src_j >= self.height as isize {
                continue;
            }
            for i in 0..self.width as isize {
                let src_i = i + dx;
                if src_i < 0 || src_i >= self.width as isize {
                    continue;
                }
                fresh[j as usize * self.width + i as usize] =
                    self.cells[src_j as usize * self.width + src_i as usize];
            }
        }
        self.cells = fresh;
        self.center = snapped;
    }

    /// Plain-text dump: a header line, then one row per line with `.` for
    /// unknown, `_` for ground and the obstacle height in centimetres
    /// (clamped to 999) for obstacles. Row 0 is the minimum-y edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "elevation {}x{} res {} center {} {}",
            self.width, self.height, self.resolution, self.center.0, self.center.1
        )
        .unwrap();
        for j in 0..self.height {
            let mut row = Vec::with_capacity(self.width);
            for i in 0..self.width {
                row.push(match self.cell(i, j) {
                    Cell::Unknown => ".".to_string(),
                    Cell::Ground => "_".to_string(),
                    Cell::Obstacle { height, .. } => {
                        format!("{}", ((height * 100.0).round() as i64).clamp(0, 999))
                    }
                });
            }
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}

fn snap(p: (f64, f64), resolution: f64) -> (f64, f64) {
    (
        (p.0 / resolution).round() * resolution,
        (p.1 / resolution).round() * resolution,
    )
}
