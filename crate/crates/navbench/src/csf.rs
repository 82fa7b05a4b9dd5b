//! Cloth-simulation ground filtering.
//!
//! The classic trick for separating ground from obstacles in unstructured
//! terrain: flip the point cloud upside down and drop a stiff cloth onto it
//! from above. Obstacles become pits in the inverted surface; a
//! sufficiently rigid cloth bridges them and settles on the (inverted)
//! ground, so the cloth is a DEM-like ground estimate. Points are then
//! classified by their vertical distance to the cloth.
//!
//! The simulation here is the standard discretised form: per iteration the
//! particles fall by a fixed gravity displacement, particles that reach the
//! inverted surface at their cell are clamped there and pinned, and simple
//! half-way spring relaxations between 4-neighbours run `rigidness` times.

use crate::geometry::PointCloud;
use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsfError {
    #[error("cannot filter an empty point cloud")]
    EmptyCloud,
    #[error("invalid cloth parameters: {0}")]
    InvalidParams(String),
}

/// Cloth rasterisation and simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClothParams {
    /// Lattice spacing (m).
    pub cell_size: f64,
    /// Number of spring-relaxation passes per iteration; 1 = soft cloth
    /// that follows terrain closely, 3 = stiff cloth that bridges pits.
    pub rigidness: u8,
    /// Per-iteration free-fall displacement (m). By convention a tenth of
    /// the cell size; kept explicit so it can be tuned independently.
    pub gravity_displacement: f64,
    /// Point-to-cloth distance separating ground from obstacle (m).
    pub class_threshold: f64,
    pub max_iterations: usize,
    /// Simulation stops once no particle moved more than this in one
    /// iteration (m).
    pub convergence_eps: f64,
}

impl Default for ClothParams {
    fn default() -> Self {
        Self {
            cell_size: 0.5,
            rigidness: 2,
            gravity_displacement: 0.05, // 0.1 * cell_size
            class_threshold: 0.15,
            max_iterations: 500,
            convergence_eps: 1e-3,
        }
    }
}

impl ClothParams {
    pub fn validate(&self) -> Result<(), CsfError> {
        if !(self.cell_size > 0.0) {
            return Err(CsfError::InvalidParams(format!("cell_size={}", self.cell_size)));
        }
        if !(1..=3).contains(&self.rigidness) {
            return Err(CsfError::InvalidParams(format!("rigidness={}", self.rigidness)));
        }
        if !(self.gravity_displacement > 0.0) {
            return Err(CsfError::InvalidParams(format!(
                "gravity_displacement={}",
                self.gravity_displacement
            )));
        }
        if !(self.class_threshold > 0.0) {
            return Err(CsfError::InvalidParams(format!(
                "class_threshold={}",
                self.class_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(CsfError::InvalidParams("max_iterations=0".into()));
        }
        Ok(())
    }
}

/// Settled cloth, reported in the original (un-inverted) frame: `height`
/// is the per-node ground estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClothSurface {
    /// World xy of node (0, 0).
    pub origin: (f64, f64),
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major (`j * nx + i`) ground-height estimates (m).
    pub heights: Vec<f64>,
    /// Nodes whose cell contained at least one point.
    pub constrained: Vec<bool>,
    /// Nodes that came to rest on the inverted surface.
    pub pinned: Vec<bool>,
    /// Iterations actually simulated.
    pub iterations: usize,
}

impl ClothSurface {
    #[inline]
    pub fn node_pos(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + i as f64 * self.cell_size, self.origin.1 + j as f64 * self.cell_size)
    }

    #[inline]
    pub fn height_at_node(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    /// Bilinearly interpolated ground height; queries outside the lattice
    /// clamp to the border (the lattice covers the cloud's bounding box
    /// with margin, so interior queries never clamp).
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let fx = ((x - self.origin.0) / self.cell_size).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((y - self.origin.1) / self.cell_size).clamp(0.0, (self.ny - 1) as f64);
        let i0 = (fx.floor() as usize).min(self.nx - 2);
        let j0 = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let h = |i: usize, j: usize| self.heights[j * self.nx + i];
        (1.0 - ty) * ((1.0 - tx) * h(i0, j0) + tx * h(i0 + 1, j0))
            + ty * ((1.0 - tx) * h(i0, j0 + 1) + tx * h(i0 + 1, j0 + 1))
    }
}

/// A point labelled as protruding from the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstaclePoint {
    pub point: Point3<f64>,
    /// Height above the local cloth surface (m), never negative.
    pub height: f64,
}

/// Output of [`classify`]: ground points and obstacle points with their
/// height above the ground estimate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundSegmentation {
    pub ground: PointCloud,
    pub obstacles: Vec<ObstaclePoint>,
}

/// Simulates the cloth over the inverted cloud and returns the settled
/// ground-height surface.
pub fn simulate_cloth(cloud: &PointCloud, params: &ClothParams) -> Result<ClothSurface, CsfError> {
    params.validate()?;
    if cloud.is_empty() {
        return Err(CsfError::EmptyCloud);
    }

    let cell = params.cell_size;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_inv = f64::NEG_INFINITY;
    for p in &cloud.points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
        max_inv = max_inv.max(-p.z);
    }

    // Lattice with a one-cell margin all around; node (i, j) sits at
    // origin + (i, j) * cell and owns the half-open square of side `cell`
    // centred on it.
    let origin = (min_x - cell, min_y - cell);
    let nx = ((max_x - min_x) / cell).ceil() as usize + 3;
    let ny = ((max_y - min_y) / cell).ceil() as usize + 3;
    let n = nx * ny;

    // Per-node collision height in the inverted frame: the lowest inverted
    // point in the node's cell, i.e. the highest original point.
    let mut floor = vec![f64::INFINITY; n];
    let mut constrained = vec![false; n];
    for p in &cloud.points {
        let i = ((p.x - origin.0) / cell).round() as isize;
        let j = ((p.y - origin.1) / cell).round() as isize;
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            continue; // Cannot happen given the margin, but stay safe.
        }
        let idx = j as usize * nx + i as usize;
        constrained[idx] = true;
        floor[idx] = floor[idx].min(-p.z);
    }

    // Cloth starts one cell above the inverted surface.
    let start = max_inv + cell;
    let mut z = vec![start; n];
    let mut pinned = vec![false; n];

    let clamp_pin = |z: &mut [f64], pinned: &mut [bool]| {
        for idx in 0..n {
            if constrained[idx] && z[idx] < floor[idx] {
                z[idx] = floor[idx];
                pinned[idx] = true;
            }
        }
    };

    let mut prev = vec![0.0; n];
    let mut iterations = 0;
    for _ in 0..params.max_iterations {
        iterations += 1;
        prev.copy_from_slice(&z);

        for idx in 0..n {
            if !pinned[idx] {
                z[idx] -= params.gravity_displacement;
            }
        }
        clamp_pin(&mut z, &mut pinned);

        for _ in 0..params.rigidness {
            // Horizontal then vertical neighbour springs, fixed order.
            for j in 0..ny {
                for i in 0..nx - 1 {
                    relax(&mut z, &pinned, j * nx + i, j * nx + i + 1);
                }
            }
            for j in 0..ny - 1 {
                for i in 0..nx {
                    relax(&mut z, &pinned, j * nx + i, (j + 1) * nx + i);
                }
            }
            clamp_pin(&mut z, &mut pinned);
        }

        let moved = z
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if moved < params.convergence_eps {
            break;
        }
    }

    Ok(ClothSurface {
        origin,
        cell_size: cell,
        nx,
        ny,
        heights: z.iter().map(|&v| -v).collect(),
        constrained,
        pinned,
        iterations,
    })
}

/// Moves a 4-neighbour pair half the height difference toward each other;
/// pinned particles do not move.
#[inline]
fn relax(z: &mut [f64], pinned: &[bool], a: usize, b: usize) {
    let d = z[b] - z[a];
    match (pinned[a], pinned[b]) {
        (false, false) => {
            let m = z[a] + 0.5 * d;
            z[a] = m;
            z[b] = m;
        }
        (true, false) => z[b] -= 0.5 * d,
        (false, true) => z[a] += 0.5 * d,
        (true, true) => {}
    }
}

/// Splits a cloud into ground and obstacle points by vertical distance to
/// the cloth: within `class_threshold` is ground, above is an obstacle
/// whose height is the excess over the cloth (clamped at zero).
pub fn classify(
    cloud: &PointCloud,
    cloth: &ClothSurface,
    class_threshold: f64,
) -> GroundSegmentation {
    let mut out = GroundSegmentation::default();
    for p in &cloud.points {
        let ground_z = cloth.interpolate(p.x, p.y);
        let dz = p.z - ground_z;
        if dz.abs() <= class_threshold {
            out.ground.points.push(*p);
        } else {
            out.obstacles.push(ObstaclePoint { point: *p, height: dz.max(0.0) });
        }
    }
    out
}
