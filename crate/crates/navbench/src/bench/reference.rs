//! Ground-truth reference trajectories.
//!
//! The benchmark scores robot runs against a near-optimal path computed with
//! perfect knowledge: rasterize the true obstacle footprints (grass is
//! traversable, so it does not block), inflate by the robot radius, run A*,
//! then shorten the staircase with greedy line-of-sight smoothing. The
//! result stands in for an expert driver doing the course "as efficiently as
//! possible".

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planning::{astar, Costmap};
use crate::sim::{Primitive, World};

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    /// No ground-truth-feasible path exists; the scenario world is invalid.
    #[error("no ground-truth reference path from start to goal")]
    NoReferencePath,
    #[error("metrics need at least one run record")]
    EmptyRecords,
}

/// Densified reference polyline with cumulative arc lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub points: Vec<(f64, f64)>,
    /// Arc length from the start to each point; nondecreasing, last = total.
    pub cumulative: Vec<f64>,
    pub total: f64,
}

/// Grid resolution of the ground-truth costmap (m).
const GT_RESOLUTION: f64 = 0.1;
/// Spacing of the densified reference polyline (m).
const DENSIFY_STEP: f64 = 0.25;

/// Rasterize true solid footprints over the world extent and inflate.
/// Grass is left free: the robot can drive through it, and the expert knows.
pub fn ground_truth_costmap(world: &World, robot_radius: f64) -> Costmap {
    let half = world.half_size;
    let n = (2.0 * half / GT_RESOLUTION).round() as usize + 1;
    let origin = (-half, -half);
    let mut cmap = Costmap::free(n, n, GT_RESOLUTION, origin);

    for prim in &world.obstacles {
        if prim.is_grass() {
            continue;
        }
        // Conservative world-space bbox per primitive, then exact footprint
        // tests inside it.
        let (cx, cy, extent) = match *prim {
            Primitive::Box {
                cx,
                cy,
                half_x,
                half_y,
                ..
            } => (cx, cy, half_x.max(half_y) * std::f64::consts::SQRT_2),
            Primitive::Cylinder { cx, cy, radius, .. } => (cx, cy, radius),
            Primitive::Sphere { cx, cy, radius, .. } => (cx, cy, radius),
            Primitive::Grass { .. } => unreachable!(),
        };
        let pad = extent + GT_RESOLUTION;
        let lo_i = (((cx - pad) - origin.0) / GT_RESOLUTION).floor().max(0.0) as usize;
        let hi_i = ((((cx + pad) - origin.0) / GT_RESOLUTION).ceil() as usize).min(n - 1);
        let lo_j = (((cy - pad) - origin.1) / GT_RESOLUTION).floor().max(0.0) as usize;
        let hi_j = ((((cy + pad) - origin.1) / GT_RESOLUTION).ceil() as usize).min(n - 1);
        for j in lo_j..=hi_j {
            for i in lo_i..=hi_i {
                let (x, y) = cmap.cell_to_world(i, j);
                if prim.footprint_distance(x, y) <= 0.0 {
                    cmap.set_blocked(i, j, true);
                }
            }
        }
    }

    // Inflate: every free cell within the robot radius of a blocked one
    // becomes blocked, via the exact distance transform.
    let dist = cmap.distance_field();
    let mut inflated = Costmap::free(n, n, GT_RESOLUTION, origin);
    for j in 0..n {
        for i in 0..n {
            if dist[j * n + i] <= robot_radius + 1e-9 {
                inflated.set_blocked(i, j, true);
            }
        }
    }
    inflated
}

fn line_of_sight(cmap: &Costmap, a: (f64, f64), b: (f64, f64)) -> bool {
    let len = (b.0 - a.0).hypot(b.1 - a.1);
    let steps = (len / (0.5 * GT_RESOLUTION)).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        if cmap.is_blocked_world(x, y) {
            return false;
        }
    }
    true
}

/// Greedy shortcutting: from each anchor, jump to the farthest waypoint
/// still in line of sight. Never lengthens the path.
fn smooth(cmap: &Costmap, pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let mut out = vec![pts[0]];
    let mut i = 0;
    while i + 1 < pts.len() {
        let mut j = pts.len() - 1;
        while j > i + 1 && !line_of_sight(cmap, pts[i], pts[j]) {
            j -= 1;
        }
        out.push(pts[j]);
        i = j;
    }
    out
}

fn densify(pts: &[(f64, f64)]) -> ReferenceTrajectory {
    let mut points = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let segs = (len / DENSIFY_STEP).ceil().max(1.0) as usize;
        for k in 0..segs {
            let t = k as f64 / segs as f64;
            points.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    points.push(*pts.last().unwrap());
    let mut cumulative = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in points.windows(2) {
        acc += (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
        cumulative.push(acc);
    }
    ReferenceTrajectory {
        points,
        cumulative,
        total: acc,
    }
}

/// Compute the reference trajectory, or report the scenario infeasible.
pub fn reference_trajectory(
    world: &World,
    start: (f64, f64),
    goal: (f64, f64),
    robot_radius: f64,
) -> Result<ReferenceTrajectory, BenchError> {
    let cmap = ground_truth_costmap(world, robot_radius);
    let path = astar(&cmap, start, goal).map_err(|_| BenchError::NoReferencePath)?;
    let smoothed = smooth(&cmap, &path.waypoints);
    Ok(densify(&smoothed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_world, Difficulty, Terrain};

    fn flat_world(obstacles: Vec<Primitive>) -> World {
        World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles,
        }
    }

    #[test]
    fn empty_world_reference_is_the_straight_segment() {
        let w = flat_world(vec![]);
        let r = reference_trajectory(&w, (0.0, 0.0), (10.0, 0.0), 0.6).unwrap();
        assert!((r.total - 10.0).abs() < 1e-9, "total {}", r.total);
        for &(_, y) in &r.points {
            assert!(y.abs() < 1e-9);
        }
        assert_eq!(r.cumulative.len(), r.points.len());
        assert!((r.cumulative.last().unwrap() - r.total).abs() < 1e-12);
        for w in r.cumulative.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // Densification spacing holds.
        for w in r.points.windows(2) {
            let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            assert!(d <= DENSIFY_STEP + 1e-9);
        }
    }

    #[test]
    fn wall_with_gap_routes_through_and_lower_bounds_euclidean() {
        let w = flat_world(vec![
            Primitive::Box {
                cx: 5.0,
                cy: 5.0,
                half_x: 0.3,
                half_y: 4.0,
                z0: 0.0,
                z1: 1.5,
            },
            Primitive::Box {
                cx: 5.0,
                cy: -5.0,
                half_x: 0.3,
                half_y: 4.0,
                z0: 0.0,
                z1: 1.5,
            },
        ]);
        let r = reference_trajectory(&w, (0.0, 0.0), (10.0, 0.0), 0.6).unwrap();
        assert!(r.total >= 10.0 - 1e-9);
        // Passes the gap: some point near x = 5 must have |y| < 1.
        let near_gap = r
            .points
            .iter()
            .any(|&(x, y)| (x - 5.0).abs() < 0.5 && y.abs() < 1.0);
        assert!(near_gap);
    }

    #[test]
    fn fully_walled_goal_is_no_reference_path() {
        let mut obstacles = Vec::new();
        for (cx, cy, hx, hy) in [
            (8.0, 0.0, 0.4, 3.0),
            (4.0, 0.0, 0.4, 3.0),
            (6.0, 2.6, 2.4, 0.4),
            (6.0, -2.6, 2.4, 0.4),
        ] {
            obstacles.push(Primitive::Box {
                cx,
                cy,
                half_x: hx,
                half_y: hy,
                z0: 0.0,
                z1: 1.5,
            });
        }
        let w = flat_world(obstacles);
        assert_eq!(
            reference_trajectory(&w, (0.0, 0.0), (6.0, 0.0), 0.6).unwrap_err(),
            BenchError::NoReferencePath
        );
    }

    #[test]
    fn smoothing_never_lengthens_the_raw_astar_path() {
        for seed in 0..6 {
            let w = generate_world(Difficulty::Medium, seed);
            let cmap = ground_truth_costmap(&w, 0.6);
            let Ok(path) = astar(&cmap, (0.0, 0.0), (20.0, 0.0)) else {
                continue;
            };
            let smoothed = smooth(&cmap, &path.waypoints);
            let smoothed_len: f64 = smoothed
                .windows(2)
                .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
                .sum();
            assert!(
                smoothed_len <= path.total_length + 1e-9,
                "seed {seed}: {smoothed_len} > {}",
                path.total_length
            );
            // And the smoothed path is still collision-free.
            for w2 in smoothed.windows(2) {
                assert!(line_of_sight(&cmap, w2[0], w2[1]));
            }
        }
    }

    #[test]
    fn grass_does_not_block_the_reference() {
        let w = flat_world(vec![Primitive::Grass {
            polygon: vec![(3.0, -6.0), (7.0, -6.0), (7.0, 6.0), (3.0, 6.0)],
            height: 0.8,
            soft_edge: 0.3,
        }]);
        let r = reference_trajectory(&w, (0.0, 0.0), (10.0, 0.0), 0.6).unwrap();
        assert!((r.total - 10.0).abs() < 1e-9, "grass must not detour: {}", r.total);
    }
}
