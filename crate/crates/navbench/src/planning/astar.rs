//! 8-connected A* over the costmap.

use super::{Costmap, PlanError};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Global path as world-frame waypoints at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPath {
    pub waypoints: Vec<(f64, f64)>,
    /// Sum of segment lengths (m); equals the A* cost of the goal node.
    pub total_length: f64,
}

impl GlobalPath {
    /// Cumulative arc length at every waypoint, starting at 0.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.waypoints.len());
        let mut acc = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for &p in &self.waypoints {
            if let Some(q) = prev {
                acc += ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
            }
            out.push(acc);
            prev = Some(p);
        }
        out
    }
}

/// Heap entry ordered by f-value with ties broken by insertion order, so
/// the expansion sequence (and therefore the returned path among equals)
/// is fully deterministic.
struct Open {
    f: f64,
    seq: u64,
    idx: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.seq == other.seq
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert to pop the smallest f first,
        // then the earliest inserted.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Shortest 8-connected path between two world positions.
///
/// Straight moves cost one cell, diagonal moves sqrt(2) cells, both scaled
/// by the map resolution; the heuristic is the Euclidean distance, which is
/// admissible for these costs. Returns [`PlanError::StartBlocked`] when the
/// start cell is occupied and [`PlanError::NoPath`] when the goal is
/// occupied, outside the map, or unreachable.
pub fn astar(cmap: &Costmap, start: (f64, f64), goal: (f64, f64)) -> Result<GlobalPath, PlanError> {
    let (w, h) = (cmap.width(), cmap.height());
    let res = cmap.resolution();
    let (si, sj) = cmap.world_to_cell(start.0, start.1).ok_or(PlanError::NoPath)?;
    if cmap.is_blocked(si, sj) {
        return Err(PlanError::StartBlocked);
    }
    let (gi, gj) = cmap.world_to_cell(goal.0, goal.1).ok_or(PlanError::NoPath)?;
    if cmap.is_blocked(gi, gj) {
        return Err(PlanError::NoPath);
    }

    let idx = |i: usize, j: usize| j * w + i;
    let heuristic = |i: usize, j: usize| {
        let di = i as f64 - gi as f64;
        let dj = j as f64 - gj as f64;
        (di * di + dj * dj).sqrt() * res
    };

    let mut g = vec![f64::INFINITY; w * h];
    let mut parent = vec![usize::MAX; w * h];
    let mut closed = vec![false; w * h];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    g[idx(si, sj)] = 0.0;
    heap.push(Open { f: heuristic(si, sj), seq, idx: idx(si, sj) });

    const STEPS: [(isize, isize); 8] =
        [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

    let goal_idx = idx(gi, gj);
    while let Some(Open { idx: cur, .. }) = heap.pop() {
        if closed[cur] {
            continue;
        }
        closed[cur] = true;
        if cur == goal_idx {
            break;
        }
        let (ci, cj) = (cur % w, cur / w);
        for &(di, dj) in &STEPS {
            let (ni, nj) = (ci as isize + di, cj as isize + dj);
            if ni < 0 || nj < 0 || ni as usize >= w || nj as usize >= h {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            if cmap.is_blocked(ni, nj) || closed[idx(ni, nj)] {
                continue;
            }
            let step = if di != 0 && dj != 0 { std::f64::consts::SQRT_2 } else { 1.0 } * res;
            let cand = g[cur] + step;
            if cand < g[idx(ni, nj)] {
                g[idx(ni, nj)] = cand;
                parent[idx(ni, nj)] = cur;
                seq += 1;
                heap.push(Open { f: cand + heuristic(ni, nj), seq, idx: idx(ni, nj) });
            }
        }
    }

    if !closed[goal_idx] {
        return Err(PlanError::NoPath);
    }

    let mut cells = vec![goal_idx];
    let mut cur = goal_idx;
    while parent[cur] != usize::MAX {
        cur = parent[cur];
        cells.push(cur);
    }
    cells.reverse();
    let waypoints: Vec<(f64, f64)> =
        cells.iter().map(|&c| cmap.cell_to_world(c % w, c / w)).collect();
    Ok(GlobalPath { waypoints, total_length: g[goal_idx] })
}
