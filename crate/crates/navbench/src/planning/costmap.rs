//! Binary costmap derived from the elevation grid.

use crate::elevation::{Cell, ElevationGrid};

/// Planar occupancy: `true` cells are untraversable after inflation.
///
/// Unknown elevation cells are treated as free — the vehicle is expected to
/// drive into unexplored space.
#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    width: usize,
    height: usize,
    resolution: f64,
    /// World xy of the centre of cell (0, 0).
    origin: (f64, f64),
    blocked: Vec<bool>,
}

impl Costmap {
    /// An all-free costmap, mostly for tests and synthetic scenarios.
    pub fn free(width: usize, height: usize, resolution: f64, origin: (f64, f64)) -> Self {
        Self { width, height, resolution, origin, blocked: vec![false; width * height] }
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

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    #[inline]
    pub fn is_blocked(&self, i: usize, j: usize) -> bool {
        self.blocked[j * self.width + i]
    }

    #[inline]
    pub fn set_blocked(&mut self, i: usize, j: usize, blocked: bool) {
        self.blocked[j * self.width + i] = blocked;
    }

    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = ((x - self.origin.0) / self.resolution).round() as isize;
        let j = ((y - self.origin.1) / self.resolution).round() as isize;
        (i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height)
            .then(|| (i as usize, j as usize))
    }

    pub fn cell_to_world(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + i as f64 * self.resolution,
            self.origin.1 + j as f64 * self.resolution,
        )
    }

    /// Whether the world position falls on a blocked cell; positions off
    /// the map count as free, consistent with unknown-is-traversable.
    pub fn is_blocked_world(&self, x: f64, y: f64) -> bool {
        match self.world_to_cell(x, y) {
            Some((i, j)) => self.is_blocked(i, j),
            None => false,
        }
    }

    /// Exact Euclidean distance (m) from every cell centre to the nearest
    /// blocked cell centre, via the two-pass lower-envelope squared
    /// distance transform. Cells on blocked cells read 0; a map with no
    /// blocked cells reads infinity everywhere.
    pub fn distance_field(&self) -> Vec<f64> {
        self.edt(true)
    }

    /// Signed clearance field: positive distance to the nearest blocked
    /// cell in free space, negative depth to the nearest free cell inside
    /// obstacles. Unlike the raw grid lookup this is smooth enough for
    /// finite-difference optimisation — inside an obstacle the gradient
    /// points at the nearest exit.
    pub fn signed_distance_field(&self) -> DistanceField {
        let to_blocked = self.edt(true);
        let to_free = self.edt(false);
        let values = to_blocked
            .iter()
            .zip(&to_free)
            .map(|(&b, &f)| if b > 0.0 { b } else { -f })
            .collect();
        DistanceField {
            width: self.width,
            height: self.height,
            resolution: self.resolution,
            origin: self.origin,
            values,
        }
    }

    fn edt(&self, blocked_is_source: bool) -> Vec<f64> {
        const FAR: f64 = 1e20;
        let (w, h) = (self.width, self.height);
        let mut sq: Vec<f64> = self
            .blocked
            .iter()
            .map(|&b| if b == blocked_is_source { 0.0 } else { FAR })
            .collect();

        let max_dim = w.max(h);
        let mut f = vec![0.0; max_dim];
        let mut d = vec![0.0; max_dim];
        let mut v = vec![0usize; max_dim];
        let mut zb = vec![0.0; max_dim + 1];

        // Columns, then rows.
        for i in 0..w {
            for j in 0..h {
                f[j] = sq[j * w + i];
            }
            edt_1d(&f[..h], &mut d, &mut v, &mut zb);
            for j in 0..h {
                sq[j * w + i] = d[j];
            }
        }
        for j in 0..h {
            f[..w].copy_from_slice(&sq[j * w..j * w + w]);
            edt_1d(&f[..w], &mut d, &mut v, &mut zb);
            for i in 0..w {
                sq[j * w + i] = d[i];
            }
        }

        sq.iter()
            .map(|&s| if s >= 0.25 * FAR { f64::INFINITY } else { s.sqrt() * self.resolution })
            .collect()
    }
}

/// Bilinearly interpolated signed clearance over the costmap footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    values: Vec<f64>,
}

impl DistanceField {
    /// Signed clearance (m) at a world position; queries outside the map
    /// read as unbounded free space.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        if self.width < 2 || self.height < 2 {
            return self.values.first().copied().unwrap_or(f64::INFINITY);
        }
        let fx = (x - self.origin.0) / self.resolution;
        let fy = (y - self.origin.1) / self.resolution;
        if fx < 0.0 || fy < 0.0 || fx > (self.width - 1) as f64 || fy > (self.height - 1) as f64 {
            return f64::INFINITY;
        }
        let i0 = (fx.floor() as usize).min(self.width - 2);
        let j0 = (fy.floor() as usize).min(self.height - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v = |i: usize, j: usize| self.values[j * self.width + i];
        (1.0 - ty) * ((1.0 - tx) * v(i0, j0) + tx * v(i0 + 1, j0))
            + ty * ((1.0 - tx) * v(i0, j0 + 1) + tx * v(i0 + 1, j0 + 1))
    }
}

/// 1D squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let vk = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + vk * vk)) / (2.0 * qf - 2.0 * vk);
            if s <= z[k] {
                debug_assert!(k > 0);
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for q in 0..n {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let vk = v[k] as f64;
        d[q] = (qf - vk) * (qf - vk) + f[v[k]];
    }
}

/// Thresholds the elevation grid into a costmap and inflates blockage by
/// the robot radius.
///
/// A cell blocks iff it holds an obstacle strictly higher than
/// `height_threshold`; ground and unknown cells are free. Every free cell
/// whose centre lies within `robot_radius` (Euclidean, metres) of a blocked
/// cell centre is then marked blocked too, so the planner can treat the
/// robot as a point.
pub fn build_costmap(grid: &ElevationGrid, height_threshold: f64, robot_radius: f64) -> Costmap {
    let (w, h) = (grid.width(), grid.height());
    let res = grid.resolution();
    let origin = grid.cell_to_world(0, 0);
    let mut raw = vec![false; w * h];
    for j in 0..h {
        for i in 0..w {
            if let Cell::Obstacle { height, .. } = grid.cell(i, j) {
                if height > height_threshold {
                    raw[j * w + i] = true;
                }
            }
        }
    }

    // Integer offsets covering the inflation disc. The enumeration bound
    // must round up: radius/res can land a hair under a whole cell count
    // (0.6/0.1 < 6 in floats) and flooring would drop the boundary ring
    // that the tolerance below deliberately lets in.
    let r_cells = (robot_radius / res).ceil() as isize;
    let r2 = (robot_radius / res) * (robot_radius / res);
    let mut disc = Vec::new();
    for dj in -r_cells..=r_cells {
        for di in -r_cells..=r_cells {
            if (di * di + dj * dj) as f64 <= r2 + 1e-9 {
                disc.push((di, dj));
            }
        }
    }

    let mut blocked = vec![false; w * h];
    for j in 0..h as isize {
        for i in 0..w as isize {
            if raw[j as usize * w + i as usize] {
                for &(di, dj) in &disc {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= 0 && jj >= 0 && (ii as usize) < w && (jj as usize) < h {
                        blocked[jj as usize * w + ii as usize] = true;
                    }
                }
            }
        }
    }

    Costmap { width: w, height: h, resolution: res, origin, blocked }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csf::{GroundSegmentation, ObstaclePoint};
    use crate::elevation::{ElevationGrid, ElevationParams};
    use crate::geometry::PointCloud;
    use nalgebra::Point3;
    use rand::Rng;

    fn grid_with_obstacle(height: f64) -> ElevationGrid {
        let p = ElevationParams { width: 21, height: 21, resolution: 0.1, ..Default::default() };
        let mut g = ElevationGrid::new(&p, (0.0, 0.0)).unwrap();
        let seg = GroundSegmentation {
            ground: PointCloud::default(),
            obstacles: vec![ObstaclePoint { point: Point3::new(0.0, 0.0, height), height }],
        };
        g.integrate(&seg, 0, 3);
        g
    }

    #[test]
    fn threshold_is_strict() {
        // 25 cm does not block, 35 cm does (threshold 30 cm).
        let free = build_costmap(&grid_with_obstacle(0.25), 0.30, 0.0);
        let blocked = build_costmap(&grid_with_obstacle(0.35), 0.30, 0.0);
        let (i, j) = free.world_to_cell(0.0, 0.0).unwrap();
        assert!(!free.is_blocked(i, j));
        assert!(blocked.is_blocked(i, j));
        // Exactly at the threshold stays free.
        let at = build_costmap(&grid_with_obstacle(0.30), 0.30, 0.0);
        assert!(!at.is_blocked(i, j));
    }

    #[test]
    fn inflation_matches_brute_force_on_random_grids() {
        let mut rng = crate::seeding::rng(4242);
        for _case in 0..10 {
            let p = ElevationParams {
                width: 31,
                height: 31,
                resolution: 0.1,
                ..Default::default()
            };
            let mut g = ElevationGrid::new(&p, (0.0, 0.0)).unwrap();
            let mut obstacles = Vec::new();
            for _ in 0..12 {
                let x = rng.random_range(-1.4..1.4);
                let y = rng.random_range(-1.4..1.4);
                obstacles.push(ObstaclePoint { point: Point3::new(x, y, 1.0), height: 1.0 });
            }
            let seg = GroundSegmentation { ground: PointCloud::default(), obstacles };
            g.integrate(&seg, 0, 3);
            let radius = rng.random_range(0.15..0.45);
            let cm = build_costmap(&g, 0.30, radius);

            // Oracle: raw blockage, then a full O(n*m) scan.
            let mut raw = Vec::new();
            for j in 0..g.height() {
                for i in 0..g.width() {
                    if let crate::elevation::Cell::Obstacle { height, .. } = g.cell(i, j) {
                        if height > 0.30 {
                            raw.push((i as isize, j as isize));
                        }
                    }
                }
            }
            for j in 0..cm.height() as isize {
                for i in 0..cm.width() as isize {
                    let expect = raw.iter().any(|&(bi, bj)| {
                        let d2 = ((i - bi) * (i - bi) + (j - bj) * (j - bj)) as f64;
                        d2.sqrt() * cm.resolution() <= radius + 1e-12
                    });
                    assert_eq!(
                        cm.is_blocked(i as usize, j as usize),
                        expect,
                        "cell ({i},{j}) radius {radius}"
                    );
                }
            }
        }
    }

    #[test]
    fn distance_field_matches_brute_force() {
        let mut rng = crate::seeding::rng(99);
        let mut cm = Costmap::free(24, 17, 0.25, (0.0, 0.0));
        for _ in 0..30 {
            let i = rng.random_range(0..24);
            let j = rng.random_range(0..17);
            cm.set_blocked(i, j, true);
        }
        let field = cm.distance_field();
        for j in 0..17 {
            for i in 0..24 {
                let mut best = f64::INFINITY;
                for bj in 0..17 {
                    for bi in 0..24usize {
                        if cm.is_blocked(bi, bj) {
                            let d2 = (i as f64 - bi as f64).powi(2)
                                + (j as f64 - bj as f64).powi(2);
                            best = best.min(d2.sqrt() * 0.25);
                        }
                    }
                }
                let got = field[j * 24 + i];
                assert!(
                    (got - best).abs() < 1e-9,
                    "({i},{j}): got {got}, expected {best}"
                );
            }
        }
    }

    #[test]
    fn distance_field_without_obstacles_is_infinite() {
        let cm = Costmap::free(5, 5, 0.1, (0.0, 0.0));
        assert!(cm.distance_field().iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn unknown_cells_are_traversable() {
        let p = ElevationParams { width: 11, height: 11, resolution: 0.1, ..Default::default() };
        let g = ElevationGrid::new(&p, (0.0, 0.0)).unwrap();
        let cm = build_costmap(&g, 0.30, 0.6);
        for j in 0..cm.height() {
            for i in 0..cm.width() {
                assert!(!cm.is_blocked(i, j));
            }
        }
    }
}
