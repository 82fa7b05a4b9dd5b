//! Synthetic off-road worlds and the sensors that observe them.
//!
//! A [`World`] is a square arena with a terrain heightfield and a list of
//! [`Primitive`] obstacles. Everything downstream of the simulator talks to
//! it through two queries: [`World::raycast`] (sensors) and
//! [`World::collides_disc`] (robot footprint). Grass patches are the one
//! asymmetry — rays hit them, the footprint ignores them — which is exactly
//! the trap the mapping stack is being evaluated on.

mod noise;
mod robot;
mod sensors;
mod synth;

pub use robot::{step_robot, Collision};
pub use sensors::{raycast_lidar, render_depth, render_view, CameraMount, DepthImage, LidarSpec};
pub use synth::{sample_anchors, synthesize_relative_depth, AnchorModel, DepthArtifacts};

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding;

/// Half-size of the square arena in metres.
pub const WORLD_HALF_SIZE: f64 = 40.0;

/// Canonical goal distances along +x that generators keep approachable.
pub const GOAL_DISTANCES: [f64; 3] = [10.0, 20.0, 30.0];

/// Clearance kept around the start and canonical goals when placing obstacles.
const KEEPOUT_RADIUS: f64 = 2.5;

#[derive(Debug, Error)]
pub enum SimError {
    /// Anchor sampling needs more valid depth pixels than the frame has.
    #[error("too few valid pixels: have {have}, need {need}")]
    TooFewValidPixels { have: usize, need: usize },
}

/// Scenario difficulty tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    /// Flat ground, box clutter.
    Easy,
    /// Flat ground, cylinders and half-buried spheres.
    Medium,
    /// Rolling terrain, solid clutter, plus tall grass.
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty `{other}` (easy|medium|hard)")),
        }
    }
}

/// Ground model. Noise terrain is evaluated lazily from the seed, so worlds
/// serialize to a few hundred bytes regardless of extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Terrain {
    Flat,
    Noise {
        amplitude: f64,
        wavelength: f64,
        seed: u64,
    },
}

impl Terrain {
    pub fn height(&self, x: f64, y: f64) -> f64 {
        match *self {
            Terrain::Flat => 0.0,
            Terrain::Noise {
                amplitude,
                wavelength,
                seed,
            } => noise::heightfield(x, y, amplitude, wavelength, seed),
        }
    }

    /// Conservative global bounds on the height values.
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Terrain::Flat => (0.0, 0.0),
            Terrain::Noise { amplitude, .. } => (-amplitude, amplitude),
        }
    }

    /// Upper bound on |∇h|, used to size safe ray-march steps.
    ///
    /// Each value-noise octave interpolates values spanning at most 2 with a
    /// smoothstep fade (slope ≤ 1.5) over its wavelength, so per-axis slope
    /// is ≤ 3/λ and the two-octave blend is ≤ 4√2·amplitude/λ.
    fn slope_bound(&self) -> f64 {
        match *self {
            Terrain::Flat => 0.0,
            Terrain::Noise {
                amplitude,
                wavelength,
                ..
            } => 4.0 * std::f64::consts::SQRT_2 * amplitude / wavelength,
        }
    }
}

/// Solid or vegetated obstacles. Solid ones store explicit z extents so a
/// serialized world is self-contained; grass follows the terrain surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    Box {
        cx: f64,
        cy: f64,
        half_x: f64,
        half_y: f64,
        z0: f64,
        z1: f64,
    },
    Cylinder {
        cx: f64,
        cy: f64,
        radius: f64,
        z0: f64,
        z1: f64,
    },
    Sphere {
        cx: f64,
        cy: f64,
        cz: f64,
        radius: f64,
    },
    /// Tall grass over a convex polygon: occupies terrain..terrain+height.
    /// Sensors see it; the robot drives through it.
    Grass {
        polygon: Vec<(f64, f64)>,
        height: f64,
        soft_edge: f64,
    },
}

impl Primitive {
    pub fn is_grass(&self) -> bool {
        matches!(self, Primitive::Grass { .. })
    }

    /// 2D distance from a point to the footprint boundary (<= 0 inside).
    /// Grass returns +inf: it has no collision footprint.
    pub fn footprint_distance(&self, px: f64, py: f64) -> f64 {
        match *self {
            Primitive::Box {
                cx,
                cy,
                half_x,
                half_y,
                ..
            } => {
                let dx = (px - cx).abs() - half_x;
                let dy = (py - cy).abs() - half_y;
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
            Primitive::Cylinder { cx, cy, radius, .. } => (px - cx).hypot(py - cy) - radius,
            Primitive::Sphere { cx, cy, radius, .. } => (px - cx).hypot(py - cy) - radius,
            Primitive::Grass { .. } => f64::INFINITY,
        }
    }
}

/// A complete scenario: terrain plus obstacles in a square arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub half_size: f64,
    pub terrain: Terrain,
    pub obstacles: Vec<Primitive>,
}

/// Nearest ray intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Range along the (unit) ray direction.
    pub t: f64,
    /// True when the nearest surface is grass rather than solid/terrain.
    pub grass: bool,
}

impl World {
    pub fn terrain_height(&self, x: f64, y: f64) -> f64 {
        self.terrain.height(x, y)
    }

    /// True when a robot disc at (x, y) overlaps any solid obstacle.
    /// Grass never collides.
    pub fn collides_disc(&self, x: f64, y: f64, radius: f64) -> bool {
        self.obstacles
            .iter()
            .any(|p| p.footprint_distance(x, y) <= radius)
    }

    /// Nearest hit of a ray against terrain and all obstacles.
    ///
    /// `dir` must be unit length. Returns `None` when nothing is struck
    /// within `max_range`.
    pub fn raycast(&self, origin: Point3<f64>, dir: Vector3<f64>, max_range: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut limit = max_range;
        let mut consider = |t: f64, grass: bool, limit: &mut f64| {
            if t > 1e-9 && t < *limit {
                *limit = t;
                best = Some(Hit { t, grass });
            }
        };

        for prim in &self.obstacles {
            match *prim {
                Primitive::Box {
                    cx,
                    cy,
                    half_x,
                    half_y,
                    z0,
                    z1,
                } => {
                    if let Some(t) = ray_aabb(
                        origin,
                        dir,
                        [cx - half_x, cy - half_y, z0],
                        [cx + half_x, cy + half_y, z1],
                    ) {
                        consider(t, false, &mut limit);
                    }
                }
                Primitive::Cylinder {
                    cx,
                    cy,
                    radius,
                    z0,
                    z1,
                } => {
                    if let Some(t) = ray_cylinder(origin, dir, cx, cy, radius, z0, z1) {
                        consider(t, false, &mut limit);
                    }
                }
                Primitive::Sphere { cx, cy, cz, radius } => {
                    if let Some(t) = ray_sphere(origin, dir, cx, cy, cz, radius) {
                        consider(t, false, &mut limit);
                    }
                }
                Primitive::Grass {
                    ref polygon,
                    height,
                    ..
                } => {
                    if let Some(t) =
                        ray_grass(origin, dir, polygon, height, &self.terrain, limit)
                    {
                        consider(t, true, &mut limit);
                    }
                }
            }
        }

        if let Some(t) = ray_terrain(origin, dir, &self.terrain, limit) {
            consider(t, false, &mut limit);
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Ray-primitive intersections
// ---------------------------------------------------------------------------

/// Slab test; returns the entry range (0 when the origin is inside).
fn ray_aabb(o: Point3<f64>, d: Vector3<f64>, lo: [f64; 3], hi: [f64; 3]) -> Option<f64> {
    let mut t_min = 0.0f64;
    let mut t_max = f64::INFINITY;
    for axis in 0..3 {
        let (o_a, d_a) = (o[axis], d[axis]);
        if d_a.abs() < 1e-12 {
            if o_a < lo[axis] || o_a > hi[axis] {
                return None;
            }
        } else {
            let inv = 1.0 / d_a;
            let (mut t0, mut t1) = ((lo[axis] - o_a) * inv, (hi[axis] - o_a) * inv);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_min = t_min.max(t0);
            t_max = t_max.min(t1);
            if t_min > t_max {
                return None;
            }
        }
    }
    Some(t_min)
}

fn ray_sphere(o: Point3<f64>, d: Vector3<f64>, cx: f64, cy: f64, cz: f64, r: f64) -> Option<f64> {
    let oc = Vector3::new(o.x - cx, o.y - cy, o.z - cz);
    let b = oc.dot(&d);
    let c = oc.norm_squared() - r * r;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t > 0.0).then_some(t)
}

/// Vertical capped cylinder: nearest of side wall and the two cap discs.
fn ray_cylinder(
    o: Point3<f64>,
    d: Vector3<f64>,
    cx: f64,
    cy: f64,
    r: f64,
    z0: f64,
    z1: f64,
) -> Option<f64> {
    let mut best = f64::INFINITY;

    // Side wall: project onto the xy plane.
    let (ox, oy) = (o.x - cx, o.y - cy);
    let a = d.x * d.x + d.y * d.y;
    if a > 1e-12 {
        let b = ox * d.x + oy * d.y;
        let c = ox * ox + oy * oy - r * r;
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let t = (-b - disc.sqrt()) / a;
            if t > 0.0 {
                let z = o.z + t * d.z;
                if z >= z0 && z <= z1 {
                    best = t;
                }
            }
        }
    }

    // Caps.
    if d.z.abs() > 1e-12 {
        for cap_z in [z0, z1] {
            let t = (cap_z - o.z) / d.z;
            if t > 0.0 && t < best {
                let (x, y) = (o.x + t * d.x - cx, o.y + t * d.y - cy);
                if x * x + y * y <= r * r {
                    best = t;
                }
            }
        }
    }

    best.is_finite().then_some(best)
}

/// Clip a ray against a convex polygon in the xy plane; returns the 2D
/// parameter interval spent inside (or None). Polygon must wind CCW.
fn polygon_interval(
    o: Point3<f64>,
    d: Vector3<f64>,
    poly: &[(f64, f64)],
) -> Option<(f64, f64)> {
    let mut t_in = 0.0f64;
    let mut t_out = f64::INFINITY;
    let n = poly.len();
    for i in 0..n {
        let (ax, ay) = poly[i];
        let (bx, by) = poly[(i + 1) % n];
        // Inward normal of edge a->b for a CCW polygon.
        let (nx, ny) = (-(by - ay), bx - ax);
        let denom = nx * d.x + ny * d.y;
        let dist = nx * (o.x - ax) + ny * (o.y - ay); // >0 inside half-plane
        if denom.abs() < 1e-12 {
            if dist < 0.0 {
                return None;
            }
        } else {
            let t = -dist / denom;
            if denom > 0.0 {
                t_in = t_in.max(t);
            } else {
                t_out = t_out.min(t);
            }
            if t_in > t_out {
                return None;
            }
        }
    }
    Some((t_in, t_out))
}

/// March the in-polygon interval looking for the first point at or below the
/// grass top surface (terrain + height). Entry through the side is exact.
fn ray_grass(
    o: Point3<f64>,
    d: Vector3<f64>,
    poly: &[(f64, f64)],
    height: f64,
    terrain: &Terrain,
    limit: f64,
) -> Option<f64> {
    let (t0, t1) = polygon_interval(o, d, poly)?;
    let t1 = t1.min(limit);
    if t0 >= t1 {
        return None;
    }
    let above = |t: f64| {
        let p = o + d * t;
        p.z - terrain.height(p.x, p.y) - height
    };
    if above(t0) <= 0.0 {
        return Some(t0.max(1e-9));
    }
    let step = 0.2;
    let mut prev = t0;
    let mut t = t0 + step;
    while prev < t1 {
        let t_clamped = t.min(t1);
        if above(t_clamped) <= 0.0 {
            // Bisect the crossing of the top surface.
            let (mut lo, mut hi) = (prev, t_clamped);
            for _ in 0..25 {
                let mid = 0.5 * (lo + hi);
                if above(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        prev = t_clamped;
        t += step;
    }
    None
}

/// Ray-terrain intersection. Flat ground is solved in closed form; noise
/// terrain is marched through its height band and refined by bisection.
fn ray_terrain(o: Point3<f64>, d: Vector3<f64>, terrain: &Terrain, limit: f64) -> Option<f64> {
    if let Terrain::Flat = terrain {
        if d.z.abs() < 1e-12 {
            return None;
        }
        let t = -o.z / d.z;
        return (t > 0.0 && t <= limit).then_some(t);
    }

    let (lo, hi) = terrain.bounds();
    // Restrict the march to where the ray's z lies inside the height band.
    let (mut t_a, mut t_b) = (0.0f64, limit);
    if d.z.abs() > 1e-12 {
        let ta = (hi + 1e-3 - o.z) / d.z;
        let tb = (lo - 1e-3 - o.z) / d.z;
        let (band_in, band_out) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        t_a = t_a.max(band_in);
        t_b = t_b.min(band_out);
    } else if o.z < lo || o.z > hi {
        return None;
    }
    if t_a >= t_b {
        return None;
    }

    let above = |t: f64| {
        let p = o + d * t;
        p.z - terrain.height(p.x, p.y)
    };
    if above(t_a) <= 0.0 {
        return Some(t_a.max(1e-9));
    }

    // Sphere-trace along the ray: |d(above)/dt| <= |d.z| + slope_bound for a
    // unit direction, so stepping by above(t)/denom can never jump across the
    // surface. Steps shrink geometrically near a hit; a final bisection
    // polishes any overshoot from the progress floor.
    // The 2 cm progress floor keeps grazing rays from stalling; it can skip
    // only crests thinner than a couple of centimetres, well under the
    // sensor noise floor.
    let denom = d.z.abs() + terrain.slope_bound();
    let mut prev = t_a;
    let mut t = t_a;
    for _ in 0..3000 {
        let f = above(t);
        if f <= 0.0 {
            let (mut lo_t, mut hi_t) = (prev, t);
            for _ in 0..40 {
                let mid = 0.5 * (lo_t + hi_t);
                if above(mid) <= 0.0 {
                    hi_t = mid;
                } else {
                    lo_t = mid;
                }
            }
            return Some(hi_t);
        }
        if f <= 1e-7 {
            return Some(t);
        }
        prev = t;
        t += (f / denom).max(0.02);
        if t > t_b {
            return None;
        }
    }
    None
}

// ---------------------------------------------------------------------------
// World generation
// ---------------------------------------------------------------------------

/// Points that must stay clear of obstacles in generated worlds.
fn keepout_points() -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(GOAL_DISTANCES.iter().map(|&d| (d, 0.0)));
    pts
}

fn clear_of_keepouts(x: f64, y: f64, extent: f64, keepouts: &[(f64, f64)]) -> bool {
    keepouts
        .iter()
        .all(|&(kx, ky)| (x - kx).hypot(y - ky) > KEEPOUT_RADIUS + extent)
}

/// Sample a position in the annulus r in [r_min, r_max] around the origin,
/// rejecting spots too close to the start or a canonical goal.
fn sample_position(
    rng: &mut impl Rng,
    r_min: f64,
    r_max: f64,
    extent: f64,
    keepouts: &[(f64, f64)],
) -> (f64, f64) {
    loop {
        let ang = rng.random_range(0.0..std::f64::consts::TAU);
        let r = (rng.random_range(r_min * r_min..r_max * r_max)).sqrt();
        let (x, y) = (r * ang.cos(), r * ang.sin());
        if clear_of_keepouts(x, y, extent, keepouts) {
            return (x, y);
        }
    }
}

/// Convex hull (Andrew's monotone chain), CCW winding.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn gen_boxes(rng: &mut impl Rng, world: &mut World, keepouts: &[(f64, f64)]) {
    // A few tight clusters plus scattered singles.
    let clusters = rng.random_range(3..=5);
    for _ in 0..clusters {
        let (cx, cy) = sample_position(rng, 4.0, 28.0, 2.0, keepouts);
        let members = rng.random_range(2..=4);
        for _ in 0..members {
            let x = cx + rng.random_range(-1.5..1.5);
            let y = cy + rng.random_range(-1.5..1.5);
            if !clear_of_keepouts(x, y, 0.8, keepouts) {
                continue;
            }
            push_box(rng, world, x, y);
        }
    }
    let singles = rng.random_range(4..=8);
    for _ in 0..singles {
        let (x, y) = sample_position(rng, 4.0, 30.0, 0.8, keepouts);
        push_box(rng, world, x, y);
    }
}

fn push_box(rng: &mut impl Rng, world: &mut World, x: f64, y: f64) {
    let half_x = rng.random_range(0.3..0.8);
    let half_y = rng.random_range(0.3..0.8);
    let height = rng.random_range(0.5..1.2);
    let ground = world.terrain.height(x, y);
    world.obstacles.push(Primitive::Box {
        cx: x,
        cy: y,
        half_x,
        half_y,
        z0: ground - 0.5,
        z1: ground + height,
    });
}

fn gen_solids(rng: &mut impl Rng, world: &mut World, keepouts: &[(f64, f64)]) {
    // Cylinder gates astride the first leg of the course. The gaps are wide
    // enough to thread with a faithful map but sit close enough that a map
    // whose obstacles are fattened or flickering pinches shut.
    for gx in [3.2, 4.9, 6.6] {
        let gap = rng.random_range(2.3..2.9);
        let x = gx + rng.random_range(-0.3..0.3);
        for side in [-1.0, 1.0] {
            let y = side * (gap / 2.0) + rng.random_range(-0.15..0.15);
            let radius = rng.random_range(0.2..0.35);
            let height = rng.random_range(1.8..2.6);
            if !clear_of_keepouts(x, y, radius, keepouts) {
                continue;
            }
            let ground = world.terrain.height(x, y);
            world.obstacles.push(Primitive::Cylinder {
                cx: x,
                cy: y,
                radius,
                z0: ground - 0.5,
                z1: ground + height,
            });
        }
    }
    let cylinders = rng.random_range(10..=16);
    for _ in 0..cylinders {
        let (x, y) = sample_position(rng, 4.0, 30.0, 0.5, keepouts);
        let radius = rng.random_range(0.15..0.45);
        let height = rng.random_range(1.5..3.0);
        let ground = world.terrain.height(x, y);
        world.obstacles.push(Primitive::Cylinder {
            cx: x,
            cy: y,
            radius,
            z0: ground - 0.5,
            z1: ground + height,
        });
    }
    let spheres = rng.random_range(6..=10);
    for _ in 0..spheres {
        let (x, y) = sample_position(rng, 4.0, 30.0, 0.8, keepouts);
        let radius = rng.random_range(0.35..0.7);
        let ground = world.terrain.height(x, y);
        world.obstacles.push(Primitive::Sphere {
            cx: x,
            cy: y,
            // Embedded boulder: centre sits low so ~40% of the radius pokes out.
            cz: ground + 0.4 * radius,
            radius,
        });
    }
}

fn gen_grass(rng: &mut impl Rng, world: &mut World, keepouts: &[(f64, f64)]) {
    let patches = rng.random_range(3..=6);
    for _ in 0..patches {
        let (cx, cy) = sample_position(rng, 5.0, 26.0, 4.0, keepouts);
        let spread = rng.random_range(2.0..4.0);
        let n = rng.random_range(8..=12);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let ang = rng.random_range(0.0..std::f64::consts::TAU);
                let r = rng.random_range(0.5..spread);
                (cx + r * ang.cos(), cy + r * ang.sin())
            })
            .collect();
        let hull = convex_hull(pts);
        if hull.len() < 3 {
            continue;
        }
        world.obstacles.push(Primitive::Grass {
            polygon: hull,
            height: 0.8,
            soft_edge: 0.3,
        });
    }
}

/// Deterministically generate a scenario world for the given tier.
pub fn generate_world(difficulty: Difficulty, seed: u64) -> World {
    let mut rng = seeding::rng(seeding::mix(seed, difficulty as u64 + 0xD1FF));
    let keepouts = keepout_points();
    let terrain = match difficulty {
        Difficulty::Easy | Difficulty::Medium => Terrain::Flat,
        Difficulty::Hard => Terrain::Noise {
            amplitude: 1.2,
            wavelength: 10.0,
            seed: seeding::mix(seed, 0x7E44),
        },
    };
    let mut world = World {
        half_size: WORLD_HALF_SIZE,
        terrain,
        obstacles: Vec::new(),
    };
    match difficulty {
        Difficulty::Easy => gen_boxes(&mut rng, &mut world, &keepouts),
        Difficulty::Medium => gen_solids(&mut rng, &mut world, &keepouts),
        Difficulty::Hard => {
            gen_solids(&mut rng, &mut world, &keepouts);
            gen_grass(&mut rng, &mut world, &keepouts);
        }
    }
    world
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Point3, Vector3};

    #[test]
    fn generation_is_deterministic() {
        for d in Difficulty::ALL {
            assert_eq!(generate_world(d, 11), generate_world(d, 11));
        }
        assert_ne!(
            generate_world(Difficulty::Easy, 1),
            generate_world(Difficulty::Easy, 2)
        );
    }

    #[test]
    fn start_and_goals_stay_clear() {
        for d in Difficulty::ALL {
            for seed in 0..20 {
                let w = generate_world(d, seed);
                for &(x, y) in &[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0)] {
                    assert!(
                        !w.collides_disc(x, y, 1.5),
                        "{} seed {seed} blocks ({x}, {y})",
                        d.name()
                    );
                }
            }
        }
    }

    #[test]
    fn hard_worlds_always_have_reachable_grass() {
        for seed in 0..20 {
            let w = generate_world(Difficulty::Hard, seed);
            let grass_near = w.obstacles.iter().any(|p| match p {
                Primitive::Grass { polygon, .. } => polygon
                    .iter()
                    .any(|&(x, y)| x.hypot(y) <= 30.0),
                _ => false,
            });
            assert!(grass_near, "seed {seed} has no grass within 30 m");
        }
    }

    #[test]
    fn raycast_hits_flat_ground_at_expected_range() {
        let w = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![],
        };
        // 45 degrees down from 1 m: range sqrt(2).
        let dir = Vector3::new(1.0, 0.0, -1.0).normalize();
        let hit = w.raycast(Point3::new(0.0, 0.0, 1.0), dir, 30.0).unwrap();
        assert!((hit.t - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(!hit.grass);
    }

    #[test]
    fn raycast_prefers_nearest_obstacle() {
        let w = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![
                Primitive::Box {
                    cx: 8.0,
                    cy: 0.0,
                    half_x: 0.5,
                    half_y: 2.0,
                    z0: 0.0,
                    z1: 2.0,
                },
                Primitive::Cylinder {
                    cx: 4.0,
                    cy: 0.0,
                    radius: 0.5,
                    z0: 0.0,
                    z1: 2.0,
                },
            ],
        };
        let hit = w
            .raycast(Point3::new(0.0, 0.0, 1.0), Vector3::x(), 30.0)
            .unwrap();
        assert!((hit.t - 3.5).abs() < 1e-9);
    }

    #[test]
    fn raycast_reports_grass_and_solid_behind_it() {
        let w = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![Primitive::Grass {
                polygon: vec![(2.0, -1.0), (4.0, -1.0), (4.0, 1.0), (2.0, 1.0)],
                height: 0.8,
                soft_edge: 0.3,
            }],
        };
        // Horizontal ray at 0.5 m: inside the grass band, hits the patch side.
        let hit = w
            .raycast(Point3::new(0.0, 0.0, 0.5), Vector3::x(), 30.0)
            .unwrap();
        assert!(hit.grass);
        assert!((hit.t - 2.0).abs() < 1e-9);
        // Ray above the grass top sails over it and lands on the ground beyond.
        let dir = Vector3::new(1.0, 0.0, -0.1).normalize();
        let hit = w.raycast(Point3::new(0.0, 0.0, 1.5), dir, 60.0).unwrap();
        assert!(!hit.grass, "expected terrain beyond the patch");
    }

    #[test]
    fn grass_top_surface_entry_is_accurate() {
        let w = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![Primitive::Grass {
                polygon: vec![(1.0, -5.0), (20.0, -5.0), (20.0, 5.0), (1.0, 5.0)],
                height: 0.8,
                soft_edge: 0.3,
            }],
        };
        // Descending ray: crosses z = 0.8 at x = o.x + t*dx; solve analytically.
        let dir = Vector3::new(2.0, 0.0, -1.0).normalize();
        let origin = Point3::new(0.0, 0.0, 2.0);
        let hit = w.raycast(origin, dir, 60.0).unwrap();
        assert!(hit.grass);
        let t_exact = (2.0 - 0.8) / (1.0 / 5.0f64.sqrt());
        assert!((hit.t - t_exact).abs() < 1e-4, "hit {} vs {}", hit.t, t_exact);
    }

    #[test]
    fn noise_terrain_raycast_matches_direct_height_lookup() {
        let terrain = Terrain::Noise {
            amplitude: 1.2,
            wavelength: 10.0,
            seed: 5,
        };
        let w = World {
            half_size: 40.0,
            terrain: terrain.clone(),
            obstacles: vec![],
        };
        // Straight down: hit range must equal origin height minus terrain height.
        for i in 0..10 {
            let (x, y) = (i as f64 * 2.3 - 9.0, i as f64 * 1.7 - 7.0);
            let origin = Point3::new(x, y, 5.0);
            let hit = w.raycast(origin, -Vector3::z(), 30.0).unwrap();
            let expect = 5.0 - terrain.height(x, y);
            assert!((hit.t - expect).abs() < 1e-5, "at ({x}, {y})");
        }
    }

    #[test]
    fn footprint_distances() {
        let b = Primitive::Box {
            cx: 0.0,
            cy: 0.0,
            half_x: 1.0,
            half_y: 2.0,
            z0: 0.0,
            z1: 1.0,
        };
        assert!((b.footprint_distance(3.0, 0.0) - 2.0).abs() < 1e-12);
        assert!(b.footprint_distance(0.5, 0.5) < 0.0);
        assert!((b.footprint_distance(2.0, 3.0) - 2.0f64.sqrt()).abs() < 1e-12);
        let g = Primitive::Grass {
            polygon: vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
            height: 0.8,
            soft_edge: 0.3,
        };
        assert_eq!(g.footprint_distance(0.2, 0.2), f64::INFINITY);
    }

    #[test]
    fn world_round_trips_through_ron() {
        let w = generate_world(Difficulty::Hard, 3);
        let text = ron::ser::to_string_pretty(&w, ron::ser::PrettyConfig::default()).unwrap();
        let back: World = ron::from_str(&text).unwrap();
        assert_eq!(w, back);
    }
}
