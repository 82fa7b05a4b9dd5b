//! Differential-drive kinematics with an acceleration limit and disc
//! collision checking against solid obstacles.

use thiserror::Error;

use crate::geometry::{wrap_angle, RobotState};

use super::World;

/// The robot footprint overlapped a solid obstacle after a step.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("collision at ({x:.2}, {y:.2})")]
pub struct Collision {
    pub x: f64,
    pub y: f64,
}

/// Advance the robot one step under a (v, omega) command.
///
/// Linear velocity slews toward the command at `a_max`; angular velocity is
/// taken directly (yaw inertia is negligible at these speeds). Integration
/// follows the exact constant-twist arc. Grass is driveable, everything else
/// collides against the `radius` disc.
pub fn step_robot(
    state: &RobotState,
    cmd: (f64, f64),
    dt: f64,
    world: &World,
    radius: f64,
    a_max: f64,
) -> Result<RobotState, Collision> {
    let dv = (cmd.0 - state.v).clamp(-a_max * dt, a_max * dt);
    let v = state.v + dv;
    let omega = cmd.1;

    let (x, y) = if omega.abs() > 1e-6 {
        let r = v / omega;
        (
            state.x + r * ((state.theta + omega * dt).sin() - state.theta.sin()),
            state.y - r * ((state.theta + omega * dt).cos() - state.theta.cos()),
        )
    } else {
        (
            state.x + v * dt * state.theta.cos(),
            state.y + v * dt * state.theta.sin(),
        )
    };
    let theta = wrap_angle(state.theta + omega * dt);

    if world.collides_disc(x, y, radius) {
        return Err(Collision { x, y });
    }
    Ok(RobotState {
        x,
        y,
        theta,
        v,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Primitive, Terrain, World};

    fn empty_world() -> World {
        World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![],
        }
    }

    #[test]
    fn straight_line_integrates_exactly() {
        let w = empty_world();
        let mut s = RobotState {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v: 1.0,
            omega: 0.0,
        };
        for _ in 0..100 {
            s = step_robot(&s, (1.0, 0.0), 0.01, &w, 0.3, 100.0).unwrap();
        }
        assert!((s.x - 1.0).abs() < 1e-12);
        assert!(s.y.abs() < 1e-12);
    }

    #[test]
    fn full_circle_returns_home() {
        // v = omega = 1: unit-radius circle, closes after 2*pi seconds.
        let w = empty_world();
        let mut s = RobotState {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v: 1.0,
            omega: 1.0,
        };
        let n = 1000;
        let dt = std::f64::consts::TAU / n as f64;
        for _ in 0..n {
            s = step_robot(&s, (1.0, 1.0), dt, &w, 0.3, 100.0).unwrap();
        }
        assert!(s.x.abs() < 1e-9, "x = {}", s.x);
        assert!(s.y.abs() < 1e-9, "y = {}", s.y);
    }

    #[test]
    fn acceleration_limit_slews_velocity() {
        let w = empty_world();
        let s0 = RobotState::at(0.0, 0.0, 0.0);
        let s1 = step_robot(&s0, (1.5, 0.0), 0.1, &w, 0.3, 2.0).unwrap();
        assert!((s1.v - 0.2).abs() < 1e-12, "v jumped to {}", s1.v);
        let s2 = step_robot(&s1, (0.0, 0.0), 0.1, &w, 0.3, 2.0).unwrap();
        assert!((s2.v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn solid_collision_stops_the_run_but_grass_does_not() {
        let solid = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![Primitive::Cylinder {
                cx: 1.0,
                cy: 0.0,
                radius: 0.3,
                z0: 0.0,
                z1: 2.0,
            }],
        };
        let grass = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![Primitive::Grass {
                polygon: vec![(0.5, -1.0), (2.0, -1.0), (2.0, 1.0), (0.5, 1.0)],
                height: 0.8,
                soft_edge: 0.3,
            }],
        };
        let mut s = RobotState {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v: 1.0,
            omega: 0.0,
        };
        let mut hit = None;
        for _ in 0..200 {
            match step_robot(&s, (1.0, 0.0), 0.01, &solid, 0.3, 100.0) {
                Ok(next) => s = next,
                Err(c) => {
                    hit = Some(c);
                    break;
                }
            }
        }
        let c = hit.expect("must collide with the cylinder");
        assert!((c.x - 0.4).abs() < 0.02, "contact at x = {}", c.x);

        let mut s = RobotState {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
            v: 1.0,
            omega: 0.0,
        };
        for _ in 0..200 {
            s = step_robot(&s, (1.0, 0.0), 0.01, &grass, 0.3, 100.0).unwrap();
        }
        assert!(s.x > 1.9, "drove straight through the grass");
    }
}
