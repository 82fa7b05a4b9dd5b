//! Off-road navigation stack with a deterministic simulator and benchmark
//! harness.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: camera model, poses, point clouds.
//! - [`depth`]: relative-to-metric depth rescaling (sparse-anchor affine fit,
//!   temporal smoothing, edge masking, metricisation).
//! - [`csf`]: cloth-simulation ground filtering of 3D points.
//! - [`elevation`]: robot-centric rolling elevation grid.
//! - [`planning`]: costmap inflation, A* global planning, elastic-band local
//!   optimisation.
//! - [`sim`]: procedural worlds, LiDAR/depth-camera sensor models, unicycle
//!   robot.
//! - [`pipeline`]: the perception→mapping→planning loop run at fixed rates
//!   inside a single deterministic simulation clock.
//! - [`bench`]: scenario matrix, reference trajectories and the
//!   success/SPL/distance-rate metrics.
//! - [`config`]: serialisable configuration tree and the built-in presets.
//!
//! Everything is seeded explicitly; running the same entry point twice with
//! the same seed and configuration produces byte-identical outputs.


pub mod config;
pub mod csf;
pub mod depth;
pub mod elevation;
pub mod geometry;
pub mod pipeline;
pub mod planning;
pub mod seeding;
pub mod sim;
pub mod bench;
