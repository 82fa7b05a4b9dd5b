//! Planning: binary costmap with inflation, A* global search and an
//! elastic-band local trajectory optimiser.

mod astar;
mod costmap;
mod teb;

pub use astar::{astar, GlobalPath};
pub use costmap::{build_costmap, Costmap, DistanceField};
pub use teb::{
    first_command, teb_optimize, LocalTrajectory, PlannerConfig, PlannerMode,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("start cell is blocked")]
    StartBlocked,
    #[error("no path from start to goal")]
    NoPath,
    #[error("local band is infeasible after optimisation")]
    Infeasible,
}
