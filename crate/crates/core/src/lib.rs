//! Battery storage sizing for grid-connected photovoltaic systems.
//!
//! The crate answers one question: given a PV generation profile, a load
//! profile, a time-of-use tariff and a peak purchase limit, what is the
//! smallest battery capacity beyond which the optimal operating cost stops
//! improving?
//!
//! The pieces, bottom up:
//!
//! - [`scenario`]: time series, tariffs, system parameters and synthetic
//!   scenario generators.
//! - [`battery`]: converter maps, linear and nonlinear aging, rate limits.
//! - [`feasibility`]: the must-discharge / neutral / may-charge partition of
//!   the horizon and the two standing assumptions.
//! - [`bounds`]: closed-form cost envelope and capacity bracket.
//! - [`lp`]: a dense revised simplex solver with a complementarity
//!   branch-and-bound.
//! - [`dispatch`]: the fixed-capacity cost minimization and a brute-force
//!   dynamic-programming oracle.
//! - [`sizing`]: linear sweep and bisection for the critical capacity.
//!
//! Units are hours, W, Wh and $/Wh throughout.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod battery;
pub mod bounds;
pub mod dispatch;
pub mod feasibility;
pub mod lp;
pub mod scenario;
pub mod sizing;

pub use bounds::BoundsReport;
pub use dispatch::{DispatchError, DispatchProblem, DispatchSolution};
pub use feasibility::{Classification, FeasibilityReport};
pub use scenario::{Scenario, ScenarioError, SystemParams, Tariff, TimeSeries};
pub use sizing::{SizingConfig, SizingError, SizingResult};
