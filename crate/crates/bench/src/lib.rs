//! Fixtures shared by the benchmarks.

use gatherline_core::execution::DemonicAction;
use gatherline_core::geometry::{Configuration, Location, RobotId};

/// `n` robots on distinct integer sites, with one extra robot stacked on
/// each end so that no tower is a unique maximum.
pub fn spread(n: usize) -> Configuration {
    let mut positions: Vec<Location> = (0..n as i64).map(Location::from_integer).collect();
    if n >= 2 {
        positions.push(Location::zero());
        positions.push(Location::from_integer(n as i64 - 1));
    }
    Configuration::new(positions)
}

/// Every other robot, with unit frames.
pub fn half(n: usize) -> DemonicAction {
    DemonicAction::activate((0..n).step_by(2).map(RobotId))
}
