//! Exhaustive check of every property on small instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    fixed_point_case, never_forbidden_case, progress_case, round_decrease_case,
    same_destination_case, CaseOutcome, Counterexample, Property,
};
use super::{forbidden, gathered_at};
use crate::error::{Error, Result};
use crate::execution::{DemonicAction, FrameChoice};
use crate::geometry::{Configuration, Location, RobotId, Zoom};
use crate::robogram::Robogram;

/// Upper bound on the number of configurations `enumerate_small` will visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Frames every activated robot may receive: unit, or zoom 2 reflected.
pub fn frame_pool() -> [FrameChoice; 2] {
    [
        FrameChoice::identity(),
        FrameChoice::new(Zoom::ratio(2, 1).expect("positive"), true),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub robots: usize,
    pub grid: Vec<Location>,
    pub configurations: u64,
    pub forbidden_starts: u64,
    pub gathered_starts: u64,
    /// (configuration, action) pairs examined.
    pub cases: u64,
    pub violations: u64,
    pub first_violation: Option<Counterexample>,
}

impl EnumerationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Every well-formed action on `n` robots over the frame pool: each subset,
/// and each way of handing pool frames to its members (`3^n` in total).
fn all_actions(n: usize) -> Vec<DemonicAction> {
    let pool = frame_pool();
    let mut actions = vec![DemonicAction::nobody()];
    for i in 0..n {
        let mut next = Vec::with_capacity(actions.len() * 3);
        for da in &actions {
            next.push(da.clone());
            for frame in &pool {
                next.push(da.clone().with_frame(RobotId(i), frame.clone()));
            }
        }
        actions = next;
    }
    actions
}

fn decode(mut index: u64, n: usize, grid: &[Location]) -> Configuration {
    let g = grid.len() as u64;
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        positions.push(grid[(index % g) as usize].clone());
        index /= g;
    }
    Configuration::new(positions)
}

#[derive(Default)]
struct Tally {
    forbidden_starts: u64,
    gathered_starts: u64,
    cases: u64,
    violations: u64,
    first: Option<Counterexample>,
}

impl Tally {
    fn record(
        &mut self,
        property: Property,
        index: u64,
        config: &Configuration,
        action: &DemonicAction,
        outcome: CaseOutcome,
    ) {
        if let CaseOutcome::Fail(detail) = outcome {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(Counterexample {
                    property,
                    case: index,
                    config: config.clone(),
                    action: action.clone(),
                    alternate: None,
                    detail,
                });
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.forbidden_starts += other.forbidden_starts;
        self.gathered_starts += other.gathered_starts;
        self.cases += other.cases;
        self.violations += other.violations;
        if self.first.is_none() {
            self.first = other.first;
        }
        self
    }
}

/// Visits every configuration of `n` robots over `grid` (as maps from ids to
/// grid points) and every action of [`all_actions`].
///
/// Bivalent starts are only checked for being fixed points; every other start
/// is checked for same destination, never forbidden, measure decrease,
/// progress, and (if gathered) being a fixed point.
pub fn enumerate_small<R: Robogram + ?Sized>(
    r: &R,
    n: usize,
    grid: &[Location],
    budget: u128,
) -> Result<EnumerationReport> {
    let mut grid = grid.to_vec();
    grid.sort();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    if n == 0 {
        return Err(Error::EmptyConfiguration);
    }
    let configurations = (grid.len() as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if configurations > budget || configurations > u64::MAX as u128 {
        return Err(Error::BudgetExceeded {
            configurations,
            budget,
        });
    }
    let actions = all_actions(n);

    let tally = (0..configurations as u64)
        .into_par_iter()
        .map(|index| {
            let config = decode(index, n, &grid);
            let mut t = Tally::default();
            let is_forbidden = forbidden(&config);
            let is_gathered = gathered_at(&config).is_some();
            t.forbidden_starts += is_forbidden as u64;
            t.gathered_starts += is_gathered as u64;
            let fsync = DemonicAction::all(n);
            t.record(
                Property::Progress,
                index,
                &config,
                &fsync,
                progress_case(r, &config),
            );
            for da in &actions {
                t.cases += 1;
                if is_forbidden || is_gathered {
                    t.record(
                        Property::FixedPoint,
                        index,
                        &config,
                        da,
                        fixed_point_case(r, &config, da),
                    );
                }
                if is_forbidden {
                    continue;
                }
                t.record(
                    Property::SameDestination,
                    index,
                    &config,
                    da,
                    same_destination_case(r, &config, da),
                );
                t.record(
                    Property::NeverForbidden,
                    index,
                    &config,
                    da,
                    never_forbidden_case(r, &config, da),
                );
                t.record(
                    Property::RoundDecrease,
                    index,
                    &config,
                    da,
                    round_decrease_case(r, &config, da),
                );
            }
            t
        })
        .reduce(Tally::default, Tally::merge);

    Ok(EnumerationReport {
        robots: n,
        grid,
        configurations: configurations as u64,
        forbidden_starts: tally.forbidden_starts,
        gathered_starts: tally.gathered_starts,
        cases: tally.cases,
        violations: tally.violations,
        first_violation: tally.first,
    })
}
