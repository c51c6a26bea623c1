//! Correctness predicates, the termination measure, and property checkers.
//!
//! The measure `(phase, count)` is computed on configurations:
//!
//! | phase | when                                   | count: robots not at        |
//! |-------|----------------------------------------|-----------------------------|
//! | 0     | gathered                               | (always 0)                  |
//! | 1     | unique tower of maximal multiplicity   | that tower                  |
//! | 2     | exactly three towers                   | the middle tower            |
//! | 3     | otherwise                              | either extremity or center  |
//!
//! Measures compare lexicographically. A bivalent configuration lands in
//! phase 3 with count 0; it is a fixed point so nothing needs to decrease.

mod checks;
mod enumerate;
mod generate;
mod mutants;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Location};
use crate::robogram::{extreme_center, middle_of_three, smax_support};

pub use checks::{
    check_frame_invariance, check_never_forbidden, check_round_decrease, check_same_destination,
    fixed_point_case, frame_invariance_case, never_forbidden_case, progress_case,
    round_decrease_case, run_suite, same_destination_case, CaseOutcome, CheckOptions, CheckReport,
    Counterexample, Property, Verdict,
};
pub use enumerate::{enumerate_small, frame_pool, EnumerationReport, DEFAULT_ENUMERATION_BUDGET};
pub use generate::CaseGenerator;
pub use mutants::{robogram_by_name, GoToMax, GoToMin, OwnPositionPlusOne, MUTANT_NAMES};

/// Configuration-level phase; the first component of the measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigPhase {
    Gathered,
    UniqueMax,
    ThreeTowers,
    CenterMove,
}

impl ConfigPhase {
    pub fn number(self) -> u8 {
        match self {
            ConfigPhase::Gathered => 0,
            ConfigPhase::UniqueMax => 1,
            ConfigPhase::ThreeTowers => 2,
            ConfigPhase::CenterMove => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Some(match n {
            0 => ConfigPhase::Gathered,
            1 => ConfigPhase::UniqueMax,
            2 => ConfigPhase::ThreeTowers,
            3 => ConfigPhase::CenterMove,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            ConfigPhase::Gathered => "gathered",
            ConfigPhase::UniqueMax => "unique-max",
            ConfigPhase::ThreeTowers => "three-towers",
            ConfigPhase::CenterMove => "center-move",
        }
    }
}

impl fmt::Display for ConfigPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Termination witness, ordered lexicographically (phase first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "(u8, usize)", try_from = "(u8, usize)")]
pub struct Measure {
    pub phase: ConfigPhase,
    pub count: usize,
}

impl Measure {
    pub fn new(phase: ConfigPhase, count: usize) -> Self {
        Measure { phase, count }
    }
}

impl From<Measure> for (u8, usize) {
    fn from(m: Measure) -> Self {
        (m.phase.number(), m.count)
    }
}

impl TryFrom<(u8, usize)> for Measure {
    type Error = String;

    fn try_from((p, c): (u8, usize)) -> std::result::Result<Self, String> {
        ConfigPhase::from_number(p)
            .map(|phase| Measure::new(phase, c))
            .ok_or_else(|| format!("phase {p} out of range"))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.phase.number(), self.count)
    }
}

/// Bivalent: exactly two towers of equal multiplicity.
pub fn forbidden(config: &Configuration) -> bool {
    let spectrum = config.spectrum();
    let mut towers = spectrum.towers();
    match (towers.next(), towers.next(), towers.next()) {
        (Some((_, a)), Some((_, b)), None) => a == b,
        _ => false,
    }
}

/// `Some(pt)` iff every robot is at `pt`. Empty configurations are not
/// gathered.
pub fn gathered_at(config: &Configuration) -> Option<Location> {
    let (first, rest) = config.positions().split_first()?;
    rest.iter().all(|l| l == first).then(|| first.clone())
}

pub fn phase_of(config: &Configuration) -> Result<ConfigPhase> {
    measure(config).map(|m| m.phase)
}

pub fn measure(config: &Configuration) -> Result<Measure> {
    if config.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    if gathered_at(config).is_some() {
        return Ok(Measure::new(ConfigPhase::Gathered, 0));
    }
    let n = config.len();
    let spectrum = config.spectrum();
    let smax = smax_support(&spectrum);
    if let [top] = smax.as_slice() {
        return Ok(Measure::new(
            ConfigPhase::UniqueMax,
            n - spectrum.multiplicity(top),
        ));
    }
    if spectrum.tower_count() == 3 {
        let middle = middle_of_three(&spectrum)?;
        return Ok(Measure::new(
            ConfigPhase::ThreeTowers,
            n - spectrum.multiplicity(&middle),
        ));
    }
    // At least two towers here, so min < center < max.
    let lo = spectrum.min().expect("nonempty");
    let hi = spectrum.max().expect("nonempty");
    let center = extreme_center(&spectrum)?;
    let placed =
        spectrum.multiplicity(lo) + spectrum.multiplicity(hi) + spectrum.multiplicity(&center);
    Ok(Measure::new(ConfigPhase::CenterMove, n - placed))
}

/// `measure(c1) < measure(c2)`.
pub fn lt_conf(c1: &Configuration, c2: &Configuration) -> Result<bool> {
    Ok(measure(c1)? < measure(c2)?)
}
