//! Deliberately wrong robograms, used to show the checkers can fail.

use crate::error::{Error, Result};
use crate::geometry::{Location, Spectrum};
use crate::robogram::{GatheringRobogram, Robogram};

pub const MUTANT_NAMES: [&str; 3] = ["go-to-min", "go-to-max", "own-plus-one"];

/// Walks to the leftmost tower of its own frame.
#[derive(Clone, Copy, Debug, Default)]
pub struct GoToMin;

impl Robogram for GoToMin {
    fn name(&self) -> &str {
        "go-to-min"
    }

    fn pgm(&self, spec: &Spectrum) -> Location {
        spec.min().cloned().unwrap_or_else(Location::zero)
    }
}

/// Walks to the rightmost tower of its own frame.
#[derive(Clone, Copy, Debug, Default)]
pub struct GoToMax;

impl Robogram for GoToMax {
    fn name(&self) -> &str {
        "go-to-max"
    }

    fn pgm(&self, spec: &Spectrum) -> Location {
        spec.max().cloned().unwrap_or_else(Location::zero)
    }
}

/// Always steps one local unit forward.
#[derive(Clone, Copy, Debug, Default)]
pub struct OwnPositionPlusOne;

impl Robogram for OwnPositionPlusOne {
    fn name(&self) -> &str {
        "own-plus-one"
    }

    fn pgm(&self, _spec: &Spectrum) -> Location {
        Location::from_integer(1)
    }
}

/// `gathering` or one of [`MUTANT_NAMES`].
pub fn robogram_by_name(name: &str) -> Result<Box<dyn Robogram>> {
    Ok(match name {
        "gathering" => Box::new(GatheringRobogram),
        "go-to-min" => Box::new(GoToMin),
        "go-to-max" => Box::new(GoToMax),
        "own-plus-one" => Box::new(OwnPositionPlusOne),
        other => return Err(Error::UnknownRobogram(other.to_string())),
    })
}
