//! Robograms: the program every robot runs on its local spectrum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Location, Spectrum};

/// A deterministic map from a local spectrum to a destination in the same
/// local frame.
///
/// Implementations only ever see a `Spectrum`, which is a canonical multiset,
/// so equal spectra always produce equal destinations and robot identifiers
/// are out of reach.
pub trait Robogram: Send + Sync {
    fn name(&self) -> &str;

    fn pgm(&self, spec: &Spectrum) -> Location;
}

impl<R: Robogram + ?Sized> Robogram for &R {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn pgm(&self, spec: &Spectrum) -> Location {
        (**self).pgm(spec)
    }
}

impl<R: Robogram + ?Sized> Robogram for Box<R> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn pgm(&self, spec: &Spectrum) -> Location {
        (**self).pgm(spec)
    }
}

/// Which branch of the gathering robogram fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseTag {
    /// A unique tower of maximal multiplicity: go there.
    UniqueMax,
    /// Exactly three inhabited locations: go to the middle one.
    ThreeTowers,
    /// Not on an extremity: go to the midpoint of the extremities.
    CenterMove,
    /// On an extremity: stay.
    Stay,
    /// Empty spectrum.
    NoRobot,
}

impl PhaseTag {
    pub fn label(self) -> &'static str {
        match self {
            PhaseTag::UniqueMax => "unique-max",
            PhaseTag::ThreeTowers => "three-towers",
            PhaseTag::CenterMove => "center-move",
            PhaseTag::Stay => "stay",
            PhaseTag::NoRobot => "no-robot",
        }
    }
}

impl fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Locations of maximal multiplicity, sorted.
pub fn smax_support(spec: &Spectrum) -> Vec<Location> {
    let max = spec.max_multiplicity();
    spec.towers()
        .filter(|&(_, count)| count == max)
        .map(|(loc, _)| loc.clone())
        .collect()
}

/// Midpoint of the leftmost and rightmost inhabited locations.
pub fn extreme_center(spec: &Spectrum) -> Result<Location> {
    match (spec.min(), spec.max()) {
        (Some(lo), Some(hi)) => Ok(lo.midpoint(hi)),
        _ => Err(Error::EmptySpectrum),
    }
}

pub fn is_extremal(loc: &Location, spec: &Spectrum) -> Result<bool> {
    match (spec.min(), spec.max()) {
        (Some(lo), Some(hi)) => Ok(loc == lo || loc == hi),
        _ => Err(Error::EmptySpectrum),
    }
}

/// The inner location of a three-tower spectrum.
pub fn middle_of_three(spec: &Spectrum) -> Result<Location> {
    if spec.tower_count() != 3 {
        return Err(Error::NotThreeTowers(spec.tower_count()));
    }
    Ok(spec
        .towers()
        .nth(1)
        .map(|(loc, _)| loc.clone())
        .expect("three towers"))
}

/// Branch taken by a robot sitting at `origin` when every location of `spec`
/// is expressed in the same frame as `origin`.
pub fn classify_phase(spec: &Spectrum, origin: &Location) -> PhaseTag {
    if spec.is_empty() {
        return PhaseTag::NoRobot;
    }
    if smax_support(spec).len() == 1 {
        PhaseTag::UniqueMax
    } else if spec.tower_count() == 3 {
        PhaseTag::ThreeTowers
    } else if is_extremal(origin, spec).expect("nonempty") {
        PhaseTag::Stay
    } else {
        PhaseTag::CenterMove
    }
}

/// The gathering program on a local spectrum (observer at the origin).
pub fn gathering_pgm(spec: &Spectrum) -> Location {
    match classify_phase(spec, &Location::zero()) {
        PhaseTag::NoRobot | PhaseTag::Stay => Location::zero(),
        PhaseTag::UniqueMax => smax_support(spec).swap_remove(0),
        PhaseTag::ThreeTowers => middle_of_three(spec).expect("three towers"),
        PhaseTag::CenterMove => extreme_center(spec).expect("nonempty"),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GatheringRobogram;

impl Robogram for GatheringRobogram {
    fn name(&self) -> &str {
        "gathering"
    }

    fn pgm(&self, spec: &Spectrum) -> Location {
        gathering_pgm(spec)
    }
}
