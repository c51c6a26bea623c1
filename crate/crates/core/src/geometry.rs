//! Exact positions on the real line, configurations, spectra and robot frames.
//!
//! Every quantity is an exact rational: gathering is decided by equality of
//! locations, so there is no tolerance anywhere in this crate.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point of the real line, stored as a reduced fraction with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Location(BigRational);

impl Location {
    pub fn zero() -> Self {
        Location(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Location(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Location(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(value: BigRational) -> Self {
        Location(value)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Exact midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Location) -> Location {
        Location((&self.0 + &other.0) / BigRational::from_integer(BigInt::from(2)))
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_ratio(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidRational(text.to_string());
    let trimmed = text.trim();
    let (negative, body) = if let Some(rest) = trimmed.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = trimmed.strip_prefix('\u{2212}') {
        (true, rest)
    } else {
        (false, trimmed)
    };
    let digits = |s: &str| -> Result<BigInt> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (digits(n)?, digits(d)?),
        None => (digits(body)?, BigInt::one()),
    };
    if den.is_zero() {
        return Err(bad());
    }
    let value = BigRational::new(num, den);
    Ok(if negative { -value } else { value })
}

impl FromStr for Location {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_ratio(s).map(Location)
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Location {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for &Location {
    type Output = Location;
    fn add(self, rhs: &Location) -> Location {
        Location(&self.0 + &rhs.0)
    }
}

impl Sub for &Location {
    type Output = Location;
    fn sub(self, rhs: &Location) -> Location {
        Location(&self.0 - &rhs.0)
    }
}

impl Neg for &Location {
    type Output = Location;
    fn neg(self) -> Location {
        Location(-&self.0)
    }
}

impl Neg for Location {
    type Output = Location;
    fn neg(self) -> Location {
        Location(-self.0)
    }
}

/// Strictly positive scale factor of a frame.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Zoom(BigRational);

impl Zoom {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_positive() {
            Ok(Zoom(value))
        } else {
            Err(Error::NonPositiveZoom(Location(value).to_string()))
        }
    }

    pub fn one() -> Self {
        Zoom(BigRational::one())
    }

    /// `num / den`; fails unless the quotient is strictly positive.
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRational(format!("{num}/{den}")));
        }
        Zoom::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Zoom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Location(self.0.clone()), f)
    }
}

impl fmt::Debug for Zoom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Zoom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Zoom::new(parse_ratio(s)?)
    }
}

impl Serialize for Zoom {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Zoom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Index of a robot inside a configuration. Only the simulator looks at it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub usize);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl fmt::Debug for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Position of every robot, indexed by `RobotId` in `0..len()`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    positions: Vec<Location>,
}

impl Configuration {
    pub fn new(positions: Vec<Location>) -> Self {
        Configuration { positions }
    }

    /// Expands `(location, multiplicity)` pairs into robots, assigning ids
    /// left to right along the line.
    pub fn from_towers<'a, I>(towers: I) -> Self
    where
        I: IntoIterator<Item = &'a (Location, usize)>,
    {
        let mut positions: Vec<Location> = towers
            .into_iter()
            .flat_map(|(loc, count)| std::iter::repeat_n(loc.clone(), *count))
            .collect();
        positions.sort();
        Configuration { positions }
    }

    /// Parses the `loc:multiplicity,...` syntax. A bare `loc` counts once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut towers = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            if item.is_empty() {
                return Err(Error::InvalidConfiguration(format!(
                    "empty item in {text:?}"
                )));
            }
            let (loc, count) = match item.split_once(':') {
                Some((loc, count)) => {
                    let count = count.trim().parse::<usize>().map_err(|_| {
                        Error::InvalidConfiguration(format!("bad multiplicity in {item:?}"))
                    })?;
                    (loc.parse::<Location>()?, count)
                }
                None => (item.parse::<Location>()?, 1),
            };
            if count == 0 {
                return Err(Error::InvalidConfiguration(format!(
                    "zero multiplicity in {item:?}"
                )));
            }
            towers.push((loc, count));
        }
        Ok(Configuration::from_towers(&towers))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn get(&self, id: RobotId) -> Option<&Location> {
        self.positions.get(id.0)
    }

    pub fn position(&self, id: RobotId) -> Result<&Location> {
        self.get(id).ok_or(Error::UnknownRobot {
            id,
            robots: self.len(),
        })
    }

    pub fn positions(&self) -> &[Location] {
        &self.positions
    }

    pub fn ids(&self) -> impl Iterator<Item = RobotId> {
        (0..self.positions.len()).map(RobotId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (RobotId, &Location)> {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, l)| (RobotId(i), l))
    }

    pub fn spectrum(&self) -> Spectrum {
        spectrum_of(self)
    }
}

impl fmt::Display for Configuration {
    /// Multiset syntax, sorted by location; ids are not shown.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.spectrum(), f)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.positions).finish()
    }
}

/// A multiset of locations: what a robot with strong global multiplicity
/// detection perceives.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Spectrum {
    towers: BTreeMap<Location, usize>,
}

impl Spectrum {
    pub fn new() -> Self {
        Spectrum::default()
    }

    /// Adds `count` robots at `loc`. Zero counts are ignored.
    pub fn add(&mut self, loc: Location, count: usize) {
        if count > 0 {
            *self.towers.entry(loc).or_insert(0) += count;
        }
    }

    pub fn from_towers<I>(towers: I) -> Self
    where
        I: IntoIterator<Item = (Location, usize)>,
    {
        let mut spectrum = Spectrum::new();
        for (loc, count) in towers {
            spectrum.add(loc, count);
        }
        spectrum
    }

    /// Multiplicity of `loc`; zero when uninhabited.
    pub fn multiplicity(&self, loc: &Location) -> usize {
        self.towers.get(loc).copied().unwrap_or(0)
    }

    /// Inhabited locations in strictly increasing order.
    pub fn support(&self) -> Vec<Location> {
        self.towers.keys().cloned().collect()
    }

    /// Number of inhabited locations.
    pub fn tower_count(&self) -> usize {
        self.towers.len()
    }

    /// Total multiplicity.
    pub fn robot_count(&self) -> usize {
        self.towers.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.towers.is_empty()
    }

    pub fn min(&self) -> Option<&Location> {
        self.towers.keys().next()
    }

    pub fn max(&self) -> Option<&Location> {
        self.towers.keys().next_back()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.towers.values().copied().max().unwrap_or(0)
    }

    /// `(location, multiplicity)` in increasing location order.
    pub fn towers(
        &self,
    ) -> impl DoubleEndedIterator<Item = (&Location, usize)> + ExactSizeIterator {
        self.towers.iter().map(|(l, c)| (l, *c))
    }
}

impl FromIterator<Location> for Spectrum {
    fn from_iter<I: IntoIterator<Item = Location>>(iter: I) -> Self {
        Spectrum::from_towers(iter.into_iter().map(|l| (l, 1)))
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (loc, count)) in self.towers().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{loc}:{count}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Spectrum of a configuration in the global frame.
pub fn spectrum_of(config: &Configuration) -> Spectrum {
    let mut spectrum = Spectrum::new();
    for loc in config.positions() {
        spectrum.add(loc.clone(), 1);
    }
    spectrum
}

pub fn multiplicity(spec: &Spectrum, loc: &Location) -> usize {
    spec.multiplicity(loc)
}

pub fn support(spec: &Spectrum) -> Vec<Location> {
    spec.support()
}

/// A robot's private coordinate system: the observer sits at the origin and
/// the demon picks the unit length and the orientation of the line.
///
/// The forward map is `x ↦ k·(x − center)` where `k = zoom`, or `k = −zoom`
/// when `reflect` is set.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Frame {
    pub center: Location,
    pub zoom: Zoom,
    pub reflect: bool,
}

impl Frame {
    pub fn new(center: Location, zoom: Zoom, reflect: bool) -> Self {
        Frame {
            center,
            zoom,
            reflect,
        }
    }

    /// Unit, unreflected frame centred on `center`.
    pub fn centered(center: Location) -> Self {
        Frame::new(center, Zoom::one(), false)
    }

    fn factor(&self) -> BigRational {
        if self.reflect {
            -self.zoom.as_ratio()
        } else {
            self.zoom.as_ratio().clone()
        }
    }

    pub fn apply(&self, loc: &Location) -> Location {
        Location((&loc.0 - &self.center.0) * self.factor())
    }

    pub fn unapply(&self, loc: &Location) -> Location {
        Location(&loc.0 / self.factor() + &self.center.0)
    }

    /// Pointwise image of a spectrum; multiplicities are carried over.
    pub fn map_spectrum(&self, spec: &Spectrum) -> Spectrum {
        let factor = self.factor();
        Spectrum::from_towers(
            spec.towers()
                .map(|(loc, count)| (Location((&loc.0 - &self.center.0) * &factor), count)),
        )
    }
}

pub fn apply_frame(f: &Frame, loc: &Location) -> Location {
    f.apply(loc)
}

pub fn unapply_frame(f: &Frame, loc: &Location) -> Location {
    f.unapply(loc)
}

pub fn map_spectrum(f: &Frame, spec: &Spectrum) -> Spectrum {
    f.map_spectrum(spec)
}
