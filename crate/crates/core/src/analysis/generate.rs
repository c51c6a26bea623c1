use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use super::forbidden;
use crate::execution::{default_zoom_pool, random_frame, DemonicAction, FrameChoice};
use crate::geometry::{Configuration, Location, RobotId, Zoom};

/// Random non-bivalent configurations and random actions.
///
/// Locations come from a coarse rational grid and robots are dealt onto a
/// handful of sites, so towers of every height show up often.
#[derive(Clone, Debug)]
pub struct CaseGenerator {
    pub robots: RangeInclusive<usize>,
    pub numerators: RangeInclusive<i64>,
    pub denominators: Vec<i64>,
    pub zoom_pool: Vec<Zoom>,
}

impl Default for CaseGenerator {
    fn default() -> Self {
        CaseGenerator {
            robots: 3..=20,
            numerators: -12..=12,
            denominators: vec![1, 2, 3],
            zoom_pool: default_zoom_pool(),
        }
    }
}

impl CaseGenerator {
    fn grid_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Location {
        let num = rng.gen_range(self.numerators.clone());
        let den = *self.denominators.choose(rng).unwrap_or(&1);
        Location::new(num, den)
    }

    /// Any configuration over the grid, bivalent or not.
    pub fn any_configuration<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let n = rng.gen_range(self.robots.clone());
        if n == 0 {
            return Configuration::default();
        }
        let sites = if n >= 2 && rng.gen_bool(0.5) {
            rng.gen_range(2..=n.min(4))
        } else {
            rng.gen_range(1..=n)
        };
        let grid: Vec<Location> = (0..sites).map(|_| self.grid_point(rng)).collect();
        let positions = (0..n)
            .map(|_| grid.choose(rng).expect("nonempty").clone())
            .collect();
        Configuration::new(positions)
    }

    /// A non-bivalent configuration; bivalent draws are resampled.
    pub fn configuration<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        loop {
            let config = self.any_configuration(rng);
            if !forbidden(&config) {
                return config;
            }
        }
    }

    pub fn frame<R: Rng + ?Sized>(&self, rng: &mut R) -> FrameChoice {
        random_frame(rng, &self.zoom_pool)
    }

    /// Random activation subset with random frames.
    pub fn action<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> DemonicAction {
        let density: f64 = rng.gen();
        let mut da = DemonicAction::new();
        for i in 0..n {
            if rng.gen_bool(density) {
                da.insert(RobotId(i), self.frame(rng));
            }
        }
        da
    }

    /// Same activation set as `da`, fresh frames.
    pub fn reframe<R: Rng + ?Sized>(&self, rng: &mut R, da: &DemonicAction) -> DemonicAction {
        let mut other = DemonicAction::new();
        for id in da.activated() {
            other.insert(id, self.frame(rng));
        }
        other
    }
}
