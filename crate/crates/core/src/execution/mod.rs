//! SSYNC rounds: demonic actions, rigid moves, demons and execution traces.

mod demon;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{self, ConfigPhase, Measure};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, Frame, Location, RobotId, Zoom};
use crate::robogram::Robogram;

pub use demon::{
    check_fairness, make_demon, termination_bound, Demon, DemonKind, DemonSpec, ExternalDemon,
    FsyncDemon, RandomFairDemon, RoundRobinDemon, ScriptedDemon, DEFAULT_ZOOM_POOL,
};
pub(crate) use demon::{default_zoom_pool, random_frame};

/// Scale and orientation the demon hands to one activated robot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrameChoice {
    pub zoom: Zoom,
    pub reflect: bool,
}

impl FrameChoice {
    pub fn new(zoom: Zoom, reflect: bool) -> Self {
        FrameChoice { zoom, reflect }
    }

    pub fn identity() -> Self {
        FrameChoice::new(Zoom::one(), false)
    }

    pub fn centered_at(&self, center: Location) -> Frame {
        Frame::new(center, self.zoom.clone(), self.reflect)
    }
}

impl Default for FrameChoice {
    fn default() -> Self {
        FrameChoice::identity()
    }
}

/// One round's worth of demon decisions: the activated robots, each with its
/// frame. Robots without an entry are not activated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DemonicAction {
    frames: BTreeMap<RobotId, FrameChoice>,
}

impl DemonicAction {
    pub fn new() -> Self {
        DemonicAction::default()
    }

    /// Activates nobody.
    pub fn nobody() -> Self {
        DemonicAction::default()
    }

    /// Activates every robot of an `n`-robot configuration with unit frames.
    pub fn all(n: usize) -> Self {
        DemonicAction::activate((0..n).map(RobotId))
    }

    /// Activates `ids` with unit frames.
    pub fn activate<I: IntoIterator<Item = RobotId>>(ids: I) -> Self {
        DemonicAction {
            frames: ids
                .into_iter()
                .map(|id| (id, FrameChoice::identity()))
                .collect(),
        }
    }

    pub fn with_frame(mut self, id: RobotId, frame: FrameChoice) -> Self {
        self.frames.insert(id, frame);
        self
    }

    pub fn insert(&mut self, id: RobotId, frame: FrameChoice) {
        self.frames.insert(id, frame);
    }

    pub fn is_active(&self, id: RobotId) -> bool {
        self.frames.contains_key(&id)
    }

    pub fn frame(&self, id: RobotId) -> Option<&FrameChoice> {
        self.frames.get(&id)
    }

    pub fn activated(&self) -> impl Iterator<Item = RobotId> + '_ {
        self.frames.keys().copied()
    }

    pub fn frames(&self) -> impl Iterator<Item = (RobotId, &FrameChoice)> {
        self.frames.iter().map(|(id, f)| (*id, f))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Every activated id must name a robot of `config`.
    pub fn validate(&self, config: &Configuration) -> Result<()> {
        match self.frames.keys().find(|id| id.0 >= config.len()) {
            Some(id) => Err(Error::MalformedAction(format!(
                "activated robot {id} does not exist ({} robots)",
                config.len()
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ActivatedFrame {
    id: RobotId,
    zoom: Zoom,
    reflect: bool,
}

/// Serialized as a list of `{"id", "zoom", "reflect"}` objects sorted by id.
impl Serialize for DemonicAction {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.frames().map(|(id, f)| ActivatedFrame {
            id,
            zoom: f.zoom.clone(),
            reflect: f.reflect,
        }))
    }
}

impl<'de> Deserialize<'de> for DemonicAction {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<ActivatedFrame>::deserialize(deserializer)?;
        let mut da = DemonicAction::new();
        for entry in entries {
            if da.is_active(entry.id) {
                return Err(serde::de::Error::custom(format!(
                    "robot {} activated twice",
                    entry.id
                )));
            }
            da.insert(entry.id, FrameChoice::new(entry.zoom, entry.reflect));
        }
        Ok(da)
    }
}

/// Look, compute and move for one robot: its destination in the global frame.
pub fn destination<R: Robogram + ?Sized>(
    r: &R,
    config: &Configuration,
    id: RobotId,
    frame: &FrameChoice,
) -> Result<Location> {
    let here = config.position(id)?;
    let frame = frame.centered_at(here.clone());
    let local = frame.map_spectrum(&config.spectrum());
    Ok(frame.unapply(&r.pgm(&local)))
}

/// Result of one round, with what each activated robot computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundOutcome {
    pub result: Configuration,
    pub destinations: BTreeMap<RobotId, Location>,
    pub moving: BTreeSet<RobotId>,
}

/// Applies one atomic round and reports the destination of every activated
/// robot.
pub fn step<R: Robogram + ?Sized>(
    r: &R,
    da: &DemonicAction,
    config: &Configuration,
) -> Result<RoundOutcome> {
    da.validate(config)?;
    let spectrum = config.spectrum();
    let mut positions = config.positions().to_vec();
    let mut destinations = BTreeMap::new();
    let mut moving = BTreeSet::new();
    // Robots on the same tower with the same frame see the same thing.
    let mut seen: BTreeMap<(&Location, &FrameChoice), Location> = BTreeMap::new();
    for (id, choice) in da.frames() {
        let here = &config.positions()[id.0];
        let target = match seen.get(&(here, choice)) {
            Some(t) => t.clone(),
            None => {
                let frame = choice.centered_at(here.clone());
                let t = frame.unapply(&r.pgm(&frame.map_spectrum(&spectrum)));
                seen.insert((here, choice), t.clone());
                t
            }
        };
        if &target != here {
            moving.insert(id);
        }
        positions[id.0] = target.clone();
        destinations.insert(id, target);
    }
    Ok(RoundOutcome {
        result: Configuration::new(positions),
        destinations,
        moving,
    })
}

pub fn round<R: Robogram + ?Sized>(
    r: &R,
    da: &DemonicAction,
    config: &Configuration,
) -> Result<Configuration> {
    step(r, da, config).map(|o| o.result)
}

/// Activated robots whose destination differs from their position.
pub fn moving<R: Robogram + ?Sized>(
    r: &R,
    da: &DemonicAction,
    config: &Configuration,
) -> Result<BTreeSet<RobotId>> {
    step(r, da, config).map(|o| o.moving)
}

// Ord on frame choices only serves the memo table in `step`.
impl PartialOrd for FrameChoice {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FrameChoice {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.zoom, self.reflect).cmp(&(&other.zoom, other.reflect))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub action: DemonicAction,
    pub result: Configuration,
    pub moving: BTreeSet<RobotId>,
    pub measure: Measure,
    pub phase: ConfigPhase,
    pub forbidden: bool,
}

impl TraceStep {
    /// Annotates the round from `before` under `action`.
    pub fn compute<R: Robogram + ?Sized>(
        r: &R,
        action: DemonicAction,
        before: &Configuration,
    ) -> Result<Self> {
        let outcome = step(r, &action, before)?;
        let measure = analysis::measure(&outcome.result)?;
        Ok(TraceStep {
            action,
            forbidden: analysis::forbidden(&outcome.result),
            phase: measure.phase,
            measure,
            moving: outcome.moving,
            result: outcome.result,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TraceStatus {
    /// Gathered at `at` and confirmed as a fixed point.
    Gathered {
        at: Location,
    },
    MaxRounds,
    /// The demon stopped supplying actions.
    Aborted,
}

impl TraceStatus {
    pub fn is_gathered(&self) -> bool {
        matches!(self, TraceStatus::Gathered { .. })
    }
}

/// A finite prefix of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub robogram: String,
    pub demon: DemonKind,
    pub fairness_bound: Option<usize>,
    pub seed: Option<u64>,
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
}

impl Trace {
    pub fn final_configuration(&self) -> &Configuration {
        self.steps
            .last()
            .map(|s| &s.result)
            .unwrap_or(&self.initial)
    }

    pub fn actions(&self) -> impl Iterator<Item = &DemonicAction> {
        self.steps.iter().map(|s| &s.action)
    }

    /// Configurations from the initial one to the last, inclusive.
    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.result))
    }
}

/// Runs `r` against `demon` for at most `max_rounds` rounds.
///
/// Once the configuration is gathered, one all-activated round with unit
/// frames is appended; if it leaves the configuration unchanged the trace
/// ends with [`TraceStatus::Gathered`].
pub fn execute<R: Robogram + ?Sized, D: Demon + ?Sized>(
    r: &R,
    demon: &mut D,
    config: &Configuration,
    max_rounds: usize,
) -> Result<Trace> {
    if config.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let mut trace = Trace {
        robogram: r.name().to_string(),
        demon: demon.kind(),
        fairness_bound: demon.fairness_bound(),
        seed: demon.seed(),
        initial: config.clone(),
        steps: Vec::new(),
        status: TraceStatus::MaxRounds,
    };
    let mut current = config.clone();
    while trace.steps.len() < max_rounds {
        if let Some(at) = analysis::gathered_at(&current) {
            let confirm = TraceStep::compute(r, DemonicAction::all(current.len()), &current)?;
            let fixed = confirm.result == current;
            current = confirm.result.clone();
            trace.steps.push(confirm);
            if fixed {
                trace.status = TraceStatus::Gathered { at };
                return Ok(trace);
            }
            continue;
        }
        let Some(action) = demon.next_action(trace.steps.len(), &current) else {
            trace.status = TraceStatus::Aborted;
            return Ok(trace);
        };
        let next = TraceStep::compute(r, action, &current)?;
        current = next.result.clone();
        trace.steps.push(next);
    }
    Ok(trace)
}
