use std::collections::VecDeque;
use std::fmt;
use std::sync::mpsc::Receiver;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DemonicAction, FrameChoice};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, RobotId, Zoom};

/// Zooms drawn by randomized demons unless another pool is given.
pub const DEFAULT_ZOOM_POOL: [(i64, i64); 5] = [(1, 3), (1, 2), (1, 1), (2, 1), (3, 1)];

pub(crate) fn default_zoom_pool() -> Vec<Zoom> {
    DEFAULT_ZOOM_POOL
        .iter()
        .map(|&(n, d)| Zoom::ratio(n, d).expect("positive"))
        .collect()
}

pub(crate) fn random_frame<R: Rng + ?Sized>(rng: &mut R, pool: &[Zoom]) -> FrameChoice {
    let zoom = pool.choose(rng).cloned().unwrap_or_else(Zoom::one);
    FrameChoice::new(zoom, rng.gen_bool(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemonKind {
    Fsync,
    RoundRobin,
    RandomFair,
    Scripted,
    External,
}

impl DemonKind {
    pub fn label(self) -> &'static str {
        match self {
            DemonKind::Fsync => "fsync",
            DemonKind::RoundRobin => "round-robin",
            DemonKind::RandomFair => "random-fair",
            DemonKind::Scripted => "scripted",
            DemonKind::External => "external",
        }
    }
}

impl fmt::Display for DemonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The adversary: picks who is activated each round, and with which frame.
pub trait Demon {
    fn kind(&self) -> DemonKind;

    /// `Some(k)` if every robot is activated at least once in any `k`
    /// consecutive actions.
    fn fairness_bound(&self) -> Option<usize> {
        None
    }

    fn seed(&self) -> Option<u64> {
        None
    }

    /// Action for round `round` on `config`, or `None` once the demon has
    /// nothing left to play.
    fn next_action(&mut self, round: usize, config: &Configuration) -> Option<DemonicAction>;
}

impl<D: Demon + ?Sized> Demon for Box<D> {
    fn kind(&self) -> DemonKind {
        (**self).kind()
    }
    fn fairness_bound(&self) -> Option<usize> {
        (**self).fairness_bound()
    }
    fn seed(&self) -> Option<u64> {
        (**self).seed()
    }
    fn next_action(&mut self, round: usize, config: &Configuration) -> Option<DemonicAction> {
        (**self).next_action(round, config)
    }
}

/// Activates everybody every round.
#[derive(Debug, Clone, Default)]
pub struct FsyncDemon {
    frames: Option<(u64, ChaCha8Rng, Vec<Zoom>)>,
}

impl FsyncDemon {
    /// Unit frames for everybody.
    pub fn new() -> Self {
        FsyncDemon { frames: None }
    }

    /// Random frames drawn from the default zoom pool.
    pub fn with_random_frames(seed: u64) -> Self {
        FsyncDemon {
            frames: Some((seed, ChaCha8Rng::seed_from_u64(seed), default_zoom_pool())),
        }
    }
}

impl Demon for FsyncDemon {
    fn kind(&self) -> DemonKind {
        DemonKind::Fsync
    }

    fn fairness_bound(&self) -> Option<usize> {
        Some(1)
    }

    fn seed(&self) -> Option<u64> {
        self.frames.as_ref().map(|(seed, _, _)| *seed)
    }

    fn next_action(&mut self, _round: usize, config: &Configuration) -> Option<DemonicAction> {
        Some(match &mut self.frames {
            None => DemonicAction::all(config.len()),
            Some((_, rng, pool)) => {
                let mut da = DemonicAction::new();
                for id in config.ids() {
                    da.insert(id, random_frame(rng, pool));
                }
                da
            }
        })
    }
}

/// Cycles through at most `k` consecutive blocks of `⌈n/k⌉` robots.
#[derive(Debug, Clone)]
pub struct RoundRobinDemon {
    k: usize,
}

impl RoundRobinDemon {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroFairnessBound);
        }
        Ok(RoundRobinDemon { k })
    }
}

impl Demon for RoundRobinDemon {
    fn kind(&self) -> DemonKind {
        DemonKind::RoundRobin
    }

    fn fairness_bound(&self) -> Option<usize> {
        Some(self.k)
    }

    fn next_action(&mut self, round: usize, config: &Configuration) -> Option<DemonicAction> {
        let n = config.len();
        if n == 0 {
            return Some(DemonicAction::nobody());
        }
        let block = n.div_ceil(self.k);
        let blocks = n.div_ceil(block);
        let start = (round % blocks) * block;
        Some(DemonicAction::activate(
            (start..(start + block).min(n)).map(RobotId),
        ))
    }
}

/// Random subsets and random frames, but a robot left idle for `k − 1`
/// rounds is always activated in the next one.
#[derive(Debug, Clone)]
pub struct RandomFairDemon {
    seed: u64,
    k: usize,
    rng: ChaCha8Rng,
    zoom_pool: Vec<Zoom>,
    idle: Vec<usize>,
}

impl RandomFairDemon {
    pub fn new(seed: u64, k: usize) -> Result<Self> {
        RandomFairDemon::with_zoom_pool(seed, k, default_zoom_pool())
    }

    pub fn with_zoom_pool(seed: u64, k: usize, zoom_pool: Vec<Zoom>) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroFairnessBound);
        }
        Ok(RandomFairDemon {
            seed,
            k,
            rng: ChaCha8Rng::seed_from_u64(seed),
            zoom_pool,
            idle: Vec::new(),
        })
    }
}

impl Demon for RandomFairDemon {
    fn kind(&self) -> DemonKind {
        DemonKind::RandomFair
    }

    fn fairness_bound(&self) -> Option<usize> {
        Some(self.k)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn next_action(&mut self, _round: usize, config: &Configuration) -> Option<DemonicAction> {
        self.idle.resize(config.len(), 0);
        let mut da = DemonicAction::new();
        for (i, idle) in self.idle.iter_mut().enumerate() {
            let pick = self.rng.gen_bool(0.5);
            let frame = random_frame(&mut self.rng, &self.zoom_pool);
            if pick || *idle + 1 >= self.k {
                da.insert(RobotId(i), frame);
                *idle = 0;
            } else {
                *idle += 1;
            }
        }
        Some(da)
    }
}

/// Replays a fixed list of actions, then stops.
#[derive(Debug, Clone, Default)]
pub struct ScriptedDemon {
    actions: VecDeque<DemonicAction>,
}

impl ScriptedDemon {
    pub fn new(actions: Vec<DemonicAction>) -> Self {
        ScriptedDemon {
            actions: actions.into(),
        }
    }
}

impl Demon for ScriptedDemon {
    fn kind(&self) -> DemonKind {
        DemonKind::Scripted
    }

    fn next_action(&mut self, _round: usize, _config: &Configuration) -> Option<DemonicAction> {
        self.actions.pop_front()
    }
}

/// Blocks on a channel fed by an outside agent; stops when the sender hangs
/// up.
#[derive(Debug)]
pub struct ExternalDemon {
    rx: Receiver<DemonicAction>,
}

impl ExternalDemon {
    pub fn new(rx: Receiver<DemonicAction>) -> Self {
        ExternalDemon { rx }
    }
}

impl Demon for ExternalDemon {
    fn kind(&self) -> DemonKind {
        DemonKind::External
    }

    fn next_action(&mut self, _round: usize, _config: &Configuration) -> Option<DemonicAction> {
        self.rx.recv().ok()
    }
}

pub enum DemonSpec {
    /// `Some(seed)` randomizes frames.
    Fsync {
        random_frames: Option<u64>,
    },
    RoundRobin {
        k: usize,
    },
    RandomFair {
        seed: u64,
        k: usize,
        zoom_pool: Option<Vec<Zoom>>,
    },
    Scripted(Vec<DemonicAction>),
    External(Receiver<DemonicAction>),
}

pub fn make_demon(spec: DemonSpec) -> Result<Box<dyn Demon + Send>> {
    Ok(match spec {
        DemonSpec::Fsync {
            random_frames: None,
        } => Box::new(FsyncDemon::new()),
        DemonSpec::Fsync {
            random_frames: Some(seed),
        } => Box::new(FsyncDemon::with_random_frames(seed)),
        DemonSpec::RoundRobin { k } => Box::new(RoundRobinDemon::new(k)?),
        DemonSpec::RandomFair { seed, k, zoom_pool } => Box::new(RandomFairDemon::with_zoom_pool(
            seed,
            k,
            zoom_pool.unwrap_or_else(default_zoom_pool),
        )?),
        DemonSpec::Scripted(actions) => Box::new(ScriptedDemon::new(actions)),
        DemonSpec::External(rx) => Box::new(ExternalDemon::new(rx)),
    })
}

/// True iff every window of `k` consecutive actions activates all `n` robots.
/// Prefixes shorter than `k` contain no window and pass.
pub fn check_fairness(actions: &[DemonicAction], n: usize, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::ZeroFairnessBound);
    }
    if n == 0 || actions.len() < k {
        return Ok(true);
    }
    let mut hits = vec![0usize; n];
    let mut covered = 0;
    let touch = |hits: &mut [usize], covered: &mut usize, da: &DemonicAction, add: bool| {
        for id in da.activated().filter(|id| id.0 < n) {
            if add {
                if hits[id.0] == 0 {
                    *covered += 1;
                }
                hits[id.0] += 1;
            } else {
                hits[id.0] -= 1;
                if hits[id.0] == 0 {
                    *covered -= 1;
                }
            }
        }
    };
    for (i, da) in actions.iter().enumerate() {
        touch(&mut hits, &mut covered, da, true);
        if i >= k {
            touch(&mut hits, &mut covered, &actions[i - k], false);
        }
        if i + 1 >= k && covered < n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Round budget within which a `k`-fair run from a non-bivalent start
/// gathers and confirms: the measure takes at most `4·(n+1)` values and each
/// window of `k` rounds moves somebody.
pub fn termination_bound(n: usize, k: usize) -> usize {
    4 * (n + 1) * k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn actions<D: Demon>(
        demon: &mut D,
        config: &Configuration,
        rounds: usize,
    ) -> Vec<DemonicAction> {
        (0..rounds)
            .map(|r| demon.next_action(r, config).unwrap())
            .collect()
    }

    fn ids(da: &DemonicAction) -> Vec<usize> {
        da.activated().map(|id| id.0).collect()
    }

    fn three() -> Configuration {
        Configuration::parse("0,1,2").unwrap()
    }

    #[test]
    fn fsync_activates_everybody() {
        let acts = actions(&mut FsyncDemon::new(), &three(), 4);
        assert!(acts.iter().all(|da| ids(da) == vec![0, 1, 2]));
        assert!(acts
            .iter()
            .all(|da| da.frames().all(|(_, f)| *f == FrameChoice::identity())));
        assert!(check_fairness(&acts, 3, 1).unwrap());
    }

    #[test]
    fn round_robin_cycles_blocks() {
        let mut demon = RoundRobinDemon::new(3).unwrap();
        let acts = actions(&mut demon, &three(), 4);
        let seen: Vec<_> = acts.iter().map(ids).collect();
        assert_eq!(seen, vec![vec![0], vec![1], vec![2], vec![0]]);

        let seven = Configuration::parse("0:7").unwrap();
        let acts = actions(&mut RoundRobinDemon::new(3).unwrap(), &seven, 9);
        assert_eq!(ids(&acts[0]), vec![0, 1, 2]);
        assert_eq!(ids(&acts[2]), vec![6]);
        assert!(check_fairness(&acts, 7, 3).unwrap());
    }

    #[test]
    fn round_robin_one_is_fsync() {
        let acts = actions(&mut RoundRobinDemon::new(1).unwrap(), &three(), 5);
        assert!(check_fairness(&acts, 3, 3).unwrap());
        assert!(check_fairness(&acts, 3, 1).unwrap());
    }

    #[test]
    fn random_fair_windows_cover_everybody() {
        let config = Configuration::parse("0:9").unwrap();
        for k in 1..=5 {
            let mut demon = RandomFairDemon::new(42, k).unwrap();
            let acts = actions(&mut demon, &config, 300);
            assert!(check_fairness(&acts, 9, k).unwrap(), "k = {k}");
        }
        let mut demon = RandomFairDemon::new(42, 3).unwrap();
        let acts = actions(&mut demon, &three(), 200);
        assert!(check_fairness(&acts, 3, 3).unwrap());
        // Not everybody every round: the subsets really are random.
        assert!(acts.iter().any(|da| da.len() < 3));
    }

    #[test]
    fn random_fair_is_reproducible() {
        let config = Configuration::parse("0:6").unwrap();
        let a = actions(&mut RandomFairDemon::new(9, 2).unwrap(), &config, 50);
        let b = actions(&mut RandomFairDemon::new(9, 2).unwrap(), &config, 50);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_bound_is_rejected() {
        assert!(matches!(
            make_demon(DemonSpec::RoundRobin { k: 0 }),
            Err(Error::ZeroFairnessBound)
        ));
        assert!(RandomFairDemon::new(1, 0).is_err());
        assert_eq!(check_fairness(&[], 2, 0), Err(Error::ZeroFairnessBound));
    }

    #[test]
    fn unfair_prefix_detected() {
        let acts = vec![DemonicAction::activate([RobotId(0)]); 6];
        assert!(!check_fairness(&acts, 2, 5).unwrap());
        let alternating: Vec<_> = (0..6)
            .map(|i| DemonicAction::activate([RobotId(i % 2)]))
            .collect();
        assert!(check_fairness(&alternating, 2, 2).unwrap());
        assert!(!check_fairness(&alternating, 2, 1).unwrap());
    }

    #[test]
    fn external_demon_stops_when_sender_drops() {
        let (tx, rx) = std::sync::mpsc::channel();
        let mut demon = make_demon(DemonSpec::External(rx)).unwrap();
        tx.send(DemonicAction::all(3)).unwrap();
        drop(tx);
        assert_eq!(demon.next_action(0, &three()), Some(DemonicAction::all(3)));
        assert_eq!(demon.next_action(1, &three()), None);
        assert_eq!(demon.kind(), DemonKind::External);
    }
}
