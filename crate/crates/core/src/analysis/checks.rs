//! Executable versions of the correctness properties, one case at a time,
//! plus a seeded parallel driver.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{forbidden, gathered_at, measure, CaseGenerator};
use crate::error::{Error, Result};
use crate::execution::{step, DemonicAction};
use crate::geometry::{Configuration, Location};
use crate::robogram::Robogram;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// Every robot that moves goes to the same place.
    SameDestination,
    /// A non-bivalent configuration never becomes bivalent.
    NeverForbidden,
    /// If somebody moves, the measure strictly decreases.
    RoundDecrease,
    /// The outcome of a round does not depend on the frames.
    FrameInvariance,
    /// Non-bivalent, non-gathered: activating everybody moves somebody.
    Progress,
    /// Gathered and bivalent configurations never change.
    FixedPoint,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::SameDestination,
        Property::NeverForbidden,
        Property::RoundDecrease,
        Property::FrameInvariance,
        Property::Progress,
        Property::FixedPoint,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Property::SameDestination => "same-destination",
            Property::NeverForbidden => "never-forbidden",
            Property::RoundDecrease => "round-decrease",
            Property::FrameInvariance => "frame-invariance",
            Property::Progress => "progress",
            Property::FixedPoint => "fixed-point",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Property::ALL.into_iter().find(|p| p.label() == label)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseOutcome {
    Pass,
    /// Precondition not met; says nothing about the property.
    Skipped,
    Fail(String),
}

impl CaseOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, CaseOutcome::Fail(_))
    }
}

fn internal(e: Error) -> CaseOutcome {
    CaseOutcome::Fail(format!("round failed: {e}"))
}

pub fn same_destination_case<R: Robogram + ?Sized>(
    r: &R,
    config: &Configuration,
    da: &DemonicAction,
) -> CaseOutcome {
    let outcome = match step(r, da, config) {
        Ok(o) => o,
        Err(e) => return internal(e),
    };
    let mut targets = outcome
        .moving
        .iter()
        .map(|id| (id, &outcome.destinations[id]));
    let Some((first_id, first)) = targets.next() else {
        return CaseOutcome::Pass;
    };
    match targets.find(|(_, t)| *t != first) {
        None => CaseOutcome::Pass,
        Some((id, t)) => {
            CaseOutcome::Fail(format!("{first_id} moves to {first} but {id} moves to {t}"))
        }
    }
}

pub fn never_forbidden_case<R: Robogram + ?Sized>(
    r: &R,
    config: &Configuration,
    da: &DemonicAction,
) -> CaseOutcome {
    if forbidden(config) {
        return CaseOutcome::Skipped;
    }
    match step(r, da, config) {
        Err(e) => internal(e),
        Ok(o) if forbidden(&o.result) => CaseOutcome::Fail(format!(
            "round produced bivalent configuration {}",
            o.result
        )),
        Ok(_) => CaseOutcome::Pass,
    }
}

pub fn round_decrease_case<R: Robogram + ?Sized>(
    r: &R,
    config: &Configuration,
    da: &DemonicAction,
) -> CaseOutcome {
    if forbidden(config) {
        return CaseOutcome::Skipped;
    }
    let outcome = match step(r, da, config) {
        Ok(o) => o,
        Err(e) => return internal(e),
    };
    if outcome.moving.is_empty() {
        return CaseOutcome::Skipped;
    }
    match (measure(config), measure(&outcome.result)) {
        (Ok(before), Ok(after)) if after < before => CaseOutcome::Pass,
        (Ok(before), Ok(after)) => CaseOutcome::Fail(format!(
            "measure went from {before} to {after} with {} robot(s) moving",
            outcome.moving.len()
        )),
        (Err(e), _) | (_, Err(e)) => internal(e),
    }
}

/// `a` and `b` must activate the same robots; otherwise the case is skipped.
pub fn frame_invariance_case<R: Robogram + ?Sized>(
    r: &R,
    config: &Configuration,
    a: &DemonicAction,
    b: &DemonicAction,
) -> CaseOutcome {
    if !a.activated().eq(b.activated()) {
        return CaseOutcome::Skipped;
    }
    match (step(r, a, config), step(r, b, config)) {
        (Ok(x), Ok(y)) if x.result == y.result => CaseOutcome::Pass,
        (Ok(x), Ok(y)) => {
            let id = x
                .destinations
                .keys()
                .find(|id| x.destinations[id] != y.destinations[id])
                .expect("results differ on some activated robot");
            CaseOutcome::Fail(format!(
                "{id} goes to {} under one frame and {} under another",
                x.destinations[id], y.destinations[id]
            ))
        }
        (Err(e), _) | (_, Err(e)) => internal(e),
    }
}

pub fn progress_case<R: Robogram + ?Sized>(r: &R, config: &Configuration) -> CaseOutcome {
    if config.is_empty() || forbidden(config) || gathered_at(config).is_some() {
        return CaseOutcome::Skipped;
    }
    match step(r, &DemonicAction::all(config.len()), config) {
        Err(e) => internal(e),
        Ok(o) if o.moving.is_empty() => {
            CaseOutcome::Fail("nobody moves although the robots are not gathered".into())
        }
        Ok(_) => CaseOutcome::Pass,
    }
}

pub fn fixed_point_case<R: Robogram + ?Sized>(
    r: &R,
    config: &Configuration,
    da: &DemonicAction,
) -> CaseOutcome {
    if !forbidden(config) && gathered_at(config).is_none() {
        return CaseOutcome::Skipped;
    }
    match step(r, da, config) {
        Err(e) => internal(e),
        Ok(o) if o.result != *config => {
            let moved: Vec<String> = o
                .moving
                .iter()
                .map(|id| format!("{id} to {}", o.result.positions()[id.0]))
                .collect();
            CaseOutcome::Fail(format!(
                "{config} is a fixed point but {}",
                moved.join(", ")
            ))
        }
        Ok(_) => CaseOutcome::Pass,
    }
}

/// A failing case, self-contained enough to be checked again.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub property: Property,
    pub case: u64,
    pub config: Configuration,
    pub action: DemonicAction,
    /// Second frame assignment, for frame invariance only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate: Option<DemonicAction>,
    pub detail: String,
}

impl Counterexample {
    pub fn recheck<R: Robogram + ?Sized>(&self, r: &R) -> CaseOutcome {
        evaluate(
            r,
            self.property,
            &self.config,
            &self.action,
            self.alternate.as_ref(),
        )
    }
}

fn evaluate<R: Robogram + ?Sized>(
    r: &R,
    property: Property,
    config: &Configuration,
    action: &DemonicAction,
    alternate: Option<&DemonicAction>,
) -> CaseOutcome {
    match property {
        Property::SameDestination => same_destination_case(r, config, action),
        Property::NeverForbidden => never_forbidden_case(r, config, action),
        Property::RoundDecrease => round_decrease_case(r, config, action),
        Property::FrameInvariance => match alternate {
            Some(b) => frame_invariance_case(r, config, action, b),
            None => CaseOutcome::Skipped,
        },
        Property::Progress => progress_case(r, config),
        Property::FixedPoint => fixed_point_case(r, config, action),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: Property,
    pub robogram: String,
    pub verdict: Verdict,
    pub cases_run: u64,
    pub passed: u64,
    pub skipped: u64,
    pub failed: u64,
    pub seed: u64,
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub cases: u64,
    pub seed: u64,
    /// Worker threads; `None` uses every core. Results do not depend on it.
    pub workers: Option<usize>,
    pub generator: CaseGenerator,
}

impl CheckOptions {
    pub fn new(cases: u64, seed: u64) -> Self {
        CheckOptions {
            cases,
            seed,
            workers: None,
            generator: CaseGenerator::default(),
        }
    }
}

/// Independent random stream for case `index`.
fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Case {
    config: Configuration,
    action: DemonicAction,
    alternate: Option<DemonicAction>,
}

fn draw_case(property: Property, gen: &CaseGenerator, rng: &mut ChaCha8Rng) -> Case {
    let config = match property {
        Property::FixedPoint => {
            // Gathered or bivalent on purpose, or the case would be skipped.
            let c = gen.any_configuration(rng);
            let n = c.len().max(2);
            let a = c
                .positions()
                .first()
                .cloned()
                .unwrap_or_else(Location::zero);
            if n.is_multiple_of(2) && rng.gen_bool(0.5) {
                let b = &a + &Location::from_integer(rng.gen_range(1..=5));
                Configuration::from_towers(&[(a, n / 2), (b, n / 2)])
            } else {
                Configuration::from_towers(&[(a, n)])
            }
        }
        _ => gen.configuration(rng),
    };
    let action = gen.action(rng, config.len());
    let alternate = (property == Property::FrameInvariance).then(|| gen.reframe(rng, &action));
    Case {
        config,
        action,
        alternate,
    }
}

/// Checks `property` of `r` on `opts.cases` random cases.
///
/// Case `i` draws from its own stream derived from `(seed, i)`, and the
/// reported counterexample is the failing case with the smallest index, so
/// the report is the same for any number of workers.
pub fn run_suite<R: Robogram + ?Sized>(
    r: &R,
    property: Property,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    if opts.cases == 0 {
        return Err(Error::InvalidArgument(
            "case budget must be at least 1".into(),
        ));
    }
    let run = |i: u64| {
        let mut rng = case_rng(opts.seed, i);
        let case = draw_case(property, &opts.generator, &mut rng);
        let outcome = evaluate(
            r,
            property,
            &case.config,
            &case.action,
            case.alternate.as_ref(),
        );
        (i, case, outcome)
    };
    let collect = || -> Vec<(u64, Option<Case>, CaseOutcome)> {
        (0..opts.cases)
            .into_par_iter()
            .map(run)
            .map(|(i, case, outcome)| {
                let keep = outcome.is_fail().then_some(case);
                (i, keep, outcome)
            })
            .collect()
    };
    let results = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(collect),
        None => collect(),
    };

    let mut report = CheckReport {
        property,
        robogram: r.name().to_string(),
        verdict: Verdict::Pass,
        cases_run: opts.cases,
        passed: 0,
        skipped: 0,
        failed: 0,
        seed: opts.seed,
        counterexample: None,
    };
    for (i, case, outcome) in results {
        match outcome {
            CaseOutcome::Pass => report.passed += 1,
            CaseOutcome::Skipped => report.skipped += 1,
            CaseOutcome::Fail(detail) => {
                report.failed += 1;
                report.verdict = Verdict::Fail;
                if report.counterexample.is_none() {
                    let case = case.expect("failing cases are kept");
                    report.counterexample = Some(Counterexample {
                        property,
                        case: i,
                        config: case.config,
                        action: case.action,
                        alternate: case.alternate,
                        detail,
                    });
                }
            }
        }
    }
    Ok(report)
}

pub fn check_same_destination<R: Robogram + ?Sized>(
    r: &R,
    cases: u64,
    seed: u64,
) -> Result<CheckReport> {
    run_suite(
        r,
        Property::SameDestination,
        &CheckOptions::new(cases, seed),
    )
}

pub fn check_never_forbidden<R: Robogram + ?Sized>(
    r: &R,
    cases: u64,
    seed: u64,
) -> Result<CheckReport> {
    run_suite(r, Property::NeverForbidden, &CheckOptions::new(cases, seed))
}

pub fn check_round_decrease<R: Robogram + ?Sized>(
    r: &R,
    cases: u64,
    seed: u64,
) -> Result<CheckReport> {
    run_suite(r, Property::RoundDecrease, &CheckOptions::new(cases, seed))
}

pub fn check_frame_invariance<R: Robogram + ?Sized>(
    r: &R,
    cases: u64,
    seed: u64,
) -> Result<CheckReport> {
    run_suite(
        r,
        Property::FrameInvariance,
        &CheckOptions::new(cases, seed),
    )
}
