//! `gatherline-trace/1`: one JSON object per line.
//!
//! ```text
//! {"kind":"header","format":"gatherline-trace/1","robogram":"gathering","robots":8,
//!  "seed":null,"demon":"fsync","k":1,"initial":["0","0",...]}
//! {"kind":"round","round":1,"action":[{"id":3,"zoom":"1","reflect":false},...],
//!  "config":[...],"moving":[3,4],"measure":[2,6],"phase":"three-towers","forbidden":false}
//! {"kind":"footer","status":"gathered","at":"3/2","rounds":3}
//! ```
//!
//! Configurations are listed by robot id so that actions can be replayed.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{ConfigPhase, Measure};
use crate::error::{Error, Result};
use crate::execution::{DemonKind, DemonicAction, Trace, TraceStatus, TraceStep};
use crate::geometry::{Configuration, RobotId};
use crate::robogram::Robogram;

pub const TRACE_FORMAT: &str = "gatherline-trace/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub robogram: String,
    pub robots: usize,
    pub seed: Option<u64>,
    pub demon: DemonKind,
    pub k: Option<usize>,
    pub initial: Configuration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: usize,
    pub action: DemonicAction,
    pub config: Configuration,
    pub moving: BTreeSet<RobotId>,
    pub measure: Measure,
    pub phase: ConfigPhase,
    pub forbidden: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFooter {
    #[serde(flatten)]
    pub status: TraceStatus,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceLine {
    Header(TraceHeader),
    Round(TraceRecord),
    Footer(TraceFooter),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
    /// Missing when the run was cut short before the footer was written.
    pub footer: Option<TraceFooter>,
}

impl TraceFile {
    pub fn from_trace(trace: &Trace) -> Self {
        let records = trace
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| TraceRecord {
                round: i + 1,
                action: s.action.clone(),
                config: s.result.clone(),
                moving: s.moving.clone(),
                measure: s.measure,
                phase: s.phase,
                forbidden: s.forbidden,
            })
            .collect();
        TraceFile {
            header: TraceHeader {
                format: TRACE_FORMAT.to_string(),
                robogram: trace.robogram.clone(),
                robots: trace.initial.len(),
                seed: trace.seed,
                demon: trace.demon,
                k: trace.fairness_bound,
                initial: trace.initial.clone(),
            },
            records,
            footer: Some(TraceFooter {
                status: trace.status.clone(),
                rounds: trace.steps.len(),
            }),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: TraceLine| {
            out.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
            out.push('\n');
        };
        push(TraceLine::Header(self.header.clone()));
        for record in &self.records {
            push(TraceLine::Round(record.clone()));
        }
        if let Some(footer) = &self.footer {
            push(TraceLine::Footer(footer.clone()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str::<TraceLine>(l)
                    .map_err(|e| Error::TraceFormat(format!("line {}: {e}", i + 1)))
            });
        let header = match lines.next().transpose()? {
            Some(TraceLine::Header(h)) => h,
            _ => return Err(Error::TraceFormat("first line must be a header".into())),
        };
        if header.format != TRACE_FORMAT {
            return Err(Error::TraceFormat(format!(
                "unsupported format {:?}",
                header.format
            )));
        }
        if header.robots != header.initial.len() {
            return Err(Error::TraceFormat(format!(
                "header announces {} robots but lists {}",
                header.robots,
                header.initial.len()
            )));
        }
        let mut records = Vec::new();
        let mut footer = None;
        for line in lines {
            match line? {
                TraceLine::Round(r) if footer.is_none() => records.push(r),
                TraceLine::Footer(f) if footer.is_none() => footer = Some(f),
                _ => {
                    return Err(Error::TraceFormat(
                        "unexpected line after footer or second header".into(),
                    ))
                }
            }
        }
        Ok(TraceFile {
            header,
            records,
            footer,
        })
    }

    pub fn actions(&self) -> Vec<DemonicAction> {
        self.records.iter().map(|r| r.action.clone()).collect()
    }
}

/// First record whose recomputation disagrees with the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayMismatch {
    pub round: usize,
    pub expected: TraceRecord,
    pub found: TraceRecord,
}

/// Recomputes every record from the header's initial configuration and the
/// recorded actions.
pub fn replay<R: Robogram + ?Sized>(r: &R, file: &TraceFile) -> Result<Option<ReplayMismatch>> {
    let mut current = file.header.initial.clone();
    for (i, found) in file.records.iter().enumerate() {
        let step = TraceStep::compute(r, found.action.clone(), &current)?;
        let expected = TraceRecord {
            round: i + 1,
            action: step.action,
            config: step.result,
            moving: step.moving,
            measure: step.measure,
            phase: step.phase,
            forbidden: step.forbidden,
        };
        if &expected != found {
            return Ok(Some(ReplayMismatch {
                round: i + 1,
                expected,
                found: found.clone(),
            }));
        }
        current = expected.config;
    }
    Ok(None)
}
