//! `gatherline-session/1`: an outside agent plays the demon.
//!
//! Requests and responses are single-line JSON objects tagged by `"type"`.
//! Locations and zooms travel as `"num/den"` strings.
//!
//! ```text
//! → {"type":"init","config":"0:2,3:2,1:1"}
//! ← {"type":"state","round":0,"config":["0","0","1","3","3"],"towers":[["0",2],["1",1],["3",2]],
//!    "measure":[2,4],"phase":"three-towers","forbidden":false,"gathered":null,"moving":[]}
//! → {"type":"step","activated":[2],"frames":[{"id":2,"zoom":"1","reflect":false}]}
//! → {"type":"step","activated":[0],"frames":[{"id":0,"zoom":"0/1"}]}
//! ← {"type":"error","code":"bad-frame","detail":"..."}
//! ```
//!
//! Activated robots without a frame entry get the unit frame. An error never
//! ends the session and never changes its state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{forbidden, gathered_at, measure, ConfigPhase, Measure};
use crate::execution::{step, DemonicAction, FrameChoice};
use crate::geometry::{Configuration, Location, RobotId, Zoom};
use crate::robogram::{GatheringRobogram, Robogram};

pub const SESSION_PROTOCOL: &str = "gatherline-session/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigInput {
    /// `loc:multiplicity,...`
    Towers(String),
    /// One location per robot id.
    Positions(Vec<Location>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub id: RobotId,
    #[serde(default = "unit_zoom")]
    pub zoom: String,
    #[serde(default)]
    pub reflect: bool,
}

fn unit_zoom() -> String {
    "1".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Request {
    Hello {
        protocol: String,
    },
    Init {
        config: ConfigInput,
    },
    Step {
        activated: Vec<RobotId>,
        #[serde(default)]
        frames: Vec<FrameEntry>,
    },
    /// Back to the configuration of the last `init`.
    Reset,
    Query,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub round: usize,
    pub config: Configuration,
    pub towers: Vec<(Location, usize)>,
    pub measure: Measure,
    pub phase: ConfigPhase,
    pub forbidden: bool,
    pub gathered: Option<Location>,
    /// Robots that moved during the last step.
    pub moving: BTreeSet<RobotId>,
}

impl SessionState {
    pub fn describe(round: usize, config: &Configuration, moving: BTreeSet<RobotId>) -> Self {
        let m = measure(config).expect("sessions never hold an empty configuration");
        SessionState {
            round,
            towers: config
                .spectrum()
                .towers()
                .map(|(l, c)| (l.clone(), c))
                .collect(),
            measure: m,
            phase: m.phase,
            forbidden: forbidden(config),
            gathered: gathered_at(config),
            config: config.clone(),
            moving,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Response {
    Hello { protocol: String },
    State(SessionState),
    Error { code: ErrorCode, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    BadRequest,
    BadVersion,
    BadConfig,
    NoConfig,
    BadFrame,
    UnknownRobot,
}

fn error(code: ErrorCode, detail: impl Into<String>) -> Response {
    Response::Error {
        code,
        detail: detail.into(),
    }
}

/// One session: an independent configuration state machine.
pub struct Session {
    robogram: Box<dyn Robogram>,
    initial: Option<Configuration>,
    current: Option<Configuration>,
    round: usize,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(Box::new(GatheringRobogram))
    }
}

impl Session {
    pub fn new(robogram: Box<dyn Robogram>) -> Self {
        Session {
            robogram,
            initial: None,
            current: None,
            round: 0,
        }
    }

    pub fn hello() -> Response {
        Response::Hello {
            protocol: SESSION_PROTOCOL.to_string(),
        }
    }

    pub fn current(&self) -> Option<&Configuration> {
        self.current.as_ref()
    }

    /// Handles one encoded request and returns the encoded response.
    pub fn handle_line(&mut self, line: &str) -> String {
        let response = match serde_json::from_str::<Request>(line) {
            Ok(request) => self.handle(request),
            Err(e) => error(ErrorCode::BadRequest, e.to_string()),
        };
        serde_json::to_string(&response).expect("responses serialize")
    }

    pub fn handle(&mut self, request: Request) -> Response {
        match request {
            Request::Hello { protocol } if protocol == SESSION_PROTOCOL => Session::hello(),
            Request::Hello { protocol } => error(
                ErrorCode::BadVersion,
                format!("server speaks {SESSION_PROTOCOL}, client asked for {protocol}"),
            ),
            Request::Init { config } => {
                let parsed = match config {
                    ConfigInput::Towers(text) => Configuration::parse(&text),
                    ConfigInput::Positions(ps) => Ok(Configuration::new(ps)),
                };
                match parsed {
                    Ok(c) if c.is_empty() => error(ErrorCode::BadConfig, "no robots"),
                    Ok(c) => {
                        self.initial = Some(c.clone());
                        self.current = Some(c);
                        self.round = 0;
                        self.state(BTreeSet::new())
                    }
                    Err(e) => error(ErrorCode::BadConfig, e.to_string()),
                }
            }
            Request::Reset => match &self.initial {
                None => error(ErrorCode::NoConfig, "no init yet"),
                Some(c) => {
                    self.current = Some(c.clone());
                    self.round = 0;
                    self.state(BTreeSet::new())
                }
            },
            Request::Query => match &self.current {
                None => error(ErrorCode::NoConfig, "no init yet"),
                Some(_) => self.state(BTreeSet::new()),
            },
            Request::Step { activated, frames } => self.step(activated, frames),
        }
    }

    fn state(&self, moving: BTreeSet<RobotId>) -> Response {
        let config = self
            .current
            .as_ref()
            .expect("state requested with a configuration");
        Response::State(SessionState::describe(self.round, config, moving))
    }

    fn step(&mut self, activated: Vec<RobotId>, frames: Vec<FrameEntry>) -> Response {
        let Some(config) = &self.current else {
            return error(ErrorCode::NoConfig, "no init yet");
        };
        let mut da = DemonicAction::new();
        for id in activated {
            if id.0 >= config.len() {
                return error(
                    ErrorCode::UnknownRobot,
                    format!("{id} does not exist ({} robots)", config.len()),
                );
            }
            if da.is_active(id) {
                return error(ErrorCode::UnknownRobot, format!("{id} activated twice"));
            }
            da.insert(id, FrameChoice::identity());
        }
        let mut framed = BTreeSet::new();
        for entry in frames {
            if !da.is_active(entry.id) {
                return error(
                    ErrorCode::BadFrame,
                    format!("frame given for non-activated robot {}", entry.id),
                );
            }
            if !framed.insert(entry.id) {
                return error(ErrorCode::BadFrame, format!("two frames for {}", entry.id));
            }
            match entry.zoom.parse::<Zoom>() {
                Ok(zoom) => da.insert(entry.id, FrameChoice::new(zoom, entry.reflect)),
                Err(e) => return error(ErrorCode::BadFrame, e.to_string()),
            }
        }
        match step(self.robogram.as_ref(), &da, config) {
            Ok(outcome) => {
                self.current = Some(outcome.result);
                self.round += 1;
                self.state(outcome.moving)
            }
            Err(e) => error(ErrorCode::BadRequest, e.to_string()),
        }
    }
}
