//! Gathering of anonymous, oblivious robots on the real line.
//!
//! Robots with strong multiplicity detection run the same program on their
//! own view of the line (own origin, demon-chosen scale and orientation).
//! A semi-synchronous demon activates arbitrary subsets each round and moves
//! are rigid. This crate simulates such runs exactly, over rationals, and
//! checks the properties that make the gathering program correct:
//!
//! - robots that move in a round all go to the same location;
//! - a configuration that is not bivalent never becomes bivalent;
//! - a lexicographic measure strictly decreases whenever somebody moves.
//!
//! ```
//! use gatherline_core::prelude::*;
//!
//! let start = Configuration::parse("0:3,1:1,5/2:1,3:3").unwrap();
//! let mut demon = FsyncDemon::new();
//! let trace = execute(&GatheringRobogram, &mut demon, &start, 100).unwrap();
//! assert_eq!(trace.status, TraceStatus::Gathered { at: "3/2".parse().unwrap() });
//! ```

pub mod analysis;
pub mod error;
pub mod execution;
pub mod geometry;
pub mod protocol;
pub mod robogram;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{
        enumerate_small, forbidden, gathered_at, lt_conf, measure, phase_of, run_suite,
        CheckOptions, CheckReport, ConfigPhase, Measure, Property,
    };
    pub use crate::execution::{
        check_fairness, destination, execute, make_demon, moving, round, termination_bound, Demon,
        DemonSpec, DemonicAction, FrameChoice, FsyncDemon, RandomFairDemon, RoundRobinDemon,
        ScriptedDemon, Trace, TraceStatus,
    };
    pub use crate::geometry::{
        apply_frame, map_spectrum, spectrum_of, support, unapply_frame, Configuration, Frame,
        Location, RobotId, Spectrum, Zoom,
    };
    pub use crate::robogram::{gathering_pgm, GatheringRobogram, PhaseTag, Robogram};
}
