//! External formats: trace files and the interactive session protocol.

mod session;
mod trace;

pub use session::{
    ConfigInput, ErrorCode, FrameEntry, Request, Response, Session, SessionState, SESSION_PROTOCOL,
};
pub use trace::{
    replay, ReplayMismatch, TraceFile, TraceFooter, TraceHeader, TraceLine, TraceRecord,
    TRACE_FORMAT,
};
