//! The deliberative executive: event vocabulary, world reducer, safety
//! envelope, built-in behaviors and the tick loop that ties them together.

pub mod deliberator;
pub mod event;
pub mod library;
pub mod log;
pub mod safety;
pub mod world;

pub use deliberator::{
    Command, CommandError, CommandReply, CommandResult, CoverageSetup, Executive, ExecutiveConfig,
    ExecutiveError, ReplyFn,
};
pub use event::{BehaviorRef, Event, EventBody, LinkStatus, Telemetry};
pub use safety::{check_safety, KeepOutZone, SafetyEnvelope, Violation};
pub use world::{ApplyError, ExecutiveState, Mode, World, WorldDump};
