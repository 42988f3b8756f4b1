//! Generators for the undecidability reductions: PCP, Turing machines on
//! two processes, and two-counter machines with a single message.

mod cm2;
mod pcp;
mod tm;

use thiserror::Error;

use crate::cmsc::{Action, CMsc, Event, MsgId, ProcessId, RawCmsc};

pub use cm2::{cm2_to_hmsc, CmTransition, Counter, CounterMachine, CounterOp};
pub use pcp::{pcp_to_hmsc, pcp_word_of_path, PcpInstance};
pub use tm::{tm_to_hmsc, TmSpec, MARKER};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("invalid instance: {0}")]
pub struct ReduceError(pub String);

fn invalid<T>(msg: impl Into<String>) -> Result<T, ReduceError> {
    Err(ReduceError(msg.into()))
}

/// A cMSC of unmatched events on one process, in the given order.
fn local(processes: &[ProcessId], messages: &[MsgId], events: &[(Action, &MsgId)]) -> CMsc {
    let evs = events
        .iter()
        .enumerate()
        .map(|(i, (a, m))| Event::new(format!("e{i}"), a.clone(), Some((*m).clone())))
        .collect();
    RawCmsc::from_lines(processes.to_vec(), messages.to_vec(), evs, vec![])
        .validate()
        .expect("single-process gadgets of unmatched events are valid")
}

/// Events in per-process line order with a single matched pair.
fn with_message(
    processes: &[ProcessId],
    messages: &[MsgId],
    events: Vec<Event>,
    matched: (&str, &str),
) -> CMsc {
    RawCmsc::from_lines(
        processes.to_vec(),
        messages.to_vec(),
        events,
        vec![(matched.0.to_string(), matched.1.to_string())],
    )
    .validate()
    .expect("gadget with one complete message is valid")
}
