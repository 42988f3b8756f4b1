use crate::cmsc::{Action, CMsc, Event, MsgId, ProcessId};
use crate::hmsc::Hmsc;

use super::{invalid, local, with_message, ReduceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Counter {
    C1,
    C2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CounterOp {
    Inc(Counter),
    Dec(Counter),
    Zero(Counter),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmTransition {
    pub from: String,
    pub op: CounterOp,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterMachine {
    pub states: Vec<String>,
    pub initial: String,
    pub finals: Vec<String>,
    pub transitions: Vec<CmTransition>,
}

impl CounterMachine {
    pub fn validate(&self) -> Result<(), ReduceError> {
        let known = |s: &String| self.states.contains(s);
        if !known(&self.initial) {
            return invalid(format!("unknown initial state `{}`", self.initial));
        }
        if let Some(s) = self.finals.iter().find(|s| !known(s)) {
            return invalid(format!("unknown final state `{s}`"));
        }
        for t in &self.transitions {
            if !known(&t.from) || !known(&t.to) {
                return invalid(format!("transition {} -> {} uses an unknown state", t.from, t.to));
            }
        }
        Ok(())
    }
}

fn channel(c: Counter) -> (ProcessId, ProcessId) {
    match c {
        Counter::C1 => (ProcessId::new("p1"), ProcessId::new("p1'")),
        Counter::C2 => (ProcessId::new("p2"), ProcessId::new("p2'")),
    }
}

fn name(op: CounterOp) -> String {
    let (k, c) = match op {
        CounterOp::Inc(c) => ("inc", c),
        CounterOp::Dec(c) => ("dec", c),
        CounterOp::Zero(c) => ("zero", c),
    };
    format!("{k}{}", if c == Counter::C1 { 1 } else { 2 })
}

/// HMSC over `{p1, p1', p2, p2'}` with the single message `a` and the state
/// graph of the machine: counter `cᵢ` is the content of channel `(pᵢ, pᵢ')`.
pub fn cm2_to_hmsc(c: &CounterMachine) -> Result<Hmsc, ReduceError> {
    c.validate()?;
    let procs: Vec<ProcessId> = ["p1", "p1'", "p2", "p2'"].map(ProcessId::new).to_vec();
    let a = MsgId::new("a");
    let msgs = vec![a.clone()];
    let gadget = |op: CounterOp| -> CMsc {
        match op {
            CounterOp::Inc(k) => {
                let (s, r) = channel(k);
                local(&procs, &msgs, &[(Action::send(&s, &r), &a)])
            }
            CounterOp::Dec(k) => {
                let (s, r) = channel(k);
                local(&procs, &msgs, &[(Action::receive(&r, &s), &a)])
            }
            CounterOp::Zero(k) => {
                let (s, r) = channel(k);
                let evs = vec![
                    Event::new("s", Action::send(&s, &r), None),
                    Event::new("r", Action::receive(&r, &s), None),
                ];
                with_message(&procs, &msgs, evs, ("s", "r"))
            }
        }
    };
    let mut h = Hmsc::new(&c.initial);
    h.declare(&procs, &msgs);
    for s in &c.states {
        h.ensure_state(s);
    }
    for t in &c.transitions {
        h.connect(&t.from, &name(t.op), &gadget(t.op), &t.to);
    }
    for f in &c.finals {
        h.finals.insert(h.state(f).expect("validated"));
    }
    Ok(h)
}
