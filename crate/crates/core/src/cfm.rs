//! Communicating finite-state machines over FIFO channels.

use std::collections::{BTreeMap, HashSet, VecDeque};

use thiserror::Error;

use crate::cmsc::{Action, CMsc, Event, MsgId, ProcessId, RawCmsc};
use crate::compose::{insert, CMscSet};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CfmError {
    #[error("transition {action} does not belong to machine `{process}`")]
    WrongOwner { process: ProcessId, action: Action },
    #[error("unknown message `{0}`")]
    UnknownMessage(MsgId),
    #[error("unknown state `{state}` in machine `{process}`")]
    UnknownState { process: ProcessId, state: String },
    #[error("no machine for process `{0}`")]
    UnknownProcess(ProcessId),
    #[error("acceptance tuple has {got} components, expected {expected}")]
    TupleArity { got: usize, expected: usize },
    #[error("the input is not an MSC (it has unmatched events)")]
    NotAnMsc,
    #[error("search exceeded {0} configurations")]
    CapExceeded(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineTransition {
    pub from: usize,
    pub action: Action,
    pub message: MsgId,
    pub to: usize,
}

/// The finite-state machine `A_p` of one process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub process: ProcessId,
    pub states: Vec<String>,
    pub initial: usize,
    pub transitions: Vec<MachineTransition>,
}

impl Machine {
    pub fn new(process: &ProcessId, initial: &str) -> Self {
        Machine {
            process: process.clone(),
            states: vec![initial.to_string()],
            initial: 0,
            transitions: Vec::new(),
        }
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn ensure_state(&mut self, name: &str) -> usize {
        match self.state(name) {
            Some(i) => i,
            None => {
                self.states.push(name.to_string());
                self.states.len() - 1
            }
        }
    }

    /// Adds `from --action,message--> to`, creating states by name.
    pub fn add(&mut self, from: &str, action: Action, message: &MsgId, to: &str) -> Result<(), CfmError> {
        if action.owner() != &self.process {
            return Err(CfmError::WrongOwner {
                process: self.process.clone(),
                action,
            });
        }
        let from = self.ensure_state(from);
        let to = self.ensure_state(to);
        self.transitions.push(MachineTransition {
            from,
            action,
            message: message.clone(),
            to,
        });
        Ok(())
    }

    fn steps<'a>(&'a self, state: usize, action: &'a Action) -> impl Iterator<Item = &'a MachineTransition> + 'a {
        self.transitions
            .iter()
            .filter(move |t| t.from == state && &t.action == action)
    }
}

/// A CFM; finite runs accept in a listed global state with empty channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfm {
    pub messages: Vec<MsgId>,
    pub machines: Vec<Machine>,
    /// Global states, one local state per machine in `machines` order.
    pub accepting: Vec<Vec<usize>>,
    /// Stored for completeness; never evaluated.
    pub omega_accepting: Vec<Vec<usize>>,
}

impl Cfm {
    pub fn new(messages: &[MsgId], machines: Vec<Machine>) -> Self {
        Cfm {
            messages: messages.to_vec(),
            machines,
            accepting: Vec::new(),
            omega_accepting: Vec::new(),
        }
    }

    pub fn processes(&self) -> Vec<ProcessId> {
        self.machines.iter().map(|m| m.process.clone()).collect()
    }

    pub fn machine_index(&self, p: &ProcessId) -> Option<usize> {
        self.machines.iter().position(|m| &m.process == p)
    }

    /// Adds an accepting tuple given by state names.
    pub fn accept(&mut self, names: &[&str]) -> Result<(), CfmError> {
        if names.len() != self.machines.len() {
            return Err(CfmError::TupleArity {
                got: names.len(),
                expected: self.machines.len(),
            });
        }
        let tuple = names
            .iter()
            .zip(&self.machines)
            .map(|(n, m)| {
                m.state(n).ok_or_else(|| CfmError::UnknownState {
                    process: m.process.clone(),
                    state: n.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.accepting.push(tuple);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CfmError> {
        for m in &self.machines {
            for t in &m.transitions {
                if t.action.owner() != &m.process {
                    return Err(CfmError::WrongOwner {
                        process: m.process.clone(),
                        action: t.action.clone(),
                    });
                }
                if !self.messages.contains(&t.message) {
                    return Err(CfmError::UnknownMessage(t.message.clone()));
                }
                if self.machine_index(t.action.peer()).is_none() {
                    return Err(CfmError::UnknownProcess(t.action.peer().clone()));
                }
            }
        }
        for tuple in self.accepting.iter().chain(&self.omega_accepting) {
            if tuple.len() != self.machines.len() {
                return Err(CfmError::TupleArity {
                    got: tuple.len(),
                    expected: self.machines.len(),
                });
            }
        }
        Ok(())
    }

    fn is_accepting(&self, states: &[usize]) -> bool {
        self.accepting.iter().any(|t| t == states)
    }
}

/// Default bound on configurations visited by [`accepts_msc`].
pub const DEFAULT_CAP: usize = 1_000_000;

struct Acceptance<'a> {
    a: &'a Cfm,
    m: &'a CMsc,
    /// machine index of each process of `m`
    machine_of: Vec<usize>,
    failed: HashSet<(Vec<usize>, Vec<usize>, Vec<Option<MsgId>>)>,
    cap: usize,
}

impl Acceptance<'_> {
    /// `progress[pi]`: events of process `pi` already executed;
    /// `sent[e]`: message chosen at send `e`, kept until its receive.
    fn search(
        &mut self,
        progress: &mut Vec<usize>,
        states: &mut Vec<usize>,
        sent: &mut Vec<Option<MsgId>>,
    ) -> Result<bool, CfmError> {
        let m = self.m;
        let done = (0..m.processes().len()).all(|pi| progress[pi] == m.chain(pi).len());
        if done {
            return Ok(self.a.is_accepting(states));
        }
        let key = (progress.clone(), states.clone(), sent.clone());
        if self.failed.contains(&key) {
            return Ok(false);
        }
        if self.failed.len() >= self.cap {
            return Err(CfmError::CapExceeded(self.cap));
        }
        for pi in 0..m.processes().len() {
            let range = m.chain(pi);
            if progress[pi] == range.len() {
                continue;
            }
            let e = range.start + progress[pi];
            let action = m.action(e);
            let mi = self.machine_of[pi];
            let machine = &self.a.machines[mi];
            let partner = m.partner(e).expect("complete MSC");
            if action.is_send() {
                for t in machine.steps(states[mi], action) {
                    let before = states[mi];
                    states[mi] = t.to;
                    progress[pi] += 1;
                    sent[e] = Some(t.message.clone());
                    let ok = self.search(progress, states, sent)?;
                    sent[e] = None;
                    progress[pi] -= 1;
                    states[mi] = before;
                    if ok {
                        return Ok(true);
                    }
                }
            } else {
                let Some(msg) = sent[partner].clone() else {
                    continue;
                };
                for t in machine.steps(states[mi], action) {
                    if t.message != msg {
                        continue;
                    }
                    let before = states[mi];
                    states[mi] = t.to;
                    progress[pi] += 1;
                    sent[partner] = None;
                    let ok = self.search(progress, states, sent)?;
                    sent[partner] = Some(msg.clone());
                    progress[pi] -= 1;
                    states[mi] = before;
                    if ok {
                        return Ok(true);
                    }
                }
            }
        }
        self.failed.insert(key);
        Ok(false)
    }
}

/// Whether some run of `a` has the MSC `m` as its behavior. At most `cap`
/// failing configurations are memoized before giving up.
///
/// A receive only reads the message chosen at its partner send; by the FIFO
/// condition this is the head of the channel in every linearization.
pub fn accepts_msc(a: &Cfm, m: &CMsc, cap: usize) -> Result<bool, CfmError> {
    if !m.is_msc() {
        return Err(CfmError::NotAnMsc);
    }
    let mut machine_of = Vec::new();
    for (pi, p) in m.processes().iter().enumerate() {
        match a.machine_index(p) {
            Some(i) => machine_of.push(i),
            None if m.chain(pi).is_empty() => machine_of.push(usize::MAX),
            None => return Ok(false),
        }
    }
    let mut acc = Acceptance {
        a,
        m,
        machine_of,
        failed: HashSet::new(),
        cap,
    };
    let mut progress = vec![0; m.processes().len()];
    let mut states: Vec<usize> = a.machines.iter().map(|mm| mm.initial).collect();
    let mut sent = vec![None; m.len()];
    acc.search(&mut progress, &mut states, &mut sent)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Run {
    states: Vec<usize>,
    /// pending (message, send event) per channel
    queues: Vec<VecDeque<(MsgId, usize)>>,
    /// executed actions per process
    actions: Vec<Vec<Action>>,
    /// (send, receive) as (process, rank) pairs
    matches: Vec<((usize, usize), (usize, usize))>,
}

/// All MSCs with at most `max_events` events accepted by `a`, by
/// enumerating runs (each channel holds at most `max_events` messages).
pub fn bounded_language_cfm(a: &Cfm, max_events: usize) -> CMscSet {
    let procs = a.processes();
    let mut channels: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..procs.len() {
        for j in 0..procs.len() {
            if i != j {
                let n = channels.len();
                channels.insert((i, j), n);
            }
        }
    }
    let start = Run {
        states: a.machines.iter().map(|m| m.initial).collect(),
        queues: vec![VecDeque::new(); channels.len()],
        actions: vec![Vec::new(); procs.len()],
        matches: Vec::new(),
    };
    let mut out = CMscSet::new();
    let mut seen: HashSet<Run> = HashSet::new();
    let mut frontier = vec![start];
    for _ in 0..max_events {
        let mut next = Vec::new();
        for run in &frontier {
            for (mi, machine) in a.machines.iter().enumerate() {
                for t in machine.transitions.iter().filter(|t| t.from == run.states[mi]) {
                    let Some(peer) = a.machine_index(t.action.peer()) else {
                        continue;
                    };
                    let mut r = run.clone();
                    r.states[mi] = t.to;
                    let rank = r.actions[mi].len();
                    if t.action.is_send() {
                        r.queues[channels[&(mi, peer)]].push_back((t.message.clone(), rank));
                    } else {
                        let q = &mut r.queues[channels[&(peer, mi)]];
                        match q.front() {
                            Some((msg, _)) if msg == &t.message => {}
                            _ => continue,
                        }
                        let (_, send_rank) = q.pop_front().expect("nonempty");
                        r.matches.push(((peer, send_rank), (mi, rank)));
                    }
                    r.actions[mi].push(t.action.clone());
                    if !seen.insert(r.clone()) {
                        continue;
                    }
                    if r.queues.iter().all(VecDeque::is_empty) && a.is_accepting(&r.states) {
                        insert(&mut out, run_to_msc(a, &procs, &r));
                    }
                    next.push(r);
                }
            }
        }
        frontier = next;
    }
    out
}

fn run_to_msc(a: &Cfm, procs: &[ProcessId], r: &Run) -> CMsc {
    let id = |pi: usize, k: usize| format!("{}.{}", procs[pi], k);
    let events = r
        .actions
        .iter()
        .enumerate()
        .flat_map(|(pi, acts)| {
            acts.iter()
                .enumerate()
                .map(move |(k, act)| Event::new(id(pi, k), act.clone(), None))
        })
        .collect();
    let matches = r
        .matches
        .iter()
        .map(|&((sp, sk), (rp, rk))| (id(sp, sk), id(rp, rk)))
        .collect();
    RawCmsc::from_lines(procs.to_vec(), a.messages.clone(), events, matches)
        .validate()
        .expect("FIFO runs with empty channels yield MSCs")
}
