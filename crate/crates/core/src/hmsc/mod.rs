//! High-level MSCs: finite transition graphs labeled with finite cMSCs.

mod classes;
mod general;
mod pipeline;
mod search;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::cmsc::{CMsc, Canonical, MsgId, ProcessId};
use crate::compose::{concat_pair, concat_sets, insert, set_of, CMscSet};

pub use classes::{loop_connected_bounded, weakly_loop_connected_exact, LoopVerdict, WlcVerdict, MAX_SCC_EDGES};
pub use general::{
    bounded_language_generalized, eliminate_all, eliminate_state, final_term, term_language_bounded, to_generalized,
    GeneralizedHmsc, LanguageTerm, Term,
};
pub use pipeline::{hmsc_to_emso, no_unmatched_sentence, term_to_formula, PipelineOptions};
pub use search::{safe_bounded, sat_search, SafeVerdict, SatVerdict};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HmscError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown transition label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("transitions {0} and {1} are not consecutive")]
    NotAPath(usize, usize),
    #[error("transition index {0} out of range")]
    NoSuchTransition(usize),
    #[error("safety is only defined for HMSCs without ω-accepting states")]
    OmegaUnsupported,
    #[error("state `{0}` is initial or accepting and cannot be eliminated")]
    EliminationForbidden(String),
    #[error("iterated subterm is not connected: {0}")]
    NotConnected(String),
    #[error("not loop-connected: the cycle {0:?} yields a disconnected cMSC")]
    NotLoopConnected(Vec<usize>),
    #[error("strongly connected component with {edges} transitions exceeds the limit of {limit}")]
    TooManyEdges { edges: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub label: usize,
    pub to: usize,
}

/// `H = (S, ι, Msg, R, F, F_ω)` with named states and named labels.
#[derive(Clone, Debug)]
pub struct Hmsc {
    pub processes: Vec<ProcessId>,
    pub messages: Vec<MsgId>,
    pub states: Vec<String>,
    pub initial: usize,
    pub labels: Vec<(String, CMsc)>,
    pub transitions: Vec<Transition>,
    pub finals: BTreeSet<usize>,
    pub omega: BTreeSet<usize>,
}

impl Hmsc {
    /// An HMSC with a single (initial) state and no transitions.
    pub fn new(initial: &str) -> Self {
        Hmsc {
            processes: Vec::new(),
            messages: Vec::new(),
            states: vec![initial.to_string()],
            initial: 0,
            labels: Vec::new(),
            transitions: Vec::new(),
            finals: BTreeSet::new(),
            omega: BTreeSet::new(),
        }
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn add_state(&mut self, name: &str) -> Result<usize, HmscError> {
        if self.state(name).is_some() {
            return Err(HmscError::DuplicateState(name.to_string()));
        }
        self.states.push(name.to_string());
        Ok(self.states.len() - 1)
    }

    /// The index of the state, creating it if needed.
    pub fn ensure_state(&mut self, name: &str) -> usize {
        match self.state(name) {
            Some(i) => i,
            None => {
                self.states.push(name.to_string());
                self.states.len() - 1
            }
        }
    }

    pub fn label(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|(n, _)| n == name)
    }

    /// Registers a label (reusing an existing one of the same name) and
    /// widens the declared processes and messages.
    pub fn add_label(&mut self, name: &str, m: CMsc) -> usize {
        if let Some(i) = self.label(name) {
            return i;
        }
        self.declare(m.processes(), m.messages());
        self.labels.push((name.to_string(), m));
        self.labels.len() - 1
    }

    pub fn declare(&mut self, processes: &[ProcessId], messages: &[MsgId]) {
        let ps: BTreeSet<ProcessId> = self.processes.iter().chain(processes).cloned().collect();
        let ms: BTreeSet<MsgId> = self.messages.iter().chain(messages).cloned().collect();
        self.processes = ps.into_iter().collect();
        self.messages = ms.into_iter().collect();
    }

    pub fn add_transition(&mut self, from: usize, label: usize, to: usize) -> usize {
        self.transitions.push(Transition { from, label, to });
        self.transitions.len() - 1
    }

    /// Adds `from --m--> to`, creating states and the label by name.
    pub fn connect(&mut self, from: &str, label: &str, m: &CMsc, to: &str) -> usize {
        let f = self.ensure_state(from);
        let t = self.ensure_state(to);
        let l = self.add_label(label, m.clone());
        self.add_transition(f, l, t)
    }

    pub fn label_of(&self, t: usize) -> &CMsc {
        &self.labels[self.transitions[t].label].1
    }

    pub fn label_name(&self, t: usize) -> &str {
        &self.labels[self.transitions[t].label].0
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.transitions.len()).filter(move |&t| self.transitions[t].from == s)
    }

    /// Checks that consecutive transitions connect.
    pub fn check_path(&self, path: &[usize]) -> Result<(), HmscError> {
        for &t in path {
            if t >= self.transitions.len() {
                return Err(HmscError::NoSuchTransition(t));
            }
        }
        for w in path.windows(2) {
            if self.transitions[w[0]].to != self.transitions[w[1]].from {
                return Err(HmscError::NotAPath(w[0], w[1]));
            }
        }
        Ok(())
    }

    pub fn is_accepting_path(&self, path: &[usize]) -> bool {
        !path.is_empty()
            && self.check_path(path).is_ok()
            && self.transitions[path[0]].from == self.initial
            && self.finals.contains(&self.transitions[*path.last().unwrap()].to)
    }

    /// Label names along a path.
    pub fn path_labels(&self, path: &[usize]) -> Vec<String> {
        path.iter().map(|&t| self.label_name(t).to_string()).collect()
    }

    /// States from which some state in `F` is reachable.
    pub fn co_reachable(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.finals.clone();
        loop {
            let before = out.len();
            for t in &self.transitions {
                if out.contains(&t.to) {
                    out.insert(t.from);
                }
            }
            if out.len() == before {
                return out;
            }
        }
    }
}

/// `cmscs(ρ)`: the concatenations of the labels along a path.
pub fn cmscs_of_path(h: &Hmsc, path: &[usize]) -> Result<CMscSet, HmscError> {
    h.check_path(path)?;
    let Some((&first, rest)) = path.split_first() else {
        return Ok(CMscSet::new());
    };
    let mut acc = set_of([h.label_of(first).clone()]);
    for &t in rest {
        acc = concat_sets(&acc, &set_of([h.label_of(t).clone()]));
    }
    Ok(acc)
}

/// Result of a bounded language computation.
#[derive(Clone, Debug)]
pub struct BoundedLanguage {
    pub mscs: CMscSet,
    /// Some path prefix exceeded the event bound.
    pub event_bound_hit: bool,
    /// Some path was cut by the path-length bound.
    pub path_bound_hit: bool,
}

/// Complete MSCs of accepting paths of length at most `max_path_len` with at
/// most `max_events` events.
pub fn bounded_language(h: &Hmsc, max_path_len: usize, max_events: usize) -> BoundedLanguage {
    let useful = h.co_reachable();
    let mut out = BoundedLanguage {
        mscs: CMscSet::new(),
        event_bound_hit: false,
        path_bound_hit: false,
    };
    let mut seen: HashSet<(usize, Canonical)> = HashSet::new();
    let mut frontier: Vec<(usize, Option<CMsc>)> = vec![(h.initial, None)];
    for depth in 0..=max_path_len {
        let mut next = Vec::new();
        for (state, current) in &frontier {
            if depth == max_path_len {
                if h.outgoing(*state).next().is_some() {
                    out.path_bound_hit = true;
                }
                continue;
            }
            for t in h.outgoing(*state) {
                let to = h.transitions[t].to;
                if !useful.contains(&to) {
                    continue;
                }
                let label = h.label_of(t);
                let results = match current {
                    None => vec![label.clone()],
                    Some(c) => concat_pair(c, label),
                };
                for m in results {
                    if m.len() > max_events {
                        out.event_bound_hit = true;
                        continue;
                    }
                    // An unmatched receive can never be matched by a later factor.
                    if m.unmatched().any(|e| m.action(e).is_receive()) {
                        continue;
                    }
                    if !seen.insert((to, m.canonical())) {
                        continue;
                    }
                    if h.finals.contains(&to) && m.is_msc() {
                        insert(&mut out.mscs, m.clone());
                    }
                    next.push((to, Some(m)));
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    out
}
