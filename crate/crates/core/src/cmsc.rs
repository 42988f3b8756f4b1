//! Compositional message sequence charts.
//!
//! A [`CMsc`] is a finite set of send/receive events arranged on per-process
//! timelines, a FIFO matching relation between sends and receives, and message
//! labels on the events that are still unmatched. Values are only obtained
//! through validation ([`RawCmsc::validate`]), so every `CMsc` in circulation
//! satisfies all well-formedness conditions and carries its materialized
//! partial order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(::std::sync::Arc<str>);

        impl $name {
            pub fn new(name: &str) -> Self {
                $name(::std::sync::Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl ::std::fmt::Debug for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}
pub(crate) use name_type;

name_type!(
    /// A process name.
    ProcessId
);
name_type!(
    /// A message (synchronization label) name.
    MsgId
);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ActionKind {
    Send,
    Receive,
}

/// An action type `p!q` (p sends to q) or `q?p` (q receives from p).
///
/// Both are described by their channel `(sender, receiver)`; the owner of a
/// send is the sender, the owner of a receive is the receiver.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub sender: ProcessId,
    pub receiver: ProcessId,
}

impl Action {
    /// `p!q`
    pub fn send(p: &ProcessId, q: &ProcessId) -> Action {
        Action {
            kind: ActionKind::Send,
            sender: p.clone(),
            receiver: q.clone(),
        }
    }

    /// `q?p`: `q` receives a message sent by `p`.
    pub fn receive(q: &ProcessId, p: &ProcessId) -> Action {
        Action {
            kind: ActionKind::Receive,
            sender: p.clone(),
            receiver: q.clone(),
        }
    }

    pub fn is_send(&self) -> bool {
        self.kind == ActionKind::Send
    }

    pub fn is_receive(&self) -> bool {
        self.kind == ActionKind::Receive
    }

    pub fn owner(&self) -> &ProcessId {
        match self.kind {
            ActionKind::Send => &self.sender,
            ActionKind::Receive => &self.receiver,
        }
    }

    pub fn peer(&self) -> &ProcessId {
        match self.kind {
            ActionKind::Send => &self.receiver,
            ActionKind::Receive => &self.sender,
        }
    }

    pub fn channel(&self) -> (&ProcessId, &ProcessId) {
        (&self.sender, &self.receiver)
    }

    /// The action an event must carry to be matched with this one.
    pub fn dual(&self) -> Action {
        Action {
            kind: match self.kind {
                ActionKind::Send => ActionKind::Receive,
                ActionKind::Receive => ActionKind::Send,
            },
            sender: self.sender.clone(),
            receiver: self.receiver.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActionKind::Send => write!(f, "{}!{}", self.sender, self.receiver),
            ActionKind::Receive => write!(f, "{}?{}", self.receiver, self.sender),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed action `{0}`: expected `p!q` or `p?q`")]
pub struct ActionParseError(pub String);

impl FromStr for Action {
    type Err = ActionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ActionParseError(s.to_string());
        let (idx, kind) = s
            .char_indices()
            .find_map(|(i, c)| match c {
                '!' => Some((i, ActionKind::Send)),
                '?' => Some((i, ActionKind::Receive)),
                _ => None,
            })
            .ok_or_else(err)?;
        let (owner, peer) = (&s[..idx], &s[idx + 1..]);
        if owner.is_empty() || peer.is_empty() || peer.contains(['!', '?']) {
            return Err(err());
        }
        let (owner, peer) = (ProcessId::new(owner), ProcessId::new(peer));
        Ok(match kind {
            ActionKind::Send => Action::send(&owner, &peer),
            ActionKind::Receive => Action::receive(&owner, &peer),
        })
    }
}

/// An event: its user-facing id, action type, and message label (present iff
/// the event is unmatched).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub action: Action,
    pub message: Option<MsgId>,
}

impl Event {
    pub fn new(id: impl Into<String>, action: Action, message: Option<MsgId>) -> Event {
        Event {
            id: id.into(),
            action,
            message,
        }
    }
}

/// Which well-formedness condition a validation error belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Undeclared names, duplicate ids, self channels, empty event set.
    Structure,
    /// Per-process chains are total orders.
    ChainOrder,
    /// Matches join a send `p!q` to a receive `q?p`.
    MatchKind,
    /// FIFO among matched pairs of a channel.
    Fifo,
    /// The order generated by process order and matching is acyclic.
    PartialOrder,
    /// Exactly the unmatched events carry messages.
    MessageDomain,
    /// Unmatched events never sit where they could not be matched later.
    Tail,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("a cMSC needs at least one event")]
    Empty,
    #[error("event `{event}` refers to undeclared process `{process}`")]
    UnknownProcess { event: String, process: String },
    #[error("event `{event}` carries undeclared message `{message}`")]
    UnknownMessage { event: String, message: String },
    #[error("event `{event}` uses the self channel ({process},{process})")]
    SelfChannel { event: String, process: String },
    #[error("duplicate event id `{0}`")]
    DuplicateEvent(String),
    #[error("reference to unknown event `{0}`")]
    UnknownEvent(String),
    #[error("events of process `{process}` are not totally ordered: {detail}")]
    ChainNotTotal { process: String, detail: String },
    #[error("match condition (i) violated: `{send}` ({send_action}) and `{receive}` ({receive_action}) are not a send p!q and a receive q?p")]
    MatchKind {
        send: String,
        send_action: String,
        receive: String,
        receive_action: String,
    },
    #[error("FIFO condition (ii) violated on channel ({sender},{receiver}): matches `{first_send}`->`{first_receive}` and `{second_send}`->`{second_receive}` overtake each other")]
    Fifo {
        sender: String,
        receiver: String,
        first_send: String,
        first_receive: String,
        second_send: String,
        second_receive: String,
    },
    #[error("process order and matching form a cycle through {}", .events.join(", "))]
    Cyclic { events: Vec<String> },
    #[error("dom(μ) ≠ unm(M): unmatched event `{event}` has no message")]
    MissingMessage { event: String },
    #[error("dom(μ) ≠ unm(M): matched event `{event}` carries message `{message}`")]
    SpuriousMessage { event: String, message: String },
    #[error("tail condition violated: unmatched `{unmatched}` ({action}) is on the wrong side of matched `{matched}`")]
    Tail {
        unmatched: String,
        matched: String,
        action: String,
    },
}

impl ValidationError {
    pub fn condition(&self) -> Condition {
        use ValidationError::*;
        match self {
            Empty | UnknownProcess { .. } | UnknownMessage { .. } | SelfChannel { .. }
            | DuplicateEvent(_) | UnknownEvent(_) => Condition::Structure,
            ChainNotTotal { .. } => Condition::ChainOrder,
            MatchKind { .. } => Condition::MatchKind,
            Fifo { .. } => Condition::Fifo,
            Cyclic { .. } => Condition::PartialOrder,
            MissingMessage { .. } | SpuriousMessage { .. } => Condition::MessageDomain,
            Tail { .. } => Condition::Tail,
        }
    }
}

/// An unvalidated cMSC as written by a user or produced by a generator.
///
/// `chains` lists, per process, the event ids in process order. Matches are
/// `(send id, receive id)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCmsc {
    pub processes: Vec<ProcessId>,
    pub messages: Vec<MsgId>,
    pub events: Vec<Event>,
    pub chains: Vec<(ProcessId, Vec<String>)>,
    pub matches: Vec<(String, String)>,
}

impl RawCmsc {
    /// Builds a raw cMSC whose per-process order is the declaration order of
    /// `events`.
    pub fn from_lines(
        processes: Vec<ProcessId>,
        messages: Vec<MsgId>,
        events: Vec<Event>,
        matches: Vec<(String, String)>,
    ) -> RawCmsc {
        let mut chains: Vec<(ProcessId, Vec<String>)> = Vec::new();
        for ev in &events {
            let owner = ev.action.owner();
            match chains.iter_mut().find(|(p, _)| p == owner) {
                Some((_, ids)) => ids.push(ev.id.clone()),
                None => chains.push((owner.clone(), vec![ev.id.clone()])),
            }
        }
        RawCmsc {
            processes,
            messages,
            events,
            chains,
            matches,
        }
    }

    pub fn validate(&self) -> Result<CMsc, ValidationError> {
        validate(self)
    }
}

/// Validates a raw structure, reporting the first violated condition in the
/// order: structure, chains, (i), (ii), acyclicity, message domain, tail.
pub fn validate(raw: &RawCmsc) -> Result<CMsc, ValidationError> {
    if raw.events.is_empty() {
        return Err(ValidationError::Empty);
    }
    let processes: BTreeSet<&ProcessId> = raw.processes.iter().collect();
    let messages: BTreeSet<&MsgId> = raw.messages.iter().collect();
    let mut by_id: HashMap<&str, usize> = HashMap::new();
    for (i, ev) in raw.events.iter().enumerate() {
        for p in [&ev.action.sender, &ev.action.receiver] {
            if !processes.contains(p) {
                return Err(ValidationError::UnknownProcess {
                    event: ev.id.clone(),
                    process: p.to_string(),
                });
            }
        }
        if ev.action.sender == ev.action.receiver {
            return Err(ValidationError::SelfChannel {
                event: ev.id.clone(),
                process: ev.action.sender.to_string(),
            });
        }
        if let Some(m) = &ev.message {
            if !messages.contains(m) {
                return Err(ValidationError::UnknownMessage {
                    event: ev.id.clone(),
                    message: m.to_string(),
                });
            }
        }
        if by_id.insert(ev.id.as_str(), i).is_some() {
            return Err(ValidationError::DuplicateEvent(ev.id.clone()));
        }
    }

    let proc_list: Vec<ProcessId> = processes.iter().map(|p| (*p).clone()).collect();
    let proc_index: HashMap<&ProcessId, usize> =
        proc_list.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut chains: Vec<Option<Vec<usize>>> = vec![None; proc_list.len()];
    let mut placed: Vec<Option<&ProcessId>> = vec![None; raw.events.len()];
    for (p, ids) in &raw.chains {
        let Some(&pi) = proc_index.get(p) else {
            return Err(ValidationError::ChainNotTotal {
                process: p.to_string(),
                detail: "chain declared for an undeclared process".into(),
            });
        };
        if chains[pi].is_some() {
            return Err(ValidationError::ChainNotTotal {
                process: p.to_string(),
                detail: "more than one chain declared".into(),
            });
        }
        let mut chain = Vec::with_capacity(ids.len());
        for id in ids {
            let &ei = by_id
                .get(id.as_str())
                .ok_or_else(|| ValidationError::UnknownEvent(id.clone()))?;
            if raw.events[ei].action.owner() != p {
                return Err(ValidationError::ChainNotTotal {
                    process: p.to_string(),
                    detail: format!(
                        "event `{id}` ({}) belongs to process `{}`",
                        raw.events[ei].action,
                        raw.events[ei].action.owner()
                    ),
                });
            }
            if placed[ei].is_some() {
                return Err(ValidationError::ChainNotTotal {
                    process: p.to_string(),
                    detail: format!("event `{id}` occurs twice"),
                });
            }
            placed[ei] = Some(p);
            chain.push(ei);
        }
        chains[pi] = Some(chain);
    }
    if let Some(ei) = placed.iter().position(Option::is_none) {
        let ev = &raw.events[ei];
        return Err(ValidationError::ChainNotTotal {
            process: ev.action.owner().to_string(),
            detail: format!("event `{}` is not placed in the chain", ev.id),
        });
    }

    let mut draft = Draft {
        processes: proc_list,
        messages: messages.into_iter().cloned().collect(),
        chains: Vec::new(),
        matches: Vec::new(),
    };
    let mut flat_of_raw = vec![0usize; raw.events.len()];
    let mut next = 0;
    for chain in chains {
        let chain = chain.unwrap_or_default();
        let mut evs = Vec::with_capacity(chain.len());
        for ei in chain {
            flat_of_raw[ei] = next;
            next += 1;
            evs.push(raw.events[ei].clone());
        }
        draft.chains.push(evs);
    }
    for (s, r) in &raw.matches {
        let &si = by_id
            .get(s.as_str())
            .ok_or_else(|| ValidationError::UnknownEvent(s.clone()))?;
        let &ri = by_id
            .get(r.as_str())
            .ok_or_else(|| ValidationError::UnknownEvent(r.clone()))?;
        draft.matches.push((flat_of_raw[si], flat_of_raw[ri]));
    }
    draft.finish()
}

/// Index-based intermediate form: events grouped per process (in the order of
/// `processes`), matches given as flat indices.
#[derive(Clone, Debug)]
pub(crate) struct Draft {
    pub processes: Vec<ProcessId>,
    pub messages: Vec<MsgId>,
    pub chains: Vec<Vec<Event>>,
    pub matches: Vec<(usize, usize)>,
}

impl Draft {
    pub(crate) fn finish(self) -> Result<CMsc, ValidationError> {
        let Draft {
            processes,
            messages,
            chains,
            mut matches,
        } = self;
        let mut chain_start = Vec::with_capacity(chains.len() + 1);
        let mut owner = Vec::new();
        let mut events = Vec::new();
        for (pi, chain) in chains.into_iter().enumerate() {
            chain_start.push(events.len());
            for ev in chain {
                owner.push(pi);
                events.push(ev);
            }
        }
        chain_start.push(events.len());
        let n = events.len();
        if n == 0 {
            return Err(ValidationError::Empty);
        }
        let rank = |i: usize| i - chain_start[owner[i]];
        let id = |i: usize| events[i].id.clone();

        matches.sort_unstable();
        matches.dedup();
        for &(s, r) in &matches {
            let (sa, ra) = (&events[s].action, &events[r].action);
            if !(sa.is_send() && ra.is_receive() && sa.channel() == ra.channel()) {
                return Err(ValidationError::MatchKind {
                    send: id(s),
                    send_action: sa.to_string(),
                    receive: id(r),
                    receive_action: ra.to_string(),
                });
            }
        }
        for (a, &(s1, r1)) in matches.iter().enumerate() {
            for &(s2, r2) in &matches[a + 1..] {
                if events[s1].action.channel() != events[s2].action.channel() {
                    continue;
                }
                let sends_before = rank(s1) <= rank(s2);
                let recvs_before = rank(r1) <= rank(r2);
                let sends_after = rank(s2) <= rank(s1);
                let recvs_after = rank(r2) <= rank(r1);
                if sends_before != recvs_before || sends_after != recvs_after {
                    let (from, to) = events[s1].action.channel();
                    return Err(ValidationError::Fifo {
                        sender: from.to_string(),
                        receiver: to.to_string(),
                        first_send: id(s1),
                        first_receive: id(r1),
                        second_send: id(s2),
                        second_receive: id(r2),
                    });
                }
            }
        }
        let mut partner = vec![None; n];
        for &(s, r) in &matches {
            partner[s] = Some(r);
            partner[r] = Some(s);
        }

        // Kahn's algorithm over process successors and message edges.
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for i in 0..n {
            if i + 1 < n && owner[i + 1] == owner[i] {
                succ[i].push(i + 1);
                indeg[i + 1] += 1;
            }
        }
        for &(s, r) in &matches {
            succ[s].push(r);
            indeg[r] += 1;
        }
        let mut topo = Vec::with_capacity(n);
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(i) = ready.pop() {
            topo.push(i);
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push(j);
                }
            }
        }
        if topo.len() < n {
            let mut stuck: Vec<String> = (0..n).filter(|&i| indeg[i] > 0).map(id).collect();
            stuck.sort();
            return Err(ValidationError::Cyclic { events: stuck });
        }
        let mut order = BitMatrix::identity(n);
        for &i in topo.iter().rev() {
            for &j in &succ[i] {
                order.or_row_into(j, i);
            }
        }

        for i in 0..n {
            match (&partner[i], &events[i].message) {
                (None, None) => return Err(ValidationError::MissingMessage { event: id(i) }),
                (Some(_), Some(m)) => {
                    return Err(ValidationError::SpuriousMessage {
                        event: id(i),
                        message: m.to_string(),
                    })
                }
                _ => {}
            }
        }

        for &(e, f) in &matches {
            for g in (0..n).filter(|&g| partner[g].is_none()) {
                let ga = &events[g].action;
                let bad = (ga == &events[e].action && !(order.get(e, g) && e != g))
                    || (ga == &events[f].action && !(order.get(g, f) && g != f));
                if bad {
                    return Err(ValidationError::Tail {
                        unmatched: id(g),
                        matched: if ga == &events[e].action { id(e) } else { id(f) },
                        action: ga.to_string(),
                    });
                }
            }
        }

        Ok(CMsc {
            processes,
            messages,
            events,
            chain_start,
            owner,
            partner,
            order,
        })
    }
}

/// Square bit matrix; row `i` holds the set `{ j | i ≤ j }`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn identity(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut m = BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        };
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] & (1 << (j % 64)) != 0
    }

    /// row[dst] |= row[src]
    fn or_row_into(&mut self, src: usize, dst: usize) {
        for w in 0..self.words {
            let v = self.bits[src * self.words + w];
            self.bits[dst * self.words + w] |= v;
        }
    }
}

/// A validated, finite compositional MSC.
///
/// Events are stored grouped by process (processes sorted by name) and by
/// rank within each process, so an event index determines `(process, rank)`.
#[derive(Clone, Debug)]
pub struct CMsc {
    processes: Vec<ProcessId>,
    messages: Vec<MsgId>,
    events: Vec<Event>,
    chain_start: Vec<usize>,
    owner: Vec<usize>,
    partner: Vec<Option<usize>>,
    order: BitMatrix,
}

impl CMsc {
    /// Declared processes, sorted.
    pub fn processes(&self) -> &[ProcessId] {
        &self.processes
    }

    /// Declared messages, sorted.
    pub fn messages(&self) -> &[MsgId] {
        &self.messages
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, i: usize) -> &Event {
        &self.events[i]
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn action(&self, i: usize) -> &Action {
        &self.events[i].action
    }

    /// Index (into [`CMsc::processes`]) of the process executing event `i`.
    pub fn owner_index(&self, i: usize) -> usize {
        self.owner[i]
    }

    pub fn owner(&self, i: usize) -> &ProcessId {
        &self.processes[self.owner[i]]
    }

    pub fn rank(&self, i: usize) -> usize {
        i - self.chain_start[self.owner[i]]
    }

    /// Event indices of the process with index `pi`, in process order.
    pub fn chain(&self, pi: usize) -> std::ops::Range<usize> {
        self.chain_start[pi]..self.chain_start[pi + 1]
    }

    pub fn chain_of(&self, p: &ProcessId) -> std::ops::Range<usize> {
        match self.processes.binary_search(p) {
            Ok(pi) => self.chain(pi),
            Err(_) => 0..0,
        }
    }

    pub fn partner(&self, i: usize) -> Option<usize> {
        self.partner[i]
    }

    pub fn is_matched(&self, i: usize) -> bool {
        self.partner[i].is_some()
    }

    /// `i ◁ j`
    pub fn is_match(&self, i: usize, j: usize) -> bool {
        self.partner[i] == Some(j) && self.events[i].action.is_send()
    }

    /// `i ≤ j`
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order.get(i, j)
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.order.get(i, j)
    }

    /// `i ≤_p j` for the common process `p` of both events.
    pub fn leq_proc(&self, i: usize, j: usize) -> bool {
        self.owner[i] == self.owner[j] && i <= j
    }

    /// `i → j`: direct process successor.
    pub fn next(&self, i: usize, j: usize) -> bool {
        j == i + 1 && self.owner[i] == self.owner[j]
    }

    /// Unmatched events, `unm(M)`.
    pub fn unmatched(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.partner[i].is_none())
    }

    /// Message label `μ(i)`.
    pub fn message(&self, i: usize) -> Option<&MsgId> {
        self.events[i].message.as_ref()
    }

    /// Processes with at least one event.
    pub fn active_processes(&self) -> Vec<ProcessId> {
        (0..self.processes.len())
            .filter(|&pi| !self.chain(pi).is_empty())
            .map(|pi| self.processes[pi].clone())
            .collect()
    }

    pub fn find_event(&self, id: &str) -> Option<usize> {
        self.events.iter().position(|e| e.id == id)
    }

    /// An MSC is a cMSC without unmatched events.
    pub fn is_msc(&self) -> bool {
        self.partner.iter().all(Option::is_some)
    }

    /// Connectivity of the undirected event graph over `→ ∪ ◁`.
    pub fn connected(&self) -> bool {
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            if i + 1 < n && self.owner[i + 1] == self.owner[i] {
                uf.union(i, i + 1);
            }
            if let Some(j) = self.partner[i] {
                uf.union(i, j);
            }
        }
        uf.components() == 1
    }

    pub fn communication_graph(&self) -> CommGraph {
        CommGraph::from_actions(self.events.iter().map(|e| &e.action))
    }

    /// Connectivity of the communication graph over active processes.
    pub fn weakly_connected(&self) -> bool {
        self.communication_graph().is_connected()
    }

    /// Isomorphism-invariant encoding: events become `(process, rank)`.
    pub fn canonical(&self) -> Canonical {
        let mut out = Vec::new();
        for pi in 0..self.processes.len() {
            let range = self.chain(pi);
            if range.is_empty() {
                continue;
            }
            let evs = range
                .map(|i| CanonEvent {
                    action: self.events[i].action.clone(),
                    link: match self.partner[i] {
                        Some(j) => Link::Matched(self.rank(j)),
                        None => Link::Open(self.events[i].message.clone().expect("validated")),
                    },
                })
                .collect();
            out.push((self.processes[pi].clone(), evs));
        }
        Canonical(out)
    }

    /// True if both denote the same cMSC up to event renaming.
    pub fn isomorphic(&self, other: &CMsc) -> bool {
        self.canonical() == other.canonical()
    }

    /// Back to the raw form (event ids preserved), e.g. for printing.
    pub fn to_raw(&self) -> RawCmsc {
        let matches = (0..self.len())
            .filter_map(|i| {
                self.partner[i]
                    .filter(|_| self.events[i].action.is_send())
                    .map(|j| (self.events[i].id.clone(), self.events[j].id.clone()))
            })
            .collect();
        RawCmsc::from_lines(
            self.processes.clone(),
            self.messages.clone(),
            self.events.clone(),
            matches,
        )
    }

    /// Same events, processes and messages widened to include the given ones.
    pub fn with_declarations(&self, processes: &[ProcessId], messages: &[MsgId]) -> CMsc {
        let procs: BTreeSet<ProcessId> = self
            .processes
            .iter()
            .chain(processes)
            .cloned()
            .collect();
        let msgs: BTreeSet<MsgId> = self.messages.iter().chain(messages).cloned().collect();
        let mut raw = self.to_raw();
        raw.processes = procs.into_iter().collect();
        raw.messages = msgs.into_iter().collect();
        raw.validate().expect("widening declarations keeps validity")
    }

    /// The process-order/match edges as a flat list (used by renderers).
    pub fn match_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|i| self.partner[i].filter(|_| self.events[i].action.is_send()).map(|j| (i, j)))
            .collect()
    }

    #[allow(dead_code)]
    pub(crate) fn to_draft(&self) -> Draft {
        Draft {
            processes: self.processes.clone(),
            messages: self.messages.clone(),
            chains: (0..self.processes.len())
                .map(|pi| self.chain(pi).map(|i| self.events[i].clone()).collect())
                .collect(),
            matches: self.match_pairs(),
        }
    }

    /// Total orders extending `≤`, at most `cap` of them.
    pub fn linearizations(&self, cap: usize) -> Result<Vec<Vec<usize>>, CapExceeded> {
        let n = self.len();
        let mut preds = vec![0usize; n];
        for i in 0..n {
            if i > 0 && self.owner[i - 1] == self.owner[i] {
                preds[i] += 1;
            }
            if self.events[i].action.is_receive() && self.partner[i].is_some() {
                preds[i] += 1;
            }
        }
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(n);
        let mut used = vec![false; n];
        let complete = self.linearize_rec(&mut preds, &mut used, &mut current, &mut out, cap);
        if complete {
            Ok(out)
        } else {
            Err(CapExceeded { cap, partial: out })
        }
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let next = (i + 1 < self.len() && self.owner[i + 1] == self.owner[i]).then_some(i + 1);
        let msg = self.partner[i].filter(|_| self.events[i].action.is_send());
        next.into_iter().chain(msg)
    }

    fn linearize_rec(
        &self,
        preds: &mut Vec<usize>,
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if current.len() == self.len() {
            if out.len() == cap {
                return false;
            }
            out.push(current.clone());
            return true;
        }
        for i in 0..self.len() {
            if used[i] || preds[i] != 0 {
                continue;
            }
            used[i] = true;
            current.push(i);
            let succs: Vec<usize> = self.successors(i).collect();
            for &j in &succs {
                preds[j] -= 1;
            }
            let ok = self.linearize_rec(preds, used, current, out, cap);
            for &j in &succs {
                preds[j] += 1;
            }
            current.pop();
            used[i] = false;
            if !ok {
                return false;
            }
        }
        true
    }
}

/// More linearizations exist than the cap allows; `partial` holds the first `cap`.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("more than {cap} linearizations")]
pub struct CapExceeded {
    pub cap: usize,
    pub partial: Vec<Vec<usize>>,
}

/// Undirected communication graph over active processes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommGraph {
    pub nodes: BTreeSet<ProcessId>,
    pub edges: BTreeSet<(ProcessId, ProcessId)>,
}

impl CommGraph {
    /// Nodes are the owners of the actions; `p–q` is an edge when both a
    /// send on channel `(p,q)` and a receive on the same channel occur (in
    /// either direction).
    pub fn from_actions<'a>(actions: impl IntoIterator<Item = &'a Action>) -> CommGraph {
        let mut nodes = BTreeSet::new();
        let mut sends = BTreeSet::new();
        let mut recvs = BTreeSet::new();
        for a in actions {
            nodes.insert(a.owner().clone());
            let ch = (a.sender.clone(), a.receiver.clone());
            if a.is_send() {
                sends.insert(ch);
            } else {
                recvs.insert(ch);
            }
        }
        let edges = sends
            .intersection(&recvs)
            .map(|(p, q)| if p <= q { (p.clone(), q.clone()) } else { (q.clone(), p.clone()) })
            .collect();
        CommGraph { nodes, edges }
    }

    pub fn is_connected(&self) -> bool {
        let nodes: Vec<&ProcessId> = self.nodes.iter().collect();
        if nodes.len() <= 1 {
            return true;
        }
        let index: BTreeMap<&ProcessId, usize> =
            nodes.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut uf = UnionFind::new(nodes.len());
        for (p, q) in &self.edges {
            uf.union(index[p], index[q]);
        }
        uf.components() == 1
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    pub(crate) fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// Link of an event in a canonical encoding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Link {
    /// Matched with the event of this rank on the peer process.
    Matched(usize),
    /// Unmatched, carrying this message.
    Open(MsgId),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CanonEvent {
    pub action: Action,
    pub link: Link,
}

/// Canonical encoding of a cMSC: per active process (sorted), the sequence of
/// events. Equal encodings iff isomorphic cMSCs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Canonical(pub Vec<(ProcessId, Vec<CanonEvent>)>);

impl Canonical {
    /// Decodes into a raw structure with ids `p.0, p.1, …`.
    pub fn to_raw(&self) -> RawCmsc {
        let id = |p: &ProcessId, r: usize| format!("{p}.{r}");
        let mut processes = BTreeSet::new();
        let mut messages = BTreeSet::new();
        let mut events = Vec::new();
        let mut matches = Vec::new();
        for (p, evs) in &self.0 {
            for (r, ev) in evs.iter().enumerate() {
                processes.insert(ev.action.sender.clone());
                processes.insert(ev.action.receiver.clone());
                let message = match &ev.link {
                    Link::Matched(pr) => {
                        if ev.action.is_send() {
                            matches.push((id(p, r), id(ev.action.peer(), *pr)));
                        }
                        None
                    }
                    Link::Open(m) => {
                        messages.insert(m.clone());
                        Some(m.clone())
                    }
                };
                events.push(Event::new(id(p, r), ev.action.clone(), message));
            }
        }
        RawCmsc::from_lines(
            processes.into_iter().collect(),
            messages.into_iter().collect(),
            events,
            matches,
        )
    }

    pub fn event_count(&self) -> usize {
        self.0.iter().map(|(_, evs)| evs.len()).sum()
    }
}

/// Bounds for enumerating every validated cMSC of a finite universe.
#[derive(Clone, Debug)]
pub struct Universe {
    pub processes: Vec<ProcessId>,
    pub messages: Vec<MsgId>,
    pub max_events: usize,
    pub max_per_process: Option<usize>,
    /// Only enumerate complete MSCs.
    pub complete_only: bool,
}

impl Universe {
    pub fn new(processes: &[ProcessId], messages: &[MsgId], max_events: usize) -> Universe {
        let processes: BTreeSet<_> = processes.iter().cloned().collect();
        let messages: BTreeSet<_> = messages.iter().cloned().collect();
        Universe {
            processes: processes.into_iter().collect(),
            messages: messages.into_iter().collect(),
            max_events,
            max_per_process: None,
            complete_only: false,
        }
    }

    pub fn complete(mut self) -> Universe {
        self.complete_only = true;
        self
    }

    pub fn per_process(mut self, max: usize) -> Universe {
        self.max_per_process = Some(max);
        self
    }

    /// Every validated cMSC within the bounds, each isomorphism class once.
    ///
    /// On a channel, the matched sends of a valid cMSC are the earliest sends
    /// and the matched receives are the latest receives, paired in order; so
    /// per channel only the number of matched pairs is chosen.
    pub fn enumerate(&self) -> Vec<CMsc> {
        let mut out = Vec::new();
        self.for_each(|m| out.push(m));
        out
    }

    pub fn for_each(&self, mut f: impl FnMut(CMsc)) {
        let alphabets: Vec<Vec<Action>> = self
            .processes
            .iter()
            .map(|p| {
                let mut acts = Vec::new();
                for q in self.processes.iter().filter(|q| *q != p) {
                    acts.push(Action::send(p, q));
                    acts.push(Action::receive(p, q));
                }
                acts
            })
            .collect();
        let cap = self.max_per_process.unwrap_or(self.max_events);
        let mut counts = vec![0usize; self.processes.len()];
        for total in 1..=self.max_events {
            distribute(total, cap, 0, &mut counts, &mut |counts| {
                let mut seqs: Vec<Vec<Action>> = vec![Vec::new(); counts.len()];
                self.sequences(&alphabets, counts, 0, &mut seqs, &mut f);
            });
        }
    }

    fn sequences(
        &self,
        alphabets: &[Vec<Action>],
        counts: &[usize],
        pi: usize,
        seqs: &mut Vec<Vec<Action>>,
        f: &mut impl FnMut(CMsc),
    ) {
        if pi == counts.len() {
            self.matchings(seqs, f);
            return;
        }
        if alphabets[pi].is_empty() {
            if counts[pi] == 0 {
                self.sequences(alphabets, counts, pi + 1, seqs, f);
            }
            return;
        }
        let k = alphabets[pi].len();
        let total = k.pow(counts[pi] as u32);
        for code in 0..total {
            let mut c = code;
            seqs[pi].clear();
            for _ in 0..counts[pi] {
                seqs[pi].push(alphabets[pi][c % k].clone());
                c /= k;
            }
            self.sequences(alphabets, counts, pi + 1, seqs, f);
        }
        seqs[pi].clear();
    }

    fn matchings(&self, seqs: &[Vec<Action>], f: &mut impl FnMut(CMsc)) {
        let starts: Vec<usize> = seqs
            .iter()
            .scan(0, |acc, s| {
                let st = *acc;
                *acc += s.len();
                Some(st)
            })
            .collect();
        let mut channels: BTreeMap<(ProcessId, ProcessId), (Vec<usize>, Vec<usize>)> =
            BTreeMap::new();
        for (pi, seq) in seqs.iter().enumerate() {
            for (r, a) in seq.iter().enumerate() {
                let entry = channels
                    .entry((a.sender.clone(), a.receiver.clone()))
                    .or_default();
                if a.is_send() {
                    entry.0.push(starts[pi] + r);
                } else {
                    entry.1.push(starts[pi] + r);
                }
            }
        }
        let chans: Vec<(Vec<usize>, Vec<usize>)> = channels.into_values().collect();
        let ranges: Vec<Vec<usize>> = chans
            .iter()
            .map(|(s, r)| {
                let max = s.len().min(r.len());
                if self.complete_only {
                    if s.len() == r.len() {
                        vec![max]
                    } else {
                        vec![]
                    }
                } else {
                    (0..=max).collect()
                }
            })
            .collect();
        if ranges.iter().any(Vec::is_empty) {
            return;
        }
        let mut choice = vec![0usize; chans.len()];
        loop {
            let mut matches = Vec::new();
            for (ci, (s, r)) in chans.iter().enumerate() {
                let k = ranges[ci][choice[ci]];
                for t in 0..k {
                    matches.push((s[t], r[r.len() - k + t]));
                }
            }
            self.labelings(seqs, &matches, f);
            // odometer
            let mut ci = 0;
            loop {
                if ci == chans.len() {
                    return;
                }
                choice[ci] += 1;
                if choice[ci] < ranges[ci].len() {
                    break;
                }
                choice[ci] = 0;
                ci += 1;
            }
        }
    }

    fn labelings(&self, seqs: &[Vec<Action>], matches: &[(usize, usize)], f: &mut impl FnMut(CMsc)) {
        let n: usize = seqs.iter().map(Vec::len).sum();
        let mut matched = vec![false; n];
        for &(s, r) in matches {
            matched[s] = true;
            matched[r] = true;
        }
        let open: Vec<usize> = (0..n).filter(|&i| !matched[i]).collect();
        if !open.is_empty() && self.messages.is_empty() {
            return;
        }
        let k = self.messages.len().max(1);
        let total = k.pow(open.len() as u32);
        for code in 0..total {
            let mut labels: Vec<Option<MsgId>> = vec![None; n];
            let mut c = code;
            for &i in &open {
                labels[i] = Some(self.messages[c % k].clone());
                c /= k;
            }
            let mut flat = 0;
            let chains = seqs
                .iter()
                .map(|seq| {
                    seq.iter()
                        .map(|a| {
                            let ev = Event::new(format!("e{flat}"), a.clone(), labels[flat].clone());
                            flat += 1;
                            ev
                        })
                        .collect()
                })
                .collect();
            let draft = Draft {
                processes: self.processes.clone(),
                messages: self.messages.clone(),
                chains,
                matches: matches.to_vec(),
            };
            if let Ok(m) = draft.finish() {
                f(m);
            }
        }
    }
}

fn distribute(total: usize, cap: usize, pi: usize, counts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pi + 1 == counts.len() {
        if total <= cap {
            counts[pi] = total;
            f(counts);
        }
        return;
    }
    for c in 0..=total.min(cap) {
        counts[pi] = c;
        distribute(total - c, cap, pi + 1, counts, f);
    }
    counts[pi] = 0;
}
