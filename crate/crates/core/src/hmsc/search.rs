//! Forward searches over queue configurations.
//!
//! Along a path, a prefix can only be completed to an MSC if every unmatched
//! receive of a label consumes the oldest pending send of its channel (with
//! the same message), and a label with an internal match on a channel finds
//! that channel's queue empty once its receives are served. The unmatched
//! sends of the label are then appended. This makes the configuration reached
//! by a path unique.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::cmsc::{MsgId, ProcessId};

use super::{HmscError, Hmsc};

type Queues = Vec<Vec<u16>>;

struct ChannelEffect {
    channel: usize,
    receives: Vec<u16>,
    internal: bool,
    sends: Vec<u16>,
}

pub(crate) struct Effects {
    per_label: Vec<Vec<ChannelEffect>>,
    channels: usize,
}

impl Effects {
    pub(crate) fn new(h: &Hmsc) -> Self {
        let mut channels: BTreeMap<(ProcessId, ProcessId), usize> = BTreeMap::new();
        let mut messages: BTreeMap<MsgId, u16> = BTreeMap::new();
        for (_, m) in &h.labels {
            for e in m.events() {
                let n = channels.len();
                channels
                    .entry((e.action.sender.clone(), e.action.receiver.clone()))
                    .or_insert(n);
                if let Some(msg) = &e.message {
                    let k = messages.len() as u16;
                    messages.entry(msg.clone()).or_insert(k);
                }
            }
        }
        let per_label = h
            .labels
            .iter()
            .map(|(_, m)| {
                let mut by_channel: BTreeMap<usize, ChannelEffect> = BTreeMap::new();
                for i in 0..m.len() {
                    let a = m.action(i);
                    let c = channels[&(a.sender.clone(), a.receiver.clone())];
                    let eff = by_channel.entry(c).or_insert_with(|| ChannelEffect {
                        channel: c,
                        receives: Vec::new(),
                        internal: false,
                        sends: Vec::new(),
                    });
                    match m.message(i) {
                        None => eff.internal = true,
                        Some(msg) if a.is_send() => eff.sends.push(messages[msg]),
                        Some(msg) => eff.receives.push(messages[msg]),
                    }
                }
                by_channel.into_values().collect()
            })
            .collect();
        Effects {
            per_label,
            channels: channels.len(),
        }
    }

    pub(crate) fn empty(&self) -> Queues {
        vec![Vec::new(); self.channels]
    }

    /// Queues after appending `label`, or `None` if no completion exists.
    pub(crate) fn apply(&self, queues: &Queues, label: usize) -> Option<Queues> {
        let mut out = queues.clone();
        for eff in &self.per_label[label] {
            let q = &mut out[eff.channel];
            if q.len() < eff.receives.len() || q[..eff.receives.len()] != eff.receives[..] {
                return None;
            }
            q.drain(..eff.receives.len());
            if eff.internal && !q.is_empty() {
                return None;
            }
            q.extend_from_slice(&eff.sends);
        }
        Some(out)
    }
}

fn total(q: &Queues) -> usize {
    q.iter().map(Vec::len).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    /// An accepting path whose concatenation contains an MSC.
    Sat { path: Vec<usize> },
    /// No such path within the bounds.
    Unknown { explored: usize },
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat { .. })
    }
}

fn rebuild(parents: &[(usize, usize)], mut node: usize) -> Vec<usize> {
    let mut path = Vec::new();
    while node != 0 {
        let (p, t) = parents[node];
        path.push(t);
        node = p;
    }
    path.reverse();
    path
}

/// Breadth-first search for an accepting path whose concatenation contains
/// an MSC, with at most `max_steps` transitions and `max_queue` pending
/// messages. The witness is the least path by (length, transition ids).
pub fn sat_search(h: &Hmsc, max_steps: usize, max_queue: usize) -> SatVerdict {
    let effects = Effects::new(h);
    let useful = h.co_reachable();
    let mut seen: HashMap<(usize, Queues), usize> = HashMap::new();
    // node 0 is the root; parents[i] = (parent node, transition)
    let mut parents: Vec<(usize, usize)> = vec![(0, usize::MAX)];
    let mut queue: VecDeque<(usize, usize, Queues, usize)> = VecDeque::new();
    queue.push_back((0, h.initial, effects.empty(), 0));
    while let Some((node, state, queues, depth)) = queue.pop_front() {
        if depth == max_steps {
            continue;
        }
        for t in h.outgoing(state) {
            let tr = h.transitions[t];
            if !useful.contains(&tr.to) {
                continue;
            }
            let Some(next) = effects.apply(&queues, tr.label) else {
                continue;
            };
            if total(&next) > max_queue {
                continue;
            }
            let done = h.finals.contains(&tr.to) && total(&next) == 0;
            if seen.contains_key(&(tr.to, next.clone())) && !done {
                continue;
            }
            parents.push((node, t));
            let id = parents.len() - 1;
            if done {
                return SatVerdict::Sat {
                    path: rebuild(&parents, id),
                };
            }
            seen.insert((tr.to, next.clone()), id);
            queue.push_back((id, tr.to, next, depth + 1));
        }
    }
    SatVerdict::Unknown {
        explored: parents.len() - 1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SafeVerdict {
    /// An accepting path whose concatenation contains no MSC.
    Unsafe { path: Vec<usize> },
    /// Every accepting path up to the bound yields an MSC.
    Safe { bound: usize },
}

/// Searches for an accepting path of length at most `max_path_len` whose
/// concatenation set contains no MSC.
pub fn safe_bounded(h: &Hmsc, max_path_len: usize) -> Result<SafeVerdict, HmscError> {
    if !h.omega.is_empty() {
        return Err(HmscError::OmegaUnsupported);
    }
    let effects = Effects::new(h);
    let useful = h.co_reachable();
    let mut seen: HashMap<(usize, Option<Queues>), ()> = HashMap::new();
    let mut parents: Vec<(usize, usize)> = vec![(0, usize::MAX)];
    let mut queue: VecDeque<(usize, usize, Option<Queues>, usize)> = VecDeque::new();
    queue.push_back((0, h.initial, Some(effects.empty()), 0));
    while let Some((node, state, config, depth)) = queue.pop_front() {
        if depth == max_path_len {
            continue;
        }
        for t in h.outgoing(state) {
            let tr = h.transitions[t];
            if !useful.contains(&tr.to) {
                continue;
            }
            let next = config.as_ref().and_then(|q| effects.apply(q, tr.label));
            let bad = h.finals.contains(&tr.to)
                && next.as_ref().map(|q| total(q) > 0).unwrap_or(true);
            if !bad && seen.contains_key(&(tr.to, next.clone())) {
                continue;
            }
            parents.push((node, t));
            let id = parents.len() - 1;
            if bad {
                return Ok(SafeVerdict::Unsafe {
                    path: rebuild(&parents, id),
                });
            }
            seen.insert((tr.to, next.clone()), ());
            queue.push_back((id, tr.to, next, depth + 1));
        }
    }
    Ok(SafeVerdict::Safe { bound: max_path_len })
}
