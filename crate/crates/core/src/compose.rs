//! Concatenation of cMSCs.
//!
//! Concatenating `M1` and `M2` places `M2` after `M1` on every process and may
//! add matches from unmatched sends of `M1` to unmatched receives of `M2`.
//! The result is a set: one cMSC for every admissible choice of new matches.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::cmsc::{CMsc, Canonical, Draft, Event, MsgId, ProcessId};

/// A set of cMSCs up to isomorphism.
pub type CMscSet = BTreeMap<Canonical, CMsc>;

pub fn insert(set: &mut CMscSet, m: CMsc) -> bool {
    let key = m.canonical();
    if set.contains_key(&key) {
        false
    } else {
        set.insert(key, m);
        true
    }
}

pub fn set_of(items: impl IntoIterator<Item = CMsc>) -> CMscSet {
    let mut set = CMscSet::new();
    for m in items {
        insert(&mut set, m);
    }
    set
}

/// A concatenation result with, for each of its events, the factor it came
/// from and its index inside that factor.
#[derive(Clone, Debug)]
pub struct Stacked {
    pub result: CMsc,
    pub origin: Vec<(usize, usize)>,
}

/// `M1 ∘ M2`, one result per admissible choice of new matches.
pub fn concat_pair(m1: &CMsc, m2: &CMsc) -> Vec<CMsc> {
    let origin: Vec<(usize, usize)> = (0..m1.len()).map(|i| (0, i)).collect();
    extend(m1, &origin, m2, 1)
        .into_iter()
        .map(|s| s.result)
        .collect()
}

/// `M1 ∘ M2` with event provenance.
pub fn concat_pair_traced(m1: &CMsc, m2: &CMsc) -> Vec<Stacked> {
    let origin: Vec<(usize, usize)> = (0..m1.len()).map(|i| (0, i)).collect();
    extend(m1, &origin, m2, 1)
}

/// `M1 ∘ M2 ∘ … ∘ Mk`, folded from the left.
pub fn stack_all(factors: &[CMsc]) -> Vec<Stacked> {
    let Some(first) = factors.first() else {
        return Vec::new();
    };
    let mut current = vec![Stacked {
        result: first.clone(),
        origin: (0..first.len()).map(|i| (0, i)).collect(),
    }];
    for (fi, m) in factors.iter().enumerate().skip(1) {
        let mut next = Vec::new();
        for st in &current {
            next.extend(extend(&st.result, &st.origin, m, fi));
        }
        current = next;
    }
    current
}

/// `L1 ∘ L2` for sets.
pub fn concat_sets(l1: &CMscSet, l2: &CMscSet) -> CMscSet {
    let mut out = CMscSet::new();
    for m1 in l1.values() {
        for m2 in l2.values() {
            for m in concat_pair(m1, m2) {
                insert(&mut out, m);
            }
        }
    }
    out
}

fn extend(m1: &CMsc, origin1: &[(usize, usize)], m2: &CMsc, factor: usize) -> Vec<Stacked> {
    let processes: Vec<ProcessId> = m1
        .processes()
        .iter()
        .chain(m2.processes())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let messages: Vec<MsgId> = m1
        .messages()
        .iter()
        .chain(m2.messages())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut taken: HashSet<String> = m1.events().iter().map(|e| e.id.clone()).collect();
    let renamed: Vec<String> = m2
        .events()
        .iter()
        .map(|e| {
            let mut id = e.id.clone();
            while taken.contains(&id) {
                id.push('\'');
            }
            taken.insert(id.clone());
            id
        })
        .collect();

    // Flat layout of the result: per process, M1's chain then M2's chain.
    let mut chains: Vec<Vec<Event>> = Vec::with_capacity(processes.len());
    let mut origin = Vec::with_capacity(m1.len() + m2.len());
    let mut pos1 = vec![0usize; m1.len()];
    let mut pos2 = vec![0usize; m2.len()];
    for p in &processes {
        let mut chain = Vec::new();
        for i in m1.chain_of(p) {
            pos1[i] = origin.len();
            origin.push(origin1[i]);
            chain.push(m1.event(i).clone());
        }
        for i in m2.chain_of(p) {
            pos2[i] = origin.len();
            origin.push((factor, i));
            let mut ev = m2.event(i).clone();
            ev.id = renamed[i].clone();
            chain.push(ev);
        }
        chains.push(chain);
    }
    let mut base_matches: Vec<(usize, usize)> = m1
        .match_pairs()
        .into_iter()
        .map(|(s, r)| (pos1[s], pos1[r]))
        .collect();
    base_matches.extend(m2.match_pairs().into_iter().map(|(s, r)| (pos2[s], pos2[r])));

    // Per channel: unmatched sends of M1, unmatched receives of M2, and the
    // admissible numbers of new matches.
    type Channel = (ProcessId, ProcessId);
    let mut open_sends: BTreeMap<Channel, Vec<usize>> = BTreeMap::new();
    let mut open_recvs: BTreeMap<Channel, Vec<usize>> = BTreeMap::new();
    let mut inner1: BTreeSet<Channel> = BTreeSet::new();
    let mut inner2: BTreeSet<Channel> = BTreeSet::new();
    for i in 0..m1.len() {
        let a = m1.action(i);
        let ch = (a.sender.clone(), a.receiver.clone());
        if m1.is_matched(i) {
            inner1.insert(ch);
        } else if a.is_send() {
            open_sends.entry(ch).or_default().push(i);
        }
    }
    for i in 0..m2.len() {
        let a = m2.action(i);
        let ch = (a.sender.clone(), a.receiver.clone());
        if m2.is_matched(i) {
            inner2.insert(ch);
        } else if a.is_receive() {
            open_recvs.entry(ch).or_default().push(i);
        }
    }
    let channels: BTreeSet<Channel> = open_sends
        .keys()
        .chain(open_recvs.keys())
        .chain(inner1.iter())
        .chain(inner2.iter())
        .cloned()
        .collect();
    let mut options: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
    for ch in &channels {
        let s = open_sends.get(ch).map(Vec::as_slice).unwrap_or(&[]);
        let r = open_recvs.get(ch).map(Vec::as_slice).unwrap_or(&[]);
        let mut lo = 0;
        if inner2.contains(ch) {
            lo = lo.max(s.len());
        }
        if inner1.contains(ch) {
            lo = lo.max(r.len());
        }
        let hi = s.len().min(r.len());
        let mut choices = Vec::new();
        for k in lo..=hi {
            let pairs: Vec<(usize, usize)> = (0..k).map(|t| (s[t], r[r.len() - k + t])).collect();
            if pairs.iter().all(|&(a, b)| m1.message(a) == m2.message(b)) {
                choices.push(pairs.into_iter().map(|(a, b)| (pos1[a], pos2[b])).collect());
            }
        }
        if choices.is_empty() {
            return Vec::new();
        }
        options.push(choices);
    }

    let mut out = Vec::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        let mut matches = base_matches.clone();
        let mut chains = chains.clone();
        for (ci, choice) in options.iter().enumerate() {
            for &(s, r) in &choice[pick[ci]] {
                matches.push((s, r));
                clear_message(&mut chains, s);
                clear_message(&mut chains, r);
            }
        }
        let draft = Draft {
            processes: processes.clone(),
            messages: messages.clone(),
            chains,
            matches,
        };
        if let Ok(result) = draft.finish() {
            out.push(Stacked {
                result,
                origin: origin.clone(),
            });
        }
        let mut ci = 0;
        loop {
            if ci == options.len() {
                return out;
            }
            pick[ci] += 1;
            if pick[ci] < options[ci].len() {
                break;
            }
            pick[ci] = 0;
            ci += 1;
        }
    }
}

fn clear_message(chains: &mut [Vec<Event>], mut flat: usize) {
    for chain in chains {
        if flat < chain.len() {
            chain[flat].message = None;
            return;
        }
        flat -= chain.len();
    }
}
