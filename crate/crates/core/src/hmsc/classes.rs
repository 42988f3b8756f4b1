//! Loop-connectedness (bounded) and weak loop-connectedness (exact).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::cmsc::{Canonical, CommGraph};
use crate::compose::{concat_sets, set_of, CMscSet};

use super::{Hmsc, HmscError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoopVerdict {
    /// Every closed path up to the bound yields only connected cMSCs.
    Pass { bound: usize },
    /// A closed path (transition ids) with a disconnected element.
    Violation { cycle: Vec<usize> },
}

/// Checks every closed path of length at most `max_cycle_len`. Paths are
/// explored by increasing length, so a reported cycle is a shortest one.
pub fn loop_connected_bounded(h: &Hmsc, max_cycle_len: usize) -> LoopVerdict {
    let mut seen: HashSet<(usize, usize, Vec<Canonical>)> = HashSet::new();
    let mut frontier: Vec<(usize, usize, Vec<usize>, CMscSet)> = (0..h.states.len())
        .map(|s| (s, s, Vec::new(), CMscSet::new()))
        .collect();
    for _ in 0..max_cycle_len {
        let mut next = Vec::new();
        for (start, state, path, set) in &frontier {
            for t in h.outgoing(*state) {
                let label = set_of([h.label_of(t).clone()]);
                let grown = if path.is_empty() { label } else { concat_sets(set, &label) };
                if grown.is_empty() {
                    continue;
                }
                let to = h.transitions[t].to;
                let mut walk = path.clone();
                walk.push(t);
                if to == *start && grown.values().any(|m| !m.connected()) {
                    return LoopVerdict::Violation { cycle: walk };
                }
                if !seen.insert((*start, to, grown.keys().cloned().collect())) {
                    continue;
                }
                next.push((*start, to, walk, grown));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    LoopVerdict::Pass {
        bound: max_cycle_len,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WlcVerdict {
    Pass,
    /// A closed path whose cMSCs are not weakly connected.
    Violation { cycle: Vec<usize> },
}

/// Largest strongly connected component (in transitions) the exact check
/// enumerates.
pub const MAX_SCC_EDGES: usize = 20;

/// Exact weak loop-connectedness.
///
/// All cMSCs of a path share its multiset of actions, hence its
/// communication graph. The edge sets of closed paths are exactly the
/// strongly connected sets of transitions, so it suffices to enumerate
/// those inside each strongly connected component.
pub fn weakly_loop_connected_exact(h: &Hmsc) -> Result<WlcVerdict, HmscError> {
    for comp in components(h) {
        if comp.len() > MAX_SCC_EDGES {
            return Err(HmscError::TooManyEdges {
                edges: comp.len(),
                limit: MAX_SCC_EDGES,
            });
        }
        let mut verdicts: HashMap<BTreeSet<usize>, bool> = HashMap::new();
        for mask in 1u32..(1u32 << comp.len()) {
            let edges: Vec<usize> = (0..comp.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| comp[i])
                .collect();
            if !strongly_connected(h, &edges) {
                continue;
            }
            let labels: BTreeSet<usize> = edges.iter().map(|&t| h.transitions[t].label).collect();
            let ok = *verdicts.entry(labels.clone()).or_insert_with(|| {
                CommGraph::from_actions(
                    labels
                        .iter()
                        .flat_map(|&l| h.labels[l].1.events().iter().map(|e| &e.action)),
                )
                .is_connected()
            });
            if !ok {
                return Ok(WlcVerdict::Violation {
                    cycle: closed_walk(h, &edges),
                });
            }
        }
    }
    Ok(WlcVerdict::Pass)
}

/// Transitions inside each nontrivial strongly connected component.
fn components(h: &Hmsc) -> Vec<Vec<usize>> {
    let n = h.states.len();
    let all: Vec<usize> = (0..h.transitions.len()).collect();
    let reach: Vec<BTreeSet<usize>> = (0..n).map(|s| reachable(h, &all, s, false)).collect();
    let mut comp_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut count = 0;
    for s in 0..n {
        if comp_of.contains_key(&s) {
            continue;
        }
        for &r in &reach[s] {
            if reach[r].contains(&s) {
                comp_of.insert(r, count);
            }
        }
        comp_of.insert(s, count);
        count += 1;
    }
    let mut out = vec![Vec::new(); count];
    for (t, tr) in h.transitions.iter().enumerate() {
        if comp_of[&tr.from] == comp_of[&tr.to] {
            out[comp_of[&tr.from]].push(t);
        }
    }
    out.retain(|c| !c.is_empty());
    out
}

fn reachable(h: &Hmsc, edges: &[usize], from: usize, backward: bool) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for &t in edges {
            let tr = h.transitions[t];
            let (a, b) = if backward { (tr.to, tr.from) } else { (tr.from, tr.to) };
            if a == s && seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    seen
}

fn strongly_connected(h: &Hmsc, edges: &[usize]) -> bool {
    let touched: BTreeSet<usize> = edges
        .iter()
        .flat_map(|&t| [h.transitions[t].from, h.transitions[t].to])
        .collect();
    let root = h.transitions[edges[0]].from;
    reachable(h, edges, root, false) == touched && reachable(h, edges, root, true) == touched
}

fn path_within(h: &Hmsc, edges: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut back: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(s) = queue.pop_front() {
        if s == to {
            break;
        }
        for &t in edges {
            let tr = h.transitions[t];
            if tr.from == s && seen.insert(tr.to) {
                back.insert(tr.to, t);
                queue.push_back(tr.to);
            }
        }
    }
    let mut path = Vec::new();
    let mut s = to;
    while s != from {
        let t = back[&s];
        path.push(t);
        s = h.transitions[t].from;
    }
    path.reverse();
    path
}

/// A closed path using exactly the given strongly connected transitions.
fn closed_walk(h: &Hmsc, edges: &[usize]) -> Vec<usize> {
    let start = h.transitions[edges[0]].from;
    let mut at = start;
    let mut walk = Vec::new();
    for &t in edges {
        walk.extend(path_within(h, edges, at, h.transitions[t].from));
        walk.push(t);
        at = h.transitions[t].to;
    }
    walk.extend(path_within(h, edges, at, start));
    walk
}

#[cfg(test)]
mod tests {
    use super::super::tests::single;
    use super::*;
    use crate::cmsc::{Action, Event, MsgId, RawCmsc};

    fn two_sends() -> crate::cmsc::CMsc {
        // p!q and r!s with both matching receives: two independent messages
        let ev = |id: &str, a: &str| Event::new(id, a.parse::<Action>().unwrap(), None);
        RawCmsc::from_lines(
            ["p", "q", "r", "s"].map(Into::into).to_vec(),
            vec![MsgId::new("a")],
            vec![ev("1", "p!q"), ev("2", "q?p"), ev("3", "r!s"), ev("4", "s?r")],
            vec![("1".into(), "2".into()), ("3".into(), "4".into())],
        )
        .validate()
        .unwrap()
    }

    #[test]
    fn independent_messages_violate_both() {
        let mut h = Hmsc::new("1");
        h.connect("1", "N", &two_sends(), "1");
        assert_eq!(loop_connected_bounded(&h, 3), LoopVerdict::Violation { cycle: vec![0] });
        assert_eq!(
            weakly_loop_connected_exact(&h).unwrap(),
            WlcVerdict::Violation { cycle: vec![0] }
        );
    }

    #[test]
    fn send_and_receive_loops_need_both_edges() {
        // separately each loop has a single active process; together they
        // connect p and q through the channel p→q
        let mut h = Hmsc::new("1");
        h.connect("1", "S", &single("p!q", "a"), "2");
        h.connect("2", "R", &single("q?p", "a"), "1");
        assert_eq!(weakly_loop_connected_exact(&h).unwrap(), WlcVerdict::Pass);
        let mut h = Hmsc::new("1");
        h.connect("1", "S", &single("p!q", "a"), "2");
        h.connect("2", "R", &single("r?s", "a"), "1");
        match weakly_loop_connected_exact(&h).unwrap() {
            WlcVerdict::Violation { cycle } => assert_eq!(cycle, vec![0, 1]),
            v => panic!("{v:?}"),
        }
        assert!(matches!(loop_connected_bounded(&h, 2), LoopVerdict::Violation { .. }));
        assert_eq!(loop_connected_bounded(&h, 1), LoopVerdict::Pass { bound: 1 });
    }
}
