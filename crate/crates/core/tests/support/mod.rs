//! Fixtures, brute-force oracles and random generators shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use msc_tools::cfm::Cfm;
use msc_tools::cmsc::{Action, CMsc, Canonical, Condition, Event, MsgId, ProcessId, RawCmsc, Universe};
use msc_tools::compose::{insert, CMscSet};
use msc_tools::emso::{EmsoFormula, Fo, Formula, SetVar, Var};
use msc_tools::hmsc::Hmsc;
use msc_tools::io::{self, Document};
use msc_tools::reduce::{CmTransition, Counter, CounterMachine, CounterOp, PcpInstance, TmSpec};

// ---------------------------------------------------------------- fixtures

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

pub fn corpus(name: &str) -> Document {
    io::load(&corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fig1() -> BTreeMap<String, CMsc> {
    corpus("fig1.cmsc").cmscs().map(|(n, m)| (n.to_string(), m.clone())).collect()
}

pub fn fig2() -> Hmsc {
    corpus("fig2.hmsc").hmsc(Some("H")).unwrap().clone()
}

pub fn fig3() -> Cfm {
    corpus("fig3.cfm").cfm(Some("A")).unwrap().clone()
}

pub fn phi() -> EmsoFormula {
    corpus("phi.emso").formula(Some("phi")).unwrap().clone()
}

pub fn pq() -> Vec<ProcessId> {
    vec![ProcessId::new("p"), ProcessId::new("q")]
}

pub fn ab() -> Vec<MsgId> {
    vec![MsgId::new("a"), MsgId::new("b")]
}

pub fn keys(set: &CMscSet) -> BTreeSet<Canonical> {
    set.keys().cloned().collect()
}

pub fn canon<'a>(ms: impl IntoIterator<Item = &'a CMsc>) -> BTreeSet<Canonical> {
    ms.into_iter().map(CMsc::canonical).collect()
}

/// Complete MSCs over `{p, q}` with at most `n` events.
pub fn complete_pq(n: usize) -> Vec<CMsc> {
    Universe::new(&pq(), &ab(), n).complete().enumerate()
}

pub fn raw_single(a: &str, m: &str) -> CMsc {
    let act: Action = a.parse().unwrap();
    RawCmsc::from_lines(pq(), ab(), vec![Event::new("x", act, Some(MsgId::new(m)))], vec![])
        .validate()
        .unwrap()
}

/// One complete message `from → to`.
pub fn message(from: &str, to: &str) -> CMsc {
    let (p, q) = (ProcessId::new(from), ProcessId::new(to));
    RawCmsc::from_lines(
        pq(),
        ab(),
        vec![
            Event::new("s", Action::send(&p, &q), None),
            Event::new("r", Action::receive(&q, &p), None),
        ],
        vec![("s".into(), "r".into())],
    )
    .validate()
    .unwrap()
}

// ------------------------------------------------- independent well-formedness check

fn channel(a: &Action) -> (&ProcessId, &ProcessId) {
    (&a.sender, &a.receiver)
}

/// Every well-formedness condition the raw structure violates, computed
/// without the library validator. Structural problems mask the rest.
pub fn raw_violations(raw: &RawCmsc) -> BTreeSet<Condition> {
    let mut out = BTreeSet::new();
    let procs: BTreeSet<&ProcessId> = raw.processes.iter().collect();
    let msgs: BTreeSet<&MsgId> = raw.messages.iter().collect();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut structural = raw.events.is_empty();
    for (i, e) in raw.events.iter().enumerate() {
        structural |= !procs.contains(&e.action.sender) || !procs.contains(&e.action.receiver);
        structural |= e.action.sender == e.action.receiver;
        structural |= e.message.as_ref().is_some_and(|m| !msgs.contains(m));
        structural |= ids.insert(&e.id, i).is_some();
    }
    if structural {
        out.insert(Condition::Structure);
        return out;
    }

    // chains: each event exactly once, in its owner's chain
    let mut seen = vec![0usize; raw.events.len()];
    let mut chain_procs = BTreeSet::new();
    let mut pos = vec![(0usize, 0usize); raw.events.len()];
    for (ci, (p, chain)) in raw.chains.iter().enumerate() {
        if !chain_procs.insert(p) || !procs.contains(p) {
            out.insert(Condition::ChainOrder);
        }
        for (r, id) in chain.iter().enumerate() {
            match ids.get(id.as_str()) {
                Some(&i) => {
                    seen[i] += 1;
                    pos[i] = (ci, r);
                    if raw.events[i].action.owner() != p {
                        out.insert(Condition::ChainOrder);
                    }
                }
                None => {
                    out.insert(Condition::Structure);
                }
            }
        }
    }
    if seen.iter().any(|&c| c != 1) {
        out.insert(Condition::ChainOrder);
    }
    if !out.is_empty() {
        return out;
    }
    if raw.matches.iter().any(|(s, r)| !ids.contains_key(s.as_str()) || !ids.contains_key(r.as_str())) {
        return BTreeSet::from([Condition::Structure]);
    }

    let matches: BTreeSet<(usize, usize)> =
        raw.matches.iter().map(|(s, r)| (ids[s.as_str()], ids[r.as_str()])).collect();
    let act = |i: usize| &raw.events[i].action;
    let well_kinded = |&(s, r): &(usize, usize)| {
        act(s).is_send() && act(r).is_receive() && channel(act(s)) == channel(act(r))
    };
    if !matches.iter().all(well_kinded) {
        out.insert(Condition::MatchKind);
    }
    let good: Vec<(usize, usize)> = matches.iter().copied().filter(well_kinded).collect();
    for (k, &(s1, r1)) in good.iter().enumerate() {
        for &(s2, r2) in &good[k + 1..] {
            if channel(act(s1)) != channel(act(s2)) {
                continue;
            }
            let rank = |i: usize| pos[i].1;
            let same = (s1 == s2) != (r1 == r2);
            let crossed = (rank(s1) < rank(s2)) != (rank(r1) < rank(r2));
            if same || crossed {
                out.insert(Condition::Fifo);
            }
        }
    }

    // order: process successors plus matches
    let n = raw.events.len();
    let mut succ = vec![Vec::new(); n];
    for (_, chain) in &raw.chains {
        for w in chain.windows(2) {
            succ[ids[w[0].as_str()]].push(ids[w[1].as_str()]);
        }
    }
    for &(s, r) in &good {
        succ[s].push(r);
    }
    let reach = closure(&succ);
    if (0..n).any(|i| succ[i].iter().any(|&j| reach[j].contains(&i))) {
        out.insert(Condition::PartialOrder);
        return out;
    }
    let partnered: BTreeSet<usize> = good.iter().flat_map(|&(s, r)| [s, r]).collect();
    for (i, e) in raw.events.iter().enumerate() {
        if partnered.contains(&i) == e.message.is_some() {
            out.insert(Condition::MessageDomain);
        }
    }
    for &(e, f) in &good {
        for g in (0..n).filter(|g| !partnered.contains(g)) {
            let lt = |x: usize, y: usize| x != y && reach[x].contains(&y);
            if (act(g) == act(e) && !lt(e, g)) || (act(g) == act(f) && !lt(g, f)) {
                out.insert(Condition::Tail);
            }
        }
    }
    out
}

/// Reflexive-transitive successors of each node.
pub fn closure(succ: &[Vec<usize>]) -> Vec<BTreeSet<usize>> {
    (0..succ.len())
        .map(|i| {
            let mut seen = BTreeSet::from([i]);
            let mut stack = vec![i];
            while let Some(x) = stack.pop() {
                for &y in &succ[x] {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen
        })
        .collect()
}

/// `≤` of a validated cMSC, rebuilt from process successors and matches.
pub fn order_of(m: &CMsc) -> Vec<BTreeSet<usize>> {
    let mut succ = vec![Vec::new(); m.len()];
    for pi in 0..m.processes().len() {
        let c = m.chain(pi);
        for i in c.start..c.end.saturating_sub(1) {
            succ[i].push(i + 1);
        }
    }
    for (s, r) in m.match_pairs() {
        succ[s].push(r);
    }
    closure(&succ)
}

/// Undirected event-graph connectivity (process edges and matches).
pub fn event_graph_connected(m: &CMsc) -> bool {
    let n = m.len();
    let mut adj = vec![Vec::new(); n];
    for pi in 0..m.processes().len() {
        let c = m.chain(pi);
        for i in c.start..c.end.saturating_sub(1) {
            adj[i].push(i + 1);
            adj[i + 1].push(i);
        }
    }
    for (s, r) in m.match_pairs() {
        adj[s].push(r);
        adj[r].push(s);
    }
    closure(&adj)[0].len() == n
}

/// A random candidate structure; most are valid or close to it.
pub fn random_candidate(rng: &mut impl Rng) -> RawCmsc {
    let all = ["p", "q", "r"];
    let nproc = rng.gen_range(2..=3);
    let mut processes: Vec<ProcessId> = all[..nproc].iter().map(|p| ProcessId::new(p)).collect();
    let messages = ab();
    let n = rng.gen_range(0..=6);
    let mut events = Vec::new();
    for i in 0..n {
        let owner = rng.gen_range(0..nproc);
        let mut peer = rng.gen_range(0..nproc);
        if peer == owner && rng.gen_bool(0.9) {
            peer = (owner + 1) % nproc;
        }
        let (o, p) = (processes[owner].clone(), processes[peer].clone());
        let action = if rng.gen_bool(0.5) { Action::send(&o, &p) } else { Action::receive(&o, &p) };
        let id = if rng.gen_bool(0.02) { "e0".to_string() } else { format!("e{i}") };
        events.push(Event::new(id, action, None));
    }
    let mut matches = Vec::new();
    let mut used = BTreeSet::new();
    for i in 0..n {
        if !events[i].action.is_send() || rng.gen_bool(0.3) {
            continue;
        }
        let dual = events[i].action.dual();
        let cands: Vec<usize> = (0..n)
            .filter(|&j| !used.contains(&j) && (events[j].action == dual || rng.gen_bool(0.05)) && j != i)
            .collect();
        if let Some(&j) = cands.choose(rng) {
            used.insert(i);
            used.insert(j);
            matches.push((events[i].id.clone(), events[j].id.clone()));
        }
    }
    let matched: BTreeSet<&str> = matches.iter().flat_map(|(s, r)| [s.as_str(), r.as_str()]).collect();
    let flags: Vec<bool> = events.iter().map(|e| !matched.contains(e.id.as_str())).collect();
    for (e, unmatched) in events.iter_mut().zip(flags) {
        let give = if rng.gen_bool(0.95) { unmatched } else { !unmatched };
        if give {
            e.message = Some(messages.choose(rng).unwrap().clone());
        }
    }
    if rng.gen_bool(0.02) {
        e_undeclared(&mut processes);
    }
    if rng.gen_bool(0.02) && !matches.is_empty() {
        matches[0].1 = "nowhere".into();
    }
    RawCmsc::from_lines(processes, messages, events, matches)
}

fn e_undeclared(processes: &mut Vec<ProcessId>) {
    processes.pop();
}

// ------------------------------------------------------ naive composition

/// `M1 ∘ M2` by trying every subset of candidate new matches.
pub fn naive_concat(m1: &CMsc, m2: &CMsc) -> CMscSet {
    let procs: BTreeSet<ProcessId> = m1.processes().iter().chain(m2.processes()).cloned().collect();
    let msgs: BTreeSet<MsgId> = m1.messages().iter().chain(m2.messages()).cloned().collect();
    let left = |i: usize| format!("l{i}");
    let right = |i: usize| format!("r{i}");
    let mut cands = Vec::new();
    for s in m1.unmatched().filter(|&i| m1.action(i).is_send()) {
        for r in m2.unmatched().filter(|&j| m2.action(j).is_receive()) {
            if m2.action(r) == &m1.action(s).dual() && m1.message(s) == m2.message(r) {
                cands.push((s, r));
            }
        }
    }
    let mut out = CMscSet::new();
    for mask in 0u64..(1 << cands.len()) {
        let chosen: Vec<(usize, usize)> =
            (0..cands.len()).filter(|k| mask >> k & 1 == 1).map(|k| cands[k]).collect();
        let new_l: BTreeSet<usize> = chosen.iter().map(|c| c.0).collect();
        let new_r: BTreeSet<usize> = chosen.iter().map(|c| c.1).collect();
        let mut events = Vec::new();
        for p in &procs {
            for i in m1.chain_of(p) {
                let e = m1.event(i);
                let msg = if new_l.contains(&i) { None } else { e.message.clone() };
                events.push(Event::new(left(i), e.action.clone(), msg));
            }
            for j in m2.chain_of(p) {
                let e = m2.event(j);
                let msg = if new_r.contains(&j) { None } else { e.message.clone() };
                events.push(Event::new(right(j), e.action.clone(), msg));
            }
        }
        let mut matches: Vec<(String, String)> =
            m1.match_pairs().into_iter().map(|(s, r)| (left(s), left(r))).collect();
        matches.extend(m2.match_pairs().into_iter().map(|(s, r)| (right(s), right(r))));
        matches.extend(chosen.iter().map(|&(s, r)| (left(s), right(r))));
        let raw = RawCmsc::from_lines(procs.iter().cloned().collect(), msgs.iter().cloned().collect(), events, matches);
        if let Ok(m) = raw.validate() {
            insert(&mut out, m);
        }
    }
    out
}

pub fn naive_concat_sets(l1: &CMscSet, l2: &CMscSet) -> CMscSet {
    let mut out = CMscSet::new();
    for a in l1.values() {
        for b in l2.values() {
            for m in naive_concat(a, b).into_values() {
                insert(&mut out, m);
            }
        }
    }
    out
}

/// `L ∪ L∘L ∪ … ∪ L^k`, keeping only cMSCs with at most `max_events` events.
pub fn naive_power(lang: &CMscSet, k: usize, max_events: usize) -> CMscSet {
    let small = |s: CMscSet| -> CMscSet { s.into_iter().filter(|(_, m)| m.len() <= max_events).collect() };
    let mut layer = small(lang.clone());
    let mut out = layer.clone();
    for _ in 1..k {
        layer = small(naive_concat_sets(&layer, lang));
        out.extend(layer.clone());
    }
    out
}

// ---------------------------------------------------- reference evaluator

struct Model<'a> {
    m: &'a CMsc,
    order: Vec<BTreeSet<usize>>,
    partner_of: Vec<Option<usize>>,
}

/// Tarskian satisfaction with every valuation of the prefix tried in turn.
pub fn naive_eval(phi: &EmsoFormula, m: &CMsc) -> bool {
    let model = Model {
        m,
        order: order_of(m),
        partner_of: (0..m.len()).map(|i| m.partner(i)).collect(),
    };
    let n = m.len();
    let k = phi.prefix.len();
    let total = 1u64 << (n * k);
    (0..total).any(|bits| {
        let sets: BTreeMap<SetVar, BTreeSet<usize>> = phi
            .prefix
            .iter()
            .enumerate()
            .map(|(v, x)| (x.clone(), (0..n).filter(|e| bits >> (v * n + e) & 1 == 1).collect()))
            .collect();
        holds(&model, &phi.body, &mut BTreeMap::new(), &sets)
    })
}

/// First-order satisfaction under explicit environments.
pub fn naive_holds(
    m: &CMsc,
    f: &Formula,
    fo: &BTreeMap<Var, usize>,
    sets: &BTreeMap<SetVar, BTreeSet<usize>>,
) -> bool {
    let model = Model {
        m,
        order: order_of(m),
        partner_of: (0..m.len()).map(|i| m.partner(i)).collect(),
    };
    holds(&model, f, &mut fo.clone(), sets)
}

fn holds(
    md: &Model,
    f: &Formula,
    env: &mut BTreeMap<Var, usize>,
    sets: &BTreeMap<SetVar, BTreeSet<usize>>,
) -> bool {
    let m = md.m;
    let v = |x: &Var| *env.get(x).unwrap_or_else(|| panic!("unbound {x}"));
    let same = |a: usize, b: usize| m.owner(a) == m.owner(b);
    match &**f {
        Fo::Le(x, y) => md.order[v(x)].contains(&v(y)),
        Fo::LeProc(x, y) => same(v(x), v(y)) && md.order[v(x)].contains(&v(y)),
        Fo::LtProc(x, y) => same(v(x), v(y)) && v(x) != v(y) && md.order[v(x)].contains(&v(y)),
        Fo::Next(x, y) => {
            let (a, b) = (v(x), v(y));
            same(a, b) && m.rank(b) == m.rank(a) + 1
        }
        Fo::Msg(x, y) => m.action(v(x)).is_send() && md.partner_of[v(x)] == Some(v(y)),
        Fo::ActIs(x, a) => m.action(v(x)) == a,
        Fo::OnProc(x, p) => m.owner(v(x)) == p,
        Fo::Lbl(x, a) => md.partner_of[v(x)].is_none() && m.message(v(x)) == Some(a),
        Fo::Eq(x, y) => v(x) == v(y),
        Fo::In(x, s) => sets.get(s).unwrap_or_else(|| panic!("unbound {s}")).contains(&v(x)),
        Fo::And(fs) => fs.iter().all(|g| holds(md, g, env, sets)),
        Fo::Or(fs) => fs.iter().any(|g| holds(md, g, env, sets)),
        Fo::Not(g) => !holds(md, g, env, sets),
        Fo::Exists(x, g) | Fo::Forall(x, g) => {
            let saved = env.get(x).copied();
            let exists = matches!(&**f, Fo::Exists(..));
            let mut result = !exists;
            for e in 0..m.len() {
                env.insert(x.clone(), e);
                if holds(md, g, env, sets) == exists {
                    result = exists;
                    break;
                }
            }
            match saved {
                Some(e) => env.insert(x.clone(), e),
                None => env.remove(x),
            };
            result
        }
    }
}

// -------------------------------------------------------- random HMSCs

/// Labels over `{p, q}` with messages `{a, b}`: every single unmatched event
/// plus one complete message each way.
pub fn label_pool() -> Vec<(String, CMsc)> {
    let mut out = Vec::new();
    for (a, tag) in [("p!q", "ps"), ("q!p", "qs"), ("p?q", "pr"), ("q?p", "qr")] {
        for m in ["a", "b"] {
            out.push((format!("{tag}_{m}"), raw_single(a, m)));
        }
    }
    out.push(("mpq".into(), message("p", "q")));
    out.push(("mqp".into(), message("q", "p")));
    out
}

fn active_on(m: &CMsc, p: &str) -> bool {
    m.active_processes().iter().any(|x| x.as_str() == p)
}

/// A random HMSC with at most four states. Every transition inside a
/// strongly connected component carries a connected label active on one
/// process fixed for that component, so every cycle yields connected cMSCs.
pub fn random_hmsc(rng: &mut impl Rng) -> Hmsc {
    let n = rng.gen_range(1..=4);
    let edges: Vec<(usize, usize)> = (0..rng.gen_range(1..=6))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in &edges {
        succ[a].push(b);
    }
    let reach = closure(&succ);
    let comp = |s: usize| (0..n).find(|&r| reach[s].contains(&r) && reach[r].contains(&s)).unwrap();
    let home: Vec<&str> = (0..n).map(|_| if rng.gen_bool(0.5) { "p" } else { "q" }).collect();
    let pool = label_pool();
    let mut h = Hmsc::new("s0");
    h.declare(&pq(), &ab());
    for s in 1..n {
        h.ensure_state(&format!("s{s}"));
    }
    for &(a, b) in &edges {
        let cyclic = comp(a) == comp(b) && (a != b || succ[a].contains(&a));
        let choices: Vec<&(String, CMsc)> = if cyclic {
            pool.iter().filter(|(_, m)| active_on(m, home[comp(a)])).collect()
        } else {
            pool.iter().collect()
        };
        let (name, m) = choices.choose(rng).unwrap();
        h.connect(&format!("s{a}"), name, m, &format!("s{b}"));
    }
    let mut finals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    if finals.is_empty() {
        finals.push(rng.gen_range(0..n));
    }
    h.finals.extend(finals);
    h
}

// ------------------------------------------------------- reduction oracles

pub fn apply_morphism(h: &BTreeMap<String, Vec<String>>, u: &[String]) -> Vec<String> {
    u.iter().flat_map(|a| h[a].iter().cloned()).collect()
}

/// Path length of the HMSC run for a PCP solution `u`.
pub fn pcp_path_len(inst: &PcpInstance, u: &[String]) -> usize {
    3 * u.len() + apply_morphism(&inst.f, u).len()
}

/// A shortest-path PCP solution whose HMSC run fits in `bound` transitions.
pub fn pcp_solution_within(inst: &PcpInstance, bound: usize) -> Option<Vec<String>> {
    let mut queue: VecDeque<Vec<String>> = inst.a.iter().map(|a| vec![a.clone()]).collect();
    let mut best: Option<Vec<String>> = None;
    while let Some(u) = queue.pop_front() {
        // a word costs at least three transitions per letter plus one receive each
        if 4 * u.len() > bound {
            continue;
        }
        if pcp_path_len(inst, &u) <= bound && apply_morphism(&inst.f, &u) == apply_morphism(&inst.g, &u) {
            if best.as_ref().map_or(true, |b| pcp_path_len(inst, &u) < pcp_path_len(inst, b)) {
                best = Some(u.clone());
            }
        }
        for a in &inst.a {
            let mut w = u.clone();
            w.push(a.clone());
            queue.push_back(w);
        }
    }
    best
}

pub fn random_cm(rng: &mut impl Rng) -> CounterMachine {
    let n = rng.gen_range(1..=4);
    let states: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let ops = [
        CounterOp::Inc(Counter::C1),
        CounterOp::Dec(Counter::C1),
        CounterOp::Zero(Counter::C1),
        CounterOp::Inc(Counter::C2),
        CounterOp::Dec(Counter::C2),
        CounterOp::Zero(Counter::C2),
    ];
    let transitions = (0..rng.gen_range(1..=6))
        .map(|_| CmTransition {
            from: states[rng.gen_range(0..n)].clone(),
            op: *ops.choose(rng).unwrap(),
            to: states[rng.gen_range(0..n)].clone(),
        })
        .collect();
    let mut finals: Vec<String> = states.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
    if finals.is_empty() {
        finals.push(states[n - 1].clone());
    }
    CounterMachine {
        states: states.clone(),
        initial: states[0].clone(),
        finals,
        transitions,
    }
}

/// Runs of 1..=k steps from the initial state with zero counters ending in a
/// final state with both counters zero.
pub fn cm_accepts_within(c: &CounterMachine, k: usize) -> bool {
    let mut frontier: BTreeSet<(String, u32, u32)> = BTreeSet::from([(c.initial.clone(), 0, 0)]);
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for (s, c1, c2) in &frontier {
            for t in c.transitions.iter().filter(|t| &t.from == s) {
                let (mut a, mut b) = (*c1, *c2);
                let ok = match t.op {
                    CounterOp::Inc(Counter::C1) => {
                        a += 1;
                        true
                    }
                    CounterOp::Inc(Counter::C2) => {
                        b += 1;
                        true
                    }
                    CounterOp::Dec(Counter::C1) => a.checked_sub(1).map(|x| a = x).is_some(),
                    CounterOp::Dec(Counter::C2) => b.checked_sub(1).map(|x| b = x).is_some(),
                    CounterOp::Zero(Counter::C1) => a == 0,
                    CounterOp::Zero(Counter::C2) => b == 0,
                };
                if ok {
                    next.insert((t.to.clone(), a, b));
                }
            }
        }
        if next.iter().any(|(s, a, b)| *a == 0 && *b == 0 && c.finals.contains(s)) {
            return true;
        }
        frontier = next;
    }
    false
}

/// Length of the HMSC path simulating `k ≥ 1` steps on `blanks ≥ 1` cells.
pub fn tm_path_len(blanks: usize, k: usize) -> usize {
    let l = blanks + 2;
    (3 + blanks) + k * (l - 1) + (k - 1) * l + (l + 1)
}

/// Whether some run of exactly `k` steps from `⊳ s₀ ♭^blanks` ends in a
/// configuration holding the halting state after the first cell.
pub fn tm_halts(t: &TmSpec, blanks: usize, k: usize) -> bool {
    let mut start = vec![t.left_end.clone(), t.initial.clone()];
    start.extend(std::iter::repeat(t.blank.clone()).take(blanks));
    let mut frontier: BTreeSet<Vec<String>> = BTreeSet::from([start]);
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for w in &frontier {
            for i in 0..w.len().saturating_sub(2) {
                for (lhs, rhs) in &t.delta {
                    if w[i..i + 3] == lhs[..] {
                        let mut v = w.clone();
                        v[i..i + 3].clone_from_slice(rhs);
                        next.insert(v);
                    }
                }
            }
        }
        frontier = next;
    }
    frontier.iter().any(|w| w.iter().skip(1).any(|s| s == &t.halt))
}

/// Whether some halting run fits in `bound` HMSC transitions.
pub fn tm_halts_within(t: &TmSpec, bound: usize) -> bool {
    (1..)
        .take_while(|&n| tm_path_len(n, 1) <= bound)
        .any(|n| (1..).take_while(|&k| tm_path_len(n, k) <= bound).any(|k| tm_halts(t, n, k)))
}

pub fn random_tm(rng: &mut impl Rng) -> TmSpec {
    let states = vec!["s0".to_string(), "s1".to_string(), "sh".to_string()];
    let tape = vec!["end".to_string(), "blank".to_string(), "x".to_string()];
    let mut delta = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let s = states[rng.gen_range(0..2)].clone();
        let s2 = states.choose(rng).unwrap().clone();
        let g = |rng: &mut dyn rand::RngCore| tape[rng.gen_range(0..tape.len())].clone();
        let (a, b) = (g(rng), g(rng));
        let (c, d) = (g(rng), g(rng));
        // state in the middle or at the side: moves left, right or stays
        let lhs = [a.clone(), s, b.clone()];
        let rhs = match rng.gen_range(0..3) {
            0 => [c, s2, d],
            1 => [s2, c, d],
            _ => [c, d, s2],
        };
        delta.push((lhs, rhs));
    }
    TmSpec {
        states,
        tape,
        initial: "s0".into(),
        halt: "sh".into(),
        left_end: "end".into(),
        blank: "blank".into(),
        delta,
    }
}

// ------------------------------------------------------ naive enumeration

/// Every cMSC over `{p, q}`, `{a, b}` with at most `n` events, by trying all
/// action sequences, match sets and labellings and keeping the valid ones.
pub fn naive_universe(n: usize) -> BTreeSet<Canonical> {
    let (p, q) = (ProcessId::new("p"), ProcessId::new("q"));
    let on_p = [Action::send(&p, &q), Action::receive(&p, &q)];
    let on_q = [Action::send(&q, &p), Action::receive(&q, &p)];
    let seqs = |acts: &[Action; 2], len: usize| -> Vec<Vec<Action>> {
        (0..1usize << len)
            .map(|bits| (0..len).map(|i| acts[bits >> i & 1].clone()).collect())
            .collect()
    };
    let mut out = BTreeSet::new();
    for total in 1..=n {
        for lp in 0..=total {
            for sp in seqs(&on_p, lp) {
                for sq in seqs(&on_q, total - lp) {
                    let acts: Vec<Action> = sp.iter().chain(&sq).cloned().collect();
                    let pairs: Vec<(usize, usize)> = (0..total)
                        .flat_map(|i| (0..total).map(move |j| (i, j)))
                        .filter(|&(i, j)| acts[i].is_send() && acts[j] == acts[i].dual())
                        .collect();
                    for mask in 0u32..1 << pairs.len() {
                        let chosen: Vec<(usize, usize)> =
                            (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
                        let matched: BTreeSet<usize> = chosen.iter().flat_map(|&(s, r)| [s, r]).collect();
                        let free: Vec<usize> = (0..total).filter(|i| !matched.contains(i)).collect();
                        for labels in 0u32..1 << free.len() {
                            let events = (0..total)
                                .map(|i| {
                                    let msg = free.iter().position(|&f| f == i).map(|k| {
                                        MsgId::new(if labels >> k & 1 == 1 { "b" } else { "a" })
                                    });
                                    Event::new(format!("e{i}"), acts[i].clone(), msg)
                                })
                                .collect();
                            let matches =
                                chosen.iter().map(|&(s, r)| (format!("e{s}"), format!("e{r}"))).collect();
                            if let Ok(m) = RawCmsc::from_lines(pq(), ab(), events, matches).validate() {
                                out.insert(m.canonical());
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
