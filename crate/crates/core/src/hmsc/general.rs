//! Generalized HMSCs, whose transitions carry languages, and state
//! elimination.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::cmsc::{CMsc, Canonical, MsgId, ProcessId};
use crate::compose::{concat_pair, concat_sets, insert, set_of, CMscSet};

use super::{Hmsc, HmscError};

pub type LanguageTerm = Arc<Term>;

#[derive(Clone, Debug)]
pub enum Term {
    Empty,
    Atom(CMsc),
    Union(LanguageTerm, LanguageTerm),
    Concat(LanguageTerm, LanguageTerm),
    Plus(LanguageTerm),
    Omega(LanguageTerm),
}

impl Term {
    pub fn empty() -> LanguageTerm {
        Arc::new(Term::Empty)
    }

    pub fn atom(m: CMsc) -> LanguageTerm {
        Arc::new(Term::Atom(m))
    }

    pub fn union(a: &LanguageTerm, b: &LanguageTerm) -> LanguageTerm {
        match (&**a, &**b) {
            (Term::Empty, _) => b.clone(),
            (_, Term::Empty) => a.clone(),
            _ => Arc::new(Term::Union(a.clone(), b.clone())),
        }
    }

    pub fn concat(a: &LanguageTerm, b: &LanguageTerm) -> LanguageTerm {
        match (&**a, &**b) {
            (Term::Empty, _) | (_, Term::Empty) => Term::empty(),
            _ => Arc::new(Term::Concat(a.clone(), b.clone())),
        }
    }

    pub fn plus(a: &LanguageTerm) -> LanguageTerm {
        match &**a {
            Term::Empty => Term::empty(),
            _ => Arc::new(Term::Plus(a.clone())),
        }
    }

    pub fn omega(a: &LanguageTerm) -> LanguageTerm {
        match &**a {
            Term::Empty => Term::empty(),
            _ => Arc::new(Term::Omega(a.clone())),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Term::Empty)
    }

    pub fn contains_plus(&self) -> bool {
        match self {
            Term::Empty | Term::Atom(_) => false,
            Term::Plus(_) | Term::Omega(_) => true,
            Term::Union(a, b) | Term::Concat(a, b) => a.contains_plus() || b.contains_plus(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Empty => f.write_str("empty"),
            Term::Atom(m) => {
                f.write_str("[")?;
                for i in 0..m.len() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", m.action(i))?;
                    if let Some(mu) = m.message(i) {
                        write!(f, ":{mu}")?;
                    }
                }
                f.write_str("]")
            }
            Term::Union(a, b) => write!(f, "({a} + {b})"),
            Term::Concat(a, b) => write!(f, "({a} . {b})"),
            Term::Plus(a) => write!(f, "{a}^+"),
            Term::Omega(a) => write!(f, "{a}^w"),
        }
    }
}

/// An HMSC whose transition from `s` to `s'` is a language term. Missing
/// entries denote the empty language.
#[derive(Clone, Debug)]
pub struct GeneralizedHmsc {
    pub processes: Vec<ProcessId>,
    pub messages: Vec<MsgId>,
    pub states: BTreeMap<usize, String>,
    pub initial: usize,
    pub terms: BTreeMap<(usize, usize), LanguageTerm>,
    pub finals: BTreeSet<usize>,
    pub omega: BTreeSet<usize>,
}

impl GeneralizedHmsc {
    pub fn term(&self, from: usize, to: usize) -> LanguageTerm {
        self.terms.get(&(from, to)).cloned().unwrap_or_else(Term::empty)
    }

    fn set_term(&mut self, from: usize, to: usize, t: LanguageTerm) {
        if t.is_empty() {
            self.terms.remove(&(from, to));
        } else {
            self.terms.insert((from, to), t);
        }
    }

    /// States other than the initial and accepting ones, lowest id first.
    pub fn intermediate_states(&self) -> Vec<usize> {
        self.states
            .keys()
            .copied()
            .filter(|s| *s != self.initial && !self.finals.contains(s) && !self.omega.contains(s))
            .collect()
    }
}

/// One generalized HMSC per state of `F ∪ F_ω`, each with that state as its
/// only accepting state and a fresh initial state without incoming
/// transitions. Their languages together form the language of `h`.
pub fn to_generalized(h: &Hmsc) -> Vec<GeneralizedHmsc> {
    let fresh = h.states.len();
    let mut name = String::from("init");
    while h.states.contains(&name) {
        name.push('\'');
    }
    let mut states: BTreeMap<usize, String> = h.states.iter().cloned().enumerate().collect();
    states.insert(fresh, name);
    let mut terms: BTreeMap<(usize, usize), LanguageTerm> = BTreeMap::new();
    for tr in &h.transitions {
        let atom = Term::atom(h.labels[tr.label].1.clone());
        let mut keys = vec![(tr.from, tr.to)];
        if tr.from == h.initial {
            keys.push((fresh, tr.to));
        }
        for key in keys {
            let t = terms.get(&key).cloned().unwrap_or_else(Term::empty);
            terms.insert(key, Term::union(&t, &atom));
        }
    }
    let accepting: BTreeSet<usize> = h.finals.union(&h.omega).copied().collect();
    accepting
        .into_iter()
        .map(|f| GeneralizedHmsc {
            processes: h.processes.clone(),
            messages: h.messages.clone(),
            states: states.clone(),
            initial: fresh,
            terms: terms.clone(),
            finals: h.finals.iter().copied().filter(|&s| s == f).collect(),
            omega: h.omega.iter().copied().filter(|&s| s == f).collect(),
        })
        .collect()
}

/// Removes `s`, routing every `s₁ → s → s₂` through a direct term.
pub fn eliminate_state(g: &GeneralizedHmsc, s: usize) -> Result<GeneralizedHmsc, HmscError> {
    let name = g
        .states
        .get(&s)
        .ok_or_else(|| HmscError::UnknownState(s.to_string()))?;
    if s == g.initial || g.finals.contains(&s) || g.omega.contains(&s) {
        return Err(HmscError::EliminationForbidden(name.clone()));
    }
    let mut out = g.clone();
    out.states.remove(&s);
    out.terms.retain(|&(a, b), _| a != s && b != s);
    let looped = g.term(s, s);
    let others: Vec<usize> = out.states.keys().copied().collect();
    for &s1 in &others {
        let into = g.term(s1, s);
        if into.is_empty() {
            continue;
        }
        for &s2 in &others {
            let from = g.term(s, s2);
            if from.is_empty() {
                continue;
            }
            let direct = Term::concat(&into, &from);
            let around = Term::concat(&into, &Term::concat(&Term::plus(&looped), &from));
            let t = Term::union(&Term::union(&out.term(s1, s2), &direct), &around);
            out.set_term(s1, s2, t);
        }
    }
    Ok(out)
}

/// Eliminates every intermediate state, lowest id first.
pub fn eliminate_all(g: &GeneralizedHmsc) -> Result<GeneralizedHmsc, HmscError> {
    let mut g = g.clone();
    for s in g.intermediate_states() {
        g = eliminate_state(&g, s)?;
    }
    Ok(g)
}

/// The language of a generalized HMSC with a single accepting state, as one
/// term, after eliminating all other states.
pub fn final_term(g: &GeneralizedHmsc) -> Result<LanguageTerm, HmscError> {
    let g = eliminate_all(g)?;
    let mut out = Term::empty();
    let accepting: BTreeSet<usize> = g.finals.union(&g.omega).copied().collect();
    for f in accepting {
        let entry = g.term(g.initial, f);
        let looped = g.term(f, f);
        if g.finals.contains(&f) {
            let t = Term::union(&entry, &Term::concat(&entry, &Term::plus(&looped)));
            out = Term::union(&out, &t);
        }
        if g.omega.contains(&f) {
            out = Term::union(&out, &Term::concat(&entry, &Term::omega(&looped)));
        }
    }
    Ok(out)
}

fn bounded(set: CMscSet, max_events: usize) -> CMscSet {
    set.into_iter().filter(|(k, _)| k.event_count() <= max_events).collect()
}

/// The finite cMSCs of a term with at most `max_events` events, unrolling
/// each `Plus` at most `max_unroll` times. `Omega` contributes nothing.
pub fn term_language_bounded(t: &Term, max_events: usize, max_unroll: usize) -> CMscSet {
    match t {
        Term::Empty | Term::Omega(_) => CMscSet::new(),
        Term::Atom(m) => bounded(set_of([m.clone()]), max_events),
        Term::Union(a, b) => {
            let mut out = term_language_bounded(a, max_events, max_unroll);
            out.extend(term_language_bounded(b, max_events, max_unroll));
            out
        }
        Term::Concat(a, b) => {
            let la = term_language_bounded(a, max_events, max_unroll);
            if la.is_empty() {
                return la;
            }
            let lb = term_language_bounded(b, max_events, max_unroll);
            bounded(concat_sets(&la, &lb), max_events)
        }
        Term::Plus(a) => {
            let base = term_language_bounded(a, max_events, max_unroll);
            let mut out = base.clone();
            let mut current = base.clone();
            for _ in 1..max_unroll {
                current = bounded(concat_sets(&current, &base), max_events);
                if current.is_empty() {
                    break;
                }
                out.extend(current.clone());
            }
            out
        }
    }
}

/// Complete MSCs with at most `max_events` events from accepting paths of a
/// generalized HMSC, using [`term_language_bounded`] on each transition.
/// Every cMSC is nonempty, so paths longer than `max_events` contribute
/// nothing and the result is exact once `max_unroll ≥ max_events`.
pub fn bounded_language_generalized(g: &GeneralizedHmsc, max_events: usize, max_unroll: usize) -> CMscSet {
    let labels: BTreeMap<(usize, usize), CMscSet> = g
        .terms
        .iter()
        .map(|(&k, t)| (k, term_language_bounded(t, max_events, max_unroll)))
        .collect();
    let mut out = CMscSet::new();
    let mut seen: HashSet<(usize, Canonical)> = HashSet::new();
    let mut frontier: Vec<(usize, Option<CMsc>)> = vec![(g.initial, None)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (state, current) in &frontier {
            for (&(from, to), lang) in &labels {
                if from != *state {
                    continue;
                }
                for m in lang.values() {
                    let results = match current {
                        None => vec![m.clone()],
                        Some(c) => concat_pair(c, m),
                    };
                    for r in results {
                        if r.len() > max_events || r.unmatched().any(|e| r.action(e).is_receive()) {
                            continue;
                        }
                        if !seen.insert((to, r.canonical())) {
                            continue;
                        }
                        if g.finals.contains(&to) && r.is_msc() {
                            insert(&mut out, r.clone());
                        }
                        next.push((to, Some(r)));
                    }
                }
            }
        }
        frontier = next;
    }
    out
}
