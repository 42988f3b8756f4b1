//! Syntax of EMSO formulas over cMSCs.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use crate::cmsc::{name_type, Action, MsgId, ProcessId};

name_type!(
    /// First-order (event) variable.
    Var
);
name_type!(
    /// Second-order (event set) variable.
    SetVar
);

/// Shared formula node. Builders share subformulas freely, so a formula is a
/// DAG; evaluation and relativization work on the DAG.
pub type Formula = Arc<Fo>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Fo {
    /// `x ≤ y`
    Le(Var, Var),
    /// `x ≤ y` with both on the same process.
    LeProc(Var, Var),
    /// `x < y` with both on the same process.
    LtProc(Var, Var),
    /// `x → y`
    Next(Var, Var),
    /// `x ◁ y`
    Msg(Var, Var),
    /// `λ(x) = a`
    ActIs(Var, Action),
    /// `x` is an event of process `p`.
    OnProc(Var, ProcessId),
    /// `m(x)`: `x` is unmatched and `μ(x) = m`.
    Lbl(Var, MsgId),
    Eq(Var, Var),
    In(Var, SetVar),
    /// Conjunction; the empty conjunction is true.
    And(Vec<Formula>),
    /// Disjunction; the empty disjunction is false.
    Or(Vec<Formula>),
    Not(Formula),
    Exists(Var, Formula),
    Forall(Var, Formula),
}

/// `∃X₁ … ∃X_k. body` with a first-order body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmsoFormula {
    pub prefix: Vec<SetVar>,
    pub body: Formula,
}

impl EmsoFormula {
    pub fn new(prefix: Vec<SetVar>, body: Formula) -> Self {
        EmsoFormula { prefix, body }
    }

    /// A first-order sentence viewed as an EMSO sentence.
    pub fn first_order(body: Formula) -> Self {
        EmsoFormula {
            prefix: Vec::new(),
            body,
        }
    }

    pub fn node_count(&self) -> usize {
        node_count(&self.body)
    }

    /// Conjunction with a first-order sentence.
    pub fn and_fo(&self, extra: Formula) -> EmsoFormula {
        EmsoFormula {
            prefix: self.prefix.clone(),
            body: and(vec![self.body.clone(), extra]),
        }
    }
}

pub fn var(name: &str) -> Var {
    Var::new(name)
}

pub fn set_var(name: &str) -> SetVar {
    SetVar::new(name)
}

pub fn tt() -> Formula {
    Arc::new(Fo::And(Vec::new()))
}

pub fn ff() -> Formula {
    Arc::new(Fo::Or(Vec::new()))
}

pub fn le(x: &Var, y: &Var) -> Formula {
    Arc::new(Fo::Le(x.clone(), y.clone()))
}

pub fn le_proc(x: &Var, y: &Var) -> Formula {
    Arc::new(Fo::LeProc(x.clone(), y.clone()))
}

pub fn lt_proc(x: &Var, y: &Var) -> Formula {
    Arc::new(Fo::LtProc(x.clone(), y.clone()))
}

pub fn next(x: &Var, y: &Var) -> Formula {
    Arc::new(Fo::Next(x.clone(), y.clone()))
}

pub fn msg(x: &Var, y: &Var) -> Formula {
    Arc::new(Fo::Msg(x.clone(), y.clone()))
}

pub fn act(x: &Var, a: &Action) -> Formula {
    Arc::new(Fo::ActIs(x.clone(), a.clone()))
}

pub fn on_proc(x: &Var, p: &ProcessId) -> Formula {
    Arc::new(Fo::OnProc(x.clone(), p.clone()))
}

pub fn lbl(x: &Var, m: &MsgId) -> Formula {
    Arc::new(Fo::Lbl(x.clone(), m.clone()))
}

pub fn eq(x: &Var, y: &Var) -> Formula {
    Arc::new(Fo::Eq(x.clone(), y.clone()))
}

pub fn member(x: &Var, set: &SetVar) -> Formula {
    Arc::new(Fo::In(x.clone(), set.clone()))
}

pub fn and(items: Vec<Formula>) -> Formula {
    Arc::new(Fo::And(items))
}

pub fn or(items: Vec<Formula>) -> Formula {
    Arc::new(Fo::Or(items))
}

pub fn not(f: Formula) -> Formula {
    Arc::new(Fo::Not(f))
}

pub fn exists(x: &Var, body: Formula) -> Formula {
    Arc::new(Fo::Exists(x.clone(), body))
}

pub fn forall(x: &Var, body: Formula) -> Formula {
    Arc::new(Fo::Forall(x.clone(), body))
}

/// `∃x₁ … ∃x_k. body`, innermost last.
pub fn exists_many(xs: &[Var], body: Formula) -> Formula {
    xs.iter().rev().fold(body, |acc, x| exists(x, acc))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    or(vec![not(a), b])
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    and(vec![implies(a.clone(), b.clone()), implies(b, a)])
}

/// `max(z) = ¬∃z′. z → z′`
pub fn max(z: &Var, fresh: &Var) -> Formula {
    not(exists(fresh, next(z, fresh)))
}

/// `x ≤_p y`, the process order of `p`.
pub fn le_on(x: &Var, y: &Var, p: &ProcessId) -> Formula {
    and(vec![le_proc(x, y), on_proc(x, p)])
}

/// Number of distinct nodes in the DAG.
pub fn node_count(f: &Formula) -> usize {
    let mut seen = HashSet::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        if !seen.insert(Arc::as_ptr(g)) {
            continue;
        }
        match g.as_ref() {
            Fo::And(xs) | Fo::Or(xs) => stack.extend(xs),
            Fo::Not(h) | Fo::Exists(_, h) | Fo::Forall(_, h) => stack.push(h),
            _ => {}
        }
    }
    seen.len()
}

/// Free first-order variables.
pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    fn go(f: &Fo, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut see = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match f {
            Fo::Le(x, y) | Fo::LeProc(x, y) | Fo::LtProc(x, y) | Fo::Next(x, y) | Fo::Msg(x, y)
            | Fo::Eq(x, y) => {
                see(x, bound);
                see(y, bound);
            }
            Fo::ActIs(x, _) | Fo::OnProc(x, _) | Fo::Lbl(x, _) | Fo::In(x, _) => see(x, bound),
            Fo::And(xs) | Fo::Or(xs) => xs.iter().for_each(|g| go(g, bound, out)),
            Fo::Not(g) => go(g, bound, out),
            Fo::Exists(v, g) | Fo::Forall(v, g) => {
                bound.push(v.clone());
                go(g, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Set variables occurring in the formula.
pub fn set_vars(f: &Formula) -> BTreeSet<SetVar> {
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        if !seen.insert(Arc::as_ptr(g)) {
            continue;
        }
        match g.as_ref() {
            Fo::In(_, s) => {
                out.insert(s.clone());
            }
            Fo::And(xs) | Fo::Or(xs) => stack.extend(xs),
            Fo::Not(h) | Fo::Exists(_, h) | Fo::Forall(_, h) => stack.push(h),
            _ => {}
        }
    }
    out
}

/// All first-order variable names occurring (free or bound).
pub fn all_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        if !seen.insert(Arc::as_ptr(g)) {
            continue;
        }
        match g.as_ref() {
            Fo::Le(x, y) | Fo::LeProc(x, y) | Fo::LtProc(x, y) | Fo::Next(x, y) | Fo::Msg(x, y)
            | Fo::Eq(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Fo::ActIs(x, _) | Fo::OnProc(x, _) | Fo::Lbl(x, _) | Fo::In(x, _) => {
                out.insert(x.clone());
            }
            Fo::And(xs) | Fo::Or(xs) => stack.extend(xs),
            Fo::Not(h) => stack.push(h),
            Fo::Exists(v, h) | Fo::Forall(v, h) => {
                out.insert(v.clone());
                stack.push(h);
            }
        }
    }
    out
}

/// Renames set variables according to `map` (others kept), sharing preserved.
pub fn rename_sets(f: &Formula, map: &dyn Fn(&SetVar) -> Option<SetVar>) -> Formula {
    let mut memo = std::collections::HashMap::new();
    rename_sets_rec(f, map, &mut memo)
}

fn rename_sets_rec(
    f: &Formula,
    map: &dyn Fn(&SetVar) -> Option<SetVar>,
    memo: &mut std::collections::HashMap<*const Fo, Formula>,
) -> Formula {
    if let Some(g) = memo.get(&Arc::as_ptr(f)) {
        return g.clone();
    }
    let out = match f.as_ref() {
        Fo::In(x, s) => match map(s) {
            Some(t) => member(x, &t),
            None => f.clone(),
        },
        Fo::And(xs) => and(xs.iter().map(|g| rename_sets_rec(g, map, memo)).collect()),
        Fo::Or(xs) => or(xs.iter().map(|g| rename_sets_rec(g, map, memo)).collect()),
        Fo::Not(g) => not(rename_sets_rec(g, map, memo)),
        Fo::Exists(v, g) => exists(v, rename_sets_rec(g, map, memo)),
        Fo::Forall(v, g) => forall(v, rename_sets_rec(g, map, memo)),
        _ => f.clone(),
    };
    memo.insert(Arc::as_ptr(f), out.clone());
    out
}
