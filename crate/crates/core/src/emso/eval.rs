//! Satisfaction of EMSO sentences over finite cMSCs.
//!
//! The first-order body is grounded over the events of the model into a
//! hash-consed and-inverter circuit whose inputs are the memberships
//! `e ∈ X` of the prefix variables. Ground subformulas are memoized on the
//! values of their free variables, and constant inputs fold away, so purely
//! first-order formulas never reach the solver. Whatever remains is handed to
//! a CDCL SAT solver, which decides whether some valuation of the set
//! variables satisfies the body.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;
use batsat::{lbool, BasicSolver, Lit as SatLit, SolverInterface, Var as SatVar};

use crate::cmsc::{Action, CMsc, MsgId, ProcessId, Universe};
use crate::compose::{insert, CMscSet};

use super::ast::{EmsoFormula, Fo, Formula, SetVar, Var};

/// Evaluation budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalLimits {
    pub max_events: usize,
    pub max_set_vars: usize,
    /// Upper bound on ground subformula instances built per model.
    pub max_nodes: u64,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits {
            max_events: 10,
            max_set_vars: 1024,
            max_nodes: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("model has {events} events, limit is {limit}")]
    TooManyEvents { events: usize, limit: usize },
    #[error("formula has {count} set variables, limit is {limit}")]
    TooManySetVars { count: usize, limit: usize },
    #[error("cost cap of {limit} ground nodes exceeded")]
    CostCap { limit: u64 },
    #[error("unbound first-order variable `{0}`")]
    Unbound(Var),
    #[error("unbound set variable `{0}`")]
    UnboundSet(SetVar),
    #[error("SAT back end failed: {0}")]
    Solver(String),
}

/// Values for free variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub fo: BTreeMap<Var, usize>,
    pub sets: BTreeMap<SetVar, BTreeSet<usize>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, x: &Var, event: usize) -> Self {
        self.fo.insert(x.clone(), event);
        self
    }

    pub fn with_set(mut self, x: &SetVar, events: impl IntoIterator<Item = usize>) -> Self {
        self.sets.insert(x.clone(), events.into_iter().collect());
        self
    }
}

type VarIx = u16;

#[derive(Debug)]
enum Node {
    Le(VarIx, VarIx),
    LeProc(VarIx, VarIx),
    LtProc(VarIx, VarIx),
    Next(VarIx, VarIx),
    Msg(VarIx, VarIx),
    ActIs(VarIx, Action),
    OnProc(VarIx, ProcessId),
    Lbl(VarIx, MsgId),
    Eq(VarIx, VarIx),
    In(VarIx, usize),
    And(Vec<u32>),
    Or(Vec<u32>),
    Not(u32),
    Exists(VarIx, u32),
    Forall(VarIx, u32),
}

/// Formula DAG with interned variables and per-node free-variable lists.
#[derive(Debug)]
struct Compiled {
    nodes: Vec<Node>,
    free: Vec<Vec<VarIx>>,
    vars: Vec<Var>,
    sets: Vec<SetVar>,
    root: u32,
}

struct Compiler {
    nodes: Vec<Node>,
    free: Vec<Vec<VarIx>>,
    weight: Vec<u64>,
    vars: Vec<Var>,
    var_ix: HashMap<Var, VarIx>,
    sets: Vec<SetVar>,
    set_ix: HashMap<SetVar, usize>,
    memo: HashMap<*const Fo, u32>,
}

impl Compiler {
    fn var(&mut self, v: &Var) -> VarIx {
        if let Some(&i) = self.var_ix.get(v) {
            return i;
        }
        let i = self.vars.len() as VarIx;
        self.vars.push(v.clone());
        self.var_ix.insert(v.clone(), i);
        i
    }

    fn set(&mut self, s: &SetVar) -> usize {
        if let Some(&i) = self.set_ix.get(s) {
            return i;
        }
        let i = self.sets.len();
        self.sets.push(s.clone());
        self.set_ix.insert(s.clone(), i);
        i
    }

    fn compile(&mut self, f: &Formula) -> u32 {
        let key = Arc::as_ptr(f);
        if let Some(&i) = self.memo.get(&key) {
            return i;
        }
        let pair = |c: &mut Compiler, x: &Var, y: &Var| {
            let (a, b) = (c.var(x), c.var(y));
            let mut fv = vec![a, b];
            fv.sort_unstable();
            fv.dedup();
            (a, b, fv)
        };
        let (node, fv) = match f.as_ref() {
            Fo::Le(x, y) => {
                let (a, b, fv) = pair(self, x, y);
                (Node::Le(a, b), fv)
            }
            Fo::LeProc(x, y) => {
                let (a, b, fv) = pair(self, x, y);
                (Node::LeProc(a, b), fv)
            }
            Fo::LtProc(x, y) => {
                let (a, b, fv) = pair(self, x, y);
                (Node::LtProc(a, b), fv)
            }
            Fo::Next(x, y) => {
                let (a, b, fv) = pair(self, x, y);
                (Node::Next(a, b), fv)
            }
            Fo::Msg(x, y) => {
                let (a, b, fv) = pair(self, x, y);
                (Node::Msg(a, b), fv)
            }
            Fo::Eq(x, y) => {
                let (a, b, fv) = pair(self, x, y);
                (Node::Eq(a, b), fv)
            }
            Fo::ActIs(x, act) => {
                let a = self.var(x);
                (Node::ActIs(a, act.clone()), vec![a])
            }
            Fo::OnProc(x, p) => {
                let a = self.var(x);
                (Node::OnProc(a, p.clone()), vec![a])
            }
            Fo::Lbl(x, m) => {
                let a = self.var(x);
                (Node::Lbl(a, m.clone()), vec![a])
            }
            Fo::In(x, s) => {
                let a = self.var(x);
                let si = self.set(s);
                (Node::In(a, si), vec![a])
            }
            Fo::And(xs) | Fo::Or(xs) => {
                let mut kids: Vec<u32> = xs.iter().map(|g| self.compile(g)).collect();
                // Cheap children first, so constants short-circuit early.
                kids.sort_by_key(|&k| self.weight[k as usize]);
                let mut fv: Vec<VarIx> = kids
                    .iter()
                    .flat_map(|&k| self.free[k as usize].iter().copied())
                    .collect();
                fv.sort_unstable();
                fv.dedup();
                let node = if matches!(f.as_ref(), Fo::And(_)) {
                    Node::And(kids)
                } else {
                    Node::Or(kids)
                };
                (node, fv)
            }
            Fo::Not(g) => {
                let k = self.compile(g);
                (Node::Not(k), self.free[k as usize].clone())
            }
            Fo::Exists(v, g) | Fo::Forall(v, g) => {
                let a = self.var(v);
                let k = self.compile(g);
                let fv: Vec<VarIx> = self.free[k as usize]
                    .iter()
                    .copied()
                    .filter(|&w| w != a)
                    .collect();
                let node = if matches!(f.as_ref(), Fo::Exists(..)) {
                    Node::Exists(a, k)
                } else {
                    Node::Forall(a, k)
                };
                (node, fv)
            }
        };
        let weight = match &node {
            Node::And(kids) | Node::Or(kids) => kids
                .iter()
                .fold(1u64, |acc, &k| acc.saturating_add(self.weight[k as usize])),
            Node::Not(k) => self.weight[*k as usize].saturating_add(1),
            Node::Exists(_, k) | Node::Forall(_, k) => {
                self.weight[*k as usize].saturating_mul(6).saturating_add(1)
            }
            _ => 1,
        };
        let i = self.nodes.len() as u32;
        self.nodes.push(node);
        self.free.push(fv);
        self.weight.push(weight);
        self.memo.insert(key, i);
        i
    }
}

fn compile(f: &Formula, prefix: &[SetVar]) -> Compiled {
    let mut c = Compiler {
        nodes: Vec::new(),
        free: Vec::new(),
        weight: Vec::new(),
        vars: Vec::new(),
        var_ix: HashMap::new(),
        sets: Vec::new(),
        set_ix: HashMap::new(),
        memo: HashMap::new(),
    };
    for s in prefix {
        c.set(s);
    }
    let root = c.compile(f);
    Compiled {
        nodes: c.nodes,
        free: c.free,
        vars: c.vars,
        sets: c.sets,
        root,
    }
}

/// Circuit literal: `node << 1 | negated`. Node 0 is the constant true.
type Lit = u32;
const TRUE: Lit = 0;
const FALSE: Lit = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Gate {
    Const,
    Input,
    And(Lit, Lit),
}

#[derive(Default)]
struct Aig {
    gates: Vec<Gate>,
    ands: FxHashMap<(Lit, Lit), Lit>,
    inputs: FxHashMap<(usize, usize), Lit>,
}

impl Aig {
    fn new() -> Self {
        Aig {
            gates: vec![Gate::Const],
            ..Default::default()
        }
    }

    fn input(&mut self, set: usize, event: usize) -> Lit {
        if let Some(&l) = self.inputs.get(&(set, event)) {
            return l;
        }
        let l = (self.gates.len() as Lit) << 1;
        self.gates.push(Gate::Input);
        self.inputs.insert((set, event), l);
        l
    }

    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == FALSE || b == FALSE || a == b ^ 1 {
            return FALSE;
        }
        if a == TRUE || a == b {
            return b;
        }
        if b == TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&l) = self.ands.get(&key) {
            return l;
        }
        let l = (self.gates.len() as Lit) << 1;
        self.gates.push(Gate::And(key.0, key.1));
        self.ands.insert(key, l);
        l
    }

    fn or(&mut self, a: Lit, b: Lit) -> Lit {
        self.and(a ^ 1, b ^ 1) ^ 1
    }

    /// Is the circuit rooted at `root` satisfiable?
    /// Satisfiability of `root` via a polarity-aware Tseitin encoding: each
    /// gate only gets the clauses for the polarities it occurs in.
    fn satisfiable(&self, root: Lit) -> Result<bool, EvalError> {
        match root {
            TRUE => return Ok(true),
            FALSE => return Ok(false),
            _ => {}
        }
        // Gates only refer to earlier gates, so one backward sweep propagates
        // polarities. bit 0: occurs positively, bit 1: occurs negatively.
        let top = (root >> 1) as usize;
        let mut pol = vec![0u8; top + 1];
        pol[top] = 1 << (root & 1);
        for g in (1..=top).rev() {
            if let (p @ 1..=3, Gate::And(a, b)) = (pol[g], self.gates[g]) {
                for c in [a, b] {
                    let flip = if c & 1 == 1 { ((p & 1) << 1) | (p >> 1) } else { p };
                    pol[(c >> 1) as usize] |= flip;
                }
            }
        }
        let mut solver = BasicSolver::default();
        let mut vars: Vec<Option<SatVar>> = vec![None; top + 1];
        let mut order = Vec::new();
        for g in 0..=top {
            if pol[g] != 0 || g == 0 {
                vars[g] = Some(solver.new_var_default());
                order.push(g);
            }
        }
        let vars = &vars;
        let sat = |l: Lit| SatLit::new(vars[(l >> 1) as usize].expect("reachable gate"), l & 1 == 0);
        let mut clause = Vec::with_capacity(3);
        for &g in &order {
            let out = sat((g as Lit) << 1);
            match self.gates[g] {
                Gate::Const => {
                    clause.clear();
                    clause.push(out);
                    solver.add_clause_reuse(&mut clause);
                }
                Gate::Input => {}
                Gate::And(a, b) => {
                    if pol[g] & 1 != 0 {
                        for c in [a, b] {
                            clause.clear();
                            clause.extend([!out, sat(c)]);
                            solver.add_clause_reuse(&mut clause);
                        }
                    }
                    if pol[g] & 2 != 0 {
                        clause.clear();
                        clause.extend([out, !sat(a), !sat(b)]);
                        solver.add_clause_reuse(&mut clause);
                    }
                }
            }
        }
        clause.clear();
        clause.push(sat(root));
        solver.add_clause_reuse(&mut clause);
        let r = solver.solve_limited(&[]);
        if r == lbool::TRUE {
            Ok(true)
        } else if r == lbool::FALSE {
            Ok(false)
        } else {
            Err(EvalError::Solver("solver gave up".into()))
        }
    }
}

enum SetValue {
    Fixed(Vec<bool>),
    Free,
}

#[derive(Clone, Copy)]
enum Slot {
    Dense(usize),
    Sparse(u128),
    None,
}

/// Largest per-node table kept dense.
const DENSE_MAX: usize = 4096;

struct Grounder<'a> {
    c: &'a Compiled,
    m: &'a CMsc,
    sets: Vec<SetValue>,
    env: Vec<u8>,
    /// Dense memo slots per node (`None` when the table would be too large).
    offsets: Vec<Option<usize>>,
    dense: Vec<u32>,
    memo: FxHashMap<(u32, u128), Lit>,
    aig: Aig,
    cost: u64,
    limit: u64,
}

impl Grounder<'_> {
    fn slot(&self, n: u32) -> Slot {
        let fv = &self.c.free[n as usize];
        if let Some(base) = self.offsets[n as usize] {
            let len = self.m.len();
            let ix = fv
                .iter()
                .rev()
                .fold(0usize, |acc, &v| acc * len + self.env[v as usize] as usize);
            return Slot::Dense(base + ix);
        }
        if fv.len() > 21 {
            return Slot::None;
        }
        let mut k = 0u128;
        for (i, &v) in fv.iter().enumerate() {
            k |= (self.env[v as usize] as u128) << (6 * i);
        }
        Slot::Sparse(k)
    }

    fn ground(&mut self, n: u32) -> Result<Lit, EvalError> {
        let slot = self.slot(n);
        match slot {
            Slot::Dense(i) if self.dense[i] != 0 => return Ok(self.dense[i] - 1),
            Slot::Sparse(k) => {
                if let Some(&l) = self.memo.get(&(n, k)) {
                    return Ok(l);
                }
            }
            _ => {}
        }
        self.cost += 1;
        if self.cost > self.limit {
            return Err(EvalError::CostCap { limit: self.limit });
        }
        let ev = |v: &VarIx| self.env[*v as usize] as usize;
        let bit = |b: bool| if b { TRUE } else { FALSE };
        let m = self.m;
        let c = self.c;
        let lit = match &c.nodes[n as usize] {
            Node::Le(x, y) => bit(m.leq(ev(x), ev(y))),
            Node::LeProc(x, y) => bit(m.leq_proc(ev(x), ev(y))),
            Node::LtProc(x, y) => bit(m.leq_proc(ev(x), ev(y)) && ev(x) != ev(y)),
            Node::Next(x, y) => bit(m.next(ev(x), ev(y))),
            Node::Msg(x, y) => bit(m.is_match(ev(x), ev(y))),
            Node::Eq(x, y) => bit(ev(x) == ev(y)),
            Node::ActIs(x, a) => bit(m.action(ev(x)) == a),
            Node::OnProc(x, p) => bit(m.owner(ev(x)) == p),
            Node::Lbl(x, msg) => bit(m.message(ev(x)) == Some(msg)),
            Node::In(x, s) => {
                let e = ev(x);
                match &self.sets[*s] {
                    SetValue::Fixed(bits) => bit(bits[e]),
                    SetValue::Free => self.aig.input(*s, e),
                }
            }
            Node::And(kids) => {
                let mut acc = TRUE;
                for &k in kids {
                    let l = self.ground(k)?;
                    acc = self.aig.and(acc, l);
                    if acc == FALSE {
                        break;
                    }
                }
                acc
            }
            Node::Or(kids) => {
                let mut acc = FALSE;
                for &k in kids {
                    let l = self.ground(k)?;
                    acc = self.aig.or(acc, l);
                    if acc == TRUE {
                        break;
                    }
                }
                acc
            }
            Node::Not(k) => self.ground(*k)? ^ 1,
            &Node::Exists(v, k) | &Node::Forall(v, k) => {
                let is_exists = matches!(c.nodes[n as usize], Node::Exists(..));
                let saved = self.env[v as usize];
                let (mut acc, stop) = if is_exists { (FALSE, TRUE) } else { (TRUE, FALSE) };
                for e in 0..m.len() {
                    self.env[v as usize] = e as u8;
                    let l = match self.ground(k) {
                        Ok(l) => l,
                        Err(err) => {
                            self.env[v as usize] = saved;
                            return Err(err);
                        }
                    };
                    acc = if is_exists {
                        self.aig.or(acc, l)
                    } else {
                        self.aig.and(acc, l)
                    };
                    if acc == stop {
                        break;
                    }
                }
                self.env[v as usize] = saved;
                acc
            }
        };
        match slot {
            Slot::Dense(i) => self.dense[i] = lit + 1,
            Slot::Sparse(k) => {
                self.memo.insert((n, k), lit);
            }
            Slot::None => {}
        }
        Ok(lit)
    }
}

/// A formula compiled once and evaluated on many models.
#[derive(Debug)]
pub struct Evaluator {
    compiled: Compiled,
    prefix: Vec<SetVar>,
    limits: EvalLimits,
}

impl Evaluator {
    pub fn new(phi: &EmsoFormula) -> Self {
        Self::with_limits(phi, EvalLimits::default())
    }

    pub fn with_limits(phi: &EmsoFormula, limits: EvalLimits) -> Self {
        Evaluator {
            compiled: compile(&phi.body, &phi.prefix),
            prefix: phi.prefix.clone(),
            limits,
        }
    }

    /// `M ⊨ φ` for a sentence.
    pub fn holds(&self, m: &CMsc) -> Result<bool, EvalError> {
        self.holds_with(m, &Assignment::default())
    }

    /// Satisfaction under `σ`. Set variables bound by `σ` are fixed; the
    /// remaining prefix variables are existentially quantified.
    pub fn holds_with(&self, m: &CMsc, sigma: &Assignment) -> Result<bool, EvalError> {
        let c = &self.compiled;
        if m.len() > self.limits.max_events || m.len() > 64 {
            return Err(EvalError::TooManyEvents {
                events: m.len(),
                limit: self.limits.max_events.min(64),
            });
        }
        let free_prefix = self
            .prefix
            .iter()
            .filter(|s| !sigma.sets.contains_key(*s))
            .count();
        if free_prefix > self.limits.max_set_vars {
            return Err(EvalError::TooManySetVars {
                count: free_prefix,
                limit: self.limits.max_set_vars,
            });
        }
        let mut sets = Vec::with_capacity(c.sets.len());
        for s in &c.sets {
            if let Some(vals) = sigma.sets.get(s) {
                let mut bits = vec![false; m.len()];
                for &e in vals.iter().filter(|&&e| e < m.len()) {
                    bits[e] = true;
                }
                sets.push(SetValue::Fixed(bits));
            } else if self.prefix.contains(s) {
                sets.push(SetValue::Free);
            } else {
                return Err(EvalError::UnboundSet(s.clone()));
            }
        }
        let mut env = vec![0u8; c.vars.len()];
        for &v in &c.free[c.root as usize] {
            let name = &c.vars[v as usize];
            match sigma.fo.get(name) {
                Some(&e) if e < m.len() => env[v as usize] = e as u8,
                _ => return Err(EvalError::Unbound(name.clone())),
            }
        }
        let mut offsets = Vec::with_capacity(c.nodes.len());
        let mut total = 0usize;
        for fv in &c.free {
            let size = (0..fv.len()).try_fold(1usize, |acc, _| {
                acc.checked_mul(m.len()).filter(|&s| s <= DENSE_MAX)
            });
            match size {
                Some(size) => {
                    offsets.push(Some(total));
                    total += size;
                }
                None => offsets.push(None),
            }
        }
        let mut g = Grounder {
            c,
            m,
            sets,
            env,
            offsets,
            dense: vec![0; total],
            memo: FxHashMap::default(),
            aig: Aig::new(),
            cost: 0,
            limit: self.limits.max_nodes,
        };
        let root = g.ground(c.root)?;
        g.aig.satisfiable(root)
    }
}

pub fn evaluate(phi: &EmsoFormula, m: &CMsc) -> Result<bool, EvalError> {
    Evaluator::new(phi).holds(m)
}

pub fn evaluate_limited(phi: &EmsoFormula, m: &CMsc, limits: EvalLimits) -> Result<bool, EvalError> {
    Evaluator::with_limits(phi, limits).holds(m)
}

/// Tarskian satisfaction of a first-order formula; every set variable must be
/// bound by `σ`.
pub fn evaluate_with(psi: &Formula, m: &CMsc, sigma: &Assignment) -> Result<bool, EvalError> {
    Evaluator::new(&EmsoFormula::first_order(psi.clone())).holds_with(m, sigma)
}

/// All cMSCs of the universe satisfying `φ`.
pub fn bounded_models(
    phi: &EmsoFormula,
    universe: &Universe,
    limits: EvalLimits,
) -> Result<CMscSet, EvalError> {
    let ev = Evaluator::with_limits(phi, limits);
    let mut out = CMscSet::new();
    let mut err = None;
    universe.for_each(|m| {
        if err.is_some() {
            return;
        }
        match ev.holds(&m) {
            Ok(true) => {
                insert(&mut out, m);
            }
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
