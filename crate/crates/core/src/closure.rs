//! Formula constructions for union, concatenation and iteration of
//! EMSO-definable cMSC languages, and the characterizing sentence of a single
//! cMSC.
//!
//! Every construction introduces fresh first-order and set variables drawn
//! from a counter in [`ClosureContext`]; names already used by the operands
//! are skipped, so nested constructions never capture each other's variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::cmsc::{CMsc, MsgId, ProcessId};
use crate::compose::Stacked;
use crate::emso::ast::*;
use crate::emso::Assignment;

/// Process and message universe plus the fresh-name supply.
#[derive(Clone, Debug)]
pub struct ClosureContext {
    processes: Vec<ProcessId>,
    messages: Vec<MsgId>,
    used: BTreeSet<String>,
    counter: usize,
}

impl ClosureContext {
    pub fn new(processes: &[ProcessId], messages: &[MsgId]) -> Self {
        let processes: BTreeSet<_> = processes.iter().cloned().collect();
        let messages: BTreeSet<_> = messages.iter().cloned().collect();
        assert!(!processes.is_empty(), "a closure context needs at least one process");
        ClosureContext {
            processes: processes.into_iter().collect(),
            messages: messages.into_iter().collect(),
            used: BTreeSet::new(),
            counter: 0,
        }
    }

    /// `n = |𝒫|`
    pub fn n(&self) -> usize {
        self.processes.len()
    }

    pub fn processes(&self) -> &[ProcessId] {
        &self.processes
    }

    pub fn messages(&self) -> &[MsgId] {
        &self.messages
    }

    /// Marks every variable name of `phi` as taken.
    pub fn reserve(&mut self, phi: &EmsoFormula) {
        self.used.extend(phi.prefix.iter().map(|s| s.to_string()));
        self.used.extend(set_vars(&phi.body).iter().map(|s| s.to_string()));
        self.used.extend(all_vars(&phi.body).iter().map(|v| v.to_string()));
    }

    fn fresh_name(&mut self, stem: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{stem}{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    pub fn fresh_var(&mut self, stem: &str) -> Var {
        Var::new(&self.fresh_name(stem))
    }

    pub fn fresh_set(&mut self, stem: &str) -> SetVar {
        SetVar::new(&self.fresh_name(stem))
    }

    fn fresh_vars(&mut self, stem: &str, k: usize) -> Vec<Var> {
        (0..k).map(|_| self.fresh_var(stem)).collect()
    }

    /// `W` and one `Y_m` per message.
    fn fresh_w_y(&mut self) -> (SetVar, BTreeMap<MsgId, SetVar>) {
        let w = self.fresh_set("W");
        let ys = self
            .messages
            .clone()
            .into_iter()
            .map(|m| {
                let y = SetVar::new(&self.fresh_name(&format!("Y_{m}_")));
                (m, y)
            })
            .collect();
        (w, ys)
    }
}

/// First-order sentence whose finite models are exactly the isomorphic copies
/// of `m`.
pub fn formula_for_cmsc(m: &CMsc, ctx: &mut ClosureContext) -> EmsoFormula {
    let k = m.len();
    let xs = ctx.fresh_vars("e", k);
    let y = ctx.fresh_var("y");
    let mut messages: BTreeSet<MsgId> = ctx.messages.iter().cloned().collect();
    messages.extend(m.messages().iter().cloned());

    let closure = forall(&y, or(xs.iter().map(|x| eq(&y, x)).collect()));
    let mut body = closure;
    for i in (0..k).rev() {
        let x = &xs[i];
        let mut facts = vec![act(x, m.action(i))];
        match m.message(i) {
            Some(mu) => facts.push(lbl(x, mu)),
            None => facts.extend(messages.iter().map(|mm| not(lbl(x, mm)))),
        }
        for j in 0..i {
            let w = &xs[j];
            facts.push(not(eq(x, w)));
            if m.owner_index(i) == m.owner_index(j) {
                for (a, b, ia, ib) in [(w, x, j, i), (x, w, i, j)] {
                    facts.push(if m.next(ia, ib) { next(a, b) } else { not(next(a, b)) });
                }
            }
            for (a, b, ia, ib) in [(w, x, j, i), (x, w, i, j)] {
                let (aa, ab) = (m.action(ia), m.action(ib));
                if aa.is_send() && ab.is_receive() && aa.channel() == ab.channel() {
                    facts.push(if m.is_match(ia, ib) { msg(a, b) } else { not(msg(a, b)) });
                }
            }
        }
        facts.push(body);
        body = exists(x, and(facts));
    }
    EmsoFormula::first_order(body)
}

/// Gives both formulas the same prefix: the ordered union of the two.
pub fn pad_prefixes(phi1: &EmsoFormula, phi2: &EmsoFormula) -> (EmsoFormula, EmsoFormula) {
    let mut prefix = phi1.prefix.clone();
    for s in &phi2.prefix {
        if !prefix.contains(s) {
            prefix.push(s.clone());
        }
    }
    (
        EmsoFormula::new(prefix.clone(), phi1.body.clone()),
        EmsoFormula::new(prefix, phi2.body.clone()),
    )
}

pub fn union_formula(phi1: &EmsoFormula, phi2: &EmsoFormula) -> EmsoFormula {
    let (a, b) = pad_prefixes(phi1, phi2);
    EmsoFormula::new(a.prefix, or(vec![a.body, b.body]))
}

/// Side of the `W`-split a relativization restricts to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// Rewrites quantifiers and message labels of a first-order formula.
struct Relativizer<'a> {
    guard: &'a mut dyn FnMut(&Var) -> Formula,
    ys: &'a BTreeMap<MsgId, SetVar>,
    memo: HashMap<*const Fo, Formula>,
}

impl Relativizer<'_> {
    fn run(&mut self, f: &Formula) -> Formula {
        let key = Arc::as_ptr(f);
        if let Some(g) = self.memo.get(&key) {
            return g.clone();
        }
        let out = match f.as_ref() {
            Fo::Exists(y, xi) => {
                let body = self.run(xi);
                exists(y, and(vec![(self.guard)(y), body]))
            }
            Fo::Forall(y, xi) => {
                let body = self.run(xi);
                forall(y, or(vec![not((self.guard)(y)), body]))
            }
            Fo::Lbl(y, m) => match self.ys.get(m) {
                Some(ym) => or(vec![f.clone(), member(y, ym)]),
                None => f.clone(),
            },
            Fo::And(xs) => and(xs.iter().map(|g| self.run(g)).collect()),
            Fo::Or(xs) => or(xs.iter().map(|g| self.run(g)).collect()),
            Fo::Not(g) => not(self.run(g)),
            _ => f.clone(),
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// `φ^W` (inside) or `φ^¬W` (outside).
pub fn relativize_w(
    psi: &Formula,
    side: Side,
    w: &SetVar,
    ys: &BTreeMap<MsgId, SetVar>,
) -> Formula {
    let mut guard = |y: &Var| match side {
        Side::Inside => member(y, w),
        Side::Outside => not(member(y, w)),
    };
    Relativizer {
        guard: &mut guard,
        ys,
        memo: HashMap::new(),
    }
    .run(psi)
}

fn in_both(x: &Var, y: &Var, s: &SetVar) -> Formula {
    and(vec![member(x, s), member(y, s)])
}

fn not_in(x: &Var, s: &SetVar) -> Formula {
    not(member(x, s))
}

/// `∃x₁…x_n ∀y. y ∈ W ⇔ ⋁ y ≤ x_i`
fn finite_prefix(ctx: &mut ClosureContext, w: &SetVar) -> Formula {
    let xs = ctx.fresh_vars("x", ctx.n());
    let y = ctx.fresh_var("y");
    let below = or(xs.iter().map(|x| le(&y, x)).collect());
    exists_many(&xs, forall(&y, iff(member(&y, w), below)))
}

/// Prefix/suffix decomposition: `L(Φ1) ∘ L(Φ2)`.
pub fn concat_formula(phi1: &EmsoFormula, phi2: &EmsoFormula, ctx: &mut ClosureContext) -> EmsoFormula {
    ctx.reserve(phi1);
    ctx.reserve(phi2);
    let (a, b) = pad_prefixes(phi1, phi2);
    let (w, ys) = ctx.fresh_w_y();
    let (x, y) = (ctx.fresh_var("x"), ctx.fresh_var("y"));

    let psi1 = finite_prefix(ctx, &w);

    let mut cases = vec![
        in_both(&x, &y, &w),
        and(vec![not_in(&x, &w), not_in(&y, &w)]),
    ];
    cases.extend(ys.values().map(|ym| in_both(&x, &y, ym)));
    let mut psi2 = vec![forall(&x, forall(&y, implies(msg(&x, &y), or(cases))))];
    for (m, ym) in &ys {
        let others = ys
            .iter()
            .filter(|(mm, _)| *mm != m)
            .map(|(_, s)| not_in(&x, s));
        let crossing = exists(
            &y,
            or(vec![
                and(vec![msg(&x, &y), member(&x, &w), not_in(&y, &w)]),
                and(vec![msg(&y, &x), member(&y, &w), not_in(&x, &w)]),
            ]),
        );
        let mut rhs: Vec<Formula> = others.collect();
        rhs.push(crossing);
        psi2.push(forall(&x, implies(member(&x, ym), and(rhs))));
    }
    let psi3 = relativize_w(&a.body, Side::Inside, &w, &ys);
    let psi4 = relativize_w(&b.body, Side::Outside, &w, &ys);

    let mut prefix = vec![w];
    prefix.extend(ys.into_values());
    prefix.extend(a.prefix);
    EmsoFormula::new(prefix, and(vec![psi1, and(psi2), psi3, psi4]))
}

/// `∃x₁…x_n ∀y. ⋁ y ≤ x_i`: finite nonempty cMSCs.
pub fn finite_sentence(ctx: &mut ClosureContext) -> EmsoFormula {
    let xs = ctx.fresh_vars("x", ctx.n());
    let y = ctx.fresh_var("y");
    EmsoFormula::first_order(exists_many(
        &xs,
        forall(&y, or(xs.iter().map(|x| le(&y, x)).collect())),
    ))
}

/// Builders for `∼_proc`, `∼_msg`, `∼` and `⇝` over a fixed `W` and `Y_m`'s.
///
/// Instances are cached per variable pair so repeated uses share nodes.
pub struct SimFormulas {
    w: SetVar,
    ys: BTreeMap<MsgId, SetVar>,
    n: usize,
    path: Vec<Var>,
    z: Var,
    border_vars: (Var, Var),
    steps: HashMap<(Var, Var), Formula>,
    sims: HashMap<(Var, Var), Formula>,
    borders: HashMap<(Var, Var), Formula>,
}

impl SimFormulas {
    pub fn new(ctx: &mut ClosureContext, w: &SetVar, ys: &BTreeMap<MsgId, SetVar>) -> Self {
        let n = ctx.n();
        SimFormulas {
            w: w.clone(),
            ys: ys.clone(),
            n,
            path: ctx.fresh_vars("s", 2 * n),
            z: ctx.fresh_var("z"),
            border_vars: (ctx.fresh_var("u"), ctx.fresh_var("v")),
            steps: HashMap::new(),
            sims: HashMap::new(),
            borders: HashMap::new(),
        }
    }

    /// `x ≡_W y`
    pub fn weq(&self, x: &Var, y: &Var) -> Formula {
        iff(member(x, &self.w), member(y, &self.w))
    }

    fn between(x: &Var, z: &Var, y: &Var) -> Formula {
        or(vec![
            and(vec![le_proc(x, z), le_proc(z, y)]),
            and(vec![le_proc(y, z), le_proc(z, x)]),
        ])
    }

    /// `x ∼_proc y`
    pub fn sim_proc(&self, x: &Var, y: &Var) -> Formula {
        let z = &self.z;
        and(vec![
            or(vec![le_proc(x, y), le_proc(y, x)]),
            forall(z, implies(Self::between(x, z, y), self.weq(z, x))),
        ])
    }

    /// `x ∼_msg y`
    pub fn sim_msg(&self, x: &Var, y: &Var) -> Formula {
        let mut parts = vec![or(vec![msg(x, y), msg(y, x)])];
        parts.extend(
            self.ys
                .values()
                .map(|ym| not(or(vec![member(x, ym), member(y, ym)]))),
        );
        and(parts)
    }

    fn step(&mut self, x: &Var, y: &Var) -> Formula {
        let key = (x.clone(), y.clone());
        if let Some(f) = self.steps.get(&key) {
            return f.clone();
        }
        let f = or(vec![self.sim_proc(x, y), self.sim_msg(x, y)]);
        self.steps.insert(key, f.clone());
        f
    }

    /// `x ∼ y`: a `∼_proc ∪ ∼_msg` path `x = x₁, …, x_{2n} = y`. The two
    /// end points are substituted and the intermediate existentials nested.
    pub fn sim(&mut self, x: &Var, y: &Var) -> Formula {
        let key = (x.clone(), y.clone());
        if let Some(f) = self.sims.get(&key) {
            return f.clone();
        }
        let len = 2 * self.n;
        let mut chain: Vec<Var> = vec![x.clone()];
        chain.extend(self.path[1..len - 1].iter().cloned());
        chain.push(y.clone());
        let mut f = self.step(&chain[len - 2], &chain[len - 1]);
        for i in (1..len - 1).rev() {
            let s = self.step(&chain[i - 1], &chain[i]);
            f = exists(&chain[i], and(vec![s, f]));
        }
        self.sims.insert(key, f.clone());
        f
    }

    /// `x ⇝ y`
    pub fn border(&mut self, x: &Var, y: &Var) -> Formula {
        let key = (x.clone(), y.clone());
        if let Some(f) = self.borders.get(&key) {
            return f.clone();
        }
        let (u, v) = self.border_vars.clone();
        let f = and(vec![
            not(self.sim(x, y)),
            exists(
                &u,
                exists(
                    &v,
                    and(vec![
                        self.sim(x, &u),
                        self.sim(y, &v),
                        or(vec![msg(&u, &v), lt_proc(&u, &v)]),
                    ]),
                ),
            ),
        ]);
        self.borders.insert(key, f.clone());
        f
    }
}

/// `φ^{∼x}`: quantifiers bounded to the `∼`-class of `x`.
pub fn relativize_sim(psi: &Formula, x: &Var, sims: &mut SimFormulas) -> Formula {
    let ys = sims.ys.clone();
    let mut guard = |y: &Var| sims.sim(y, x);
    Relativizer {
        guard: &mut guard,
        ys: &ys,
        memo: HashMap::new(),
    }
    .run(psi)
}

/// Result of [`iterate_formula`].
#[derive(Clone, Debug)]
pub struct Iteration {
    /// Defines `L⁺ ∪ L^ω`.
    pub psi: EmsoFormula,
    /// `Ψ ∧ finite`, defining `L⁺`.
    pub plus: EmsoFormula,
    /// `Ψ ∧ ¬finite`, defining `L^ω`.
    pub omega: EmsoFormula,
    pub w: SetVar,
    pub ys: BTreeMap<MsgId, SetVar>,
}

/// Iteration of a connected language of finite cMSCs.
pub fn iterate_formula(phi: &EmsoFormula, ctx: &mut ClosureContext) -> Iteration {
    ctx.reserve(phi);
    let n = ctx.n();
    let (w, ys) = ctx.fresh_w_y();
    let (x, y, z) = (ctx.fresh_var("x"), ctx.fresh_var("y"), ctx.fresh_var("z"));
    let mut sims = SimFormulas::new(ctx, &w, &ys);

    let mut psi1 = Vec::new();
    for (m, ym) in &ys {
        let mut inner = vec![or(vec![msg(&x, &y), msg(&y, &x)]), member(&y, ym)];
        inner.extend(
            ys.iter()
                .filter(|(mm, _)| *mm != m)
                .map(|(_, s)| not_in(&x, s)),
        );
        psi1.push(forall(&x, implies(member(&x, ym), exists(&y, and(inner)))));
    }

    let psi2 = forall(
        &x,
        forall(
            &y,
            implies(
                and(vec![sims.sim(&x, &y), le_proc(&x, &y)]),
                forall(
                    &z,
                    implies(and(vec![le_proc(&x, &z), le_proc(&z, &y)]), sims.weq(&z, &x)),
                ),
            ),
        ),
    );

    let added = or(ys.values().map(|ym| in_both(&x, &y, ym)).collect());
    let psi2b = forall(
        &x,
        forall(&y, implies(msg(&x, &y), iff(not(sims.sim(&x, &y)), added))),
    );

    let cyc = ctx.fresh_vars("c", 2 * n);
    let mut psi3 = Vec::new();
    for r in 1..=2 * n {
        let vars = &cyc[..r];
        let links: Vec<Formula> = (0..r)
            .map(|i| sims.border(&vars[i], &vars[(i + 1) % r]))
            .collect();
        psi3.push(not(exists_many(vars, and(links))));
    }

    let x4 = ctx.fresh_var("x");
    let psi4 = forall(&x4, relativize_sim(&phi.body, &x4, &mut sims));

    let mut prefix = vec![w.clone()];
    prefix.extend(ys.values().cloned());
    prefix.extend(phi.prefix.iter().cloned());
    let body = and(vec![and(psi1), psi2, psi2b, and(psi3), psi4]);
    let psi = EmsoFormula::new(prefix.clone(), body.clone());
    let finite = finite_sentence(ctx).body;
    Iteration {
        plus: EmsoFormula::new(prefix.clone(), and(vec![finite.clone(), body.clone()])),
        omega: EmsoFormula::new(prefix, and(vec![not(finite), body])),
        psi,
        w,
        ys,
    }
}

/// The interpretation of `W`, `Y_m` and the inner set variables for a cMSC
/// built by stacking factors: `W` alternates per process from one factor
/// with events on that process to the next, starting inside; `Y_m` collects
/// the events matched across factors whose factor label is `m`; inner set
/// variables are the unions of the factor witnesses.
pub fn iteration_witness(
    stacked: &Stacked,
    factors: &[CMsc],
    factor_witnesses: &[Assignment],
    w: &SetVar,
    ys: &BTreeMap<MsgId, SetVar>,
) -> Assignment {
    let m = &stacked.result;
    let mut sigma = Assignment::new();
    let mut in_w = BTreeSet::new();
    for pi in 0..m.processes().len() {
        let mut last_factor = None;
        let mut inside = false;
        for e in m.chain(pi) {
            let f = stacked.origin[e].0;
            if last_factor != Some(f) {
                inside = !inside;
                last_factor = Some(f);
            }
            if inside {
                in_w.insert(e);
            }
        }
    }
    sigma.sets.insert(w.clone(), in_w);
    for (msg_id, ym) in ys {
        let members = (0..m.len())
            .filter(|&e| {
                let (f, i) = stacked.origin[e];
                m.is_matched(e) && factors[f].message(i) == Some(msg_id)
            })
            .collect();
        sigma.sets.insert(ym.clone(), members);
    }
    let mut inner: BTreeMap<SetVar, BTreeSet<usize>> = BTreeMap::new();
    for e in 0..m.len() {
        let (f, i) = stacked.origin[e];
        if let Some(wit) = factor_witnesses.get(f) {
            for (s, evs) in &wit.sets {
                let entry = inner.entry(s.clone()).or_default();
                if evs.contains(&i) {
                    entry.insert(e);
                }
            }
        }
    }
    sigma.sets.extend(inner);
    sigma
}
