use crate::cmsc::{Action, CMsc, Event, MsgId, ProcessId};
use crate::hmsc::Hmsc;

use super::{invalid, local, with_message, ReduceError};

/// Name of the configuration separator message.
pub const MARKER: &str = "sharp";

/// A Turing machine given by 3-window rewrites `(α₁α₂α₃, β₁β₂β₃)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmSpec {
    pub states: Vec<String>,
    pub tape: Vec<String>,
    pub initial: String,
    pub halt: String,
    pub left_end: String,
    pub blank: String,
    pub delta: Vec<([String; 3], [String; 3])>,
}

impl TmSpec {
    pub fn is_state(&self, s: &str) -> bool {
        self.states.iter().any(|x| x == s)
    }

    pub fn is_tape(&self, s: &str) -> bool {
        self.tape.iter().any(|x| x == s)
    }

    pub fn validate(&self) -> Result<(), ReduceError> {
        for s in &self.states {
            if self.is_tape(s) {
                return invalid(format!("`{s}` is both a state and a tape symbol"));
            }
        }
        for s in self.states.iter().chain(&self.tape) {
            if s == MARKER {
                return invalid(format!("`{MARKER}` is reserved for the marker"));
            }
        }
        if !self.is_state(&self.initial) || !self.is_state(&self.halt) {
            return invalid("initial and halting states must be states");
        }
        if !self.is_tape(&self.left_end) || !self.is_tape(&self.blank) {
            return invalid("end marker and blank must be tape symbols");
        }
        for (k, (lhs, rhs)) in self.delta.iter().enumerate() {
            if !(self.is_tape(&lhs[0]) && self.is_state(&lhs[1]) && self.is_tape(&lhs[2])) {
                return invalid(format!("rule {k}: the left window must read tape, state, tape"));
            }
            let states = rhs.iter().filter(|s| self.is_state(s)).count();
            let tapes = rhs.iter().filter(|s| self.is_tape(s)).count();
            if states != 1 || tapes != 2 {
                return invalid(format!("rule {k}: the right window needs one state and two tape symbols"));
            }
        }
        Ok(())
    }
}

/// HMSC over `{p, q}` for `Init · (Succ · Copy)* · Succ · Halt`: `p` sends
/// configurations to `q`, which returns their successors.
pub fn tm_to_hmsc(t: &TmSpec) -> Result<Hmsc, ReduceError> {
    t.validate()?;
    let (p, q) = (ProcessId::new("p"), ProcessId::new("q"));
    let procs = vec![p.clone(), q.clone()];
    let sharp = MsgId::new(MARKER);
    let mut msgs: Vec<MsgId> = t.states.iter().chain(&t.tape).map(|s| MsgId::new(s)).collect();
    msgs.push(sharp.clone());
    let (pq, qp) = (Action::send(&p, &q), Action::send(&q, &p));
    let (p_in, q_in) = (Action::receive(&p, &q), Action::receive(&q, &p));
    let sym = |s: &str| MsgId::new(s);

    // q consumes the marker and answers with a complete message to p
    let handshake = |then_mark: bool| -> CMsc {
        let mut evs = vec![
            Event::new("q0", q_in.clone(), Some(sharp.clone())),
            Event::new("q1", qp.clone(), None),
            Event::new("p0", p_in.clone(), None),
        ];
        if then_mark {
            evs.push(Event::new("p1", pq.clone(), Some(sharp.clone())));
        }
        with_message(&procs, &msgs, evs, ("q1", "p0"))
    };
    let m_sharp = handshake(true);
    let m_sharp_f = handshake(false);
    let init = |g: &str| local(&procs, &msgs, &[(pq.clone(), &sym(g))]);
    let copy_p = |g: &str| local(&procs, &msgs, &[(p_in.clone(), &sym(g)), (pq.clone(), &sym(g))]);
    let copy_q = |g: &str| local(&procs, &msgs, &[(q_in.clone(), &sym(g)), (qp.clone(), &sym(g))]);
    let fin = |g: &str| local(&procs, &msgs, &[(p_in.clone(), &sym(g))]);

    let mut h = Hmsc::new("i0");
    h.declare(&procs, &msgs);
    h.connect("i0", "init_sharp", &local(&procs, &msgs, &[(pq.clone(), &sharp)]), "i1");
    h.connect("i1", &format!("init_{}", t.left_end), &init(&t.left_end), "i2");
    h.connect("i2", &format!("init_{}", t.initial), &init(&t.initial), "i3");
    let blank = init(&t.blank);
    let blank_name = format!("init_{}", t.blank);
    h.connect("i3", &blank_name, &blank, "i4");
    h.connect("i4", &blank_name, &blank, "i4");

    // Succ: from i4 or after Copy
    h.connect("i4", "sharp", &m_sharp, "a");
    for g in &t.tape {
        h.connect("a", &format!("q_{g}"), &copy_q(g), "a");
    }
    for (k, (lhs, rhs)) in t.delta.iter().enumerate() {
        let evs: Vec<(Action, MsgId)> = (0..3)
            .flat_map(|i| [(q_in.clone(), sym(&lhs[i])), (qp.clone(), sym(&rhs[i]))])
            .collect();
        let refs: Vec<(Action, &MsgId)> = evs.iter().map(|(a, m)| (a.clone(), m)).collect();
        h.connect("a", &format!("delta_{k}"), &local(&procs, &msgs, &refs), "b");
    }
    for g in &t.tape {
        h.connect("b", &format!("q_{g}"), &copy_q(g), "b");
    }

    // Copy, then the next Succ
    for g in t.states.iter().chain(&t.tape) {
        let m = copy_p(g);
        h.connect("b", &format!("p_{g}"), &m, "c");
        h.connect("c", &format!("p_{g}"), &m, "c");
    }
    h.connect("c", "sharp", &m_sharp, "a");

    // Halt
    for g in &t.tape {
        let m = fin(g);
        h.connect("b", &format!("f_{g}"), &m, "h1");
        h.connect("h1", &format!("f_{g}"), &m, "h1");
    }
    h.connect("h1", &format!("f_{}", t.halt), &fin(&t.halt), "h2");
    for g in &t.tape {
        h.connect("h2", &format!("f_{g}"), &fin(g), "h2");
    }
    h.connect("h2", "f_sharp", &m_sharp_f, "h3");
    h.finals.insert(h.state("h3").expect("h3"));
    Ok(h)
}
