//! Line-oriented text formats and DOT export.
//!
//! A document is a sequence of named blocks, each opened by a header line
//! (`cmsc`, `hmsc`, `cfm`, `formula`, `pcp`, `tm`, `cm`) and running until
//! the next header. `use "<file>"` imports the blocks of another file.
//! Everything after `#` on a line is a comment.

mod dot;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::cfm::{Cfm, Machine, MachineTransition};
use crate::cmsc::{Action, CMsc, Event, MsgId, ProcessId, RawCmsc, ValidationError};
use crate::emso::text::{parse_formula_at, SyntaxError};
use crate::emso::EmsoFormula;
use crate::hmsc::{Hmsc, Transition};
use crate::reduce::{CmTransition, Counter, CounterMachine, CounterOp, PcpInstance, TmSpec};

pub use dot::{render_cfm, render_cmsc, render_hmsc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Formula(#[from] SyntaxError),
    #[error("line {line}: unresolved reference `{name}`")]
    Unresolved { line: usize, name: String },
    #[error("line {line}: duplicate block name `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("cmsc `{block}`: {source}")]
    Validation {
        block: String,
        #[source]
        source: ValidationError,
    },
    #[error("{block}: {message}")]
    Invalid { block: String, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Debug)]
pub enum Block {
    Cmsc(String, CMsc),
    Hmsc(String, Hmsc),
    Cfm(String, Cfm),
    Formula(String, EmsoFormula),
    Pcp(String, PcpInstance),
    Tm(String, TmSpec),
    Cm(String, CounterMachine),
}

impl Block {
    pub fn name(&self) -> &str {
        match self {
            Block::Cmsc(n, _)
            | Block::Hmsc(n, _)
            | Block::Cfm(n, _)
            | Block::Formula(n, _)
            | Block::Pcp(n, _)
            | Block::Tm(n, _)
            | Block::Cm(n, _) => n,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Block::Cmsc(..) => "cmsc",
            Block::Hmsc(..) => "hmsc",
            Block::Cfm(..) => "cfm",
            Block::Formula(..) => "formula",
            Block::Pcp(..) => "pcp",
            Block::Tm(..) => "tm",
            Block::Cm(..) => "cm",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Document {
    pub blocks: Vec<Block>,
}

macro_rules! accessor {
    ($all:ident, $one:ident, $variant:ident, $ty:ty) => {
        pub fn $all(&self) -> impl Iterator<Item = (&str, &$ty)> {
            self.blocks.iter().filter_map(|b| match b {
                Block::$variant(n, x) => Some((n.as_str(), x)),
                _ => None,
            })
        }

        /// The block of this kind with the given name, or the first one when
        /// `name` is `None`.
        pub fn $one(&self, name: Option<&str>) -> Option<&$ty> {
            self.$all()
                .find(|(n, _)| name.map_or(true, |w| *n == w))
                .map(|(_, x)| x)
        }
    };
}

impl Document {
    accessor!(cmscs, cmsc, Cmsc, CMsc);
    accessor!(hmscs, hmsc, Hmsc, Hmsc);
    accessor!(cfms, cfm, Cfm, Cfm);
    accessor!(formulas, formula, Formula, EmsoFormula);
    accessor!(pcps, pcp, Pcp, PcpInstance);
    accessor!(tms, tm, Tm, TmSpec);
    accessor!(cms, cm, Cm, CounterMachine);
}

const HEADERS: [&str; 8] = ["cmsc", "hmsc", "cfm", "formula", "pcp", "tm", "cm", "use"];

struct Line<'a> {
    no: usize,
    text: &'a str,
    toks: Vec<&'a str>,
}

struct RawBlock<'a> {
    kind: &'a str,
    name: String,
    line: usize,
    body: Vec<Line<'a>>,
}

fn syntax<T>(line: usize, message: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Syntax {
        line,
        message: message.into(),
    })
}

fn split_blocks(text: &str) -> Result<(Vec<(usize, String)>, Vec<RawBlock<'_>>), IoError> {
    let mut uses = Vec::new();
    let mut blocks: Vec<RawBlock> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let code = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = code.split_whitespace().collect();
        let Some(&head) = toks.first() else {
            continue;
        };
        if HEADERS.contains(&head) {
            if head == "use" {
                let arg = code.trim_start()[3..].trim();
                let path = arg
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .filter(|s| !s.is_empty());
                match path {
                    Some(p) => uses.push((no, p.to_string())),
                    None => return syntax(no, "expected `use \"<file>\"`"),
                }
                continue;
            }
            if toks.len() != 2 {
                return syntax(no, format!("expected `{head} <name>`"));
            }
            blocks.push(RawBlock {
                kind: head,
                name: toks[1].to_string(),
                line: no,
                body: Vec::new(),
            });
            continue;
        }
        match blocks.last_mut() {
            Some(b) => b.body.push(Line { no, text: code, toks }),
            None => return syntax(no, format!("`{head}` outside of a block")),
        }
    }
    Ok((uses, blocks))
}

fn names<T: for<'s> From<&'s str>>(toks: &[&str]) -> Vec<T> {
    toks.iter().map(|t| T::from(t)).collect()
}

fn action(line: usize, tok: &str) -> Result<Action, IoError> {
    tok.parse::<Action>().or_else(|e| syntax(line, e.to_string()))
}

fn parse_cmsc(b: &RawBlock) -> Result<CMsc, IoError> {
    let mut raw = RawCmsc::default();
    let mut declared_procs = false;
    let mut events = Vec::new();
    for l in &b.body {
        match l.toks[0] {
            "processes" => {
                raw.processes = names(&l.toks[1..]);
                declared_procs = true;
            }
            "messages" => raw.messages = names(&l.toks[1..]),
            "event" => {
                let (id, act, rest) = match &l.toks[1..] {
                    [id, act, rest @ ..] if rest.len() <= 1 => (*id, action(l.no, act)?, rest),
                    _ => return syntax(l.no, "expected `event <id> <p>!<q>|<p>?<q> [msg=<m>]`"),
                };
                let msg = match rest.first() {
                    None => None,
                    Some(t) => match t.strip_prefix("msg=") {
                        Some(m) if !m.is_empty() => Some(MsgId::new(m)),
                        _ => return syntax(l.no, format!("expected `msg=<m>`, found `{t}`")),
                    },
                };
                events.push(Event::new(id, act, msg));
            }
            "match" => match &l.toks[1..] {
                [s, r] => raw.matches.push((s.to_string(), r.to_string())),
                _ => return syntax(l.no, "expected `match <sendId> <recvId>`"),
            },
            other => return syntax(l.no, format!("unknown cmsc directive `{other}`")),
        }
    }
    if !declared_procs {
        let procs: BTreeSet<ProcessId> = events.iter().map(|e| e.action.owner().clone()).collect();
        raw.processes = procs.into_iter().collect();
    }
    let raw = RawCmsc::from_lines(raw.processes, raw.messages, events, raw.matches);
    raw.validate().map_err(|source| IoError::Validation {
        block: b.name.clone(),
        source,
    })
}

fn parse_hmsc(b: &RawBlock, cmscs: &BTreeMap<String, CMsc>) -> Result<Hmsc, IoError> {
    let mut h = Hmsc::new("");
    h.states.clear();
    let mut initial = None;
    let mut procs: Vec<ProcessId> = Vec::new();
    let mut msgs: Vec<MsgId> = Vec::new();
    let invalid = |message: String| IoError::Invalid {
        block: format!("hmsc `{}`", b.name),
        message,
    };
    for l in &b.body {
        match l.toks[0] {
            "processes" => procs = names(&l.toks[1..]),
            "messages" => msgs = names(&l.toks[1..]),
            "state" => {
                let Some(id) = l.toks.get(1) else {
                    return syntax(l.no, "expected `state <id> [initial] [final] [omega]`");
                };
                let s = h.add_state(id).map_err(|e| invalid(e.to_string()))?;
                for flag in &l.toks[2..] {
                    match *flag {
                        "initial" if initial.is_none() => initial = Some(s),
                        "initial" => return Err(invalid("more than one initial state".into())),
                        "final" => {
                            h.finals.insert(s);
                        }
                        "omega" => {
                            h.omega.insert(s);
                        }
                        other => return syntax(l.no, format!("unknown state flag `{other}`")),
                    }
                }
            }
            "trans" => {
                let (from, to, label) = match &l.toks[1..] {
                    [f, t, lab] if lab.starts_with('@') => (*f, *t, &lab[1..]),
                    _ => return syntax(l.no, "expected `trans <s> <s'> @<cmscName>`"),
                };
                let state = |n: &str| {
                    h.state(n).ok_or(IoError::Unresolved {
                        line: l.no,
                        name: n.to_string(),
                    })
                };
                let (f, t) = (state(from)?, state(to)?);
                let m = cmscs.get(label).ok_or(IoError::Unresolved {
                    line: l.no,
                    name: label.to_string(),
                })?;
                let li = h.add_label(label, m.clone());
                h.transitions.push(Transition { from: f, label: li, to: t });
            }
            other => return syntax(l.no, format!("unknown hmsc directive `{other}`")),
        }
    }
    h.initial = initial.ok_or_else(|| invalid("no initial state".into()))?;
    h.declare(&procs, &msgs);
    Ok(h)
}

fn parse_tuple(line: usize, tok: &str) -> Result<Vec<&str>, IoError> {
    match tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        Some(inner) => Ok(inner.split(',').map(str::trim).collect()),
        None => syntax(line, format!("expected a tuple like `(s1,s2)`, found `{tok}`")),
    }
}

fn parse_cfm(b: &RawBlock) -> Result<Cfm, IoError> {
    let mut messages: Vec<MsgId> = Vec::new();
    let mut machines: Vec<(Machine, bool)> = Vec::new();
    let mut accepting: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut omega: Vec<(usize, Vec<&str>)> = Vec::new();
    let invalid = |message: String| IoError::Invalid {
        block: format!("cfm `{}`", b.name),
        message,
    };
    for l in &b.body {
        match l.toks[0] {
            "messages" => messages = names(&l.toks[1..]),
            "machine" => match &l.toks[1..] {
                [p] => {
                    let mut m = Machine::new(&ProcessId::new(p), "");
                    m.states.clear();
                    machines.push((m, false));
                }
                _ => return syntax(l.no, "expected `machine <p>`"),
            },
            "state" | "trans" if machines.is_empty() => {
                return syntax(l.no, "`state`/`trans` before any `machine`")
            }
            "state" => {
                let (m, has_initial) = machines.last_mut().expect("checked");
                let Some(id) = l.toks.get(1) else {
                    return syntax(l.no, "expected `state <id> [initial]`");
                };
                if m.state(id).is_some() {
                    return Err(invalid(format!("duplicate state `{id}`")));
                }
                m.states.push(id.to_string());
                match &l.toks[2..] {
                    [] => {}
                    ["initial"] if !*has_initial => {
                        m.initial = m.states.len() - 1;
                        *has_initial = true;
                    }
                    _ => return syntax(l.no, "expected `state <id> [initial]` with one initial state"),
                }
            }
            "trans" => {
                let (m, _) = machines.last_mut().expect("checked");
                let [f, t, a, msg] = &l.toks[1..] else {
                    return syntax(l.no, "expected `trans <s> <s'> <p>!<q>|<p>?<q> <m>`");
                };
                let act = action(l.no, a)?;
                let idx = |n: &str| {
                    m.state(n).ok_or(IoError::Unresolved {
                        line: l.no,
                        name: n.to_string(),
                    })
                };
                let (from, to) = (idx(f)?, idx(t)?);
                if act.owner() != &m.process {
                    return Err(invalid(format!("line {}: action {act} is not on `{}`", l.no, m.process)));
                }
                m.transitions.push(MachineTransition {
                    from,
                    action: act,
                    message: MsgId::new(msg),
                    to,
                });
            }
            "accept" | "omega-accept" => {
                let target = if l.toks[0] == "accept" { &mut accepting } else { &mut omega };
                for tok in &l.toks[1..] {
                    target.push((l.no, parse_tuple(l.no, tok)?));
                }
            }
            other => return syntax(l.no, format!("unknown cfm directive `{other}`")),
        }
    }
    let mut cfm = Cfm::new(&messages, machines.into_iter().map(|(m, _)| m).collect());
    for m in &cfm.machines {
        if m.states.is_empty() {
            return Err(invalid(format!("machine `{}` has no states", m.process)));
        }
    }
    let resolve = |cfm: &Cfm, (line, tuple): &(usize, Vec<&str>)| -> Result<Vec<usize>, IoError> {
        if tuple.len() != cfm.machines.len() {
            return Err(invalid(format!(
                "line {line}: tuple has {} components, expected {}",
                tuple.len(),
                cfm.machines.len()
            )));
        }
        tuple
            .iter()
            .zip(&cfm.machines)
            .map(|(n, m)| {
                m.state(n).ok_or(IoError::Unresolved {
                    line: *line,
                    name: n.to_string(),
                })
            })
            .collect()
    };
    cfm.accepting = accepting.iter().map(|t| resolve(&cfm, t)).collect::<Result<_, _>>()?;
    cfm.omega_accepting = omega.iter().map(|t| resolve(&cfm, t)).collect::<Result<_, _>>()?;
    cfm.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(cfm)
}

fn word(tok: &str) -> Vec<String> {
    if tok.contains('.') {
        tok.split('.').map(String::from).collect()
    } else {
        tok.chars().map(String::from).collect()
    }
}

fn parse_pcp(b: &RawBlock) -> Result<PcpInstance, IoError> {
    let mut inst = PcpInstance {
        a: Vec::new(),
        b: Vec::new(),
        f: BTreeMap::new(),
        g: BTreeMap::new(),
    };
    for l in &b.body {
        match l.toks.as_slice() {
            ["pair", a, f, g] => {
                inst.a.push(a.to_string());
                inst.f.insert(a.to_string(), word(f));
                inst.g.insert(a.to_string(), word(g));
            }
            ["letters", rest @ ..] => inst.b = names(rest),
            _ => return syntax(l.no, "expected `pair <a> <f(a)> <g(a)>` or `letters <b>*`"),
        }
    }
    if inst.b.is_empty() {
        let all: BTreeSet<String> = inst.f.values().chain(inst.g.values()).flatten().cloned().collect();
        inst.b = all.into_iter().collect();
    }
    inst.validate().map_err(|e| IoError::Invalid {
        block: format!("pcp `{}`", b.name),
        message: e.to_string(),
    })?;
    Ok(inst)
}

fn parse_tm(b: &RawBlock) -> Result<TmSpec, IoError> {
    let mut t = TmSpec {
        states: Vec::new(),
        tape: Vec::new(),
        initial: String::new(),
        halt: String::new(),
        left_end: String::new(),
        blank: String::new(),
        delta: Vec::new(),
    };
    for l in &b.body {
        match l.toks.as_slice() {
            ["states", rest @ ..] => t.states = names(rest),
            ["tape", rest @ ..] => t.tape = names(rest),
            ["initial", s] => t.initial = s.to_string(),
            ["halt", s] => t.halt = s.to_string(),
            ["left-end", s] => t.left_end = s.to_string(),
            ["blank", s] => t.blank = s.to_string(),
            ["rule", a1, a2, a3, "->", b1, b2, b3] => t.delta.push((
                [a1, a2, a3].map(|s| s.to_string()),
                [b1, b2, b3].map(|s| s.to_string()),
            )),
            _ => {
                return syntax(
                    l.no,
                    "expected states/tape/initial/halt/left-end/blank or `rule a b c -> d e f`",
                )
            }
        }
    }
    t.validate().map_err(|e| IoError::Invalid {
        block: format!("tm `{}`", b.name),
        message: e.to_string(),
    })?;
    Ok(t)
}

fn counter_op(tok: &str) -> Option<CounterOp> {
    let (kind, c) = tok.split_at(tok.len().checked_sub(1)?);
    let c = match c {
        "1" => Counter::C1,
        "2" => Counter::C2,
        _ => return None,
    };
    match kind {
        "inc" => Some(CounterOp::Inc(c)),
        "dec" => Some(CounterOp::Dec(c)),
        "zero" => Some(CounterOp::Zero(c)),
        _ => None,
    }
}

fn op_name(op: CounterOp) -> String {
    let (k, c) = match op {
        CounterOp::Inc(c) => ("inc", c),
        CounterOp::Dec(c) => ("dec", c),
        CounterOp::Zero(c) => ("zero", c),
    };
    format!("{k}{}", if c == Counter::C1 { 1 } else { 2 })
}

fn parse_cm(b: &RawBlock) -> Result<CounterMachine, IoError> {
    let mut c = CounterMachine {
        states: Vec::new(),
        initial: String::new(),
        finals: Vec::new(),
        transitions: Vec::new(),
    };
    for l in &b.body {
        match l.toks.as_slice() {
            ["states", rest @ ..] => c.states = names(rest),
            ["initial", s] => c.initial = s.to_string(),
            ["final", rest @ ..] => c.finals.extend(rest.iter().map(|s| s.to_string())),
            ["trans", f, t, op] => {
                let Some(op) = counter_op(op) else {
                    return syntax(l.no, format!("unknown counter operation `{op}`"));
                };
                c.transitions.push(CmTransition {
                    from: f.to_string(),
                    op,
                    to: t.to_string(),
                });
            }
            _ => return syntax(l.no, "expected states/initial/final or `trans <s> <s'> inc1|dec1|zero1|inc2|dec2|zero2`"),
        }
    }
    c.validate().map_err(|e| IoError::Invalid {
        block: format!("cm `{}`", b.name),
        message: e.to_string(),
    })?;
    Ok(c)
}

/// Parses a document; `use` lines are resolved through `load`.
pub fn parse_with(text: &str, load: &mut dyn FnMut(&str) -> Result<Document, IoError>) -> Result<Document, IoError> {
    let (uses, raw) = split_blocks(text)?;
    let mut doc = Document::default();
    for (line, path) in uses {
        let imported = load(&path).map_err(|e| match e {
            IoError::Io(m) => IoError::Syntax { line, message: m },
            other => other,
        })?;
        doc.blocks.extend(imported.blocks);
    }
    let mut seen: BTreeSet<(String, String)> = doc
        .blocks
        .iter()
        .map(|b| (b.kind().to_string(), b.name().to_string()))
        .collect();
    for b in &raw {
        if !seen.insert((b.kind.to_string(), b.name.clone())) {
            return Err(IoError::Duplicate {
                line: b.line,
                name: b.name.clone(),
            });
        }
    }
    let mut cmscs: BTreeMap<String, CMsc> =
        doc.cmscs().map(|(n, m)| (n.to_string(), m.clone())).collect();
    let mut parsed: Vec<Option<Block>> = vec![None; raw.len()];
    for (i, b) in raw.iter().enumerate() {
        if b.kind == "cmsc" {
            let m = parse_cmsc(b)?;
            cmscs.insert(b.name.clone(), m.clone());
            parsed[i] = Some(Block::Cmsc(b.name.clone(), m));
        }
    }
    for (i, b) in raw.iter().enumerate() {
        let name = b.name.clone();
        let block = match b.kind {
            "cmsc" => continue,
            "hmsc" => Block::Hmsc(name, parse_hmsc(b, &cmscs)?),
            "cfm" => Block::Cfm(name, parse_cfm(b)?),
            "formula" => {
                let Some(first) = b.body.first() else {
                    return syntax(b.line, "empty formula block");
                };
                let text: Vec<&str> = b.body.iter().map(|l| l.text).collect();
                // body lines are contiguous apart from blank lines, which the
                // splitter drops; keep reported positions exact
                let mut src = String::new();
                let mut at = first.no;
                for (l, t) in b.body.iter().zip(&text) {
                    while at < l.no {
                        src.push('\n');
                        at += 1;
                    }
                    src.push_str(t);
                }
                Block::Formula(name, parse_formula_at(&src, first.no)?)
            }
            "pcp" => Block::Pcp(name, parse_pcp(b)?),
            "tm" => Block::Tm(name, parse_tm(b)?),
            "cm" => Block::Cm(name, parse_cm(b)?),
            _ => unreachable!("header keywords are fixed"),
        };
        parsed[i] = Some(block);
    }
    doc.blocks.extend(parsed.into_iter().flatten());
    Ok(doc)
}

/// Parses a self-contained document (no `use` lines).
pub fn parse(text: &str) -> Result<Document, IoError> {
    parse_with(text, &mut |p| Err(IoError::Io(format!("cannot import `{p}` here"))))
}

/// Reads a file, resolving imports relative to its directory.
pub fn load(path: &Path) -> Result<Document, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_with(&text, &mut |p| load(&dir.join(p)))
}

pub fn emit_cmsc(out: &mut String, name: &str, m: &CMsc) {
    let join = |xs: Vec<&str>| xs.join(" ");
    let _ = writeln!(out, "cmsc {name}");
    let _ = writeln!(out, "processes {}", join(m.processes().iter().map(|p| p.as_str()).collect()));
    if m.messages().is_empty() {
        out.push_str("messages\n");
    } else {
        let _ = writeln!(out, "messages {}", join(m.messages().iter().map(|x| x.as_str()).collect()));
    }
    for e in m.events() {
        match &e.message {
            Some(mu) => {
                let _ = writeln!(out, "event {} {} msg={mu}", e.id, e.action);
            }
            None => {
                let _ = writeln!(out, "event {} {}", e.id, e.action);
            }
        }
    }
    for (s, r) in m.match_pairs() {
        let _ = writeln!(out, "match {} {}", m.event(s).id, m.event(r).id);
    }
}

pub fn emit_hmsc(out: &mut String, name: &str, h: &Hmsc) {
    let _ = writeln!(out, "hmsc {name}");
    let words = |xs: &[String]| xs.join(" ");
    let ps: Vec<String> = h.processes.iter().map(|p| p.to_string()).collect();
    let ms: Vec<String> = h.messages.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(out, "processes {}", words(&ps));
    let _ = writeln!(out, "messages {}", words(&ms));
    for (i, s) in h.states.iter().enumerate() {
        let _ = write!(out, "state {s}");
        if i == h.initial {
            out.push_str(" initial");
        }
        if h.finals.contains(&i) {
            out.push_str(" final");
        }
        if h.omega.contains(&i) {
            out.push_str(" omega");
        }
        out.push('\n');
    }
    for t in &h.transitions {
        let _ = writeln!(out, "trans {} {} @{}", h.states[t.from], h.states[t.to], h.labels[t.label].0);
    }
}

/// An HMSC together with cMSC blocks for all of its labels.
pub fn emit_hmsc_with_labels(name: &str, h: &Hmsc) -> String {
    let mut out = String::new();
    for (n, m) in &h.labels {
        emit_cmsc(&mut out, n, m);
        out.push('\n');
    }
    emit_hmsc(&mut out, name, h);
    out
}

pub fn emit_cfm(out: &mut String, name: &str, a: &Cfm) {
    let _ = writeln!(out, "cfm {name}");
    let ms: Vec<&str> = a.messages.iter().map(|m| m.as_str()).collect();
    let _ = writeln!(out, "messages {}", ms.join(" "));
    for m in &a.machines {
        let _ = writeln!(out, "machine {}", m.process);
        for (i, s) in m.states.iter().enumerate() {
            let _ = writeln!(out, "state {s}{}", if i == m.initial { " initial" } else { "" });
        }
        for t in &m.transitions {
            let _ = writeln!(out, "trans {} {} {} {}", m.states[t.from], m.states[t.to], t.action, t.message);
        }
    }
    let tuple = |t: &Vec<usize>| -> String {
        let parts: Vec<&str> = t.iter().zip(&a.machines).map(|(&s, m)| m.states[s].as_str()).collect();
        format!("({})", parts.join(","))
    };
    for (kw, set) in [("accept", &a.accepting), ("omega-accept", &a.omega_accepting)] {
        if !set.is_empty() {
            let ts: Vec<String> = set.iter().map(tuple).collect();
            let _ = writeln!(out, "{kw} {}", ts.join(" "));
        }
    }
}

fn emit_word(w: &[String]) -> String {
    if w.iter().all(|x| x.chars().count() == 1) {
        w.concat()
    } else {
        w.join(".")
    }
}

pub fn emit_pcp(out: &mut String, name: &str, p: &PcpInstance) {
    let _ = writeln!(out, "pcp {name}");
    let _ = writeln!(out, "letters {}", p.b.join(" "));
    for a in &p.a {
        let _ = writeln!(out, "pair {a} {} {}", emit_word(&p.f[a]), emit_word(&p.g[a]));
    }
}

pub fn emit_tm(out: &mut String, name: &str, t: &TmSpec) {
    let _ = writeln!(out, "tm {name}");
    let _ = writeln!(out, "states {}", t.states.join(" "));
    let _ = writeln!(out, "tape {}", t.tape.join(" "));
    let _ = writeln!(out, "initial {}", t.initial);
    let _ = writeln!(out, "halt {}", t.halt);
    let _ = writeln!(out, "left-end {}", t.left_end);
    let _ = writeln!(out, "blank {}", t.blank);
    for (l, r) in &t.delta {
        let _ = writeln!(out, "rule {} -> {}", l.join(" "), r.join(" "));
    }
}

pub fn emit_cm(out: &mut String, name: &str, c: &CounterMachine) {
    let _ = writeln!(out, "cm {name}");
    let _ = writeln!(out, "states {}", c.states.join(" "));
    let _ = writeln!(out, "initial {}", c.initial);
    let _ = writeln!(out, "final {}", c.finals.join(" "));
    for t in &c.transitions {
        let _ = writeln!(out, "trans {} {} {}", t.from, t.to, op_name(t.op));
    }
}

/// Canonical text. HMSC labels without a cMSC block of the same name are
/// written out just before the HMSC.
pub fn emit(doc: &Document) -> String {
    let mut out = String::new();
    let mut written: BTreeSet<String> = doc.cmscs().map(|(n, _)| n.to_string()).collect();
    for (i, b) in doc.blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match b {
            Block::Cmsc(n, m) => emit_cmsc(&mut out, n, m),
            Block::Hmsc(n, h) => {
                for (ln, m) in &h.labels {
                    if written.insert(ln.clone()) {
                        emit_cmsc(&mut out, ln, m);
                        out.push('\n');
                    }
                }
                emit_hmsc(&mut out, n, h)
            }
            Block::Cfm(n, a) => emit_cfm(&mut out, n, a),
            Block::Formula(n, f) => {
                let _ = writeln!(out, "formula {n}\n{f}");
            }
            Block::Pcp(n, p) => emit_pcp(&mut out, n, p),
            Block::Tm(n, t) => emit_tm(&mut out, n, t),
            Block::Cm(n, c) => emit_cm(&mut out, n, c),
        }
    }
    out
}
