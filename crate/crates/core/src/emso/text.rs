//! Parenthesized prefix syntax for formulas.
//!
//! ```text
//! (exists-set (X Y) BODY)        EMSO prefix, optional, outermost only
//! (exists x F) (forall x F)
//! (and F*) (or F*) (not F)       (and) is true, (or) is false
//! (le x y) (leproc x y) (ltproc x y) (next x y) (msg x y) (eq x y)
//! (on x p) (act x p!q) (lbl x m) (in x X)
//! ```

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::cmsc::{Action, MsgId, ProcessId};

use super::ast::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("formula syntax error at line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn tokenize(src: &str, base_line: usize) -> Vec<(Tok, Pos)> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some((ci, c)) = chars.next() {
            let pos = Pos {
                line: base_line + li,
                column: ci + 1,
            };
            match c {
                '(' => out.push((Tok::Open, pos)),
                ')' => out.push((Tok::Close, pos)),
                c if c.is_whitespace() => {}
                _ => {
                    let mut s = String::from(c);
                    while let Some(&(_, d)) = chars.peek() {
                        if d.is_whitespace() || d == '(' || d == ')' {
                            break;
                        }
                        s.push(d);
                        chars.next();
                    }
                    out.push((Tok::Atom(s), pos));
                }
            }
        }
    }
    out
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn err<T>(&self, pos: Pos, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        })
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn next(&mut self) -> Result<(Tok, Pos), SyntaxError> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => self.err(self.end, "unexpected end of input"),
        }
    }

    fn atom(&mut self, what: &str) -> Result<(String, Pos), SyntaxError> {
        match self.next()? {
            (Tok::Atom(s), p) => Ok((s, p)),
            (_, p) => self.err(p, format!("expected {what}")),
        }
    }

    fn close(&mut self) -> Result<(), SyntaxError> {
        match self.next()? {
            (Tok::Close, _) => Ok(()),
            (_, p) => self.err(p, "expected `)`"),
        }
    }

    fn peek_close(&self) -> bool {
        matches!(self.toks.get(self.at), Some((Tok::Close, _)))
    }

    fn top(&mut self) -> Result<EmsoFormula, SyntaxError> {
        let start = self.at;
        if let (Some((Tok::Open, _)), Some((Tok::Atom(k), _))) =
            (self.toks.get(self.at), self.toks.get(self.at + 1))
        {
            if k == "exists-set" {
                self.at += 2;
                match self.next()? {
                    (Tok::Open, _) => {}
                    (_, p) => return self.err(p, "expected `(` before set variables"),
                }
                let mut prefix = Vec::new();
                while !self.peek_close() {
                    let (s, _) = self.atom("set variable")?;
                    prefix.push(SetVar::new(&s));
                }
                self.close()?;
                let body = self.formula()?;
                self.close()?;
                return Ok(EmsoFormula::new(prefix, body));
            }
        }
        self.at = start;
        Ok(EmsoFormula::first_order(self.formula()?))
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        match self.next()? {
            (Tok::Open, _) => {}
            (Tok::Atom(a), _) if a == "true" => return Ok(tt()),
            (Tok::Atom(a), _) if a == "false" => return Ok(ff()),
            (_, p) => return self.err(p, "expected `(`"),
        }
        let (head, hp) = self.atom("keyword")?;
        let v = |s: String| Var::new(&s);
        let f = match head.as_str() {
            "and" | "or" => {
                let mut xs = Vec::new();
                while !self.peek_close() {
                    xs.push(self.formula()?);
                }
                if head == "and" {
                    and(xs)
                } else {
                    or(xs)
                }
            }
            "not" => not(self.formula()?),
            "exists" | "forall" => {
                let x = v(self.atom("variable")?.0);
                let body = self.formula()?;
                if head == "exists" {
                    exists(&x, body)
                } else {
                    forall(&x, body)
                }
            }
            "le" | "leproc" | "ltproc" | "next" | "msg" | "eq" => {
                let x = v(self.atom("variable")?.0);
                let y = v(self.atom("variable")?.0);
                match head.as_str() {
                    "le" => le(&x, &y),
                    "leproc" => le_proc(&x, &y),
                    "ltproc" => lt_proc(&x, &y),
                    "next" => next(&x, &y),
                    "msg" => msg(&x, &y),
                    _ => eq(&x, &y),
                }
            }
            "on" => {
                let x = v(self.atom("variable")?.0);
                on_proc(&x, &ProcessId::new(&self.atom("process")?.0))
            }
            "act" => {
                let x = v(self.atom("variable")?.0);
                let (a, ap) = self.atom("action")?;
                match a.parse::<Action>() {
                    Ok(a) => act(&x, &a),
                    Err(e) => return self.err(ap, e.to_string()),
                }
            }
            "lbl" => {
                let x = v(self.atom("variable")?.0);
                lbl(&x, &MsgId::new(&self.atom("message")?.0))
            }
            "in" => {
                let x = v(self.atom("variable")?.0);
                member(&x, &SetVar::new(&self.atom("set variable")?.0))
            }
            "exists-set" => return self.err(hp, "set quantifiers are only allowed outermost"),
            other => return self.err(hp, format!("unknown keyword `{other}`")),
        };
        self.close()?;
        Ok(f)
    }
}

/// Parses a formula; `base_line` offsets reported line numbers.
pub fn parse_formula_at(src: &str, base_line: usize) -> Result<EmsoFormula, SyntaxError> {
    let toks = tokenize(src, base_line);
    let end = Pos {
        line: base_line + src.lines().count().max(1) - 1,
        column: src.lines().last().map(|l| l.len() + 1).unwrap_or(1),
    };
    let mut p = Parser { toks, at: 0, end };
    let f = p.top()?;
    if p.at < p.toks.len() {
        let pos = p.pos();
        return p.err(pos, "trailing input after formula");
    }
    Ok(f)
}

pub fn parse_formula(src: &str) -> Result<EmsoFormula, SyntaxError> {
    parse_formula_at(src, 1)
}

fn write_fo(out: &mut String, f: &Fo) -> fmt::Result {
    match f {
        Fo::Le(x, y) => write!(out, "(le {x} {y})"),
        Fo::LeProc(x, y) => write!(out, "(leproc {x} {y})"),
        Fo::LtProc(x, y) => write!(out, "(ltproc {x} {y})"),
        Fo::Next(x, y) => write!(out, "(next {x} {y})"),
        Fo::Msg(x, y) => write!(out, "(msg {x} {y})"),
        Fo::Eq(x, y) => write!(out, "(eq {x} {y})"),
        Fo::ActIs(x, a) => write!(out, "(act {x} {a})"),
        Fo::OnProc(x, p) => write!(out, "(on {x} {p})"),
        Fo::Lbl(x, m) => write!(out, "(lbl {x} {m})"),
        Fo::In(x, s) => write!(out, "(in {x} {s})"),
        Fo::And(xs) | Fo::Or(xs) => {
            out.push_str(if matches!(f, Fo::And(_)) { "(and" } else { "(or" });
            for g in xs {
                out.push(' ');
                write_fo(out, g)?;
            }
            out.push(')');
            Ok(())
        }
        Fo::Not(g) => {
            out.push_str("(not ");
            write_fo(out, g)?;
            out.push(')');
            Ok(())
        }
        Fo::Exists(v, g) | Fo::Forall(v, g) => {
            let k = if matches!(f, Fo::Exists(..)) { "exists" } else { "forall" };
            write!(out, "({k} {v} ")?;
            write_fo(out, g)?;
            out.push(')');
            Ok(())
        }
    }
}

pub fn print_body(f: &Formula) -> String {
    let mut out = String::new();
    write_fo(&mut out, f).expect("writing to a String");
    out
}

/// Single-line rendering that [`parse_formula`] reads back.
pub fn print_formula(phi: &EmsoFormula) -> String {
    let body = print_body(&phi.body);
    if phi.prefix.is_empty() {
        body
    } else {
        let names: Vec<&str> = phi.prefix.iter().map(|s| s.as_str()).collect();
        format!("(exists-set ({}) {body})", names.join(" "))
    }
}

impl fmt::Display for EmsoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}
