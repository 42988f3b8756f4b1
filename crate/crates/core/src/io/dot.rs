//! Graphviz output. Node and edge order follow the model, so equal inputs
//! give byte-identical text.

use std::fmt::Write as _;

use crate::cfm::Cfm;
use crate::cmsc::CMsc;
use crate::hmsc::Hmsc;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One cluster per process with its events top to bottom; matches are solid
/// arrows, unmatched events get a dashed stub labelled by their message.
pub fn render_cmsc(name: &str, m: &CMsc) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  rankdir=TB;\n  node [shape=box];\n");
    let node = |i: usize| format!("e{i}");
    for (pi, p) in m.processes().iter().enumerate() {
        let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{p}")));
        let _ = writeln!(out, "    label={};", quote(p.as_str()));
        let chain = m.chain(pi);
        for i in chain.clone() {
            let e = m.event(i);
            let _ = writeln!(out, "    {} [label={}];", node(i), quote(&format!("{}: {}", e.id, e.action)));
        }
        for i in chain.start..chain.end.saturating_sub(1) {
            let _ = writeln!(out, "    {} -> {} [style=dotted, arrowhead=none];", node(i), node(i + 1));
        }
        out.push_str("  }\n");
    }
    for (s, r) in m.match_pairs() {
        let _ = writeln!(out, "  {} -> {} [constraint=false];", node(s), node(r));
    }
    for i in m.unmatched() {
        let mu = m.message(i).map(|x| x.as_str()).unwrap_or("");
        let _ = writeln!(out, "  u{i} [shape=point];");
        let (a, b) = if m.action(i).is_send() { (node(i), format!("u{i}")) } else { (format!("u{i}"), node(i)) };
        let _ = writeln!(out, "  {a} -> {b} [style=dashed, constraint=false, label={}];", quote(mu));
    }
    out.push_str("}\n");
    out
}

pub fn render_hmsc(name: &str, h: &Hmsc) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  rankdir=LR;\n  init [shape=point];\n");
    for (i, s) in h.states.iter().enumerate() {
        let shape = if h.finals.contains(&i) { "doublecircle" } else { "circle" };
        let style = if h.omega.contains(&i) { ", style=bold" } else { "" };
        let _ = writeln!(out, "  s{i} [label={}, shape={shape}{style}];", quote(s));
    }
    let _ = writeln!(out, "  init -> s{};", h.initial);
    for t in &h.transitions {
        let _ = writeln!(out, "  s{} -> s{} [label={}];", t.from, t.to, quote(&h.labels[t.label].0));
    }
    out.push_str("}\n");
    out
}

/// One cluster per machine. Accepting tuples are listed in a note node.
pub fn render_cfm(name: &str, a: &Cfm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  rankdir=LR;\n");
    for (k, m) in a.machines.iter().enumerate() {
        let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{}", m.process)));
        let _ = writeln!(out, "    label={};", quote(m.process.as_str()));
        let _ = writeln!(out, "    i{k} [shape=point];");
        for (i, s) in m.states.iter().enumerate() {
            let _ = writeln!(out, "    m{k}_{i} [label={}, shape=circle];", quote(s));
        }
        let _ = writeln!(out, "    i{k} -> m{k}_{};", m.initial);
        for t in &m.transitions {
            let lab = format!("{} {}", t.action, t.message);
            let _ = writeln!(out, "    m{k}_{} -> m{k}_{} [label={}];", t.from, t.to, quote(&lab));
        }
        out.push_str("  }\n");
    }
    let tuples = |set: &Vec<Vec<usize>>| -> Vec<String> {
        set.iter()
            .map(|t| {
                let parts: Vec<&str> = t.iter().zip(&a.machines).map(|(&s, m)| m.states[s].as_str()).collect();
                format!("({})", parts.join(","))
            })
            .collect()
    };
    let mut note = format!("F: {}", tuples(&a.accepting).join(" "));
    if !a.omega_accepting.is_empty() {
        let _ = write!(note, "\\nFw: {}", tuples(&a.omega_accepting).join(" "));
    }
    let _ = writeln!(out, "  accept [shape=note, label=\"{note}\"];");
    out.push_str("}\n");
    out
}
