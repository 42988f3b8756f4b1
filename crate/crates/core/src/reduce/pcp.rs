use std::collections::BTreeMap;

use crate::cmsc::{Action, MsgId, ProcessId};
use crate::hmsc::Hmsc;

use super::{invalid, local, ReduceError};

/// Morphisms `f, g : A → B⁺` over disjoint alphabets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcpInstance {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub f: BTreeMap<String, Vec<String>>,
    pub g: BTreeMap<String, Vec<String>>,
}

impl PcpInstance {
    /// Builds an instance from letter pairs, e.g. `[("1", "a", "aa")]`,
    /// where images are written one character per letter.
    pub fn from_pairs(pairs: &[(&str, &str, &str)]) -> Result<Self, ReduceError> {
        let mut inst = PcpInstance {
            a: Vec::new(),
            b: Vec::new(),
            f: BTreeMap::new(),
            g: BTreeMap::new(),
        };
        for (a, fa, ga) in pairs {
            inst.a.push(a.to_string());
            let split = |w: &str| w.chars().map(String::from).collect::<Vec<_>>();
            inst.f.insert(a.to_string(), split(fa));
            inst.g.insert(a.to_string(), split(ga));
            for c in split(fa).into_iter().chain(split(ga)) {
                if !inst.b.contains(&c) {
                    inst.b.push(c);
                }
            }
        }
        inst.b.sort();
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ReduceError> {
        if self.a.is_empty() {
            return invalid("the alphabet A is empty");
        }
        for x in &self.a {
            if self.b.contains(x) {
                return invalid(format!("letter `{x}` is in both alphabets"));
            }
            for (name, h) in [("f", &self.f), ("g", &self.g)] {
                let Some(img) = h.get(x) else {
                    return invalid(format!("{name}({x}) is undefined"));
                };
                if img.is_empty() {
                    return invalid(format!("{name}({x}) is empty"));
                }
                if let Some(y) = img.iter().find(|y| !self.b.contains(y)) {
                    return invalid(format!("{name}({x}) uses `{y}` outside B"));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, h: &BTreeMap<String, Vec<String>>, word: &[String]) -> Vec<String> {
        word.iter().flat_map(|x| h[x].iter().cloned()).collect()
    }

    pub fn is_solution(&self, word: &[String]) -> bool {
        !word.is_empty() && self.apply(&self.f, word) == self.apply(&self.g, word)
    }
}

/// Flat HMSC over `{p, q, r}` with states `1 … 5` whose language is
/// nonempty iff the instance has a solution.
pub fn pcp_to_hmsc(inst: &PcpInstance) -> Result<Hmsc, ReduceError> {
    inst.validate()?;
    let (p, q, r) = (ProcessId::new("p"), ProcessId::new("q"), ProcessId::new("r"));
    let procs = vec![p.clone(), q.clone(), r.clone()];
    let msgs: Vec<MsgId> = inst.a.iter().chain(&inst.b).map(|s| MsgId::new(s)).collect();
    let mut h = Hmsc::new("1");
    for s in ["2", "3", "4", "5"] {
        h.ensure_state(s);
    }
    h.declare(&procs, &msgs);
    let block = |h: &mut Hmsc, from: &str, to: &str, name: String, m: crate::cmsc::CMsc| {
        h.connect(from, &name, &m, to);
        h.connect(to, &name, &m, to);
    };
    for x in &inst.a {
        let mx = MsgId::new(x);
        let m = local(&procs, &msgs, &[(Action::send(&p, &q), &mx), (Action::send(&p, &r), &mx)]);
        block(&mut h, "1", "2", format!("send_{x}"), m);
    }
    for (stage, (from, to), proc_, image) in [("f", ("2", "3"), &q, &inst.f), ("g", ("3", "4"), &r, &inst.g)] {
        for x in &inst.a {
            let mx = MsgId::new(x);
            let letters: Vec<MsgId> = image[x].iter().map(|y| MsgId::new(y)).collect();
            let mut evs = vec![(Action::receive(proc_, &p), &mx)];
            evs.extend(letters.iter().map(|y| (Action::send(proc_, &p), y)));
            let m = local(&procs, &msgs, &evs);
            block(&mut h, from, to, format!("{stage}_{x}"), m);
        }
    }
    for y in &inst.b {
        let my = MsgId::new(y);
        let m = local(&procs, &msgs, &[(Action::receive(&p, &q), &my), (Action::receive(&p, &r), &my)]);
        block(&mut h, "4", "5", format!("recv_{y}"), m);
    }
    h.finals.insert(h.state("5").expect("state 5"));
    Ok(h)
}

/// The word `u` read by the first block of a path of [`pcp_to_hmsc`].
pub fn pcp_word_of_path(h: &Hmsc, path: &[usize]) -> Vec<String> {
    path.iter()
        .filter_map(|&t| h.label_name(t).strip_prefix("send_").map(String::from))
        .collect()
}
