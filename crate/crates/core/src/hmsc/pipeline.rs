//! HMSC to EMSO: preprocessing, state elimination and the closure
//! constructions.

use crate::closure::{concat_formula, formula_for_cmsc, iterate_formula, union_formula, ClosureContext};
use crate::cmsc::MsgId;
use crate::emso::ast::{and, ff, forall, lbl, not, or, var, EmsoFormula, Formula};

use super::classes::{loop_connected_bounded, LoopVerdict};
use super::general::{final_term, term_language_bounded, to_generalized, Term};
use super::{Hmsc, HmscError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Run the bounded loop-connectedness check first.
    pub check_loops: bool,
    pub loop_bound: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            check_loops: true,
            loop_bound: 8,
        }
    }
}

/// `∀x. ¬⋁_m m(x)`: every event is matched.
pub fn no_unmatched_sentence(messages: &[MsgId]) -> Formula {
    let x = var("x");
    forall(&x, not(or(messages.iter().map(|m| lbl(&x, m)).collect())))
}

fn iterated_language_connected(t: &Term) -> Result<(), HmscError> {
    let lang = term_language_bounded(t, usize::MAX, 1);
    if lang.values().all(|m| m.connected()) {
        Ok(())
    } else {
        Err(HmscError::NotConnected(t.to_string()))
    }
}

/// Structural translation of a term into a formula defining its language.
pub fn term_to_formula(t: &Term, ctx: &mut ClosureContext) -> Result<EmsoFormula, HmscError> {
    Ok(match t {
        Term::Empty => EmsoFormula::first_order(ff()),
        Term::Atom(m) => formula_for_cmsc(m, ctx),
        Term::Union(a, b) => {
            let fa = term_to_formula(a, ctx)?;
            let fb = term_to_formula(b, ctx)?;
            union_formula(&fa, &fb)
        }
        Term::Concat(a, b) => {
            let fa = term_to_formula(a, ctx)?;
            let fb = term_to_formula(b, ctx)?;
            concat_formula(&fa, &fb, ctx)
        }
        Term::Plus(a) => {
            iterated_language_connected(a)?;
            let fa = term_to_formula(a, ctx)?;
            iterate_formula(&fa, ctx).plus
        }
        Term::Omega(a) => {
            iterated_language_connected(a)?;
            let fa = term_to_formula(a, ctx)?;
            iterate_formula(&fa, ctx).omega
        }
    })
}

/// An EMSO sentence whose models are the MSCs of `h`.
pub fn hmsc_to_emso(h: &Hmsc, opts: PipelineOptions) -> Result<EmsoFormula, HmscError> {
    if opts.check_loops {
        if let LoopVerdict::Violation { cycle } = loop_connected_bounded(h, opts.loop_bound) {
            return Err(HmscError::NotLoopConnected(cycle));
        }
    }
    let mut ctx = ClosureContext::new(&h.processes, &h.messages);
    ctx.reserve(&EmsoFormula::first_order(no_unmatched_sentence(&h.messages)));
    let mut phi: Option<EmsoFormula> = None;
    for g in to_generalized(h) {
        let t = final_term(&g)?;
        let f = term_to_formula(&t, &mut ctx)?;
        phi = Some(match phi {
            None => f,
            Some(p) => union_formula(&p, &f),
        });
    }
    let phi = phi.unwrap_or_else(|| EmsoFormula::first_order(ff()));
    Ok(EmsoFormula::new(
        phi.prefix,
        and(vec![no_unmatched_sentence(&h.messages), phi.body]),
    ))
}
