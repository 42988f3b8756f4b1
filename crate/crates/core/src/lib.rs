//! Compositional message sequence charts and high-level MSCs.
//!
//! The crate covers the cMSC data model and validation ([`cmsc`]),
//! concatenation ([`compose`]), existential MSO over cMSCs ([`emso`]), the
//! closure constructions for union, concatenation and iteration
//! ([`closure`]), HMSCs with their analyses and translation to formulas
//! ([`hmsc`]), communicating finite-state machines ([`cfm`]), reductions from
//! undecidable problems ([`reduce`]) and a text format ([`io`]).

pub mod cmsc;
pub mod compose;
pub mod emso;
pub mod closure;
pub mod hmsc;
pub mod cfm;
pub mod reduce;
pub mod io;
