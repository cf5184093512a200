//! Reachability analysis for graph transformation systems.
//!
//! Systems are modelled as reactive systems over cospans of finite graphs.
//! State properties are nested conditions; the analysis abstracts the
//! (usually infinite) state space with a finite set of predicate conditions
//! and refines the abstraction from spurious counterexamples until the bad
//! pattern is proved unreachable, a concrete witness is found, or a budget
//! runs out.


pub mod abstraction;
pub mod canon;
pub mod category;
pub mod cegar;

pub mod condition;
pub mod cospan;
pub mod entailment;

pub mod error;
pub mod graph;
pub mod models;
pub mod rules;
pub mod specio;


pub use error::Error;
