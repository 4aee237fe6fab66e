//! A nested-belief dialogue engine: attitude environments with on-demand
//! belief ascription, precondition-based speech acts with separate speaker
//! and hearer update rules, and a systematic partial-order causal-link
//! planner that simulates and recognizes other agents' plans inside nested
//! viewpoints.
//!
//! The pieces, bottom up:
//!
//! - [`term`]: first-order terms, explicit negation, unification.
//! - [`formula`]: attitude formulas (`believe`/`goal`/`intend` wrappers).
//! - [`store`]: the nested environment store, one value per agent.
//! - [`ascription`]: default/stereotypical ascription, belief acceptance,
//!   and the on-demand ascent.
//! - [`acts`]: the speech-act taxonomy, felicity, and update rules.
//! - [`plan`]: the POCL planner, nested simulation and plan recognition.
//! - [`scenario`]: the scenario DSL, batch runner, traces and persistence.
//!
//! All state types are immutable values: every mutator returns a new store,
//! so values are freely shareable across threads.

pub mod acts;
pub mod ascription;
pub mod formula;
pub mod plan;
pub mod render;
pub mod scenario;
pub mod store;
pub mod term;

pub use acts::{ActInstance, ActLibrary, ActSchema};
pub use ascription::{AscriptionOutcome, AscriptionResult};
pub use formula::{AttitudeFormula, AttitudeKind};
pub use store::{AttitudeType, BeliefStore, TriState, Viewpoint};
pub use term::{Bindings, Proposition, Term};
