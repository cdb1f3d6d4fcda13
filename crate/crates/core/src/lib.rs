//! Qualitative rational verification for concurrent stochastic games.
//!
//! The library decides equilibrium questions about finite concurrent
//! stochastic games in which every player pursues an LTL goal and
//! satisfaction is judged qualitatively: almost surely (probability one) or
//! with non-zero probability.
//!
//! The pieces form a pipeline:
//!
//! * [`ltl`] parses goal formulas and evaluates them exactly on ultimately
//!   periodic words, which gives the rest of the crate a ground-truth
//!   oracle.
//! * [`automata`] compiles formulas to deterministic parity word automata
//!   via a nondeterministic Büchi intermediate.
//! * [`model`] holds the game types (arenas, games, strategy transducers)
//!   and the product constructions: induced Markov chains, induced MDPs,
//!   coalition arenas, and parity-annotated products.
//! * [`qualmc`] and [`qualmdp`] answer almost-sure and non-zero questions
//!   on Markov chains and MDPs.
//! * [`congame`] solves two-player concurrent stochastic parity games for
//!   almost-sure winning regions.
//! * [`rverify`] combines everything into the decision procedures:
//!   membership, E-Nash, A-Nash, E-Core, A-Core, core membership,
//!   beneficial deviation, and non-emptiness.
//!
//! All probabilities are exact rationals and every algorithm iterates in a
//! fixed order, so answers and witnesses are reproducible bit for bit.

pub mod automata;
pub mod congame;
pub mod error;
pub mod ltl;
pub mod model;
pub mod qualmc;
pub mod qualmdp;
pub mod rverify;

pub use automata::{determinize_to_dpw, ltl_to_dpw, ltl_to_nbw, Dpw, Nbw, DEFAULT_DPW_STATE_CAP};
pub use congame::{as_winning_region, is_winnable, zielonka_oracle};
pub use error::RvError;
pub use ltl::{evaluate_on_lasso, parse_ltl, LassoWord, LtlFormula, PropSet};
pub use model::{
    build_parity_game, coalition_arena, induced_markov_chain, induced_mdp, validate_model,
    validate_profile, Csg, Csga, Cspg, Diagnostic, Direction, Distribution, Mc, Mdp,
    StrategyTransducer,
};
pub use qualmc::{mc_as_ltl, mc_as_parity, mc_nz_ltl};
pub use qualmdp::{mdp_as_ltl, mdp_as_reach, mdp_nz_ltl, mdp_satisfies, AtomMode, QualAtom};
pub use rverify::{
    a_core, a_nash, beneficial_deviation, core_membership, e_core, e_nash, membership,
    non_emptiness, punishing_region, restrict_to_punishment, Answer, PunishmentRestriction,
    QueryVerdict, RestrictionSummary, RvOptions, SatMode, Witness,
};
