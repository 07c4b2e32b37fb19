//! Generalized approximation fixpoint theory (AFT) over finite powerset
//! lattices and product bilattices, instantiated for hybrid MKNF knowledge
//! bases.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] — finite powerset lattices, the product bilattice with its
//!   precision order, and Kleene least-fixpoint iteration.
//! * [`sat`] — a small CNF container and DPLL satisfiability procedure.
//! * [`ontology`] — ground propositional formulas, CNF compilation, and the
//!   objective-knowledge entailment oracle.
//! * [`kb`] — hybrid MKNF knowledge bases: parsing, DL-safety, grounding,
//!   the immediate-consequence operator, reducts, and alternating sequences.
//! * [`aft`] — approximators, stable revision (full-lattice and
//!   interval-domain variants), Kripke–Kleene and well-founded fixpoints,
//!   stable-fixpoint enumeration, prudence and strongness checks.
//! * [`approximators`] — the two MKNF approximators (phi and psi) as
//!   [`aft::Approximator`] instances, plus pointwise precision comparison.
//! * [`semantics`] — model extraction from stable fixpoints, the well-founded
//!   model, the knowledge order, and an independent brute-force model oracle.
//! * [`corpus`] — seeded random knowledge bases and propositional theories
//!   for property testing.
//! * [`cli`] — the `mknfaft` command-line front end.

pub mod aft;
pub mod approximators;
pub mod cli;
pub mod corpus;
pub mod kb;
pub mod lattice;
pub mod ontology;
pub mod sat;
pub mod semantics;

/// Default RNG seed for all sampled checks and generated corpora.
pub const DEFAULT_SEED: u64 = 0xA17;
