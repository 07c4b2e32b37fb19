//! Seeded random generators for ground knowledge bases and propositional
//! theories, used by the property and cross-validation test suites.

use std::sync::Arc;

use rand::Rng;

use crate::kb::KnowledgeBase;
use crate::lattice::AtomUniverse;
use crate::ontology::Formula;

const ATOM_POOL: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn pick_atom(rng: &mut impl Rng, n_atoms: usize) -> String {
    ATOM_POOL[rng.gen_range(0..n_atoms)].to_string()
}

/// A small random ontology formula: a fact, a negated fact, or an
/// implication whose conclusion may be negated.
fn random_formula(rng: &mut impl Rng, n_atoms: usize) -> Formula {
    let head = Formula::atom(pick_atom(rng, n_atoms));
    match rng.gen_range(0..4u8) {
        0 => head,
        1 => Formula::not(head),
        2 => Formula::implies(Formula::atom(pick_atom(rng, n_atoms)), head),
        _ => Formula::implies(Formula::atom(pick_atom(rng, n_atoms)), Formula::not(head)),
    }
}

/// Generates a random ground knowledge base: 3–6 atoms drawn from a fixed
/// pool, 1–4 rules with up to two positive and two negative body atoms each,
/// and 0–2 ontology formulas.
pub fn random_kb(rng: &mut impl Rng) -> Arc<KnowledgeBase> {
    let n_atoms = rng.gen_range(3..=ATOM_POOL.len());
    let n_rules = rng.gen_range(1..=4usize);
    let mut rules = Vec::with_capacity(n_rules);
    for _ in 0..n_rules {
        let head = pick_atom(rng, n_atoms);
        let body_pos: Vec<String> =
            (0..rng.gen_range(0..=2usize)).map(|_| pick_atom(rng, n_atoms)).collect();
        let body_neg: Vec<String> =
            (0..rng.gen_range(0..=2usize)).map(|_| pick_atom(rng, n_atoms)).collect();
        rules.push((head, body_pos, body_neg));
    }
    let formulas: Vec<Formula> =
        (0..rng.gen_range(0..=2usize)).map(|_| random_formula(rng, n_atoms)).collect();
    Arc::new(KnowledgeBase::from_parts(formulas, rules).expect("generated KB is well-formed"))
}

/// A random formula tree of the given depth over indexed atoms `p0..pn`,
/// using the full connective set.
fn random_tree(rng: &mut impl Rng, n_atoms: usize, depth: usize) -> Formula {
    if depth == 0 || rng.gen_range(0..5u8) == 0 {
        return Formula::atom(format!("p{}", rng.gen_range(0..n_atoms)));
    }
    match rng.gen_range(0..4u8) {
        0 => Formula::not(random_tree(rng, n_atoms, depth - 1)),
        1 => Formula::and(
            random_tree(rng, n_atoms, depth - 1),
            random_tree(rng, n_atoms, depth - 1),
        ),
        2 => Formula::or(
            random_tree(rng, n_atoms, depth - 1),
            random_tree(rng, n_atoms, depth - 1),
        ),
        _ => Formula::implies(
            random_tree(rng, n_atoms, depth - 1),
            random_tree(rng, n_atoms, depth - 1),
        ),
    }
}

/// Generates a random propositional theory: up to `max_atoms` atoms
/// (`p0..pn`), 1–4 formulas of depth at most 3, plus a random set of facts
/// given as a bit mask over the returned universe.
pub fn random_theory(
    rng: &mut impl Rng,
    max_atoms: usize,
) -> (Arc<AtomUniverse>, Vec<Formula>, u64) {
    let n_atoms = rng.gen_range(1..=max_atoms);
    let universe =
        AtomUniverse::new((0..n_atoms).map(|i| format!("p{i}"))).expect("fresh names");
    let formulas: Vec<Formula> =
        (0..rng.gen_range(1..=4usize)).map(|_| random_tree(rng, n_atoms, 3)).collect();
    let facts = rng.gen_range(0..=universe.mask());
    (universe, formulas, facts)
}
