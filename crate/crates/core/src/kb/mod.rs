//! Hybrid MKNF knowledge bases.
//!
//! A knowledge base pairs a ground propositional ontology with a set of MKNF
//! rules `K h ← K b1, …, not c1, …`. This module covers the data model and
//! the rule-side machinery: parsing (see [`parse`]), DL-safety checking,
//! grounding, the K-atom set `KA(K)`, the immediate-consequence operator
//! `tk`, the two reducts, their least fixpoints `gamma`/`gamma_prime`, and
//! the alternating sequences whose limits give the well-founded partition.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{lfp, AtomUniverse, BilatticePair, LatticeElement, LatticeError};
use crate::ontology::{Formula, ObjectiveKnowledge, OntologyError, OntologyTheory};

pub use parse::{parse_kb, PredAtom, RawKb, RawRule, Term};

/// A pair `(T, P)` of K-atom sets over the `KA(K)` universe. Identical in
/// representation to a bilattice pair: `t` is `first`, `p` is `second`.
pub type Partition = BilatticePair;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("rules are not DL-safe: {0}")]
    DlUnsafe(String),
    #[error("rules contain variables but no constants are declared or used")]
    NoConstants,
    #[error("alternating computation exceeded {0} steps")]
    MaxStepsExceeded(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

/// A ground rule with atoms stored as indices into the `KA(K)` universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: usize,
    pub body_pos: Vec<usize>,
    pub body_neg: Vec<usize>,
}

impl GroundRule {
    pub fn is_fact(&self) -> bool {
        self.body_pos.is_empty() && self.body_neg.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.body_neg.is_empty()
    }
}

/// A DL-safety violation: a rule variable without a non-DL positive anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlViolation {
    pub rule_index: usize,
    pub variable: String,
}

/// A grounded, DL-safety-checked hybrid MKNF knowledge base.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    ontology: Arc<OntologyTheory>,
    rules: Vec<GroundRule>,
    /// The K-atoms: every atom occurring under `K` or `not` in the rules.
    ka: Arc<AtomUniverse>,
    /// Map from `ka` indices to indices in the ontology's atom universe.
    ka_to_prop: Vec<usize>,
}

impl KnowledgeBase {
    /// Builds a ground KB directly from formulas and ground rules given as
    /// `(head, positive body, negative body)` atom-name triples.
    pub fn from_parts(
        formulas: Vec<Formula>,
        rules: Vec<(String, Vec<String>, Vec<String>)>,
    ) -> Result<Self, KbError> {
        let mut ka_names: BTreeSet<String> = BTreeSet::new();
        for (h, pos, neg) in &rules {
            ka_names.insert(h.clone());
            ka_names.extend(pos.iter().cloned());
            ka_names.extend(neg.iter().cloned());
        }
        let mut prop_names = ka_names.clone();
        for f in &formulas {
            f.collect_atoms(&mut prop_names);
        }
        let ka = AtomUniverse::new(ka_names)?;
        let prop = AtomUniverse::new(prop_names)?;
        let ontology = OntologyTheory::new(prop.clone(), formulas)?;
        let ka_to_prop = (0..ka.len())
            .map(|i| prop.index_of(ka.atom(i)).expect("K-atom registered"))
            .collect();
        let mut ground: BTreeSet<GroundRule> = BTreeSet::new();
        for (h, pos, neg) in rules {
            let idx = |name: &str| ka.index_of(name).expect("rule atom in KA");
            let mut body_pos: Vec<usize> = pos.iter().map(|a| idx(a)).collect();
            let mut body_neg: Vec<usize> = neg.iter().map(|a| idx(a)).collect();
            body_pos.sort_unstable();
            body_pos.dedup();
            body_neg.sort_unstable();
            body_neg.dedup();
            ground.insert(GroundRule { head: idx(&h), body_pos, body_neg });
        }
        Ok(KnowledgeBase { ontology, rules: ground.into_iter().collect(), ka, ka_to_prop })
    }

    /// Parses, safety-checks, and grounds KB source text.
    pub fn from_text(text: &str) -> Result<Self, KbError> {
        let raw = parse_kb(text)?;
        ground(&raw)
    }

    pub fn ontology(&self) -> &Arc<OntologyTheory> {
        &self.ontology
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    /// The `KA(K)` universe over which all partitions live.
    pub fn ka(&self) -> &Arc<AtomUniverse> {
        &self.ka
    }

    pub fn atom_name(&self, ka_index: usize) -> &str {
        self.ka.atom(ka_index)
    }

    /// Objective knowledge `OB_{O,S}` for a K-atom set `S`.
    pub fn ob(&self, s: &LatticeElement) -> ObjectiveKnowledge {
        let mut facts = 0u64;
        for i in s.indices() {
            facts |= 1 << self.ka_to_prop[i];
        }
        ObjectiveKnowledge::new(self.ontology.clone(), facts)
    }

    /// `{Ka ∈ KA : OB_{O,S} ⊨ a}`.
    pub fn entailed_ka(&self, s: &LatticeElement) -> LatticeElement {
        let ob = self.ob(s);
        let mut out = LatticeElement::bottom(&self.ka);
        for i in 0..self.ka.len() {
            if ob.entails_index(self.ka_to_prop[i], true) {
                out = out.with(i);
            }
        }
        out
    }

    /// Whether `OB_{O,S} ⊨ ¬a` for the K-atom with index `ka_index`.
    pub fn refutes(&self, s: &LatticeElement, ka_index: usize) -> bool {
        self.ob(s).entails_index(self.ka_to_prop[ka_index], false)
    }

    /// The immediate-consequence operator: ontology-entailed K-atoms plus
    /// heads of rules whose positive body holds in `i` and whose negative
    /// body misses `i`.
    pub fn tk(&self, i: &LatticeElement) -> LatticeElement {
        let mut out = self.entailed_ka(i);
        for r in &self.rules {
            if r.body_pos.iter().all(|&b| i.contains(b))
                && r.body_neg.iter().all(|&b| !i.contains(b))
            {
                out = out.with(r.head);
            }
        }
        out
    }

    /// The MKNF transform `K/S`: keep the positive part of every rule whose
    /// negative body avoids `S`; the result is positive.
    pub fn reduct_slash(&self, s: &LatticeElement) -> KnowledgeBase {
        let rules = self
            .rules
            .iter()
            .filter(|r| r.body_neg.iter().all(|&b| !s.contains(b)))
            .map(|r| GroundRule { head: r.head, body_pos: r.body_pos.clone(), body_neg: vec![] })
            .collect();
        KnowledgeBase { rules, ..self.clone() }
    }

    /// The MKNF-coherent transform `K//S`: as `K/S`, additionally dropping
    /// rules whose head is refuted by `OB_{O,S}`.
    pub fn reduct_slashslash(&self, s: &LatticeElement) -> KnowledgeBase {
        let rules = self
            .rules
            .iter()
            .filter(|r| r.body_neg.iter().all(|&b| !s.contains(b)) && !self.refutes(s, r.head))
            .map(|r| GroundRule { head: r.head, body_pos: r.body_pos.clone(), body_neg: vec![] })
            .collect();
        KnowledgeBase { rules, ..self.clone() }
    }

    /// `Γ(S)`: least fixpoint of `tk` over `K/S`.
    pub fn gamma(&self, s: &LatticeElement) -> Result<LatticeElement, KbError> {
        let reduct = self.reduct_slash(s);
        let op = |z: &LatticeElement| reduct.tk(z);
        Ok(lfp(&op, &LatticeElement::bottom(&self.ka))?)
    }

    /// `Γ′(S)`: least fixpoint of `tk` over `K//S`.
    pub fn gamma_prime(&self, s: &LatticeElement) -> Result<LatticeElement, KbError> {
        let reduct = self.reduct_slashslash(s);
        let op = |z: &LatticeElement| reduct.tk(z);
        Ok(lfp(&op, &LatticeElement::bottom(&self.ka))?)
    }

    /// Alternating sequences `P_{n+1} = Γ(N_n)`, `N_{n+1} = Γ′(P_n)` from
    /// `P_0 = ∅`, `N_0 = KA`. Returns the full traces including the limits.
    pub fn alternating_sequences(
        &self,
        max_steps: usize,
    ) -> Result<(Vec<LatticeElement>, Vec<LatticeElement>), KbError> {
        let mut ps = vec![LatticeElement::bottom(&self.ka)];
        let mut ns = vec![LatticeElement::top(&self.ka)];
        for _ in 0..max_steps {
            let p_next = self.gamma(ns.last().unwrap())?;
            let n_next = self.gamma_prime(ps.last().unwrap())?;
            if &p_next == ps.last().unwrap() && &n_next == ns.last().unwrap() {
                return Ok((ps, ns));
            }
            ps.push(p_next);
            ns.push(n_next);
        }
        Err(KbError::MaxStepsExceeded(max_steps))
    }

    /// Builds a partition from two comma-separable atom-name lists.
    pub fn partition_from_names<'a, I, J>(&self, t: I, p: J) -> Result<Partition, KbError>
    where
        I: IntoIterator<Item = &'a str>,
        J: IntoIterator<Item = &'a str>,
    {
        Ok(BilatticePair::new(
            LatticeElement::from_names(&self.ka, t)?,
            LatticeElement::from_names(&self.ka, p)?,
        ))
    }
}

impl fmt::Display for KnowledgeBase {
    /// Prints the grounded KB back in the concrete syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ontology:")?;
        for fla in self.ontology.formulas() {
            writeln!(f, "  {fla}.")?;
        }
        writeln!(f, "rules:")?;
        for r in &self.rules {
            let mut body: Vec<String> =
                r.body_pos.iter().map(|&b| format!("K {}", self.ka.atom(b))).collect();
            body.extend(r.body_neg.iter().map(|&b| format!("not {}", self.ka.atom(b))));
            if body.is_empty() {
                writeln!(f, "  K {}.", self.ka.atom(r.head))?;
            } else {
                writeln!(f, "  K {} <- {}.", self.ka.atom(r.head), body.join(", "))?;
            }
        }
        Ok(())
    }
}

/// DL-safety: every variable of a rule must occur in a positive body atom
/// whose predicate does not appear in the ontology.
pub fn check_dl_safety(raw: &RawKb) -> Vec<DlViolation> {
    let mut onto_preds: BTreeSet<String> = BTreeSet::new();
    let mut names = BTreeSet::new();
    for f in &raw.ontology {
        f.collect_atoms(&mut names);
    }
    for n in &names {
        onto_preds.insert(pred_of(n).to_string());
    }

    let mut violations = Vec::new();
    for (ri, rule) in raw.rules.iter().enumerate() {
        let mut vars: BTreeSet<&str> = BTreeSet::new();
        for atom in std::iter::once(&rule.head)
            .chain(rule.body_pos.iter())
            .chain(rule.body_neg.iter())
        {
            for t in &atom.args {
                if let Term::Var(v) = t {
                    vars.insert(v);
                }
            }
        }
        for v in vars {
            let anchored = rule.body_pos.iter().any(|atom| {
                !onto_preds.contains(&atom.pred)
                    && atom.args.iter().any(|t| matches!(t, Term::Var(w) if w == v))
            });
            if !anchored {
                violations.push(DlViolation { rule_index: ri, variable: v.to_string() });
            }
        }
    }
    violations
}

fn pred_of(ground_name: &str) -> &str {
    ground_name.split('(').next().unwrap_or(ground_name)
}

/// Grounds a parsed KB: cartesian instantiation of every rule's variables
/// over the collected constants, then `KA(K)` and universe construction.
pub fn ground(raw: &RawKb) -> Result<KnowledgeBase, KbError> {
    let violations = check_dl_safety(raw);
    if !violations.is_empty() {
        let msg = violations
            .iter()
            .map(|v| format!("rule {}: variable {}", v.rule_index + 1, v.variable))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(KbError::DlUnsafe(msg));
    }

    // Constants: explicit declarations plus every constant in the text.
    let mut consts: BTreeSet<String> = raw.consts.iter().cloned().collect();
    let mut onto_atoms = BTreeSet::new();
    for f in &raw.ontology {
        f.collect_atoms(&mut onto_atoms);
    }
    for n in &onto_atoms {
        if let Some(args) = n.strip_prefix(pred_of(n)) {
            let args = args.trim_start_matches('(').trim_end_matches(')');
            if !args.is_empty() {
                consts.extend(args.split(',').map(str::to_string));
            }
        }
    }
    for rule in &raw.rules {
        for atom in std::iter::once(&rule.head)
            .chain(rule.body_pos.iter())
            .chain(rule.body_neg.iter())
        {
            for t in &atom.args {
                if let Term::Const(c) = t {
                    consts.insert(c.clone());
                }
            }
        }
    }
    let consts: Vec<String> = consts.into_iter().collect();

    let mut ground_rules: Vec<(String, Vec<String>, Vec<String>)> = Vec::new();
    for rule in &raw.rules {
        let mut vars: BTreeSet<String> = BTreeSet::new();
        for atom in std::iter::once(&rule.head)
            .chain(rule.body_pos.iter())
            .chain(rule.body_neg.iter())
        {
            for t in &atom.args {
                if let Term::Var(v) = t {
                    vars.insert(v.clone());
                }
            }
        }
        let vars: Vec<String> = vars.into_iter().collect();
        if vars.is_empty() {
            ground_rules.push((
                rule.head.ground_name(),
                rule.body_pos.iter().map(PredAtom::ground_name).collect(),
                rule.body_neg.iter().map(PredAtom::ground_name).collect(),
            ));
            continue;
        }
        if consts.is_empty() {
            return Err(KbError::NoConstants);
        }
        // Cartesian instantiation over the constant set.
        let mut choice = vec![0usize; vars.len()];
        loop {
            let subst: BTreeMap<&str, &str> = vars
                .iter()
                .zip(&choice)
                .map(|(v, &c)| (v.as_str(), consts[c].as_str()))
                .collect();
            let apply = |atom: &PredAtom| {
                let grounded = PredAtom {
                    pred: atom.pred.clone(),
                    args: atom
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Const(c) => Term::Const(c.clone()),
                            Term::Var(v) => Term::Const(subst[v.as_str()].to_string()),
                        })
                        .collect(),
                };
                grounded.ground_name()
            };
            ground_rules.push((
                apply(&rule.head),
                rule.body_pos.iter().map(&apply).collect(),
                rule.body_neg.iter().map(&apply).collect(),
            ));
            // Advance the odometer.
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < consts.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }

    KnowledgeBase::from_parts(raw.ontology.clone(), ground_rules)
}
