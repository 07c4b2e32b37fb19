//! The two MKNF approximators over the `KA(K)` powerset bilattice.
//!
//! Both share the same first component: ontology-entailed K-atoms plus heads
//! of rules whose positive body holds in `T` and whose negative body misses
//! `P`. The second component derives a head `Ka` unless `OB_{O,T} ⊨ ¬a`; the
//! richer variant additionally blocks `Ka` when unit propagation through a
//! positive rule with a refuted head would contradict it.

use std::sync::Arc;

use crate::aft::Approximator;
use crate::kb::{KnowledgeBase, Partition};
use crate::lattice::{AtomUniverse, BilatticePair, LatticeElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Phi,
    Psi,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Phi => "phi",
            Variant::Psi => "psi",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An MKNF approximator: a knowledge base plus a variant selector.
#[derive(Clone)]
pub struct MknfApproximator {
    kb: Arc<KnowledgeBase>,
    variant: Variant,
}

impl MknfApproximator {
    pub fn new(kb: Arc<KnowledgeBase>, variant: Variant) -> Self {
        MknfApproximator { kb, variant }
    }

    pub fn kb(&self) -> &Arc<KnowledgeBase> {
        &self.kb
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn first_component(&self, t: &LatticeElement, p: &LatticeElement) -> LatticeElement {
        let kb = &self.kb;
        let mut out = kb.entailed_ka(t);
        for r in kb.rules() {
            if r.body_pos.iter().all(|&b| t.contains(b))
                && r.body_neg.iter().all(|&b| !p.contains(b))
            {
                out = out.with(r.head);
            }
        }
        out
    }

    fn second_component(&self, t: &LatticeElement, p: &LatticeElement) -> LatticeElement {
        let kb = &self.kb;
        let mut out = kb.entailed_ka(p);
        for r in kb.rules() {
            if !r.body_pos.iter().all(|&b| p.contains(b))
                || !r.body_neg.iter().all(|&b| !t.contains(b))
                || kb.refutes(t, r.head)
            {
                continue;
            }
            if self.variant == Variant::Psi && self.unit_blocked(t, r.head) {
                continue;
            }
            out = out.with(r.head);
        }
        out
    }

    /// The unit-propagation blocking clause: some positive rule contains the
    /// candidate atom in its body, has a head refuted by `OB_{O,T}`, and has
    /// the rest of its body already inside `T` — so deriving the candidate
    /// would complete a contradicted unit.
    fn unit_blocked(&self, t: &LatticeElement, candidate: usize) -> bool {
        let kb = &self.kb;
        kb.rules().iter().any(|r| {
            r.is_positive()
                && r.body_pos.contains(&candidate)
                && kb.refutes(t, r.head)
                && r.body_pos.iter().all(|&b| b == candidate || t.contains(b))
        })
    }
}

impl Approximator for MknfApproximator {
    fn universe(&self) -> &Arc<AtomUniverse> {
        self.kb.ka()
    }

    fn name(&self) -> &str {
        self.variant.name()
    }

    fn apply(&self, p: &BilatticePair) -> BilatticePair {
        BilatticePair::new(
            self.first_component(&p.first, &p.second),
            self.second_component(&p.first, &p.second),
        )
    }

    fn first(&self, p: &BilatticePair) -> LatticeElement {
        self.first_component(&p.first, &p.second)
    }

    fn second(&self, p: &BilatticePair) -> LatticeElement {
        self.second_component(&p.first, &p.second)
    }
}

/// One application of the basic approximator.
pub fn phi(kb: &Arc<KnowledgeBase>, part: &Partition) -> Partition {
    MknfApproximator::new(kb.clone(), Variant::Phi).apply(part)
}

/// One application of the unit-propagating approximator.
pub fn psi(kb: &Arc<KnowledgeBase>, part: &Partition) -> Partition {
    MknfApproximator::new(kb.clone(), Variant::Psi).apply(part)
}

/// Result of checking the pointwise precision dominance of psi over phi.
#[derive(Debug, Clone)]
pub struct PrecisionReport {
    pub checked: usize,
    pub counterexample: Option<BilatticePair>,
}

impl PrecisionReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `phi(x) ≤p psi(x)` on all pairs (exhaustive for universes of at
/// most 10 atoms) or on `n_samples` seeded random pairs.
pub fn precision_compare(
    kb: &Arc<KnowledgeBase>,
    n_samples: usize,
    seed: u64,
) -> PrecisionReport {
    use rand::{Rng, SeedableRng};

    let a_phi = MknfApproximator::new(kb.clone(), Variant::Phi);
    let a_psi = MknfApproximator::new(kb.clone(), Variant::Psi);
    let u = kb.ka().clone();
    let n = u.len();
    let mut checked = 0;
    let mut check = |fb: u64, sb: u64| -> Option<BilatticePair> {
        let p = BilatticePair::new(
            LatticeElement::from_bits(&u, fb),
            LatticeElement::from_bits(&u, sb),
        );
        checked += 1;
        if a_phi.apply(&p).leq_p(&a_psi.apply(&p)).unwrap() {
            None
        } else {
            Some(p)
        }
    };
    if n <= 10 {
        for fb in 0..=u.mask() {
            for sb in 0..=u.mask() {
                if let Some(p) = check(fb, sb) {
                    return PrecisionReport { checked, counterexample: Some(p) };
                }
                if sb == u.mask() {
                    break;
                }
            }
            if fb == u.mask() {
                break;
            }
        }
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_samples {
            let fb = rng.gen::<u64>() & u.mask();
            let sb = rng.gen::<u64>() & u.mask();
            if let Some(p) = check(fb, sb) {
                return PrecisionReport { checked, counterexample: Some(p) };
            }
        }
    }
    PrecisionReport { checked, counterexample: None }
}
