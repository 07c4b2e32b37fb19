//! From stable fixpoints to MKNF models.
//!
//! A consistent stable fixpoint `(T,P)` of an MKNF approximator induces a
//! three-valued MKNF model exactly when `OB_{O,θ(T)}` is satisfiable, where
//! `θ(T)` is the least fixpoint of the first projection with second argument
//! pinned to `T` on the full lattice. [`extract_models`] classifies every
//! stable fixpoint this way; [`wfm`] classifies the well-founded fixpoint;
//! [`oracle_models`] is an independent brute-force evaluator of the
//! three-valued model definition that never touches the approximators.

use std::sync::Arc;

use thiserror::Error;

use crate::aft::{
    enumerate_stable_fixpoints, stable_revision, well_founded_fixpoint, AftError, Approximator,
    EnumScope,
};
use crate::approximators::{MknfApproximator, Variant};
use crate::kb::{GroundRule, KnowledgeBase, Partition};
use crate::lattice::{lfp, BilatticePair, LatticeElement, LatticeError};

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Aft(#[from] AftError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("KA size {size} exceeds the cap {cap} for this operation")]
    CapExceeded { size: usize, cap: usize },
    #[error("partition is not entailment-closed")]
    ClosureViolation,
}

/// Default cap for stable-fixpoint enumeration (`4^n` candidate pairs).
pub const ENUM_CAP: usize = 12;

/// Default cap for the brute-force oracle (doubly exponential).
pub const ORACLE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ThreeValued,
    TwoValued,
    WellFounded,
    Rejected,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ThreeValued => "THREE_VALUED",
            ModelKind::TwoValued => "TWO_VALUED",
            ModelKind::WellFounded => "WELL_FOUNDED",
            ModelKind::Rejected => "REJECTED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    NotStable,
    InconsistentPartition,
    ThetaUnsat,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NotStable => "not-stable",
            RejectReason::InconsistentPartition => "inconsistent-partition",
            RejectReason::ThetaUnsat => "theta-unsat",
        }
    }
}

/// Classification of one partition against the model-extraction conditions.
#[derive(Debug, Clone)]
pub struct ModelReport {
    pub partition: Partition,
    pub kind: ModelKind,
    pub reason: Option<RejectReason>,
    /// `θ(T) = lfp(A(·,T)_1)` on the full lattice.
    pub theta: LatticeElement,
    pub variant: Variant,
}

impl ModelReport {
    pub fn accepted(&self) -> bool {
        self.kind != ModelKind::Rejected
    }
}

/// `θ(T)`: least fixpoint of the first projection with the second argument
/// pinned to `t`. Identical for both variants (they share first components).
pub fn theta(kb: &Arc<KnowledgeBase>, variant: Variant, t: &LatticeElement) -> LatticeElement {
    let a = MknfApproximator::new(kb.clone(), variant);
    let op = |z: &LatticeElement| a.first(&BilatticePair::new(z.clone(), t.clone()));
    lfp(&op, &LatticeElement::bottom(kb.ka())).expect("first projection is monotone")
}

/// Classifies a pair that is already known to be a stable fixpoint.
fn classify_stable(kb: &Arc<KnowledgeBase>, variant: Variant, pair: Partition) -> ModelReport {
    let th = theta(kb, variant, &pair.first);
    let (kind, reason) = if !pair.is_consistent() {
        (ModelKind::Rejected, Some(RejectReason::InconsistentPartition))
    } else if !kb.ob(&th).satisfiable() {
        (ModelKind::Rejected, Some(RejectReason::ThetaUnsat))
    } else if pair.is_exact() {
        (ModelKind::TwoValued, None)
    } else {
        (ModelKind::ThreeValued, None)
    };
    ModelReport { partition: pair, kind, reason, theta: th, variant }
}

/// Enumerates every stable fixpoint of the chosen approximator and
/// classifies each; the accepted report that sits precision-below all other
/// accepted reports (if any) is upgraded to `WELL_FOUNDED`.
pub fn extract_models(
    kb: &Arc<KnowledgeBase>,
    variant: Variant,
    cap: usize,
) -> Result<Vec<ModelReport>, SemanticsError> {
    let a = MknfApproximator::new(kb.clone(), variant);
    let fixpoints = enumerate_stable_fixpoints(&a, EnumScope::All, cap)?;
    let mut reports: Vec<ModelReport> = fixpoints
        .into_iter()
        .map(|r| classify_stable(kb, variant, r.pair))
        .collect();
    let accepted: Vec<usize> =
        (0..reports.len()).filter(|&i| reports[i].accepted()).collect();
    if let Some(&wf) = accepted.iter().find(|&&i| {
        accepted
            .iter()
            .all(|&j| reports[i].partition.leq_p(&reports[j].partition).unwrap_or(false))
    }) {
        reports[wf].kind = ModelKind::WellFounded;
    }
    Ok(reports)
}

/// Computes the well-founded fixpoint of the chosen approximator and
/// classifies it. When accepted it is the well-founded MKNF model (it sits
/// precision-below every stable fixpoint, hence below every accepted model).
/// When rejected, a well-founded model may still exist among non-least
/// stable fixpoints; callers fall back to [`extract_models`].
pub fn wfm(kb: &Arc<KnowledgeBase>, variant: Variant) -> Result<ModelReport, SemanticsError> {
    let a = MknfApproximator::new(kb.clone(), variant);
    let pair = well_founded_fixpoint(&a)?;
    let mut report = classify_stable(kb, variant, pair);
    if report.accepted() {
        report.kind = ModelKind::WellFounded;
    }
    Ok(report)
}

/// Verifies that a hand-built partition is a stable fixpoint and classifies
/// it; non-fixpoints are rejected with `not-stable`.
pub fn check_partition(
    kb: &Arc<KnowledgeBase>,
    variant: Variant,
    pair: &Partition,
) -> Result<ModelReport, SemanticsError> {
    let a = MknfApproximator::new(kb.clone(), variant);
    if &stable_revision(&a, pair)? != pair {
        let th = theta(kb, variant, &pair.first);
        return Ok(ModelReport {
            partition: pair.clone(),
            kind: ModelKind::Rejected,
            reason: Some(RejectReason::NotStable),
            theta: th,
            variant,
        });
    }
    Ok(classify_stable(kb, variant, pair.clone()))
}

/// Knowledge order on accepted-model partitions: `a` carries less knowledge
/// than `b` iff `a.t ⊆ b.t` and `b.p ⊆ a.p` (the precision order). Both
/// partitions must be entailment-closed, otherwise the subset comparison
/// would be unsound.
pub fn knowledge_leq(
    kb: &Arc<KnowledgeBase>,
    a: &Partition,
    b: &Partition,
) -> Result<bool, SemanticsError> {
    for side in [&a.first, &a.second, &b.first, &b.second] {
        if &kb.entailed_ka(side) != side {
            return Err(SemanticsError::ClosureViolation);
        }
    }
    Ok(a.leq_p(b)?)
}

/// Three truth values ordered `f < u < t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Tv {
    F,
    U,
    T,
}

/// Value of a modal K-atom under a partition: true when inside `T`, false
/// when outside `P`. Partitions here are entailment-closed, so membership
/// coincides with entailment from the corresponding objective theory.
fn val_k(t: &LatticeElement, p: &LatticeElement, atom: usize) -> Tv {
    if t.contains(atom) {
        Tv::T
    } else if !p.contains(atom) {
        Tv::F
    } else {
        Tv::U
    }
}

/// Value of `not a`: the De Morgan dual of [`val_k`].
fn val_not(t: &LatticeElement, p: &LatticeElement, atom: usize) -> Tv {
    if !p.contains(atom) {
        Tv::T
    } else if t.contains(atom) {
        Tv::F
    } else {
        Tv::U
    }
}

/// A rule (an implication) is true iff the head value dominates the body
/// value; the body is the minimum over its literals, `t` when empty. The
/// modal pair for K-atoms and for not-atoms may differ (mixed evaluation).
fn rule_true(
    rule: &GroundRule,
    k_pair: (&LatticeElement, &LatticeElement),
    not_pair: (&LatticeElement, &LatticeElement),
) -> bool {
    let mut body = Tv::T;
    for &b in &rule.body_pos {
        body = body.min(val_k(k_pair.0, k_pair.1, b));
    }
    for &b in &rule.body_neg {
        body = body.min(val_not(not_pair.0, not_pair.1, b));
    }
    val_k(k_pair.0, k_pair.1, rule.head) >= body
}

/// Independent brute-force evaluator of the three-valued MKNF model
/// definition, quantifying over entailment-closed partitions only.
///
/// A candidate `(T,P)` is a model when (a) every rule is true under it and
/// (b) no strictly weaker valid candidate `(T′,P′)` (with `T′ = P′` whenever
/// `T = P`) keeps every rule true under mixed evaluation, where K-atoms are
/// read from the weaker candidate and not-atoms stay with `(T,P)`.
pub fn oracle_models(
    kb: &Arc<KnowledgeBase>,
    cap: usize,
) -> Result<Vec<Partition>, SemanticsError> {
    let u = kb.ka().clone();
    let n = u.len();
    if n > cap {
        return Err(SemanticsError::CapExceeded { size: n, cap });
    }

    // Entailment-closed sets: S = {Ka ∈ KA : OB_{O,S} ⊨ a}.
    let mut closed: Vec<LatticeElement> = Vec::new();
    for bits in 0..=u.mask() {
        let s = LatticeElement::from_bits(&u, bits);
        if kb.entailed_ka(&s) == s {
            closed.push(s);
        }
        if bits == u.mask() {
            break;
        }
    }

    // Valid candidates: consistent closed pairs with satisfiable upper theory
    // (satisfiability of the lower theory follows since T ⊆ P).
    let candidates: Vec<Partition> = closed
        .iter()
        .flat_map(|t| closed.iter().map(move |p| (t.clone(), p.clone())))
        .filter(|(t, p)| t.is_subset(p) && kb.ob(p).satisfiable())
        .map(|(t, p)| BilatticePair::new(t, p))
        .collect();

    let mut models: Vec<Partition> = Vec::new();
    for cand in &candidates {
        let (t, p) = (&cand.first, &cand.second);
        debug_assert!(kb.ob(t).satisfiable());
        // (a) every rule true.
        if !kb.rules().iter().all(|r| rule_true(r, (t, p), (t, p))) {
            continue;
        }
        // (b) minimality against strictly weaker candidates.
        let beaten = candidates.iter().any(|weaker| {
            let (wt, wp) = (&weaker.first, &weaker.second);
            let below = wt.is_subset(t) && wp.is_subset(p);
            let strict = wt != t || wp != p;
            let exactness_respected = !cand.is_exact() || weaker.is_exact();
            below
                && strict
                && exactness_respected
                && kb.rules().iter().all(|r| rule_true(r, (wt, wp), (t, p)))
        });
        if !beaten {
            models.push(cand.clone());
        }
    }
    models.sort_by_key(|m| (m.first.bits(), !m.second.bits() & u.mask()));
    Ok(models)
}
