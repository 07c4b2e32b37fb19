//! Generalized approximation fixpoint theory on the product bilattice.
//!
//! An [`Approximator`] is a precision-monotone operator on pairs that maps an
//! exact pair to an exact pair whenever the image is consistent. Stable
//! revision comes in two forms: the full-lattice version (defined on every
//! pair, including inconsistent ones) and the interval-domain version of
//! consistent AFT. Their disagreement at a pair is exactly what
//! [`is_strong_for`] measures. The well-founded fixpoint is the limit of
//! iterating full-lattice stable revision from the least-precise pair.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lattice::{
    leq_p, lfp, AtomUniverse, BilatticePair, LatticeElement, LatticeError,
};

pub use crate::lattice::CheckMode;

/// Cap for exhaustive pair-of-pairs monotonicity checking (`9^n` cases).
pub const PAIR_EXHAUSTIVE_CAP: usize = 6;

/// Cap above which operators are no longer tabulated before enumeration.
const TABULATE_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum AftError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("iterate escaped its interval during interval-domain stable revision")]
    InternalityViolation,
    #[error("pair is not consistent")]
    NotConsistent,
    #[error("pair is not an interval-domain stable fixpoint")]
    NotStableFixpoint,
    #[error("universe of size {size} exceeds the cap {cap} for this operation")]
    ScopeTooLarge { size: usize, cap: usize },
}

/// A precision-monotone operator on the product bilattice.
///
/// `first`/`second` default to projecting `apply`, but implementations can
/// override them to skip computing the unused component.
pub trait Approximator: Sync {
    fn universe(&self) -> &Arc<AtomUniverse>;

    fn name(&self) -> &str;

    fn apply(&self, p: &BilatticePair) -> BilatticePair;

    fn first(&self, p: &BilatticePair) -> LatticeElement {
        self.apply(p).first
    }

    fn second(&self, p: &BilatticePair) -> LatticeElement {
        self.apply(p).second
    }
}

/// An operator given by an explicit table over all `2^{2n}` pairs.
pub struct TabulatedOperator {
    universe: Arc<AtomUniverse>,
    name: String,
    table: Vec<(u64, u64)>,
}

impl TabulatedOperator {
    fn index(&self, p: &BilatticePair) -> usize {
        let n = self.universe.len();
        ((p.first.bits() as usize) << n) | p.second.bits() as usize
    }

    /// Builds a table by evaluating `f` on every pair.
    pub fn from_fn<F>(
        universe: &Arc<AtomUniverse>,
        name: &str,
        f: F,
    ) -> Result<Self, AftError>
    where
        F: Fn(&BilatticePair) -> BilatticePair,
    {
        let n = universe.len();
        if n > TABULATE_CAP {
            return Err(AftError::ScopeTooLarge { size: n, cap: TABULATE_CAP });
        }
        let mut table = Vec::with_capacity(1 << (2 * n));
        for fb in 0..=universe.mask() {
            for sb in 0..=universe.mask() {
                let p = BilatticePair::new(
                    LatticeElement::from_bits(universe, fb),
                    LatticeElement::from_bits(universe, sb),
                );
                let q = f(&p);
                table.push((q.first.bits(), q.second.bits()));
                if sb == universe.mask() {
                    break;
                }
            }
            if fb == universe.mask() {
                break;
            }
        }
        Ok(TabulatedOperator { universe: universe.clone(), name: name.to_string(), table })
    }

    /// Materializes an arbitrary approximator into a lookup table.
    pub fn tabulate(a: &dyn Approximator) -> Result<Self, AftError> {
        Self::from_fn(a.universe(), a.name(), |p| a.apply(p))
    }
}

impl Approximator for TabulatedOperator {
    fn universe(&self) -> &Arc<AtomUniverse> {
        &self.universe
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, p: &BilatticePair) -> BilatticePair {
        let (fb, sb) = self.table[self.index(p)];
        BilatticePair::new(
            LatticeElement::from_bits(&self.universe, fb),
            LatticeElement::from_bits(&self.universe, sb),
        )
    }
}

/// Full-lattice stable revision: both projection operators run on all of `L`
/// and both least fixpoints start from `⊥`. Defined for every pair.
pub fn stable_revision(
    a: &dyn Approximator,
    p: &BilatticePair,
) -> Result<BilatticePair, AftError> {
    let u = a.universe();
    let bottom = LatticeElement::bottom(u);
    let first_op =
        |z: &LatticeElement| a.first(&BilatticePair::new(z.clone(), p.second.clone()));
    let second_op =
        |z: &LatticeElement| a.second(&BilatticePair::new(p.first.clone(), z.clone()));
    Ok(BilatticePair::new(lfp(&first_op, &bottom)?, lfp(&second_op, &bottom)?))
}

/// Interval-domain stable revision of consistent AFT: the first projection
/// runs on `[⊥, p.second]` from `⊥`, the second on `[p.first, ⊤]` from
/// `p.first`. Errors if an iterate escapes its interval.
pub fn stable_revision_consistent(
    a: &dyn Approximator,
    p: &BilatticePair,
) -> Result<BilatticePair, AftError> {
    if !p.is_consistent() {
        return Err(AftError::NotConsistent);
    }
    let u = a.universe();
    let max_steps = u.len() + 2;

    let mut x = LatticeElement::bottom(u);
    let mut converged = false;
    for _ in 0..max_steps {
        let y = a.first(&BilatticePair::new(x.clone(), p.second.clone()));
        if !y.is_subset(&p.second) {
            return Err(AftError::InternalityViolation);
        }
        if y == x {
            converged = true;
            break;
        }
        x = y;
    }
    if !converged {
        return Err(AftError::Lattice(LatticeError::Divergence { steps: max_steps }));
    }
    let first = x;

    let mut x = p.first.clone();
    let mut converged = false;
    for _ in 0..max_steps {
        let y = a.second(&BilatticePair::new(p.first.clone(), x.clone()));
        if !p.first.is_subset(&y) {
            return Err(AftError::InternalityViolation);
        }
        if y == x {
            converged = true;
            break;
        }
        x = y;
    }
    if !converged {
        return Err(AftError::Lattice(LatticeError::Divergence { steps: max_steps }));
    }
    Ok(BilatticePair::new(first, x))
}

/// `p ≤p A(p)`.
pub fn is_contracting(a: &dyn Approximator, p: &BilatticePair) -> Result<bool, AftError> {
    Ok(leq_p(p, &a.apply(p))?)
}

/// `p.first ⊆ lfp(A(·, p.second)_1)` on the full lattice.
pub fn is_prudent(a: &dyn Approximator, p: &BilatticePair) -> Result<bool, AftError> {
    let bottom = LatticeElement::bottom(a.universe());
    let first_op =
        |z: &LatticeElement| a.first(&BilatticePair::new(z.clone(), p.second.clone()));
    Ok(p.first.is_subset(&lfp(&first_op, &bottom)?))
}

/// Least fixpoint of `A` itself on the bilattice, iterated from `(⊥, ⊤)`.
pub fn kripke_kleene(a: &dyn Approximator) -> Result<BilatticePair, AftError> {
    iterate_to_fixpoint(a.universe(), |p| Ok(a.apply(p)))
}

/// Least fixpoint of full-lattice stable revision, iterated from `(⊥, ⊤)`.
pub fn well_founded_fixpoint(a: &dyn Approximator) -> Result<BilatticePair, AftError> {
    iterate_to_fixpoint(a.universe(), |p| stable_revision(a, p))
}

/// Iterates a pair operator from `(⊥, ⊤)`, requiring the chain to climb in
/// precision. Each step adds precision, so `2n + 2` steps suffice.
fn iterate_to_fixpoint<F>(
    universe: &Arc<AtomUniverse>,
    step: F,
) -> Result<BilatticePair, AftError>
where
    F: Fn(&BilatticePair) -> Result<BilatticePair, AftError>,
{
    let max_steps = 2 * universe.len() + 2;
    let mut p = BilatticePair::least(universe);
    for _ in 0..max_steps {
        let q = step(&p)?;
        if q == p {
            return Ok(p);
        }
        if !leq_p(&p, &q)? {
            return Err(AftError::Lattice(LatticeError::Divergence { steps: max_steps }));
        }
        p = q;
    }
    Err(AftError::Lattice(LatticeError::Divergence { steps: max_steps }))
}

/// Enumeration scope for stable fixpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumScope {
    All,
    ConsistentOnly,
    /// Restrict guesses to contracting-and-prudent pairs (a
    /// correctness-preserving filter for consistent stable fixpoints).
    ContractingPrudent,
}

/// One stable fixpoint found by [`enumerate_stable_fixpoints`].
#[derive(Debug, Clone)]
pub struct StableFixpointReport {
    pub pair: BilatticePair,
    pub consistent: bool,
    /// Exact pair.
    pub total: bool,
    /// Precision-minimum among all reported fixpoints, when one exists.
    pub is_least: bool,
}

/// Brute-force guess-and-verify enumeration of all `p` with `St(p) = p`,
/// sorted in a precision-compatible order (lexicographic by first-component
/// bits, then by complemented second-component bits).
pub fn enumerate_stable_fixpoints(
    a: &dyn Approximator,
    scope: EnumScope,
    cap: usize,
) -> Result<Vec<StableFixpointReport>, AftError> {
    let u = a.universe().clone();
    let n = u.len();
    if n > cap {
        return Err(AftError::ScopeTooLarge { size: n, cap });
    }
    // Tabulate first so the inner fixpoint loops are table lookups.
    let tab;
    let op: &dyn Approximator = if n <= TABULATE_CAP {
        tab = TabulatedOperator::tabulate(a)?;
        &tab
    } else {
        a
    };

    let mut found: Vec<StableFixpointReport> = Vec::new();
    for fb in 0..=u.mask() {
        for sb in 0..=u.mask() {
            let p = BilatticePair::new(
                LatticeElement::from_bits(&u, fb),
                LatticeElement::from_bits(&u, sb),
            );
            let in_scope = match scope {
                EnumScope::All => true,
                EnumScope::ConsistentOnly => p.is_consistent(),
                EnumScope::ContractingPrudent => {
                    is_contracting(op, &p)? && is_prudent(op, &p)?
                }
            };
            if in_scope && stable_revision(op, &p)? == p {
                let consistent = p.is_consistent();
                let total = p.is_exact();
                found.push(StableFixpointReport { pair: p, consistent, total, is_least: false });
            }
            if sb == u.mask() {
                break;
            }
        }
        if fb == u.mask() {
            break;
        }
    }
    found.sort_by_key(|r| {
        (r.pair.first.bits(), !r.pair.second.bits() & u.mask())
    });
    // Flag the precision-minimum if one exists.
    let least_idx = (0..found.len()).find(|&i| {
        found.iter().all(|other| found[i].pair.leq_p(&other.pair).unwrap_or(false))
    });
    if let Some(i) = least_idx {
        found[i].is_least = true;
    }
    Ok(found)
}

/// Strongness of `A` at `p`: the full-lattice stable revision agrees with the
/// interval-domain one. Precondition: `p` is a consistent interval-domain
/// stable fixpoint.
pub fn is_strong_for(a: &dyn Approximator, p: &BilatticePair) -> Result<bool, AftError> {
    if !p.is_consistent() {
        return Err(AftError::NotConsistent);
    }
    if &stable_revision_consistent(a, p)? != p {
        return Err(AftError::NotStableFixpoint);
    }
    Ok(&stable_revision(a, p)? == p)
}

/// Structural diagnostics for a candidate approximator.
#[derive(Debug, Clone)]
pub struct ApproximatorDiagnostics {
    pub monotone: bool,
    pub monotonicity_witness: Option<(BilatticePair, BilatticePair)>,
    pub exact_on_consistent: bool,
    pub exactness_witness: Option<LatticeElement>,
}

impl ApproximatorDiagnostics {
    pub fn passed(&self) -> bool {
        self.monotone && self.exact_on_consistent
    }
}

/// Verifies precision-monotonicity (exhaustive over all comparable pairs of
/// pairs, or sampled) and generalized exactness: `A(x,x)` consistent implies
/// `A(x,x)` exact (exhaustive over all `2^n` exact pairs).
pub fn check_approximator(
    a: &dyn Approximator,
    mode: CheckMode,
) -> Result<ApproximatorDiagnostics, AftError> {
    let u = a.universe().clone();
    let n = u.len();

    let mut monotone = true;
    let mut monotonicity_witness = None;
    let check_pair = |pf: u64, ps: u64, qf: u64, qs: u64, a: &dyn Approximator| {
        let p = BilatticePair::new(
            LatticeElement::from_bits(&u, pf),
            LatticeElement::from_bits(&u, ps),
        );
        let q = BilatticePair::new(
            LatticeElement::from_bits(&u, qf),
            LatticeElement::from_bits(&u, qs),
        );
        if !a.apply(&p).leq_p(&a.apply(&q)).unwrap_or(false) {
            Some((p, q))
        } else {
            None
        }
    };

    match mode {
        CheckMode::Exhaustive => {
            if n > PAIR_EXHAUSTIVE_CAP {
                return Err(AftError::ScopeTooLarge { size: n, cap: PAIR_EXHAUSTIVE_CAP });
            }
            let tab = TabulatedOperator::tabulate(a)?;
            // All p ≤p q: qf a supermask of pf, qs a submask of ps.
            'outer: for qf in 0..=u.mask() {
                let mut pf = qf;
                loop {
                    for ps in 0..=u.mask() {
                        let mut qs = ps;
                        loop {
                            if let Some(w) = check_pair(pf, ps, qf, qs, &tab) {
                                monotone = false;
                                monotonicity_witness = Some(w);
                                break 'outer;
                            }
                            if qs == 0 {
                                break;
                            }
                            qs = (qs - 1) & ps;
                        }
                        if ps == u.mask() {
                            break;
                        }
                    }
                    if pf == 0 {
                        break;
                    }
                    pf = (pf - 1) & qf;
                }
                if qf == u.mask() {
                    break;
                }
            }
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let pf = rng.gen::<u64>() & u.mask();
                let ps = rng.gen::<u64>() & u.mask();
                let qf = pf | (rng.gen::<u64>() & u.mask());
                let qs = ps & rng.gen::<u64>();
                if let Some(w) = check_pair(pf, ps, qf, qs, a) {
                    monotone = false;
                    monotonicity_witness = Some(w);
                    break;
                }
            }
        }
    }

    let mut exact_on_consistent = true;
    let mut exactness_witness = None;
    for xb in 0..=u.mask() {
        let x = LatticeElement::from_bits(&u, xb);
        let image = a.apply(&BilatticePair::new(x.clone(), x.clone()));
        if image.is_consistent() && !image.is_exact() {
            exact_on_consistent = false;
            exactness_witness = Some(x);
            break;
        }
        if xb == u.mask() {
            break;
        }
    }

    Ok(ApproximatorDiagnostics {
        monotone,
        monotonicity_witness,
        exact_on_consistent,
        exactness_witness,
    })
}
