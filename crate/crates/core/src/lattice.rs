//! Finite powerset lattices, the product bilattice, and least fixpoints.
//!
//! Every lattice in this crate is the powerset of a finite [`AtomUniverse`],
//! ordered by inclusion and encoded as a fixed-width bit vector. The product
//! bilattice consists of pairs of elements under the precision order: a pair
//! grows in precision when its first component widens and its second narrows.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Maximum number of atoms per universe (elements are stored in a `u64`).
pub const MAX_ATOMS: usize = 64;

/// Cap for exhaustive subset-pair enumeration in [`check_monotone`].
pub const EXHAUSTIVE_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("duplicate atom `{0}` in universe")]
    DuplicateAtom(String),
    #[error("universe holds {0} atoms, the limit is {MAX_ATOMS}")]
    UniverseTooLarge(usize),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("elements belong to different universes")]
    UniverseMismatch,
    #[error("fixpoint iteration did not converge within {steps} steps (operator not monotone?)")]
    Divergence { steps: usize },
    #[error("universe of size {size} exceeds the exhaustive-check cap {cap}")]
    ScopeTooLarge { size: usize, cap: usize },
}

/// An ordered set of distinct ground atom names with index lookup.
///
/// The position of a name doubles as its bit index in [`LatticeElement`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomUniverse {
    atoms: Vec<String>,
    index: HashMap<String, usize>,
}

impl AtomUniverse {
    pub fn new<I, S>(atoms: I) -> Result<Arc<Self>, LatticeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.len() > MAX_ATOMS {
            return Err(LatticeError::UniverseTooLarge(atoms.len()));
        }
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            if index.insert(a.clone(), i).is_some() {
                return Err(LatticeError::DuplicateAtom(a.clone()));
            }
        }
        Ok(Arc::new(AtomUniverse { atoms, index }))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, i: usize) -> &str {
        &self.atoms[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(String::as_str)
    }

    /// Bit mask covering every atom of the universe.
    pub fn mask(&self) -> u64 {
        if self.atoms.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.atoms.len())
        }
    }
}

fn same_universe(a: &Arc<AtomUniverse>, b: &Arc<AtomUniverse>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A subset of an [`AtomUniverse`], i.e. one element of the powerset lattice.
#[derive(Clone)]
pub struct LatticeElement {
    universe: Arc<AtomUniverse>,
    bits: u64,
}

impl LatticeElement {
    pub fn bottom(universe: &Arc<AtomUniverse>) -> Self {
        LatticeElement { universe: universe.clone(), bits: 0 }
    }

    pub fn top(universe: &Arc<AtomUniverse>) -> Self {
        LatticeElement { universe: universe.clone(), bits: universe.mask() }
    }

    pub fn from_bits(universe: &Arc<AtomUniverse>, bits: u64) -> Self {
        LatticeElement { universe: universe.clone(), bits: bits & universe.mask() }
    }

    pub fn from_names<'a, I>(universe: &Arc<AtomUniverse>, names: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut bits = 0u64;
        for n in names {
            let i = universe
                .index_of(n)
                .ok_or_else(|| LatticeError::UnknownAtom(n.to_string()))?;
            bits |= 1 << i;
        }
        Ok(LatticeElement { universe: universe.clone(), bits })
    }

    pub fn universe(&self) -> &Arc<AtomUniverse> {
        &self.universe
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits & (1 << i) != 0
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.universe.index_of(name).is_some_and(|i| self.contains(i))
    }

    pub fn with(&self, i: usize) -> Self {
        LatticeElement { universe: self.universe.clone(), bits: self.bits | (1 << i) }
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert!(same_universe(&self.universe, &other.universe));
        LatticeElement { universe: self.universe.clone(), bits: self.bits | other.bits }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert!(same_universe(&self.universe, &other.universe));
        LatticeElement { universe: self.universe.clone(), bits: self.bits & other.bits }
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert!(same_universe(&self.universe, &other.universe));
        LatticeElement { universe: self.universe.clone(), bits: self.bits & !other.bits }
    }

    pub fn complement(&self) -> Self {
        LatticeElement {
            universe: self.universe.clone(),
            bits: !self.bits & self.universe.mask(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert!(same_universe(&self.universe, &other.universe));
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits & other.bits == 0
    }

    /// Member indices in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe.len()).filter(|&i| self.contains(i))
    }

    /// Member names sorted lexicographically.
    pub fn sorted_names(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.indices().map(|i| self.universe.atom(i)).collect();
        v.sort_unstable();
        v
    }
}

impl PartialEq for LatticeElement {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.bits == other.bits
    }
}

impl Eq for LatticeElement {}

impl fmt::Debug for LatticeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.sorted_names().join(","))
    }
}

/// A pair over the powerset lattice, ordered by precision.
#[derive(Clone, PartialEq, Eq)]
pub struct BilatticePair {
    pub first: LatticeElement,
    pub second: LatticeElement,
}

impl BilatticePair {
    pub fn new(first: LatticeElement, second: LatticeElement) -> Self {
        debug_assert!(same_universe(first.universe(), second.universe()));
        BilatticePair { first, second }
    }

    /// The least-precise pair `(⊥, ⊤)`.
    pub fn least(universe: &Arc<AtomUniverse>) -> Self {
        BilatticePair {
            first: LatticeElement::bottom(universe),
            second: LatticeElement::top(universe),
        }
    }

    pub fn universe(&self) -> &Arc<AtomUniverse> {
        self.first.universe()
    }

    /// `first ⊆ second`.
    pub fn is_consistent(&self) -> bool {
        self.first.is_subset(&self.second)
    }

    /// `first = second`.
    pub fn is_exact(&self) -> bool {
        self.first.bits() == self.second.bits()
    }

    /// Precision order: `self ≤p other` iff the first component widens and the
    /// second narrows.
    pub fn leq_p(&self, other: &Self) -> Result<bool, LatticeError> {
        leq_p(self, other)
    }
}

impl fmt::Debug for BilatticePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?})", self.first, self.second)
    }
}

/// Precision comparison with a universe-mismatch check.
pub fn leq_p(p: &BilatticePair, q: &BilatticePair) -> Result<bool, LatticeError> {
    if !same_universe(p.universe(), q.universe()) {
        return Err(LatticeError::UniverseMismatch);
    }
    Ok(p.first.is_subset(&q.first) && q.second.is_subset(&p.second))
}

/// A single-argument lattice operator, usually a closure over fixed context.
pub trait LatticeOp {
    fn apply_to(&self, x: &LatticeElement) -> LatticeElement;
}

impl<F> LatticeOp for F
where
    F: Fn(&LatticeElement) -> LatticeElement,
{
    fn apply_to(&self, x: &LatticeElement) -> LatticeElement {
        self(x)
    }
}

/// Limit of the Kleene chain `start, op(start), op²(start), …`.
///
/// With a monotone operator and `start = ⊥` this is the least fixpoint and the
/// chain stabilises after at most `|universe| + 1` applications. Failure to
/// converge within that bound signals a non-monotone operator.
pub fn lfp<O: LatticeOp + ?Sized>(
    op: &O,
    start: &LatticeElement,
) -> Result<LatticeElement, LatticeError> {
    let max_steps = start.universe().len() + 2;
    let mut x = start.clone();
    for _ in 0..max_steps {
        let y = op.apply_to(&x);
        if y == x {
            return Ok(x);
        }
        x = y;
    }
    Err(LatticeError::Divergence { steps: max_steps })
}

/// Verification mode for the structural checks in this crate.
#[derive(Debug, Clone, Copy)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// Outcome of [`check_monotone`]: a verdict plus a witness on failure.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub holds: bool,
    pub witness: Option<(LatticeElement, LatticeElement)>,
}

/// Checks `x ⊆ y ⇒ op(x) ⊆ op(y)`, exhaustively (all `3^n` subset pairs) or
/// on sampled pairs.
pub fn check_monotone<O: LatticeOp + ?Sized>(
    op: &O,
    universe: &Arc<AtomUniverse>,
    mode: CheckMode,
) -> Result<MonotonicityReport, LatticeError> {
    let n = universe.len();
    let check = |xb: u64, yb: u64| -> Option<(LatticeElement, LatticeElement)> {
        let x = LatticeElement::from_bits(universe, xb);
        let y = LatticeElement::from_bits(universe, yb);
        if !op.apply_to(&x).is_subset(&op.apply_to(&y)) {
            Some((x, y))
        } else {
            None
        }
    };
    match mode {
        CheckMode::Exhaustive => {
            if n > EXHAUSTIVE_CAP {
                return Err(LatticeError::ScopeTooLarge { size: n, cap: EXHAUSTIVE_CAP });
            }
            for yb in 0..=universe.mask() {
                // Enumerate all submasks of yb, including 0.
                let mut xb = yb;
                loop {
                    if let Some(w) = check(xb, yb) {
                        return Ok(MonotonicityReport { holds: false, witness: Some(w) });
                    }
                    if xb == 0 {
                        break;
                    }
                    xb = (xb - 1) & yb;
                }
                if yb == universe.mask() {
                    break;
                }
            }
            Ok(MonotonicityReport { holds: true, witness: None })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let xb = rng.gen::<u64>() & universe.mask();
                let yb = xb | (rng.gen::<u64>() & universe.mask());
                if let Some(w) = check(xb, yb) {
                    return Ok(MonotonicityReport { holds: false, witness: Some(w) });
                }
            }
            Ok(MonotonicityReport { holds: true, witness: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn universe(names: &[&str]) -> Arc<AtomUniverse> {
        AtomUniverse::new(names.iter().copied()).unwrap()
    }

    fn elem(u: &Arc<AtomUniverse>, names: &[&str]) -> LatticeElement {
        LatticeElement::from_names(u, names.iter().copied()).unwrap()
    }

    #[test]
    fn duplicate_atom_is_rejected() {
        assert!(matches!(
            AtomUniverse::new(["a", "b", "a"]),
            Err(LatticeError::DuplicateAtom(_))
        ));
    }

    #[test]
    fn unknown_atom_is_rejected() {
        let u = universe(&["a"]);
        assert!(matches!(
            LatticeElement::from_names(&u, ["b"]),
            Err(LatticeError::UnknownAtom(_))
        ));
    }

    #[test]
    fn lfp_of_identity_is_start() {
        let u = universe(&["a", "b", "c"]);
        let id = |x: &LatticeElement| x.clone();
        assert_eq!(lfp(&id, &LatticeElement::bottom(&u)).unwrap(), LatticeElement::bottom(&u));
    }

    #[test]
    fn lfp_of_constant_top_reaches_top_in_one_step() {
        let u = universe(&["a", "b", "c"]);
        let top = LatticeElement::top(&u);
        let c = |_: &LatticeElement| top.clone();
        assert_eq!(lfp(&c, &LatticeElement::bottom(&u)).unwrap(), top);
    }

    #[test]
    fn lfp_diverges_on_oscillating_operator() {
        let u = universe(&["a"]);
        let flip = |x: &LatticeElement| x.complement();
        assert!(matches!(
            lfp(&flip, &LatticeElement::bottom(&u)),
            Err(LatticeError::Divergence { .. })
        ));
    }

    #[test]
    fn leq_p_least_element_below_everything() {
        let u = universe(&["a", "b"]);
        let least = BilatticePair::least(&u);
        for fb in 0..=u.mask() {
            for sb in 0..=u.mask() {
                let q = BilatticePair::new(
                    LatticeElement::from_bits(&u, fb),
                    LatticeElement::from_bits(&u, sb),
                );
                assert!(least.leq_p(&q).unwrap());
            }
        }
    }

    #[test]
    fn leq_p_widening_first_component() {
        let u = universe(&["a", "b"]);
        let p = BilatticePair::new(elem(&u, &["a"]), elem(&u, &["a", "b"]));
        let q = BilatticePair::new(elem(&u, &["a", "b"]), elem(&u, &["a", "b"]));
        assert!(p.leq_p(&q).unwrap());
        assert!(!q.leq_p(&p).unwrap());
    }

    #[test]
    fn leq_p_incomparable_swap() {
        let u = universe(&["a", "b"]);
        let p = BilatticePair::new(elem(&u, &["a", "b"]), elem(&u, &["a"]));
        let q = BilatticePair::new(elem(&u, &["a"]), elem(&u, &["a", "b"]));
        assert!(!p.leq_p(&q).unwrap());
        // In fact q ≤p p: q is the consistent interval, p the inconsistent one.
        assert!(q.leq_p(&p).unwrap());
    }

    #[test]
    fn leq_p_universe_mismatch() {
        let u1 = universe(&["a"]);
        let u2 = universe(&["b"]);
        let p = BilatticePair::least(&u1);
        let q = BilatticePair::least(&u2);
        assert!(matches!(p.leq_p(&q), Err(LatticeError::UniverseMismatch)));
    }

    #[test]
    fn check_monotone_identity_exhaustive() {
        let u = universe(&["a", "b", "c"]);
        let id = |x: &LatticeElement| x.clone();
        assert!(check_monotone(&id, &u, CheckMode::Exhaustive).unwrap().holds);
    }

    #[test]
    fn check_monotone_complement_yields_witness() {
        let u = universe(&["a"]);
        let comp = |x: &LatticeElement| x.complement();
        let report = check_monotone(&comp, &u, CheckMode::Exhaustive).unwrap();
        assert!(!report.holds);
        let (x, y) = report.witness.unwrap();
        assert!(x.is_subset(&y));
    }

    #[test]
    fn check_monotone_cap() {
        let names: Vec<String> = (0..13).map(|i| format!("a{i}")).collect();
        let u = AtomUniverse::new(names).unwrap();
        let id = |x: &LatticeElement| x.clone();
        assert!(matches!(
            check_monotone(&id, &u, CheckMode::Exhaustive),
            Err(LatticeError::ScopeTooLarge { .. })
        ));
    }

    /// lfp(op, ⊥) is below every pre-fixpoint, checked by exhaustive scan.
    #[test]
    fn lfp_below_every_prefixpoint() {
        let u = universe(&["a", "b", "c", "d"]);
        // A closure operator: always add `a`; if `a` and `b` present, add `c`.
        let op = |x: &LatticeElement| {
            let mut y = x.with(0);
            if y.contains(0) && y.contains(1) {
                y = y.with(2);
            }
            y
        };
        let least = lfp(&op, &LatticeElement::bottom(&u)).unwrap();
        for bits in 0..=u.mask() {
            let x = LatticeElement::from_bits(&u, bits);
            if op.apply_to(&x).is_subset(&x) {
                assert!(least.is_subset(&x), "lfp above pre-fixpoint {x:?}");
            }
        }
    }

    #[test]
    fn kleene_chain_is_increasing_and_short() {
        let u = universe(&["a", "b", "c"]);
        let op = |x: &LatticeElement| {
            // Add atoms one index at a time: the longest possible chain.
            match (0..3).find(|&i| !x.contains(i)) {
                Some(i) => x.with(i),
                None => x.clone(),
            }
        };
        let mut x = LatticeElement::bottom(&u);
        let mut steps = 0;
        loop {
            let y = op.apply_to(&x);
            if y == x {
                break;
            }
            assert!(x.is_subset(&y));
            x = y;
            steps += 1;
        }
        assert!(steps <= u.len() + 1);
        assert_eq!(x, lfp(&op, &LatticeElement::bottom(&u)).unwrap());
    }

    proptest! {
        #[test]
        fn leq_p_is_a_partial_order(f1 in 0u64..16, s1 in 0u64..16,
                                    f2 in 0u64..16, s2 in 0u64..16,
                                    f3 in 0u64..16, s3 in 0u64..16) {
            let u = universe(&["a", "b", "c", "d"]);
            let p = BilatticePair::new(
                LatticeElement::from_bits(&u, f1), LatticeElement::from_bits(&u, s1));
            let q = BilatticePair::new(
                LatticeElement::from_bits(&u, f2), LatticeElement::from_bits(&u, s2));
            let r = BilatticePair::new(
                LatticeElement::from_bits(&u, f3), LatticeElement::from_bits(&u, s3));
            // Reflexive.
            prop_assert!(p.leq_p(&p).unwrap());
            // Antisymmetric.
            if p.leq_p(&q).unwrap() && q.leq_p(&p).unwrap() {
                prop_assert_eq!(&p, &q);
            }
            // Transitive.
            if p.leq_p(&q).unwrap() && q.leq_p(&r).unwrap() {
                prop_assert!(p.leq_p(&r).unwrap());
            }
            // (⊥,⊤) least, (⊤,⊥) greatest.
            prop_assert!(BilatticePair::least(&u).leq_p(&p).unwrap());
            let greatest = BilatticePair::new(
                LatticeElement::top(&u), LatticeElement::bottom(&u));
            prop_assert!(p.leq_p(&greatest).unwrap());
        }
    }
}
