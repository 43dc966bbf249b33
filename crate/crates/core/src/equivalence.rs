//! Exact equivalence checking for mixtures of product distributions.
//!
//! For mixtures `P = Σ w_i P_i` and `Q = Σ v_i Q_i` with `k_P + k_Q`
//! components in total, every prefix `x ∈ Σ^j` defines a coefficient vector
//!
//! ```text
//! c(x) = (w_1 P_1^{≤j}(x), …, w_kP P_kP^{≤j}(x), −v_1 Q_1^{≤j}(x), …, −v_kQ Q_kQ^{≤j}(x))
//! ```
//!
//! and `P^{≤j}(x) = Q^{≤j}(x)` exactly when the entries of `c(x)` sum to zero.
//! The checker walks `j = 1..n`, keeping a basis `B_j` of the span of all
//! `c(x)` together with the prefix that produced each basis vector. The
//! candidates for depth `j + 1` are the vectors of `B_j` multiplied
//! coordinate-wise by the parameters of coordinate `j + 1`, one per symbol.
//! Since every `c(x, y)` is a linear combination of those candidates, testing
//! the candidates tests every prefix of length `j + 1`, and a basis of the
//! candidates is a basis for depth `j + 1`. The basis never holds more than
//! `k_P + k_Q` vectors, so each step costs a bounded elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::limits;
use crate::linalg::{independent_subset_integer, LinalgError, RationalVector};
use crate::models::{enumeration_size, Assignments, Mixture, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivalenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("mixtures use different alphabets")]
    AlphabetMismatch,
    #[error("mixtures have different coordinate counts ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("basis at depth {depth} has {size} vectors, bound is {bound}")]
    BasisBound { depth: usize, size: usize, bound: usize },
    #[error("basis is at depth {depth}, mixtures have {n} coordinates")]
    DepthExhausted { depth: usize, n: usize },
}

/// A prefix `x ∈ Σ^i` (symbol indices) on which the two mixtures' marginals differ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Witness {
    pub prefix: Vec<usize>,
}

impl Witness {
    /// Prefix length `i`.
    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verdict {
    Equal,
    NotEqual(Witness),
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Equal => None,
            Verdict::NotEqual(w) => Some(w),
        }
    }
}

/// A basis vector together with the prefix whose coefficient vector it is.
///
/// The entries are stored as integer numerators over a positive denominator
/// shared by every vector of the same depth, so `coeffs()` is exactly `c(tag)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedBasisVector {
    numerators: Vec<BigInt>,
    denominator: BigInt,
    tag: Vec<usize>,
}

impl TaggedBasisVector {
    pub fn tag(&self) -> &[usize] {
        &self.tag
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn coeffs(&self) -> RationalVector {
        RationalVector::new(
            self.numerators
                .iter()
                .map(|n| BigRational::new(n.clone(), self.denominator.clone()))
                .collect(),
        )
    }

    /// Sum of the entries is zero.
    pub fn holds(&self) -> bool {
        self.numerators.iter().sum::<BigInt>().is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedBasis {
    depth: usize,
    vectors: Vec<TaggedBasisVector>,
}

impl TaggedBasis {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vectors(&self) -> &[TaggedBasisVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Recomputes every coefficient vector from its tag and compares exactly.
    pub fn tags_consistent(&self, p: &Mixture, q: &Mixture) -> Result<bool, EquivalenceError> {
        for v in &self.vectors {
            if v.tag.len() != self.depth || coefficient_vector(p, q, &v.tag)? != v.coeffs() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Outcome of one induction step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Continue(TaggedBasis),
    Halt(Witness),
}

/// Verdict plus the basis size observed at every depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceRun {
    pub verdict: Verdict,
    pub basis_sizes: Vec<usize>,
}

/// `c(x)` computed directly from the model parameters.
pub fn coefficient_vector(
    p: &Mixture,
    q: &Mixture,
    prefix: &[usize],
) -> Result<RationalVector, EquivalenceError> {
    let mut entries = Vec::with_capacity(p.k() + q.k());
    for (w, c) in p.weights().iter().zip(p.components()) {
        entries.push(w * c.prefix_prob(prefix)?);
    }
    for (v, c) in q.weights().iter().zip(q.components()) {
        entries.push(-(v * c.prefix_prob(prefix)?));
    }
    Ok(RationalVector::new(entries))
}

fn check_pair(p: &Mixture, q: &Mixture) -> Result<(), EquivalenceError> {
    p.check()?;
    q.check()?;
    if p.alphabet() != q.alphabet() {
        return Err(EquivalenceError::AlphabetMismatch);
    }
    if p.n() != q.n() {
        return Err(EquivalenceError::LengthMismatch(p.n(), q.n()));
    }
    Ok(())
}

/// Lowest common multiple of the denominators, and each value times it.
fn clear_denominators<'a>(values: impl Iterator<Item = &'a BigRational> + Clone) -> (BigInt, Vec<BigInt>) {
    let lcm = values.clone().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let scaled = values.map(|r| r.numer() * (&lcm / r.denom())).collect();
    (lcm, scaled)
}

/// Parameters of coordinate `coord`, one integer vector per symbol laid out
/// like `c(x)`, all over the returned common denominator.
fn coordinate_factors(p: &Mixture, q: &Mixture, coord: usize) -> (BigInt, Vec<Vec<BigInt>>) {
    let sigma = p.alphabet().len();
    let dim = p.k() + q.k();
    let rows = || p.components().iter().chain(q.components()).map(|c| &c.rows()[coord]);
    let (lcm, flat) = clear_denominators(rows().flat_map(|r| r.iter()));
    let mut factors = vec![Vec::with_capacity(dim); sigma];
    for (i, x) in flat.into_iter().enumerate() {
        factors[i % sigma].push(x);
    }
    (lcm, factors)
}

/// Builds the candidates for the next depth from `parents`, screening each
/// one. Candidates are produced parent-major, symbol-minor; the first one
/// whose equation fails is the witness.
fn advance(
    p: &Mixture,
    q: &Mixture,
    parents: &[TaggedBasisVector],
    depth: usize,
) -> Result<Step, EquivalenceError> {
    let sigma = p.alphabet().len();
    let (scale, factors) = coordinate_factors(p, q, depth - 1);
    let denominator = match parents.first() {
        Some(parent) => &parent.denominator * &scale,
        None => scale,
    };

    let mut candidates = Vec::with_capacity(parents.len() * sigma);
    for parent in parents {
        for (y, f) in factors.iter().enumerate() {
            let numerators = parent.numerators.iter().zip(f).map(|(a, b)| a * b).collect();
            let mut tag = Vec::with_capacity(depth);
            tag.extend_from_slice(&parent.tag);
            tag.push(y);
            let candidate = TaggedBasisVector {
                numerators,
                denominator: denominator.clone(),
                tag,
            };
            if !candidate.holds() {
                return Ok(Step::Halt(Witness { prefix: candidate.tag }));
            }
            candidates.push(candidate);
        }
    }

    let rows: Vec<Vec<BigInt>> = candidates.iter().map(|c| c.numerators.clone()).collect();
    let keep = independent_subset_integer(&rows)?;
    let mut vectors = Vec::with_capacity(keep.len());
    let mut taken = candidates.into_iter().map(Some).collect::<Vec<_>>();
    for i in keep {
        vectors.push(taken[i].take().expect("indices are distinct"));
    }

    let bound = basis_bound(p.k() + q.k(), sigma, depth);
    if vectors.len() > bound {
        return Err(EquivalenceError::BasisBound {
            depth,
            size: vectors.len(),
            bound,
        });
    }
    Ok(Step::Continue(TaggedBasis { depth, vectors }))
}

/// `min(dim, |Σ|^depth)`.
pub fn basis_bound(dim: usize, alphabet_size: usize, depth: usize) -> usize {
    let reach = limits::checked_pow(alphabet_size as u64, depth).unwrap_or(u64::MAX);
    (dim as u64).min(reach) as usize
}

/// The depth-0 vector `(w, −v)`.
fn root(p: &Mixture, q: &Mixture) -> TaggedBasisVector {
    let negated: Vec<BigRational> = q.weights().iter().map(|v| -v).collect();
    let (denominator, numerators) = clear_denominators(p.weights().iter().chain(&negated));
    TaggedBasisVector {
        numerators,
        denominator,
        tag: Vec::new(),
    }
}

/// Depth-1 step: screens `c(y)` for every `y ∈ Σ` and returns a basis of them.
pub fn initial_basis(p: &Mixture, q: &Mixture) -> Result<Step, EquivalenceError> {
    check_pair(p, q)?;
    if p.n() == 0 {
        return Err(EquivalenceError::DepthExhausted { depth: 0, n: 0 });
    }
    advance(p, q, &[root(p, q)], 1)
}

/// Extends a depth-`j` basis to depth `j + 1`.
pub fn extend_basis(
    basis: &TaggedBasis,
    p: &Mixture,
    q: &Mixture,
) -> Result<Step, EquivalenceError> {
    check_pair(p, q)?;
    extend_unchecked(basis, p, q)
}

fn extend_unchecked(
    basis: &TaggedBasis,
    p: &Mixture,
    q: &Mixture,
) -> Result<Step, EquivalenceError> {
    if basis.depth == 0 || basis.depth >= p.n() {
        return Err(EquivalenceError::DepthExhausted {
            depth: basis.depth,
            n: p.n(),
        });
    }
    advance(p, q, &basis.vectors, basis.depth + 1)
}

/// Decides whether `P = Q` as distributions on `Σ^n`.
///
/// On inequality the witness is the first failing candidate at the shallowest
/// failing depth.
pub fn check_equivalence(p: &Mixture, q: &Mixture) -> Result<Verdict, EquivalenceError> {
    check_equivalence_traced(p, q).map(|run| run.verdict)
}

/// As [`check_equivalence`], also recording `|B_j|` for each completed depth.
pub fn check_equivalence_traced(
    p: &Mixture,
    q: &Mixture,
) -> Result<EquivalenceRun, EquivalenceError> {
    check_pair(p, q)?;
    let mut basis_sizes = Vec::new();
    if p.n() == 0 || p.alphabet().len() == 1 {
        return Ok(EquivalenceRun {
            verdict: Verdict::Equal,
            basis_sizes,
        });
    }
    let mut basis = match advance(p, q, &[root(p, q)], 1)? {
        Step::Continue(b) => b,
        Step::Halt(w) => {
            return Ok(EquivalenceRun {
                verdict: Verdict::NotEqual(w),
                basis_sizes,
            })
        }
    };
    basis_sizes.push(basis.len());
    while basis.depth < p.n() {
        match extend_unchecked(&basis, p, q)? {
            Step::Continue(next) => {
                basis_sizes.push(next.len());
                basis = next;
            }
            Step::Halt(w) => {
                return Ok(EquivalenceRun {
                    verdict: Verdict::NotEqual(w),
                    basis_sizes,
                })
            }
        }
    }
    Ok(EquivalenceRun {
        verdict: Verdict::Equal,
        basis_sizes,
    })
}

/// True iff `P^{≤i}(x) ≠ Q^{≤i}(x)` exactly, with `i = x.len()`.
pub fn verify_witness(p: &Mixture, q: &Mixture, prefix: &[usize]) -> Result<bool, EquivalenceError> {
    if p.alphabet() != q.alphabet() {
        return Err(EquivalenceError::AlphabetMismatch);
    }
    Ok(p.prefix_prob(prefix)? != q.prefix_prob(prefix)?)
}

/// Enumerates `Σ^n` and compares full-length probabilities. The witness is the
/// lexicographically first point where they differ.
pub fn brute_force_equivalence(p: &Mixture, q: &Mixture) -> Result<Verdict, EquivalenceError> {
    check_pair(p, q)?;
    if p.n() == 0 {
        return Ok(Verdict::Equal);
    }
    enumeration_size(p.alphabet().len(), p.n())?;
    for x in Assignments::new(p.alphabet().len(), p.n()) {
        let diff = p.prefix_prob(&x)? - q.prefix_prob(&x)?;
        if !diff.is_zero() {
            return Ok(Verdict::NotEqual(Witness { prefix: x }));
        }
    }
    Ok(Verdict::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ratio, Alphabet, ProductDistribution, Rational};
    use num_traits::One;

    fn bern(p: Rational) -> ProductDistribution {
        ProductDistribution::new(vec![vec![Rational::one() - &p, p]])
    }

    fn one_bit(weights: &[Rational], ps: &[Rational]) -> Mixture {
        Mixture::new(
            Alphabet::binary(),
            1,
            weights.to_vec(),
            ps.iter().cloned().map(bern).collect(),
        )
        .unwrap()
    }

    fn motivating_pair() -> (Mixture, Mixture) {
        let p = one_bit(&[ratio(1, 1), ratio(0, 1)], &[ratio(1, 2), ratio(1, 2)]);
        let q = one_bit(&[ratio(1, 2), ratio(1, 2)], &[ratio(1, 3), ratio(2, 3)]);
        (p, q)
    }

    #[test]
    fn identical_singletons_continue() {
        let p = one_bit(&[ratio(1, 1)], &[ratio(2, 5)]);
        match initial_basis(&p, &p).unwrap() {
            Step::Continue(b) => {
                assert!(!b.is_empty());
                assert_eq!(b.depth(), 1);
                assert!(b.tags_consistent(&p, &p).unwrap());
            }
            Step::Halt(w) => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn different_bernoullis_halt_at_symbol_one() {
        let p = one_bit(&[ratio(1, 1)], &[ratio(1, 2)]);
        let q = one_bit(&[ratio(1, 1)], &[ratio(1, 3)]);
        // symbol 0 has 1/2 vs 2/3 and comes first in alphabet order
        assert_eq!(
            initial_basis(&p, &q).unwrap(),
            Step::Halt(Witness { prefix: vec![0] })
        );
        let v = check_equivalence(&p, &q).unwrap();
        assert!(verify_witness(&p, &q, &v.witness().unwrap().prefix).unwrap());
        assert!(verify_witness(&p, &q, &[1]).unwrap());
    }

    #[test]
    fn motivating_pair_is_equal() {
        let (p, q) = motivating_pair();
        assert!(matches!(initial_basis(&p, &q).unwrap(), Step::Continue(_)));
        assert_eq!(check_equivalence(&p, &q).unwrap(), Verdict::Equal);
        assert_eq!(check_equivalence(&q, &p).unwrap(), Verdict::Equal);
        assert_eq!(brute_force_equivalence(&p, &q).unwrap(), Verdict::Equal);
    }

    #[test]
    fn candidate_count_and_bound() {
        let a = Alphabet::numbered(3).unwrap();
        let row = || vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)];
        let row2 = || vec![ratio(1, 5), ratio(1, 5), ratio(3, 5)];
        let c1 = ProductDistribution::new(vec![row(), row2(), row()]);
        let c2 = ProductDistribution::new(vec![row2(), row(), row2()]);
        let m = Mixture::new(a, 3, vec![ratio(1, 4), ratio(3, 4)], vec![c1, c2]).unwrap();
        let Step::Continue(b1) = initial_basis(&m, &m).unwrap() else { panic!() };
        assert!(b1.len() <= basis_bound(4, 3, 1));
        let Step::Continue(b2) = extend_basis(&b1, &m, &m).unwrap() else { panic!() };
        assert!(b2.len() <= 4);
        assert!(b2.tags_consistent(&m, &m).unwrap());
        for v in b2.vectors() {
            assert!(b1.vectors().iter().any(|u| u.tag[..] == v.tag[..1]));
        }
        let Step::Continue(b3) = extend_basis(&b2, &m, &m).unwrap() else { panic!() };
        assert_eq!(
            extend_basis(&b3, &m, &m),
            Err(EquivalenceError::DepthExhausted { depth: 3, n: 3 })
        );
    }

    #[test]
    fn degenerate_inputs_are_equal() {
        let a = Alphabet::new(["only"]).unwrap();
        let c = ProductDistribution::new(vec![vec![ratio(1, 1)]; 4]);
        let m = Mixture::new(a, 4, vec![ratio(1, 1)], vec![c]).unwrap();
        assert_eq!(check_equivalence(&m, &m).unwrap(), Verdict::Equal);

        let empty = Mixture::new(Alphabet::binary(), 0, vec![ratio(1, 1)], vec![ProductDistribution::new(vec![])]).unwrap();
        assert_eq!(check_equivalence(&empty, &empty).unwrap(), Verdict::Equal);
        assert_eq!(brute_force_equivalence(&empty, &empty).unwrap(), Verdict::Equal);
    }

    #[test]
    fn structural_errors() {
        let p = one_bit(&[ratio(1, 1)], &[ratio(1, 2)]);
        let other = Mixture::new(
            Alphabet::new(["a", "b"]).unwrap(),
            1,
            vec![ratio(1, 1)],
            vec![bern(ratio(1, 2))],
        )
        .unwrap();
        assert_eq!(check_equivalence(&p, &other), Err(EquivalenceError::AlphabetMismatch));
        let two = Mixture::new(
            Alphabet::binary(),
            2,
            vec![ratio(1, 1)],
            vec![ProductDistribution::new(vec![vec![ratio(1, 2); 2]; 2])],
        )
        .unwrap();
        assert_eq!(check_equivalence(&p, &two), Err(EquivalenceError::LengthMismatch(1, 2)));
        let bad = Mixture::from_parts(Alphabet::binary(), 1, vec![ratio(1, 2)], vec![bern(ratio(1, 2))]);
        assert!(matches!(
            check_equivalence(&p, &bad),
            Err(EquivalenceError::Model(ModelError::Invalid(_)))
        ));
    }

    #[test]
    fn differing_component_counts() {
        // 1/2·δ0 + 1/2·δ1 on one bit equals Bern(1/2)
        let p = one_bit(&[ratio(1, 2), ratio(1, 2)], &[ratio(0, 1), ratio(1, 1)]);
        let q = one_bit(&[ratio(1, 1)], &[ratio(1, 2)]);
        assert_eq!(check_equivalence(&p, &q).unwrap(), Verdict::Equal);
    }

    #[test]
    fn correlated_mixture_is_not_a_product() {
        // 1/2·(0,0) + 1/2·(1,1) has uniform first marginal but is correlated
        let a = Alphabet::binary();
        let p = Mixture::new(
            a.clone(),
            2,
            vec![ratio(1, 2), ratio(1, 2)],
            vec![
                ProductDistribution::point_mass(&[0, 0], 2),
                ProductDistribution::point_mass(&[1, 1], 2),
            ],
        )
        .unwrap();
        let q = Mixture::new(
            a,
            2,
            vec![ratio(1, 1)],
            vec![ProductDistribution::new(vec![vec![ratio(1, 2); 2]; 2])],
        )
        .unwrap();
        let run = check_equivalence_traced(&p, &q).unwrap();
        let w = run.verdict.witness().expect("not equal").clone();
        assert_eq!(w.len(), 2);
        assert_eq!(run.basis_sizes.len(), 1);
        assert!(verify_witness(&p, &q, &w.prefix).unwrap());
        assert!(!verify_witness(&p, &q, &w.prefix[..1]).unwrap());
    }
}
