//! Exact linear algebra over the rationals.
//!
//! The only primitive the equivalence checker needs is extraction of a maximal
//! linearly independent subset from an ordered list of vectors. Two exact
//! routes are provided: [`independent_subset`] over `BigRational` entries kept
//! in lowest terms, and [`independent_subset_integer`] over integer vectors
//! with fraction-free elimination. A rational list that shares one denominator
//! has the same independent subsets as its list of numerators.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::Index;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("vectors must have dimension at least 1")]
    ZeroDimension,
}

/// A vector of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalVector(Vec<BigRational>);

impl RationalVector {
    pub fn new(entries: Vec<BigRational>) -> Self {
        Self(entries)
    }

    pub fn from_integers(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![BigRational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigRational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, v| acc + v)
    }

    /// Coordinate-wise product with `factors`.
    pub fn hadamard(&self, factors: &[BigRational]) -> Self {
        debug_assert_eq!(self.dim(), factors.len());
        Self(self.0.iter().zip(factors).map(|(a, b)| a * b).collect())
    }

    fn leading_index(&self) -> Option<usize> {
        self.0.iter().position(|v| !v.is_zero())
    }
}

impl Index<usize> for RationalVector {
    type Output = BigRational;
    fn index(&self, i: usize) -> &BigRational {
        &self.0[i]
    }
}

impl From<Vec<BigRational>> for RationalVector {
    fn from(v: Vec<BigRational>) -> Self {
        Self(v)
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// True iff the entries of `v` sum to exactly zero.
///
/// An equation whose coefficient vector is `v` holds at the all-ones point
/// exactly when this returns true.
pub fn holds_at_ones(v: &RationalVector) -> bool {
    v.sum().is_zero()
}

/// Incremental row-echelon accumulator.
///
/// Each accepted row is stored reduced against the earlier ones and scaled so
/// its pivot entry is 1. Pivots are the first nonzero column of the residual.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    dim: usize,
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows and keeps it if the residual is
    /// nonzero. Returns whether `v` was independent of the stored rows.
    pub fn insert(&mut self, v: &RationalVector) -> bool {
        debug_assert_eq!(v.dim(), self.dim);
        if self.rows.len() == self.dim {
            return false;
        }
        let mut residual = v.entries().to_vec();
        for (pivot, row) in &self.rows {
            if residual[*pivot].is_zero() {
                continue;
            }
            let factor = residual[*pivot].clone();
            for (r, x) in residual.iter_mut().zip(row).skip(*pivot) {
                if !x.is_zero() {
                    *r -= &factor * x;
                }
            }
        }
        let residual = RationalVector(residual);
        match residual.leading_index() {
            None => false,
            Some(pivot) => {
                let inv = BigRational::one() / &residual[pivot];
                let row = residual.into_entries().into_iter().map(|x| x * &inv).collect();
                self.rows.push((pivot, row));
                true
            }
        }
    }
}

/// Indices of a maximal linearly independent subset of `vectors`.
///
/// Vectors are scanned in order and each one is kept iff it is independent of
/// those already kept, so the earliest representatives always win. Every
/// rejected vector lies in the span of the selected ones.
pub fn independent_subset(vectors: &[RationalVector]) -> Result<Vec<usize>, LinalgError> {
    let Some(dim) = common_dim(vectors.iter().map(RationalVector::dim))? else {
        return Ok(Vec::new());
    };
    let mut basis = EchelonBasis::new(dim);
    Ok(greedy(vectors, |v| basis.insert(v)))
}

fn common_dim(mut dims: impl Iterator<Item = usize>) -> Result<Option<usize>, LinalgError> {
    let Some(dim) = dims.next() else {
        return Ok(None);
    };
    if dim == 0 {
        return Err(LinalgError::ZeroDimension);
    }
    if let Some((i, found)) = dims.enumerate().find(|&(_, d)| d != dim) {
        return Err(LinalgError::DimensionMismatch {
            index: i + 1,
            expected: dim,
            found,
        });
    }
    Ok(Some(dim))
}

fn greedy<T>(vectors: &[T], mut insert: impl FnMut(&T) -> bool) -> Vec<usize> {
    vectors
        .iter()
        .enumerate()
        .filter_map(|(i, v)| insert(v).then_some(i))
        .collect()
}

/// Fraction-free row-echelon accumulator over the integers.
///
/// Rows are stored primitive (content 1) with a positive pivot entry. Pivots
/// are the first nonzero column of the residual.
#[derive(Debug, Clone)]
pub struct IntegerEchelon {
    dim: usize,
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl IntegerEchelon {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Same contract as [`EchelonBasis::insert`].
    pub fn insert(&mut self, v: &[BigInt]) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        if self.rows.len() == self.dim {
            return false;
        }
        let mut residual = v.to_vec();
        for (pivot, row) in &self.rows {
            if residual[*pivot].is_zero() {
                continue;
            }
            // a * residual[pivot] == b * row[pivot]
            let g = residual[*pivot].gcd(&row[*pivot]);
            let a = &row[*pivot] / &g;
            let b = &residual[*pivot] / &g;
            for (r, x) in residual.iter_mut().zip(row) {
                if !a.is_one() {
                    *r *= &a;
                }
                if !x.is_zero() {
                    *r -= &b * x;
                }
            }
        }
        let Some(pivot) = residual.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let mut content = BigInt::zero();
        for x in &residual {
            content = content.gcd(x);
            if content.is_one() {
                break;
            }
        }
        if residual[pivot].is_negative() {
            content = -content;
        }
        if !content.is_one() {
            for x in residual.iter_mut() {
                *x /= &content;
            }
        }
        self.rows.push((pivot, residual));
        true
    }
}

/// As [`independent_subset`], for integer vectors.
pub fn independent_subset_integer(vectors: &[Vec<BigInt>]) -> Result<Vec<usize>, LinalgError> {
    let Some(dim) = common_dim(vectors.iter().map(Vec::len))? else {
        return Ok(Vec::new());
    };
    let mut basis = IntegerEchelon::new(dim);
    Ok(greedy(vectors, |v| basis.insert(v)))
}
