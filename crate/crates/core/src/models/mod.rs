//! Model types: product distributions, mixtures of products and Ising models.
//!
//! Mixture parameters are exact rationals. Ising parameters are `f64`.

mod ising;
pub mod json;
mod rational;

pub use ising::IsingModel;
pub use rational::{format_rational, parse_rational, ratio, Rational};

use num_traits::{One, Zero};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

use crate::limits;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("malformed rational {0:?} (expected \"p/q\" with nonzero q)")]
    BadRational(String),
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet symbol {0:?} appears more than once")]
    DuplicateSymbol(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("symbol index {index} out of range for alphabet of size {size}")]
    SymbolIndexOutOfRange { index: usize, size: usize },
    #[error("prefix length {len} outside 1..={n}")]
    PrefixLength { len: usize, n: usize },
    #[error("malformed model: {0}")]
    Shape(String),
    #[error("invalid mixture: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("table has {found} entries, expected |alphabet|^n = {expected}")]
    TableLength { expected: u64, found: usize },
    #[error("enumeration of {requested} points exceeds the limit of {limit}")]
    TooLarge { requested: String, limit: u64 },
    #[error("model needs at least one spin")]
    NoSpins,
    #[error("spin index {index} out of range for {n} spins")]
    SpinIndexOutOfRange { index: usize, n: usize },
    #[error("pair ({0}, {0}) couples a spin to itself")]
    SelfPair(usize),
    #[error("pair ({0}, {1}) given more than once")]
    DuplicatePair(usize, usize),
    #[error("parameter {0} is not finite")]
    NonFinite(String),
    #[error("invalid JSON: {0}")]
    Json(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// An invariant broken by a mixture description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WeightCount { weights: usize, components: usize },
    WeightSum(Rational),
    WeightOutOfRange { component: usize, value: Rational },
    RowCount { component: usize, found: usize, expected: usize },
    RowWidth { component: usize, row: usize, found: usize, expected: usize },
    EntryOutOfRange { component: usize, row: usize, symbol: usize, value: Rational },
    RowSum { component: usize, row: usize, sum: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            WeightCount { weights, components } => {
                write!(f, "{weights} weights for {components} components")
            }
            WeightSum(s) => write!(f, "weights sum to {}", format_rational(s)),
            WeightOutOfRange { component, value } => write!(
                f,
                "weight of component {component} is {}, outside [0, 1]",
                format_rational(value)
            ),
            RowCount { component, found, expected } => {
                write!(f, "component {component} has {found} rows, expected {expected}")
            }
            RowWidth { component, row, found, expected } => write!(
                f,
                "component {component} row {row} has {found} entries, expected {expected}"
            ),
            EntryOutOfRange { component, row, symbol, value } => write!(
                f,
                "component {component} row {row} entry {symbol} is {}, outside [0, 1]",
                format_rational(value)
            ),
            RowSum { component, row, sum } => write!(
                f,
                "component {component} row {row} sums to {}",
                format_rational(sum)
            ),
        }
    }
}

/// Ordered set of distinct symbols. The order fixes iteration and
/// serialization order everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(ModelError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet `{"0", "1"}`.
    pub fn binary() -> Self {
        Self::new(["0", "1"]).expect("distinct symbols")
    }

    /// The alphabet `{"0", …, "size-1"}`.
    pub fn numbered(size: usize) -> Result<Self, ModelError> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.symbols.get(index).map(String::as_str)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Maps symbol strings to indices.
    pub fn encode<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<usize>, ModelError> {
        word.iter()
            .map(|s| {
                self.index_of(s.as_ref())
                    .ok_or_else(|| ModelError::UnknownSymbol(s.as_ref().to_string()))
            })
            .collect()
    }

    /// Maps symbol indices back to strings. Panics on out-of-range indices.
    pub fn decode(&self, word: &[usize]) -> Vec<String> {
        word.iter().map(|&i| self.symbols[i].clone()).collect()
    }
}

/// Iterator over `Σ^len` in lexicographic order, coordinate 0 most significant.
#[derive(Debug, Clone)]
pub struct Assignments {
    size: usize,
    next: Option<Vec<usize>>,
}

impl Assignments {
    pub fn new(alphabet_size: usize, len: usize) -> Self {
        let next = (alphabet_size > 0 || len == 0).then(|| vec![0; len]);
        Self {
            size: alphabet_size,
            next,
        }
    }
}

impl Iterator for Assignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for pos in (0..succ.len()).rev() {
            succ[pos] += 1;
            if succ[pos] < self.size {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// An n-coordinate product distribution: `rows[i][y] = Pr[X_i = y]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductDistribution {
    rows: Vec<Vec<Rational>>,
}

impl ProductDistribution {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        Self { rows }
    }

    /// The deterministic distribution concentrated on `point`.
    pub fn point_mass(point: &[usize], alphabet_size: usize) -> Self {
        let rows = point
            .iter()
            .map(|&y| {
                (0..alphabet_size)
                    .map(|s| if s == y { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Vec<Rational>] {
        &mut self.rows
    }

    /// `Pr[X_coord = symbol]`, or `None` when either index is out of range.
    pub fn prob(&self, coord: usize, symbol: usize) -> Option<&Rational> {
        self.rows.get(coord).and_then(|r| r.get(symbol))
    }

    /// Probability of the prefix `x` under the marginal on the first
    /// `x.len()` coordinates.
    pub fn prefix_prob(&self, x: &[usize]) -> Result<Rational, ModelError> {
        if x.is_empty() || x.len() > self.n() {
            return Err(ModelError::PrefixLength {
                len: x.len(),
                n: self.n(),
            });
        }
        let mut acc = Rational::one();
        for (coord, &y) in x.iter().enumerate() {
            let row = &self.rows[coord];
            let p = row.get(y).ok_or(ModelError::SymbolIndexOutOfRange {
                index: y,
                size: row.len(),
            })?;
            if p.is_zero() {
                return Ok(Rational::zero());
            }
            acc *= p;
        }
        Ok(acc)
    }
}

/// A finite mixture `Σ w_i P_i` of product distributions over a shared
/// alphabet and coordinate count.
///
/// Construction through [`Mixture::from_parts`] performs no validation, so
/// malformed descriptions can be inspected with [`Mixture::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mixture {
    alphabet: Alphabet,
    n: usize,
    weights: Vec<Rational>,
    components: Vec<ProductDistribution>,
}

impl Mixture {
    /// Builds a mixture and rejects it unless every invariant holds.
    pub fn new(
        alphabet: Alphabet,
        n: usize,
        weights: Vec<Rational>,
        components: Vec<ProductDistribution>,
    ) -> Result<Self, ModelError> {
        let m = Self::from_parts(alphabet, n, weights, components);
        m.check()?;
        Ok(m)
    }

    pub fn from_parts(
        alphabet: Alphabet,
        n: usize,
        weights: Vec<Rational>,
        components: Vec<ProductDistribution>,
    ) -> Self {
        Self {
            alphabet,
            n,
            weights,
            components,
        }
    }

    /// A single product distribution with weight 1.
    pub fn singleton(alphabet: Alphabet, component: ProductDistribution) -> Result<Self, ModelError> {
        let n = component.n();
        Self::new(alphabet, n, vec![Rational::one()], vec![component])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of components.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn components(&self) -> &[ProductDistribution] {
        &self.components
    }

    pub fn into_parts(self) -> (Alphabet, usize, Vec<Rational>, Vec<ProductDistribution>) {
        (self.alphabet, self.n, self.weights, self.components)
    }

    /// Every violated invariant, in a fixed order. Empty iff the mixture is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let width = self.alphabet.len();
        if self.weights.len() != self.components.len() {
            out.push(Violation::WeightCount {
                weights: self.weights.len(),
                components: self.components.len(),
            });
        }
        let zero = Rational::zero();
        let one = Rational::one();
        for (c, w) in self.weights.iter().enumerate() {
            if *w < zero || *w > one {
                out.push(Violation::WeightOutOfRange {
                    component: c,
                    value: w.clone(),
                });
            }
        }
        let total: Rational = self.weights.iter().sum();
        if total != one {
            out.push(Violation::WeightSum(total));
        }
        for (c, comp) in self.components.iter().enumerate() {
            if comp.n() != self.n {
                out.push(Violation::RowCount {
                    component: c,
                    found: comp.n(),
                    expected: self.n,
                });
            }
            for (r, row) in comp.rows().iter().enumerate() {
                if row.len() != width {
                    out.push(Violation::RowWidth {
                        component: c,
                        row: r,
                        found: row.len(),
                        expected: width,
                    });
                }
                for (s, p) in row.iter().enumerate() {
                    if *p < zero || *p > one {
                        out.push(Violation::EntryOutOfRange {
                            component: c,
                            row: r,
                            symbol: s,
                            value: p.clone(),
                        });
                    }
                }
                let sum: Rational = row.iter().sum();
                if sum != one {
                    out.push(Violation::RowSum {
                        component: c,
                        row: r,
                        sum,
                    });
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(v))
        }
    }

    /// `P^{≤j}(x) = Σ_i w_i P_i^{≤j}(x)` with `j = x.len()`.
    pub fn prefix_prob(&self, x: &[usize]) -> Result<Rational, ModelError> {
        if x.is_empty() || x.len() > self.n {
            return Err(ModelError::PrefixLength {
                len: x.len(),
                n: self.n,
            });
        }
        if let Some(&bad) = x.iter().find(|&&y| y >= self.alphabet.len()) {
            return Err(ModelError::SymbolIndexOutOfRange {
                index: bad,
                size: self.alphabet.len(),
            });
        }
        let mut acc = Rational::zero();
        for (w, comp) in self.weights.iter().zip(&self.components) {
            if w.is_zero() {
                continue;
            }
            acc += w * comp.prefix_prob(x)?;
        }
        Ok(acc)
    }

    /// As [`Mixture::prefix_prob`], with the prefix given as symbol strings.
    pub fn prefix_prob_symbols<S: AsRef<str>>(&self, x: &[S]) -> Result<Rational, ModelError> {
        self.prefix_prob(&self.alphabet.encode(x)?)
    }

    /// Whether another mixture lives on the same sample space.
    pub fn same_space(&self, other: &Mixture) -> bool {
        self.alphabet == other.alphabet && self.n == other.n
    }
}

/// Number of points in `Σ^n`, rejected when above the mixture enumeration cap.
pub fn enumeration_size(alphabet_size: usize, n: usize) -> Result<u64, ModelError> {
    let limit = limits::max_enum(limits::DEFAULT_MIXTURE_POINTS);
    match limits::checked_pow(alphabet_size as u64, n) {
        Some(size) if size <= limit => Ok(size),
        Some(size) => Err(ModelError::TooLarge {
            requested: size.to_string(),
            limit,
        }),
        None => Err(ModelError::TooLarge {
            requested: format!("{alphabet_size}^{n}"),
            limit,
        }),
    }
}

/// Re-expresses an explicit distribution on `Σ^n` as a mixture of point
/// masses, one component per point.
///
/// `table` lists `D(x)` for every `x ∈ Σ^n` in [`Assignments`] order.
/// Component `i` is concentrated on the `i`-th point and carries weight `D(x_i)`.
pub fn point_mass_mixture(
    alphabet: Alphabet,
    n: usize,
    table: &[Rational],
) -> Result<Mixture, ModelError> {
    let size = enumeration_size(alphabet.len(), n)?;
    if table.len() as u64 != size {
        return Err(ModelError::TableLength {
            expected: size,
            found: table.len(),
        });
    }
    if let Some(neg) = table.iter().find(|p| **p < Rational::zero()) {
        return Err(ModelError::Shape(format!(
            "table entry {} is negative",
            format_rational(neg)
        )));
    }
    let total: Rational = table.iter().sum();
    if !total.is_one() {
        return Err(ModelError::Shape(format!(
            "table sums to {}, expected 1",
            format_rational(&total)
        )));
    }
    let components = Assignments::new(alphabet.len(), n)
        .map(|x| ProductDistribution::point_mass(&x, alphabet.len()))
        .collect();
    Mixture::new(alphabet, n, table.to_vec(), components)
}
