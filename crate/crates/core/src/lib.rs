//! Exact equivalence checking for mixtures of product distributions, plus
//! exhaustive oracles and approximation-preserving reductions for Ising
//! models (partition function ← atomic marginals ← total variation distance).
//!
//! ```
//! use mixv::equivalence::{check_equivalence, Verdict};
//! use mixv::models::{ratio, Alphabet, Mixture, ProductDistribution};
//!
//! let bern = |p| ProductDistribution::new(vec![vec![ratio(1, 1) - ratio(p, 3), ratio(p, 3)]]);
//! // ½·Bern(1/3) + ½·Bern(2/3) is the same distribution as Bern(1/2).
//! let p = Mixture::new(Alphabet::binary(), 1, vec![ratio(1, 2), ratio(1, 2)], vec![bern(1), bern(2)]).unwrap();
//! let q = Mixture::new(
//!     Alphabet::binary(),
//!     1,
//!     vec![ratio(1, 1)],
//!     vec![ProductDistribution::new(vec![vec![ratio(1, 2), ratio(1, 2)]])],
//! )
//! .unwrap();
//! assert_eq!(check_equivalence(&p, &q).unwrap(), Verdict::Equal);
//! ```

pub mod cli;
pub mod equivalence;
pub mod generators;
pub mod ising;
pub mod limits;
pub mod linalg;
pub mod models;
