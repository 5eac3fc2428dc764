//! Arithmetic of monoids of zero-sum sequences over finite abelian groups:
//! atoms, Davenport constants, sets of lengths, distances, the ρ/λ/U
//! invariants, Δ* and AAMP structure, plus a registry of consistency checks.
//!
//! ```
//! use zslab::{BlockMonoid, FiniteAbelianGroup, LengthSet};
//!
//! let g: FiniteAbelianGroup = "C3".parse().unwrap();
//! let mut m = BlockMonoid::full(&g).unwrap();
//! assert_eq!(m.u_k(2).lengths, Some(LengthSet::from_iter([2, 3])));
//! ```

pub mod abelian;
pub mod cache;
pub mod error;
pub mod invariants;
pub mod lengths;
pub mod structure;
pub mod verify;
pub mod zerosum;

pub use abelian::{FiniteAbelianGroup, GroupElement};
pub use cache::Cache;
pub use error::{Error, Result};
pub use invariants::{DeltaReport, InvariantReport, LambdaCheck};
pub use lengths::{delta_of, sumset, BlockMonoid, LengthSet};
pub use structure::{AampDescriptor, C5Shape, CfExpansion, DeltaStarReport};
pub use verify::{CheckReport, Params, Status, SuiteConfig};
pub use zerosum::{AtomSet, Sequence};

/// Continued-fraction expansion over machine integers.
pub type Cf = CfExpansion<u64>;
/// Elasticities are exact rationals.
pub type Elasticity = num_rational::Ratio<u64>;
