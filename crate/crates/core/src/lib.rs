//! Private semi-supervised and active PAC learning over small discrete domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`concepts`]: domains, finite concept classes, projections and VC oracles.
//! * [`mechanisms`]: the exponential mechanism and the subsampling / i.i.d.
//!   resampling privacy wrappers, plus declared-privacy bookkeeping.
//! * [`sanitizer`]: a constructive synthetic-database sanitizer for counting
//!   queries.
//! * [`learners`]: ERM, the generic exponential-mechanism learner, the
//!   sanitizer-based semi-supervised learner and the label-boosting transform.
//! * [`active`]: the index-query oracle protocol and the subsampling active
//!   wrapper.
//! * [`audit`]: black-box empirical privacy estimation on discrete outcomes.
//! * [`harness`]: seeded experiment runner and report writers used by the
//!   `pssl` binary.
//!
//! Every randomized entry point takes an explicit seed or RNG; reruns with the
//! same seed are bit-for-bit reproducible.

pub mod active;
pub mod audit;
pub mod concepts;
pub mod error;
pub mod harness;
pub mod learners;
pub mod mechanisms;
pub mod rng;
pub mod sanitizer;

pub use error::{Error, Result};
