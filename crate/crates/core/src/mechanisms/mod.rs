//! Private building blocks: the exponential mechanism, declared-privacy
//! bookkeeping, and the subsampling and resampling wrappers.

mod exponential;
mod mechanism;
mod privacy;
mod wrappers;

pub use exponential::{
    agreement_scores, select_hypothesis, utility_bound, Exponential, GumbelArgmax, Sampler,
};
pub use mechanism::{Constant, HypothesisSelection, Mechanism, RandomizedResponse};
pub use privacy::{
    active_pool_size, compose_declared, subsample_input_size, PrivacyParams, PrivacyTransform,
};
pub(crate) use privacy::ceil_tolerant;
pub use wrappers::{resample_indices, subsample_indices, IidResample, Subsample};
