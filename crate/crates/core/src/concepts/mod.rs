//! Discrete domains, finite concept classes and the combinatorial queries the
//! learners are built on: projections, canonical consistent concepts, VC
//! dimension by brute force, and exact error measures.

mod bits;
mod class;
mod data;
mod distribution;
mod domain;
mod measure;

pub use bits::BitRow;
pub use class::{
    dedup_points, load_explicit, sauer_bound, Budget, ClassSpec, Concept, ConceptClass, Member,
    Projection,
};
pub use data::{label_with, require_labeled, LabeledExample, PartiallyLabeledDatabase, Segments};
pub use distribution::{
    exact_error, generalization_error, Distribution, ErrorEstimate, PointSampler,
};
pub use domain::{Domain, DomainPoint, Point, MAX_DOMAIN_POINTS};
pub use measure::{agreements, disagreement, empirical_error, mistakes, Predicate};

#[cfg(test)]
mod tests;
