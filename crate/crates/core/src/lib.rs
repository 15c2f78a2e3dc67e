//! Classification of research-article texts into high- vs. moderate-impact
//! classes from micro-level linguistic features.
//!
//! The pipeline runs in stages: load and clean a labeled corpus
//! ([`corpus`]), look up word categories and norms ([`lexicons`]), extract a
//! per-document feature matrix ([`features`]), rank features with four
//! statistical filters ([`selection`]), train four classifiers
//! ([`learners`]), evaluate them under a stratified holdout + k-fold
//! protocol ([`evaluation`]), and render reports and Pythagorean-forest
//! drawings ([`reporting`]). [`pipeline`] orchestrates all stages from a
//! single config; [`synth`] generates the labeled demo corpus.
//!
//! With the default `parallel` feature the per-document and per-tree inner
//! loops run on rayon; disabling it yields a sequential build with
//! bit-identical outputs.

pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod learners;
pub mod lexicons;
pub mod pipeline;
pub mod reporting;
pub mod selection;
pub mod synth;

pub(crate) mod par;
pub mod rng;
pub mod stats;

pub use corpus::Label;
pub use features::{FeatureId, FeatureMatrix};
