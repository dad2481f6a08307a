//! Steering detection for two-qubit states.
//!
//! States are labeled steerable (`-1`) or unsteerable (`+1`) by a dual
//! witness SDP over random measurement sets ([`steering`]). Labeled and
//! unlabeled feature vectors then feed an RBF-kernel SVM trained by SMO
//! ([`svm`]) and a safe semi-supervised SVM that never does worse than the
//! inductive SVM on its own worst-case criterion ([`s4vm`]). [`pipeline`]
//! wires these into reproducible experiments.

pub mod error;
pub mod herm;
pub mod labels;
pub mod pipeline;
pub mod qstate;
pub mod rng;
pub mod s4vm;
pub mod sdp;
pub mod steering;
pub mod svm;

pub use error::{Error, Result};
pub use herm::Herm2;
pub use qstate::{
    Assemblage, FeatureVector9, Measurement, MeasurementSet, TwoQubitState, WernerParams,
};
pub use s4vm::{LabelVector, S4vmParams};
pub use steering::{SdpSettings, SteeringWitness};
pub use svm::{Dataset, GridSpec, SvmModel, SvmParams};
