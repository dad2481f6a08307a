//! Two-qubit states, their Pauli decomposition and steering features, Alice's
//! projective measurements and the assemblages they induce on Bob, and the
//! generalized Werner family with its closed-form steerability criterion.

mod measurement;
mod state;
mod werner;

pub use measurement::{random_measurement_set, Assemblage, Measurement, MeasurementSet};
pub use state::{
    kron, random_density_matrix, FeatureVector9, Mat4, PauliDecomposition, StateFile, TwoQubitState,
};
pub use werner::{werner_state, werner_unsteerable_analytic, WernerParams};
