//! Stability classification from trajectories and verification of Lyapunov certificates.

pub mod anchors;
mod class;
mod converse;
mod direct;
mod envelope;
mod iss;
mod report;
mod trajectories;

pub use class::StabilityClass;
pub use converse::{
    ugas_alpha1, verify_converse_certificate, verify_ugas_certificate, CertifyGrids, ConverseOutcome, LyapunovSample,
    UgasOutcome,
};
pub use direct::{direct_lyapunov_check, ComparisonFunction, DirectCheck};
pub use envelope::{
    classify_stability, classify_stability_global, envelope_domination, fit_exponential_envelope, KlEnvelope,
    StabilityEnvelope,
};
pub use iss::{
    input_lipschitz_estimate, iss_certify, predicted_ultimate_bound, DisturbanceSignal, IssOptions, IssOutcome,
    IssReport, IssSample, SignalShape,
};
pub use report::{CertificationReport, CheckRow, Comparison};
pub use trajectories::{sample_trajectories, TrajectoryGrid};
