//! Numerical tolerances and defaults, collected in one place.

/// Accepted constraint violation when a point or tangent is constructed from user data.
pub const INPUT_CONSTRAINT_TOL: f64 = 1e-8;

/// Maximum constraint residual after projection.
pub const PROJECTED_CONSTRAINT_TOL: f64 = 1e-12;

/// Pairs whose geodesic distance exceeds `pi - CUT_LOCUS_MARGIN` on the sphere or
/// SO(3) are rejected as (numerically) lying in the cut locus.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

/// Two base points are considered equal when their coordinates agree to this tolerance.
pub const BASE_MATCH_TOL: f64 = 1e-12;

/// Field magnitude at a declared equilibrium must stay below this.
pub const EQUILIBRIUM_TOL: f64 = 1e-10;

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Default number of Simpson nodes per horizon (odd).
pub const DEFAULT_SIMPSON_NODES: usize = 65;

/// Norm of the perturbation used by the pushforward difference stencil.
pub const PUSHFORWARD_EPS: f64 = 1e-5;

/// Step of the covariant-derivative difference in the Lipschitz estimator.
pub const COVARIANT_EPS: f64 = 1e-5;

/// Inflation applied to a sampled Lipschitz constant before it is used in envelope checks.
pub const LIPSCHITZ_SAFETY: f64 = 1.05;

/// Pairs closer than this are skipped by the Lipschitz estimator.
pub const DEGENERATE_PAIR_DIST: f64 = 1e-10;

/// Multiplicative slack of the two-sided contraction envelope.
pub const ENVELOPE_SLACK: f64 = 1e-6;

/// Relative slack of the sandwich, decay and differential checks.
pub const CERT_REL_TOL: f64 = 0.02;

/// Absolute slack of the decay check.
pub const CERT_ABS_TOL: f64 = 1e-6;

/// Tolerance of the telescoping identity for the Lie derivative.
pub const TELESCOPING_TOL: f64 = 1e-5;

/// Relative slack of the pushforward growth bound.
pub const PUSHFORWARD_REL_TOL: f64 = 1e-3;

/// Relative slack of the ISS ultimate-bound check.
pub const ISS_REL_TOL: f64 = 0.05;

/// Default step of the timed Lie derivative difference.
pub const LIE_STEP: f64 = 5e-4;

/// Step of the directional-derivative difference for dV.
pub const DIFFERENTIAL_EPS: f64 = 1e-4;

/// Upper limit on the normalized residual of the log-linear envelope fit.
pub const LES_RESIDUAL_MAX: f64 = 0.1;

/// Smallest decay rate accepted by the exponential envelope fit.
pub const LES_LAMBDA_MIN: f64 = 1e-6;

/// A trajectory counts as decaying when it ends below this fraction of its start.
pub const DECAY_FRACTION: f64 = 0.5;

/// Smallest admissible K' before a horizon is rejected.
pub const K_PRIME_MIN: f64 = 1e-12;

/// Truncation tail allowed by the infinite-horizon construction.
pub const MASSERA_TAIL_MAX: f64 = 1e-8;
