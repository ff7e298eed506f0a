//! Anchor strings attached to report rows, one per verified inequality.

/// Least-squares exponential fit of the trajectory data.
pub const EXPONENTIAL_ENVELOPE: &str = "exponential-envelope";
/// Two-sided growth bound `d e^{-Ls} <= d(phi, phi) <= d e^{Ls}` for pairs of trajectories.
pub const CONTRACTION_ENVELOPE: &str = "contraction-envelope";
/// `c1 d^p <= V <= c2 d^p`.
pub const SANDWICH_BOUND: &str = "sandwich-bound";
/// `L_f V <= -c3 V`.
pub const LIE_DERIVATIVE_DECAY: &str = "lie-derivative-decay";
/// `|dV| <= c4 d^{p-1}` and the pushforward growth bound behind it.
pub const DIFFERENTIAL_BOUND: &str = "differential-bound";
/// `L_f V = d(phi(t + delta))^p - d(x)^p`.
pub const TELESCOPING_IDENTITY: &str = "telescoping-identity";
/// `L_f V <= -c3 V + c4 L_u |u|` under bounded input.
pub const ISS_POINTWISE_DECAY: &str = "iss-pointwise-decay";
/// `limsup V <= c4 L_u |u| / c3` along forced trajectories.
pub const ISS_ULTIMATE_BOUND: &str = "iss-ultimate-bound";
/// Class-K reshaping function with finite comparison integrals.
pub const MASSERA_COMPARISON: &str = "massera-comparison";
/// `alpha1(d) <= V <= alpha2(d)` for the infinite-horizon construction.
pub const UGAS_SANDWICH: &str = "ugas-sandwich";
/// `L_f V < 0` for the infinite-horizon construction.
pub const UGAS_DECAY: &str = "ugas-decay";
/// `|dV| <= int G'(beta(d, s)) e^{Ls} ds`.
pub const UGAS_DIFFERENTIAL_BOUND: &str = "ugas-differential-bound";
/// Direct Lyapunov conditions `W1 <= V <= W2`, `L_f V <= -W3`.
pub const DIRECT_LYAPUNOV: &str = "direct-lyapunov";

/// Anchors of a complete exponential-mode certification report.
pub const CONVERSE_CHECKLIST: [&str; 5] = [
    CONTRACTION_ENVELOPE,
    SANDWICH_BOUND,
    LIE_DERIVATIVE_DECAY,
    DIFFERENTIAL_BOUND,
    TELESCOPING_IDENTITY,
];

/// Anchors of an input-to-state stability report.
pub const ISS_CHECKLIST: [&str; 2] = [ISS_POINTWISE_DECAY, ISS_ULTIMATE_BOUND];

/// Anchors of a Massera-mode certification report.
pub const UGAS_CHECKLIST: [&str; 4] = [MASSERA_COMPARISON, UGAS_SANDWICH, UGAS_DECAY, UGAS_DIFFERENTIAL_BOUND];
