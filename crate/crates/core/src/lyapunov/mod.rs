//! Converse Lyapunov functions built from flow integrals.

mod bounds;
mod certificate;
mod delta;
mod function;
mod massera;

pub use bounds::{theoretical_bounds, TheoreticalBounds};
pub use certificate::{Certificate, CertificateConstants};
pub use delta::{check_delta, choose_delta, choose_delta_p, DeltaChoice};
pub use function::{construct_exp_v, construct_ugas_v, LyapunovFunction, Mode, Quadrature};
pub use massera::{massera_g, MasseraFunction};
