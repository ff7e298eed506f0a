//! Time-varying vector fields and their flows.

mod envelope;
mod field;
mod integrator;
mod lie;
mod lipschitz;
mod pushforward;

pub use envelope::{contraction_envelope_check, distance_rate, ContractionReport, EnvelopeSample};
pub use field::{EvalFn, InputEvalFn, SignalFn, TimeVaryingField};
pub use integrator::{flow, flow_at, flow_endpoint, rk4_step, semigroup_residual, Trajectory};
pub use lie::timed_lie_derivative;
pub use lipschitz::{lipschitz_estimate, LipschitzEstimate, Region};
pub use pushforward::pushforward;
