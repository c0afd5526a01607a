//! Yamabe-type constants of hyperbolic-times-sphere products by radial
//! ODE shooting.
//!
//! The crate computes the constant Q(r) of H^n x S^m(sqrt r) by reducing
//! it to the radial ground state of
//!
//! ```text
//! phi'' + (n-1) coth(t) phi' = lambda phi - phi^(p-1)
//! ```
//!
//! on hyperbolic space, locating that ground state by bisection on the
//! initial value ([`shooting`]), integrating weighted norms of the
//! profile with certified truncation ([`norms`]), assembling Q
//! ([`yamabe`]), and closing lower-bound certifications of the form
//! Q(r) >= mu Q(0) on (0, 1] by a descending scale recursion
//! ([`certify`]).
//!
//! Everything is deterministic: repeated runs produce bitwise identical
//! results.

mod numeric;

pub mod certify;
pub mod dimension;
pub mod error;
pub mod norms;
pub mod ode;
pub mod shooting;
pub mod yamabe;

pub use certify::{certify, check_trace, CertificationTrace, CertifyControls, Verdict};
pub use dimension::{Dimensions, Regime};
pub use error::{Error, Result};
pub use norms::NormBundle;
pub use ode::{integrate, IntegrationControls, OdeParams, Outcome, Trajectory};
pub use shooting::{find_ground_state, Classification, GroundState, ShootingControls};
pub use yamabe::{
    boundary_constants, compute_q, scaling_upper_transfer, small_r_lower_bound, sweep_q,
    BoundaryConstants, QControls, QResult,
};
