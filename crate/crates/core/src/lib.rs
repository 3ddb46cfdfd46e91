//! Exact algebra of time-varying linear differential-algebraic systems
//! `R(d/dt) w = 0` with rational-function coefficients, together with a
//! piecewise trajectory engine for their local solutions.
//!
//! * [`field`]: rationals, polynomials, Q(t), real-root isolation.
//! * [`ore`]: the skew polynomial ring Q(t)[D] with `D*f = f*D + f'`.
//! * [`orematrix`]: matrices over Q(t)[D] and their normal form
//!   `R = U^-1 diag(I, r, 0) V^-1`.
//! * [`behaviour`]: the controllability decision and the singular set.
//! * [`trajectory`]: expressions, jets, piecewise trajectories, gluing.
//! * [`synthesis`]: cutoff functions, continuation and steering.
//! * [`syntax`]: the shared text grammar for operators, expressions and
//!   trajectory files.

pub mod behaviour;
pub mod field;
pub mod ore;
pub mod orematrix;
pub mod synthesis;
pub mod syntax;
pub mod trajectory;

mod error;
#[doc(hidden)]
pub mod testing;

pub use error::Error;
pub use field::{Rational, RatFun, UniPoly};
pub use ore::OrePoly;
pub use orematrix::{OreMatrix, TnForm};
