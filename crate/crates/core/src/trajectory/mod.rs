//! Closed-form expressions, jets and piecewise trajectories.

mod expr;
mod jet;
mod normal;
mod piece;
mod piecewise;
mod regularity;
mod series;

pub use expr::{Expr, Node};
pub(crate) use jet::{jets_upto, leading_exponent};
pub use jet::{Jet, JetValue, Side};
pub use piece::{singular_points, Piece};
pub use piecewise::{apply_operator, piece_samples, Trajectory, ZeroReport, ZeroVerdict, K_MAX, SAMPLES};
pub use regularity::{Order, RegularityReport, RegularityTriple};
