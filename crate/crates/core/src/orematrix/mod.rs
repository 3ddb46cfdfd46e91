//! Matrices over Q(t)[D] and the normal form `R = U^-1 diag(I, r, 0) V^-1`.

mod inverse;
mod matrix;
mod tn;

pub use inverse::{left_inverse, left_inverse_from, right_inverse, right_inverse_by_triangularization, right_inverse_from};
pub use matrix::OreMatrix;
pub use tn::{rank_ore, tn_form, tn_form_with, MergeStep, TnForm, TnOptions};
