//! Minimal reverse-mode differentiation, Adam, and a finite-difference
//! gradient checker. Everything the training objective needs and nothing
//! more; the op set is closed over the graphs built in `objective`.

mod adam;
mod gradcheck;
mod tape;

pub use adam::AdamState;
pub use gradcheck::grad_check;
pub use tape::{tri_index, tri_len, Tape, VarId, CHOL_DIAG_FLOOR, PROB_CLAMP};
