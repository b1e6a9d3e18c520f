//! Pair correlation of `({a_n α})`, additive energy, GCD sums, a random
//! Euler product model, and grid checks of the explicit constants and
//! inequalities that tie them together.
//!
//! Every module is re-exported at the crate root.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod energy;
pub mod error;
pub mod gcd_sums;
pub mod numeric;
pub mod paircorr;
pub mod pointset;
pub mod random_zeta;
pub mod sequences;
pub mod stream;

pub use bounds::*;
pub use energy::*;
pub use error::{Error, Result};
pub use gcd_sums::*;
pub use numeric::*;
pub use paircorr::*;
pub use pointset::*;
pub use random_zeta::*;
pub use sequences::*;
pub use stream::*;
