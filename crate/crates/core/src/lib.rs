//! Free noncommutative polynomials in symmetric matrix variables: exact
//! arithmetic, evaluation, derivatives, chip sets, middle matrices,
//! congruences and numeric convexity probes.

pub mod border;
pub mod calculus;
pub mod chips;
pub mod error;
pub mod eval;
pub mod kly;
pub mod linalg;
pub mod matrix;
pub mod middle;
pub mod parse;
pub mod poly;
pub mod probe;
pub mod random;
pub mod structure;
pub mod word;

pub use error::{Error, Result};
pub use matrix::{Mat, QMat, Q};
pub use poly::FreePoly;
pub use word::{Generator, Kind, Word};
