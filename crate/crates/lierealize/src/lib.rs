//! Exact symbolic toolkit for realizations of the unsolvable real Lie
//! algebras of dimension at most four by vector fields: canonical
//! trigonometric-polynomial arithmetic, Lie brackets and pushforwards, a
//! verified realization catalog, algebra identification through the Killing
//! form, and mechanical checks of the classification arguments.

pub mod algebra;
pub mod catalog;
pub mod liefield;
pub mod linalg;
pub mod numexpr;
pub mod par;
pub mod parser;
pub mod proofcheck;
pub mod symexpr;

pub use algebra::{AlgebraTag, StructureConstants};
pub use liefield::{lie_bracket, pushforward, VectorField};
pub use symexpr::{Expr, Rat, Ratio};
