//! Truncated z-graded noncommutative polynomials over the generators of a
//! double, deformed-commutator normal ordering and series atoms.

mod engine;
mod expr;
mod poly;
mod spec;

pub use engine::{admissibility_check, Engine, EngineError};
pub use expr::{distinct_permutations, AtomKind, ExprError, ExprTree, Labeled, SeriesAtom};
pub use poly::{Monomial, NCPoly, WordTensor, MAX_GENERATORS};
pub use spec::{parse_bracket_key, DeformationSpec, SpecError};
