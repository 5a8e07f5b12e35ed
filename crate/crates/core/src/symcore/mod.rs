//! Exact symbolic algebra: a commutative indexed-tensor algebra and a graded
//! noncommutative algebra, kept as distinct types.

pub mod coeff;
pub mod graded;
pub mod index;
pub mod latex;
pub mod scalar;
pub mod tensor;

pub use coeff::{q, qi, Coeff, Poly, Rational};
pub use index::{IndexLabel, Space, Variance};
pub use scalar::{Exp, Monomial, Symbol};
pub use tensor::{NumericEnv, TensorAtom, TensorExpr, Term};
pub use graded::{GTerm, GradedAtom, GradedExpr, NormalizeOptions, Species};
