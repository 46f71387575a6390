//! Piecewise-linear functions of a single real variable.

mod ext_real;
mod function;
mod info;
mod interval;
mod linear;

pub use ext_real::ExtReal;
pub use function::{CombineOp, Origin, Piece, PwlFunction, MERGE_TOL, PARALLEL_TOL};
pub use info::PiecewiseInfo;
pub use interval::Interval;
pub use linear::LinearFn;
