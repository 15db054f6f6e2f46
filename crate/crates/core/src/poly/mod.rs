//! Sparse multivariate polynomial systems with complex coefficients.

mod geometry;
mod parse;
mod polynomial;
mod system;

pub use geometry::{apply_chart, restrict_to_line, AffineChart, ChartGroup, LineEmbedding};
pub use parse::{parse_complex, parse_polynomial};
pub use polynomial::{Polynomial, Term};
pub use system::PolySystem;


