//! Numerical Galois/monodromy groups of branched covers.
//!
//! A cover is given as a polynomial system `F(x; u) = 0` whose solutions `x` over a
//! parameter point `u` form the fiber. The crate restricts the cover to a line in parameter
//! space, locates the branch points on that line, lifts loops around them to monodromy
//! permutations, and analyzes the generated permutation group. Orbits on tuples can also be
//! obtained from fiber powers certified by the trace test.

pub mod branch;
pub mod error;
pub mod fiber;
pub mod group;
pub mod monodromy;
pub mod pipeline;
pub mod poly;
pub mod random;
pub mod solver;
pub mod tracker;

pub use error::{Error, ErrorKind, Result};

pub type Complex = num_complex::Complex64;
