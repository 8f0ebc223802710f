//! Numerical engine for conformal Cartan geometry with dressing fields.
//!
//! The crate builds the matrix groups and graded Lie algebras of conformal
//! gauge theory, matrix-valued differential forms with exact jet
//! derivatives, Cartan connections and their curvature, the conformal-boost
//! and dilaton dressing operations with their tractor/twistor composites,
//! the Weyl-basis gamma algebra, and a toy-model Lagrangian with a
//! symmetry-breaking potential. Every transformation law is designed to be
//! machine-checked at randomized chart points by the companion CLI crate.

pub mod algebra;
pub mod cartan;
pub mod dressing;
pub mod error;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod lagrangian;
pub mod matrix;
pub mod sample;
pub mod spinor;

pub use error::{Error, Result};
pub use expr::Expr;
pub use forms::{ChartPoint, MatrixForm, Metric, SmoothMap, Tetrad};
pub use jet::{Jet, JetC, JetF};
pub use matrix::{JMatC, JMatF, Mat, MatC, MatF};
