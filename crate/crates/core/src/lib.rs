//! Jordan-algebraic information geometry on finite-dimensional W*-algebras.
//!
//! The crate models a finite-dimensional W*-algebra as a direct sum of full matrix
//! blocks and builds on it:
//!
//! - [`functional`]: normal functionals via the trace pairing, support projections,
//!   Gel'fand ideals and absolute continuity;
//! - [`metric`]: the Jordan lift and the inner product `G_ω(η_a, η_b) = ω({a, b})`,
//!   the Jordan tensor, the canonical distribution and the triple tensor `T_ω`;
//! - [`channel`]: completely positive unital maps in Kraus form and the monotonicity
//!   of `G` under their duals;
//! - [`model`]: parametric models and their pullback metric, which reduces to the
//!   Fisher-Rao metric on commutative algebras, to the Bures-Helstrom metric on faithful
//!   quantum states, and to a multiple of the Fubini-Study metric on pure states;
//! - [`oracle`]: independent brute-force checks.

pub mod algebra;
pub mod channel;
pub mod error;
pub mod functional;
pub mod metric;
pub mod model;
pub mod oracle;
pub mod random;

pub use algebra::{AlgebraElement, AlgebraShape, CMatrix, C64, DEFAULT_TOL};
pub use channel::{KrausMap, MonotonicityCheck};
pub use error::{Error, Result};
pub use functional::{Functional, SupportDecomposition};
pub use metric::{LiftedElement, TangentFunctional};
pub use model::{MetricMatrix, ParametricModel};
pub use oracle::OracleReport;
