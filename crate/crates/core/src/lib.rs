//! Fixed-design kernel regression on the lattice `{1..n}^d` with dependent
//! errors, the Orlicz and mixing calculus behind its sup-norm rates, and a
//! Monte Carlo harness that measures those rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dependence;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod field_gen;
pub mod kernel;
pub mod lattice;
pub(crate) mod numeric;
pub mod orlicz;
pub mod rng;

pub use error::{Error, Result};
pub use estimator::{BandwidthSchedule, EstimationProblem, EvalGrid, RegressionFn};
pub use field_gen::{generate, FieldSample, GeneratorSpec, InnovationLaw, LinkFunction};
pub use kernel::{KernelSpec, KernelVariant};
pub use lattice::LatticeShape;
pub use orlicz::{MarginalSpec, YoungFunctionBeta};
