//! Exponential tail bounds for triangular arrays whose rows are END
//! (extended negatively dependent), brute-force dependence certification,
//! numeric checks of norming conditions and reproducible Monte Carlo
//! diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod dependence;
pub mod error;
pub mod norming;
pub mod numeric;
pub mod quadrature;
pub mod rng;
pub mod simulate;

pub use bounds::{BoundInputs, FukNagaevInputs, TailBoundResult};
pub use dependence::{EndCertificate, MarginalSpec, TriangularArrayModel};
pub use error::{Error, Result};
pub use norming::{ConditionReport, NormingScheme};
pub use rng::RandomSeed;
pub use simulate::{ExperimentPlan, MonteCarloEstimate, TruncationSplit};
