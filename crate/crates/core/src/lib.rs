//! Congruence distance for multivariate time series and its polynomial-time
//! lower bounds.
//!
//! * [`series`]: time series, state distances and rigid transforms.
//! * [`structure`]: self-similarity matrices and the (reduced) delta distance.
//! * [`congruence`]: exact searches over finite matrix classes and upper-bound
//!   solvers for the full orthogonal group.
//! * [`reduction`]: the 1-in-3-SAT gadget construction and its verifier.
//! * [`gen`]: the barycentric perturbation generator and ratio experiment.
//! * [`io`]: CSV series files and JSON distance reports.

pub mod congruence;
pub mod error;
pub mod exec;
pub mod gen;
pub mod io;
pub mod reduction;
pub mod series;
pub mod structure;
pub mod timing;

pub use error::{Error, Result};
pub use exec::Execution;
pub use series::{RigidTransform, TimeSeries, WindowMatch};
pub use structure::{LagSet, MatrixNormOverLags, StructureMatrix};
