//! Green functions, λ-Martin kernels, boundary-distribution Poisson
//! transforms and λ-polyharmonic boundary representations for
//! nearest-neighbour transition operators on rooted trees described by
//! finite cone-type automata, with an independent truncated-series oracle
//! validating every solver.

pub mod boundary;
pub mod error;
pub mod forward;
pub mod green;
pub mod isotropic;
pub mod jet;
pub mod oracle;
pub mod poly;
pub mod samples;
pub mod tree;
pub mod verify;

pub use boundary::{BoundaryDistribution, HarmonicEvaluator, LocallyConstantFn};
pub use error::{Error, Result};
pub use green::JetTable;
pub use jet::Jet;
pub use oracle::TruncatedBall;
pub use poly::PolyRepresentation;
pub use tree::{EdgeTypeModel, TreeSpec, VertexPath};
