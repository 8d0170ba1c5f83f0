//! Rank functions for tensors and polynomial maps over prime fields, random
//! restriction experiments, and hypercube concentration checks.

pub mod concentration;
pub mod error;
pub mod experiments;
pub mod field;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod polyrank;
pub mod ranks;
pub mod subspace;
pub mod tensor;

pub use concentration::{HypercubeFunction, PointSet};
pub use error::{Error, Result};
pub use experiments::{CoreWitness, ExperimentRecord};
pub use field::{FieldElem, PrimeField, QPowerRational};
pub use linalg::{EchelonBasis, Matrix};
pub use poly::PolyMap;
pub use polyrank::{ConstantsBundle, PolyRankFn};
pub use ranks::{Budget, RankValue, TensorRankFn};
pub use tensor::{IndexSubsetFamily, Tensor};
