//! Instance generation: discretized densities, random pairs in convex order,
//! and grid-refinement studies of the relaxation gap and exercise purity.

mod density;
mod random;
mod study;

pub use density::{discretize_density, Density, Discretization, Method};
pub use random::{random_convex_pair, PairShape};
pub use study::{refinement_study, StudyConfig, StudyRow};
