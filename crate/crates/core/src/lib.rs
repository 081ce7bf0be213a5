pub mod almost_rigidity;
pub mod analysis;
pub mod conic;
pub mod corpus;
pub mod edge_solver;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod spectral;

pub use analysis::{analyze, Analysis, AnalysisSettings, RigidityReport};
pub use error::{Error, Result};
pub use geometry::Framework;
