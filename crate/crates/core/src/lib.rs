//! Lowest-order discrete de Rham (DDR) complex on polyhedral meshes, its
//! Lie-algebra-valued extension, and constraint-preserving time stepping
//! for the Yang-Mills equations in temporal gauge.

pub mod ddr;
pub mod laddr;
pub mod lie;
pub mod mesh;
pub mod polyquad;
pub mod scheme;
pub mod solver;

pub use ddr::{DdrComplex, DdrError, Space, XCurlVector, XDivVector, XGradVector};
pub use laddr::{LaDofVector, LaddrComplex, LaddrError};
pub use lie::{LieAlgebra, LieError, LieVector};
pub use mesh::{EntityId, EntityKind, Mesh, MeshError, Point, Polymesh};
pub use scheme::{DiagnosticsRow, Forcing, RunOutput, Scheme, SchemeConfig, SchemeError, State, Variant};
pub use solver::{CsrMatrix, LinearSolverMode, NewtonConfig, NewtonReport, SolverError};
