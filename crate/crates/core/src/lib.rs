//! Symbolic-numeric differential geometry for spacetime and observer-space
//! symmetry verification.
//!
//! Geometries (connections, metrics with torsion, tetrads, Finsler geometry
//! functions) are declared as expression components over coordinate charts.
//! Every derived object — curvature, torsion, frame-bundle Cartan
//! connections, Finsler connections, observer-space projectors — is
//! evaluated pointwise through a truncated-Taylor jet kernel, and symmetry
//! criteria are verified as normalized residuals over seeded sample sets.

pub mod cartan;
pub mod chart;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod geomfile;
pub mod jet;
pub mod liealg;
pub mod obspace;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod runner;
pub mod tensor;

pub use error::{GeomError, Result};
