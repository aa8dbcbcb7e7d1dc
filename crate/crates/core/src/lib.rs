//! Numerics for the octonionic Nahm equations on `[0, 1]`.
//!
//! Module map:
//! - [`octonion`]: structure constants, cross products, Λ² split, complex structures
//! - [`lie`]: `u(k)` / `gl(k, ℂ)` scaffolding and principal sl₂ triples
//! - [`nahm`]: sampled Nahm fields, RK4 integration, gauge action, the map χ
//! - [`moment`]: moment maps, the slice operators `D`, `D*`, tangent equations
//! - [`kempf_ness`]: the decoupled system, the real-equation solver and Θ
//! - [`poles`]: Nahm complexes, quadruples, κ and rational maps

pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod kempf_ness;
pub mod lie;
pub mod linalg;
pub mod moment;
pub mod nahm;
pub mod octonion;
pub mod poles;
pub mod selftest;

pub use error::{Error, Result};
pub use grid::Grid;
pub use kempf_ness::{CommutingTriplePoint, DecoupledPath, HermitianPath};
pub use lie::{Flavor, Sl2Triple};
pub use linalg::{CMat, CVec};
pub use nahm::NahmPath;
pub use octonion::{ComplexStructureIndex, CrossTable, TwoForm7, TwoForm8, Vec7, Vec8};
pub use poles::{NahmComplexData, NahmQuadruple, RationalMapRep};
