//! Computational tools for Reeb flows on starshaped hypersurfaces of R⁴ and
//! their quotients by lens-space actions.

pub mod error;
pub mod convexity;
pub mod cz;
pub mod disk;
pub mod ellipsoid;
pub mod flow;
pub mod geometry;
pub mod hamiltonian;
pub mod interval;
pub mod linking;
pub mod ode;
pub mod poly;

pub use error::{Error, Result};
pub use geometry::{FramePair, PhasePoint, TangentVector};
pub use hamiltonian::{HamiltonianModel, ModelDefinition, PolynomialPotential};
pub use interval::Interval;
