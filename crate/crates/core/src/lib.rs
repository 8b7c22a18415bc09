//! Boundary invariants, Dirichlet-to-Neumann solves and Morse-index scans for
//! the sigma_k product geometries (sphere x hyperbolic, sphere x geodesic
//! ball, sphere x Einstein warped product).

pub mod boundary;
pub mod dtn;
pub mod error;
pub mod families;
pub mod jacobi;
pub mod ode;
pub mod report;
pub mod symalg;

pub use error::{Error, Result};
