//! Thermodynamic formalism for finite-area Fuchsian representations of
//! punctured surfaces: symbolic codings of the geodesic flow, Gurevich
//! pressure and Bowen roots, Manhattan curves and rigidity functionals, and
//! the pressure metric on Teichmüller space, with an independent group-level
//! orbit-counting oracle.

pub mod error;
pub mod hyp;
pub mod coding;
pub mod rep;
pub mod num;
pub mod potential;
pub mod pressure;

pub use error::{Error, Result};
