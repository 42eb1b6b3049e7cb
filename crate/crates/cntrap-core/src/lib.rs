//! Numerical core for trapping feasibility of an ultracold atom near a
//! current-carrying metallic single-wall carbon nanotube.
//!
//! Modules:
//! - [`constants`]: frozen CODATA table, SI units throughout.
//! - [`tensor`]: 3×3 complex tensors with a coordinate-basis tag.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature.
//! - [`specfun`]: cylinder functions J, H⁽¹⁾, I, K with derivatives.
//! - [`material`]: nanotube band structure and axial conductivity.
//! - [`green`]: dyadic Green tensor of the conducting cylindrical shell.
//! - [`trap`]: side-guide magnetic trap model.
//! - [`spinflip`]: thermally-assisted spin-flip lifetimes.
//! - [`casimir`]: ground-state Casimir–Polder potential.
//! - [`tunneling`]: total-potential barriers and WKB lifetimes.

// quadrature nodes and special-function reference values keep their full
// published digits even where f64 rounds them
#![allow(clippy::excessive_precision)]

pub mod constants;
pub mod quad;
pub mod specfun;
pub mod tensor;

pub mod material;
pub mod green;
pub mod trap;
pub mod spinflip;
pub mod casimir;
pub mod tunneling;

pub use constants::PhysicalConstants;
pub use tensor::{Basis, Complex3x3};
