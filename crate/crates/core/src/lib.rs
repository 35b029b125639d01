//! Simulation and analysis of a heteronuclear two-spin-½ NMR system
//! (¹H–¹³C): Bell-state preparation by detuned Hartmann-Hahn transfer,
//! state tomography, ¹H spectra, and relaxation of two-spin order under
//! cross-correlated relaxation.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod par;
pub mod relax;
pub mod seq;
pub mod spectra;
pub mod states;
pub mod system;
pub mod tomo;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix4, PureState};
pub use par::Execution;
pub use states::{Axis, BellKind, DensityMatrix, Spin};
pub use system::SpinSystem;
