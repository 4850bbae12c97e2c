//! Universal lifts of operators to tensor and free products of pointed
//! inner-product spaces, and the multi-faced products of representations and
//! states they induce.
//!
//! The crate is organized bottom-up:
//!
//! * [`hilbert`] — pointed spaces, operators, block forms, γ-deformation;
//! * [`tensor`] — the lifts `λ^γ`, `ρ^δ` to `H₁ ⊗ H₂`;
//! * [`free`] — the truncated free product and the lifts `ℓ^γ`, `r^δ`, `ℓ̄^γ`, `r̄^δ`;
//! * [`products`] — multi-faced products of states, closed forms, canonical forms;
//! * [`pathweight`] — the weighted-digraph moment oracle;
//! * [`axioms`] — numerical checks of every lift and product axiom.

pub mod axioms;
pub mod error;
pub mod free;
pub mod hilbert;
pub mod pathweight;
pub mod products;
pub mod tensor;

pub use error::{Error, Result};
pub use hilbert::{CircleParam, Isometry, Op, PointedSpace, Vector, C64};
