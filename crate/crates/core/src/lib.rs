//! Geometry of the symmetric space of `SL(n,R)` and its flag manifolds, with
//! finite-data checkers for Anosov-type properties of free subgroups given by
//! matrix generators.
//!
//! The layers build on each other:
//!
//! * [`weyl`]: the model flat, the chamber, face types and gap cones.
//! * [`linalg`]: dense helpers (SPD functions, exterior powers, subspaces).
//! * [`symmspace`]: points, group elements, vector-valued distance, Weyl cones,
//!   diamonds, parallel sets and Finsler paths.
//! * [`flags`]: partial flags, their metric, the group action, transversality
//!   and expansion factors.
//! * [`dynamics`]: verdicts for finite sequences (regularity, contraction,
//!   flag convergence, conicality).
//! * [`subgroup`]: word enumeration and subgroup-level checkers.
//!
//! Group elements carry their exterior powers, so singular values and
//! attracting flags of long words stay accurate far beyond the range where the
//! explicit product matrix is usable.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod flags;
pub mod linalg;
pub mod report;
pub mod subgroup;
pub mod symmspace;
pub mod weyl;

pub use error::{Error, Result};
pub use flags::Flag;
pub use report::{PropertyReport, Verdict};
pub use symmspace::{GroupElement, Point};
pub use weyl::{CartanVector, FaceType, ModelVector, ThetaSpec};
