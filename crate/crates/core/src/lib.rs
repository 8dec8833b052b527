//! Local Mellin transforms.
//!
//! Rank-one-per-component connections on the punctured formal disc (at a
//! finite point or at infinity) are described by truncated Puiseux series
//! `f`; difference operators near infinity by series `g`. This crate computes
//! the local transforms between the two sides, their inverses, canonical
//! representatives of isomorphism classes, Sabbah orders, and a finite-window
//! operator oracle that checks the underlying operator identities directly.

pub mod cli;
pub mod error;
pub mod field;
pub mod mellin;
pub mod objects;
pub mod oracle;
pub mod puiseux;
pub mod weyl;

pub use error::{Error, Result};
pub use field::{Coefficient, FieldConfig, FieldMode};
pub use mellin::{TransformKind, TransformOptions};
pub use objects::{Component, ConnectionObject, DiffOpObject, Object, Point};
pub use puiseux::{PuiseuxSeries, Var};
