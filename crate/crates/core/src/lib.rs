//! Generalized and restricted quantum branching programs.
//!
//! The crate simulates branching programs exactly on state vectors, compiles
//! between restricted programs and quantum query circuits, and measures the
//! hybrid-argument quantities that bound how distinguishable two inputs can
//! be for a program of a given width and length.

pub mod circuit;
pub mod convert;
pub mod error;
pub mod experiments;
pub mod format;
pub mod linalg;
pub mod model;
pub mod programs;
pub mod simulate;
pub mod transform;

pub use error::{Error, Result};
pub use model::{InputString, Program};
