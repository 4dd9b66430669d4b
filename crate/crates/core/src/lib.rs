//! Measurement-dependent steering: the two-setting inequality, its local
//! bound, quantum and no-signalling values, and the hidden-variable models
//! that saturate it.

#![allow(clippy::needless_range_loop)]

pub mod adversary;
pub mod behavior;
pub mod error;
pub mod inequality;
pub mod io;
pub mod kernel;
pub mod optimizer;
pub mod oracle;
pub mod steering;
pub mod tolerance;

pub use behavior::{Behavior, CorrelatorVector};
pub use error::{Error, Result};
pub use inequality::{local_bound, md_operator, MdParams};
pub use kernel::{ComplexMatrix, Direction, TwoQubitState};
pub use tolerance::Tolerances;
