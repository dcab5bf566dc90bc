pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod fmt;
pub mod grid;
pub mod operators;
pub mod partition;
pub mod problem;
pub mod rng;
pub mod special;
pub mod vug;

pub use error::{Result, SpmError};
