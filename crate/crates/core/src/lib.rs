pub mod characterize;
pub mod cli;
pub mod config;
pub mod curvature;
pub mod dsl;
pub mod error;
pub mod jets;
pub mod metric;
pub mod psi;
pub mod report;
pub mod spray;
pub mod suite;
pub mod tensor;
pub mod unicorn;

pub use error::{FinslerError, Result};
