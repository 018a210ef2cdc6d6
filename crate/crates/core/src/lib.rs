pub mod cocycles;
pub mod error;
pub mod groups;
pub mod growth;
pub mod linalg;
pub mod measures;
pub mod repr;
pub mod spec;
pub mod suites;
pub mod tol;

pub use error::{Error, Result};
pub use groups::{Ball, GroupElement, GroupModel, Word, DEFAULT_BUDGET};
pub use measures::{Measure, MeasureJson};
