//! Online multistream classification: labeled drifting source streams
//! transfer knowledge to one unlabeled target stream through covariance
//! alignment, adaptive re-weighting and a weighted classifier ensemble.

pub mod adacosa;
pub mod drift;
pub mod engine;
pub mod error;
pub mod eval;
pub mod gmm;
pub mod learners;
pub mod linalg;
pub mod streams;

pub use error::{ObalError, Result};
