pub mod economics;
pub mod error;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod kansei;
pub mod linalg;
pub mod linmodel;
pub mod nudge;
mod serde_ext;
pub mod stats;
pub mod synth;
pub mod textnorm;

pub use error::{Error, Result};
