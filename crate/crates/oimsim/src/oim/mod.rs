//! The operation-input-mask tensor: concrete compressed layouts, construction
//! from a layered graph, JSON (de)serialization and structural validation.

mod build;
mod json;
mod tensor;

pub use build::build_oim;
pub use json::{load_oim, serialize_oim};
pub use tensor::{
    ConstantEntry, DecodedOp, IoMap, OimFormat, OimTensor, RankDescriptor, RegisterEntry,
    SCHEMA_VERSION,
};
pub use tensor::validate_oim;

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OimError {
    #[error("capacity exceeded: {what} count {count} does not fit in 32 bits")]
    Capacity { what: &'static str, count: u64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {msg}")]
    Json { path: PathBuf, msg: String },
    #[error("schema error in {field}: {reason}")]
    Schema { field: String, reason: String },
    #[error("unsupported schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
}
