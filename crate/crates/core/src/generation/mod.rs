//! Commentary generators.
//!
//! Two generators share one role: given a context sentence, produce the
//! follow-up commentary. [`RetrievalIndex`] is a native tf-idf nearest
//! neighbour baseline. External models are reached through the adapter
//! protocol in [`protocol`], over a child process or HTTP (`io` feature).

pub mod protocol;
mod retrieval;

#[cfg(feature = "io")]
mod external;

use thiserror::Error;

pub use protocol::{AdapterLine, GeneratorRequest, GeneratorResponse, PROTOCOL_VERSION};
pub use retrieval::{build_index, IndexEntry, RetrievalIndex};

#[cfg(feature = "io")]
pub use external::{
    run_external, AdapterError, AdapterTransport, ExternalConfig, ExternalRun, ExternalRunError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerationError {
    #[error("cannot build a retrieval index from zero training pairs")]
    EmptyTrainingSet,
}
