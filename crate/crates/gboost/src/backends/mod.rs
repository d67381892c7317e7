//! Concrete backends: deterministic synthetic models for tests and the toy
//! benchmark, HTTP clients for logits-exposing model servers, and a
//! call-counting wrapper.

pub mod remote;
pub mod spy;
pub mod synthetic;

pub use remote::{RemoteModelClient, RemotePRMClient, RetryRecord};
pub use spy::CountingBackend;
pub use synthetic::{synthetic_triple, synthetic_vocabulary, SyntheticModel, SyntheticProfile};
