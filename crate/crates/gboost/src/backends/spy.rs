//! Call-counting wrapper around a backend, used by tests to assert mode
//! isolation (which models a given configuration actually touches).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::core::{LogitVector, TokenId, Vocabulary};
use crate::error::Result;
use crate::policy::GenerationBackend;

pub struct CountingBackend {
    inner: Arc<dyn GenerationBackend>,
    calls: AtomicUsize,
}

impl CountingBackend {
    pub fn new(inner: Arc<dyn GenerationBackend>) -> Arc<Self> {
        Arc::new(Self { inner, calls: AtomicUsize::new(0) })
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }
}

impl GenerationBackend for CountingBackend {
    fn next_logits(&self, context: &[TokenId]) -> Result<LogitVector> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.next_logits(context)
    }

    fn vocabulary(&self) -> Vocabulary {
        self.inner.vocabulary()
    }

    fn id(&self) -> &str {
        self.inner.id()
    }
}
