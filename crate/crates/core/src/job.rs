use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

/// Cancel signal plus a monotonic progress counter, shared between a
/// running enumeration and whoever observes it.
#[derive(Debug, Default)]
pub struct JobControl {
    cancelled: AtomicBool,
    examined: AtomicU64,
    total: AtomicU64,
}

impl JobControl {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn cancel(&self) {
        self.cancelled.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancelled.load(Ordering::Relaxed)
    }

    pub fn examined(&self) -> u64 {
        self.examined.load(Ordering::Relaxed)
    }

    pub fn total(&self) -> u64 {
        self.total.load(Ordering::Relaxed)
    }

    /// Fraction of the candidate space consumed so far, in `[0, 1]`.
    pub fn progress(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            total => (self.examined() as f64 / total as f64).min(1.0),
        }
    }

    pub(crate) fn set_total(&self, total: u64) {
        self.total.store(total, Ordering::Relaxed);
    }

    pub(crate) fn advance(&self, by: u64) {
        self.examined.fetch_add(by, Ordering::Relaxed);
    }
}
