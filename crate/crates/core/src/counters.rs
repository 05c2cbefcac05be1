// SPDX-License-Identifier: Apache-2.0

//! Lock-free backlog counters for an enqueue side and a dequeue side running
//! on different threads.
//!
//! Each side owns one counter and is the only writer of it. Either side may
//! read both. Because the enqueue side publishes its increment (release)
//! before handing the packet over, a dequeuer that has received a packet
//! always observes a `count_enq` that already covers it, so the backlog it
//! reads includes the departing packet.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::units::Bytes;

#[derive(Debug, Default)]
struct Shared {
    count_enq: AtomicU64,
    count_deq: AtomicU64,
}

impl Shared {
    fn backlog(&self) -> Bytes {
        // read deq first: it can only lag enq, so the difference never underflows
        let deq = self.count_deq.load(Ordering::Acquire);
        let enq = self.count_enq.load(Ordering::Acquire);
        enq - deq
    }
}

/// Write handle for `count_enq`.
#[derive(Debug)]
pub struct EnqueueCounter(Arc<Shared>);

/// Write handle for `count_deq`.
#[derive(Debug)]
pub struct DequeueCounter(Arc<Shared>);

/// Creates a counter pair. Neither handle is `Clone`, so each counter has
/// exactly one writer.
pub fn split() -> (EnqueueCounter, DequeueCounter) {
    let shared = Arc::new(Shared::default());
    (EnqueueCounter(shared.clone()), DequeueCounter(shared))
}

impl EnqueueCounter {
    /// Accounts for an appended packet and returns the backlog including it.
    pub fn record(&mut self, size: Bytes) -> Bytes {
        // single writer: a plain load/store pair is enough, no RMW needed
        let enq = self.0.count_enq.load(Ordering::Relaxed) + size;
        self.0.count_enq.store(enq, Ordering::Release);
        enq - self.0.count_deq.load(Ordering::Acquire)
    }

    pub fn count(&self) -> u64 {
        self.0.count_enq.load(Ordering::Relaxed)
    }

    pub fn backlog(&self) -> Bytes {
        self.0.backlog()
    }
}

impl DequeueCounter {
    /// Backlog before removing a packet; includes the packet about to leave
    /// provided its enqueue has been observed.
    pub fn backlog(&self) -> Bytes {
        self.0.backlog()
    }

    /// Accounts for a departed packet.
    pub fn record(&mut self, size: Bytes) {
        let deq = self.0.count_deq.load(Ordering::Relaxed) + size;
        self.0.count_deq.store(deq, Ordering::Release);
    }

    pub fn count(&self) -> u64 {
        self.0.count_deq.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_thread_bookkeeping() {
        let (mut enq, mut deq) = split();
        assert_eq!(enq.record(1500), 1500);
        assert_eq!(enq.record(500), 2000);
        assert_eq!(deq.backlog(), 2000);
        deq.record(1500);
        assert_eq!(enq.backlog(), 500);
        assert_eq!((enq.count(), deq.count()), (2000, 1500));
    }
}
