// SPDX-License-Identifier: Apache-2.0

//! Byte-counted FIFO with per-packet enqueue metadata.
//!
//! The backlog is never stored directly. It is the difference between two
//! monotonic counters, `count_enq` (advanced only by [`QueueCore::enqueue`])
//! and `count_deq` (advanced only by [`QueueCore::dequeue`]). Each packet
//! carries the backlog seen right after it was appended, so the dequeue side
//! can scale its sojourn time without any extra measurement.

use std::collections::VecDeque;

use thiserror::Error;

use crate::units::{Bytes, Nanos};

/// A queued unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub size: Bytes,
    /// Enqueue timestamp.
    pub ts_enq: Nanos,
    /// Backlog immediately after this packet was appended; includes the
    /// packet itself, so it is always at least `size`.
    pub backlog_enq: Bytes,
}

/// Tail drop: appending the packet would exceed the byte capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("tail drop: {size} B packet does not fit ({backlog} B queued, capacity {capacity} B)")]
pub struct Rejected {
    pub size: Bytes,
    pub backlog: Bytes,
    pub capacity: Bytes,
}

/// A packet leaving the head of the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dequeued {
    pub packet: Packet,
    /// Backlog immediately before removal; includes the departing packet.
    pub backlog_deq: Bytes,
}

#[derive(Debug, Clone, Default)]
pub struct QueueCore {
    fifo: VecDeque<Packet>,
    count_enq: u64,
    count_deq: u64,
    capacity: Option<Bytes>,
    next_id: u64,
    last_event: Nanos,
}

impl QueueCore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: Bytes) -> Self {
        QueueCore {
            capacity: Some(capacity),
            ..Self::default()
        }
    }

    pub fn capacity(&self) -> Option<Bytes> {
        self.capacity
    }

    /// Appends a packet of `size` bytes stamped with `now`.
    ///
    /// On tail drop nothing is mutated, including the id sequence.
    pub fn enqueue(&mut self, size: Bytes, now: Nanos) -> Result<Packet, Rejected> {
        assert!(size >= 1, "packet size must be at least one byte");
        debug_assert!(now >= self.last_event, "enqueue time went backwards");
        let after = self.backlog() + size;
        if let Some(capacity) = self.capacity {
            if after > capacity {
                return Err(Rejected {
                    size,
                    backlog: self.backlog(),
                    capacity,
                });
            }
        }
        self.count_enq += size;
        self.last_event = now;
        let packet = Packet {
            id: self.next_id,
            size,
            ts_enq: now,
            backlog_enq: self.backlog(),
        };
        self.next_id += 1;
        self.fifo.push_back(packet);
        Ok(packet)
    }

    /// Removes the head packet, or returns `None` when the queue is idle.
    pub fn dequeue(&mut self, now: Nanos) -> Option<Dequeued> {
        debug_assert!(now >= self.last_event, "dequeue time went backwards");
        let backlog_deq = self.backlog();
        let packet = self.fifo.pop_front()?;
        self.count_deq += packet.size;
        self.last_event = now;
        Some(Dequeued {
            packet,
            backlog_deq,
        })
    }

    pub fn backlog(&self) -> Bytes {
        self.count_enq - self.count_deq
    }

    pub fn count_enq(&self) -> u64 {
        self.count_enq
    }

    pub fn count_deq(&self) -> u64 {
        self.count_deq
    }

    pub fn head(&self) -> Option<&Packet> {
        self.fifo.front()
    }

    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.fifo.iter()
    }
}
