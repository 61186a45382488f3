//! Event queue ordered by `(fire_at, seq)`.

use alloc::collections::BinaryHeap;
use core::cmp::{Ordering, Reverse};

use super::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u64);

struct Scheduled<E> {
    fire_at: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.fire_at, self.seq).cmp(&(other.fire_at, other.seq))
    }
}

/// Single-threaded discrete-event queue. Events carry plain data; the owner
/// interprets them when they are popped.
pub struct Kernel<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Reverse<Scheduled<E>>>,
    fired: u64,
}

impl<E> Default for Kernel<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Kernel<E> {
    pub fn new() -> Self {
        Self { now: SimTime::ZERO, next_seq: 0, queue: BinaryHeap::new(), fired: 0 }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Schedules `event` at `now + delay_ms`. Equal fire times keep
    /// insertion order.
    pub fn schedule(&mut self, delay_ms: f64, event: E) -> EventId {
        assert!(delay_ms >= 0.0 && delay_ms.is_finite(), "invalid delay {delay_ms}");
        self.schedule_at(self.now + delay_ms, event)
    }

    pub fn schedule_at(&mut self, at: SimTime, event: E) -> EventId {
        assert!(at >= self.now, "event scheduled in the past");
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Scheduled { fire_at: at, seq, event }));
        EventId(seq)
    }

    /// Advances the clock to the next event and returns it.
    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        let Reverse(next) = self.queue.pop()?;
        debug_assert!(next.fire_at >= self.now);
        self.now = next.fire_at;
        self.fired += 1;
        Some((next.fire_at, next.event))
    }

    /// Like `pop`, but leaves events later than `until` queued.
    pub fn pop_until(&mut self, until: SimTime) -> Option<(SimTime, E)> {
        match self.queue.peek() {
            Some(Reverse(next)) if next.fire_at <= until => self.pop(),
            _ => None,
        }
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn fired(&self) -> u64 {
        self.fired
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn equal_times_fire_in_insertion_order() {
        let mut k = Kernel::new();
        k.schedule(0.0, 'a');
        k.schedule(0.0, 'b');
        k.schedule(0.0, 'c');
        let order: Vec<char> = core::iter::from_fn(|| k.pop().map(|(_, e)| e)).collect();
        assert_eq!(order, ['a', 'b', 'c']);
    }

    #[test]
    fn clock_reads_fire_time() {
        let mut k = Kernel::new();
        k.schedule(5.0, ());
        let (t, ()) = k.pop().unwrap();
        assert_eq!(t.as_ms(), 5.0);
        assert_eq!(k.now().as_ms(), 5.0);
    }

    #[test]
    fn out_of_order_scheduling_is_sorted() {
        let mut k = Kernel::new();
        k.schedule(3.0, 3);
        k.schedule(1.0, 1);
        k.schedule(2.0, 2);
        let (_, first) = k.pop().unwrap();
        k.schedule(0.5, 15);
        let rest: Vec<i32> = core::iter::from_fn(|| k.pop().map(|(_, e)| e)).collect();
        assert_eq!(first, 1);
        assert_eq!(rest, [15, 2, 3]);
    }

    #[test]
    fn pop_until_stops_at_horizon() {
        let mut k = Kernel::new();
        k.schedule(1.0, 1);
        k.schedule(10.0, 2);
        assert_eq!(k.pop_until(SimTime::from_ms(5.0)).map(|(_, e)| e), Some(1));
        assert!(k.pop_until(SimTime::from_ms(5.0)).is_none());
        assert_eq!(k.pending(), 1);
    }

    #[test]
    #[should_panic]
    fn negative_delay_rejected() {
        Kernel::new().schedule(-1.0, ());
    }
}
