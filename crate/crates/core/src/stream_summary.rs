//! Space-Saving over a lazy priority queue.
//!
//! The pool is a fixed array of `ceil(1/epsilon)` slots holding keys only;
//! counters, error bounds and the monitored flag live with the keyed items
//! themselves and are reached through a [`CounterStore`]. Vacant slots read
//! as count zero, so the initial fill and later evictions go through the
//! same `find-min` path.
//!
//! `min` and `min_idx` are refreshed lazily: increments never touch them, and
//! [`MonitorPool::find_min`] walks `min_idx` forward to the next slot still
//! holding `min`, rescanning the whole array only when it runs off the end.
//! Counters never decrease, so nothing below `min` can appear behind
//! `min_idx`.

use crate::error::{Error, Result};
use crate::fraction::{hot_threshold, Fraction};

/// Where the per-item counters live.
pub trait CounterStore {
    type Key: Copy + Eq;

    fn count(&self, key: Self::Key) -> u64;
    fn error_bound(&self, key: Self::Key) -> u64;
    fn is_monitored(&self, key: Self::Key) -> bool;
    fn increment(&mut self, key: Self::Key);
    /// Starts monitoring `key` with the given counter state.
    fn monitor(&mut self, key: Self::Key, count: u64, error_bound: u64);
    fn unmonitor(&mut self, key: Self::Key);
}

/// Result of one stream update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateOutcome<K> {
    /// The item evicted to make room, if any. Space-Saving evicts at most one.
    pub victim: Option<K>,
    /// Whether the updated item was not monitored before.
    pub newly_monitored: bool,
}

impl<K: Copy> UpdateOutcome<K> {
    pub fn victims(&self) -> impl Iterator<Item = K> {
        self.victim.into_iter()
    }
}

/// A monitored item reported by a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitoredEntry<K> {
    pub key: K,
    pub count: u64,
    pub error_bound: u64,
}

/// The `update`/`query` interface of a counter-based frequent-items algorithm.
pub trait StreamSummary<S: CounterStore> {
    fn update(&mut self, item: S::Key, store: &mut S) -> UpdateOutcome<S::Key>;

    /// Monitored items whose count reaches the `phi` threshold.
    fn query(&self, phi: Fraction, store: &S) -> Result<Vec<MonitoredEntry<S::Key>>>;

    fn epsilon(&self) -> Fraction;

    fn capacity(&self) -> usize;

    /// Items currently monitored.
    fn monitored(&self) -> Vec<S::Key>;

    /// Stream length seen so far.
    fn n_seen(&self) -> u64;
}

#[derive(Debug, Clone)]
pub struct MonitorPool<K> {
    slots: Vec<Option<K>>,
    len: usize,
    min: u64,
    min_idx: usize,
    epsilon: Fraction,
    n_seen: u64,
    scan_steps: u64,
    min_threshold_one: bool,
}

impl<K: Copy + Eq> MonitorPool<K> {
    /// A pool of `ceil(1/epsilon)` slots.
    pub fn new(epsilon: Fraction) -> Result<Self> {
        let capacity = epsilon
            .ceil_recip()
            .ok_or(Error::InvalidFraction { input: epsilon.to_string(), reason: "epsilon must be positive" })?;
        Ok(Self::with_capacity(epsilon, capacity as usize))
    }

    /// A pool with an explicit slot count. Query thresholds still use
    /// `epsilon`; the error guarantees only hold for `capacity >= 1/epsilon`.
    pub fn with_capacity(epsilon: Fraction, capacity: usize) -> Self {
        assert!(capacity > 0, "monitor pool capacity must be positive");
        MonitorPool {
            slots: vec![None; capacity],
            len: 0,
            min: 0,
            min_idx: 0,
            epsilon,
            n_seen: 0,
            scan_steps: 0,
            min_threshold_one: true,
        }
    }

    /// Whether a zero `floor(phi * N)` threshold is lifted to one (default on).
    pub fn set_min_threshold_one(&mut self, on: bool) {
        self.min_threshold_one = on;
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.slots.len()
    }

    /// Cached minimum; may lag behind the true minimum until the next
    /// [`find_min`](Self::find_min).
    pub fn min(&self) -> u64 {
        self.min
    }

    pub fn min_idx(&self) -> usize {
        self.min_idx
    }

    /// Array positions visited by `find_min` so far.
    pub fn scan_steps(&self) -> u64 {
        self.scan_steps
    }

    pub fn n_seen(&self) -> u64 {
        self.n_seen
    }

    pub fn epsilon(&self) -> Fraction {
        self.epsilon
    }

    pub fn slots(&self) -> &[Option<K>] {
        &self.slots
    }

    fn slot_count<S: CounterStore<Key = K>>(&self, idx: usize, store: &S) -> u64 {
        self.slots[idx].map_or(0, |k| store.count(k))
    }

    fn restore_min<S: CounterStore<Key = K>>(&mut self, store: &S) -> (u64, usize) {
        let cap = self.slots.len();
        while self.min_idx < cap && self.slot_count(self.min_idx, store) != self.min {
            self.min_idx += 1;
            self.scan_steps += 1;
        }
        if self.min_idx == cap {
            let (idx, min) = (0..cap)
                .map(|i| (i, self.slot_count(i, store)))
                .min_by_key(|&(i, c)| (c, i))
                .expect("capacity is positive");
            self.scan_steps += cap as u64;
            self.min = min;
            self.min_idx = idx;
        }
        (self.min, self.min_idx)
    }

    /// Minimum count over the pool, vacant slots counting as zero.
    ///
    /// Afterwards `slots[min_idx]` holds the smallest index at or after the
    /// previous `min_idx` whose count equals `min`, or the smallest index
    /// overall if a rescan was needed.
    pub fn find_min<S: CounterStore<Key = K>>(&mut self, store: &S) -> Result<u64> {
        if self.is_empty() {
            return Err(Error::EmptyPool);
        }
        Ok(self.restore_min(store).0)
    }

    pub fn update<S: CounterStore<Key = K>>(&mut self, item: K, store: &mut S) -> UpdateOutcome<K> {
        self.n_seen += 1;
        if store.is_monitored(item) {
            store.increment(item);
            return UpdateOutcome { victim: None, newly_monitored: false };
        }
        let (min, idx) = self.restore_min(store);
        let victim = self.slots[idx].replace(item);
        match victim {
            Some(v) => store.unmonitor(v),
            None => self.len += 1,
        }
        store.monitor(item, min + 1, min);
        UpdateOutcome { victim, newly_monitored: true }
    }

    pub fn query<S: CounterStore<Key = K>>(&self, phi: Fraction, store: &S) -> Result<Vec<MonitoredEntry<K>>> {
        if phi <= self.epsilon {
            return Err(Error::InvalidThreshold { phi, epsilon: self.epsilon });
        }
        let threshold = hot_threshold(phi, self.n_seen, self.min_threshold_one);
        Ok(self
            .slots
            .iter()
            .flatten()
            .map(|&key| MonitoredEntry { key, count: store.count(key), error_bound: store.error_bound(key) })
            .filter(|e| e.count >= threshold)
            .collect())
    }
}

impl<S: CounterStore> StreamSummary<S> for MonitorPool<S::Key> {
    fn update(&mut self, item: S::Key, store: &mut S) -> UpdateOutcome<S::Key> {
        MonitorPool::update(self, item, store)
    }

    fn query(&self, phi: Fraction, store: &S) -> Result<Vec<MonitoredEntry<S::Key>>> {
        MonitorPool::query(self, phi, store)
    }

    fn epsilon(&self) -> Fraction {
        self.epsilon
    }

    fn capacity(&self) -> usize {
        self.slots.len()
    }

    fn monitored(&self) -> Vec<S::Key> {
        self.slots.iter().flatten().copied().collect()
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}

/// Counters for items identified by small integers, for using the pool on
/// its own.
#[derive(Debug, Clone, Default)]
pub struct DenseCounters {
    count: Vec<u64>,
    error: Vec<u64>,
    monitored: Vec<bool>,
}

impl DenseCounters {
    pub fn new() -> Self {
        Self::default()
    }

    fn grow(&mut self, key: usize) {
        if key >= self.count.len() {
            self.count.resize(key + 1, 0);
            self.error.resize(key + 1, 0);
            self.monitored.resize(key + 1, false);
        }
    }
}

impl CounterStore for DenseCounters {
    type Key = usize;

    fn count(&self, key: usize) -> u64 {
        self.count.get(key).copied().unwrap_or(0)
    }

    fn error_bound(&self, key: usize) -> u64 {
        self.error.get(key).copied().unwrap_or(0)
    }

    fn is_monitored(&self, key: usize) -> bool {
        self.monitored.get(key).copied().unwrap_or(false)
    }

    fn increment(&mut self, key: usize) {
        self.grow(key);
        self.count[key] += 1;
    }

    fn monitor(&mut self, key: usize, count: u64, error_bound: u64) {
        self.grow(key);
        self.count[key] = count;
        self.error[key] = error_bound;
        self.monitored[key] = true;
    }

    fn unmonitor(&mut self, key: usize) {
        self.grow(key);
        self.monitored[key] = false;
    }
}
