//! Synthetic traces.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use super::{Frame, Trace, TraceEvent};
use crate::error::{Error, Result};

/// Parameters of a skewed synthetic workload.
///
/// The generator first builds a pool of up to `contexts` distinct call paths
/// rooted at routine 0, each at most `max_depth` frames deep, then samples
/// paths from that pool with Zipf(`skew`) popularity and walks the call stack
/// from one sampled path to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfWorkloadSpec {
    distinct_routines: u32,
    max_depth: usize,
    total_calls: u64,
    skew: f64,
    seed: u64,
    contexts: usize,
}

impl ZipfWorkloadSpec {
    pub const DEFAULT_CONTEXTS: usize = 1_000;

    pub fn new(distinct_routines: u32, max_depth: usize, total_calls: u64, skew: f64, seed: u64) -> Result<Self> {
        if distinct_routines == 0 {
            return Err(Error::InvalidSpec("distinct routines must be at least 1".into()));
        }
        if max_depth == 0 {
            return Err(Error::InvalidSpec("max depth must be at least 1".into()));
        }
        if total_calls == 0 {
            return Err(Error::InvalidSpec("total calls must be at least 1".into()));
        }
        if !(skew.is_finite() && skew >= 0.0) {
            return Err(Error::InvalidSpec(format!("skew must be a finite value >= 0, got {skew}")));
        }
        Ok(ZipfWorkloadSpec { distinct_routines, max_depth, total_calls, skew, seed, contexts: Self::DEFAULT_CONTEXTS })
    }

    /// Target size of the candidate path pool.
    pub fn with_contexts(mut self, contexts: usize) -> Result<Self> {
        if contexts == 0 {
            return Err(Error::InvalidSpec("context pool must hold at least 1 path".into()));
        }
        self.contexts = contexts;
        Ok(self)
    }

    pub fn distinct_routines(&self) -> u32 {
        self.distinct_routines
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn total_calls(&self) -> u64 {
        self.total_calls
    }

    pub fn skew(&self) -> f64 {
        self.skew
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }
}

const MAX_FANOUT: usize = 8;

/// Builds the candidate path pool. Every routine gets a fixed callee list so
/// that paths share prefixes the way real call graphs do; the call site of a
/// callee is its position in the caller's list.
fn context_pool(spec: &ZipfWorkloadSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<Frame>> {
    let callees: Vec<Vec<u32>> = (0..spec.distinct_routines)
        .map(|_| {
            let fanout = rng.random_range(2..=MAX_FANOUT);
            (0..fanout).map(|_| rng.random_range(0..spec.distinct_routines)).collect()
        })
        .collect();

    let root = Frame::new(0, 0);
    let mut seen: HashSet<Vec<Frame>> = HashSet::new();
    let mut pool = Vec::with_capacity(spec.contexts);
    let max_attempts = spec.contexts.saturating_mul(20).max(64);
    for _ in 0..max_attempts {
        if pool.len() == spec.contexts {
            break;
        }
        let depth = rng.random_range(1..=spec.max_depth);
        let mut path = Vec::with_capacity(depth);
        path.push(root);
        while path.len() < depth {
            let caller = path.last().unwrap().routine.0 as usize;
            let site = rng.random_range(0..callees[caller].len());
            path.push(Frame::new(callees[caller][site], site as u32));
        }
        if seen.insert(path.clone()) {
            pool.push(path);
        }
    }
    pool.shuffle(rng);
    pool
}

/// Generates a well-formed trace with exactly `spec.total_calls()` calls.
///
/// Deterministic for a fixed spec. Consecutive sampled paths keep their
/// common prefix open, so only the diverging suffix is returned from and
/// re-entered; the final stack is unwound with explicit returns.
pub fn generate_zipf_trace(spec: &ZipfWorkloadSpec) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pool = context_pool(spec, &mut rng);
    let zipf = Zipf::new(pool.len() as f64, spec.skew).expect("validated skew and non-empty pool");

    let mut events = Vec::with_capacity(spec.total_calls as usize * 2);
    let mut stack: Vec<Frame> = Vec::with_capacity(spec.max_depth);
    let mut remaining = spec.total_calls;
    while remaining > 0 {
        let rank = zipf.sample(&mut rng) as usize;
        let path = &pool[rank.clamp(1, pool.len()) - 1];
        let shared = stack.iter().zip(path).take_while(|(a, b)| a == b).count();
        // Re-enter at least the leaf so every sample costs one call.
        let keep = shared.min(path.len() - 1);
        for _ in keep..stack.len() {
            events.push(TraceEvent::Return);
        }
        stack.truncate(keep);
        for &frame in &path[keep..] {
            if remaining == 0 {
                break;
            }
            events.push(TraceEvent::Call(frame));
            stack.push(frame);
            remaining -= 1;
        }
    }
    events.extend(std::iter::repeat(TraceEvent::Return).take(stack.len()));
    Trace::from_events_unchecked(events)
}

/// `main` calls `p` once and then `q` `n - 2` times, for `n` calls in total.
///
/// Routine ids are 0 (`main`), 1 (`p`) and 2 (`q`); see
/// [`SymbolTable::example`](crate::SymbolTable::example).
pub fn example_trace(n: u64) -> Result<Trace> {
    if n < 8 {
        return Err(Error::InvalidSpec(format!("example trace needs n >= 8, got {n}")));
    }
    let mut events = Vec::with_capacity(2 * n as usize);
    events.push(TraceEvent::call(0, 0));
    events.extend([TraceEvent::call(1, 1), TraceEvent::Return]);
    for _ in 0..n - 2 {
        events.extend([TraceEvent::call(2, 2), TraceEvent::Return]);
    }
    events.push(TraceEvent::Return);
    Ok(Trace::from_events_unchecked(events))
}
