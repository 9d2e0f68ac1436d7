//! Brute-force oracles shared by the integration tests. Nothing here goes
//! through the tree builders.
#![allow(dead_code)]

use std::collections::HashMap;

use hcct::{Frame, Trace, TraceEvent};
use rand::Rng;

pub type Context = Vec<Frame>;

/// Counts every context by replaying the trace on an explicit stack.
pub fn context_counts(events: &[TraceEvent]) -> HashMap<Context, u64> {
    let mut stack: Vec<Frame> = Vec::new();
    let mut counts = HashMap::new();
    for ev in events {
        match ev {
            TraceEvent::Call(f) => {
                stack.push(*f);
                *counts.entry(stack.clone()).or_insert(0) += 1;
            }
            TraceEvent::Return => {
                stack.pop();
            }
        }
    }
    counts
}

pub fn threshold(phi_num: u64, phi_den: u64, n: u64) -> u64 {
    (phi_num as u128 * n as u128 / phi_den as u128).max(1) as u64
}

/// Marks hot contexts, adds every proper prefix, drops the rest.
pub fn brute_hcct(counts: &HashMap<Context, u64>, min_count: u64) -> HashMap<Context, u64> {
    let mut keep = HashMap::new();
    for (ctx, &c) in counts {
        if c >= min_count {
            for len in 1..=ctx.len() {
                let prefix = ctx[..len].to_vec();
                let count = counts[&prefix];
                keep.insert(prefix, count);
            }
        }
    }
    keep
}

/// A random well-formed trace over a small alphabet, possibly left open.
pub fn random_trace<R: Rng>(rng: &mut R, max_len: usize, routines: u32, sites: u32) -> Trace {
    let len = rng.random_range(0..=max_len);
    let mut depth = 0usize;
    let mut events = Vec::with_capacity(len);
    let max_depth = rng.random_range(1..=12);
    for _ in 0..len {
        let call = depth == 0 || (depth < max_depth && rng.random_bool(0.55));
        if call {
            events.push(TraceEvent::call(rng.random_range(0..routines), rng.random_range(0..sites)));
            depth += 1;
        } else {
            events.push(TraceEvent::Return);
            depth -= 1;
        }
    }
    Trace::from_events(events).unwrap()
}

/// Canonical text written by hand, independent of the library writer.
pub fn canonical_text(events: &[TraceEvent]) -> String {
    let mut s = String::new();
    let mut depth = 0usize;
    for ev in events {
        match ev {
            TraceEvent::Call(f) => {
                s.push_str(&format!("C {} {}\n", f.routine.0, f.call_site.0));
                depth += 1;
            }
            TraceEvent::Return => {
                s.push_str("R\n");
                depth -= 1;
            }
        }
    }
    s.push_str(&"R\n".repeat(depth));
    s
}
