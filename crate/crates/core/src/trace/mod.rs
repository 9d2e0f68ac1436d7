//! Call/return event streams.

mod format;
mod generate;

pub use format::{read_trace, write_trace, TraceReader};
pub use generate::{example_trace, generate_zipf_trace, ZipfWorkloadSpec};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoutineId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CallSiteId(pub u32);

impl fmt::Display for RoutineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CallSiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One activation record: which routine was called, and from where.
///
/// Two calls to the same routine from different call sites of the same caller
/// are distinct contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frame {
    pub routine: RoutineId,
    pub call_site: CallSiteId,
}

impl Frame {
    pub fn new(routine: u32, call_site: u32) -> Self {
        Frame { routine: RoutineId(routine), call_site: CallSiteId(call_site) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Call(Frame),
    Return,
}

impl TraceEvent {
    pub fn call(routine: u32, call_site: u32) -> Self {
        TraceEvent::Call(Frame::new(routine, call_site))
    }
}

/// An ordered event sequence in which no return precedes its call.
///
/// Calls left open at the end are allowed; they are closed implicitly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Checks the prefix property before accepting `events`.
    pub fn from_events(events: Vec<TraceEvent>) -> Result<Self> {
        let mut depth = 0usize;
        for (i, ev) in events.iter().enumerate() {
            match ev {
                TraceEvent::Call(_) => depth += 1,
                TraceEvent::Return if depth == 0 => return Err(Error::UnbalancedTrace { event: i }),
                TraceEvent::Return => depth -= 1,
            }
        }
        Ok(Trace { events })
    }

    pub(crate) fn from_events_unchecked(events: Vec<TraceEvent>) -> Self {
        Trace { events }
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of call events, i.e. the stream length `N`.
    pub fn call_count(&self) -> u64 {
        self.events.iter().filter(|e| matches!(e, TraceEvent::Call(_))).count() as u64
    }

    /// Calls still open after the last event.
    pub fn open_calls(&self) -> usize {
        self.events.iter().fold(0usize, |d, e| match e {
            TraceEvent::Call(_) => d + 1,
            TraceEvent::Return => d - 1,
        })
    }

    /// The same trace with every open call explicitly returned.
    pub fn balanced(mut self) -> Self {
        let open = self.open_calls();
        self.events.extend(std::iter::repeat(TraceEvent::Return).take(open));
        self
    }

    pub fn into_events(self) -> Vec<TraceEvent> {
        self.events
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = &'a TraceEvent;
    type IntoIter = std::slice::Iter<'a, TraceEvent>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_return_without_call() {
        let err = Trace::from_events(vec![TraceEvent::call(1, 0), TraceEvent::Return, TraceEvent::Return]);
        assert!(matches!(err, Err(Error::UnbalancedTrace { event: 2 })));
    }

    #[test]
    fn balanced_closes_open_calls() {
        let t = Trace::from_events(vec![TraceEvent::call(1, 0), TraceEvent::call(2, 3)]).unwrap();
        assert_eq!(t.open_calls(), 2);
        let b = t.balanced();
        assert_eq!(b.len(), 4);
        assert_eq!(b.open_calls(), 0);
        assert_eq!(b.call_count(), 2);
    }
}
