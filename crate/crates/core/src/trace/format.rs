//! Line-oriented text encoding of traces.
//!
//! ```text
//! # comment lines are skipped
//! C <routine> <call_site>
//! R
//! ```
//!
//! Integers are unsigned decimal without sign or leading zeros, fields are
//! separated by exactly one space, and lines end in `\n` with no trailing
//! whitespace. The final newline may be missing on input.

use std::io::{BufRead, BufReader, Read, Write};

use super::{Frame, Trace, TraceEvent};
use crate::error::{Error, Result};

/// Streaming decoder yielding one event per record.
///
/// Stops with [`Error::UnbalancedTrace`] on a return that has no open call.
/// Open calls at end of input are not an error.
pub struct TraceReader<R> {
    source: R,
    buf: Vec<u8>,
    line: usize,
    events: usize,
    depth: usize,
    failed: bool,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(source: R) -> Self {
        TraceReader { source, buf: Vec::with_capacity(64), line: 0, events: 0, depth: 0, failed: false }
    }

    /// Calls that have not yet been returned from.
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn next_event(&mut self) -> Result<Option<TraceEvent>> {
        loop {
            self.buf.clear();
            if self.source.read_until(b'\n', &mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let record = self.buf.strip_suffix(b"\n").unwrap_or(&self.buf);
            if record.first() == Some(&b'#') {
                continue;
            }
            let event = parse_record(record)
                .map_err(|reason| Error::MalformedRecord { line: self.line, reason: reason.to_owned() })?;
            match event {
                TraceEvent::Call(_) => self.depth += 1,
                TraceEvent::Return if self.depth == 0 => return Err(Error::UnbalancedTrace { event: self.events }),
                TraceEvent::Return => self.depth -= 1,
            }
            self.events += 1;
            return Ok(Some(event));
        }
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<TraceEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let next = self.next_event().transpose();
        if matches!(next, Some(Err(_))) {
            self.failed = true;
        }
        next
    }
}

fn parse_u32(field: &[u8]) -> Result<u32, &'static str> {
    match field {
        [] => Err("empty integer field"),
        [b'0', _, ..] => Err("leading zero in integer"),
        _ if !field.iter().all(u8::is_ascii_digit) => Err("integer field is not decimal digits"),
        _ => std::str::from_utf8(field).ok().and_then(|s| s.parse().ok()).ok_or("integer does not fit in 32 bits"),
    }
}

fn parse_record(record: &[u8]) -> Result<TraceEvent, &'static str> {
    match record {
        b"R" => Ok(TraceEvent::Return),
        [b'C', b' ', rest @ ..] => {
            let mut fields = rest.split(|&b| b == b' ');
            let routine = parse_u32(fields.next().unwrap_or_default())?;
            let call_site = parse_u32(fields.next().ok_or("missing call site")?)?;
            if fields.next().is_some() {
                return Err("unexpected trailing field");
            }
            Ok(TraceEvent::Call(Frame::new(routine, call_site)))
        }
        [] => Err("empty line"),
        _ => Err("expected `C <routine> <call_site>` or `R`"),
    }
}

/// Decodes and validates a whole trace.
pub fn read_trace<R: Read>(source: R) -> Result<Trace> {
    let events = TraceReader::new(BufReader::new(source)).collect::<Result<Vec<_>>>()?;
    Ok(Trace::from_events_unchecked(events))
}

/// Writes the canonical encoding, appending returns for any calls left open.
pub fn write_trace<W: Write>(trace: &Trace, sink: W) -> Result<()> {
    let mut sink = std::io::BufWriter::new(sink);
    for event in trace {
        match event {
            TraceEvent::Call(f) => writeln!(sink, "C {} {}", f.routine, f.call_site)?,
            TraceEvent::Return => sink.write_all(b"R\n")?,
        }
    }
    for _ in 0..trace.open_calls() {
        sink.write_all(b"R\n")?;
    }
    sink.flush()?;
    Ok(())
}
