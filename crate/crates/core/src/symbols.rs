//! Routine names for exports.
//!
//! Symbol files hold one `<routine_id> <name>` pair per line; `#` lines are
//! comments. Routines without an entry are shown by their decimal id.

use std::borrow::Cow;
use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::trace::RoutineId;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: HashMap<RoutineId, String>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Names for [`example_trace`](crate::example_trace).
    pub fn example() -> Self {
        let mut t = SymbolTable::new();
        for (id, name) in [(0, "main"), (1, "p"), (2, "q")] {
            t.insert(RoutineId(id), name).expect("static names are valid");
        }
        t
    }

    pub fn insert(&mut self, id: RoutineId, name: &str) -> std::result::Result<(), &'static str> {
        validate_name(name)?;
        self.names.insert(id, name.to_owned());
        Ok(())
    }

    pub fn name(&self, id: RoutineId) -> Cow<'_, str> {
        match self.names.get(&id) {
            Some(n) => Cow::Borrowed(n),
            None => Cow::Owned(id.0.to_string()),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut table = SymbolTable::new();
        for (i, line) in source.split(b'\n').enumerate() {
            let line = line?;
            let malformed = |reason: &str| Error::MalformedRecord { line: i + 1, reason: reason.to_owned() };
            if line.first() == Some(&b'#') {
                continue;
            }
            let line = std::str::from_utf8(&line).map_err(|_| malformed("not UTF-8"))?;
            let (id, name) = line.split_once(' ').ok_or_else(|| malformed("expected `<id> <name>`"))?;
            if id.is_empty() || !id.bytes().all(|b| b.is_ascii_digit()) || (id.len() > 1 && id.starts_with('0')) {
                return Err(malformed("routine id must be an unsigned decimal integer"));
            }
            let id = RoutineId(id.parse().map_err(|_| malformed("routine id does not fit in 32 bits"))?);
            if table.names.contains_key(&id) {
                return Err(malformed("duplicate routine id"));
            }
            table.insert(id, name).map_err(malformed)?;
        }
        Ok(table)
    }

    /// Writes entries sorted by id.
    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut entries: Vec<_> = self.names.iter().collect();
        entries.sort();
        for (id, name) in entries {
            writeln!(sink, "{id} {name}")?;
        }
        Ok(())
    }
}

fn validate_name(name: &str) -> std::result::Result<(), &'static str> {
    if name.is_empty() {
        return Err("empty routine name");
    }
    if name.contains(';') {
        return Err("routine name contains ';'");
    }
    if name.chars().any(|c| c.is_control()) {
        return Err("routine name contains control characters");
    }
    if name.starts_with(' ') || name.ends_with(' ') {
        return Err("routine name has surrounding spaces");
    }
    Ok(())
}
