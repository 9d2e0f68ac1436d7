//! Streaming construction of hot calling context trees.
//!
//! A program execution is modelled as a stream of routine call and return
//! events. Feeding that stream through [`HcctBuilder`] keeps only the part of
//! the calling context tree needed to answer `(phi, epsilon)` heavy-hitter
//! queries over calling contexts, in space proportional to `1/epsilon` rather
//! than to the full tree. The crate also contains an exact tree builder used
//! as an oracle, synthetic trace generators, accuracy metrics and the text
//! formats used by the `hcct` command-line tool.
//!
//! ```
//! use hcct::{example_trace, Fraction, HcctBuilder};
//!
//! let trace = example_trace(8).unwrap();
//! let mut builder = HcctBuilder::with_capacity(Fraction::new(1, 4).unwrap(), 3);
//! builder.run(&trace).unwrap();
//! let report = builder.query_hcct(Fraction::new(1, 2).unwrap()).unwrap();
//! assert_eq!(report.hot_nodes().count(), 1);
//! ```

pub mod analysis;
pub mod cct_exact;
mod error;
pub mod export;
mod fraction;
pub mod hcct_builder;
pub mod stream_summary;
pub mod symbols;
pub mod trace;

pub use analysis::{compare, skewness, AccuracyReport, SkewnessCurve};
pub use cct_exact::{build_exact_cct, exact_hcct, exact_hot_set, ExactCct, ExactCctBuilder};
pub use error::{Error, Result};
pub use fraction::{hot_threshold, Fraction};
pub use hcct_builder::{Classification, HcctBuilder, HcctReport, ReportNode};
pub use stream_summary::{CounterStore, MonitorPool, StreamSummary, UpdateOutcome};
pub use symbols::SymbolTable;
pub use trace::{
    example_trace, generate_zipf_trace, read_trace, write_trace, CallSiteId, Frame, RoutineId, Trace, TraceEvent,
    TraceReader, ZipfWorkloadSpec,
};
