//! Accuracy of a streaming report against the exact tree, and skew of the
//! context frequency distribution.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::cct_exact::{ExactCct, NodeId};
use crate::error::{Error, Result};
use crate::fraction::{hot_threshold, Fraction};
use crate::hcct_builder::{Classification, HcctReport};

/// Streaming-vs-exact comparison for one run.
///
/// Counter errors are `estimated - true` over the contexts the report
/// classifies as hot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub n_events: u64,
    pub phi: Fraction,
    pub epsilon: Fraction,
    pub hot_threshold: u64,
    pub hot_true: usize,
    pub hot_returned: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
    pub max_false_positive_deficit: u64,
    /// Returned contexts with true frequency at or below `floor((phi - epsilon) N)`.
    pub false_positive_bound_violations: usize,
    pub max_counter_error: i64,
    pub avg_counter_error: f64,
    pub exact_counter_fraction: f64,
    /// Returned contexts whose error falls outside `[0, floor(epsilon N)]`.
    pub counter_bound_violations: usize,
    /// Report nodes with no counterpart in the exact tree.
    pub unknown_contexts: usize,
    pub hcct_nodes: usize,
    pub mcct_peak_nodes: u64,
    pub exact_cct_nodes: usize,
    pub pool_capacity: usize,
}

impl AccuracyReport {
    /// No false negatives, false positives within the `epsilon` band, counter
    /// errors within `floor(epsilon N)`.
    pub fn guarantees_hold(&self) -> bool {
        self.false_negatives == 0
            && self.false_positive_bound_violations == 0
            && self.counter_bound_violations == 0
            && self.unknown_contexts == 0
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k}: {v}");
        };
        kv("n_events", &self.n_events);
        kv("phi", &self.phi);
        kv("epsilon", &self.epsilon);
        kv("hot_threshold", &self.hot_threshold);
        kv("hot_true", &self.hot_true);
        kv("hot_returned", &self.hot_returned);
        kv("false_negatives", &self.false_negatives);
        kv("false_positives", &self.false_positives);
        kv("max_false_positive_deficit", &self.max_false_positive_deficit);
        kv("false_positive_bound_violations", &self.false_positive_bound_violations);
        kv("max_counter_error", &self.max_counter_error);
        kv("avg_counter_error", &format_args!("{:.6}", self.avg_counter_error));
        kv("exact_counter_fraction", &format_args!("{:.6}", self.exact_counter_fraction));
        kv("counter_bound_violations", &self.counter_bound_violations);
        kv("unknown_contexts", &self.unknown_contexts);
        kv("hcct_nodes", &self.hcct_nodes);
        kv("mcct_peak_nodes", &self.mcct_peak_nodes);
        kv("exact_cct_nodes", &self.exact_cct_nodes);
        kv("pool_capacity", &self.pool_capacity);
        kv("guarantees_hold", &self.guarantees_hold());
        s
    }
}

/// Maps each report node to the exact node with the same context path.
fn join(exact: &ExactCct, report: &HcctReport) -> Vec<Option<NodeId>> {
    let mut matched: Vec<Option<NodeId>> = Vec::with_capacity(report.nodes.len());
    for node in &report.nodes {
        let parent = match node.parent {
            None => Some(exact.root()),
            Some(p) => matched[p],
        };
        matched.push(parent.and_then(|p| exact.child_with(p, node.frame)));
    }
    matched
}

pub fn compare(exact: &ExactCct, report: &HcctReport) -> Result<AccuracyReport> {
    compare_with(exact, report, true)
}

pub fn compare_with(exact: &ExactCct, report: &HcctReport, min_threshold_one: bool) -> Result<AccuracyReport> {
    if exact.n_events() != report.n_events {
        return Err(Error::MismatchedRun { exact: exact.n_events(), streaming: report.n_events });
    }
    let n = exact.n_events();
    let threshold = hot_threshold(report.phi, n, min_threshold_one);
    let fp_floor = report.phi.saturating_sub(report.epsilon).floor_mul(n);
    let error_cap = report.epsilon.floor_mul(n) as i64;

    let matched = join(exact, report);
    let unknown_contexts = matched.iter().filter(|m| m.is_none()).count();

    let mut returned: HashSet<NodeId> = HashSet::new();
    let mut false_positives = 0;
    let mut max_deficit = 0;
    let mut fp_violations = 0;
    let mut max_err = 0i64;
    let mut err_sum = 0i64;
    let mut exact_hits = 0usize;
    let mut err_violations = 0;
    let mut hot_returned = 0;
    for (node, m) in report.nodes.iter().zip(&matched) {
        if node.classification != Classification::Hot {
            continue;
        }
        hot_returned += 1;
        let Some(id) = *m else { continue };
        returned.insert(id);
        let truth = exact.count(id);
        if truth < threshold {
            false_positives += 1;
            max_deficit = max_deficit.max(threshold - truth);
        }
        if truth <= fp_floor {
            fp_violations += 1;
        }
        let err = node.count as i64 - truth as i64;
        max_err = max_err.max(err);
        err_sum += err;
        exact_hits += usize::from(err == 0);
        if err < 0 || err > error_cap {
            err_violations += 1;
        }
    }

    let hot_true = exact.hot_set(report.phi, min_threshold_one);
    let false_negatives = hot_true.iter().filter(|id| !returned.contains(id)).count();
    let measured = returned.len();
    Ok(AccuracyReport {
        n_events: n,
        phi: report.phi,
        epsilon: report.epsilon,
        hot_threshold: threshold,
        hot_true: hot_true.len(),
        hot_returned,
        false_negatives,
        false_positives,
        max_false_positive_deficit: max_deficit,
        false_positive_bound_violations: fp_violations,
        max_counter_error: max_err,
        avg_counter_error: if measured == 0 { 0.0 } else { err_sum as f64 / measured as f64 },
        exact_counter_fraction: if measured == 0 { 1.0 } else { exact_hits as f64 / measured as f64 },
        counter_bound_violations: err_violations,
        unknown_contexts,
        hcct_nodes: report.nodes.len(),
        mcct_peak_nodes: report.mcct_peak_nodes,
        exact_cct_nodes: exact.node_count(),
        pool_capacity: report.pool_capacity,
    })
}

/// Cumulative share of calls covered by the most frequent contexts, sampled
/// at every whole percent of the context ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewnessCurve {
    /// `(fraction of contexts, fraction of calls)`, ending at `(1.0, 1.0)`.
    pub points: Vec<(f64, f64)>,
}

impl SkewnessCurve {
    /// Share of calls covered by the top `percent`% of contexts.
    pub fn at_percent(&self, percent: usize) -> f64 {
        assert!((1..=100).contains(&percent), "percent must be in 1..=100");
        self.points[percent - 1].1
    }
}

pub fn skewness(exact: &ExactCct) -> Result<SkewnessCurve> {
    let n = exact.n_events();
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    let mut counts: Vec<u64> = exact.contexts().map(|c| exact.count(c)).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let mut prefix = Vec::with_capacity(counts.len() + 1);
    prefix.push(0u64);
    for c in &counts {
        prefix.push(prefix.last().unwrap() + c);
    }
    let total = counts.len();
    let points = (1..=100)
        .map(|k| {
            let top = (k * total).div_ceil(100);
            (k as f64 / 100.0, prefix[top] as f64 / n as f64)
        })
        .collect();
    Ok(SkewnessCurve { points })
}
