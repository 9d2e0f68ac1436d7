//! Interchange formats for context trees: Graphviz DOT, folded stacks,
//! JSON lines and a `key: value` text report.
//!
//! All writers are deterministic and use `\n` line endings.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::cct_exact::ExactCct;
use crate::error::{Error, Result};
use crate::fraction::{hot_threshold, Fraction};
use crate::hcct_builder::{Classification, HcctReport};
use crate::symbols::SymbolTable;
use crate::trace::{CallSiteId, Frame, RoutineId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportNode {
    pub frame: Frame,
    pub parent: Option<usize>,
    pub count: u64,
    pub error_bound: u64,
    pub classification: Classification,
    /// False for cold ancestors whose counter is no longer maintained.
    pub tracked: bool,
}

/// A context tree whose parent indices always precede their children.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExportTree {
    pub nodes: Vec<ExportNode>,
}

impl ExportTree {
    pub fn from_report(report: &HcctReport) -> Self {
        ExportTree {
            nodes: report
                .nodes
                .iter()
                .map(|n| ExportNode {
                    frame: n.frame,
                    parent: n.parent,
                    count: n.count,
                    error_bound: n.error_bound,
                    classification: n.classification,
                    tracked: n.monitored,
                })
                .collect(),
        }
    }

    /// Exact HCCT for `phi`; with `phi = 0` this is the whole tree.
    pub fn from_exact(cct: &ExactCct, phi: Fraction, min_threshold_one: bool) -> Self {
        let hcct = cct.hcct(phi, min_threshold_one);
        let threshold = hot_threshold(phi, cct.n_events(), min_threshold_one);
        let mut nodes = Vec::with_capacity(hcct.node_count());
        // `hcct` numbers parents before children starting at the root, so a node's
        // export index is its id minus one.
        for id in hcct.contexts() {
            nodes.push(ExportNode {
                frame: hcct.frame(id),
                parent: hcct.parent(id).filter(|p| *p != hcct.root()).map(|p| p.index() - 1),
                count: hcct.count(id),
                error_bound: 0,
                classification: if hcct.count(id) >= threshold {
                    Classification::Hot
                } else {
                    Classification::ColdAncestor
                },
                tracked: true,
            });
        }
        ExportTree { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn leaf_mask(&self) -> Vec<bool> {
        let mut leaf = vec![true; self.nodes.len()];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                leaf[p] = false;
            }
        }
        leaf
    }

    fn stack_names(&self, index: usize, symbols: &SymbolTable) -> String {
        let mut names = Vec::new();
        let mut cur = Some(index);
        while let Some(i) = cur {
            names.push(symbols.name(self.nodes[i].frame.routine));
            cur = self.nodes[i].parent;
        }
        names.reverse();
        names.join(";")
    }
}

/// One `name;name;...;name <count>` line per leaf, sorted.
pub fn write_folded<W: Write>(tree: &ExportTree, symbols: &SymbolTable, mut sink: W) -> Result<()> {
    let leaf = tree.leaf_mask();
    let lines: BTreeSet<String> = (0..tree.len())
        .filter(|&i| leaf[i])
        .map(|i| format!("{} {}", tree.stack_names(i, symbols), tree.nodes[i].count))
        .collect();
    for line in lines {
        writeln!(sink, "{line}")?;
    }
    Ok(())
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            _ => out.push(c),
        }
    }
    out
}

/// Directed graph with a synthetic `root`. Hot nodes are filled; cold
/// ancestors whose counters are not tracked are dashed.
pub fn write_dot<W: Write>(tree: &ExportTree, symbols: &SymbolTable, mut sink: W) -> Result<()> {
    writeln!(sink, "digraph hcct {{")?;
    writeln!(sink, "  node [shape=box];")?;
    writeln!(sink, "  root [label=\"root\"];")?;
    for (i, n) in tree.nodes.iter().enumerate() {
        let name = dot_escape(&symbols.name(n.frame.routine));
        let metric = if n.tracked { format!("{}±{}", n.count, n.error_bound) } else { "untracked".to_owned() };
        let style = match (n.classification, n.tracked) {
            (Classification::Hot, _) => ", style=filled, fillcolor=\"#f4a582\"",
            (Classification::ColdAncestor, false) => ", style=dashed",
            (Classification::ColdAncestor, true) => "",
        };
        writeln!(sink, "  n{i} [label=\"{name}@{}\\n{metric}\"{style}];", n.frame.call_site)?;
    }
    for (i, n) in tree.nodes.iter().enumerate() {
        match n.parent {
            Some(p) => writeln!(sink, "  n{p} -> n{i};")?,
            None => writeln!(sink, "  root -> n{i};")?,
        }
    }
    writeln!(sink, "}}")?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonNode {
    index: usize,
    parent: Option<usize>,
    routine: u32,
    call_site: u32,
    count: u64,
    error_bound: u64,
    classification: JsonClass,
    tracked: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum JsonClass {
    Hot,
    ColdAncestor,
}

/// One JSON object per node, in preorder.
pub fn write_json_lines<W: Write>(tree: &ExportTree, mut sink: W) -> Result<()> {
    for (index, n) in tree.nodes.iter().enumerate() {
        let obj = JsonNode {
            index,
            parent: n.parent,
            routine: n.frame.routine.0,
            call_site: n.frame.call_site.0,
            count: n.count,
            error_bound: n.error_bound,
            classification: match n.classification {
                Classification::Hot => JsonClass::Hot,
                Classification::ColdAncestor => JsonClass::ColdAncestor,
            },
            tracked: n.tracked,
        };
        serde_json::to_writer(&mut sink, &obj).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses [`write_json_lines`] output back into a tree.
///
/// Indices must count up from zero, parents must precede their children and
/// no parent may have two children with the same frame.
pub fn read_json_lines<R: BufRead>(source: R) -> Result<ExportTree> {
    let mut nodes: Vec<ExportNode> = Vec::new();
    let mut seen: BTreeSet<(Option<usize>, Frame)> = BTreeSet::new();
    for (i, line) in source.split(b'\n').enumerate() {
        let line = line?;
        let malformed = |reason: String| Error::MalformedRecord { line: i + 1, reason };
        let obj: JsonNode = serde_json::from_slice(&line).map_err(|e| malformed(e.to_string()))?;
        if obj.index != nodes.len() {
            return Err(malformed(format!("expected index {}, found {}", nodes.len(), obj.index)));
        }
        if let Some(p) = obj.parent {
            if p >= obj.index {
                return Err(malformed(format!("parent {p} does not precede node {}", obj.index)));
            }
        }
        let frame = Frame { routine: RoutineId(obj.routine), call_site: CallSiteId(obj.call_site) };
        if !seen.insert((obj.parent, frame)) {
            return Err(malformed("duplicate child context".into()));
        }
        nodes.push(ExportNode {
            frame,
            parent: obj.parent,
            count: obj.count,
            error_bound: obj.error_bound,
            classification: match obj.classification {
                JsonClass::Hot => Classification::Hot,
                JsonClass::ColdAncestor => Classification::ColdAncestor,
            },
            tracked: obj.tracked,
        });
    }
    Ok(ExportTree { nodes })
}

/// `key: value` header lines followed by one `context:` line per node.
pub fn write_report<W: Write>(
    header: &[(&str, String)],
    tree: &ExportTree,
    symbols: &SymbolTable,
    mut sink: W,
) -> Result<()> {
    for (k, v) in header {
        writeln!(sink, "{k}: {v}")?;
    }
    writeln!(sink, "hcct_nodes: {}", tree.len())?;
    let hot = tree.nodes.iter().filter(|n| n.classification == Classification::Hot).count();
    writeln!(sink, "hot_contexts: {hot}")?;
    for (i, n) in tree.nodes.iter().enumerate() {
        let stack = tree.stack_names(i, symbols);
        let class = n.classification.as_str();
        if n.tracked {
            writeln!(sink, "context: {stack} class={class} count={} error={}", n.count, n.error_bound)?;
        } else {
            writeln!(sink, "context: {stack} class={class} count=untracked")?;
        }
    }
    Ok(())
}

/// Header fields shared by streaming reports.
pub fn report_header(report: &HcctReport) -> Vec<(&'static str, String)> {
    vec![
        ("n_events", report.n_events.to_string()),
        ("phi", report.phi.to_string()),
        ("epsilon", report.epsilon.to_string()),
        ("pool_capacity", report.pool_capacity.to_string()),
        ("monitored", report.monitored.to_string()),
        ("mcct_live_nodes", report.mcct_live_nodes.to_string()),
        ("mcct_peak_nodes", report.mcct_peak_nodes.to_string()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cct_exact::build_exact_cct;
    use crate::hcct_builder::HcctBuilder;
    use crate::trace::example_trace;

    fn example_tree() -> ExportTree {
        let mut b = HcctBuilder::with_capacity(Fraction::new(1, 4).unwrap(), 3);
        b.run(&example_trace(8).unwrap()).unwrap();
        ExportTree::from_report(&b.query_hcct(Fraction::new(1, 2).unwrap()).unwrap())
    }

    fn to_string(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut out = Vec::new();
        f(&mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn folded_example() {
        let tree = example_tree();
        let s = to_string(|w| write_folded(&tree, &SymbolTable::example(), w));
        assert_eq!(s, "main;q 6\n");
        let s = to_string(|w| write_folded(&tree, &SymbolTable::new(), w));
        assert_eq!(s, "0;2 6\n");
    }

    #[test]
    fn empty_tree_exports() {
        let tree = ExportTree::default();
        assert_eq!(to_string(|w| write_folded(&tree, &SymbolTable::new(), w)), "");
        assert_eq!(to_string(|w| write_json_lines(&tree, w)), "");
        assert!(to_string(|w| write_dot(&tree, &SymbolTable::new(), w)).starts_with("digraph hcct {"));
    }

    #[test]
    fn dot_example() {
        let s = to_string(|w| write_dot(&example_tree(), &SymbolTable::example(), w));
        assert_eq!(
            s,
            "digraph hcct {\n  node [shape=box];\n  root [label=\"root\"];\n  \
             n0 [label=\"main@0\\n1±0\"];\n  \
             n1 [label=\"q@2\\n6±0\", style=filled, fillcolor=\"#f4a582\"];\n  \
             root -> n0;\n  n0 -> n1;\n}\n"
        );
    }

    #[test]
    fn json_lines_example_and_reimport() {
        let tree = example_tree();
        let s = to_string(|w| write_json_lines(&tree, w));
        assert_eq!(
            s.lines().next().unwrap(),
            r#"{"index":0,"parent":null,"routine":0,"call_site":0,"count":1,"error_bound":0,"classification":"cold-ancestor","tracked":true}"#
        );
        assert_eq!(read_json_lines(s.as_bytes()).unwrap(), tree);
    }

    #[test]
    fn json_lines_rejects_bad_structure() {
        let node = |i: usize, p: &str, r: u32| {
            format!(
                r#"{{"index":{i},"parent":{p},"routine":{r},"call_site":0,"count":1,"error_bound":0,"classification":"hot","tracked":true}}"#
            )
        };
        for bad in [
            node(1, "null", 0),
            format!("{}\n{}", node(0, "null", 0), node(1, "1", 1)),
            format!("{}\n{}", node(0, "null", 0), node(1, "null", 0)),
            format!("{}\n\n", node(0, "null", 0)),
            r#"{"index":0}"#.to_owned(),
            node(0, "null", 0).replace("hot", "warm"),
            node(0, "null", 0).replace("}", r#","extra":1}"#),
        ] {
            assert!(read_json_lines(bad.as_bytes()).is_err(), "{bad}");
        }
    }

    #[test]
    fn report_text_example() {
        let mut b = HcctBuilder::with_capacity(Fraction::new(1, 4).unwrap(), 3);
        b.run(&example_trace(8).unwrap()).unwrap();
        let report = b.query_hcct(Fraction::new(1, 2).unwrap()).unwrap();
        let tree = ExportTree::from_report(&report);
        let s = to_string(|w| write_report(&report_header(&report), &tree, &SymbolTable::example(), w));
        assert_eq!(
            s,
            "n_events: 8\nphi: 1/2\nepsilon: 1/4\npool_capacity: 3\nmonitored: 3\n\
             mcct_live_nodes: 3\nmcct_peak_nodes: 3\nhcct_nodes: 2\nhot_contexts: 1\n\
             context: main class=cold-ancestor count=1 error=0\n\
             context: main;q class=hot count=6 error=0\n"
        );
    }

    #[test]
    fn exact_export_matches_hcct() {
        let cct = build_exact_cct(&example_trace(8).unwrap()).unwrap();
        let tree = ExportTree::from_exact(&cct, Fraction::new(1, 2).unwrap(), true);
        assert_eq!(tree, example_tree());
        let full = ExportTree::from_exact(&cct, Fraction::ZERO, true);
        assert_eq!(full.len(), 3);
        assert!(full.nodes.iter().all(|n| n.classification == Classification::Hot));
    }
}
