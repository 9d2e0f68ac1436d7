//! Exact calling context trees, used as ground truth.

use crate::error::{Error, Result};
use crate::fraction::{hot_threshold, Fraction};
use crate::trace::{Frame, Trace, TraceEvent};

/// Index of a node inside one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct CctNode {
    frame: Frame,
    count: u64,
    parent: u32,
    first_child: u32,
    next_sibling: u32,
}

impl CctNode {
    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// A complete calling context tree with one frequency counter per context.
///
/// Node 0 is a synthetic root with count 0; it does not correspond to any
/// call and does not contribute to `n_events`.
#[derive(Debug, Clone)]
pub struct ExactCct {
    nodes: Vec<CctNode>,
    n_events: u64,
}

impl ExactCct {
    fn empty() -> Self {
        ExactCct {
            nodes: vec![CctNode {
                frame: Frame::new(0, 0),
                count: 0,
                parent: NIL,
                first_child: NIL,
                next_sibling: NIL,
            }],
            n_events: 0,
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    /// Number of calls the tree was built from.
    pub fn n_events(&self) -> u64 {
        self.n_events
    }

    /// Number of contexts, excluding the root.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, id: NodeId) -> &CctNode {
        &self.nodes[id.index()]
    }

    pub fn count(&self, id: NodeId) -> u64 {
        self.nodes[id.index()].count
    }

    pub fn frame(&self, id: NodeId) -> Frame {
        self.nodes[id.index()].frame
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.nodes[id.index()].parent;
        (p != NIL).then_some(NodeId(p))
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let mut cur = self.nodes[id.index()].first_child;
        std::iter::from_fn(move || {
            (cur != NIL).then(|| {
                let id = NodeId(cur);
                cur = self.nodes[cur as usize].next_sibling;
                id
            })
        })
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id.index()].first_child == NIL
    }

    /// All non-root nodes.
    pub fn contexts(&self) -> impl Iterator<Item = NodeId> {
        (1..self.nodes.len() as u32).map(NodeId)
    }

    /// Frames from the outermost call down to `id`.
    pub fn path(&self, id: NodeId) -> Vec<Frame> {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            path.push(self.frame(cur));
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn child_with(&self, id: NodeId, frame: Frame) -> Option<NodeId> {
        self.children(id).find(|&c| self.frame(c) == frame)
    }

    pub fn find_path(&self, path: &[Frame]) -> Option<NodeId> {
        path.iter().try_fold(self.root(), |node, &f| self.child_with(node, f))
    }

    /// Contexts with `count >= floor(phi * N)`, the threshold lifted to one
    /// when `min_one` is set.
    pub fn hot_set(&self, phi: Fraction, min_one: bool) -> Vec<NodeId> {
        if self.n_events == 0 {
            return Vec::new();
        }
        let threshold = hot_threshold(phi, self.n_events, min_one);
        self.contexts().filter(|&c| self.count(c) >= threshold).collect()
    }

    /// The minimal subtree spanning the hot contexts and the root.
    pub fn hcct(&self, phi: Fraction, min_one: bool) -> ExactCct {
        let mut keep = vec![false; self.nodes.len()];
        keep[0] = true;
        for hot in self.hot_set(phi, min_one) {
            let mut cur = hot.0;
            while cur != NIL && !keep[cur as usize] {
                keep[cur as usize] = true;
                cur = self.nodes[cur as usize].parent;
            }
        }
        self.restrict(&keep)
    }

    /// Copy of the nodes flagged in `keep`, which must be closed under
    /// parent. Node ids are renumbered so that parents precede children.
    fn restrict(&self, keep: &[bool]) -> ExactCct {
        let mut out = ExactCct::empty();
        out.n_events = self.n_events;
        let mut stack = vec![(NodeId::ROOT, NodeId::ROOT)];
        while let Some((src, dst)) = stack.pop() {
            let kids: Vec<NodeId> = self.children(src).filter(|c| keep[c.index()]).collect();
            for &c in kids.iter().rev() {
                let new = out.push_child(dst, self.frame(c));
                out.nodes[new.index()].count = self.count(c);
                stack.push((c, new));
            }
        }
        out
    }

    /// Appends a child at the tail of `parent`'s sibling list.
    fn push_child(&mut self, parent: NodeId, frame: Frame) -> NodeId {
        let id = self.nodes.len() as u32;
        self.nodes.push(CctNode { frame, count: 0, parent: parent.0, first_child: NIL, next_sibling: NIL });
        let first = self.nodes[parent.index()].first_child;
        if first == NIL {
            self.nodes[parent.index()].first_child = id;
        } else {
            let mut cur = first;
            while self.nodes[cur as usize].next_sibling != NIL {
                cur = self.nodes[cur as usize].next_sibling;
            }
            self.nodes[cur as usize].next_sibling = id;
        }
        NodeId(id)
    }
}

/// Cursor-driven incremental construction.
#[derive(Debug, Clone)]
pub struct ExactCctBuilder {
    tree: ExactCct,
    cursor: u32,
    events: usize,
}

impl Default for ExactCctBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactCctBuilder {
    pub fn new() -> Self {
        ExactCctBuilder { tree: ExactCct::empty(), cursor: 0, events: 0 }
    }

    pub fn on_event(&mut self, event: TraceEvent) -> Result<()> {
        match event {
            TraceEvent::Call(frame) => {
                let parent = NodeId(self.cursor);
                // New children go to the head of the sibling list.
                let child = match self.tree.child_with(parent, frame) {
                    Some(c) => c,
                    None => {
                        let id = self.tree.nodes.len() as u32;
                        let head = self.tree.nodes[parent.index()].first_child;
                        self.tree.nodes.push(CctNode {
                            frame,
                            count: 0,
                            parent: parent.0,
                            first_child: NIL,
                            next_sibling: head,
                        });
                        self.tree.nodes[parent.index()].first_child = id;
                        NodeId(id)
                    }
                };
                self.tree.nodes[child.index()].count += 1;
                self.tree.n_events += 1;
                self.cursor = child.0;
            }
            TraceEvent::Return => {
                if self.cursor == 0 {
                    return Err(Error::UnbalancedTrace { event: self.events });
                }
                self.cursor = self.tree.nodes[self.cursor as usize].parent;
            }
        }
        self.events += 1;
        Ok(())
    }

    /// The tree built so far.
    pub fn tree(&self) -> &ExactCct {
        &self.tree
    }

    pub fn cursor(&self) -> NodeId {
        NodeId(self.cursor)
    }

    pub fn finish(self) -> ExactCct {
        self.tree
    }
}

pub fn build_exact_cct(trace: &Trace) -> Result<ExactCct> {
    let mut builder = ExactCctBuilder::new();
    for &event in trace {
        builder.on_event(event)?;
    }
    Ok(builder.finish())
}

/// Hot contexts under the default threshold rule (at least one occurrence).
pub fn exact_hot_set(cct: &ExactCct, phi: Fraction) -> Vec<NodeId> {
    cct.hot_set(phi, true)
}

pub fn exact_hcct(cct: &ExactCct, phi: Fraction) -> ExactCct {
    cct.hcct(phi, true)
}
