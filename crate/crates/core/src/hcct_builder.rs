//! Online maintenance of the monitored calling context tree (MCCT) and its
//! reduction to a `(phi, epsilon)`-HCCT.
//!
//! The MCCT is the smallest subtree of the full calling context tree that
//! connects the root to every context in the monitor pool, plus the path to
//! the current context. Each call moves the cursor down (creating the child
//! if needed) and feeds the new context to the stream summary; if that evicts
//! a victim, the victim and any ancestors that are left as unmonitored leaves
//! are unlinked. Ancestors of the cursor always have the cursor below them,
//! so the walk never reaches the current path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::stream_summary::{CounterStore, MonitorPool, StreamSummary};
use crate::trace::{Frame, Trace, TraceEvent};

const NIL: u32 = u32::MAX;

/// Handle to a live MCCT node. Handles of pruned nodes are recycled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct McctNodeId(u32);

impl McctNodeId {
    pub const ROOT: McctNodeId = McctNodeId(0);
}

#[derive(Debug, Clone)]
struct McctNode {
    frame: Frame,
    count: u64,
    error_bound: u64,
    monitored: bool,
    parent: u32,
    first_child: u32,
    next_sibling: u32,
    prev_sibling: u32,
}

impl McctNode {
    fn new(frame: Frame, parent: u32) -> Self {
        McctNode {
            frame,
            count: 0,
            error_bound: 0,
            monitored: false,
            parent,
            first_child: NIL,
            next_sibling: NIL,
            prev_sibling: NIL,
        }
    }
}

/// Node storage for the MCCT. Doubles as the counter store of the monitor
/// pool: counters and monitored flags live in the nodes.
#[derive(Debug, Clone)]
pub struct McctArena {
    nodes: Vec<McctNode>,
    free: Vec<u32>,
}

impl McctArena {
    fn new() -> Self {
        McctArena { nodes: vec![McctNode::new(Frame::new(0, 0), NIL)], free: Vec::new() }
    }

    fn alloc(&mut self, frame: Frame, parent: u32) -> u32 {
        let head = self.nodes[parent as usize].first_child;
        let mut node = McctNode::new(frame, parent);
        node.next_sibling = head;
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        if head != NIL {
            self.nodes[head as usize].prev_sibling = id;
        }
        self.nodes[parent as usize].first_child = id;
        id
    }

    /// Unlinks a leaf from its parent's child list.
    fn remove_leaf(&mut self, id: u32) {
        let McctNode { parent, prev_sibling, next_sibling, first_child, .. } = self.nodes[id as usize];
        debug_assert_eq!(first_child, NIL);
        if prev_sibling == NIL {
            self.nodes[parent as usize].first_child = next_sibling;
        } else {
            self.nodes[prev_sibling as usize].next_sibling = next_sibling;
        }
        if next_sibling != NIL {
            self.nodes[next_sibling as usize].prev_sibling = prev_sibling;
        }
        self.nodes[id as usize].parent = NIL;
        self.free.push(id);
    }

    fn child_with(&self, parent: u32, frame: Frame) -> Option<u32> {
        let mut cur = self.nodes[parent as usize].first_child;
        while cur != NIL {
            if self.nodes[cur as usize].frame == frame {
                return Some(cur);
            }
            cur = self.nodes[cur as usize].next_sibling;
        }
        None
    }

    fn children(&self, id: u32) -> impl Iterator<Item = u32> + '_ {
        let mut cur = self.nodes[id as usize].first_child;
        std::iter::from_fn(move || {
            (cur != NIL).then(|| {
                let id = cur;
                cur = self.nodes[cur as usize].next_sibling;
                id
            })
        })
    }

    fn is_leaf(&self, id: u32) -> bool {
        self.nodes[id as usize].first_child == NIL
    }

    /// Live nodes in preorder, root first.
    fn preorder(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            out.push(id);
            let kids: Vec<u32> = self.children(id).collect();
            stack.extend(kids.into_iter().rev());
        }
        out
    }
}

impl CounterStore for McctArena {
    type Key = McctNodeId;

    fn count(&self, key: McctNodeId) -> u64 {
        self.nodes[key.0 as usize].count
    }

    fn error_bound(&self, key: McctNodeId) -> u64 {
        self.nodes[key.0 as usize].error_bound
    }

    fn is_monitored(&self, key: McctNodeId) -> bool {
        self.nodes[key.0 as usize].monitored
    }

    fn increment(&mut self, key: McctNodeId) {
        self.nodes[key.0 as usize].count += 1;
    }

    fn monitor(&mut self, key: McctNodeId, count: u64, error_bound: u64) {
        let node = &mut self.nodes[key.0 as usize];
        node.count = count;
        node.error_bound = error_bound;
        node.monitored = true;
    }

    fn unmonitor(&mut self, key: McctNodeId) {
        self.nodes[key.0 as usize].monitored = false;
    }
}

/// Streaming builder. Generic over the frequent-items algorithm; the default
/// is Space-Saving on a lazy priority queue.
#[derive(Debug, Clone)]
pub struct HcctBuilder<P = MonitorPool<McctNodeId>> {
    arena: McctArena,
    cursor: u32,
    pool: P,
    n_events: u64,
    events_seen: usize,
    created: u64,
    pruned: u64,
    peak_live: u64,
    work: u64,
    min_threshold_one: bool,
}

impl HcctBuilder {
    /// Builder with `ceil(1/epsilon)` monitor slots.
    pub fn new(epsilon: Fraction) -> Result<Self> {
        Ok(Self::with_summary(MonitorPool::new(epsilon)?))
    }

    /// Builder with an explicit number of monitor slots.
    pub fn with_capacity(epsilon: Fraction, capacity: usize) -> Self {
        Self::with_summary(MonitorPool::with_capacity(epsilon, capacity))
    }

    pub fn set_min_threshold_one(&mut self, on: bool) {
        self.min_threshold_one = on;
        self.pool.set_min_threshold_one(on);
    }
}

impl<P: StreamSummary<McctArena>> HcctBuilder<P> {
    pub fn with_summary(pool: P) -> Self {
        HcctBuilder {
            arena: McctArena::new(),
            cursor: 0,
            pool,
            n_events: 0,
            events_seen: 0,
            created: 0,
            pruned: 0,
            peak_live: 0,
            work: 0,
            min_threshold_one: true,
        }
    }

    pub fn on_event(&mut self, event: TraceEvent) -> Result<()> {
        match event {
            TraceEvent::Call(frame) => self.on_call(frame),
            TraceEvent::Return => {
                if self.cursor == 0 {
                    return Err(Error::UnbalancedTrace { event: self.events_seen });
                }
                self.cursor = self.arena.nodes[self.cursor as usize].parent;
            }
        }
        self.events_seen += 1;
        Ok(())
    }

    fn on_call(&mut self, frame: Frame) {
        let node = match self.arena.child_with(self.cursor, frame) {
            Some(node) => node,
            None => {
                self.created += 1;
                self.work += 1;
                self.peak_live = self.peak_live.max(self.created - self.pruned);
                self.arena.alloc(frame, self.cursor)
            }
        };
        self.cursor = node;
        self.n_events += 1;

        let outcome = self.pool.update(McctNodeId(node), &mut self.arena);
        for victim in outcome.victims().filter(|v| v.0 != node) {
            let mut v = victim.0;
            while v != 0 && self.arena.is_leaf(v) && !self.arena.nodes[v as usize].monitored {
                let parent = self.arena.nodes[v as usize].parent;
                self.arena.remove_leaf(v);
                self.pruned += 1;
                self.work += 1;
                v = parent;
            }
            self.work += 1;
        }
    }

    /// Feeds a whole trace, then returns the cursor to the root so that calls
    /// left open count as returned.
    pub fn run(&mut self, trace: &Trace) -> Result<()> {
        for &event in trace {
            self.on_event(event)?;
        }
        self.finish_stream();
        Ok(())
    }

    /// Applies implicit returns for every open call.
    pub fn finish_stream(&mut self) {
        self.cursor = 0;
    }

    /// Calls seen so far.
    pub fn n_events(&self) -> u64 {
        self.n_events
    }

    pub fn pool(&self) -> &P {
        &self.pool
    }

    pub fn cursor(&self) -> McctNodeId {
        McctNodeId(self.cursor)
    }

    pub fn created_nodes(&self) -> u64 {
        self.created
    }

    pub fn pruned_nodes(&self) -> u64 {
        self.pruned
    }

    /// Live nodes excluding the root.
    pub fn live_nodes(&self) -> u64 {
        self.created - self.pruned
    }

    pub fn peak_live_nodes(&self) -> u64 {
        self.peak_live
    }

    /// Node creations, removals and pruning-walk steps performed so far.
    pub fn structural_work(&self) -> u64 {
        self.work
    }

    /// Live non-root nodes in preorder.
    pub fn mcct_nodes(&self) -> Vec<McctNodeId> {
        self.arena.preorder().into_iter().skip(1).map(McctNodeId).collect()
    }

    pub fn frame(&self, id: McctNodeId) -> Frame {
        self.arena.nodes[id.0 as usize].frame
    }

    pub fn count(&self, id: McctNodeId) -> u64 {
        self.arena.nodes[id.0 as usize].count
    }

    pub fn error_bound(&self, id: McctNodeId) -> u64 {
        self.arena.nodes[id.0 as usize].error_bound
    }

    pub fn is_monitored(&self, id: McctNodeId) -> bool {
        self.arena.nodes[id.0 as usize].monitored
    }

    pub fn parent(&self, id: McctNodeId) -> Option<McctNodeId> {
        let p = self.arena.nodes[id.0 as usize].parent;
        (p != NIL).then_some(McctNodeId(p))
    }

    pub fn path(&self, id: McctNodeId) -> Vec<Frame> {
        let mut path = Vec::new();
        let mut cur = id.0;
        while cur != 0 {
            path.push(self.arena.nodes[cur as usize].frame);
            cur = self.arena.nodes[cur as usize].parent;
        }
        path.reverse();
        path
    }

    /// Marks the heavy hitters and every ancestor, indexed by arena slot.
    fn hcct_support(&self, phi: Fraction) -> Result<(Vec<bool>, Vec<bool>)> {
        let hits = self.pool.query(phi, &self.arena)?;
        let mut hot = vec![false; self.arena.nodes.len()];
        let mut keep = vec![false; self.arena.nodes.len()];
        keep[0] = true;
        for hit in hits {
            hot[hit.key.0 as usize] = true;
            let mut cur = hit.key.0;
            while !keep[cur as usize] {
                keep[cur as usize] = true;
                cur = self.arena.nodes[cur as usize].parent;
            }
        }
        Ok((hot, keep))
    }

    fn report_from(&self, phi: Fraction, hot: &[bool], keep: &[bool]) -> HcctReport {
        let mut nodes = Vec::new();
        let mut stack: Vec<(u32, Option<usize>)> =
            self.arena.children(0).filter(|&c| keep[c as usize]).map(|c| (c, None)).collect::<Vec<_>>();
        stack.reverse();
        while let Some((id, parent)) = stack.pop() {
            let n = &self.arena.nodes[id as usize];
            let index = nodes.len();
            nodes.push(ReportNode {
                frame: n.frame,
                parent,
                count: n.count,
                error_bound: n.error_bound,
                classification: if hot[id as usize] { Classification::Hot } else { Classification::ColdAncestor },
                monitored: n.monitored,
            });
            let kids: Vec<u32> = self.arena.children(id).filter(|&c| keep[c as usize]).collect();
            stack.extend(kids.into_iter().rev().map(|c| (c, Some(index))));
        }
        HcctReport {
            nodes,
            n_events: self.n_events,
            phi,
            epsilon: self.pool.epsilon(),
            pool_capacity: self.pool.capacity(),
            monitored: self.pool.monitored().len(),
            mcct_live_nodes: self.live_nodes(),
            mcct_peak_nodes: self.peak_live,
        }
    }

    /// Snapshot of the `(phi, epsilon)`-HCCT. The live MCCT is untouched, so
    /// the stream can continue afterwards.
    pub fn query_hcct(&self, phi: Fraction) -> Result<HcctReport> {
        let (hot, keep) = self.hcct_support(phi)?;
        Ok(self.report_from(phi, &hot, &keep))
    }

    /// End-of-stream query that prunes the MCCT in place instead of copying.
    pub fn finalize(mut self, phi: Fraction) -> Result<HcctReport> {
        self.finish_stream();
        let (hot, keep) = self.hcct_support(phi)?;
        // Reverse preorder visits children before parents.
        for id in self.arena.preorder().into_iter().rev() {
            if !keep[id as usize] {
                self.arena.remove_leaf(id);
                self.pruned += 1;
            }
        }
        Ok(self.report_from(phi, &hot, &keep))
    }

    /// Full structural check of the MCCT, for tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let order = self.arena.preorder();
        if order.len() as u64 - 1 != self.live_nodes() {
            return Err(format!("{} reachable nodes, counters say {}", order.len() - 1, self.live_nodes()));
        }
        if self.peak_live < self.live_nodes() {
            return Err("peak below live count".into());
        }

        let mut on_path = vec![false; self.arena.nodes.len()];
        let mut cur = self.cursor;
        while cur != NIL {
            on_path[cur as usize] = true;
            cur = self.arena.nodes[cur as usize].parent;
        }
        if !on_path[0] {
            return Err("cursor is detached from the root".into());
        }

        let mut reachable = vec![false; self.arena.nodes.len()];
        for &id in &order {
            reachable[id as usize] = true;
        }
        let monitored = self.pool.monitored();
        for &m in &monitored {
            if !reachable[m.0 as usize] {
                return Err(format!("monitored node {m:?} is not in the tree"));
            }
            let n = &self.arena.nodes[m.0 as usize];
            if !n.monitored {
                return Err(format!("pool entry {m:?} lacks the monitored flag"));
            }
            if n.count < n.error_bound {
                return Err(format!("node {m:?} count {} below its error bound {}", n.count, n.error_bound));
            }
        }
        let flagged = order.iter().filter(|&&id| self.arena.nodes[id as usize].monitored).count();
        if flagged != monitored.len() {
            return Err(format!("{flagged} flagged nodes but {} pool entries", monitored.len()));
        }

        // Post-order accumulation of "has a monitored node in its subtree".
        let mut covered = vec![false; self.arena.nodes.len()];
        for &id in order.iter().rev() {
            let n = &self.arena.nodes[id as usize];
            let mut frames = Vec::new();
            for c in self.arena.children(id) {
                covered[id as usize] |= covered[c as usize];
                frames.push(self.arena.nodes[c as usize].frame);
            }
            covered[id as usize] |= n.monitored;
            frames.sort();
            if frames.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("node {id} has duplicate children"));
            }
            if id != 0 && !covered[id as usize] && !on_path[id as usize] {
                return Err(format!("node {id} is neither monitored, above a monitored node, nor on the cursor path"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Returned by the heavy-hitter query.
    Hot,
    /// Kept only to connect hot descendants to the root.
    ColdAncestor,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Hot => "hot",
            Classification::ColdAncestor => "cold-ancestor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportNode {
    pub frame: Frame,
    /// Index of the parent in [`HcctReport::nodes`]; `None` below the root.
    pub parent: Option<usize>,
    pub count: u64,
    pub error_bound: u64,
    pub classification: Classification,
    /// Unmonitored cold ancestors keep whatever count they had when evicted;
    /// it carries no accuracy guarantee.
    pub monitored: bool,
}

/// A `(phi, epsilon)`-HCCT snapshot. Nodes are in preorder, so every parent
/// precedes its children.
#[derive(Debug, Clone, PartialEq)]
pub struct HcctReport {
    pub nodes: Vec<ReportNode>,
    pub n_events: u64,
    pub phi: Fraction,
    pub epsilon: Fraction,
    pub pool_capacity: usize,
    pub monitored: usize,
    pub mcct_live_nodes: u64,
    pub mcct_peak_nodes: u64,
}

impl HcctReport {
    pub fn hot_nodes(&self) -> impl Iterator<Item = (usize, &ReportNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.classification == Classification::Hot)
    }

    pub fn path(&self, index: usize) -> Vec<Frame> {
        let mut path = Vec::new();
        let mut cur = Some(index);
        while let Some(i) = cur {
            path.push(self.nodes[i].frame);
            cur = self.nodes[i].parent;
        }
        path.reverse();
        path
    }

    /// Flags nodes with no children in the report.
    pub fn leaf_mask(&self) -> Vec<bool> {
        let mut leaf = vec![true; self.nodes.len()];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                leaf[p] = false;
            }
        }
        leaf
    }
}
