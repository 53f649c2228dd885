//! Dinic max-flow on integer capacities.

use std::collections::VecDeque;

/// Capacity treated as infinite; sums of finite capacities must stay below.
pub const INFINITE: i64 = i64::MAX / 4;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { arcs: Vec::new(), adjacency: vec![Vec::new(); nodes] }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds `u → v` with capacity `cap` and `v → u` with capacity `reverse`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64, reverse: i64) {
        debug_assert!(cap >= 0 && reverse >= 0);
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap: reverse });
        self.adjacency[u].push(id);
        self.adjacency[v].push(id + 1);
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.node_count()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adjacency[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && level[arc.to] == u32::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    // iterative blocking-flow search along the level graph
    fn augment(&mut self, s: usize, t: usize, level: &[u32], next: &mut [usize]) -> i64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = path.iter().map(|&a| self.arcs[a].cap).min().unwrap_or(0);
                for &a in &path {
                    self.arcs[a].cap -= push;
                    self.arcs[a ^ 1].cap += push;
                }
                return push;
            }
            let mut advanced = false;
            while next[u] < self.adjacency[u].len() {
                let a = self.adjacency[u][next[u]];
                let arc = &self.arcs[a];
                if arc.cap > 0 && level[arc.to] == level[u] + 1 {
                    path.push(a);
                    u = arc.to;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // dead end: retreat
                match path.pop() {
                    None => return 0,
                    Some(a) => {
                        u = self.arcs[a ^ 1].to;
                        next[u] += 1;
                    }
                }
            }
        }
    }

    /// Maximum flow value from `s` to `t`; leaves the residual graph behind.
    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0i64;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0usize; self.node_count()];
            loop {
                let pushed = self.augment(s, t, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual graph: the source side of
    /// the minimal minimum cut.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.adjacency[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}
