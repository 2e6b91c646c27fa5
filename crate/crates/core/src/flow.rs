//! Dinic max-flow on integer capacities, plus the scaling helpers used to run
//! it on probabilities.

use std::collections::VecDeque;

/// Probabilities are scaled to integers at this resolution before running
/// max-flow.
pub const FLOW_RESOLUTION: f64 = 1e-12;

pub const INFINITE: i64 = i64::MAX / 4;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

/// Result of a max-flow run.
#[derive(Debug, Clone)]
pub struct MaxFlow {
    pub value: i64,
    /// Nodes reachable from the source in the residual graph (a minimum cut).
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { edges: Vec::new(), adjacency: vec![Vec::new(); nodes] }
    }

    pub fn nodes(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds an arc and returns its handle for [`FlowNetwork::flow_on`].
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.adjacency[from].push(id);
        self.edges.push(Edge { to: from, cap: 0 });
        self.adjacency[to].push(id + 1);
        id
    }

    /// Flow currently carried by an arc.
    pub fn flow_on(&self, edge: usize) -> i64 {
        self.edges[edge + 1].cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> MaxFlow {
        let n = self.nodes();
        let mut total: i64 = 0;
        let mut level = vec![-1i64; n];
        loop {
            level.iter_mut().for_each(|l| *l = -1);
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adjacency[u] {
                    let Edge { to, cap } = self.edges[e];
                    if cap > 0 && level[to] < 0 {
                        level[to] = level[u] + 1;
                        queue.push_back(to);
                    }
                }
            }
            if level[sink] < 0 {
                break;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(source, sink, INFINITE, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        let source_side = level.iter().map(|l| *l >= 0).collect();
        MaxFlow { value: total, source_side }
    }

    fn augment(&mut self, u: usize, sink: usize, limit: i64, level: &[i64], next: &mut [usize]) -> i64 {
        if u == sink {
            return limit;
        }
        while next[u] < self.adjacency[u].len() {
            let e = self.adjacency[u][next[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > 0 && level[to] == level[u] + 1 {
                let pushed = self.augment(to, sink, limit.min(cap), level, next);
                if pushed > 0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }
}

/// Probability to integer capacity.
pub fn to_units(p: f64) -> i64 {
    (p.max(0.0) / FLOW_RESOLUTION).round() as i64
}

pub fn from_units(u: i64) -> f64 {
    u as f64 * FLOW_RESOLUTION
}
