//! Network-flow primitives: Dinic maximum flow on integer capacities and
//! successive-shortest-path minimum-cost flow on real capacities.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    rev: usize,
    cap: i64,
}

/// Maximum flow with integer capacities.
#[derive(Clone, Debug)]
pub struct MaxFlow {
    adj: Vec<Vec<Edge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl MaxFlow {
    pub fn new(n: usize) -> Self {
        MaxFlow {
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    /// Returns a handle `(from, index)` for reading the edge's flow later.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> (usize, usize) {
        let a = self.adj[from].len();
        let b = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge { to, rev: b, cap });
        self.adj[to].push(Edge {
            to: from,
            rev: a,
            cap: 0,
        });
        (from, a)
    }

    /// Flow currently on an edge returned by [`MaxFlow::add_edge`].
    pub fn flow(&self, handle: (usize, usize)) -> i64 {
        let e = &self.adj[handle.0][handle.1];
        self.adj[e.to][e.rev].cap
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for e in &self.adj[v] {
                if e.cap > 0 && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    q.push_back(e.to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, f: i64) -> i64 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.adj[v].len() {
            let i = self.iter[v];
            let (to, cap) = (self.adj[v][i].to, self.adj[v][i].cap);
            if cap > 0 && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, f.min(cap));
                if d > 0 {
                    self.adj[v][i].cap -= d;
                    let rev = self.adj[v][i].rev;
                    self.adj[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    pub fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }
}

const EPS: f64 = 1e-13;

#[derive(Clone, Debug)]
struct CostEdge {
    to: usize,
    rev: usize,
    cap: f64,
    cost: i64,
    forward: bool,
}

/// Minimum-cost flow with nonnegative integer edge costs.
#[derive(Clone, Debug)]
pub struct MinCostFlow {
    adj: Vec<Vec<CostEdge>>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: i64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MinCostFlow {
    pub fn new(n: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: i64) -> (usize, usize) {
        assert!(cost >= 0, "edge costs must be nonnegative");
        let a = self.adj[from].len();
        let b = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(CostEdge {
            to,
            rev: b,
            cap,
            cost,
            forward: true,
        });
        self.adj[to].push(CostEdge {
            to: from,
            rev: a,
            cap: 0.0,
            cost: -cost,
            forward: false,
        });
        (from, a)
    }

    pub fn flow(&self, handle: (usize, usize)) -> f64 {
        let e = &self.adj[handle.0][handle.1];
        self.adj[e.to][e.rev].cap
    }

    /// Positive-flow forward edges leaving `v`: (head, flow, cost).
    pub fn out_flows(&self, v: usize) -> impl Iterator<Item = (usize, f64, i64)> + '_ {
        self.adj[v].iter().filter(|e| e.forward).filter_map(move |e| {
            let f = self.adj[e.to][e.rev].cap;
            (f > EPS).then_some((e.to, f, e.cost))
        })
    }

    /// Push up to `limit` units from `s` to `t` at minimum cost; returns
    /// (flow, cost).
    pub fn run(&mut self, s: usize, t: usize, limit: f64) -> (f64, f64) {
        let n = self.adj.len();
        let mut potential = vec![0i64; n];
        let mut flow = 0.0;
        let mut cost = 0.0;
        let mut dist = vec![i64::MAX; n];
        let mut prev: Vec<(usize, usize)> = vec![(usize::MAX, 0); n];
        while flow < limit - EPS {
            dist.iter_mut().for_each(|d| *d = i64::MAX);
            dist[s] = 0;
            let mut heap = BinaryHeap::from([State { dist: 0, node: s }]);
            while let Some(State { dist: d, node: v }) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for (i, e) in self.adj[v].iter().enumerate() {
                    if e.cap > EPS {
                        let nd = d + e.cost + potential[v] - potential[e.to];
                        if nd < dist[e.to] {
                            dist[e.to] = nd;
                            prev[e.to] = (v, i);
                            heap.push(State {
                                dist: nd,
                                node: e.to,
                            });
                        }
                    }
                }
            }
            if dist[t] == i64::MAX {
                break;
            }
            for v in 0..n {
                if dist[v] < i64::MAX {
                    potential[v] += dist[v];
                }
            }
            let mut push = limit - flow;
            let mut v = t;
            while v != s {
                let (u, i) = prev[v];
                push = push.min(self.adj[u][i].cap);
                v = u;
            }
            let mut v = t;
            let mut path_cost = 0i64;
            while v != s {
                let (u, i) = prev[v];
                self.adj[u][i].cap -= push;
                path_cost += self.adj[u][i].cost;
                let rev = self.adj[u][i].rev;
                self.adj[v][rev].cap += push;
                v = u;
            }
            flow += push;
            cost += push * path_cost as f64;
        }
        (flow, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxflow_small() {
        let mut g = MaxFlow::new(4);
        g.add_edge(0, 1, 3);
        g.add_edge(0, 2, 2);
        let h = g.add_edge(1, 2, 5);
        g.add_edge(1, 3, 2);
        g.add_edge(2, 3, 3);
        assert_eq!(g.run(0, 3), 5);
        assert!(g.flow(h) >= 0);
    }

    #[test]
    fn transport_small() {
        // supplies (0.5, 0.5) at nodes 1,2; demands (0.2, 0.8) at nodes 3,4
        let mut g = MinCostFlow::new(6);
        g.add_edge(0, 1, 0.5, 0);
        g.add_edge(0, 2, 0.5, 0);
        g.add_edge(3, 5, 0.2, 0);
        g.add_edge(4, 5, 0.8, 0);
        g.add_edge(1, 3, f64::INFINITY, 0);
        g.add_edge(1, 4, f64::INFINITY, 1);
        g.add_edge(2, 3, f64::INFINITY, 1);
        g.add_edge(2, 4, f64::INFINITY, 0);
        let (f, c) = g.run(0, 5, 1.0);
        assert!((f - 1.0).abs() < 1e-12);
        assert!((c - 0.3).abs() < 1e-12);
    }
}
