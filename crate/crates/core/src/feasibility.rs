//! Exact feasibility of the balanced marginal constraints.
//!
//! A plan with row sums `u~`, column sums `v~`, and zeros on the pattern
//! exists iff the maximum flow from a super-source (arcs of capacity `u~_i`)
//! through the allowed pairs (unbounded arcs) to a super-sink (arcs of
//! capacity `v~_j`) saturates every source arc.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

/// Relative tolerance on `|sum(u) - sum(v)|` for balance.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Decides whether the exact-marginal plan set is non-empty, with the
/// default balance tolerance.
pub fn check_feasibility_exact(inst: &ProblemInstance) -> Result<Feasibility> {
    check_feasibility_with(inst, BALANCE_TOLERANCE)
}

pub fn check_feasibility_with(inst: &ProblemInstance, rel_tol: f64) -> Result<Feasibility> {
    let marginals = inst.marginals();
    let (source_mass, target_mass) = (marginals.source_mass(), marginals.target_mass());
    if !marginals.is_balanced(rel_tol) {
        return Err(Error::UnbalancedInput {
            source_mass,
            target_mass,
        });
    }

    let (m, n) = (inst.rows(), inst.cols());
    let source = m + n;
    let sink = source + 1;
    let mut net = FlowNetwork::new(m + n + 2);
    for (i, &u) in inst.u_tilde().iter().enumerate() {
        net.add_arc(source, i, u);
    }
    for (j, &v) in inst.v_tilde().iter().enumerate() {
        net.add_arc(m + j, sink, v);
    }
    let support = inst.support();
    for e in 0..support.len() {
        let (i, j) = support.coords(e);
        net.add_arc(i, m + j, f64::INFINITY);
    }

    let flow = net.max_flow(source, sink, source_mass * f64::EPSILON);
    if flow >= source_mass * (1.0 - rel_tol) {
        Ok(Feasibility::Feasible)
    } else {
        Ok(Feasibility::Infeasible)
    }
}

struct Arc {
    to: usize,
    cap: f64,
}

/// Dinic's algorithm on real capacities. Residuals at or below `eps` are
/// treated as saturated.
struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0.0 });
    }

    fn levels(&self, s: usize, t: usize, eps: f64) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.adj[x] {
                let arc = &self.arcs[a];
                if arc.cap > eps && level[arc.to] == usize::MAX {
                    level[arc.to] = level[x] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn augment(
        &mut self,
        x: usize,
        t: usize,
        pushed: f64,
        level: &[usize],
        next: &mut [usize],
        eps: f64,
    ) -> f64 {
        if x == t {
            return pushed;
        }
        while next[x] < self.adj[x].len() {
            let a = self.adj[x][next[x]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > eps && level[to] == level[x] + 1 {
                let got = self.augment(to, t, pushed.min(cap), level, next, eps);
                if got > 0.0 {
                    self.arcs[a].cap -= got;
                    self.arcs[a ^ 1].cap += got;
                    return got;
                }
            }
            next[x] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.levels(s, t, eps) {
            let mut next = vec![0; self.adj.len()];
            loop {
                let got = self.augment(s, t, f64::INFINITY, &level, &mut next, eps);
                if got <= eps {
                    break;
                }
                total += got;
            }
        }
        total
    }
}
