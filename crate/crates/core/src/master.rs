//! Relaxed master problem: `max η` subject to a pool of submodular cuts and a
//! single knapsack row over binary `x`, solved by best-bound branch-and-bound.
//!
//! Every pool cut has nonnegative coefficients, so for each cut the
//! fractional knapsack over the free variables bounds any completion of a
//! node; the node bound is the minimum of those values over the pool.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::cuts::{dominates, SubmodularCut};
use crate::error::{input, Result};
use crate::subset::Subset;

/// The feasible region `{x : Σ a_j x_j ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Knapsack {
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl Knapsack {
    pub fn new(costs: Vec<f64>, budget: f64) -> Self {
        Self { costs, budget }
    }

    pub fn unit(n: usize, budget: f64) -> Self {
        Self { costs: vec![1.0; n], budget }
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn cost(&self, x: &Subset) -> f64 {
        x.iter().map(|j| self.costs[j]).sum()
    }

    pub fn is_feasible(&self, x: &Subset) -> bool {
        self.cost(x) <= self.budget + 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterStatus {
    Optimal,
    TimeLimit,
}

#[derive(Debug, Clone, Copy)]
pub struct MasterOptions {
    pub gap_tol: f64,
    /// Interpret `gap_tol` relative to the incumbent value.
    pub relative_gap: bool,
    pub time_limit: Option<Duration>,
    /// Return the lexicographically smallest optimal `x` (costs extra searches).
    pub lexicographic: bool,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-6, relative_gap: false, time_limit: None, lexicographic: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    /// Pool minimum at `x`.
    pub eta: f64,
    pub x: Subset,
    /// Upper bound on the master optimum.
    pub bound: f64,
    pub status: MasterStatus,
    pub nodes: u64,
}

/// Cut pool plus knapsack data.
#[derive(Debug, Clone)]
pub struct MasterState {
    knapsack: Knapsack,
    pool: Vec<SubmodularCut>,
    // per cut: free items by decreasing coefficient/cost ratio
    orders: Vec<Vec<u32>>,
    incumbent: Option<(f64, Subset)>,
    best_bound: f64,
}

impl MasterState {
    pub fn new(knapsack: Knapsack) -> Self {
        Self { knapsack, pool: Vec::new(), orders: Vec::new(), incumbent: None, best_bound: f64::INFINITY }
    }

    pub fn n(&self) -> usize {
        self.knapsack.len()
    }

    pub fn knapsack(&self) -> &Knapsack {
        &self.knapsack
    }

    pub fn pool(&self) -> &[SubmodularCut] {
        &self.pool
    }

    pub fn incumbent(&self) -> Option<&(f64, Subset)> {
        self.incumbent.as_ref()
    }

    pub fn best_bound(&self) -> f64 {
        self.best_bound
    }

    /// Pool minimum `min_c (constant_c + coef_c·x)`.
    pub fn evaluate(&self, x: &Subset) -> f64 {
        self.pool.iter().map(|c| c.rhs(x)).fold(f64::INFINITY, f64::min)
    }

    /// Appends `cut`. With `filter_dominated`, a cut dominated by a pool cut
    /// of the same generating set is rejected, and pool cuts of that set it
    /// dominates are dropped.
    pub fn add_cut(&mut self, cut: SubmodularCut, filter_dominated: bool) -> Result<bool> {
        if cut.ground_size() != self.n() {
            return input(format!("cut over {} variables, master has {}", cut.ground_size(), self.n()));
        }
        if cut.coefficients.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) || !cut.constant.is_finite() {
            return input("cut coefficients must be finite and nonnegative");
        }
        if filter_dominated {
            for old in self.pool.iter().filter(|c| c.generating_set == cut.generating_set) {
                if dominates(old, &cut)? {
                    return Ok(false);
                }
            }
            let mut k = 0;
            while k < self.pool.len() {
                if self.pool[k].generating_set == cut.generating_set && dominates(&cut, &self.pool[k])? {
                    self.pool.remove(k);
                    self.orders.remove(k);
                } else {
                    k += 1;
                }
            }
        }
        self.orders.push(ratio_order(&cut.coefficients, &self.knapsack.costs));
        self.pool.push(cut);
        Ok(true)
    }

    /// Solves the master to the requested tolerance.
    pub fn solve(&mut self, opts: &MasterOptions) -> Result<MasterSolution> {
        if self.pool.is_empty() {
            return input("the cut pool is empty; the master would be unbounded");
        }
        let deadline = opts.time_limit.map(|t| Instant::now() + t);
        let n = self.n();
        let search = Search::new(self, deadline);
        let (mut best_val, mut best_x) = search.greedy(&Subset::empty(n), &Subset::empty(n));
        let outcome = search.run(&Subset::empty(n), &Subset::empty(n), &mut best_val, &mut best_x, opts, None);

        if opts.lexicographic && outcome.status == MasterStatus::Optimal {
            // Fix variables front to back, preferring 0 while the optimum survives.
            let target = best_val - 1e-9;
            let mut ones = Subset::empty(n);
            let mut zeros = Subset::empty(n);
            for j in 0..n {
                if !self.knapsack.is_feasible(&ones.with(j)) {
                    zeros.insert(j);
                    continue;
                }
                zeros.insert(j);
                let (mut v, mut x) = search.greedy(&ones, &zeros);
                let found = v >= target
                    || search.run(&ones, &zeros, &mut v, &mut x, opts, Some(target)).reached_target;
                if !found {
                    zeros.remove(j);
                    ones.insert(j);
                }
            }
            let v = self.evaluate(&ones);
            if v >= target {
                best_val = v;
                best_x = ones;
            }
        }

        let bound = outcome.bound.max(best_val);
        self.incumbent = Some((best_val, best_x.clone()));
        self.best_bound = bound;
        Ok(MasterSolution { eta: best_val, x: best_x, bound, status: outcome.status, nodes: outcome.nodes })
    }
}

fn ratio_order(coefs: &[f64], costs: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..coefs.len() as u32).filter(|&j| coefs[j as usize] > 0.0).collect();
    idx.sort_by(|&a, &b| {
        let ra = coefs[a as usize] / costs[a as usize];
        let rb = coefs[b as usize] / costs[b as usize];
        rb.partial_cmp(&ra).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    idx
}

/// Bound of the node where `fixed_one` is forced in and `fixed_zero` out:
/// the minimum over cuts of the constant plus fixed coefficients plus the
/// fractional knapsack of the free coefficients. `-∞` if `fixed_one` does
/// not fit the budget.
pub fn node_bound(
    cuts: &[SubmodularCut],
    fixed_one: &Subset,
    fixed_zero: &Subset,
    knapsack: &Knapsack,
) -> f64 {
    let orders: Vec<Vec<u32>> = cuts.iter().map(|c| ratio_order(&c.coefficients, &knapsack.costs)).collect();
    bound_with_orders(cuts, &orders, knapsack, fixed_one, fixed_zero, f64::NEG_INFINITY)
}

// Stops early once the running minimum drops to `cutoff`.
fn bound_with_orders(
    cuts: &[SubmodularCut],
    orders: &[Vec<u32>],
    knapsack: &Knapsack,
    fixed_one: &Subset,
    fixed_zero: &Subset,
    cutoff: f64,
) -> f64 {
    let used = knapsack.cost(fixed_one);
    if used > knapsack.budget + 1e-9 {
        return f64::NEG_INFINITY;
    }
    let cap = knapsack.budget - used;
    let mut best = f64::INFINITY;
    for (cut, order) in cuts.iter().zip(orders) {
        let mut v = cut.rhs(fixed_one);
        let mut left = cap;
        for &j in order {
            let j = j as usize;
            if fixed_one.contains(j) || fixed_zero.contains(j) {
                continue;
            }
            let w = knapsack.costs[j];
            if w > cap + 1e-9 {
                continue;
            }
            if w <= left + 1e-9 {
                v += cut.coefficients[j];
                left -= w;
            } else {
                v += cut.coefficients[j] * left / w;
                break;
            }
        }
        best = best.min(v);
        if best <= cutoff {
            break;
        }
    }
    best
}

struct Node {
    bound: f64,
    depth: usize,
    seq: u64,
    ones: Subset,
    zeros: Subset,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Outcome {
    bound: f64,
    status: MasterStatus,
    nodes: u64,
    reached_target: bool,
}

struct Search<'a> {
    state: &'a MasterState,
    deadline: Option<Instant>,
}

impl<'a> Search<'a> {
    fn new(state: &'a MasterState, deadline: Option<Instant>) -> Self {
        Self { state, deadline }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Greedy completion: repeatedly add the affordable free item with the
    /// largest pool-minimum increase, smallest index on ties.
    fn greedy(&self, ones: &Subset, zeros: &Subset) -> (f64, Subset) {
        let ks = &self.state.knapsack;
        let mut x = ones.clone();
        if !ks.is_feasible(&x) {
            return (f64::NEG_INFINITY, x);
        }
        let mut used = ks.cost(&x);
        let mut vals: Vec<f64> = self.state.pool.iter().map(|c| c.rhs(&x)).collect();
        loop {
            let mut pick: Option<(usize, f64)> = None;
            for j in 0..ks.len() {
                if x.contains(j) || zeros.contains(j) || used + ks.costs[j] > ks.budget + 1e-9 {
                    continue;
                }
                let v = self
                    .state
                    .pool
                    .iter()
                    .zip(&vals)
                    .map(|(c, base)| base + c.coefficients[j])
                    .fold(f64::INFINITY, f64::min);
                if pick.map_or(true, |(_, best)| v > best) {
                    pick = Some((j, v));
                }
            }
            let Some((j, _)) = pick else { break };
            x.insert(j);
            used += ks.costs[j];
            for (val, c) in vals.iter_mut().zip(&self.state.pool) {
                *val += c.coefficients[j];
            }
        }
        (vals.into_iter().fold(f64::INFINITY, f64::min), x)
    }

    fn threshold(&self, incumbent: f64, opts: &MasterOptions) -> f64 {
        if opts.relative_gap {
            incumbent + opts.gap_tol * incumbent.abs().max(1e-10)
        } else {
            incumbent + opts.gap_tol
        }
    }

    /// Best-bound search below the node `(ones, zeros)`. With `target`, stops
    /// as soon as a solution of at least that value is found and prunes
    /// nodes that cannot reach it.
    fn run(
        &self,
        ones: &Subset,
        zeros: &Subset,
        best_val: &mut f64,
        best_x: &mut Subset,
        opts: &MasterOptions,
        target: Option<f64>,
    ) -> Outcome {
        let st = self.state;
        let ks = &st.knapsack;
        let n = ks.len();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        let mut nodes = 0u64;
        let mut pruned_max = f64::NEG_INFINITY;
        let prune_level = |inc: f64| match target {
            Some(t) => t - 1e-12,
            None => self.threshold(inc, opts),
        };

        let root = bound_with_orders(&st.pool, &st.orders, ks, ones, zeros, f64::NEG_INFINITY);
        heap.push(Node { bound: root, depth: 0, seq, ones: ones.clone(), zeros: zeros.clone() });

        while let Some(node) = heap.pop() {
            if target.is_some_and(|t| *best_val >= t) {
                return Outcome { bound: node.bound, status: MasterStatus::Optimal, nodes, reached_target: true };
            }
            let level = prune_level(*best_val);
            if node.bound <= level {
                pruned_max = pruned_max.max(node.bound);
                // Every remaining node is bounded by this one.
                break;
            }
            nodes += 1;
            if nodes % 256 == 0 && self.expired() {
                let open = heap.peek().map_or(node.bound, |t| t.bound.max(node.bound));
                return Outcome {
                    bound: open.max(pruned_max),
                    status: MasterStatus::TimeLimit,
                    nodes,
                    reached_target: false,
                };
            }

            let v = st.evaluate(&node.ones);
            if v > *best_val {
                *best_val = v;
                *best_x = node.ones.clone();
            }

            let used = ks.cost(&node.ones);
            let cap = ks.budget - used;
            let mut zeros = node.zeros.clone();
            let mut free = Vec::new();
            let mut free_cost = 0.0;
            for j in 0..n {
                if node.ones.contains(j) || zeros.contains(j) {
                    continue;
                }
                if ks.costs[j] > cap + 1e-9 {
                    zeros.insert(j);
                } else {
                    free.push(j);
                    free_cost += ks.costs[j];
                }
            }
            if free.is_empty() {
                continue;
            }
            if free_cost <= cap + 1e-9 {
                // Everything fits: taking all free items is optimal below this node.
                let all = free.iter().fold(node.ones.clone(), |s, &j| s.with(j));
                let v = st.evaluate(&all);
                if v > *best_val {
                    *best_val = v;
                    *best_x = all;
                }
                continue;
            }

            let branch = free
                .iter()
                .copied()
                .map(|j| {
                    let m = st.pool.iter().map(|c| c.coefficients[j]).fold(f64::INFINITY, f64::min);
                    (j, m / ks.costs[j])
                })
                .fold(None::<(usize, f64)>, |acc, (j, r)| match acc {
                    Some((_, best)) if r <= best => acc,
                    _ => Some((j, r)),
                })
                .map(|(j, _)| j)
                .expect("free is non-empty");

            for take in [true, false] {
                let (o, z) = if take {
                    (node.ones.with(branch), zeros.clone())
                } else {
                    (node.ones.clone(), zeros.with(branch))
                };
                let level = prune_level(*best_val);
                let b = bound_with_orders(&st.pool, &st.orders, ks, &o, &z, level).min(node.bound);
                if b <= level {
                    pruned_max = pruned_max.max(b);
                    continue;
                }
                seq += 1;
                heap.push(Node { bound: b, depth: node.depth + 1, seq, ones: o, zeros: z });
            }
        }

        let reached = target.is_some_and(|t| *best_val >= t);
        Outcome { bound: pruned_max.max(*best_val), status: MasterStatus::Optimal, nodes, reached_target: reached }
    }
}
