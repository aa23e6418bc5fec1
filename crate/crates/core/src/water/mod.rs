//! Outbreak-detection objective on a water distribution network.
//!
//! A contamination event at source `j` spreads along directed edges; a
//! sensor at `s` detects it at the shortest-path arrival time `d_j(s)`.
//! The damage after time `t` is `β_j(t)`, the number of reachable nodes
//! whose arrival time is strictly less than `t`. A placement `S` saves
//! `β_j(∞) − β_j(min_{s∈S} d_j(s))` nodes, and the scenario objective is
//! the probability-weighted sum over sources.

mod format;
mod generate;

pub use format::{parse_instance, serialize_instance, MAX_SCENARIOS};
pub use generate::{generate_instance, GeneratorParams};

use petgraph::algo::dijkstra;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{input, Result};
use crate::master::Knapsack;
use crate::setfn::SetFunction;
use crate::subset::Subset;

/// Topology, contamination sources, and sensor economics.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub sources: Vec<usize>,
    pub source_probabilities: Vec<f64>,
    pub sensor_costs: Vec<u64>,
    pub budget: u64,
}

/// Largest accepted travel time; keeps path lengths far from overflow.
pub const MAX_EDGE_WEIGHT: u64 = u32::MAX as u64;

/// Travel time (hours) on every edge, in edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub edge_weights: Vec<u64>,
}

/// How the scenario scales `α` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    Unit,
    Values(Vec<f64>),
    /// Each scenario scaled by its own optimum.
    Solve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub network: Network,
    pub scenarios: Vec<Scenario>,
    pub alpha: AlphaSpec,
}

impl Network {
    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count;
        if n == 0 {
            return input("network has no nodes");
        }
        if let Some(&(u, v)) = self.edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return input(format!("edge ({u}, {v}) has an endpoint outside 0..{n}"));
        }
        if self.sources.is_empty() {
            return input("at least one contamination source is required");
        }
        if let Some(&j) = self.sources.iter().find(|&&j| j >= n) {
            return input(format!("source {j} outside 0..{n}"));
        }
        let mut seen = vec![false; n];
        for &j in &self.sources {
            if std::mem::replace(&mut seen[j], true) {
                return input(format!("source {j} listed twice"));
            }
        }
        if self.source_probabilities.len() != self.sources.len() {
            return input("one probability per source is required");
        }
        if self.source_probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return input("source probabilities must be finite and nonnegative");
        }
        let total: f64 = self.source_probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return input(format!("source probabilities sum to {total}, expected 1"));
        }
        if self.sensor_costs.len() != n {
            return input(format!("{} sensor costs for {n} nodes", self.sensor_costs.len()));
        }
        if self.sensor_costs.iter().any(|&c| c == 0) {
            return input("sensor costs must be positive");
        }
        Ok(())
    }

    pub fn knapsack(&self) -> Knapsack {
        Knapsack::new(self.sensor_costs.iter().map(|&c| c as f64).collect(), self.budget as f64)
    }

    fn graph(&self) -> DiGraph<(), usize> {
        let mut g = DiGraph::with_capacity(self.node_count, self.edges.len());
        for _ in 0..self.node_count {
            g.add_node(());
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            g.add_edge(NodeIndex::new(u), NodeIndex::new(v), e);
        }
        g
    }
}

impl Scenario {
    pub fn validate(&self, network: &Network) -> Result<()> {
        if self.edge_weights.len() != network.edges.len() {
            return input(format!(
                "scenario has {} weights for {} edges",
                self.edge_weights.len(),
                network.edges.len()
            ));
        }
        if self.edge_weights.iter().any(|&w| w == 0 || w > MAX_EDGE_WEIGHT) {
            return input(format!("edge weights must lie in 1..={MAX_EDGE_WEIGHT}"));
        }
        Ok(())
    }
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.scenarios.is_empty() {
            return input("at least one scenario is required");
        }
        for s in &self.scenarios {
            s.validate(&self.network)?;
        }
        if let AlphaSpec::Values(v) = &self.alpha {
            if v.len() != self.scenarios.len() {
                return input(format!("{} alpha values for {} scenarios", v.len(), self.scenarios.len()));
            }
            if v.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                return input("alpha values must be positive");
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count
    }

    pub fn scenario_count(&self) -> usize {
        self.scenarios.len()
    }

    /// `true` when no single sensor is affordable; only the empty placement
    /// is feasible then.
    pub fn budget_warning(&self) -> bool {
        self.network.sensor_costs.iter().all(|&c| c > self.network.budget)
    }

    pub fn knapsack(&self) -> Knapsack {
        self.network.knapsack()
    }

    /// One expected-reduction oracle per scenario.
    pub fn oracles(&self) -> Vec<ExpectedReduction> {
        let graph = self.network.graph();
        self.scenarios
            .iter()
            .map(|sc| ExpectedReduction::from_matrix(&self.network, matrix_on(&graph, &self.network, sc)))
            .collect()
    }
}

/// Arrival times from `source` (`None` = unreachable).
pub fn shortest_times(network: &Network, scenario: &Scenario, source: usize) -> Vec<Option<u64>> {
    times_on(&network.graph(), network.node_count, scenario, source)
}

fn times_on(
    graph: &DiGraph<(), usize>,
    n: usize,
    scenario: &Scenario,
    source: usize,
) -> Vec<Option<u64>> {
    let scores = dijkstra(graph, NodeIndex::new(source), None, |e| scenario.edge_weights[*e.weight()]);
    let mut d = vec![None; n];
    for (node, t) in scores {
        d[node.index()] = Some(t);
    }
    d
}

/// `β(t)`: reachable nodes with arrival strictly before `t` (`None` = ∞).
pub fn penalty(times: &[Option<u64>], t: Option<u64>) -> u32 {
    times
        .iter()
        .flatten()
        .filter(|&&d| t.map_or(true, |t| d < t))
        .count() as u32
}

/// Per-sensor penalty reductions for one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMatrix {
    /// `r[s][j]` for node `s` and source position `j` (index into `sources`).
    pub r: Vec<Vec<u32>>,
    /// `β_j(∞)` per source position.
    pub beta_inf: Vec<u32>,
}

pub fn reduction_matrix(network: &Network, scenario: &Scenario) -> ReductionMatrix {
    matrix_on(&network.graph(), network, scenario)
}

fn matrix_on(graph: &DiGraph<(), usize>, network: &Network, scenario: &Scenario) -> ReductionMatrix {
    let n = network.node_count;
    let k = network.sources.len();
    let mut r = vec![vec![0u32; k]; n];
    let mut beta_inf = vec![0u32; k];
    for (jpos, &source) in network.sources.iter().enumerate() {
        let d = times_on(graph, n, scenario, source);
        let mut reached: Vec<u64> = d.iter().flatten().copied().collect();
        reached.sort_unstable();
        beta_inf[jpos] = reached.len() as u32;
        for s in 0..n {
            if let Some(ds) = d[s] {
                // nodes with arrival ≥ d(s)
                let earlier = reached.partition_point(|&t| t < ds);
                r[s][jpos] = (reached.len() - earlier) as u32;
            }
        }
    }
    ReductionMatrix { r, beta_inf }
}

/// `R(S) = Σ_j p_j · max_{s∈S} r[s][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedReduction {
    probabilities: Vec<f64>,
    matrix: ReductionMatrix,
}

impl ExpectedReduction {
    pub fn from_matrix(network: &Network, matrix: ReductionMatrix) -> Self {
        Self { probabilities: network.source_probabilities.clone(), matrix }
    }

    pub fn matrix(&self) -> &ReductionMatrix {
        &self.matrix
    }

    /// Upper bound `Σ_j p_j β_j(∞)`, attained by a sensor on every source.
    pub fn ceiling(&self) -> f64 {
        self.probabilities.iter().zip(&self.matrix.beta_inf).map(|(p, &b)| p * b as f64).sum()
    }
}

pub fn expected_reduction_oracle(network: &Network, scenario: &Scenario) -> ExpectedReduction {
    ExpectedReduction::from_matrix(network, reduction_matrix(network, scenario))
}

impl SetFunction for ExpectedReduction {
    fn ground_size(&self) -> usize {
        self.matrix.r.len()
    }

    fn value(&self, set: &Subset) -> f64 {
        let k = self.probabilities.len();
        let mut best = vec![0u32; k];
        for s in set.iter() {
            for (b, &v) in best.iter_mut().zip(&self.matrix.r[s]) {
                *b = (*b).max(v);
            }
        }
        self.probabilities.iter().zip(&best).map(|(p, &b)| p * b as f64).sum()
    }
}

/// The four-node network of the documentation example: edges
/// `0→2 (4h)`, `0→3 (1h)`, `1→3 (2h)`, sources `{0, 1}` with equal odds.
pub fn four_node_instance() -> Instance {
    Instance {
        network: Network {
            node_count: 4,
            edges: vec![(0, 2), (0, 3), (1, 3)],
            sources: vec![0, 1],
            source_probabilities: vec![0.5, 0.5],
            sensor_costs: vec![1; 4],
            budget: 1,
        },
        scenarios: vec![Scenario { edge_weights: vec![4, 1, 2] }],
        alpha: AlphaSpec::Unit,
    }
}
