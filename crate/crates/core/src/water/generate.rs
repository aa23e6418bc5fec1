use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AlphaSpec, Instance, Network, Scenario};
use crate::error::{input, Result};

/// Parameters of a synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub nodes: usize,
    pub edges: usize,
    pub scenarios: usize,
    pub sources: usize,
    pub budget: u64,
    pub seed: u64,
}

impl GeneratorParams {
    /// Edge count `⌈edge_factor · nodes⌉`.
    pub fn with_edge_factor(
        nodes: usize,
        edge_factor: f64,
        scenarios: usize,
        sources: usize,
        budget: u64,
        seed: u64,
    ) -> Self {
        let edges = (edge_factor * nodes as f64).ceil().max(0.0) as usize;
        Self { nodes, edges, scenarios, sources, budget, seed }
    }
}

pub const WEIGHT_RANGE: (u64, u64) = (1, 10);
pub const COST_RANGE: (u64, u64) = (5, 10);

/// Random instance: a spanning arborescence (when enough edges are
/// requested) plus extra random arcs; travel times ~ U{1..10} per scenario,
/// sensor costs ~ U{5..10}, uniform source probabilities.
pub fn generate_instance(p: &GeneratorParams) -> Result<Instance> {
    if p.nodes == 0 {
        return input("at least one node is required");
    }
    if p.sources == 0 || p.sources > p.nodes {
        return input(format!("source count {} must lie in 1..={}", p.sources, p.nodes));
    }
    if p.scenarios == 0 {
        return input("at least one scenario is required");
    }
    let max_edges = p.nodes * (p.nodes - 1);
    if p.edges > max_edges {
        return input(format!("{} edges exceed the {max_edges} possible arcs", p.edges));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut order: Vec<usize> = (0..p.nodes).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }

    let mut edges = Vec::with_capacity(p.edges);
    let mut used = HashSet::new();
    for i in 1..p.nodes {
        if edges.len() == p.edges {
            break;
        }
        let parent = order[rng.gen_range(0..i)];
        let arc = (parent, order[i]);
        used.insert(arc);
        edges.push(arc);
    }
    while edges.len() < p.edges {
        let u = rng.gen_range(0..p.nodes);
        let v = rng.gen_range(0..p.nodes);
        if u != v && used.insert((u, v)) {
            edges.push((u, v));
        }
    }

    let mut sources: Vec<usize> = sample(&mut rng, p.nodes, p.sources).into_vec();
    sources.sort_unstable();
    let sensor_costs = (0..p.nodes).map(|_| rng.gen_range(COST_RANGE.0..=COST_RANGE.1)).collect();
    let scenarios = (0..p.scenarios)
        .map(|_| Scenario {
            edge_weights: (0..edges.len()).map(|_| rng.gen_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1)).collect(),
        })
        .collect();

    Ok(Instance {
        network: Network {
            node_count: p.nodes,
            edges,
            source_probabilities: vec![1.0 / p.sources as f64; p.sources],
            sources,
            sensor_costs,
            budget: p.budget,
        },
        scenarios,
        alpha: AlphaSpec::Unit,
    })
}
