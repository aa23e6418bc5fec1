//! Reference computations shared by the integration tests. Nothing here
//! calls into the solver; the water objective is recomputed from scratch
//! with Bellman-Ford relaxation and the penalty definition.

#![allow(dead_code)]

use rsm_core::water::{generate_instance, GeneratorParams, Instance};

/// Arrival times by repeated edge relaxation.
pub fn arrival_times(inst: &Instance, scenario: usize, source: usize) -> Vec<Option<u64>> {
    let n = inst.network.node_count;
    let w = &inst.scenarios[scenario].edge_weights;
    let mut d = vec![None; n];
    d[source] = Some(0u64);
    for _ in 0..n {
        let mut changed = false;
        for (e, &(u, v)) in inst.network.edges.iter().enumerate() {
            if let Some(du) = d[u] {
                let cand = du + w[e];
                if d[v].map_or(true, |dv| cand < dv) {
                    d[v] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Reachable nodes contaminated strictly before `t`.
fn damage(d: &[Option<u64>], t: Option<u64>) -> usize {
    d.iter().flatten().filter(|&&x| t.map_or(true, |t| x < t)).count()
}

/// Expected penalty reduction of `placement` in one scenario.
pub fn reduction(inst: &Instance, scenario: usize, placement: &[usize]) -> f64 {
    let net = &inst.network;
    net.sources
        .iter()
        .zip(&net.source_probabilities)
        .map(|(&j, &p)| {
            let d = arrival_times(inst, scenario, j);
            let detect = placement.iter().filter_map(|&s| d[s]).min();
            p * (damage(&d, None) - damage(&d, detect)) as f64
        })
        .sum()
}

/// Every scenario's reduction for every placement, indexed by bitmask.
pub fn value_table(inst: &Instance) -> Vec<Vec<f64>> {
    let n = inst.network.node_count;
    assert!(n <= 16);
    (0..inst.scenarios.len())
        .map(|i| {
            (0u32..1 << n)
                .map(|mask| {
                    let s: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
                    reduction(inst, i, &s)
                })
                .collect()
        })
        .collect()
}

pub fn affordable(inst: &Instance, mask: u32) -> bool {
    let cost: u64 = (0..inst.network.node_count)
        .filter(|&k| mask >> k & 1 == 1)
        .map(|k| inst.network.sensor_costs[k])
        .sum();
    cost <= inst.network.budget
}

/// `max_x min_i f_i(x)/α_i` by enumeration.
pub fn robust_optimum(inst: &Instance, table: &[Vec<f64>], alphas: &[f64]) -> f64 {
    let n = inst.network.node_count;
    (0u32..1 << n)
        .filter(|&m| affordable(inst, m))
        .map(|m| table.iter().zip(alphas).map(|(t, a)| t[m as usize] / a).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Per-scenario optimum `max_x f_i(x)` by enumeration.
pub fn scenario_optima(inst: &Instance, table: &[Vec<f64>]) -> Vec<f64> {
    let n = inst.network.node_count;
    table
        .iter()
        .map(|t| {
            (0u32..1 << n)
                .filter(|&m| affordable(inst, m))
                .map(|m| t[m as usize])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Small seeded water instance with `n` nodes and `m` scenarios.
pub fn small_instance(seed: u64, n: usize, m: usize, budget: u64) -> Instance {
    let sources = 1 + (seed as usize % n.min(4));
    let edges = (n as f64 * 1.3).ceil() as usize;
    generate_instance(&GeneratorParams { nodes: n, edges, scenarios: m, sources, budget, seed }).unwrap()
}
