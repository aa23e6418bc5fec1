//! Delayed constraint generation for `max_{x∈X} min_i f_i(x)/α_i`.
//!
//! Each round solves the relaxed master over the current cut pool, evaluates
//! every scenario at the master's `x̄`, and adds submodular cuts for the
//! scenarios whose scaled value falls short of the master's `η̄`. With
//! `reduce`, only the scenarios attaining the minimum get a cut. Cuts are
//! generated at the set returned by [`find_set_routine`], which swaps
//! zero-marginal members of `x̄` for witnesses and keeps the cut tight at `x̄`.

use std::time::{Duration, Instant};

use crate::cuts::{build_cut, empty_set_cuts, SubmodularCut};
use crate::error::{input, Error, Result};
use crate::master::{Knapsack, MasterOptions, MasterState, MasterStatus};
use crate::setfn::{marginal_unchecked, SetFunction, VALUE_TOL};
use crate::subset::Subset;

/// Largest ground set [`brute_force`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcgConfig {
    /// Cut only the scenarios attaining the minimum scaled value.
    pub reduce: bool,
    /// Witness count for the strengthening routine; `0` disables it.
    pub stop_pt: usize,
    /// Violation margin: a cut is added when `η̄ > f_i(x̄)/α_i + epsilon`.
    pub epsilon: f64,
    pub time_limit: Option<Duration>,
    pub filter_dominated: bool,
    /// Seed the pool with the cuts generated at the empty set.
    pub warm_start: bool,
    /// Absolute gap tolerance handed to every master solve.
    pub master_gap: f64,
}

impl Default for DcgConfig {
    fn default() -> Self {
        Self {
            reduce: true,
            stop_pt: 2,
            epsilon: 0.0,
            time_limit: None,
            filter_dominated: false,
            warm_start: true,
            master_gap: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    /// No new cut could be added although a violation remained.
    Stalled,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Best robust value `min_i f_i(x)/α_i` found.
    pub eta: f64,
    pub x: Subset,
    pub upper_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Pool growth beyond the warm-start and seed cuts.
    pub cuts_added: usize,
    pub wall_time: Duration,
    pub status: SolveStatus,
    /// Master value `η̄` of every round.
    pub master_values: Vec<f64>,
    /// Final cut pool.
    pub cuts: Vec<SubmodularCut>,
    /// Rounds where the strengthened set was not tight at `x̄` and the
    /// unstrengthened one was used instead.
    pub strengthening_fallbacks: usize,
}

/// Index of the first minimum.
pub fn min_index(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return input("min_index of an empty list");
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(values.iter().position(|&v| v <= min + VALUE_TOL).unwrap_or(0))
}

/// Strengthened generating set for the cut of `f` at `x̄`.
///
/// Every `j ∉ X̄` with `ρ_j(X̄) = 0` collects up to `stop_pt` members `k` of
/// `X̄` with `ρ_j({k}) = 0`; once `stop_pt` are found, `j` is admitted if
/// `f(Q') = f(S ∪ {j}) + Σ_{l∈Q'} ρ_l(S ∪ {j})` holds for the enlarged
/// witness set `Q'`. The result is `S ∪ (X̄ ∖ Q)`.
pub fn find_set_routine<F: SetFunction + ?Sized>(f: &F, xbar: &Subset, stop_pt: usize) -> Subset {
    if stop_pt == 0 {
        return xbar.clone();
    }
    let n = f.ground_size();
    let zero = |v: f64| v.abs() <= VALUE_TOL;
    let mut chosen = Subset::empty(n);
    let mut witnesses = Subset::empty(n);
    for j in (0..n).filter(|&j| !xbar.contains(j)) {
        if !zero(marginal_unchecked(f, j, xbar)) {
            continue;
        }
        let mut tmp = witnesses.clone();
        let mut counter = 0;
        for k in xbar.iter() {
            if !zero(marginal_unchecked(f, j, &Subset::from_elements(n, [k]))) {
                continue;
            }
            counter += 1;
            tmp.insert(k);
            if counter == stop_pt {
                let grown = chosen.with(j);
                let f_grown = f.value(&grown);
                let rhs = f_grown + tmp.iter().map(|l| f.value(&grown.with(l)) - f_grown).sum::<f64>();
                if zero(f.value(&tmp) - rhs) {
                    chosen = grown;
                    witnesses = witnesses.union(&tmp);
                }
                break;
            }
        }
    }
    chosen.union(&xbar.difference(&witnesses))
}

/// Generating set used for separation: the strengthened set when its cut is
/// still tight at `x̄`, otherwise `x̄` itself. The flag reports a fallback.
pub fn separating_set<F: SetFunction + ?Sized>(
    f: &F,
    xbar: &Subset,
    stop_pt: usize,
    alpha: f64,
    scenario: usize,
) -> Result<(SubmodularCut, bool)> {
    let set = find_set_routine(f, xbar, stop_pt);
    if &set != xbar {
        let cut = build_cut(f, &set, alpha, scenario)?;
        if cut.rhs(xbar) <= f.value(xbar) / alpha + VALUE_TOL {
            return Ok((cut, false));
        }
        return Ok((build_cut(f, xbar, alpha, scenario)?, true));
    }
    Ok((build_cut(f, xbar, alpha, scenario)?, false))
}

fn check_problem<F: SetFunction>(oracles: &[F], knapsack: &Knapsack, alphas: &[f64]) -> Result<()> {
    if oracles.is_empty() {
        return input("at least one scenario oracle is required");
    }
    if alphas.len() != oracles.len() {
        return input(format!("{} scales for {} scenarios", alphas.len(), oracles.len()));
    }
    if alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return input("scales must be positive and finite");
    }
    if oracles.iter().any(|f| f.ground_size() != knapsack.len()) {
        return input("oracle ground size does not match the knapsack");
    }
    Ok(())
}

/// Runs delayed constraint generation from an empty pool (plus warm start).
pub fn solve_rsm<F: SetFunction>(
    oracles: &[F],
    knapsack: &Knapsack,
    alphas: &[f64],
    config: &DcgConfig,
) -> Result<SolveReport> {
    solve_rsm_seeded(oracles, knapsack, alphas, config, Vec::new())
}

/// As [`solve_rsm`], with `seed_cuts` placed in the pool before the first round.
pub fn solve_rsm_seeded<F: SetFunction>(
    oracles: &[F],
    knapsack: &Knapsack,
    alphas: &[f64],
    config: &DcgConfig,
    seed_cuts: Vec<SubmodularCut>,
) -> Result<SolveReport> {
    check_problem(oracles, knapsack, alphas)?;
    if !(config.epsilon >= 0.0) {
        return input("epsilon must be nonnegative");
    }
    let start = Instant::now();
    let deadline = config.time_limit.map(|t| start + t);
    let n = knapsack.len();

    let mut master = MasterState::new(knapsack.clone());
    for cut in seed_cuts {
        master.add_cut(cut, config.filter_dominated)?;
    }
    if config.warm_start {
        for cut in empty_set_cuts(oracles, alphas)? {
            master.add_cut(cut, config.filter_dominated)?;
        }
    }

    let scaled = |x: &Subset| -> Vec<f64> { oracles.iter().zip(alphas).map(|(f, a)| f.value(x) / a).collect() };

    let mut best_x = Subset::empty(n);
    let mut best = scaled(&best_x).into_iter().fold(f64::INFINITY, f64::min);
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    let mut cuts_added = 0;
    let mut fallbacks = 0;
    let mut master_values = Vec::new();
    let status = loop {
        // the first round always runs so that a bound and an incumbent exist
        let remaining = match deadline {
            Some(d) => {
                let now = Instant::now();
                if now >= d && iterations > 0 {
                    break SolveStatus::TimeLimit;
                }
                Some(d.saturating_duration_since(now))
            }
            None => None,
        };

        let (eta_bar, xbar, master_done) = if master.pool().is_empty() {
            (f64::INFINITY, Subset::empty(n), true)
        } else {
            let opts = MasterOptions {
                gap_tol: config.master_gap,
                relative_gap: false,
                time_limit: remaining,
                lexicographic: false,
            };
            let sol = master.solve(&opts)?;
            (sol.bound, sol.x, sol.status == MasterStatus::Optimal)
        };
        iterations += 1;
        upper = upper.min(eta_bar);
        master_values.push(eta_bar);

        let lambda = scaled(&xbar);
        let low = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        if low > best {
            best = low;
            best_x = xbar.clone();
        }
        if !master_done {
            break SolveStatus::TimeLimit;
        }

        let violated = |v: f64| eta_bar > v + config.epsilon + VALUE_TOL;
        let targets: Vec<usize> = (0..oracles.len())
            .filter(|&i| violated(lambda[i]))
            .filter(|&i| !config.reduce || lambda[i] <= low + VALUE_TOL)
            .collect();
        if targets.is_empty() {
            break SolveStatus::Optimal;
        }

        let mut added = 0;
        for i in targets {
            let (cut, fell_back) = separating_set(&oracles[i], &xbar, config.stop_pt, alphas[i], i)?;
            fallbacks += fell_back as usize;
            if master.add_cut(cut, config.filter_dominated)? {
                added += 1;
            }
        }
        cuts_added += added;
        if added == 0 {
            break SolveStatus::Stalled;
        }
    };

    let gap = match status {
        SolveStatus::Optimal => 0.0,
        _ => (upper - best) / upper.abs().max(1e-12),
    };
    if status == SolveStatus::Optimal {
        upper = upper.max(best);
    }
    let pool = master.pool().to_vec();
    Ok(SolveReport {
        eta: best,
        x: best_x,
        upper_bound: upper,
        gap,
        iterations,
        cuts_added,
        wall_time: start.elapsed(),
        status,
        master_values,
        cuts: pool,
        strengthening_fallbacks: fallbacks,
    })
}

/// Exhaustive `max_{x∈X} min_i f_i(x)/α_i`; ties go to the lexicographically
/// smallest `x`.
pub fn brute_force<F: SetFunction>(oracles: &[F], knapsack: &Knapsack, alphas: &[f64]) -> Result<(f64, Subset)> {
    check_problem(oracles, knapsack, alphas)?;
    let n = knapsack.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best: Option<(f64, Subset)> = None;
    for mask in 0..1u64 << n {
        let x = Subset::from_mask(n, mask);
        if !knapsack.is_feasible(&x) {
            continue;
        }
        let v = oracles.iter().zip(alphas).map(|(f, a)| f.value(&x) / a).fold(f64::INFINITY, f64::min);
        let better = match &best {
            None => true,
            Some((bv, bx)) => v > bv + VALUE_TOL || ((v - bv).abs() <= VALUE_TOL && x.lex_cmp(bx).is_lt()),
        };
        if better {
            best = Some((v, x));
        }
    }
    Ok(best.expect("the empty placement is always feasible"))
}
