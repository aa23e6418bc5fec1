//! Set-function oracles and their marginal algebra.

use std::collections::HashMap;
use std::sync::RwLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Result};
use crate::subset::Subset;

/// Absolute tolerance used for every equality test on function values.
pub const VALUE_TOL: f64 = 1e-9;

/// A normalized set function `f : 2^V → ℝ₊` over `V = {0, .., n-1}`.
///
/// Implementations used by the solver are expected to be monotone and
/// submodular with `f(∅) = 0`; [`check_submodular`] tests those laws.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &Subset) -> f64;
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn value(&self, set: &Subset) -> f64 {
        (**self).value(set)
    }
}

impl<F: SetFunction + ?Sized> SetFunction for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn value(&self, set: &Subset) -> f64 {
        (**self).value(set)
    }
}

/// `ρ_j(S) = f(S ∪ {j}) − f(S)`, or `0` when `j ∈ S`.
pub fn marginal<F: SetFunction + ?Sized>(f: &F, j: usize, set: &Subset) -> Result<f64> {
    let n = f.ground_size();
    if j >= n {
        return input(format!("element {j} out of range for ground set of size {n}"));
    }
    if set.ground_size() != n {
        return input(format!("subset has ground size {}, oracle has {n}", set.ground_size()));
    }
    Ok(marginal_unchecked(f, j, set))
}

pub(crate) fn marginal_unchecked<F: SetFunction + ?Sized>(f: &F, j: usize, set: &Subset) -> f64 {
    if set.contains(j) {
        0.0
    } else {
        f.value(&set.with(j)) - f.value(set)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum MemoKey {
    Mask(u64),
    Elements(Box<[u32]>),
}

impl MemoKey {
    fn of(set: &Subset) -> Self {
        match set.mask() {
            Some(m) => MemoKey::Mask(m),
            None => MemoKey::Elements(set.iter().map(|j| j as u32).collect()),
        }
    }
}

/// Caching wrapper around an oracle.
///
/// Safe to share between threads; racing insertions of the same key store
/// identical values.
pub struct Memoized<F> {
    inner: F,
    cache: RwLock<HashMap<MemoKey, f64>>,
}

impl<F: SetFunction> Memoized<F> {
    pub fn new(inner: F) -> Self {
        Self { inner, cache: RwLock::new(HashMap::new()) }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }
}

impl<F: SetFunction> SetFunction for Memoized<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, set: &Subset) -> f64 {
        let key = MemoKey::of(set);
        if let Some(v) = self.cache.read().ok().and_then(|c| c.get(&key).copied()) {
            return v;
        }
        let v = self.inner.value(set);
        if let Ok(mut c) = self.cache.write() {
            c.insert(key, v);
        }
        v
    }
}

/// `f(X) = Σ_{k∈X} w_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modular {
    pub weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &Subset) -> f64 {
        set.iter().map(|j| self.weights[j]).sum()
    }
}

/// Weighted coverage: element `j` covers the items `covers[j]`, and
/// `f(X)` is the total weight of items covered by at least one member of `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoverage {
    pub item_weights: Vec<f64>,
    pub covers: Vec<Vec<usize>>,
}

impl WeightedCoverage {
    pub fn new(item_weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Self {
        Self { item_weights, covers }
    }

    /// Random instance with `n` elements over `items` unit-to-`max_weight` items.
    pub fn random(n: usize, items: usize, density: f64, max_weight: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let item_weights = (0..items).map(|_| rng.gen_range(1..=max_weight) as f64).collect();
        let covers = (0..n)
            .map(|_| (0..items).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        Self { item_weights, covers }
    }
}

impl SetFunction for WeightedCoverage {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &Subset) -> f64 {
        let mut seen = vec![false; self.item_weights.len()];
        let mut total = 0.0;
        for j in set.iter() {
            for &item in &self.covers[j] {
                if !seen[item] {
                    seen[item] = true;
                    total += self.item_weights[item];
                }
            }
        }
        total
    }
}

/// Options for [`check_submodular_with`].
#[derive(Debug, Clone, Copy)]
pub struct LawCheck {
    /// Ground sizes up to this bound are checked exhaustively.
    pub exhaustive_limit: usize,
    /// Number of random `(S, j, k)` triples drawn above the limit.
    pub samples: usize,
    pub seed: u64,
}

impl Default for LawCheck {
    fn default() -> Self {
        Self { exhaustive_limit: 12, samples: 10_000, seed: 0 }
    }
}

/// Returns `true` if no violation of normalization, monotonicity or
/// submodularity was found.
pub fn check_submodular<F: SetFunction + ?Sized>(f: &F, exhaustive_limit: usize) -> bool {
    check_submodular_with(f, &LawCheck { exhaustive_limit, ..LawCheck::default() })
}

pub fn check_submodular_with<F: SetFunction + ?Sized>(f: &F, opts: &LawCheck) -> bool {
    let n = f.ground_size();
    if f.value(&Subset::empty(n)).abs() > VALUE_TOL {
        return false;
    }
    if n <= opts.exhaustive_limit && n < 31 {
        exhaustive_laws(f, n)
    } else {
        sampled_laws(f, n, opts.samples, opts.seed)
    }
}

// Local conditions suffice: ρ_j(S) ≥ 0 and ρ_j(S) ≥ ρ_j(S ∪ {k}).
fn exhaustive_laws<F: SetFunction + ?Sized>(f: &F, n: usize) -> bool {
    let values: Vec<f64> = (0..1u64 << n).map(|m| f.value(&Subset::from_mask(n, m))).collect();
    for mask in 0..1u64 << n {
        for j in (0..n).filter(|&j| mask >> j & 1 == 0) {
            let rho = values[(mask | 1 << j) as usize] - values[mask as usize];
            if rho < -VALUE_TOL {
                return false;
            }
            for k in (0..n).filter(|&k| k != j && mask >> k & 1 == 0) {
                let bigger = mask | 1 << k;
                let rho_big = values[(bigger | 1 << j) as usize] - values[bigger as usize];
                if rho_big > rho + VALUE_TOL {
                    return false;
                }
            }
        }
    }
    true
}

fn sampled_laws<F: SetFunction + ?Sized>(f: &F, n: usize, samples: usize, seed: u64) -> bool {
    if n < 2 {
        return exhaustive_laws(f, n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let density: f64 = rng.gen();
        let mut set = Subset::from_elements(n, (0..n).filter(|_| rng.gen_bool(density)));
        let j = rng.gen_range(0..n);
        let mut k = rng.gen_range(0..n - 1);
        if k >= j {
            k += 1;
        }
        set.remove(j);
        set.remove(k);
        let rho = marginal_unchecked(f, j, &set);
        let rho_big = marginal_unchecked(f, j, &set.with(k));
        if rho < -VALUE_TOL || rho_big > rho + VALUE_TOL {
            return false;
        }
    }
    true
}
