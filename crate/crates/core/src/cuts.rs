//! Submodular (hypograph) inequalities and their diagnostics.
//!
//! A cut generated at `S` for scenario `i` with scale `α_i` reads
//!
//! ```text
//! η ≤ (1/α_i) · ( f_i(S) − Σ_{j∈S} ρ_j(V∖{j})·(1 − x_j) + Σ_{j∉S} ρ_j(S)·x_j )
//! ```
//!
//! and is stored as `constant + Σ_j coefficients[j]·x_j`.

use std::collections::BTreeMap;

use crate::error::{input, Result};
use crate::setfn::{marginal_unchecked, SetFunction, VALUE_TOL};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularCut {
    pub constant: f64,
    pub coefficients: Vec<f64>,
    pub scenario: usize,
    pub generating_set: Subset,
    pub scale: f64,
}

impl SubmodularCut {
    pub fn ground_size(&self) -> usize {
        self.coefficients.len()
    }

    /// Right-hand side evaluated at the indicator vector of `x`.
    pub fn rhs(&self, x: &Subset) -> f64 {
        self.constant + x.iter().map(|j| self.coefficients[j]).sum::<f64>()
    }

    /// Same inequality with every term divided by `alpha`.
    pub fn rescaled(&self, alpha: f64) -> Result<SubmodularCut> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return input(format!("scale must be positive and finite, got {alpha}"));
        }
        Ok(SubmodularCut {
            constant: self.constant / alpha,
            coefficients: self.coefficients.iter().map(|c| c / alpha).collect(),
            scenario: self.scenario,
            generating_set: self.generating_set.clone(),
            scale: self.scale * alpha,
        })
    }
}

/// Builds the submodular inequality of `f/alpha` generated at `set`.
pub fn build_cut<F: SetFunction + ?Sized>(
    f: &F,
    set: &Subset,
    alpha: f64,
    scenario: usize,
) -> Result<SubmodularCut> {
    let n = f.ground_size();
    if set.ground_size() != n {
        return input(format!("subset has ground size {}, oracle has {n}", set.ground_size()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return input(format!("scale must be positive and finite, got {alpha}"));
    }
    let f_set = f.value(set);
    let mut coefficients = vec![0.0; n];
    let mut constant = f_set;
    if !set.is_empty() {
        let full = Subset::full(n);
        let f_full = f.value(&full);
        for j in set.iter() {
            let tail = f_full - f.value(&full.without(j));
            coefficients[j] = tail;
            constant -= tail;
        }
    }
    for j in (0..n).filter(|&j| !set.contains(j)) {
        coefficients[j] = f.value(&set.with(j)) - f_set;
    }
    for c in &mut coefficients {
        *c /= alpha;
    }
    Ok(SubmodularCut {
        constant: constant / alpha,
        coefficients,
        scenario,
        generating_set: set.clone(),
        scale: alpha,
    })
}

/// The inequalities generated at `∅`, one per scenario.
pub fn empty_set_cuts<F: SetFunction>(oracles: &[F], alphas: &[f64]) -> Result<Vec<SubmodularCut>> {
    if oracles.is_empty() {
        return input("at least one oracle is required");
    }
    if oracles.len() != alphas.len() {
        return input(format!("{} oracles but {} scales", oracles.len(), alphas.len()));
    }
    oracles
        .iter()
        .zip(alphas)
        .enumerate()
        .map(|(i, (f, &a))| build_cut(f, &Subset::empty(f.ground_size()), a, i))
        .collect()
}

/// `true` when `a` is pointwise no larger than `b`, making `b` redundant.
pub fn dominates(a: &SubmodularCut, b: &SubmodularCut) -> Result<bool> {
    if a.ground_size() != b.ground_size() {
        return input(format!(
            "cuts over different ground sizes ({} vs {})",
            a.ground_size(),
            b.ground_size()
        ));
    }
    Ok(a.constant <= b.constant
        && a.coefficients.iter().zip(&b.coefficients).all(|(x, y)| x <= y))
}

/// Outcome of [`facet_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FacetDiagnostic {
    pub cond_i: bool,
    pub cond_ii: bool,
    /// `j ↦ k_j` for every `j ∈ S` that found a witness.
    pub witnesses: BTreeMap<usize, usize>,
    pub tolerance: f64,
}

impl FacetDiagnostic {
    pub fn is_facet_certified(&self) -> bool {
        self.cond_i && self.cond_ii
    }
}

/// Checks the sufficient facet conditions for the cut of scenario `scenario`
/// generated at `set`.
///
/// Condition (i): every `j ∈ S` has a witness `k ∉ S` with `ρ_j({k}) = 0`
/// such that the points at `S` and at `S∖{j}∪{k}` lie on the face.
/// Condition (ii): `scenario` attains the minimum at `S` and every point
/// `S ∪ {j}` lies on the face.
pub fn facet_check<F: SetFunction>(
    oracles: &[F],
    alphas: &[f64],
    set: &Subset,
    scenario: usize,
) -> Result<FacetDiagnostic> {
    if oracles.len() != alphas.len() || scenario >= oracles.len() {
        return input("scenario index or scale vector does not match the oracle list");
    }
    let f = &oracles[scenario];
    let alpha = alphas[scenario];
    let n = f.ground_size();
    let tol = VALUE_TOL;
    let scaled_min = |t: &Subset| -> (usize, f64) {
        oracles
            .iter()
            .zip(alphas)
            .map(|(g, a)| g.value(t) / a)
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
    };
    let f_set = f.value(set);
    let own = f_set / alpha;
    let (argmin, min_at_set) = scaled_min(set);
    let own_is_min = (own - min_at_set).abs() <= tol;
    // RHS of the cut at S ∪ {k}, k ∉ S.
    let rhs_plus = |k: usize| (f_set + marginal_unchecked(f, k, set)) / alpha;

    let mut witnesses = BTreeMap::new();
    let mut cond_i = own_is_min;
    for j in set.iter() {
        let found = (0..n).filter(|&k| !set.contains(k)).find(|&k| {
            let single = Subset::from_elements(n, [k]);
            if marginal_unchecked(f, j, &single).abs() > tol {
                return false;
            }
            let target = rhs_plus(k);
            let swapped = scaled_min(&set.without(j).with(k)).1;
            let grown = scaled_min(&set.with(k)).1;
            (swapped - target).abs() <= tol && (grown - target).abs() <= tol
        });
        match found {
            Some(k) => {
                witnesses.insert(j, k);
            }
            None => cond_i = false,
        }
    }

    let cond_ii = argmin == scenario
        && own_is_min
        && (0..n)
            .filter(|&j| !set.contains(j))
            .all(|j| (rhs_plus(j) - scaled_min(&set.with(j)).1).abs() <= tol);

    Ok(FacetDiagnostic { cond_i, cond_ii, witnesses, tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::Modular;

    #[test]
    fn modular_cut_with_scale_two() {
        let f = Modular::new(vec![1.0, 2.0]);
        let cut = build_cut(&f, &Subset::from_elements(2, [0]), 2.0, 0).unwrap();
        // f({1}) = 1, ρ_1(V∖{1}) = 1, ρ_2({1}) = 2
        assert_eq!(cut.constant, 0.0);
        assert_eq!(cut.coefficients, vec![0.5, 1.0]);
        assert_eq!(cut.rhs(&Subset::from_elements(2, [0])), 0.5);
    }

    #[test]
    fn empty_generating_set_has_zero_constant() {
        let f = Modular::new(vec![1.0, 2.0]);
        let cuts = empty_set_cuts(&[f], &[1.0]).unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].constant, 0.0);
        assert_eq!(cuts[0].coefficients, vec![1.0, 2.0]);
    }

    #[test]
    fn empty_oracle_list_is_rejected() {
        let none: Vec<Modular> = vec![];
        assert!(empty_set_cuts(&none, &[]).is_err());
        assert!(empty_set_cuts(&[Modular::new(vec![1.0])], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_scale_is_rejected() {
        let f = Modular::new(vec![1.0]);
        assert!(build_cut(&f, &Subset::empty(1), 0.0, 0).is_err());
        assert!(build_cut(&f, &Subset::empty(1), f64::NAN, 0).is_err());
    }

    fn cut(constant: f64, coefficients: Vec<f64>) -> SubmodularCut {
        let n = coefficients.len();
        SubmodularCut { constant, coefficients, scenario: 0, generating_set: Subset::empty(n), scale: 1.0 }
    }

    #[test]
    fn dominance_is_reflexive_and_checks_dimensions() {
        let a = cut(1.0, vec![1.0, 2.0]);
        assert!(dominates(&a, &a).unwrap());
        assert!(dominates(&a, &cut(1.0, vec![1.0])).is_err());
    }

    #[test]
    fn vacuous_condition_on_empty_set() {
        let fs = [Modular::new(vec![1.0, 2.0]), Modular::new(vec![2.0, 1.0])];
        let d = facet_check(&fs, &[1.0, 1.0], &Subset::empty(2), 0).unwrap();
        assert!(d.cond_i);
        assert!(d.witnesses.is_empty());
        // (0 + ρ_1(∅)) = 1 = min(1, 2), but (0 + ρ_2(∅)) = 2 ≠ min(2, 1)
        assert!(!d.cond_ii);
    }
}
