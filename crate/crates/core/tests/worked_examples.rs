mod common;

use nalgebra::DMatrix;
use rsm_core::cuts::{build_cut, dominates, empty_set_cuts, facet_check, SubmodularCut};
use rsm_core::dcg::{brute_force, find_set_routine, min_index, separating_set, solve_rsm, DcgConfig};
use rsm_core::master::{node_bound, Knapsack, MasterOptions, MasterState};
use rsm_core::setfn::{marginal, Modular, SetFunction, WeightedCoverage};
use rsm_core::subset::Subset;
use rsm_core::water::{four_node_instance, reduction_matrix, shortest_times};

fn coverage_f1() -> WeightedCoverage {
    WeightedCoverage::new(vec![1.0, 1.0, 2.0, 3.0], vec![vec![0], vec![1], vec![0, 2], vec![1, 3]])
}

fn modular_f2() -> Modular {
    Modular::new(vec![2.0, 3.0, 1.0, 4.0])
}

fn min_value(fs: &[&dyn SetFunction], alphas: &[f64], x: &Subset) -> f64 {
    fs.iter().zip(alphas).map(|(f, a)| f.value(x) / a).fold(f64::INFINITY, f64::min)
}

/// Affine rank of the points `(min_i f_i(T)/α_i, T)` lying on the cut.
fn tight_point_rank(fs: &[&dyn SetFunction], alphas: &[f64], cut: &SubmodularCut) -> usize {
    let n = cut.ground_size();
    let mut rows = Vec::new();
    for mask in 0..1u64 << n {
        let t = Subset::from_mask(n, mask);
        let v = min_value(fs, alphas, &t);
        if (cut.rhs(&t) - v).abs() <= 1e-9 {
            rows.push(v);
            rows.extend(t.to_indicator().iter().map(|&b| b as u8 as f64));
            rows.push(1.0);
        }
    }
    let count = rows.len() / (n + 2);
    DMatrix::from_row_slice(count, n + 2, &rows).rank(1e-9)
}

#[test]
fn coverage_and_modular_cut_data() {
    let f1 = coverage_f1();
    let f2 = modular_f2();
    let s = Subset::from_elements(4, [0, 1]);
    assert_eq!(f1.value(&s), 2.0);
    assert_eq!(f2.value(&s), 5.0);
    let full = Subset::full(4);
    assert_eq!(marginal(&f1, 0, &full.without(0)).unwrap(), 0.0);
    assert_eq!(marginal(&f1, 1, &full.without(1)).unwrap(), 0.0);
    assert_eq!(marginal(&f2, 0, &full.without(0)).unwrap(), 2.0);
    assert_eq!(marginal(&f2, 1, &full.without(1)).unwrap(), 3.0);
    assert_eq!(marginal(&f1, 2, &s).unwrap(), 2.0);
    assert_eq!(marginal(&f1, 3, &s).unwrap(), 3.0);

    let c1 = build_cut(&f1, &s, 1.0, 0).unwrap();
    assert_eq!((c1.constant, c1.coefficients.clone()), (2.0, vec![0.0, 0.0, 2.0, 3.0]));
    // θ2 ≤ 5 − 2(1 − x1) − 3(1 − x2) + x3 + 4x4
    let c2 = build_cut(&f2, &s, 1.0, 1).unwrap();
    assert_eq!((c2.constant, c2.coefficients.clone()), (0.0, vec![2.0, 3.0, 1.0, 4.0]));
    assert_eq!(c1.rhs(&s), 2.0);
    assert_eq!(c2.rhs(&s), 5.0);
}

#[test]
fn coverage_cut_is_a_facet() {
    let f1 = coverage_f1();
    let f2 = modular_f2();
    let fs: [&dyn SetFunction; 2] = [&f1, &f2];
    let s = Subset::from_elements(4, [0, 1]);
    let d = facet_check(&fs, &[1.0, 1.0], &s, 0).unwrap();
    assert!(d.cond_i && d.cond_ii);
    assert_eq!(d.witnesses.into_iter().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
    let cut = build_cut(&f1, &s, 1.0, 0).unwrap();
    assert_eq!(tight_point_rank(&fs, &[1.0, 1.0], &cut), 5);
    // the five points listed for the example are among the tight ones
    for (eta, x) in [(2.0, [0, 1]), (4.0, [1, 2]), (5.0, [0, 3])] {
        let t = Subset::from_elements(4, x);
        assert_eq!(cut.rhs(&t), eta);
        assert_eq!(min_value(&fs, &[1.0, 1.0], &t), eta);
    }
}

#[test]
fn certified_facets_have_full_affine_rank() {
    let mut certified = 0;
    for seed in 0..40 {
        let n = 4 + seed as usize % 3;
        let f = WeightedCoverage::random(n, 5, 0.4, 4, seed);
        let g = WeightedCoverage::random(n, 5, 0.4, 4, seed + 1000);
        let fs: [&dyn SetFunction; 2] = [&f, &g];
        for mask in 0..1u64 << n {
            let s = Subset::from_mask(n, mask);
            for i in 0..2 {
                let d = facet_check(&fs, &[1.0, 1.0], &s, i).unwrap();
                if d.is_facet_certified() {
                    certified += 1;
                    let cut = build_cut(fs[i], &s, 1.0, i).unwrap();
                    assert_eq!(tight_point_rank(&fs, &[1.0, 1.0], &cut), n + 1, "seed {seed}, S = {s}, i = {i}");
                }
            }
        }
    }
    assert!(certified > 0);
}

#[test]
fn dominance_among_cuts_at_one_set() {
    let s = Subset::from_elements(4, [0, 1]);
    let mk = |constant: f64, c3: f64, c4: f64| SubmodularCut {
        constant,
        coefficients: vec![0.0, 0.0, c3, c4],
        scenario: 0,
        generating_set: s.clone(),
        scale: 1.0,
    };
    let (a, b, c) = (mk(3.0, 2.0, 3.0), mk(2.0, 3.0, 4.0), mk(5.0, 3.0, 5.0));
    assert!(dominates(&a, &c).unwrap());
    assert!(dominates(&b, &c).unwrap());
    assert!(!dominates(&a, &b).unwrap() && !dominates(&b, &a).unwrap());

    let mut st = MasterState::new(Knapsack::unit(4, 2.0));
    assert!(st.add_cut(a.clone(), true).unwrap());
    assert!(st.add_cut(b.clone(), true).unwrap());
    let before = st.solve(&MasterOptions::default()).unwrap().eta;
    assert!(!st.add_cut(c.clone(), true).unwrap());
    // kept without filtering, the weaker cut changes nothing
    let mut unfiltered = MasterState::new(Knapsack::unit(4, 2.0));
    for cut in [a, b, c] {
        unfiltered.add_cut(cut, false).unwrap();
    }
    assert_eq!(unfiltered.solve(&MasterOptions::default()).unwrap().eta, before);
}

#[test]
fn modular_warm_start() {
    let weights = [vec![2.0, 2.0, 3.0], vec![1.0, 3.0, 4.0], vec![3.0, 3.0, 1.0]];
    let fs: Vec<Modular> = weights.iter().cloned().map(Modular::new).collect();
    let cuts = empty_set_cuts(&fs, &[1.0; 3]).unwrap();
    for (i, (c, w)) in cuts.iter().zip(&weights).enumerate() {
        assert_eq!(c.constant, 0.0);
        assert_eq!(&c.coefficients, w);
        assert_eq!(c.scenario, i);
        assert!(c.generating_set.is_empty());
    }
    let ks = Knapsack::unit(3, 1.0);
    let none = Subset::empty(3);
    assert_eq!(node_bound(&cuts, &none, &none, &ks), 3.0);
    let mut st = MasterState::new(ks.clone());
    for c in cuts {
        st.add_cut(c, false).unwrap();
    }
    let sol = st.solve(&MasterOptions::default()).unwrap();
    assert_eq!((sol.eta, sol.x.clone()), (2.0, Subset::from_elements(3, [1])));
    // for modular functions the warm start is already exact
    let r = solve_rsm(&fs, &ks, &[1.0; 3], &DcgConfig::default()).unwrap();
    assert_eq!((r.eta, r.iterations, r.cuts_added), (2.0, 1, 0));
    assert_eq!(brute_force(&fs, &ks, &[1.0; 3]).unwrap(), (2.0, Subset::from_elements(3, [1])));
}

#[test]
fn four_node_network() {
    let inst = four_node_instance();
    let (net, sc) = (&inst.network, &inst.scenarios[0]);
    assert_eq!(shortest_times(net, sc, 0), vec![Some(0), None, Some(4), Some(1)]);
    assert_eq!(shortest_times(net, sc, 1), vec![None, Some(0), None, Some(2)]);
    let m = reduction_matrix(net, sc);
    assert_eq!(m.beta_inf, vec![3, 2]);
    assert_eq!(m.r, vec![vec![3, 0], vec![0, 2], vec![1, 0], vec![2, 1]]);
    for (jpos, &j) in net.sources.iter().enumerate() {
        assert_eq!(m.r[j][jpos], m.beta_inf[jpos]);
    }
    let f = &inst.oracles()[0];
    for mask in 0..16u64 {
        let s = Subset::from_mask(4, mask);
        let nodes: Vec<usize> = s.iter().collect();
        assert_eq!(f.value(&s), common::reduction(&inst, 0, &nodes), "S = {s}");
    }
    assert_eq!(f.value(&Subset::from_elements(4, [1, 2])), 1.5);
    assert_eq!(f.value(&Subset::from_elements(4, [2])), 0.5);
    assert_eq!(f.value(&Subset::empty(4)), 0.0);
}

#[test]
fn four_node_best_single_sensor() {
    let inst = four_node_instance();
    let (v, x) = brute_force(&inst.oracles(), &inst.knapsack(), &[1.0]).unwrap();
    // nodes 0 and 3 both reach 1.5; the lexicographically smaller vector is {3}
    assert_eq!((v, x), (1.5, Subset::from_elements(4, [3])));
    let r = solve_rsm(&inst.oracles(), &inst.knapsack(), &[1.0], &DcgConfig::default()).unwrap();
    assert_eq!(r.eta, 1.5);
}

#[test]
fn strengthening_swaps_in_a_covered_element() {
    // 0 covers {A, B}, 1 covers {A, C}, 2 covers {A}
    let f = WeightedCoverage::new(vec![1.0, 2.0, 4.0], vec![vec![0, 1], vec![0, 2], vec![0]]);
    let xbar = Subset::from_elements(3, [0, 1]);
    let s = find_set_routine(&f, &xbar, 2);
    assert_eq!(s, Subset::from_elements(3, [2]));
    // one witness suffices for 2 to replace 0
    assert_eq!(find_set_routine(&f, &xbar, 1), Subset::from_elements(3, [1, 2]));
    assert_eq!(find_set_routine(&f, &xbar, 0), xbar);
    let (cut, fell_back) = separating_set(&f, &xbar, 2, 1.0, 0).unwrap();
    assert!(!fell_back);
    assert_eq!(cut.generating_set, s);
    assert_eq!(cut.rhs(&xbar), f.value(&xbar));
    for mask in 0..8u64 {
        let t = Subset::from_mask(3, mask);
        assert!(f.value(&t) <= cut.rhs(&t) + 1e-12);
    }
}

#[test]
fn strengthening_falls_back_when_not_tight() {
    // min(|S|, 2) has zero marginals without the coverage structure
    struct Capped;
    impl SetFunction for Capped {
        fn ground_size(&self) -> usize {
            4
        }
        fn value(&self, s: &Subset) -> f64 {
            s.len().min(2) as f64
        }
    }
    let xbar = Subset::from_elements(4, [0, 1]);
    let (cut, _) = separating_set(&Capped, &xbar, 2, 1.0, 0).unwrap();
    assert!(cut.rhs(&xbar) <= 2.0 + 1e-9);
}

#[test]
fn argmin_ties_go_to_the_first_index() {
    assert_eq!(min_index(&[2.0, 5.0]).unwrap(), 0);
    assert_eq!(min_index(&[4.0, 1.0, 1.0]).unwrap(), 1);
}
