mod common;

use proptest::prelude::*;
use rsm_core::cuts::{build_cut, dominates, SubmodularCut};
use rsm_core::master::{node_bound, Knapsack, MasterOptions, MasterState};
use rsm_core::setfn::{check_submodular, Memoized, SetFunction, WeightedCoverage};
use rsm_core::subset::Subset;
use rsm_core::water::{
    generate_instance, parse_instance, penalty, reduction_matrix, serialize_instance, shortest_times, GeneratorParams,
};

fn coverage(n: usize) -> impl Strategy<Value = WeightedCoverage> {
    (2usize..8, 0.2f64..0.7, 1u32..6, any::<u64>())
        .prop_map(move |(items, density, w, seed)| WeightedCoverage::random(n, items, density, w, seed))
}

fn cut_strategy(n: usize) -> impl Strategy<Value = SubmodularCut> {
    (0u32..6, prop::collection::vec(0u32..6, n)).prop_map(move |(c, coefs)| SubmodularCut {
        constant: c as f64,
        coefficients: coefs.into_iter().map(f64::from).collect(),
        scenario: 0,
        generating_set: Subset::empty(n),
        scale: 1.0,
    })
}

fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
    (0..1u64 << n).map(move |m| Subset::from_mask(n, m))
}

proptest! {
    #[test]
    fn cuts_are_tight_and_valid(
        (f, mask, alpha) in (3usize..9).prop_flat_map(|n| (coverage(n), 0..1u64 << n, prop_oneof![Just(1.0), Just(2.5)]))
    ) {
        let n = f.ground_size();
        let s = Subset::from_mask(n, mask);
        let cut = build_cut(&f, &s, alpha, 0).unwrap();
        prop_assert!((cut.rhs(&s) - f.value(&s) / alpha).abs() <= 1e-9);
        prop_assert!(cut.coefficients.iter().all(|&c| c >= 0.0));
        for t in all_subsets(n) {
            prop_assert!(f.value(&t) / alpha <= cut.rhs(&t) + 1e-9, "violated at {}", t);
        }
        let empty = build_cut(&f, &Subset::empty(n), alpha, 0).unwrap();
        prop_assert_eq!(empty.constant, 0.0);
    }

    #[test]
    fn coverage_functions_are_lawful(f in (3usize..8).prop_flat_map(coverage)) {
        prop_assert!(check_submodular(&f, 12));
    }

    #[test]
    fn memoization_is_transparent(f in coverage(10), masks in prop::collection::vec(0..1u64 << 10, 1..40)) {
        let memo = Memoized::new(f.clone());
        for &m in masks.iter().chain(&masks) {
            let s = Subset::from_mask(10, m);
            prop_assert_eq!(memo.value(&s), f.value(&s));
        }
        prop_assert!(memo.cached_entries() <= masks.len());
    }

    #[test]
    fn dominance_is_a_partial_order((a, b, c) in (cut_strategy(4), cut_strategy(4), cut_strategy(4))) {
        prop_assert!(dominates(&a, &a).unwrap());
        if dominates(&a, &b).unwrap() && dominates(&b, &a).unwrap() {
            prop_assert_eq!(a.constant, b.constant);
            prop_assert_eq!(&a.coefficients, &b.coefficients);
        }
        if dominates(&a, &b).unwrap() && dominates(&b, &c).unwrap() {
            prop_assert!(dominates(&a, &c).unwrap());
        }
    }

    #[test]
    fn node_bound_never_grows_with_fixings(
        cuts in prop::collection::vec(cut_strategy(6), 1..4),
        costs in prop::collection::vec(1u32..5, 6),
        budget in 0u32..12,
        order in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        values in prop::collection::vec(any::<bool>(), 6),
    ) {
        let ks = Knapsack::new(costs.into_iter().map(f64::from).collect(), budget as f64);
        let mut ones = Subset::empty(6);
        let mut zeros = Subset::empty(6);
        let mut last = node_bound(&cuts, &ones, &zeros, &ks);
        for (&j, &v) in order.iter().zip(&values) {
            if v { ones.insert(j) } else { zeros.insert(j) }
            let b = node_bound(&cuts, &ones, &zeros, &ks);
            prop_assert!(b <= last + 1e-9, "{} after {}", b, last);
            last = b;
        }
        let value = if ks.is_feasible(&ones) {
            cuts.iter().map(|c| c.rhs(&ones)).fold(f64::INFINITY, f64::min)
        } else {
            f64::NEG_INFINITY
        };
        prop_assert!((last - value).abs() <= 1e-9 || last == value);
    }

    #[test]
    fn master_matches_enumeration(
        n in 2usize..11,
        seed_cuts in prop::collection::vec(cut_strategy(10), 1..5),
        costs in prop::collection::vec(1u32..6, 10),
        budget in 0u32..20,
    ) {
        let ks = Knapsack::new(costs[..n].iter().map(|&c| c as f64).collect(), budget as f64);
        let cuts: Vec<SubmodularCut> = seed_cuts
            .into_iter()
            .map(|mut c| {
                c.coefficients.truncate(n);
                c.generating_set = Subset::empty(n);
                c
            })
            .collect();
        let mut st = MasterState::new(ks.clone());
        for c in &cuts {
            st.add_cut(c.clone(), false).unwrap();
        }
        let opts = MasterOptions { gap_tol: 0.0, ..MasterOptions::default() };
        let sol = st.solve(&opts).unwrap();
        let pool_min = |x: &Subset| cuts.iter().map(|c| c.rhs(x)).fold(f64::INFINITY, f64::min);
        let best = all_subsets(n).filter(|x| ks.is_feasible(x)).map(|x| pool_min(&x)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((sol.eta - best).abs() <= 1e-9);
        prop_assert!(ks.is_feasible(&sol.x));
        prop_assert!((pool_min(&sol.x) - sol.eta).abs() <= 1e-9);

        // a pointwise weaker copy of any cut is redundant
        let mut weaker = cuts[0].clone();
        weaker.constant += 1.0;
        st.add_cut(weaker, false).unwrap();
        prop_assert!((st.solve(&opts).unwrap().eta - sol.eta).abs() <= 1e-9);
    }

    #[test]
    fn reduction_matrix_agrees_with_penalty_and_reference(seed in any::<u64>(), n in 3usize..10) {
        let inst = common::small_instance(seed, n, 2, 20);
        let net = &inst.network;
        for (i, sc) in inst.scenarios.iter().enumerate() {
            let m = reduction_matrix(net, sc);
            for (jpos, &j) in net.sources.iter().enumerate() {
                let d = shortest_times(net, sc, j);
                prop_assert_eq!(&d, &common::arrival_times(&inst, i, j));
                prop_assert_eq!(m.beta_inf[jpos], penalty(&d, None));
                for s in 0..n {
                    let two_way = match d[s] {
                        Some(t) => penalty(&d, None) - penalty(&d, Some(t)),
                        None => 0,
                    };
                    prop_assert_eq!(m.r[s][jpos], two_way);
                }
                let mut thresholds: Vec<u64> = d.iter().flatten().copied().collect();
                thresholds.sort_unstable();
                for w in thresholds.windows(2) {
                    prop_assert!(penalty(&d, Some(w[0])) <= penalty(&d, Some(w[1])));
                }
            }
            let f = &inst.oracles()[i];
            let full = Subset::full(n);
            prop_assert!(f.value(&full) <= f.ceiling() + 1e-12);
            let all: Vec<usize> = (0..n).collect();
            prop_assert!((f.value(&full) - common::reduction(&inst, i, &all)).abs() <= 1e-12);
        }
    }

    #[test]
    fn generated_instances_roundtrip(seed in any::<u64>(), n in 3usize..30, m in 1usize..4) {
        let p = GeneratorParams::with_edge_factor(n, 1.3, m, 1 + seed as usize % n, 15, seed);
        let inst = generate_instance(&p).unwrap();
        inst.validate().unwrap();
        let text = serialize_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst.clone());
        prop_assert_eq!(serialize_instance(&generate_instance(&p).unwrap()), text);
        prop_assert!(inst.network.sensor_costs.iter().all(|c| (5..=10).contains(c)));
        prop_assert!(inst.scenarios.iter().flat_map(|s| &s.edge_weights).all(|w| (1..=10).contains(w)));
    }

    #[test]
    fn subset_masks_roundtrip(n in 1usize..64, mask in any::<u64>()) {
        let mask = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        let s = Subset::from_mask(n, mask);
        prop_assert_eq!(s.mask(), Some(mask));
        prop_assert_eq!(Subset::from_indicator(&s.to_indicator()), s.clone());
        prop_assert_eq!(s.union(&s.complement()), Subset::full(n));
    }
}
