use losstree::lossmodel::{forward, general_solution, is_feasible, l0, l1, receiver_solution, sample_feasible, TOL};
use losstree::noiseless::{closed_form, recovery_condition, solve, unique_sparsest, upsparse};
use losstree::noisy::{
    glocal_l1, is_interval_feasible, local_min_l0, local_min_l1, upsparse_plus, IntervalObservation, Objective,
    Upper,
};
use losstree::oracle::{ambiguous_pair, sparsest_enumerate, RESTRICTED_TOL};
use losstree::rng::substream;
use losstree::topology::{gen_random_tree, parse_topology};
use losstree::LogicalTree;
use proptest::prelude::*;

fn tree() -> impl Strategy<Value = LogicalTree> {
    (2usize..9, 2usize..5, any::<u64>()).prop_map(|(m, b, s)| gen_random_tree(m, b, s).unwrap())
}

/// Tree with a sparse non-negative loss vector on it.
fn tree_and_x() -> impl Strategy<Value = (LogicalTree, Vec<f64>)> {
    tree().prop_flat_map(|t| {
        let n = t.n();
        let x = prop::collection::vec(prop_oneof![3 => Just(0.0), 2 => 0.001f64..0.2], n);
        (Just(t), x)
    })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn upsparse_is_start_independent((t, x) in tree_and_x(), seed in any::<u64>()) {
        let y = forward(&t, &x).unwrap();
        let reference = closed_form(&t, &y).unwrap();
        let mut rng = substream(seed, &[]);
        for _ in 0..5 {
            let x0 = sample_feasible(&t, &y, 0.3, &mut rng);
            prop_assert!(close(&upsparse(&t, &y, Some(&x0)).unwrap().x, &reference, TOL));
        }
        prop_assert!(close(&upsparse(&t, &y, Some(&x)).unwrap().x, &reference, TOL));
    }

    #[test]
    fn upsparse_is_idempotent((t, x) in tree_and_x()) {
        let y = forward(&t, &x).unwrap();
        let once = solve(&t, &y).unwrap().x;
        prop_assert_eq!(upsparse(&t, &y, Some(&once)).unwrap().x, once.clone());
        // Re-solving from the re-measured output only differs by rounding.
        prop_assert!(close(&solve(&t, &forward(&t, &once).unwrap()).unwrap().x, &once, 1e-12));
    }

    #[test]
    fn solution_norms_are_minimal((t, x) in tree_and_x(), seed in any::<u64>()) {
        let y = forward(&t, &x).unwrap();
        let r = solve(&t, &y).unwrap();
        prop_assert!(is_feasible(&t, &r.x, &y, TOL));
        prop_assert!(r.l0 <= t.m());
        prop_assert!(r.l0 <= l0(&x) && r.l1 <= l1(&x) + 1e-12);
        let mut rng = substream(seed, &[1]);
        for _ in 0..5 {
            let xs = sample_feasible(&t, &y, 0.3, &mut rng);
            prop_assert!(r.l0 <= l0(&xs));
            if !close(&xs, &r.x, TOL) {
                prop_assert!(l1(&xs) > r.l1);
            }
        }
    }

    #[test]
    fn recovery_condition_gives_exact_recovery((t, x) in tree_and_x()) {
        let y = forward(&t, &x).unwrap();
        let r = solve(&t, &y).unwrap();
        if recovery_condition(&t, &x) {
            prop_assert!(close(&r.x, &x, TOL));
        }
        // The output itself is always in upstate.
        prop_assert!(recovery_condition(&t, &r.x));
    }

    #[test]
    fn unique_sparsest_matches_oracle_when_claimed((t, x) in tree_and_x()) {
        prop_assume!(t.n() <= 12);
        let y = forward(&t, &x).unwrap();
        let r = solve(&t, &y).unwrap();
        let e = sparsest_enumerate(&t, &y, t.m(), RESTRICTED_TOL).unwrap();
        prop_assert_eq!(e.k_star, r.l0);
        if unique_sparsest(&t, &r.x) {
            prop_assert!(e.unique);
        }
    }

    #[test]
    fn general_solution_is_feasible_for_upstate_internals((t, x) in tree_and_x()) {
        let y = forward(&t, &x).unwrap();
        let internal: Vec<f64> = t.internal_nodes().map(|k| x[k - 1]).collect();
        let rebuilt = general_solution(&t, &internal, &y).unwrap();
        prop_assert!(close(&rebuilt, &x, 1e-12));
        let recv = receiver_solution(&t, &y).unwrap();
        prop_assert!(is_feasible(&t, &recv, &y, TOL));
    }

    #[test]
    fn noisy_solutions_are_feasible_and_reduce((t, x) in tree_and_x(), seed in any::<u64>()) {
        let y = forward(&t, &x).unwrap();
        let exact = IntervalObservation::exact(&y).unwrap();
        let reference = solve(&t, &y).unwrap().x;
        let mut rng = substream(seed, &[2]);
        let lo: Vec<f64> = y.iter().map(|&v| (v - rand::Rng::random_range(&mut rng, 0.0..0.05)).max(0.0)).collect();
        let hi: Vec<Upper> = y.iter().map(|&v| {
            if rand::Rng::random_bool(&mut rng, 0.2) { Upper::Unbounded } else { Upper::Finite(v + rand::Rng::random_range(&mut rng, 0.0..0.05)) }
        }).collect();
        let obs = IntervalObservation::new(lo, hi).unwrap();
        for mode in Objective::ALL {
            prop_assert_eq!(&upsparse_plus(&t, &exact, mode).unwrap().x, &reference);
            let s = upsparse_plus(&t, &obs, mode).unwrap();
            prop_assert!(is_interval_feasible(&t, &obs, &s.x));
            prop_assert!(obs.contains(&s.y, TOL));
        }
        let sparse = upsparse_plus(&t, &obs, Objective::MinL0).unwrap();
        let joint = upsparse_plus(&t, &obs, Objective::MinL1AmongMinL0).unwrap();
        let dense = upsparse_plus(&t, &obs, Objective::MinL1).unwrap();
        prop_assert_eq!(sparse.l0, joint.l0);
        prop_assert!(joint.l1 <= sparse.l1 + 1e-12);
        prop_assert!(dense.l1 <= joint.l1 + 1e-12);
    }

    #[test]
    fn local_l1_formula(lo in prop::collection::vec(0.0f64..10.0, 2..6), x_frac in 0.0f64..1.0) {
        let m = lo.len();
        let obs = IntervalObservation::new(lo.clone(), vec![Upper::Unbounded; m]).unwrap();
        let ymin = lo.iter().copied().fold(f64::INFINITY, f64::min);
        let x = ymin * x_frac;
        // Below every lower end the family is sum(y) - x (m - 1).
        let expected = lo.iter().sum::<f64>() - x * (m as f64 - 1.0);
        prop_assert!((glocal_l1(&obs, x) - expected).abs() < 1e-9);
        let s = local_min_l0(&obs).unwrap();
        let d = local_min_l1(&obs).unwrap();
        prop_assert!(s.set.contains(s.x));
        prop_assert!(d.set.contains(d.x));
    }

    #[test]
    fn ambiguous_pairs_share_observations(t in tree(), pick in any::<prop::sample::Index>(), extra in 0usize..2, w in 0.001f64..1.0) {
        let internal: Vec<usize> = t.internal_nodes().collect();
        let i = internal[pick.index(internal.len())];
        let k = t.children(i).len() + extra;
        let p = ambiguous_pair(&t, i, k, w).unwrap();
        let (pu, pv) = p.path_units(&t);
        prop_assert_eq!(pu, pv);
        prop_assert_eq!(l0(&p.u()), k);
        prop_assert!(l0(&p.v()) <= k);
        prop_assert!(p.u() != p.v());
    }

    #[test]
    fn topology_text_round_trips(t in tree()) {
        let back = parse_topology(&t.to_topology_text()).unwrap();
        prop_assert_eq!(back.measurement_matrix().dense(), t.measurement_matrix().dense());
        for k in 1..=t.n() {
            prop_assert_eq!(back.father(k), t.father(k));
        }
    }
}
