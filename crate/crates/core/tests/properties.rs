mod common;

use proptest::prelude::*;
use roundness_core::negtype::supremal_p_unchecked;
use roundness_core::{
    default_threshold, gns_embed, gram_from_kernel, is_negative_type, power_transform, restrict,
    search_violation, supremal_p, validate_metric, Exec, FiniteMetricSpace, SearchOptions,
    Strategy as Search,
};

const TOL: f64 = 1e-6;

fn space_strategy(max_n: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    (2..=max_n, any::<u64>()).prop_map(|(n, seed)| common::random_metric(&mut common::rng(seed), n))
}

fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    nalgebra::SymmetricEigen::new(mat).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn restrictions_stay_metric(space in space_strategy(9), mask in any::<u16>()) {
        let subset: Vec<usize> = (0..space.len()).filter(|i| mask & (1 << i) != 0).collect();
        let sub = restrict(&space, &subset).unwrap();
        prop_assert!(validate_metric(&sub.rows()).unwrap().valid);
    }

    #[test]
    fn power_then_root_recovers_distances(space in space_strategy(8), p in 0.1f64..6.0) {
        let k = power_transform(&space, p).unwrap();
        for i in 0..space.len() {
            for j in 0..space.len() {
                let back = k.get(i, j).powf(1.0 / p);
                prop_assert!((back - space.d(i, j)).abs() <= 1e-12 * space.d(i, j).max(1.0));
            }
        }
    }

    #[test]
    fn integer_powers_of_graph_metrics_are_exact(n in 2usize..30, p in 1u32..5) {
        let (_, space) = roundness_core::path(n).unwrap();
        let k = power_transform(&space, p as f64).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(k.get(i, j), (i.abs_diff(j) as u64).pow(p) as f64);
            }
        }
    }

    #[test]
    fn checker_agrees_with_sampling_oracle(n in 2usize..8, seed in any::<u64>(), mode in 0u8..3) {
        let mut rng = common::rng(seed);
        let k = match mode {
            0 => common::random_kernel(&mut rng, n, 0.0, 1.0),
            1 => common::random_kernel(&mut rng, n, -1.0, 1.0),
            _ => common::euclidean_power_kernel(&mut rng, n, 2, 1.0),
        };
        let thr = default_threshold(&k);
        let cert = is_negative_type(&k, thr).unwrap();
        let oracle = common::brute_force_extremal(&k, 20_000, seed ^ 0x5eed);
        if cert.is_negative_type {
            prop_assert!(oracle <= thr, "oracle {} > {}", oracle, thr);
        } else {
            prop_assert!(oracle > thr);
            let w = cert.witness.as_ref().unwrap();
            prop_assert!(w.iter().sum::<f64>().abs() < 1e-12);
            prop_assert!((k.quadratic_form(w) - cert.extremal_value).abs() < 1e-12 * k.inf_norm().max(1.0));
            prop_assert!(cert.extremal_value > thr);
        }
    }

    #[test]
    fn gram_psd_iff_negative_type(n in 2usize..8, seed in any::<u64>(), mode in 0u8..3) {
        let mut rng = common::rng(seed);
        let k = match mode {
            0 => common::random_kernel(&mut rng, n, 0.0, 1.0),
            1 => common::euclidean_power_kernel(&mut rng, n, 3, 1.5),
            _ => common::euclidean_power_kernel(&mut rng, n.max(3), 1, 3.0),
        };
        let thr = default_threshold(&k);
        let psd = min_eigenvalue(&gram_from_kernel(&k, 0).unwrap()) >= -thr;
        prop_assert_eq!(psd, is_negative_type(&k, thr).unwrap().is_negative_type);
    }

    #[test]
    fn gns_round_trip_below_p_star(space in space_strategy(9), frac in 0.01f64..=1.0, base in 0usize..9) {
        let res = supremal_p(&space, TOL, 8.0).unwrap();
        let k = power_transform(&space, res.p_star * frac).unwrap();
        let conf = gns_embed(&k, base % space.len(), default_threshold(&k)).unwrap();
        prop_assert!(conf.points[conf.basepoint_index].iter().all(|&x| x == 0.0));
        prop_assert!(conf.dimension < space.len());
        prop_assert!(conf.reconstruction_error(&k) <= 1e-8);
    }

    #[test]
    fn bisection_brackets(space in space_strategy(9)) {
        let res = supremal_p(&space, TOL, 8.0).unwrap();
        prop_assert!(res.p_star >= 0.0);
        prop_assert!(res.lower_certificate.is_negative_type);
        prop_assert!(res.lower_p >= res.p_star - TOL);
        if res.capped {
            prop_assert!(res.upper_certificate.is_none());
            prop_assert_eq!(res.p_star, 8.0);
        } else {
            prop_assert!(!res.upper_certificate.as_ref().unwrap().is_negative_type);
            prop_assert!(res.upper_p.unwrap() <= res.p_star + TOL);
        }
    }

    #[test]
    fn no_certificate_below_p_star(space in space_strategy(6), seed in any::<u64>()) {
        let res = supremal_p(&space, TOL, 8.0).unwrap();
        let p = res.p_star - 2.0 * TOL;
        prop_assume!(p > 0.0);
        for strategy in [Search::Exhaustive, Search::Random, Search::Local] {
            let opts = SearchOptions { strategy, budget: 2_000, max_n: 3, seed, ..Default::default() };
            prop_assert!(search_violation(&space, p, &opts).unwrap().is_none());
        }
    }

    #[test]
    fn parallel_and_sequential_bisection_agree(space in space_strategy(7)) {
        let spaces = vec![space.clone(), space.scaled(3.0).unwrap()];
        let seq = roundness_core::batch_roundness(&spaces, TOL, 8.0, Exec::Sequential);
        let par = roundness_core::batch_roundness(&spaces, TOL, 8.0, Exec::Parallel);
        for (a, b) in seq.iter().zip(&par) {
            prop_assert_eq!(a.as_ref().unwrap(), b.as_ref().unwrap());
        }
    }
}

/// Exhaustive search just above `p*` on spaces of at most five points.
/// Multiplicities up to five cannot realize every real witness direction, so
/// misses are counted rather than treated as failures; every certificate
/// that is found must be genuine.
#[test]
fn small_scale_completeness_is_recorded() {
    let mut found = 0;
    let mut gaps = Vec::new();
    for seed in 0..60u64 {
        let mut rng = common::rng(seed);
        let n = 3 + (seed as usize % 3);
        let space = common::random_metric(&mut rng, n);
        let res = supremal_p_unchecked(&space, TOL, 8.0).unwrap();
        let p = res.p_star + 0.05;
        if p >= 8.0 {
            continue;
        }
        let opts = SearchOptions { strategy: Search::Exhaustive, max_n: 5, budget: 1, ..Default::default() };
        match search_violation(&space, p, &opts).unwrap() {
            Some(cert) => {
                assert!(cert.deficiency < 0.0);
                found += 1;
            }
            None => gaps.push((seed, n, res.p_star)),
        }
    }
    println!("small-scale completeness: {found} found, {} gaps: {gaps:?}", gaps.len());
    assert!(found > 0);
}

#[test]
fn group_balls_with_collinear_points_stay_below_two() {
    for (rank, radius) in [(1, 3), (2, 2), (3, 1), (2, 3)] {
        let (_, s) = roundness_core::zn_ball(rank, radius).unwrap();
        assert!(supremal_p(&s, TOL, 8.0).unwrap().p_star <= 2.0 + TOL);
    }
    // a, e, A are collinear in every free group ball.
    for radius in 1..=3 {
        let (_, s) = roundness_core::free_group_ball(2, radius).unwrap();
        assert!(supremal_p(&s, TOL, 8.0).unwrap().p_star <= 2.0 + TOL);
    }
}
