use proptest::prelude::*;

use asep_lab::duality::{verify_fullspace, verify_halfline, verify_segment, Eta};
use asep_lab::kpz::{she_moment_nested, Boundary, ContourSpec, KpzParams};
use asep_lab::model::{observable_h, AsepState, ModelParams, OrderedSites, Rational, SegmentParams, SegmentState};
use asep_lab::moments::{v_n, QuadratureSpec};
use asep_lab::partitions::{enumerate_diagrams, partitions_of};
use asep_lab::segment::{build_dual_matrix, initial_values, propagate, solve_u};
use asep_lab::simulator::{estimate, SimConfig, SimModel};

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// 𝗉 ∈ [1, 3], 𝗊 = 𝗉·k/13, ρ = j/13, all exact.
fn liggett_params() -> impl Strategy<Value = ModelParams> {
    (7i64..=21, 1i64..=12, 1i64..=13)
        .prop_map(|(p, k, j)| ModelParams::with_rho(rat(p, 7), rat(p * k, 7 * 13), rat(j, 13)).unwrap())
}

fn chamber(n_max: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::btree_set(lo..=hi, 1..=n_max).prop_map(|s| s.into_iter().collect())
}

fn config(lo: i64, hi: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::btree_set(lo..=hi, 0..=(hi - lo + 1) as usize).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_in_unit_interval_and_current_steps_by_one(sites in config(1, 12), x in chamber(4, 1, 14)) {
        let s = AsepState::from_sites(sites).unwrap();
        let h = observable_h(&s, &OrderedSites::raw(x.clone()), 0.5).unwrap();
        prop_assert!(h > 0.0 && h <= 1.0);
        prop_assert_eq!(h == 1.0, x.iter().all(|&xi| s.current(xi) == 0));
        for y in 1..14 {
            let d = s.current(y) - s.current(y + 1);
            prop_assert!(d == 0 || d == 1);
        }
    }

    #[test]
    fn liggett_is_exact(m in liggett_params(), k in 1i64..1000) {
        prop_assert!(m.liggett_ok());
        let g = m.gamma_exact() + rat(1, 1_000_000 * k);
        let off = ModelParams::new(m.p_exact().clone(), m.q_rate_exact().clone(), m.alpha_exact().clone(), g).unwrap();
        prop_assert!(!off.liggett_ok());
    }

    #[test]
    fn formula_ok_matches_threshold(q in 0.05f64..0.95, rho in 0.3f64..1.0) {
        let m = ModelParams::with_rho_f64(1.0, q, rho).unwrap();
        let threshold = 1.0 / (1.0 + q.sqrt());
        prop_assume!((rho - threshold).abs() > 1e-9);
        prop_assert_eq!(m.formula_ok(), rho > threshold);
    }

    #[test]
    fn diagrams_are_valid_valleys(n in 1usize..=6, pick in any::<prop::sample::Index>(), dpick in any::<prop::sample::Index>()) {
        let parts = partitions_of(n).unwrap();
        let lambda = &parts[pick.index(parts.len())];
        prop_assert!(lambda.parts().windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(lambda.parts().iter().sum::<usize>(), n);
        let ds = enumerate_diagrams(lambda);
        let d = &ds[dpick.index(ds.len())];
        let mut labels: Vec<usize> = d.rows().iter().flat_map(|r| r.labels().to_vec()).collect();
        labels.sort_unstable();
        prop_assert_eq!(labels, (1..=n).collect::<Vec<_>>());
        for row in d.rows() {
            let (l, m) = (row.labels(), row.pivot_index());
            prop_assert!(l[..=m].windows(2).all(|w| w[0] > w[1]));
            prop_assert!(l[m..].windows(2).all(|w| w[0] < w[1]));
        }
        let map = d.substitution_map();
        prop_assert_eq!(map.images().len(), n);
        prop_assert_eq!(map.free_vars().len(), lambda.len());
        for mono in map.images() {
            prop_assert!(mono.qexp >= 0 && mono.qexp < n as i32);
            prop_assert_eq!(mono.vpow == 0, mono.var.is_none());
        }
    }

    #[test]
    fn halfline_and_fullspace_duality_exact(m in liggett_params(), eta in config(1, 6), x in chamber(3, 1, 7)) {
        let e = Eta::new(eta, 0);
        prop_assert!(verify_halfline(&m, &e, &x).unwrap().passed());
        prop_assert!(verify_fullspace(&m, &e, &x).unwrap().passed());
    }

    #[test]
    fn segment_through_count_scales_by_q_power(m in liggett_params(), rl in 0i64..=13, ell in 2usize..=5, seed in any::<u64>(), k in 1i64..=2) {
        let s = SegmentParams::with_rhos(m.p_exact().clone(), m.q_rate_exact().clone(), m.rho_exact(), rat(rl, 13), ell).unwrap();
        let eta: Vec<i64> = (1..ell as i64).filter(|i| seed >> i & 1 == 1).collect();
        let n = 1 + (seed % ell.min(3) as u64) as usize;
        let x: Vec<i64> = (1..=n as i64).map(|i| i + (ell as i64 - n as i64) * ((seed >> 8) % 2) as i64).collect();
        let base = verify_segment(&s, &Eta::new(eta.clone(), 0), &x).unwrap();
        let shifted = verify_segment(&s, &Eta::new(eta, k), &x).unwrap();
        prop_assert!(base.passed() && shifted.passed());
        let factor = num_traits::pow(s.base().q_exact(), n * k as usize);
        prop_assert_eq!(shifted.lhs, base.lhs * factor);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn moments_are_probabilities(q in 0.3f64..0.7, t in 0.0f64..2.0, x in chamber(2, 1, 5)) {
        let rho = 0.05 + 1.0 / (1.0 + q.sqrt());
        let m = ModelParams::with_rho_f64(1.0, q, rho.min(1.0)).unwrap();
        let r = v_n(t, &x, &m, &QuadratureSpec::auto()).unwrap();
        prop_assert!(r.value > 0.0 && r.value <= 1.0 + r.quad_err + 1e-12);
        let total: f64 = r.per_partition.iter().map(|(_, v)| v).sum();
        prop_assert!((total - r.value).abs() < 1e-14);
    }

    #[test]
    fn first_moment_nondecreasing_in_x(q in 0.3f64..0.7, t in 0.1f64..2.0) {
        let m = ModelParams::with_rho_f64(1.0, q, 1.0).unwrap();
        let quad = QuadratureSpec::auto();
        let v: Vec<f64> = (1..=5).map(|x| v_n(t, &[x], &m, &quad).unwrap().value).collect();
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", v);
    }

    #[test]
    fn node_doubling_is_converged(x in chamber(3, 1, 4)) {
        let m = ModelParams::with_rho_f64(1.0, 0.5, 0.9).unwrap();
        let a = v_n(1.0, &x, &m, &QuadratureSpec::fixed(128).unwrap()).unwrap().value;
        let b = v_n(1.0, &x, &m, &QuadratureSpec::fixed(256).unwrap()).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn segment_semigroup(t1 in 0.0f64..1.5, t2 in 0.0f64..1.5, n in 1usize..=3) {
        let s = SegmentParams::with_rhos_f64(1.0, 0.4, 0.8, 0.3, 5).unwrap();
        let init = SegmentState::new(vec![true, false, true, false], 0);
        let m = build_dual_matrix(&s, n).unwrap();
        let u0 = initial_values(&m, &init, s.base().q()).unwrap();
        let two_step = propagate(&m, &propagate(&m, &u0, t1), t2);
        let (_, direct) = solve_u(t1 + t2, &init, &s, n).unwrap();
        let diff = two_step.iter().zip(&direct.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10);
    }

    #[test]
    fn mc_estimates_lie_in_unit_interval(seed in any::<u64>(), t in 0.0f64..2.0) {
        let m = ModelParams::with_rho_f64(1.0, 0.5, 0.9).unwrap();
        let cfg = SimConfig {
            model: SimModel::HalfLine(m),
            t_end: t,
            trajectories: 200,
            seed,
            observables: vec![OrderedSites::raw(vec![1]), OrderedSites::raw(vec![2, 3])],
        };
        for e in estimate(&cfg).unwrap().estimates {
            prop_assert!((0.0..=1.0).contains(&e.mean) && e.std_error >= 0.0);
        }
    }

    #[test]
    fn she_moments_positive_and_offset_invariant(a in 0.3f64..3.0, t in 0.4f64..1.5, x1 in 0.0f64..1.5, dx in 0.0f64..1.0, dr in -0.1f64..0.1) {
        let k = KpzParams::new(Boundary::Robin { a }, t, vec![x1, x1 + dx]).unwrap();
        let base = she_moment_nested(&k, &ContourSpec::standard(2)).unwrap().value;
        let moved = she_moment_nested(&k, &ContourSpec::new(vec![0.0, 1.5 + dr]).unwrap()).unwrap().value;
        prop_assert!(base > 0.0);
        prop_assert!((base - moved).abs() < 1e-8 * base.max(1.0));
    }
}
