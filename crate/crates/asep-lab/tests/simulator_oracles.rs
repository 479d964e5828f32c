//! Monte Carlo estimates against exact oracles (integral formula, segment ODE,
//! stationary law). Statistical checks use 4 standard errors.

use asep_lab::model::{ModelParams, OrderedSites, SegmentParams, SegmentState};
use asep_lab::moments::{first_moment_closed, QuadratureSpec};
use asep_lab::segment::{solve_u, stationary_distribution};
use asep_lab::simulator::{dual_reweighted_estimate, estimate, simulate_segment, trajectory_rng, SimConfig, SimModel};

fn seg() -> SegmentParams {
    SegmentParams::with_rhos_f64(1.0, 0.5, 0.75, 0.3, 4).unwrap()
}

#[test]
fn halfline_first_moment() {
    let m = ModelParams::with_rho_f64(1.0, 0.5, 0.9).unwrap();
    let cfg = SimConfig {
        model: SimModel::HalfLine(m.clone()),
        t_end: 2.0,
        trajectories: 20_000,
        seed: 11,
        observables: vec![OrderedSites::raw(vec![2])],
    };
    let rep = estimate(&cfg).unwrap();
    let exact = first_moment_closed(2.0, 2, &m, &QuadratureSpec::auto()).unwrap();
    assert!(rep.estimates[0].z_score(exact) < 4.0, "{:?} vs {exact}", rep.estimates[0]);
    assert_eq!(rep.wall_touches, 0);
}

#[test]
fn estimates_are_reproducible_and_scale() {
    let m = ModelParams::with_rho_f64(1.0, 0.5, 0.9).unwrap();
    let mk = |n| SimConfig {
        model: SimModel::HalfLine(m.clone()),
        t_end: 1.0,
        trajectories: n,
        seed: 3,
        observables: vec![OrderedSites::raw(vec![1, 3])],
    };
    let a = estimate(&mk(4000)).unwrap();
    let b = estimate(&mk(4000)).unwrap();
    assert_eq!(a.estimates[0].mean.to_bits(), b.estimates[0].mean.to_bits());
    let c = estimate(&mk(8000)).unwrap();
    let ratio = c.estimates[0].std_error / a.estimates[0].std_error;
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.2 * std::f64::consts::FRAC_1_SQRT_2, "{ratio}");
    assert!(a.estimates[0].std_error > 0.0);
}

#[test]
fn segment_matches_ode() {
    let s = seg();
    let init = SegmentState::empty(4);
    let xs = [vec![2], vec![1, 3]];
    let cfg = SimConfig {
        model: SimModel::Segment { params: s.clone(), initial: init.clone() },
        t_end: 1.0,
        trajectories: 20_000,
        seed: 21,
        observables: xs.iter().map(|x| OrderedSites::raw(x.clone())).collect(),
    };
    let rep = estimate(&cfg).unwrap();
    for (x, est) in xs.iter().zip(&rep.estimates) {
        let (m, sol) = solve_u(1.0, &init, &s, x.len()).unwrap();
        let exact = sol.value(&m, x).unwrap();
        assert!(est.z_score(exact) < 4.0, "{x:?}: {est:?} vs {exact}");
    }
}

#[test]
fn dual_reweighting_matches_ode() {
    let s = seg();
    let init = SegmentState::new(vec![true, false, true], 0);
    for x in [vec![1], vec![2, 4]] {
        let (m, sol) = solve_u(1.0, &init, &s, x.len()).unwrap();
        let exact = sol.value(&m, &x).unwrap();
        let est = dual_reweighted_estimate(&s, &init, &OrderedSites::raw(x.clone()), 1.0, 20_000, 5).unwrap();
        assert!(est.z_score(exact) < 4.0, "{x:?}: {est:?} vs {exact}");
    }
}

#[test]
fn segment_relaxes_to_stationary_law() {
    let s = SegmentParams::with_rhos_f64(1.0, 0.5, 0.75, 0.3, 3).unwrap();
    let pi = stationary_distribution(&s).unwrap();
    let samples = 100_000;
    let mut counts = [0usize; 4];
    for k in 0..samples as u64 {
        let (st, _) = simulate_segment(&s, 15.0, &SegmentState::empty(3), &mut trajectory_rng(8, k)).unwrap();
        let mask = st.bits().iter().enumerate().fold(0, |a, (i, &b)| a | (usize::from(b) << i));
        counts[mask] += 1;
    }
    let tv: f64 = 0.5 * counts.iter().zip(&pi).map(|(&c, p)| (c as f64 / samples as f64 - p).abs()).sum::<f64>();
    assert!(tv < 0.01, "total variation {tv}");
}
