//! Exact continuous-time simulation of half-line and segment open ASEP, and
//! Monte Carlo estimates of the duality observable H.
//!
//! Events are drawn rejection-free: an exponential clock with the total rate,
//! then a categorical pick among active transitions. The half-line lattice is
//! cut at a closed wall W that is pushed 64 sites further whenever the rightmost
//! particle reaches W − 2, so no particle ever feels the wall.
//!
//! Trajectory k uses ChaCha8 seeded with `seed` on stream k; results are
//! reduced in trajectory order, so estimates do not depend on the thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::model::{observable_h, observable_h_segment, AsepState, ModelParams, OrderedSites, SegmentParams, SegmentState};

const WALL_STEP: i64 = 64;

/// Independent, reproducible random stream for trajectory `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_rates(rates: &[f64]) -> Result<()> {
    if rates.iter().all(|r| r.is_finite() && *r >= 0.0) {
        Ok(())
    } else {
        Err(Error::domain("rates must be finite and nonnegative"))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("t_end must be finite and nonnegative"))
    }
}

/// Set of sites with O(1) insert, remove and uniform indexing.
#[derive(Default)]
struct IndexedSet {
    items: Vec<i64>,
    pos: Vec<usize>,
}

impl IndexedSet {
    const ABSENT: usize = usize::MAX;

    fn grow(&mut self, sites: usize) {
        if self.pos.len() < sites {
            self.pos.resize(sites, Self::ABSENT);
        }
    }

    fn set(&mut self, x: i64, on: bool) {
        let xi = x as usize;
        let present = self.pos[xi] != Self::ABSENT;
        if on && !present {
            self.pos[xi] = self.items.len();
            self.items.push(x);
        } else if !on && present {
            let i = self.pos[xi];
            let last = *self.items.last().expect("nonempty");
            self.items.swap_remove(i);
            if last != x {
                self.pos[last as usize] = i;
            }
            self.pos[xi] = Self::ABSENT;
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

/// Per-trajectory bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrajectoryStats {
    pub events: u64,
    /// Attempts of the rightmost particle to jump onto the wall; 0 means the cut was invisible.
    pub wall_touches: u64,
    pub final_wall: i64,
}

struct HalfLine {
    eta: Vec<bool>,
    wall: i64,
    right: IndexedSet,
    left: IndexedSet,
    rightmost: i64,
    wall_touches: u64,
}

impl HalfLine {
    fn new(wall: i64) -> Self {
        let mut s = Self {
            eta: Vec::new(),
            wall: 0,
            right: IndexedSet::default(),
            left: IndexedSet::default(),
            rightmost: 0,
            wall_touches: 0,
        };
        s.extend_to(wall);
        s
    }

    fn extend_to(&mut self, wall: i64) {
        let old = self.wall;
        self.wall = wall;
        self.eta.resize(wall as usize + 2, false);
        self.right.grow(wall as usize + 2);
        self.left.grow(wall as usize + 2);
        if old > 0 {
            self.refresh(old - 1);
        }
    }

    fn occ(&self, x: i64) -> bool {
        self.eta[x as usize]
    }

    /// Bond (b, b+1), b ≥ 1; site W and beyond are closed.
    fn refresh(&mut self, b: i64) {
        if b < 1 || b + 1 > self.wall {
            return;
        }
        let (a, c) = (self.occ(b), self.occ(b + 1));
        self.right.set(b, a && !c && b + 1 < self.wall);
        self.left.set(b, !a && c);
        if a && !c && b + 1 == self.wall {
            self.wall_touches += 1;
        }
    }

    fn set_site(&mut self, x: i64, on: bool) {
        self.eta[x as usize] = on;
        if on && x > self.rightmost {
            self.rightmost = x;
        }
        if !on && x == self.rightmost {
            self.rightmost = (1..x).rev().find(|&y| self.occ(y)).unwrap_or(0);
        }
        self.refresh(x - 1);
        self.refresh(x);
        if self.rightmost >= self.wall - 2 {
            self.extend_to(self.wall + WALL_STEP);
        }
    }

    fn state(&self) -> AsepState {
        AsepState::from_sites((1..self.wall).filter(|&x| self.occ(x))).expect("sites are positive")
    }
}

/// One exact trajectory from the empty configuration, with the wall starting at `initial_wall`.
pub fn simulate_halfline_from_wall<R: Rng>(
    params: &ModelParams,
    t_end: f64,
    initial_wall: i64,
    rng: &mut R,
) -> Result<(AsepState, TrajectoryStats)> {
    let (p, q, alpha, gamma) = (params.p_rate(), params.q_rate(), params.alpha(), params.gamma());
    check_rates(&[p, q, alpha, gamma])?;
    check_time(t_end)?;
    if initial_wall < 4 {
        return Err(Error::domain("initial wall must be at least 4"));
    }
    let mut s = HalfLine::new(initial_wall);
    let mut t = 0.0;
    let mut events = 0u64;
    loop {
        let boundary = if s.occ(1) { gamma } else { alpha };
        let (rr, rl) = (p * s.right.len() as f64, q * s.left.len() as f64);
        let total = boundary + rr + rl;
        if total <= 0.0 {
            break;
        }
        let dt: f64 = rng.sample::<f64, _>(Exp1) / total;
        t += dt;
        if t > t_end {
            break;
        }
        events += 1;
        let u = rng.gen::<f64>() * total;
        if u < boundary {
            let on = !s.occ(1);
            s.set_site(1, on);
        } else if u < boundary + rr {
            let b = s.right.items[rng.gen_range(0..s.right.len())];
            s.set_site(b, false);
            s.set_site(b + 1, true);
        } else {
            let b = s.left.items[rng.gen_range(0..s.left.len())];
            s.set_site(b + 1, false);
            s.set_site(b, true);
        }
    }
    let stats = TrajectoryStats { events, wall_touches: s.wall_touches, final_wall: s.wall };
    Ok((s.state(), stats))
}

pub fn simulate_halfline<R: Rng>(params: &ModelParams, t_end: f64, rng: &mut R) -> Result<(AsepState, TrajectoryStats)> {
    simulate_halfline_from_wall(params, t_end, WALL_STEP, rng)
}

/// One exact trajectory of the segment process from `initial`.
pub fn simulate_segment<R: Rng>(
    params: &SegmentParams,
    t_end: f64,
    initial: &SegmentState,
    rng: &mut R,
) -> Result<(SegmentState, TrajectoryStats)> {
    let b = params.base();
    let (p, q, alpha, gamma, beta, delta) = (b.p_rate(), b.q_rate(), b.alpha(), b.gamma(), params.beta(), params.delta());
    check_rates(&[p, q, alpha, gamma, beta, delta])?;
    check_time(t_end)?;
    let ell = params.ell();
    if initial.ell() != ell {
        return Err(Error::domain("initial configuration has the wrong length"));
    }
    let mut s = initial.clone();
    let last = ell - 1;
    let mut rates: Vec<(f64, usize)> = Vec::with_capacity(ell + 2);
    let mut t = 0.0;
    let mut events = 0u64;
    // Event codes: 0 left boundary flip, 1 right boundary flip, 2 + b swap of bond (b, b+1).
    loop {
        rates.clear();
        rates.push((if s.eta(1) { gamma } else { alpha }, 0));
        rates.push((if s.eta(last) { beta } else { delta }, 1));
        for bond in 1..last {
            match (s.eta(bond), s.eta(bond + 1)) {
                (true, false) => rates.push((p, 2 + bond)),
                (false, true) => rates.push((q, 2 + bond)),
                _ => {}
            }
        }
        let total: f64 = rates.iter().map(|r| r.0).sum();
        if total <= 0.0 {
            break;
        }
        t += rng.sample::<f64, _>(Exp1) / total;
        if t > t_end {
            break;
        }
        events += 1;
        let mut u = rng.gen::<f64>() * total;
        let code = rates
            .iter()
            .find(|(r, _)| {
                u -= r;
                u < 0.0
            })
            .map_or(rates[rates.len() - 1].1, |r| r.1);
        let eta = s.eta_mut();
        match code {
            0 => eta[0] = !eta[0],
            1 => {
                let was = eta[last - 1];
                eta[last - 1] = !was;
                s.n_ell += if was { 1 } else { -1 };
            }
            c => eta.swap(c - 3, c - 2),
        }
    }
    Ok((s, TrajectoryStats { events, wall_touches: 0, final_wall: ell as i64 }))
}

/// Which process to simulate.
#[derive(Clone, Debug, PartialEq)]
pub enum SimModel {
    HalfLine(ModelParams),
    Segment { params: SegmentParams, initial: SegmentState },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub model: SimModel,
    pub t_end: f64,
    pub trajectories: usize,
    pub seed: u64,
    /// Each entry x⃗ requests E[∏ q^{N_{x_i}}].
    pub observables: Vec<OrderedSites>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trajectories: usize,
}

impl McEstimate {
    /// Sample mean and standard error of the mean, summed in slice order.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_error: (var / n as f64).sqrt(), trajectories: n }
    }

    /// |mean − target| in units of the standard error (∞ if SE = 0 and they differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub estimates: Vec<McEstimate>,
    pub wall_touches: u64,
    pub events: u64,
}

pub fn estimate(config: &SimConfig) -> Result<EstimateReport> {
    if config.trajectories == 0 {
        return Err(Error::domain("trajectories must be at least 1"));
    }
    check_time(config.t_end)?;
    let q = match &config.model {
        SimModel::HalfLine(m) => {
            for x in &config.observables {
                OrderedSites::halfline(x.as_slice().to_vec())?;
            }
            m.q()
        }
        SimModel::Segment { params, .. } => {
            for x in &config.observables {
                OrderedSites::segment(x.as_slice().to_vec(), params.ell())?;
            }
            params.base().q()
        }
    };
    let runs: Vec<Result<(Vec<f64>, TrajectoryStats)>> = crate::par::map_indexed(config.trajectories, |k| {
        let mut rng = trajectory_rng(config.seed, k as u64);
        match &config.model {
            SimModel::HalfLine(m) => {
                let (s, st) = simulate_halfline(m, config.t_end, &mut rng)?;
                let v: Result<Vec<f64>> = config.observables.iter().map(|x| observable_h(&s, x, q)).collect();
                Ok((v?, st))
            }
            SimModel::Segment { params, initial } => {
                let (s, st) = simulate_segment(params, config.t_end, initial, &mut rng)?;
                let v: Result<Vec<f64>> = config.observables.iter().map(|x| observable_h_segment(&s, x, q)).collect();
                Ok((v?, st))
            }
        }
    });
    let runs: Vec<(Vec<f64>, TrajectoryStats)> = runs.into_iter().collect::<Result<_>>()?;
    let estimates = (0..config.observables.len())
        .map(|j| McEstimate::from_samples(&runs.iter().map(|r| r.0[j]).collect::<Vec<_>>()))
        .collect();
    Ok(EstimateReport {
        estimates,
        wall_touches: runs.iter().map(|r| r.1.wall_touches).sum(),
        events: runs.iter().map(|r| r.1.events).sum(),
    })
}

/// Estimates u(t; x⃗) from the dual side: closed-boundary n-particle exclusion on
/// [1,ℓ] (𝗉 left, 𝗊 right), weighted by exp(−(𝗉−𝗊)ρ0·T_{x_1=1} + (𝗉−𝗊)ρℓ·T_{x_n=ℓ}),
/// times H(η, N; X(t)).
pub fn dual_reweighted_estimate(
    params: &SegmentParams,
    initial: &SegmentState,
    x: &OrderedSites,
    t_end: f64,
    trajectories: usize,
    seed: u64,
) -> Result<McEstimate> {
    let ell = params.ell() as i64;
    let x0 = OrderedSites::segment(x.as_slice().to_vec(), params.ell())?.as_slice().to_vec();
    check_time(t_end)?;
    if trajectories == 0 || x0.is_empty() {
        return Err(Error::domain("need at least one trajectory and one particle"));
    }
    let b = params.base();
    let (p, q) = (b.p_rate(), b.q_rate());
    let (kill, dup) = ((p - q) * params.rho0(), (p - q) * params.rho_ell());
    let qq = b.q();
    let samples: Vec<Result<f64>> = crate::par::map_indexed(trajectories, |k| {
        let mut rng = trajectory_rng(seed, k as u64);
        let mut y = x0.clone();
        let n = y.len();
        let mut t = 0.0;
        let mut log_w = 0.0;
        let mut moves: Vec<(f64, usize, i64)> = Vec::with_capacity(2 * n);
        loop {
            moves.clear();
            for i in 0..n {
                let left_free = if i == 0 { y[0] > 1 } else { y[i] - y[i - 1] > 1 };
                let right_free = if i + 1 == n { y[i] < ell } else { y[i + 1] - y[i] > 1 };
                if left_free {
                    moves.push((p, i, -1));
                }
                if right_free {
                    moves.push((q, i, 1));
                }
            }
            let total: f64 = moves.iter().map(|m| m.0).sum();
            let dt = if total > 0.0 { rng.sample::<f64, _>(Exp1) / total } else { f64::INFINITY };
            let stay = dt.min(t_end - t);
            let potential = if y[0] == 1 { -kill } else { 0.0 } + if y[n - 1] == ell { dup } else { 0.0 };
            log_w += potential * stay;
            t += dt;
            if t > t_end {
                break;
            }
            let mut u = rng.gen::<f64>() * total;
            let (_, i, d) = *moves
                .iter()
                .find(|m| {
                    u -= m.0;
                    u < 0.0
                })
                .unwrap_or(&moves[moves.len() - 1]);
            y[i] += d;
        }
        Ok(log_w.exp() * observable_h_segment(initial, &OrderedSites::raw(y), qq)?)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn half() -> ModelParams {
        ModelParams::with_rho_f64(1.0, 0.5, 0.9).unwrap()
    }

    #[test]
    fn zero_time_is_empty() {
        let (s, st) = simulate_halfline(&half(), 0.0, &mut trajectory_rng(1, 0)).unwrap();
        assert!(s.is_empty());
        assert_eq!(st.events, 0);
    }

    #[test]
    fn no_injection_stays_empty() {
        let m = ModelParams::from_f64(1.0, 0.5, 0.0, 0.3).unwrap();
        let (s, _) = simulate_halfline(&m, 5.0, &mut trajectory_rng(2, 0)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn closed_right_boundary_keeps_counter() {
        let sp = SegmentParams::new(half(), 4, Zero::zero(), Zero::zero()).unwrap();
        for k in 0..50 {
            let (s, _) = simulate_segment(&sp, 3.0, &SegmentState::empty(4), &mut trajectory_rng(3, k)).unwrap();
            assert_eq!(s.n_ell, 0);
        }
    }

    #[test]
    fn wall_position_is_invisible() {
        let m = half();
        for k in 0..200 {
            let a = simulate_halfline_from_wall(&m, 4.0, 64, &mut trajectory_rng(9, k)).unwrap();
            let b = simulate_halfline_from_wall(&m, 4.0, 74, &mut trajectory_rng(9, k)).unwrap();
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.wall_touches + b.1.wall_touches, 0);
        }
    }

    #[test]
    fn walls_extend_for_long_runs() {
        let m = ModelParams::with_rho_f64(1.0, 0.1, 1.0).unwrap();
        let (s, st) = simulate_halfline_from_wall(&m, 60.0, 8, &mut trajectory_rng(4, 0)).unwrap();
        assert!(st.final_wall > 8);
        assert_eq!(st.wall_touches, 0);
        assert!(s.sites().iter().all(|&x| x < st.final_wall - 1));
    }

    #[test]
    fn empty_observable_is_one() {
        let cfg = SimConfig {
            model: SimModel::HalfLine(half()),
            t_end: 1.0,
            trajectories: 100,
            seed: 5,
            observables: vec![OrderedSites::raw(vec![])],
        };
        let e = estimate(&cfg).unwrap().estimates[0];
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
    }
}
