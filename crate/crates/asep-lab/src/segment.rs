//! The dual process on the segment as a finite linear system.
//!
//! Chamber vectors of W^n_[1,ℓ] are indexed in colexicographic order, i.e.
//! rank(x⃗) = Σ_i C(x_i − 1, i). The expectation u(t) = E[H(η(t), N_ℓ(t); ·)]
//! solves u' = M u, so u(t) = exp(tM) u(0).

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};

use crate::duality::{chamber_vectors, GeneratorSpec, State};
use crate::error::{Error, Result};
use crate::model::{observable_h_segment, OrderedSites, Rational, SegmentParams, SegmentState};

fn binomial(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) as usize / (i + 1) as usize)
}

/// Colexicographic rank of a chamber vector with entries ≥ 1.
pub fn colex_rank(x: &[i64]) -> usize {
    x.iter().enumerate().map(|(i, &xi)| binomial(xi - 1, i as i64 + 1)).sum()
}

/// Generator matrix of D^(n,ρ0,ρℓ) on W^n_[1,ℓ].
#[derive(Clone, Debug)]
pub struct DualMatrix {
    n: usize,
    ell: usize,
    states: Vec<Vec<i64>>,
    /// Sparse rows (column, entry), diagonal included.
    exact: Vec<Vec<(usize, Rational)>>,
    dense: DMatrix<f64>,
}

impl DualMatrix {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn dim(&self) -> usize {
        self.states.len()
    }
    /// Chamber vectors in row order.
    pub fn states(&self) -> &[Vec<i64>] {
        &self.states
    }
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let ok = x.len() == self.n
            && x.windows(2).all(|w| w[0] < w[1])
            && x.first().is_some_and(|&a| a >= 1)
            && x.last().is_some_and(|&b| b <= self.ell as i64);
        ok.then(|| colex_rank(x))
    }
    pub fn exact_rows(&self) -> &[Vec<(usize, Rational)>] {
        &self.exact
    }
    pub fn exact_entry(&self, i: usize, j: usize) -> Rational {
        self.exact[i].iter().find(|(c, _)| *c == j).map_or_else(Rational::zero, |(_, v)| v.clone())
    }
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dense
    }
}

pub fn build_dual_matrix(params: &SegmentParams, n: usize) -> Result<DualMatrix> {
    let ell = params.ell();
    if n == 0 || n > ell {
        return Err(Error::domain(format!("need 1 <= n <= ell, got n = {n}, ell = {ell}")));
    }
    let mut states = chamber_vectors(n, 1, ell as i64);
    states.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    let g = GeneratorSpec::dual_segment(params);
    let rows: Vec<Result<Vec<(usize, Rational)>>> = crate::par::map_indexed(states.len(), |i| {
        let s = State::Chamber(states[i].clone());
        let mut diag = g.potential(&s);
        let mut row = Vec::new();
        for (rate, to) in g.transitions(&s)? {
            let State::Chamber(y) = to else { unreachable!("dual moves stay in the chamber") };
            diag -= &rate;
            row.push((colex_rank(&y), rate));
        }
        row.push((i, diag));
        row.sort_by_key(|(c, _)| *c);
        Ok(row)
    });
    let exact: Vec<Vec<(usize, Rational)>> = rows.into_iter().collect::<Result<_>>()?;
    let dim = states.len();
    let mut dense = DMatrix::zeros(dim, dim);
    for (i, row) in exact.iter().enumerate() {
        for (j, v) in row {
            dense[(i, *j)] = v.to_f64().unwrap_or(f64::NAN);
        }
    }
    Ok(DualMatrix { n, ell, states, exact, dense })
}

/// u(t) on W^n_[1,ℓ] with a solver error estimate.
#[derive(Clone, Debug)]
pub struct SegmentSolution {
    pub t: f64,
    pub values: Vec<f64>,
    /// max |exp(tM)u₀ − exp(tM/2)² u₀|.
    pub error_estimate: f64,
}

impl SegmentSolution {
    pub fn value(&self, m: &DualMatrix, x: &[i64]) -> Result<f64> {
        m.index_of(x).map(|i| self.values[i]).ok_or_else(|| Error::Chamber(x.to_vec()))
    }
}

/// u(0; x⃗) = H(η, N; x⃗) over the chamber.
pub fn initial_values(m: &DualMatrix, initial: &SegmentState, q: f64) -> Result<DVector<f64>> {
    if initial.ell() != m.ell {
        return Err(Error::domain("initial configuration has the wrong length"));
    }
    let v: Result<Vec<f64>> =
        m.states.iter().map(|x| observable_h_segment(initial, &OrderedSites::raw(x.clone()), q)).collect();
    Ok(DVector::from_vec(v?))
}

/// exp(tM) u.
pub fn propagate(m: &DualMatrix, u: &DVector<f64>, t: f64) -> DVector<f64> {
    (&m.dense * t).exp() * u
}

pub fn solve_u(t: f64, initial: &SegmentState, params: &SegmentParams, n: usize) -> Result<(DualMatrix, SegmentSolution)> {
    params.require_liggett2()?;
    let m = build_dual_matrix(params, n)?;
    let sol = solve_with(&m, t, initial, params.base().q())?;
    Ok((m, sol))
}

pub fn solve_with(m: &DualMatrix, t: f64, initial: &SegmentState, q: f64) -> Result<SegmentSolution> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain("t must be finite and nonnegative"));
    }
    let u0 = initial_values(m, initial, q)?;
    let full = (&m.dense * t).exp();
    let half = (&m.dense * (t / 2.0)).exp();
    let u = &full * &u0;
    let u2 = &half * (&half * &u0);
    let error_estimate = (&u - &u2).amax();
    if !u.iter().all(|v| v.is_finite()) {
        return Err(Error::numerical("solve_u", "non-finite matrix exponential"));
    }
    Ok(SegmentSolution { t, values: u.iter().copied().collect(), error_estimate })
}

/// Maximal residuals of the free-evolution characterisation, by kind of point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentFreeEvolutionReport {
    /// Chamber points away from both walls with no adjacent particles.
    pub bulk: f64,
    /// Points with x_1 = 1, using the left extension u(0,·) = (ρ0q + 1 − ρ0) u(1,·).
    pub left: f64,
    /// Points with x_n = ℓ, using the right extension u(·,ℓ+1) = (ρℓ/q + 1 − ρℓ) u(·,ℓ).
    pub right: f64,
    /// Points with adjacent particles, after imposing the collision relation.
    pub adjacent: f64,
}

impl SegmentFreeEvolutionReport {
    pub fn max(&self) -> f64 {
        self.bulk.max(self.left).max(self.right).max(self.adjacent)
    }
}

/// Checks d/dt u = Δ^{𝗉,𝗊} u with the boundary extensions. The time derivative is a
/// five-point difference of independent solves, so the check does not reuse M·u.
pub fn check_segment_free_evolution(
    m: &DualMatrix,
    params: &SegmentParams,
    t: f64,
    initial: &SegmentState,
) -> Result<SegmentFreeEvolutionReport> {
    let q = params.base().q();
    let (p, qr) = (params.base().p_rate(), params.base().q_rate());
    let (r0, rl) = (params.rho0(), params.rho_ell());
    let ell = m.ell as i64;
    let h = 1e-3;
    let u0 = initial_values(m, initial, q)?;
    let at = |s: f64| propagate(m, &u0, s);
    let u = at(t);
    let du = (at(t - 2.0 * h) - at(t - h) * 8.0 + at(t + h) * 8.0 - at(t + 2.0 * h)) / (12.0 * h);
    let ext = |y: &[i64]| -> f64 {
        let mut y = y.to_vec();
        let mut scale = 1.0;
        if y[0] == 0 {
            y[0] = 1;
            scale *= r0 * q + 1.0 - r0;
        }
        if *y.last().expect("n >= 1") == ell + 1 {
            *y.last_mut().expect("n >= 1") = ell;
            scale *= rl / q + 1.0 - rl;
        }
        scale * m.index_of(&y).map_or(f64::NAN, |i| u[i])
    };
    let mut rep = SegmentFreeEvolutionReport::default();
    for (k, x) in m.states.iter().enumerate() {
        let n = x.len();
        let adjacent = x.windows(2).any(|w| w[1] == w[0] + 1);
        let mut lap = 0.0;
        for i in 0..n {
            let blocked_left = i > 0 && x[i - 1] == x[i] - 1;
            let blocked_right = i + 1 < n && x[i + 1] == x[i] + 1;
            // Collision terms p·u(x_{i+1}^-) + q·u(x_i^+) − (p+q)·u(x) vanish by the collision relation.
            if !blocked_left {
                let mut y = x.clone();
                y[i] -= 1;
                lap += p * (ext(&y) - u[k]);
            }
            if !blocked_right {
                let mut y = x.clone();
                y[i] += 1;
                lap += qr * (ext(&y) - u[k]);
            }
        }
        let res = (du[k] - lap).abs();
        let slot = if adjacent {
            &mut rep.adjacent
        } else if x[0] == 1 {
            &mut rep.left
        } else if x[n - 1] == ell {
            &mut rep.right
        } else {
            &mut rep.bulk
        };
        *slot = slot.max(res);
    }
    Ok(rep)
}

/// Generator of the segment process on {0,1}^{ℓ−1}, the counter N_ℓ dropped; rows by bitmask.
pub fn segment_generator_matrix(params: &SegmentParams) -> Result<DMatrix<f64>> {
    let width = params.ell() - 1;
    let g = GeneratorSpec::segment(params);
    let dim = 1usize << width;
    let mut out = DMatrix::zeros(dim, dim);
    for mask in 0..dim {
        let e = crate::duality::Eta::new((0..width).filter(|b| mask >> b & 1 == 1).map(|b| b as i64 + 1), 0);
        for (rate, to) in g.transitions(&State::Eta(e))? {
            let State::Eta(t) = to else { unreachable!("segment moves stay on configurations") };
            let j = t.occupied.iter().fold(0usize, |acc, &s| acc | 1 << (s - 1));
            let r = rate.to_f64().unwrap_or(f64::NAN);
            out[(mask, j)] += r;
            out[(mask, mask)] -= r;
        }
    }
    Ok(out)
}

/// Stationary law π of the segment process, π L = 0 and Σπ = 1; indexed by bitmask.
pub fn stationary_distribution(params: &SegmentParams) -> Result<Vec<f64>> {
    let l = segment_generator_matrix(params)?;
    let dim = l.nrows();
    let mut a = l.transpose();
    let mut b = DVector::zeros(dim);
    for j in 0..dim {
        a[(dim - 1, j)] = 1.0;
    }
    b[dim - 1] = 1.0;
    a.lu().solve(&b).map(|v| v.iter().copied().collect()).ok_or_else(|| Error::numerical("stationary_distribution", "singular generator"))
}
