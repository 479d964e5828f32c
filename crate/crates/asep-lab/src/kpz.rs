//! Moments of the half-line stochastic heat equation with Robin or Dirichlet
//! boundary, the weakly asymmetric ASEP moments that converge to them, and a
//! finite-difference oracle for the first moment.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{rational_from_f64, ModelParams};
use crate::moments::{residue_sum, DiagramSet, MomentResult, QuadratureSpec};
use crate::quadrature::{integrate, NodeSet};
use crate::residue::{AtomicFactor, Integrand, Kernel};

/// Boundary condition at x = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// ∂_x Z = A·Z with A > 0.
    Robin { a: f64 },
    /// Z = 0.
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KpzParams {
    boundary: Boundary,
    t: f64,
    x: Vec<f64>,
}

impl KpzParams {
    /// Requires t > 0, 0 ≤ x_1 ≤ … ≤ x_n, and A > 0 for Robin.
    pub fn new(boundary: Boundary, t: f64, x: Vec<f64>) -> Result<Self> {
        if let Boundary::Robin { a } = boundary {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain("Robin parameter A must be positive"));
            }
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain("t must be positive"));
        }
        if x.is_empty() || x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("x must be a nonempty, nonnegative, weakly increasing vector"));
        }
        Ok(Self { boundary, t, x })
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn n(&self) -> usize {
        self.x.len()
    }

    fn kernel(&self) -> Kernel {
        match self.boundary {
            Boundary::Robin { a } => Kernel::Robin { a, t: self.t },
            Boundary::Dirichlet => Kernel::Dirichlet { t: self.t },
        }
    }

    /// 2^n for Robin, 4^n for Dirichlet.
    fn prefactor(&self) -> f64 {
        let base = match self.boundary {
            Boundary::Robin { .. } => 2.0,
            Boundary::Dirichlet => 4.0,
        };
        base_pow(base, self.n())
    }
}

fn base_pow(b: f64, n: usize) -> f64 {
    b.powi(n as i32)
}

/// Vertical contours r_k + iR, truncated and discretised.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourSpec {
    offsets: Vec<f64>,
    /// Tail bound for the Gaussian factor beyond the truncation height.
    pub tail_tol: f64,
    /// Node spacing is spacing_scale/√t.
    pub spacing_scale: f64,
}

impl ContourSpec {
    /// Requires r_1 = 0 and r_k − r_{k−1} > 1.
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.first() != Some(&0.0) || offsets.windows(2).any(|w| !(w[1] - w[0] > 1.0)) {
            return Err(Error::domain("contour offsets must satisfy 0 = r_1 and r_k - r_(k-1) > 1"));
        }
        Ok(Self { offsets, tail_tol: 1e-12, spacing_scale: 0.05 })
    }

    /// r_k = 1.5(k − 1).
    pub fn standard(n: usize) -> Self {
        Self::new((0..n).map(|k| 1.5 * k as f64).collect()).expect("standard offsets are ordered")
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    fn spacing(&self, t: f64) -> f64 {
        self.spacing_scale / t.sqrt()
    }

    /// Smallest Y with e^{t(r² − Y²)/2} below the tail tolerance, with an allowance for polynomial factors.
    fn half_height(&self, r: f64, t: f64) -> f64 {
        (r * r + 2.0 * ((1.0 / self.tail_tol).ln() + 5.0) / t).sqrt()
    }
}

/// A line-integral value with the change under halving the node density.
#[derive(Clone, Debug, PartialEq)]
pub struct KpzResult {
    pub value: f64,
    pub quad_err: f64,
    /// Nodes per dimension at full density.
    pub nodes: Vec<usize>,
}

fn kpz_integrand(kpz: &KpzParams) -> Integrand {
    Integrand::new(kpz.x.clone(), kpz.kernel(), AtomicFactor::Scalar { coeff: kpz.prefactor(), qexp: 0 })
}

fn with_halving(mut eval: impl FnMut(f64) -> Result<(f64, Vec<usize>)>) -> Result<KpzResult> {
    let (value, nodes) = eval(1.0)?;
    let (coarse, _) = eval(2.0)?;
    Ok(KpzResult { value, quad_err: (value - coarse).abs(), nodes })
}

/// The nested-contour integral with w_k on r_k + iR.
pub fn she_moment_nested(kpz: &KpzParams, contours: &ContourSpec) -> Result<KpzResult> {
    let n = kpz.n();
    if contours.offsets.len() != n {
        return Err(Error::domain(format!("{} contour offsets for {n} variables", contours.offsets.len())));
    }
    let phi = kpz_integrand(kpz).unreduced();
    let heights: Vec<f64> = contours.offsets.iter().map(|&r| contours.half_height(r, kpz.t)).collect();
    with_halving(|scale| {
        let nodes = NodeSet::lines(&contours.offsets, &heights, scale * contours.spacing(kpz.t));
        let v = integrate(&phi, &nodes)?;
        Ok((v.re, nodes.iter().map(NodeSet::len).collect()))
    })
}

/// 2^n Σ_λ 1/∏m_k! Σ_I ∫_{iR} Res_I; residues at w_j = w_i + 1 and w_j = 1 − w_i.
pub fn she_moment_residue_form(kpz: &KpzParams, contours: &ContourSpec) -> Result<KpzResult> {
    if !matches!(kpz.boundary, Boundary::Robin { .. }) {
        return Err(Error::domain("the residue expansion is implemented for the Robin boundary"));
    }
    let n = kpz.n();
    let phi = kpz_integrand(kpz);
    // Kernel arguments are shifted by at most n, so the Gaussian tail is measured from r = n.
    let y = contours.half_height(n as f64, kpz.t);
    let mut max_nodes = vec![0usize; n];
    let result = with_halving(|scale| {
        let h = scale * contours.spacing(kpz.t);
        let lines = |ell: usize| NodeSet::lines(&vec![0.0; ell], &vec![y; ell], h);
        let s = residue_sum(&phi, false, lines, DiagramSet::Canonical, false)?;
        for (ell, slot) in max_nodes.iter_mut().enumerate() {
            *slot = NodeSet::vertical_line(0.0, y, h).len().max(*slot * usize::from(ell < n));
        }
        Ok((s.value, max_nodes.clone()))
    })?;
    Ok(result)
}

/// Rates and boundary density of the weakly asymmetric scaling at ε.
pub fn weak_asymmetry_params(eps: f64, boundary: Boundary) -> Result<ModelParams> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps must lie in (0, 1)"));
    }
    let s = eps.sqrt();
    let rho = match boundary {
        Boundary::Robin { a } => 0.5 + s * (0.25 + a / 2.0),
        Boundary::Dirichlet => 1.0,
    };
    if rho > 1.0 {
        return Err(Error::domain(format!("rho = {rho} exceeds 1 at eps = {eps}")));
    }
    let m = ModelParams::with_rho(rational_from_f64(s.exp() / 2.0)?, rational_from_f64((-s).exp() / 2.0)?, rational_from_f64(rho)?)?;
    m.require_formula()?;
    Ok(m)
}

/// Sites ⌊x/ε⌉, which must be strictly increasing.
pub fn scaled_sites(eps: f64, x: &[f64]) -> Result<Vec<i64>> {
    let sites: Vec<i64> = x.iter().map(|&v| (v / eps).round() as i64).collect();
    if sites.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!("scaled sites {sites:?} collide; use a smaller eps or spread x")));
    }
    Ok(sites)
}

/// E[∏ Z^ε(t, x_i)] from the exact ASEP formula under the weakly asymmetric scaling.
///
/// Equals ε^{−n/2} q^{−n/2} times the residue expansion of φ with F replaced by G
/// (ε^{−n} for Dirichlet). With `NodeCount::Auto` the node count doubles until
/// successive values agree to 1e−11 relative.
pub fn scaled_asep_moment(eps: f64, kpz: &KpzParams, quad: &QuadratureSpec) -> Result<MomentResult> {
    let m = weak_asymmetry_params(eps, kpz.boundary)?;
    let sites = scaled_sites(eps, &kpz.x)?;
    let n = sites.len();
    let big_t = kpz.t / (eps * eps);
    let q = m.q();
    let norm = match kpz.boundary {
        Boundary::Robin { .. } => eps.powf(-(n as f64) / 2.0),
        Boundary::Dirichlet => eps.powi(-(n as i32)),
    } * q.powf(-(n as f64) / 2.0);
    let kernel = Kernel::Scaled { p: m.p_rate(), q_rate: m.q_rate(), rho: m.rho(), t: big_t };
    let nn = n as i32;
    let phi = Integrand::new(
        sites.iter().map(|&s| s as f64).collect(),
        kernel,
        AtomicFactor::Scalar { coeff: norm, qexp: nn * (nn - 1) / 2 },
    );
    let radius = QuadratureSpec::radius(q);
    let max_site = sites.iter().copied().max().unwrap_or(0) + 1;
    let run = |count: &dyn Fn(usize) -> usize| {
        residue_sum(&phi, true, |ell| NodeSet::torus(radius, count(ell), ell), DiagramSet::Canonical, false)
    };
    match quad.nodes {
        crate::moments::NodeCount::Auto => {
            let cap = |ell: usize| match ell {
                1 => 1 << 15,
                2 => 1 << 11,
                _ => 1 << 8,
            };
            let mut factor = 1usize;
            let base = |ell: usize| quad.nodes_for(ell, q, max_site);
            let mut prev = run(&|ell| base(ell))?;
            loop {
                factor *= 2;
                let cur = run(&|ell| (base(ell) * factor).min(cap(ell)))?;
                let diff = (cur.value - prev.value).abs();
                let saturated = (1..=n).all(|ell| base(ell) * factor >= cap(ell));
                if diff <= 1e-11 * cur.value.abs().max(1e-300) || saturated {
                    return Ok(MomentResult {
                        value: cur.value,
                        per_partition: cur.per_partition,
                        nodes: (1..=n).map(|ell| (base(ell) * factor).min(cap(ell))).collect(),
                        quad_err: diff,
                    });
                }
                prev = cur;
            }
        }
        _ => {
            let full = run(&|ell| quad.nodes_for(ell, q, max_site))?;
            let half = run(&|ell| {
                let h = quad.nodes_for(ell, q, max_site) / 2;
                h + h % 2
            })?;
            Ok(MomentResult {
                value: full.value,
                per_partition: full.per_partition,
                nodes: (1..=n).map(|ell| quad.nodes_for(ell, q, max_site)).collect(),
                quad_err: (full.value - half.value).abs(),
            })
        }
    }
}

/// Finite-difference solution of ∂_t u = ½∂_xx u on x > 0 with u_x(0) = A·u(0), from δ_0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatOracle {
    /// Richardson combination (4·u_{h/2} − u_h)/3.
    pub value: f64,
    /// |u_{h/2} − u_h|, the unextrapolated grid change.
    pub grid_change: f64,
}

/// Crank–Nicolson with four implicit-Euler half-steps at the start, on [0, x + 14√t + 2],
/// u = 0 at the far end, ghost node u_{−1} = u_1 − 2hA·u_0, initial mass 1 at the origin.
/// Grids h = 0.01 and 0.005 are combined by Richardson extrapolation.
pub fn robin_heat_kernel_oracle(a: f64, t: f64, x: f64) -> Result<HeatOracle> {
    if !(t > 0.0 && t.is_finite()) || !(x >= 0.0 && x.is_finite()) || !a.is_finite() || a < 0.0 {
        return Err(Error::domain("need t > 0, x >= 0 and A >= 0"));
    }
    let coarse = robin_grid_solve(a, t, x, 0.01)?;
    let fine = robin_grid_solve(a, t, x, 0.005)?;
    Ok(HeatOracle { value: (4.0 * fine - coarse) / 3.0, grid_change: (fine - coarse).abs() })
}

/// Value at x of the finite-difference solution with grid step h (time step h).
pub fn robin_grid_solve(a: f64, t: f64, x: f64, h: f64) -> Result<f64> {
    let len = x + 14.0 * t.sqrt() + 2.0;
    let j_max = (len / h).ceil() as usize;
    let mut u = vec![0.0; j_max + 1];
    u[0] = 2.0 / h;
    let startup = 2.0 * h;
    let (startup, rest) = if t <= startup { (t, 0.0) } else { (startup, t - startup) };
    for _ in 0..4 {
        step(&mut u, a, h, startup / 4.0, 1.0);
    }
    if rest > 0.0 {
        let steps = (rest / h).ceil() as usize;
        let dt = rest / steps as f64;
        for _ in 0..steps {
            step(&mut u, a, h, dt, 0.5);
        }
    }
    let pos = x / h;
    let j = pos.floor() as usize;
    let frac = pos - j as f64;
    let v = if frac.abs() < 1e-9 || j + 1 > j_max { u[j] } else { u[j] * (1.0 - frac) + u[j + 1] * frac };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical("robin_heat_kernel_oracle", "non-finite grid solution"))
    }
}

/// One θ-step (θ = 1 implicit Euler, θ = ½ Crank–Nicolson) of u_t = K u with
/// (Ku)_j = (u_{j+1} − 2u_j + u_{j−1})/(2h²), ghost u_{−1} = u_1 − 2hA u_0, u_J = 0.
fn step(u: &mut [f64], a: f64, h: f64, dt: f64, theta: f64) {
    let n = u.len() - 1; // unknowns 0..n−1
    let c = 1.0 / (2.0 * h * h);
    let apply = |u: &[f64], j: usize| -> f64 {
        let left = if j == 0 { u[1] - 2.0 * h * a * u[0] } else { u[j - 1] };
        let right = if j + 1 <= n { u[j + 1] } else { 0.0 };
        c * (right - 2.0 * u[j] + left)
    };
    let rhs: Vec<f64> = (0..n).map(|j| u[j] + (1.0 - theta) * dt * apply(u, j)).collect();
    // (I − θ dt K) v = rhs, tridiagonal.
    let k = theta * dt * c;
    let mut diag = vec![1.0 + 2.0 * k; n];
    let mut upper = vec![-k; n];
    let lower = vec![-k; n];
    diag[0] = 1.0 + k * (2.0 + 2.0 * h * a);
    upper[0] = -2.0 * k;
    let mut d = rhs;
    for j in 1..n {
        let w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        d[j] -= w * d[j - 1];
    }
    u[n - 1] = d[n - 1] / diag[n - 1];
    for j in (0..n - 1).rev() {
        u[j] = (d[j] - upper[j] * u[j + 1]) / diag[j];
    }
    u[n] = 0.0;
}

/// ∫ e^{tw²/2 − xw}·w/(A+w) dw/2πi along iR, times 2: the Robin first moment, directly.
pub fn robin_first_moment(a: f64, t: f64, x: f64, contours: &ContourSpec) -> Result<f64> {
    let kpz = KpzParams::new(Boundary::Robin { a }, t, vec![x])?;
    let k = kpz.kernel();
    let y = contours.half_height(0.0, t);
    let ns = NodeSet::vertical_line(0.0, y, contours.spacing(t));
    let terms: Vec<C64> = ns.points.iter().zip(&ns.weights).map(|(&w, &wt)| wt * k.eval(w, x)).collect();
    Ok(2.0 * crate::quadrature::compensated_sum(&terms).re)
}
