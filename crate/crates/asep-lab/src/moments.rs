//! q-moments v_n(t; x⃗) of the half-line open ASEP from the empty initial condition.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::partitions::{enumerate_diagrams, partitions_of, Partition};
use crate::quadrature::{compensated_sum, integrate, integrate_with_time_derivative, NodeSet};
use crate::residue::{build_phi, reduce, Integrand, Kernel};

/// Node count per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeCount {
    /// Same count in every dimension.
    Fixed(usize),
    /// 256 for 1D, 128 for 2D, 64 for 3D and 4D, 32 beyond.
    Default,
    /// Smallest even N ≥ the default with C(N+m−1, m−1)·(√q)^N < e^{−25}, m the largest site;
    /// this models the pole of order m at z = 1/q. Capped at 256.
    Auto,
}

/// Trapezoid rule on the circle of radius 1/√q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub nodes: NodeCount,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes: NodeCount::Auto }
    }
}

impl QuadratureSpec {
    /// At least 16 and even.
    pub fn fixed(n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::domain(format!("nodes per dimension must be even and >= 16, got {n}")));
        }
        Ok(Self { nodes: NodeCount::Fixed(n) })
    }

    pub fn default_counts() -> Self {
        Self { nodes: NodeCount::Default }
    }

    pub fn auto() -> Self {
        Self { nodes: NodeCount::Auto }
    }

    pub fn nodes_for(&self, dims: usize, q: f64, max_site: i64) -> usize {
        let default = match dims {
            0 | 1 => 256,
            2 => 128,
            3 | 4 => 64,
            _ => 32,
        };
        match self.nodes {
            NodeCount::Fixed(n) => n,
            NodeCount::Default => default,
            NodeCount::Auto => {
                let m = max_site.max(1) as f64;
                let log_fact: f64 = (1..max_site.max(1)).map(|k| (k as f64).ln()).sum();
                let bound = |n: usize| (m - 1.0) * (n as f64).ln() - log_fact + n as f64 * q.sqrt().ln();
                let mut n = default;
                while n < 256 && bound(n) > -25.0 {
                    n += 2;
                }
                n
            }
        }
    }

    pub fn radius(q: f64) -> f64 {
        1.0 / q.sqrt()
    }

    fn halved(&self, dims: usize, q: f64, max_site: i64) -> usize {
        let n = self.nodes_for(dims, q, max_site) / 2;
        n + n % 2
    }
}

/// Value with its per-partition breakdown and a Richardson error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentResult {
    pub value: f64,
    pub per_partition: Vec<(Partition, f64)>,
    /// Nodes per dimension, indexed by the number of free variables minus one.
    pub nodes: Vec<usize>,
    /// |value(N) − value(N/2)|.
    pub quad_err: f64,
}

/// Which diagrams enter the sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DiagramSet {
    /// One representative per unordered row set, weight 1.
    Canonical,
    /// All row orders, weight 1/∏m_k!.
    #[cfg(test)]
    AllOrders,
}

pub(crate) struct Sum {
    pub(crate) value: f64,
    pub(crate) derivative: f64,
    pub(crate) per_partition: Vec<(Partition, f64)>,
}

/// Σ_λ (−1)^{n−ℓ(λ)}/∏m_k! Σ_I ∮ Res_I φ with `nodes(ℓ)` nodes per dimension.
pub(crate) fn residue_sum(
    phi: &Integrand,
    sign_alternates: bool,
    line: impl Fn(usize) -> Vec<NodeSet>,
    set: DiagramSet,
    with_derivative: bool,
) -> Result<Sum> {
    let n = phi.n();
    let mut per_partition = Vec::new();
    let (mut values, mut derivs) = (Vec::new(), Vec::new());
    for lambda in partitions_of(n)? {
        let ell = lambda.len();
        let nodes = line(ell);
        let sign = if sign_alternates && (n - ell) % 2 == 1 { -1.0 } else { 1.0 };
        let weight = match set {
            DiagramSet::Canonical => 1.0,
            #[cfg(test)]
            DiagramSet::AllOrders => 1.0 / lambda.multiplicity_factorial() as f64,
        };
        let (mut pv, mut pd) = (Vec::new(), Vec::new());
        for d in enumerate_diagrams(&lambda) {
            if set == DiagramSet::Canonical && !d.is_canonical() {
                continue;
            }
            let r = reduce(phi, &d)?;
            let (v, dv) = if with_derivative {
                integrate_with_time_derivative(&r, &nodes)
            } else {
                integrate(&r, &nodes).map(|v| (v, C64::new(0.0, 0.0)))
            }
            .map_err(|e| Error::numerical(format!("diagram {d}"), e.to_string()))?;
            pv.push(v);
            pd.push(dv);
        }
        let part = sign * weight * compensated_sum(&pv).re;
        per_partition.push((lambda, part));
        values.push(C64::new(part, 0.0));
        derivs.push(sign * weight * compensated_sum(&pd));
    }
    Ok(Sum {
        value: compensated_sum(&values).re,
        derivative: compensated_sum(&derivs).re,
        per_partition,
    })
}

fn circle_nodes(quad: &QuadratureSpec, q: f64, max_site: i64, halved: bool) -> impl Fn(usize) -> Vec<NodeSet> + '_ {
    move |ell| {
        let n = if halved { quad.halved(ell, q, max_site) } else { quad.nodes_for(ell, q, max_site) };
        NodeSet::torus(QuadratureSpec::radius(q), n, ell)
    }
}

fn asep_sum(phi: &Integrand, q: f64, quad: &QuadratureSpec, halved: bool, derivative: bool) -> Result<Sum> {
    let max_site = phi.sites().iter().fold(1.0f64, |a, &b| a.max(b)) as i64;
    residue_sum(phi, true, circle_nodes(quad, q, max_site, halved), DiagramSet::Canonical, derivative)
}

/// v_n(t; x⃗) for x ∈ Z^n_{≥0}.
pub fn v_n(t: f64, x: &[i64], params: &ModelParams, quad: &QuadratureSpec) -> Result<MomentResult> {
    params.require_formula()?;
    if x.is_empty() {
        return Err(Error::domain("at least one site is required"));
    }
    if t < 0.0 {
        return Err(Error::domain("t must be nonnegative"));
    }
    let q = params.q();
    let phi = build_phi(x, params, t)?;
    let full = asep_sum(&phi, q, quad, false, false)?;
    let half = asep_sum(&phi, q, quad, true, false)?;
    Ok(MomentResult {
        value: full.value,
        per_partition: full.per_partition,
        nodes: (1..=x.len()).map(|l| quad.nodes_for(l, q, max_site(x))).collect(),
        quad_err: (full.value - half.value).abs(),
    })
}

/// (v_n, ∂_t v_n), the derivative through the analytic multiplier.
pub fn v_n_with_time_derivative(t: f64, x: &[i64], params: &ModelParams, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    params.require_formula()?;
    let phi = build_phi(x, params, t)?;
    let s = asep_sum(&phi, params.q(), quad, false, true)?;
    Ok((s.value, s.derivative))
}

#[cfg(test)]
pub(crate) fn v_n_with_diagrams(
    t: f64,
    x: &[i64],
    params: &ModelParams,
    quad: &QuadratureSpec,
    set: DiagramSet,
) -> Result<f64> {
    params.require_formula()?;
    let phi = build_phi(x, params, t)?;
    Ok(residue_sum(&phi, true, circle_nodes(quad, params.q(), max_site(x), false), set, false)?.value)
}

fn max_site(x: &[i64]) -> i64 {
    x.iter().copied().max().unwrap_or(1).max(1)
}

/// Σ over a node set of f(z)·weight.
fn contour(nodes: &NodeSet, f: impl Fn(C64) -> C64) -> C64 {
    let terms: Vec<C64> = nodes.points.iter().zip(&nodes.weights).map(|(&z, &w)| w * f(z)).collect();
    compensated_sum(&terms)
}

fn asep_kernel(params: &ModelParams, t: f64) -> Kernel {
    Kernel::Asep { p: params.p_rate(), q_rate: params.q_rate(), rho: params.rho(), t }
}

/// ∮ F_x(z)/z dz/2πi on |z| = 1/√q; the n = 1 case of [`v_n`] through the same integrand.
pub fn first_moment_closed(t: f64, x: i64, params: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    params.require_formula()?;
    let phi = build_phi(&[x], params, t)?;
    let q = params.q();
    Ok(integrate(&phi.unreduced(), &circle_nodes(quad, q, x.max(1), false)(1))?.re)
}

/// ∮∮φ + (1−q)∮(1−q²z²)/(1−qz²)·F_{x1}(z)F_{x2}(qz)/z + q(1−q)∮(1−z²)/(1−qz²)·F_{x1}(z)F_{x2}(1/z)/z.
pub fn second_moment_closed(t: f64, x1: i64, x2: i64, params: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    params.require_formula()?;
    if !(1 <= x1 && x1 < x2) {
        return Err(Error::Chamber(vec![x1, x2]));
    }
    let q = params.q();
    let r = QuadratureSpec::radius(q);
    let phi = build_phi(&[x1, x2], params, t)?;
    let double = integrate(&phi.unreduced(), &NodeSet::torus(r, quad.nodes_for(2, q, x2), 2))?;
    let k = asep_kernel(params, t);
    // F_x(w) = w · (F_x(w)/w)
    let f = |x: i64, w: C64| w * k.eval(w, x as f64);
    let ns = NodeSet::circle(r, quad.nodes_for(1, q, x2));
    let plus = contour(&ns, |z| (1.0 - q * q * z * z) / (1.0 - q * z * z) * f(x1, z) * f(x2, q * z) / z);
    let minus = contour(&ns, |z| (1.0 - z * z) / (1.0 - q * z * z) * f(x1, z) * f(x2, 1.0 / z) / z);
    Ok((double + (1.0 - q) * plus + q * (1.0 - q) * minus).re)
}

/// Residuals of the free-evolution characterisation at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeEvolutionReport {
    /// |∂_t v − Δ^{𝗉,𝗊} v|; `None` when some x_i = 0.
    pub time: Option<f64>,
    /// (i, residual) for each adjacent pair x_{i+1} = x_i + 1 (i is 0-based).
    pub adjacent: Vec<(usize, f64)>,
    /// |v(0, x_2, …) − (ρq + 1 − ρ) v(1, x_2, …)|.
    pub boundary: f64,
}

impl FreeEvolutionReport {
    pub fn max(&self) -> f64 {
        self.adjacent
            .iter()
            .map(|&(_, r)| r)
            .chain(self.time)
            .fold(self.boundary, f64::max)
    }
}

pub fn check_free_evolution(t: f64, x: &[i64], params: &ModelParams, quad: &QuadratureSpec) -> Result<FreeEvolutionReport> {
    let v = |y: &[i64]| v_n(t, y, params, quad).map(|r| r.value);
    let (p, qr) = (params.p_rate(), params.q_rate());
    let time = if x.iter().all(|&xi| xi >= 1) {
        let (v0, dv) = v_n_with_time_derivative(t, x, params, quad)?;
        let mut lap = 0.0;
        for i in 0..x.len() {
            let mut lo = x.to_vec();
            lo[i] -= 1;
            let mut hi = x.to_vec();
            hi[i] += 1;
            lap += p * v(&lo)? + qr * v(&hi)? - (p + qr) * v0;
        }
        Some((dv - lap).abs())
    } else {
        None
    };
    let mut adjacent = Vec::new();
    let vx = v(x)?;
    for i in 0..x.len().saturating_sub(1) {
        if x[i + 1] == x[i] + 1 {
            let mut a = x.to_vec();
            a[i + 1] -= 1;
            let mut b = x.to_vec();
            b[i] += 1;
            adjacent.push((i, (p * v(&a)? + qr * v(&b)? - (p + qr) * vx).abs()));
        }
    }
    let (q, rho) = (params.q(), params.rho());
    let mut at0 = x.to_vec();
    at0[0] = 0;
    let mut at1 = x.to_vec();
    at1[0] = 1;
    let boundary = (v(&at0)? - (rho * q + 1.0 - rho) * v(&at1)?).abs();
    Ok(FreeEvolutionReport { time, adjacent, boundary })
}
