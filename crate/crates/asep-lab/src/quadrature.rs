//! Tensor-product trapezoid sums of reduced integrands.
//!
//! Every factor depends on at most two free variables, so the integrand is
//! tabulated once per variable and per variable pair; the grid sum then only
//! multiplies table entries.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::partitions::Monomial;
use crate::residue::{monomial_value, Assignment, ReducedIntegrand};

/// Quadrature nodes with their weights, already normalised by 1/(2πi).
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    pub points: Vec<C64>,
    pub weights: Vec<C64>,
}

impl NodeSet {
    /// Midpoint trapezoid nodes on |z| = radius: z_k = R e^{2πi(k+½)/N}, weight z_k/N.
    pub fn circle(radius: f64, n: usize) -> Self {
        Self::circle_shifted(radius, n, 0.5)
    }

    /// z_k = R e^{2πi(k+s)/N}. Distinct shifts per dimension keep the grid off
    /// the removable singularities z_a = z_b and z_a·z_b = R².
    pub fn circle_shifted(radius: f64, n: usize, shift: f64) -> Self {
        let points: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(radius, std::f64::consts::TAU * (k as f64 + shift) / n as f64))
            .collect();
        let weights = points.iter().map(|z| z / n as f64).collect();
        Self { points, weights }
    }

    /// Nodes re + i y_k, y_k = −Y + (k+½)h on [−Y, Y]; weight h/(2π).
    pub fn vertical_line(re: f64, half_height: f64, spacing: f64) -> Self {
        Self::vertical_line_shifted(re, half_height, spacing, 0.5)
    }

    /// y_k = −Y + (k+s)h with h ≤ spacing; shifts play the same role as on the torus.
    /// The node count is even, so no node with s ∈ (0, 1) lies on the real axis.
    pub fn vertical_line_shifted(re: f64, half_height: f64, spacing: f64, shift: f64) -> Self {
        let n = (2.0 * half_height / spacing).ceil().max(2.0) as usize;
        let n = n + n % 2;
        let h = 2.0 * half_height / n as f64;
        let points = (0..n).map(|k| C64::new(re, -half_height + (k as f64 + shift) * h)).collect();
        let weights = vec![C64::new(h / std::f64::consts::TAU, 0.0); n];
        Self { points, weights }
    }

    /// One circle per dimension with shifts 0.5, 0.6, 0.7, …; no two shifts sum or differ to an integer.
    pub fn torus(radius: f64, n: usize, dims: usize) -> Vec<Self> {
        (0..dims).map(|d| Self::circle_shifted(radius, n, 0.5 + 0.1 * (d % 5) as f64)).collect()
    }

    /// One line per dimension at real parts `res`, shifts 0.5, 0.6, 0.7, ….
    pub fn lines(res: &[f64], half_heights: &[f64], spacing: f64) -> Vec<Self> {
        res.iter()
            .zip(half_heights)
            .enumerate()
            .map(|(d, (&re, &y))| Self::vertical_line_shifted(re, y, spacing, 0.5 + 0.1 * (d % 5) as f64))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Neumaier-compensated complex sum in slice order.
pub fn compensated_sum(values: &[C64]) -> C64 {
    fn part(xs: impl Iterator<Item = f64>) -> f64 {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for x in xs {
            let t = s + x;
            c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
            s = t;
        }
        s + c
    }
    C64::new(part(values.iter().map(|v| v.re)), part(values.iter().map(|v| v.im)))
}

struct Tables {
    scalar: C64,
    single: Vec<Vec<C64>>,
    /// pair[e][d] for e < d, row-major in (index_e, index_d).
    pair: Vec<Vec<Option<Vec<C64>>>>,
    sizes: Vec<usize>,
}

impl Tables {
    fn build(r: &ReducedIntegrand, nodes: &[NodeSet]) -> Result<Self> {
        let free = r.free_vars();
        if nodes.len() != free.len() {
            return Err(Error::domain("one node set per free variable required"));
        }
        let dim_of = |label: usize| free.iter().position(|&f| f == label).expect("label is free");
        let ell = free.len();
        let sizes: Vec<usize> = nodes.iter().map(NodeSet::len).collect();
        let mut scalar = C64::new(1.0, 0.0);
        let mut single: Vec<Vec<C64>> = nodes.iter().map(|ns| ns.weights.clone()).collect();
        let mut pair: Vec<Vec<Option<Vec<C64>>>> = vec![vec![None; ell]; ell];
        let mut at = Assignment::new(r.n());
        for f in r.factors() {
            match f.vars()[..] {
                [] => scalar *= r.factor_value(f, &at),
                [v] => {
                    let d = dim_of(v);
                    for (k, &z) in nodes[d].points.iter().enumerate() {
                        at.set(v, z);
                        single[d][k] *= r.factor_value(f, &at);
                    }
                }
                [u, v] => {
                    let (mut du, mut dv) = (dim_of(u), dim_of(v));
                    let (mut lu, mut lv) = (u, v);
                    if du > dv {
                        std::mem::swap(&mut du, &mut dv);
                        std::mem::swap(&mut lu, &mut lv);
                    }
                    let table = pair[du][dv].get_or_insert_with(|| vec![C64::new(1.0, 0.0); sizes[du] * sizes[dv]]);
                    for (i, &a) in nodes[du].points.iter().enumerate() {
                        at.set(lu, a);
                        for (j, &b) in nodes[dv].points.iter().enumerate() {
                            at.set(lv, b);
                            table[i * sizes[dv] + j] *= r.factor_value(f, &at);
                        }
                    }
                }
                _ => return Err(Error::Internal("factor depends on more than two variables".into())),
            }
        }
        Ok(Self { scalar, single, pair, sizes })
    }

    fn sum(&self) -> C64 {
        let ell = self.sizes.len();
        if ell == 0 {
            return self.scalar;
        }
        let partials = crate::par::map_indexed(self.sizes[0], |k0| {
            let mut idx = vec![0usize; ell];
            idx[0] = k0;
            self.level(1, self.single[0][k0], &mut idx)
        });
        self.scalar * compensated_sum(&partials)
    }

    fn level(&self, d: usize, prefix: C64, idx: &mut [usize]) -> C64 {
        if d == self.sizes.len() {
            return prefix;
        }
        let n = self.sizes[d];
        let mut loc = self.single[d].clone();
        for e in 0..d {
            if let Some(t) = &self.pair[e][d] {
                let row = &t[idx[e] * n..(idx[e] + 1) * n];
                for (l, &p) in loc.iter_mut().zip(row) {
                    *l *= p;
                }
            }
        }
        if d + 1 == self.sizes.len() {
            return prefix * loc.iter().sum::<C64>();
        }
        let mut acc = C64::new(0.0, 0.0);
        for (k, &l) in loc.iter().enumerate() {
            idx[d] = k;
            acc += self.level(d + 1, prefix * l, idx);
        }
        acc
    }
}

fn check_finite(v: C64, what: &str) -> Result<C64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical(what, "non-finite quadrature sum"))
    }
}

/// ∫ r over the tensor grid, one node set per free variable.
pub fn integrate(r: &ReducedIntegrand, nodes: &[NodeSet]) -> Result<C64> {
    check_finite(Tables::build(r, nodes)?.sum(), "integrate")
}

/// (∫ r, ∫ r·m) where m is the analytic time-derivative multiplier.
pub fn integrate_with_time_derivative(r: &ReducedIntegrand, nodes: &[NodeSet]) -> Result<(C64, C64)> {
    let mut tables = Tables::build(r, nodes)?;
    let value = check_finite(tables.sum(), "integrate")?;
    let free = r.free_vars().to_vec();
    let args: Vec<Monomial> = r.kernel_args().collect();
    let field = r.kernel().field();
    let mut at = Assignment::new(r.n());
    let mut terms = Vec::with_capacity(args.len());
    for m in args {
        let v = m.var.ok_or_else(|| Error::Internal("kernel argument without a variable".into()))?;
        let d = free.iter().position(|&f| f == v).expect("kernel variable is free");
        let saved = tables.single[d].clone();
        for (k, &z) in nodes[d].points.iter().enumerate() {
            at.set(v, z);
            tables.single[d][k] *= r.kernel().time_multiplier(monomial_value(m, field, &at));
        }
        terms.push(tables.sum());
        tables.single[d] = saved;
    }
    Ok((value, check_finite(compensated_sum(&terms), "time derivative")?))
}

/// Direct pointwise evaluation over the grid; reference path for the tabulated sum.
pub fn integrate_pointwise(r: &ReducedIntegrand, nodes: &[NodeSet]) -> Result<C64> {
    let ell = nodes.len();
    let mut idx = vec![0usize; ell];
    let mut total = C64::new(0.0, 0.0);
    let count: usize = nodes.iter().map(NodeSet::len).product();
    for _ in 0..count {
        let pts: Vec<C64> = (0..ell).map(|d| nodes[d].points[idx[d]]).collect();
        let w: C64 = (0..ell).map(|d| nodes[d].weights[idx[d]]).product();
        total += w * r.evaluate(&pts)?;
        for d in (0..ell).rev() {
            idx[d] += 1;
            if idx[d] < nodes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(total)
}
