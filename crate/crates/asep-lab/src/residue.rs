//! Factor algebra for φ and exact residue reduction along a diagram.
//!
//! The same factor list serves two readings of a [`Monomial`]:
//! multiplicatively it is q^a·z^σ (ASEP contour integrals), additively it is
//! a + σw + [σ<0] (KPZ line integrals). Both readings agree on which factors
//! become singular under a substitution, so one reduction routine serves both.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::partitions::{Diagram, Monomial};

/// How monomials are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Field {
    Multiplicative { q: f64 },
    Additive,
}

/// Single-variable kernel attached to each original variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// F_x(z)/z for the half-line ASEP.
    Asep { p: f64, q_rate: f64, rho: f64, t: f64 },
    /// G_x(z)/z for the weakly asymmetric scaling; `t` is the microscopic time.
    Scaled { p: f64, q_rate: f64, rho: f64, t: f64 },
    /// e^{tw²/2 − xw}·w/(A+w).
    Robin { a: f64, t: f64 },
    /// e^{tw²/2 − xw}·w.
    Dirichlet { t: f64 },
}

impl Kernel {
    pub fn field(&self) -> Field {
        match *self {
            Kernel::Asep { p, q_rate, .. } | Kernel::Scaled { p, q_rate, .. } => Field::Multiplicative { q: q_rate / p },
            Kernel::Robin { .. } | Kernel::Dirichlet { .. } => Field::Additive,
        }
    }

    /// Kernel value at argument value `z` (or `w`) and site `x`.
    pub fn eval(&self, z: C64, x: f64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match *self {
            Kernel::Asep { p, q_rate, rho, t } => {
                let q = q_rate / p;
                let expo = (1.0 - q).powi(2) * z * p * t / ((one - z) * (one - q * z));
                (one - q * z * z) / (one - z)
                    * expo.exp()
                    * ((one - z) / (one - q * z)).powi(x as i32)
                    * (rho / (rho + (1.0 - rho) * z))
                    / z
            }
            Kernel::Scaled { p, q_rate, rho, t } => {
                let (sp, sq) = (p.sqrt(), q_rate.sqrt());
                let num = (sp - sq).powi(2) * (sp + sq * z).powi(2) * t;
                let expo = num / ((one - z) * (p - q_rate * z));
                (p - q_rate * z * z) / (p - p * z)
                    * expo.exp()
                    * ((p * q_rate).sqrt() * (one - z) / (p - q_rate * z)).powi(x as i32 + 1)
                    * (rho / (rho + (1.0 - rho) * z))
                    / z
            }
            Kernel::Robin { a, t } => (t * z * z / 2.0 - x * z).exp() * z / (a + z),
            Kernel::Dirichlet { t } => (t * z * z / 2.0 - x * z).exp() * z,
        }
    }

    /// d/dt of the log-kernel at argument value `z`; independent of t.
    pub fn time_multiplier(&self, z: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match *self {
            Kernel::Asep { p, q_rate, .. } => {
                let q = q_rate / p;
                (1.0 - q).powi(2) * z * p / ((one - z) * (one - q * z))
            }
            Kernel::Scaled { p, q_rate, .. } => {
                let (sp, sq) = (p.sqrt(), q_rate.sqrt());
                (sp - sq).powi(2) * (sp + sq * z).powi(2) / ((one - z) * (p - q_rate * z))
            }
            Kernel::Robin { .. } | Kernel::Dirichlet { .. } => z * z / 2.0,
        }
    }
}

/// Which consumed factor a [`AtomicFactor::Limit`] replaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    /// 1/(qM − z_a) at z_a = qM.
    QDiffOuter,
    /// 1/(q z_a − M′) at z_a = M′/q.
    QDiffInner,
    /// 1/(1 − M z_a) at z_a = 1/M.
    Prod,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AtomicFactor {
    /// coeff · q^qexp.
    Scalar { coeff: f64, qexp: i32 },
    /// M − M′.
    Diff(Monomial, Monomial),
    /// 1/(qM − M′).
    InvQDiff(Monomial, Monomial),
    /// 1 − qMM′.
    QProd(Monomial, Monomial),
    /// 1/(1 − MM′).
    InvProd(Monomial, Monomial),
    /// Kernel at M for site index `site`.
    Kernel { arg: Monomial, site: usize },
    /// Finite limit 1/(∂D/∂z_a) of a consumed factor D.
    Limit { kind: LimitKind, other: Monomial },
}

impl AtomicFactor {
    fn map(self, f: impl Fn(Monomial) -> Monomial) -> Self {
        use AtomicFactor::*;
        match self {
            Scalar { .. } => self,
            Diff(a, b) => Diff(f(a), f(b)),
            InvQDiff(a, b) => InvQDiff(f(a), f(b)),
            QProd(a, b) => QProd(f(a), f(b)),
            InvProd(a, b) => InvProd(f(a), f(b)),
            Kernel { arg, site } => Kernel { arg: f(arg), site },
            Limit { kind, other } => Limit { kind, other: f(other) },
        }
    }

    fn substitute(self, label: usize, target: Monomial) -> Self {
        self.map(|m| m.substitute(label, target))
    }

    /// Denominator vanishes identically.
    fn is_singular(&self) -> bool {
        match *self {
            AtomicFactor::InvQDiff(a, b) => a.var == b.var && a.vpow == b.vpow && a.qexp + 1 == b.qexp,
            AtomicFactor::InvProd(a, b) => a.var == b.var && a.vpow == -b.vpow && a.qexp + b.qexp == 0,
            _ => false,
        }
    }

    /// Free labels this factor depends on, deduplicated.
    pub fn vars(&self) -> Vec<usize> {
        use AtomicFactor::*;
        let ms: Vec<Monomial> = match *self {
            Scalar { .. } => vec![],
            Diff(a, b) | InvQDiff(a, b) | QProd(a, b) | InvProd(a, b) => vec![a, b],
            Kernel { arg, .. } => vec![arg],
            Limit { kind: LimitKind::Prod, other } => vec![other],
            Limit { .. } => vec![],
        };
        let mut v: Vec<usize> = ms.iter().filter_map(|m| m.var).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Values of the free variables, indexed by label.
#[derive(Clone, Debug)]
pub struct Assignment {
    by_label: Vec<C64>,
}

impl Assignment {
    pub fn new(n: usize) -> Self {
        Self { by_label: vec![C64::new(f64::NAN, 0.0); n + 1] }
    }

    pub fn set(&mut self, label: usize, value: C64) {
        self.by_label[label] = value;
    }

    pub fn get(&self, label: usize) -> C64 {
        self.by_label[label]
    }
}

/// Factor list of φ together with the sites and kernel it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    n: usize,
    factors: Vec<AtomicFactor>,
    sites: Vec<f64>,
    kernel: Kernel,
}

impl Integrand {
    /// scalar · ∏_{i<j} cross factors · ∏ kernels; the kernel fixes the field.
    pub fn new(sites: Vec<f64>, kernel: Kernel, scalar: AtomicFactor) -> Self {
        let n = sites.len();
        let mut factors = vec![scalar];
        for i in 1..=n {
            for j in i + 1..=n {
                let (a, b) = (Monomial::var(i), Monomial::var(j));
                factors.extend([
                    AtomicFactor::Diff(a, b),
                    AtomicFactor::InvQDiff(a, b),
                    AtomicFactor::QProd(a, b),
                    AtomicFactor::InvProd(a, b),
                ]);
            }
        }
        for i in 1..=n {
            factors.push(AtomicFactor::Kernel { arg: Monomial::var(i), site: i - 1 });
        }
        Self { n, factors, sites, kernel }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[AtomicFactor] {
        &self.factors
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    /// The unreduced integrand as a reduced one with every variable free.
    pub fn unreduced(&self) -> ReducedIntegrand {
        ReducedIntegrand {
            n: self.n,
            factors: self.factors.clone(),
            free_vars: (1..=self.n).collect(),
            sites: self.sites.clone(),
            kernel: self.kernel,
        }
    }
}

/// φ_x⃗ = q^{n(n−1)/2} ∏_{i<j} (z_i−z_j)/(qz_i−z_j)·(1−qz_iz_j)/(1−z_iz_j) · ∏ F_{x_j}(z_j)/z_j.
pub fn build_phi(x: &[i64], params: &ModelParams, t: f64) -> Result<Integrand> {
    if x.iter().any(|&xi| xi < 0) {
        return Err(Error::domain("sites must be >= 0"));
    }
    let n = x.len() as i32;
    let kernel = Kernel::Asep { p: params.p_rate(), q_rate: params.q_rate(), rho: params.rho(), t };
    let scalar = AtomicFactor::Scalar { coeff: 1.0, qexp: n * (n - 1) / 2 };
    Ok(Integrand::new(x.iter().map(|&v| v as f64).collect(), kernel, scalar))
}

/// The residue Res_I{φ} as a function of the pivots.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedIntegrand {
    n: usize,
    factors: Vec<AtomicFactor>,
    free_vars: Vec<usize>,
    sites: Vec<f64>,
    kernel: Kernel,
}

impl ReducedIntegrand {
    pub fn factors(&self) -> &[AtomicFactor] {
        &self.factors
    }

    pub fn free_vars(&self) -> &[usize] {
        &self.free_vars
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn mono(&self, m: Monomial, at: &Assignment) -> C64 {
        monomial_value(m, self.kernel.field(), at)
    }

    /// Value of a single factor.
    pub fn factor_value(&self, f: &AtomicFactor, at: &Assignment) -> C64 {
        use AtomicFactor::*;
        let field = self.kernel.field();
        let one = C64::new(1.0, 0.0);
        let mult = matches!(field, Field::Multiplicative { .. });
        let q = match field {
            Field::Multiplicative { q } => q,
            Field::Additive => 1.0,
        };
        match *f {
            Scalar { coeff, qexp } => C64::new(coeff * q.powi(qexp), 0.0),
            Diff(a, b) => self.mono(a, at) - self.mono(b, at),
            InvQDiff(a, b) => {
                let (a, b) = (self.mono(a, at), self.mono(b, at));
                if mult { one / (q * a - b) } else { one / (a + 1.0 - b) }
            }
            QProd(a, b) => {
                let (a, b) = (self.mono(a, at), self.mono(b, at));
                if mult { one - q * a * b } else { a + b }
            }
            InvProd(a, b) => {
                let (a, b) = (self.mono(a, at), self.mono(b, at));
                if mult { one / (one - a * b) } else { one / (a + b - 1.0) }
            }
            Kernel { arg, site } => self.kernel.eval(self.mono(arg, at), self.sites[site]),
            Limit { kind, other } => match (kind, mult) {
                (LimitKind::QDiffOuter, _) => -one,
                (LimitKind::QDiffInner, true) => one / q,
                (LimitKind::QDiffInner, false) => one,
                (LimitKind::Prod, true) => -one / self.mono(other, at),
                (LimitKind::Prod, false) => one,
            },
        }
    }

    /// Value at the given pivot values (ordered as [`Self::free_vars`]).
    pub fn evaluate(&self, values: &[C64]) -> Result<C64> {
        let at = self.assignment(values)?;
        let v = self.factors.iter().map(|f| self.factor_value(f, &at)).product::<C64>();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numerical("evaluate", format!("singular value at {values:?}")))
        }
    }

    /// Σ over kernel factors of the time multiplier at each kernel argument.
    pub fn time_derivative_multiplier(&self, values: &[C64]) -> Result<C64> {
        let at = self.assignment(values)?;
        Ok(self.kernel_args().map(|m| self.kernel.time_multiplier(self.mono(m, &at))).sum())
    }

    pub(crate) fn kernel_args(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.factors.iter().filter_map(|f| match *f {
            AtomicFactor::Kernel { arg, .. } => Some(arg),
            _ => None,
        })
    }

    fn assignment(&self, values: &[C64]) -> Result<Assignment> {
        if values.len() != self.free_vars.len() {
            return Err(Error::domain(format!(
                "expected {} free-variable values, got {}",
                self.free_vars.len(),
                values.len()
            )));
        }
        let mut at = Assignment::new(self.n);
        for (&label, &v) in self.free_vars.iter().zip(values) {
            at.set(label, v);
        }
        Ok(at)
    }
}

pub(crate) fn monomial_value(m: Monomial, field: Field, at: &Assignment) -> C64 {
    match field {
        Field::Multiplicative { q } => {
            let c = C64::new(q.powi(m.qexp), 0.0);
            match (m.var, m.vpow) {
                (None, _) => c,
                (Some(v), 1) => c * at.get(v),
                (Some(v), _) => c / at.get(v),
            }
        }
        Field::Additive => {
            let c = C64::new(m.qexp as f64, 0.0);
            match (m.var, m.vpow) {
                (None, _) => c,
                (Some(v), 1) => c + at.get(v),
                (Some(v), _) => c + 1.0 - at.get(v),
            }
        }
    }
}

/// Sequential residues along the diagram, each consuming exactly one simple pole.
pub fn reduce(phi: &Integrand, d: &Diagram) -> Result<ReducedIntegrand> {
    if d.n() != phi.n {
        return Err(Error::domain(format!("diagram on {} labels, integrand on {}", d.n(), phi.n)));
    }
    let mut factors = phi.factors.clone();
    for step in d.steps() {
        let a = step.label;
        let singular: Vec<usize> = factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.substitute(a, step.target).is_singular())
            .map(|(i, _)| i)
            .collect();
        let [idx] = singular[..] else {
            return Err(Error::Internal(format!(
                "{} singular factors at residue z{a} -> {} in diagram {d}",
                singular.len(),
                step.target
            )));
        };
        factors[idx] = match factors[idx] {
            AtomicFactor::InvQDiff(m, m2) if m2.is_raw(a) => AtomicFactor::Limit { kind: LimitKind::QDiffOuter, other: m },
            AtomicFactor::InvQDiff(m, m2) if m.is_raw(a) => AtomicFactor::Limit { kind: LimitKind::QDiffInner, other: m2 },
            AtomicFactor::InvProd(m, m2) if m2.is_raw(a) => AtomicFactor::Limit { kind: LimitKind::Prod, other: m },
            AtomicFactor::InvProd(m, m2) if m.is_raw(a) => AtomicFactor::Limit { kind: LimitKind::Prod, other: m2 },
            other => {
                return Err(Error::Internal(format!("consumed factor {other:?} is not linear in z{a}")));
            }
        };
        for f in factors.iter_mut() {
            *f = f.substitute(a, step.target);
        }
    }
    Ok(ReducedIntegrand {
        n: phi.n,
        factors,
        free_vars: d.free_vars(),
        sites: phi.sites.clone(),
        kernel: phi.kernel,
    })
}
