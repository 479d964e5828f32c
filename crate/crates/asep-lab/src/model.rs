//! Parameters, configurations, ordered site vectors and the duality observable H.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"0.9"`, `"-1.25e-2"`, `"3/4"` or `"2"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::domain(format!("cannot parse '{s}' as a number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(numer);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Exact rational image of a float (binary expansion, no rounding).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::domain(format!("non-finite value {x}")))
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Half-line open ASEP rates. Rates are held exactly; float copies are cached.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    p_rate: Rational,
    q_rate: Rational,
    alpha: Rational,
    gamma: Rational,
    f: FloatRates,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct FloatRates {
    p: f64,
    qr: f64,
    alpha: f64,
    gamma: f64,
}

impl ModelParams {
    /// Requires 0 < 𝗊 < 𝗉 and α, γ ≥ 0.
    pub fn new(p_rate: Rational, q_rate: Rational, alpha: Rational, gamma: Rational) -> Result<Self> {
        if !q_rate.is_positive() || q_rate >= p_rate {
            return Err(Error::domain("rates must satisfy 0 < q_rate < p_rate"));
        }
        if alpha.is_negative() || gamma.is_negative() {
            return Err(Error::domain("boundary rates must be nonnegative"));
        }
        let f = FloatRates {
            p: to_f64(&p_rate),
            qr: to_f64(&q_rate),
            alpha: to_f64(&alpha),
            gamma: to_f64(&gamma),
        };
        Ok(Self { p_rate, q_rate, alpha, gamma, f })
    }

    /// Rates from ρ with γ completed by Liggett's condition: α = ρ𝗉, γ = 𝗊(1−ρ).
    pub fn with_rho(p_rate: Rational, q_rate: Rational, rho: Rational) -> Result<Self> {
        if rho.is_negative() || rho > Rational::one() {
            return Err(Error::domain("rho must lie in [0, 1]"));
        }
        let alpha = &rho * &p_rate;
        let gamma = &q_rate * (Rational::one() - &rho);
        Self::new(p_rate, q_rate, alpha, gamma)
    }

    pub fn from_f64(p_rate: f64, q_rate: f64, alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(
            rational_from_f64(p_rate)?,
            rational_from_f64(q_rate)?,
            rational_from_f64(alpha)?,
            rational_from_f64(gamma)?,
        )
    }

    /// Float convenience for [`ModelParams::with_rho`]; Liggett holds exactly.
    pub fn with_rho_f64(p_rate: f64, q_rate: f64, rho: f64) -> Result<Self> {
        Self::with_rho(rational_from_f64(p_rate)?, rational_from_f64(q_rate)?, rational_from_f64(rho)?)
    }

    pub fn p_rate(&self) -> f64 {
        self.f.p
    }
    pub fn q_rate(&self) -> f64 {
        self.f.qr
    }
    pub fn alpha(&self) -> f64 {
        self.f.alpha
    }
    pub fn gamma(&self) -> f64 {
        self.f.gamma
    }
    /// q = 𝗊/𝗉.
    pub fn q(&self) -> f64 {
        self.f.qr / self.f.p
    }
    /// ρ = α/𝗉.
    pub fn rho(&self) -> f64 {
        self.f.alpha / self.f.p
    }

    pub fn p_exact(&self) -> &Rational {
        &self.p_rate
    }
    pub fn q_rate_exact(&self) -> &Rational {
        &self.q_rate
    }
    pub fn alpha_exact(&self) -> &Rational {
        &self.alpha
    }
    pub fn gamma_exact(&self) -> &Rational {
        &self.gamma
    }
    pub fn q_exact(&self) -> Rational {
        &self.q_rate / &self.p_rate
    }
    pub fn rho_exact(&self) -> Rational {
        &self.alpha / &self.p_rate
    }

    /// α/𝗉 + γ/𝗊 = 1, decided exactly.
    pub fn liggett_ok(&self) -> bool {
        &self.alpha / &self.p_rate + &self.gamma / &self.q_rate == Rational::one()
    }

    /// ρ ∈ (1/(1+√q), 1].
    pub fn formula_ok(&self) -> bool {
        let rho = self.rho();
        rho <= 1.0 && rho * (1.0 + self.q().sqrt()) > 1.0
    }

    pub fn require_liggett(&self) -> Result<()> {
        if self.liggett_ok() {
            Ok(())
        } else {
            Err(Error::Liggett(format!(
                "alpha/p + gamma/q = {} != 1",
                to_f64(&(&self.alpha / &self.p_rate + &self.gamma / &self.q_rate))
            )))
        }
    }

    pub fn require_formula(&self) -> Result<()> {
        self.require_liggett()?;
        if self.formula_ok() {
            Ok(())
        } else {
            Err(Error::OutOfValidity { rho: self.rho(), q: self.q() })
        }
    }
}

/// Segment open ASEP on sites 1..ℓ−1 with reservoirs at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentParams {
    base: ModelParams,
    ell: usize,
    beta: Rational,
    delta: Rational,
}

impl SegmentParams {
    pub fn new(base: ModelParams, ell: usize, beta: Rational, delta: Rational) -> Result<Self> {
        if ell < 2 {
            return Err(Error::domain("segment length ell must be at least 2"));
        }
        if beta.is_negative() || delta.is_negative() {
            return Err(Error::domain("boundary rates must be nonnegative"));
        }
        Ok(Self { base, ell, beta, delta })
    }

    /// α = ρ0𝗉, γ = 𝗊(1−ρ0), δ = ρℓ𝗊, β = 𝗉(1−ρℓ).
    pub fn with_rhos(p_rate: Rational, q_rate: Rational, rho0: Rational, rho_ell: Rational, ell: usize) -> Result<Self> {
        if rho_ell.is_negative() || rho_ell > Rational::one() {
            return Err(Error::domain("rho_ell must lie in [0, 1]"));
        }
        let beta = &p_rate * (Rational::one() - &rho_ell);
        let delta = &q_rate * &rho_ell;
        let base = ModelParams::with_rho(p_rate, q_rate, rho0)?;
        Self::new(base, ell, beta, delta)
    }

    pub fn with_rhos_f64(p_rate: f64, q_rate: f64, rho0: f64, rho_ell: f64, ell: usize) -> Result<Self> {
        Self::with_rhos(
            rational_from_f64(p_rate)?,
            rational_from_f64(q_rate)?,
            rational_from_f64(rho0)?,
            rational_from_f64(rho_ell)?,
            ell,
        )
    }

    pub fn base(&self) -> &ModelParams {
        &self.base
    }
    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn beta(&self) -> f64 {
        to_f64(&self.beta)
    }
    pub fn delta(&self) -> f64 {
        to_f64(&self.delta)
    }
    pub fn beta_exact(&self) -> &Rational {
        &self.beta
    }
    pub fn delta_exact(&self) -> &Rational {
        &self.delta
    }
    pub fn rho0(&self) -> f64 {
        self.base.rho()
    }
    /// ρℓ = δ/𝗊.
    pub fn rho_ell(&self) -> f64 {
        self.delta() / self.base.q_rate()
    }
    pub fn rho_ell_exact(&self) -> Rational {
        &self.delta / self.base.q_rate_exact()
    }

    pub fn liggett2_ok(&self) -> bool {
        self.base.liggett_ok()
            && &self.beta / self.base.p_exact() + &self.delta / self.base.q_rate_exact() == Rational::one()
    }

    pub fn require_liggett2(&self) -> Result<()> {
        if self.liggett2_ok() {
            Ok(())
        } else {
            Err(Error::Liggett("alpha/p + gamma/q = 1 and beta/p + delta/q = 1 required".into()))
        }
    }
}

/// Finite set of occupied sites on Z>0, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AsepState {
    occupied: Vec<i64>,
}

impl AsepState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_sites(sites: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut occupied: Vec<i64> = sites.into_iter().collect();
        occupied.sort_unstable();
        occupied.dedup();
        if occupied.first().is_some_and(|&s| s < 1) {
            return Err(Error::domain("occupied sites must be >= 1"));
        }
        Ok(Self { occupied })
    }

    pub fn sites(&self) -> &[i64] {
        &self.occupied
    }

    pub fn is_occupied(&self, x: i64) -> bool {
        self.occupied.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    /// N_x = #{occupied sites ≥ x}.
    pub fn current(&self, x: i64) -> i64 {
        (self.occupied.len() - self.occupied.partition_point(|&s| s < x)) as i64
    }
}

/// Free-function form of [`AsepState::current`].
pub fn current(state: &AsepState, x: i64) -> i64 {
    state.current(x)
}

/// Segment configuration: η on 1..ℓ−1 and the through-current N_ℓ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SegmentState {
    eta: Vec<bool>,
    pub n_ell: i64,
}

impl SegmentState {
    pub fn empty(ell: usize) -> Self {
        Self { eta: vec![false; ell.saturating_sub(1)], n_ell: 0 }
    }

    pub fn new(eta: Vec<bool>, n_ell: i64) -> Self {
        Self { eta, n_ell }
    }

    pub fn ell(&self) -> usize {
        self.eta.len() + 1
    }

    /// η_x for x in 1..ℓ−1.
    pub fn eta(&self, x: usize) -> bool {
        self.eta[x - 1]
    }

    pub fn eta_mut(&mut self) -> &mut [bool] {
        &mut self.eta
    }

    pub fn bits(&self) -> &[bool] {
        &self.eta
    }

    /// N_x = Σ_{i=x}^{ℓ−1} η_i + N_ℓ.
    pub fn current(&self, x: usize) -> i64 {
        let start = x.saturating_sub(1).min(self.eta.len());
        self.eta[start..].iter().filter(|&&b| b).count() as i64 + self.n_ell
    }
}

/// An ordered vector of sites, validated against a Weyl chamber when needed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedSites(Vec<i64>);

impl OrderedSites {
    /// Unchecked vector; used for shifted boundary arguments.
    pub fn raw(x: Vec<i64>) -> Self {
        Self(x)
    }

    /// Element of W^n_{≥1}.
    pub fn halfline(x: Vec<i64>) -> Result<Self> {
        let s = Self(x);
        if s.is_strict() && s.0.first().is_none_or(|&a| a >= 1) {
            Ok(s)
        } else {
            Err(Error::Chamber(s.0))
        }
    }

    /// Element of W^n_{[1,ℓ]}.
    pub fn segment(x: Vec<i64>, ell: usize) -> Result<Self> {
        let s = Self::halfline(x)?;
        if s.0.last().is_none_or(|&b| b <= ell as i64) {
            Ok(s)
        } else {
            Err(Error::Chamber(s.0))
        }
    }

    fn is_strict(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// H(η, x⃗) = ∏ q^{N_{x_i}(η)} on the half-line.
pub fn observable_h(state: &AsepState, x: &OrderedSites, q: f64) -> Result<f64> {
    let x = OrderedSites::halfline(x.0.clone())?;
    let total: i64 = x.0.iter().map(|&xi| state.current(xi)).sum();
    Ok(q.powi(total as i32))
}

/// H on the segment, with N_x including the through-current.
pub fn observable_h_segment(state: &SegmentState, x: &OrderedSites, q: f64) -> Result<f64> {
    let x = OrderedSites::segment(x.0.clone(), state.ell())?;
    let total: i64 = x.0.iter().map(|&xi| state.current(xi as usize)).sum();
    Ok(q.powi(total as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(r("0.9"), Rational::new(9.into(), 10.into()));
        assert_eq!(r("3/4"), Rational::new(3.into(), 4.into()));
        assert_eq!(r("-1.25e-2"), Rational::new((-1).into(), 80.into()));
        assert_eq!(r("2"), Rational::from_integer(2.into()));
        assert_eq!(r(".5"), Rational::new(1.into(), 2.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn liggett_is_exact_from_decimals() {
        let m = ModelParams::with_rho(r("1"), r("0.5"), r("0.9")).unwrap();
        assert!(m.liggett_ok());
        assert_eq!(m.gamma_exact(), &r("0.05"));
        let bad = ModelParams::new(r("1"), r("1/3"), r("1/2"), r("1/2")).unwrap();
        assert!(!bad.liggett_ok());
        assert!(bad.require_formula().is_err());
    }

    #[test]
    fn formula_gate() {
        let q = 0.5f64;
        let edge = 1.0 / (1.0 + q.sqrt());
        assert!(!ModelParams::with_rho_f64(1.0, q, edge - 1e-9).unwrap().formula_ok());
        assert!(ModelParams::with_rho_f64(1.0, q, edge + 1e-9).unwrap().formula_ok());
        assert!(ModelParams::with_rho_f64(1.0, q, 1.0).unwrap().formula_ok());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(ModelParams::from_f64(1.0, 1.0, 0.5, 0.5).is_err());
        assert!(ModelParams::from_f64(1.0, 0.5, -0.1, 0.5).is_err());
    }

    #[test]
    fn current_examples() {
        assert_eq!(AsepState::empty().current(3), 0);
        let s = AsepState::from_sites([2, 5, 7]).unwrap();
        assert_eq!(current(&s, 5), 2);
        assert_eq!(AsepState::from_sites([1]).unwrap().current(1), 1);
        assert!(AsepState::from_sites([0]).is_err());
    }

    #[test]
    fn observable_examples() {
        let x = OrderedSites::halfline(vec![1, 4]).unwrap();
        assert_eq!(observable_h(&AsepState::empty(), &x, 0.5).unwrap(), 1.0);
        let s = AsepState::from_sites([2]).unwrap();
        assert_eq!(observable_h(&s, &OrderedSites::raw(vec![1, 2]), 0.5).unwrap(), 0.25);
        let s = AsepState::from_sites([1, 4]).unwrap();
        assert_eq!(observable_h(&s, &OrderedSites::raw(vec![2]), 0.5).unwrap(), 0.5);
        assert!(observable_h(&s, &OrderedSites::raw(vec![2, 2]), 0.5).is_err());
    }

    #[test]
    fn segment_observable_examples() {
        let ell = 5;
        let x = OrderedSites::segment(vec![2, 3], ell).unwrap();
        assert_eq!(observable_h_segment(&SegmentState::empty(ell), &x, 0.5).unwrap(), 1.0);
        let s = SegmentState::new(vec![false; 4], 2);
        let x = OrderedSites::segment(vec![5], ell).unwrap();
        assert_eq!(observable_h_segment(&s, &x, 0.5).unwrap(), 0.25);
        let s = SegmentState::new(vec![true, false, false, false], -1);
        let x = OrderedSites::segment(vec![1], ell).unwrap();
        assert_eq!(observable_h_segment(&s, &x, 0.5).unwrap(), 1.0);
        assert!(OrderedSites::segment(vec![1, 6], ell).is_err());
    }
}
