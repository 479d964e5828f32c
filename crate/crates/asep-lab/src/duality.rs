//! Exact verification of the Markov dualities between particle systems and
//! their dual n-particle processes. Every quantity is a rational number; a
//! residual passes only when it is exactly zero.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Rational, SegmentParams};

/// Occupied sites plus the through-current counter (zero off the segment).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Eta {
    pub occupied: BTreeSet<i64>,
    pub through: i64,
}

impl Eta {
    pub fn new(sites: impl IntoIterator<Item = i64>, through: i64) -> Self {
        Self { occupied: sites.into_iter().collect(), through }
    }

    pub fn has(&self, x: i64) -> bool {
        self.occupied.contains(&x)
    }

    fn with(&self, x: i64, on: bool, dn: i64) -> Self {
        let mut e = self.clone();
        if on {
            e.occupied.insert(x);
        } else {
            e.occupied.remove(&x);
        }
        e.through += dn;
        e
    }

    fn swapped(&self, x: i64, dn: i64) -> Self {
        let (a, b) = (self.has(x), self.has(x + 1));
        self.with(x, b, 0).with(x + 1, a, dn)
    }

    /// N_x = #{occupied y : x ≤ y < cap} + through.
    pub fn current(&self, x: i64, cap: Option<i64>) -> i64 {
        let n = match cap {
            Some(c) if c <= x => 0,
            Some(c) => self.occupied.range(x..c).count(),
            None => self.occupied.range(x..).count(),
        };
        n as i64 + self.through
    }

    pub fn sites(&self) -> Vec<i64> {
        self.occupied.iter().copied().collect()
    }
}

/// A state of either side of a duality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum State {
    Eta(Eta),
    Chamber(Vec<i64>),
}

/// The generators entering the dualities, with exact rates.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    /// L^Z on finitely supported configurations.
    FullLine { p: Rational, q: Rational },
    /// L^{Z>0}: bulk plus injection α and ejection γ at site 1.
    HalfLine { p: Rational, q: Rational, alpha: Rational, gamma: Rational },
    /// L°: bulk on Z≥0, reflecting at 0.
    HalfLineClosed { p: Rational, q: Rational },
    /// D^(n): n-particle ASEP on Z, 𝗉 to the left and 𝗊 to the right.
    DualN { p: Rational, q: Rational },
    /// D^(n,ρ): the same on Z≥1, killed at rate (𝗉−𝗊)ρ while x_1 = 1.
    DualNRho { p: Rational, q: Rational, rho: Rational },
    /// L^⟦1,ℓ−1⟧ acting on (η, N_ℓ).
    Segment { p: Rational, q: Rational, alpha: Rational, gamma: Rational, beta: Rational, delta: Rational, ell: i64 },
    /// L°°: closed ASEP on 0..ℓ; the through-counter follows the bond (ℓ−1, ℓ).
    SegmentClosed { p: Rational, q: Rational, ell: i64 },
    /// D^(n,ρ0,ρℓ): killing at 1, duplication at ℓ.
    DualSegment { p: Rational, q: Rational, rho0: Rational, rho_ell: Rational, ell: i64 },
}

impl GeneratorSpec {
    pub fn full_line(m: &ModelParams) -> Self {
        Self::FullLine { p: m.p_exact().clone(), q: m.q_rate_exact().clone() }
    }
    pub fn half_line(m: &ModelParams) -> Self {
        Self::HalfLine {
            p: m.p_exact().clone(),
            q: m.q_rate_exact().clone(),
            alpha: m.alpha_exact().clone(),
            gamma: m.gamma_exact().clone(),
        }
    }
    pub fn half_line_closed(m: &ModelParams) -> Self {
        Self::HalfLineClosed { p: m.p_exact().clone(), q: m.q_rate_exact().clone() }
    }
    pub fn dual_n(m: &ModelParams) -> Self {
        Self::DualN { p: m.p_exact().clone(), q: m.q_rate_exact().clone() }
    }
    pub fn dual_n_rho(m: &ModelParams) -> Self {
        Self::DualNRho { p: m.p_exact().clone(), q: m.q_rate_exact().clone(), rho: m.rho_exact() }
    }
    pub fn segment(s: &SegmentParams) -> Self {
        let m = s.base();
        Self::Segment {
            p: m.p_exact().clone(),
            q: m.q_rate_exact().clone(),
            alpha: m.alpha_exact().clone(),
            gamma: m.gamma_exact().clone(),
            beta: s.beta_exact().clone(),
            delta: s.delta_exact().clone(),
            ell: s.ell() as i64,
        }
    }
    pub fn segment_closed(s: &SegmentParams) -> Self {
        let m = s.base();
        Self::SegmentClosed { p: m.p_exact().clone(), q: m.q_rate_exact().clone(), ell: s.ell() as i64 }
    }
    pub fn dual_segment(s: &SegmentParams) -> Self {
        let m = s.base();
        Self::DualSegment {
            p: m.p_exact().clone(),
            q: m.q_rate_exact().clone(),
            rho0: m.rho_exact(),
            rho_ell: s.rho_ell_exact(),
            ell: s.ell() as i64,
        }
    }

    /// Jump rates out of `s` with their targets; zero-rate moves are omitted.
    pub fn transitions(&self, s: &State) -> Result<Vec<(Rational, State)>> {
        match (self, s) {
            (Self::FullLine { p, q }, State::Eta(e)) => {
                let (Some(&lo), Some(&hi)) = (e.occupied.first(), e.occupied.last()) else {
                    return Ok(Vec::new());
                };
                Ok(bulk(e, lo - 1, hi, p, q, None))
            }
            (Self::HalfLine { p, q, alpha, gamma }, State::Eta(e)) => {
                check_sites(e, 1, None)?;
                let mut out = boundary_left(e, alpha, gamma);
                if let Some(&hi) = e.occupied.last() {
                    out.extend(bulk(e, 1, hi, p, q, None));
                }
                Ok(out)
            }
            (Self::HalfLineClosed { p, q }, State::Eta(e)) => {
                check_sites(e, 0, None)?;
                Ok(e.occupied.last().map_or_else(Vec::new, |&hi| bulk(e, 0, hi, p, q, None)))
            }
            (Self::Segment { p, q, alpha, gamma, beta, delta, ell }, State::Eta(e)) => {
                check_sites(e, 1, Some(ell - 1))?;
                let mut out = boundary_left(e, alpha, gamma);
                let r = ell - 1;
                if e.has(r) {
                    push_rate(&mut out, beta, State::Eta(e.with(r, false, 1)));
                } else {
                    push_rate(&mut out, delta, State::Eta(e.with(r, true, -1)));
                }
                out.extend(bulk(e, 1, ell - 2, p, q, None));
                Ok(out)
            }
            (Self::SegmentClosed { p, q, ell }, State::Eta(e)) => {
                check_sites(e, 0, Some(*ell))?;
                Ok(bulk(e, 0, ell - 1, p, q, Some(ell - 1)))
            }
            (Self::DualN { p, q }, State::Chamber(x)) => {
                check_chamber(x, None, None)?;
                Ok(particle_moves(x, p, q, None, None))
            }
            (Self::DualNRho { p, q, .. }, State::Chamber(x)) => {
                check_chamber(x, Some(1), None)?;
                Ok(particle_moves(x, p, q, Some(1), None))
            }
            (Self::DualSegment { p, q, ell, .. }, State::Chamber(x)) => {
                check_chamber(x, Some(1), Some(*ell))?;
                Ok(particle_moves(x, p, q, Some(1), Some(*ell)))
            }
            _ => Err(Error::domain("state kind does not match the generator")),
        }
    }

    /// Diagonal potential V with (Gf)(s) = Σ rate·(f(s')−f(s)) + V(s)·f(s).
    pub fn potential(&self, s: &State) -> Rational {
        match (self, s) {
            (Self::DualNRho { p, q, rho }, State::Chamber(x)) if x.first() == Some(&1) => -((p - q) * rho),
            (Self::DualSegment { p, q, rho0, rho_ell, ell }, State::Chamber(x)) => {
                let mut v = Rational::zero();
                if x.first() == Some(&1) {
                    v -= (p - q) * rho0;
                }
                if x.last() == Some(ell) {
                    v += (p - q) * rho_ell;
                }
                v
            }
            _ => Rational::zero(),
        }
    }
}

fn push_rate(out: &mut Vec<(Rational, State)>, rate: &Rational, to: State) {
    if !rate.is_zero() {
        out.push((rate.clone(), to));
    }
}

fn boundary_left(e: &Eta, alpha: &Rational, gamma: &Rational) -> Vec<(Rational, State)> {
    let mut out = Vec::new();
    if e.has(1) {
        push_rate(&mut out, gamma, State::Eta(e.with(1, false, 0)));
    } else {
        push_rate(&mut out, alpha, State::Eta(e.with(1, true, 0)));
    }
    out
}

/// Swaps across bonds (x, x+1) for lo ≤ x ≤ hi; a jump across `counted` shifts the counter by ±1.
fn bulk(e: &Eta, lo: i64, hi: i64, p: &Rational, q: &Rational, counted: Option<i64>) -> Vec<(Rational, State)> {
    let mut out = Vec::new();
    for x in lo..=hi {
        let dn = if counted == Some(x) { 1 } else { 0 };
        match (e.has(x), e.has(x + 1)) {
            (true, false) => push_rate(&mut out, p, State::Eta(e.swapped(x, dn))),
            (false, true) => push_rate(&mut out, q, State::Eta(e.swapped(x, -dn))),
            _ => {}
        }
    }
    out
}

/// Moves of the dual particles: 𝗉 to the left, 𝗊 to the right, exclusion, walls at `lo`/`hi`.
fn particle_moves(x: &[i64], p: &Rational, q: &Rational, lo: Option<i64>, hi: Option<i64>) -> Vec<(Rational, State)> {
    let n = x.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left_free = if i == 0 { lo.is_none_or(|l| x[0] > l) } else { x[i] - x[i - 1] > 1 };
        if left_free {
            let mut y = x.to_vec();
            y[i] -= 1;
            push_rate(&mut out, p, State::Chamber(y));
        }
        let right_free = if i + 1 == n { hi.is_none_or(|h| x[i] < h) } else { x[i + 1] - x[i] > 1 };
        if right_free {
            let mut y = x.to_vec();
            y[i] += 1;
            push_rate(&mut out, q, State::Chamber(y));
        }
    }
    out
}

fn check_sites(e: &Eta, lo: i64, hi: Option<i64>) -> Result<()> {
    let ok = e.occupied.first().is_none_or(|&a| a >= lo) && e.occupied.last().is_none_or(|&b| hi.is_none_or(|h| b <= h));
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("configuration {:?} leaves the lattice", e.sites())))
    }
}

fn check_chamber(x: &[i64], lo: Option<i64>, hi: Option<i64>) -> Result<()> {
    let ok = x.windows(2).all(|w| w[0] < w[1])
        && x.first().is_none_or(|&a| lo.is_none_or(|l| a >= l))
        && x.last().is_none_or(|&b| hi.is_none_or(|h| b <= h));
    if ok {
        Ok(())
    } else {
        Err(Error::Chamber(x.to_vec()))
    }
}

/// (G f)(s), computed exactly from the transition list and the potential.
pub fn apply_generator<F>(g: &GeneratorSpec, f: F, s: &State) -> Result<Rational>
where
    F: Fn(&State) -> Rational,
{
    let fs = f(s);
    let mut acc = g.potential(s) * &fs;
    for (rate, to) in g.transitions(s)? {
        acc += rate * (f(&to) - &fs);
    }
    Ok(acc)
}

/// H(η, x⃗) = ∏ q^{N_{x_i}(η)}, with sites ≥ `cap` excluded from N.
pub fn h_exact(e: &Eta, x: &[i64], q: &Rational, cap: Option<i64>) -> Rational {
    let total: i64 = x.iter().map(|&xi| e.current(xi, cap)).sum();
    q.pow(i32::try_from(total).expect("current fits in i32"))
}

/// Outcome of one exact identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub check: CheckKind,
    pub eta: Vec<i64>,
    pub through: i64,
    pub x: Vec<i64>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub residual: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    FullSpace,
    HalfLine,
    Segment,
    Fictitious,
    FictitiousSegment,
    /// L^{Z>0}H against D^(n)H with Liggett's condition dropped.
    NoLiggettPlain,
    /// L^{Z>0}H against the corrected identity when x_1 = 1.
    NoLiggettCorrected,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullSpace => "fullspace",
            Self::HalfLine => "halfline",
            Self::Segment => "segment",
            Self::Fictitious => "fictitious",
            Self::FictitiousSegment => "fictitious-segment",
            Self::NoLiggettPlain => "no-liggett-plain",
            Self::NoLiggettCorrected => "no-liggett-corrected",
        })
    }
}

impl DualityReport {
    fn new(check: CheckKind, e: &Eta, x: &[i64], lhs: Rational, rhs: Rational) -> Self {
        let residual = &lhs - &rhs;
        Self { check, eta: e.sites(), through: e.through, x: x.to_vec(), lhs, rhs, residual }
    }

    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

fn eta_of(s: &State) -> &Eta {
    match s {
        State::Eta(e) => e,
        State::Chamber(_) => unreachable!("η-side generator produced a chamber state"),
    }
}

fn chamber_of(s: &State) -> &[i64] {
    match s {
        State::Chamber(x) => x,
        State::Eta(_) => unreachable!("dual generator produced an η state"),
    }
}

/// Both sides of G_η H = G_x H for fixed (η, x⃗).
fn both_sides(
    particle: &GeneratorSpec,
    dual: &GeneratorSpec,
    e: &Eta,
    x: &[i64],
    q: &Rational,
    cap: Option<i64>,
) -> Result<(Rational, Rational)> {
    let lhs = apply_generator(particle, |s| h_exact(eta_of(s), x, q, cap), &State::Eta(e.clone()))?;
    let rhs = apply_generator(dual, |s| h_exact(e, chamber_of(s), q, cap), &State::Chamber(x.to_vec()))?;
    Ok((lhs, rhs))
}

/// L^Z H − D^(n) H for finitely supported η on Z and any x⃗ ∈ W^n.
pub fn verify_fullspace(m: &ModelParams, e: &Eta, x: &[i64]) -> Result<DualityReport> {
    let q = m.q_exact();
    let (l, r) = both_sides(&GeneratorSpec::full_line(m), &GeneratorSpec::dual_n(m), e, x, &q, None)?;
    Ok(DualityReport::new(CheckKind::FullSpace, e, x, l, r))
}

/// L^{Z>0} H − D^(n,ρ) H; refuses parameters violating Liggett's condition.
pub fn verify_halfline(m: &ModelParams, e: &Eta, x: &[i64]) -> Result<DualityReport> {
    m.require_liggett()?;
    let q = m.q_exact();
    let (l, r) = both_sides(&GeneratorSpec::half_line(m), &GeneratorSpec::dual_n_rho(m), e, x, &q, None)?;
    Ok(DualityReport::new(CheckKind::HalfLine, e, x, l, r))
}

/// L^⟦1,ℓ−1⟧ H − D^(n,ρ0,ρℓ) H at the counter value carried by `e`.
pub fn verify_segment(s: &SegmentParams, e: &Eta, x: &[i64]) -> Result<DualityReport> {
    s.require_liggett2()?;
    check_chamber(x, Some(1), Some(s.ell() as i64))?;
    let q = s.base().q_exact();
    let cap = Some(s.ell() as i64);
    let (l, r) = both_sides(&GeneratorSpec::segment(s), &GeneratorSpec::dual_segment(s), e, x, &q, cap)?;
    Ok(DualityReport::new(CheckKind::Segment, e, x, l, r))
}

/// L^{Z>0} H(η) against ρ·L°H(η, η_0=1) + (1−ρ)·L°H(η, η_0=0).
pub fn verify_fictitious(m: &ModelParams, e: &Eta, x: &[i64]) -> Result<DualityReport> {
    m.require_liggett()?;
    check_chamber(x, Some(1), None)?;
    let q = m.q_exact();
    let rho = m.rho_exact();
    let f = |s: &State| h_exact(eta_of(s), x, &q, None);
    let lhs = apply_generator(&GeneratorSpec::half_line(m), f, &State::Eta(e.clone()))?;
    let closed = GeneratorSpec::half_line_closed(m);
    let full = apply_generator(&closed, f, &State::Eta(e.with(0, true, 0)))?;
    let empty = apply_generator(&closed, f, &State::Eta(e.clone()))?;
    let rhs = &rho * full + (Rational::one() - &rho) * empty;
    Ok(DualityReport::new(CheckKind::Fictitious, e, x, lhs, rhs))
}

/// L^⟦1,ℓ−1⟧ H against the average of L°°H over independent η_0 ~ Ber(ρ0), η_ℓ ~ Ber(ρℓ).
pub fn verify_fictitious_segment(s: &SegmentParams, e: &Eta, x: &[i64]) -> Result<DualityReport> {
    s.require_liggett2()?;
    let ell = s.ell() as i64;
    check_chamber(x, Some(1), Some(ell))?;
    let q = s.base().q_exact();
    let f = |st: &State| h_exact(eta_of(st), x, &q, Some(ell));
    let lhs = apply_generator(&GeneratorSpec::segment(s), f, &State::Eta(e.clone()))?;
    let closed = GeneratorSpec::segment_closed(s);
    let (r0, rl) = (s.base().rho_exact(), s.rho_ell_exact());
    let one = Rational::one();
    let mut rhs = Rational::zero();
    for (a, wa) in [(true, r0.clone()), (false, &one - &r0)] {
        for (b, wb) in [(true, rl.clone()), (false, &one - &rl)] {
            let ext = e.with(0, a, 0).with(ell, b, 0);
            rhs += &wa * &wb * apply_generator(&closed, f, &State::Eta(ext))?;
        }
    }
    Ok(DualityReport::new(CheckKind::FictitiousSegment, e, x, lhs, rhs))
}

/// Without Liggett's condition: the plain identity against D^(n), and for x_1 = 1
/// the corrected identity (αq+γ)H(2,x_2,…) − (α+γ)H(1,x_2,…) + D^(n−1)H(1,·)(x_2,…).
#[derive(Clone, Debug, PartialEq)]
pub struct NoLiggettReport {
    pub plain: DualityReport,
    pub corrected: Option<DualityReport>,
}

impl NoLiggettReport {
    /// The identity the theory predicts for this x⃗ holds exactly.
    pub fn passed(&self) -> bool {
        match &self.corrected {
            Some(c) => c.passed(),
            None => self.plain.passed(),
        }
    }
}

pub fn negative_control_no_liggett(m: &ModelParams, e: &Eta, x: &[i64]) -> Result<NoLiggettReport> {
    check_chamber(x, Some(1), None)?;
    let q = m.q_exact();
    let (l, r) = both_sides(&GeneratorSpec::half_line(m), &GeneratorSpec::dual_n(m), e, x, &q, None)?;
    let plain = DualityReport::new(CheckKind::NoLiggettPlain, e, x, l.clone(), r);
    if x.first() != Some(&1) {
        return Ok(NoLiggettReport { plain, corrected: None });
    }
    let (alpha, gamma) = (m.alpha_exact(), m.gamma_exact());
    let h = |y: &[i64]| h_exact(e, y, &q, None);
    let mut two = x.to_vec();
    two[0] = 2;
    let tail = &x[1..];
    let tail_term = apply_generator(
        &GeneratorSpec::dual_n(m),
        |s| {
            let mut y = vec![1];
            y.extend_from_slice(chamber_of(s));
            h(&y)
        },
        &State::Chamber(tail.to_vec()),
    )?;
    let rhs = (alpha * &q + gamma) * h(&two) - (alpha + gamma) * h(x) + tail_term;
    let corrected = DualityReport::new(CheckKind::NoLiggettCorrected, e, x, l, rhs);
    Ok(NoLiggettReport { plain, corrected: Some(corrected) })
}

/// All strictly increasing n-vectors with entries in lo..=hi, lexicographic.
pub fn chamber_vectors(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, lo: i64, hi: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let start = cur.last().map_or(lo, |&l| l + 1);
        for v in start..=hi {
            cur.push(v);
            rec(n, lo, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, lo, hi, &mut Vec::new(), &mut out);
    out
}

/// All subsets of lo..=hi, as configurations with the given counter.
pub fn all_configurations(lo: i64, hi: i64, through: i64) -> Vec<Eta> {
    let width = (hi - lo + 1).max(0) as u32;
    (0u64..1 << width)
        .map(|mask| Eta::new((0..width).filter(|b| mask >> b & 1 == 1).map(|b| lo + b as i64), through))
        .collect()
}

/// Runs `check` on every (η, x⃗) pair, in parallel, returning reports in input order.
pub fn run_grid<F>(etas: &[Eta], xs: &[Vec<i64>], check: F) -> Result<Vec<DualityReport>>
where
    F: Fn(&Eta, &[i64]) -> Result<DualityReport> + Sync + Send,
{
    let total = etas.len() * xs.len();
    crate::par::map_indexed(total, |k| check(&etas[k / xs.len()], &xs[k % xs.len()])).into_iter().collect()
}

/// Every x⃗ ∈ W^n with 1 ≤ n ≤ n_max and entries in lo..=hi.
pub fn chambers_up_to(n_max: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    (1..=n_max).flat_map(|n| chamber_vectors(n, lo, hi)).collect()
}

/// Exact generator matrix of L°° on {0,1}^{0..ℓ}, counter ignored; rows indexed by bitmask.
pub fn closed_segment_matrix(s: &SegmentParams) -> Result<Vec<Vec<Rational>>> {
    let ell = s.ell() as i64;
    let states = all_configurations(0, ell, 0);
    let g = GeneratorSpec::segment_closed(s);
    states
        .iter()
        .map(|e| {
            let mut row = vec![Rational::zero(); states.len()];
            for (j, target) in states.iter().enumerate() {
                let indicator = |st: &State| {
                    if eta_of(st).occupied == target.occupied {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                };
                row[j] = apply_generator(&g, indicator, &State::Eta(e.clone()))?;
            }
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_rational;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn half(rho: &str) -> ModelParams {
        ModelParams::with_rho(r("1"), r("1/2"), r(rho)).unwrap()
    }

    #[test]
    fn injection_only_on_empty_state() {
        let m = half("3/4");
        let g = GeneratorSpec::half_line(&m);
        let q = m.q_exact();
        let v = apply_generator(&g, |s| h_exact(eta_of(s), &[1], &q, None), &State::Eta(Eta::default())).unwrap();
        assert_eq!(v, m.alpha_exact() * (&q - Rational::one()));
    }

    #[test]
    fn killed_dual_single_particle() {
        let m = half("3/4");
        let g = GeneratorSpec::dual_n_rho(&m);
        let f = |s: &State| Rational::from_integer((chamber_of(s)[0] * 10 + 3).into());
        let v = apply_generator(&g, f, &State::Chamber(vec![1])).unwrap();
        let (p, q, rho) = (m.p_exact().clone(), m.q_rate_exact().clone(), m.rho_exact());
        let want = &q * (r("23") - r("13")) - (p - &q) * rho * r("13");
        assert_eq!(v, want);
    }

    #[test]
    fn dual_n_four_moves_for_separated_pair() {
        let m = half("1");
        let t = GeneratorSpec::dual_n(&m).transitions(&State::Chamber(vec![3, 5])).unwrap();
        let rates: Vec<Rational> = t.iter().map(|(a, _)| a.clone()).collect();
        assert_eq!(rates, vec![r("1"), r("1/2"), r("1"), r("1/2")]);
    }

    #[test]
    fn halfline_named_instance() {
        let rep = verify_halfline(&half("3/4"), &Eta::new([2], 0), &[1, 3]).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn halfline_refuses_without_liggett() {
        let m = ModelParams::new(r("1"), r("1/3"), r("1/2"), r("1/2")).unwrap();
        assert!(matches!(verify_halfline(&m, &Eta::default(), &[1]), Err(Error::Liggett(_))));
    }

    #[test]
    fn segment_named_instance() {
        let s = SegmentParams::with_rhos(r("1"), r("1/2"), r("3/4"), r("1/3"), 4).unwrap();
        let rep = verify_segment(&s, &Eta::new([1, 3], 0), &[1, 4]).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn segment_exhaustive_small() {
        for ell in 2..=4 {
            let s = SegmentParams::with_rhos(r("3/2"), r("2/5"), r("5/7"), r("2/9"), ell).unwrap();
            for through in [0, 1, -1] {
                let etas = all_configurations(1, ell as i64 - 1, through);
                let xs = chambers_up_to(ell.min(3), 1, ell as i64);
                for rep in run_grid(&etas, &xs, |e, x| verify_segment(&s, e, x)).unwrap() {
                    assert!(rep.passed(), "{rep:?}");
                }
            }
        }
    }

    #[test]
    fn misprinted_right_move_breaks_segment_duality() {
        // Moving x_1 instead of x_n when x_n < ℓ does not give a duality.
        let s = SegmentParams::with_rhos(r("1"), r("1/2"), r("3/4"), r("1/3"), 4).unwrap();
        let e = Eta::new([3], 0);
        let x = [1, 3];
        let q = s.base().q_exact();
        let good = apply_generator(&GeneratorSpec::dual_segment(&s), |st| h_exact(&e, chamber_of(st), &q, Some(4)), &State::Chamber(x.to_vec())).unwrap();
        let f = |y: &[i64]| h_exact(&e, y, &q, Some(4));
        let swapped = &good - s.base().q_rate_exact() * (f(&[1, 4]) - f(&[2, 3]));
        let lhs = verify_segment(&s, &e, &x).unwrap().lhs;
        assert_eq!(lhs, good);
        assert_ne!(lhs, swapped);
    }

    #[test]
    fn closed_segment_rows_sum_to_zero() {
        let s = SegmentParams::with_rhos(r("1"), r("1/3"), r("1/2"), r("1/2"), 3).unwrap();
        for row in closed_segment_matrix(&s).unwrap() {
            assert!(row.iter().fold(Rational::zero(), |a, b| a + b).is_zero());
        }
    }

    #[test]
    fn no_liggett_controls() {
        let m = ModelParams::new(r("1"), r("1/3"), r("1/2"), r("1/2")).unwrap();
        assert!(!m.liggett_ok());
        let e = Eta::new([1, 3], 0);
        let a = negative_control_no_liggett(&m, &e, &[2, 4]).unwrap();
        assert!(a.plain.passed() && a.corrected.is_none());
        let b = negative_control_no_liggett(&m, &e, &[1, 3]).unwrap();
        assert!(b.passed());
        let c = negative_control_no_liggett(&m, &Eta::default(), &[1, 2]).unwrap();
        assert!(!c.plain.passed() && c.passed());
    }

    #[test]
    fn chamber_enumeration_counts() {
        assert_eq!(chamber_vectors(2, 1, 5).len(), 10);
        assert_eq!(all_configurations(1, 5, 0).len(), 32);
    }
}
