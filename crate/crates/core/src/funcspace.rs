//! ℤ-invariant functions on ℝ×Ẑ.
//!
//! A [`SolenoidPoly`] is a finite sum `Σ c_q χ_q` over solenoid characters;
//! each term lifts to `χ_{q, q mod ℤ}` on ℝ×Ẑ, so invariance under
//! `(x, t) ↦ (x + γ, t − γ)` holds by construction. [`RawProductPoly`]
//! allows arbitrary product characters and exists to exercise the
//! invariance diagnostics on functions that do not descend.
//!
//! Sup norms are estimated on uniform grids: [`GridPolicy::density`] points
//! per smallest period, over one common period when that fits within
//! [`GridPolicy::max_points`], otherwise over a prefix of it. The grid used
//! is always returned alongside the estimate.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::characters::{zhat_phase, ProductCharacter, SolenoidCharacter};
use crate::error::{Error, Result};
use crate::exec::{complex_sum, map_indexed, max_indexed, unit, ExecPolicy};
use crate::profinite::{embed_i64, ModulusTower, ProfiniteInt};
use crate::quadrature::TrigIntegrand;
use crate::rationals::Rational;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Sup-norm grid settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPolicy {
    pub density: usize,
    pub max_points: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            density: 64,
            max_points: 1 << 16,
        }
    }
}

/// A uniform grid `start + i·step`, `i < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupGrid {
    pub start: f64,
    pub step: f64,
    pub points: usize,
    /// True when the grid spans a full common period.
    pub covers_period: bool,
}

impl SupGrid {
    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
}

/// A trigonometric polynomial `Σ c_λ exp(2πiλx)` on ℝ with rational
/// frequencies.
#[derive(Clone, PartialEq, Default)]
pub struct TrigPoly {
    terms: BTreeMap<Rational, Complex64>,
    numeric: Vec<(f64, Complex64)>,
}

impl TrigPoly {
    /// Merges repeated frequencies and drops zero coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Complex64)>) -> Self {
        let mut map: BTreeMap<Rational, Complex64> = BTreeMap::new();
        for (lam, c) in terms {
            *map.entry(lam).or_insert_with(zero) += c;
        }
        map.retain(|_, c| *c != zero());
        let numeric = map.iter().map(|(l, c)| (l.to_f64(), *c)).collect();
        Self { terms: map, numeric }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms([(Rational::zero(), c)])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, lambda: &Rational) -> Complex64 {
        self.terms.get(lambda).copied().unwrap_or_else(zero)
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(&Rational::zero())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        complex_sum(self.numeric.iter().map(|(lam, c)| c * unit(lam * x)))
    }

    /// Largest |frequency|.
    pub fn band(&self) -> f64 {
        self.terms.keys().fold(0.0, |m, l| m.max(l.to_f64().abs()))
    }

    /// Smallest nonzero |frequency|, if any.
    pub fn min_nonzero_frequency(&self) -> Option<f64> {
        self.terms
            .keys()
            .filter(|l| !l.is_zero())
            .map(|l| l.to_f64().abs())
            .reduce(f64::min)
    }

    /// Least common period `P > 0`; `None` for constants.
    pub fn common_period(&self) -> Option<Rational> {
        let nonzero: Vec<&Rational> = self.terms.keys().filter(|l| !l.is_zero()).collect();
        if nonzero.is_empty() {
            return None;
        }
        let l = nonzero.iter().fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
        let g = nonzero
            .iter()
            .fold(BigInt::zero(), |acc, q| acc.gcd(&(q.numer().abs() * (&l / q.denom()))));
        Some(Rational::reduce(l, g).expect("nonzero gcd"))
    }

    /// `x ↦ φ(x + s)`.
    pub fn translate(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(l, c)| (l.clone(), c * unit(l.to_f64() * s))))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(l, c)| (l.clone(), c * a)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).map(|(l, c)| (l.clone(), *c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `φ(x)·exp(−2πiλx)`.
    pub fn modulate(&self, lambda: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(l, c)| (l - lambda, *c)))
    }

    /// `|φ|²` expanded: `Σ_{j,k} c_j c̄_k exp(2πi(λ_j − λ_k)x)`.
    pub fn abs_squared(&self) -> Self {
        Self::from_terms(self.terms.iter().flat_map(|(lj, cj)| {
            self.terms
                .iter()
                .map(move |(lk, ck)| (lj - lk, cj * ck.conj()))
        }))
    }

    pub fn to_integrand(&self) -> TrigIntegrand {
        TrigIntegrand::new(self.terms.iter().map(|(l, c)| (l.to_f64(), *c)))
    }

    pub fn sup_grid(&self, policy: GridPolicy) -> SupGrid {
        let band = self.band();
        let Some(period) = self.common_period() else {
            return SupGrid {
                start: 0.0,
                step: 1.0,
                points: 1,
                covers_period: true,
            };
        };
        let period = period.to_f64();
        let per_unit = policy.density as f64 * band;
        let needed = (per_unit * period).ceil().max(1.0);
        if needed <= policy.max_points as f64 {
            let points = needed as usize;
            SupGrid {
                start: 0.0,
                step: period / points as f64,
                points,
                covers_period: true,
            }
        } else {
            SupGrid {
                start: 0.0,
                step: 1.0 / per_unit,
                points: policy.max_points,
                covers_period: false,
            }
        }
    }

    /// `max |φ|` over `grid`.
    pub fn sup_on(&self, grid: &SupGrid, exec: ExecPolicy) -> f64 {
        max_indexed(exec, grid.points, |i| self.eval(grid.point(i)).norm())
    }

    pub fn sup_norm(&self, policy: GridPolicy, exec: ExecPolicy) -> (f64, SupGrid) {
        let grid = self.sup_grid(policy);
        (self.sup_on(&grid, exec), grid)
    }
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Anything that can be evaluated on ℝ×Ẑ.
pub trait SolenoidFunction: Sync {
    fn eval(&self, x: f64, t: &ProfiniteInt) -> Result<Complex64>;
}

/// One summand `c·χ_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidTerm {
    pub coeff: Complex64,
    pub character: SolenoidCharacter,
}

impl SolenoidTerm {
    pub fn new(coeff: Complex64, q: Rational) -> Self {
        Self {
            coeff,
            character: SolenoidCharacter::new(q),
        }
    }
}

/// A finite solenoidal trigonometric polynomial.
#[derive(Clone, PartialEq, Default)]
pub struct SolenoidPoly {
    terms: BTreeMap<Rational, Complex64>,
}

impl SolenoidPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_pairs([(Rational::zero(), c)])
    }

    /// Merges repeated characters and prunes zero coefficients.
    pub fn from_pairs(terms: impl IntoIterator<Item = (Rational, Complex64)>) -> Self {
        let mut map: BTreeMap<Rational, Complex64> = BTreeMap::new();
        for (q, c) in terms {
            *map.entry(q).or_insert_with(zero) += c;
        }
        map.retain(|_, c| *c != zero());
        Self { terms: map }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = SolenoidTerm>) -> Self {
        Self::from_pairs(terms.into_iter().map(|t| (t.character.q, t.coeff)))
    }

    pub fn terms(&self) -> impl Iterator<Item = SolenoidTerm> + '_ {
        self.terms.iter().map(|(q, c)| SolenoidTerm::new(*c, q.clone()))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Rational, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, q: &Rational) -> Complex64 {
        self.terms.get(q).copied().unwrap_or_else(zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_pairs(self.terms.iter().chain(other.terms.iter()).map(|(q, c)| (q.clone(), *c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_pairs(
            self.terms
                .iter()
                .map(|(q, c)| (q.clone(), *c))
                .chain(other.terms.iter().map(|(q, c)| (q.clone(), -c))),
        )
    }

    /// `(x, t) ↦ Φ(x + s, t)`.
    pub fn translate(&self, s: f64) -> Self {
        Self::from_pairs(self.terms.iter().map(|(q, c)| (q.clone(), c * unit(q.to_f64() * s))))
    }

    /// Lcm of the transversal denominators: `t ↦ Φ(·, t)` factors through
    /// `ℤ/mℤ` for this `m`.
    pub fn cylinder_modulus(&self) -> BigInt {
        self.terms
            .keys()
            .fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()))
    }

    /// `Φ_t(x) = Φ(x, t)` as a trig polynomial in `x`.
    pub fn leaf_restrict(&self, t: &ProfiniteInt) -> Result<LeafFunction> {
        let terms = self
            .terms
            .iter()
            .map(|(q, c)| Ok((q.clone(), c * unit(zhat_phase(&q.frac(), t)?))))
            .collect::<Result<Vec<_>>>()?;
        Ok(LeafFunction {
            t: t.clone(),
            poly: TrigPoly::from_terms(terms),
        })
    }

    /// Restriction to the base leaf `t = 0`, where every transversal phase is 1.
    pub fn base_leaf(&self) -> TrigPoly {
        TrigPoly::from_terms(self.terms.iter().map(|(q, c)| (q.clone(), *c)))
    }

    pub fn as_raw(&self) -> RawProductPoly {
        RawProductPoly::from_terms(self.terms.iter().map(|(q, c)| (SolenoidCharacter::new(q.clone()).as_product(), *c)))
    }
}

impl SolenoidFunction for SolenoidPoly {
    fn eval(&self, x: f64, t: &ProfiniteInt) -> Result<Complex64> {
        let parts = self
            .terms
            .iter()
            .map(|(q, c)| Ok(c * unit(q.to_f64() * x + zhat_phase(&q.frac(), t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(complex_sum(parts))
    }
}

impl fmt::Debug for SolenoidPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// `eval(Φ, x, t)` as a free function.
pub fn eval(phi: &SolenoidPoly, x: f64, t: &ProfiniteInt) -> Result<Complex64> {
    phi.eval(x, t)
}

pub fn leaf_restrict(phi: &SolenoidPoly, t: &ProfiniteInt) -> Result<LeafFunction> {
    phi.leaf_restrict(t)
}

/// A finite sum over arbitrary product characters, invariant or not.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawProductPoly {
    terms: BTreeMap<ProductCharacter, Complex64>,
}

impl RawProductPoly {
    pub fn from_terms(terms: impl IntoIterator<Item = (ProductCharacter, Complex64)>) -> Self {
        let mut map: BTreeMap<ProductCharacter, Complex64> = BTreeMap::new();
        for (ch, c) in terms {
            *map.entry(ch).or_insert_with(zero) += c;
        }
        map.retain(|_, c| *c != zero());
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProductCharacter, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_invariant(&self) -> bool {
        self.terms.keys().all(ProductCharacter::descends)
    }

    /// The solenoid polynomial, when every term descends.
    pub fn descend(&self) -> Result<SolenoidPoly> {
        self.terms
            .iter()
            .map(|(ch, c)| {
                ch.descend()
                    .map(|s| (s.q, *c))
                    .ok_or_else(|| Error::Domain(format!("character {ch:?} does not descend to the solenoid")))
            })
            .collect::<Result<Vec<_>>>()
            .map(SolenoidPoly::from_pairs)
    }

    pub fn cylinder_modulus(&self) -> BigInt {
        self.terms
            .keys()
            .fold(BigInt::from(1), |acc, ch| acc.lcm(ch.rho.b()))
    }

    pub fn leaf_restrict(&self, t: &ProfiniteInt) -> Result<LeafFunction> {
        let terms = self
            .terms
            .iter()
            .map(|(ch, c)| Ok((ch.lambda.clone(), c * unit(zhat_phase(&ch.rho, t)?))))
            .collect::<Result<Vec<_>>>()?;
        Ok(LeafFunction {
            t: t.clone(),
            poly: TrigPoly::from_terms(terms),
        })
    }
}

impl SolenoidFunction for RawProductPoly {
    fn eval(&self, x: f64, t: &ProfiniteInt) -> Result<Complex64> {
        let parts = self
            .terms
            .iter()
            .map(|(ch, c)| Ok(c * ch.eval(x, t)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(complex_sum(parts))
    }
}

/// The slice `x ↦ Φ(x, t)` at a fixed transversal point.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafFunction {
    pub t: ProfiniteInt,
    pub poly: TrigPoly,
}

impl LeafFunction {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.poly.eval(x)
    }
}

type TermFn = dyn Fn(usize) -> SolenoidTerm + Send + Sync;
type BoundFn = dyn Fn(usize) -> f64 + Send + Sync;

/// A uniformly convergent series `Σ_{k≥1} c_k χ_{q_k}` with a summable
/// majorant `|c_k| ≤ B_k`.
#[derive(Clone)]
pub struct LimitPeriodicSeries {
    term: Arc<TermFn>,
    majorant: Arc<BoundFn>,
    /// `Σ_{k>n} B_k`.
    tail: Arc<BoundFn>,
    len: Option<usize>,
}

impl LimitPeriodicSeries {
    /// An infinite series from a 1-based term generator, its majorant and
    /// the majorant's tail sums.
    pub fn new(
        term: impl Fn(usize) -> SolenoidTerm + Send + Sync + 'static,
        majorant: impl Fn(usize) -> f64 + Send + Sync + 'static,
        tail: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            term: Arc::new(term),
            majorant: Arc::new(majorant),
            tail: Arc::new(tail),
            len: None,
        }
    }

    /// A finite series with an explicit bound per term.
    pub fn finite(terms: Vec<SolenoidTerm>, majorant: Vec<f64>) -> Result<Self> {
        if terms.len() != majorant.len() {
            return Err(Error::Domain(format!(
                "majorant has {} entries for {} terms",
                majorant.len(),
                terms.len()
            )));
        }
        if let Some(b) = majorant.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::Domain(format!("majorant entries must be finite and non-negative, got {b}")));
        }
        let len = terms.len();
        let terms = Arc::new(terms);
        let bounds = Arc::new(majorant);
        let tails = {
            let b = Arc::clone(&bounds);
            move |n: usize| crate::exec::real_sum(b.iter().skip(n).copied())
        };
        let b = Arc::clone(&bounds);
        Ok(Self {
            term: Arc::new(move |k| terms[k - 1].clone()),
            majorant: Arc::new(move |k| b[k - 1]),
            tail: Arc::new(tails),
            len: Some(len),
        })
    }

    /// `Σ_{k≥1} 2^{−k} χ_{1/2^k}`.
    pub fn dyadic() -> Self {
        Self::new(
            |k| {
                let pow = BigInt::from(1) << k;
                SolenoidTerm::new(
                    Complex64::new(0.5f64.powi(k as i32), 0.0),
                    Rational::reduce(1, pow).expect("nonzero"),
                )
            },
            |k| 0.5f64.powi(k as i32),
            |n| 0.5f64.powi(n as i32),
        )
    }

    pub fn len(&self) -> Option<usize> {
        self.len
    }

    pub fn term(&self, k: usize) -> SolenoidTerm {
        (self.term)(k)
    }

    pub fn majorant(&self, k: usize) -> f64 {
        (self.majorant)(k)
    }

    /// `Σ_{k>n} B_k`, the sup-norm distance bound between `truncate(n)` and
    /// the limit.
    pub fn tail_bound(&self, n: usize) -> f64 {
        (self.tail)(n)
    }

    /// The first `n` terms; fails if a coefficient exceeds its majorant.
    pub fn truncate(&self, n: usize) -> Result<SolenoidPoly> {
        let n = self.len.map_or(n, |len| n.min(len));
        let mut terms = Vec::with_capacity(n);
        for k in 1..=n {
            let t = self.term(k);
            let b = self.majorant(k);
            if t.coeff.norm() > b * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "term {k} has |coeff| = {} above its majorant {b}",
                    t.coeff.norm()
                )));
            }
            terms.push(t);
        }
        Ok(SolenoidPoly::from_terms(terms))
    }
}

impl fmt::Debug for LimitPeriodicSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LimitPeriodicSeries").field("len", &self.len).finish_non_exhaustive()
    }
}

/// Deterministic sample points `(x, t)` with `x ∈ [−half_width, half_width]`
/// and `t` uniform over the top level of `tower`.
pub fn sample_points(tower: &ModulusTower, n: usize, seed: u64, half_width: f64) -> Vec<(f64, ProfiniteInt)> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.gen_range(-half_width..=half_width);
            let t = ProfiniteInt::from_top_residue(tower.clone(), rng.gen::<u128>());
            (x, t)
        })
        .collect()
}

/// `max |Φ(x + γ, t − γ) − Φ(x, t)|` over samples and shifts.
pub fn check_invariance<F: SolenoidFunction + ?Sized>(
    phi: &F,
    gammas: &[i64],
    samples: &[(f64, ProfiniteInt)],
    exec: ExecPolicy,
) -> Result<f64> {
    let per_sample = map_indexed(exec, samples.len(), |i| -> Result<f64> {
        let (x, t) = &samples[i];
        let base = phi.eval(*x, t)?;
        let mut worst: f64 = 0.0;
        for &g in gammas {
            let shifted = t.sub(&embed_i64(g, t.tower()))?;
            let moved = phi.eval(x + g as f64, &shifted)?;
            worst = worst.max((moved - base).norm());
        }
        Ok(worst)
    });
    per_sample.into_iter().try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
}

/// Result of a translation-number scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationNumbers {
    pub taus: Vec<f64>,
    /// Largest gap between consecutive accepted shifts; `None` when fewer
    /// than two were found.
    pub inclusion_length: Option<f64>,
    pub grid: SupGrid,
    pub note: Option<String>,
}

/// Grid shifts `τ = step, 2·step, … ≤ window` with `‖φ(· + τ) − φ‖∞ ≤ ε`.
///
/// The trivial shift 0 is not reported, but it anchors the gap measurement:
/// the inclusion length is the largest gap in `0, τ₁, τ₂, …`.
pub fn translation_numbers(
    phi: &TrigPoly,
    epsilon: f64,
    window: f64,
    step: f64,
    policy: GridPolicy,
    exec: ExecPolicy,
) -> Result<TranslationNumbers> {
    if !(epsilon > 0.0) || !(step > 0.0) || !(window >= 0.0) {
        return Err(Error::Domain("epsilon, step must be positive and window non-negative".into()));
    }
    let grid = phi.sup_grid(policy);
    let count = (window / step + 1e-9).floor() as usize;
    let accepted = map_indexed(exec, count, |i| {
        let tau = (i + 1) as f64 * step;
        // φ(x+τ) − φ(x) = Σ c_λ (e^{2πiλτ} − 1) e^{2πiλx}
        let diff = TrigPoly::from_terms(
            phi.terms()
                .map(|(l, c)| (l.clone(), c * (unit(l.to_f64() * tau) - 1.0))),
        );
        (diff.sup_on(&grid, ExecPolicy::Sequential) <= epsilon).then_some(tau)
    });
    let taus: Vec<f64> = accepted.into_iter().flatten().collect();
    let inclusion_length = (!taus.is_empty()).then(|| {
        std::iter::once(0.0)
            .chain(taus.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    });
    let note = taus.is_empty().then(|| format!("no τ found below {window}"));
    Ok(TranslationNumbers {
        taus,
        inclusion_length,
        grid,
        note,
    })
}

/// Sup-norm gaps `‖Φ_{t_k} − Φ_t‖∞` along the integer approximants of `t`.
pub fn transversal_continuity_probe(
    phi: &SolenoidPoly,
    t: &ProfiniteInt,
    depths: &[usize],
    policy: GridPolicy,
    exec: ExecPolicy,
) -> Result<Vec<f64>> {
    let target = phi.leaf_restrict(t)?.poly;
    depths
        .iter()
        .map(|&k| {
            let tk = t.approx_sequence(k)?;
            let approx = embed_i64(
                tk.to_i64().ok_or_else(|| Error::Domain(format!("approximant {tk} too large")))?,
                t.tower(),
            );
            let diff = phi.leaf_restrict(&approx)?.poly.sub(&target);
            Ok(diff.sup_norm(policy, exec).0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rationals::RationalAngle;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn eval_examples() {
        let tower = ModulusTower::default();
        let one = SolenoidPoly::constant(c(1.0, 0.0));
        assert_eq!(one.eval(3.3, &embed_i64(9, &tower)).unwrap(), c(1.0, 0.0));
        let chi1 = SolenoidPoly::from_pairs([(q(1, 1), c(1.0, 0.0))]);
        assert!(close(chi1.eval(0.5, &embed_i64(4, &tower)).unwrap(), c(-1.0, 0.0)));
        let half = SolenoidPoly::from_pairs([(q(1, 2), c(1.0, 0.0))]);
        assert!(close(half.eval(0.0, &embed_i64(1, &tower)).unwrap(), c(-1.0, 0.0)));
    }

    #[test]
    fn eval_propagates_precision_errors() {
        let tower = ModulusTower::lcm_tower(8).unwrap();
        let t = ProfiniteInt::from_top_residue(tower, 5);
        let phi = SolenoidPoly::from_pairs([(q(1, 17), c(1.0, 0.0))]);
        assert!(matches!(phi.eval(0.0, &t), Err(Error::Precision { .. })));
    }

    #[test]
    fn construction_prunes_and_merges() {
        let phi = SolenoidPoly::from_pairs([(q(1, 2), c(1.0, 0.0)), (q(2, 4), c(1.0, 0.0)), (q(1, 3), c(0.0, 0.0))]);
        assert_eq!(phi.len(), 1);
        assert_eq!(phi.coefficient(&q(1, 2)), c(2.0, 0.0));
    }

    #[test]
    fn invariance_examples() {
        let tower = ModulusTower::default();
        let samples = sample_points(&tower, 200, 1, 20.0);
        let gammas: Vec<i64> = (-3..=3).collect();
        let phi = SolenoidPoly::from_pairs([
            (q(3, 2), c(1.0, -0.5)),
            (q(-5, 3), c(0.25, 2.0)),
            (q(7, 12), c(-1.0, 0.0)),
            (q(0, 1), c(0.5, 0.5)),
        ]);
        assert!(check_invariance(&phi, &gammas, &samples, ExecPolicy::default()).unwrap() < 1e-10);

        let broken = RawProductPoly::from_terms([(ProductCharacter::new(q(1, 2), RationalAngle::identity()), c(1.0, 0.0))]);
        assert!(!broken.is_invariant());
        let at_origin = [(0.0, embed_i64(0, &tower))];
        let r = check_invariance(&broken, &[1], &at_origin, ExecPolicy::Sequential).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        assert!(broken.descend().is_err());

        let constant = SolenoidPoly::constant(c(2.0, 1.0));
        assert_eq!(check_invariance(&constant, &gammas, &samples, ExecPolicy::Sequential).unwrap(), 0.0);
    }

    #[test]
    fn leaf_restrict_examples() {
        let tower = ModulusTower::default();
        let zero_t = embed_i64(0, &tower);
        let phi = SolenoidPoly::from_pairs([(q(5, 3), c(1.0, 0.0))]);
        let leaf = phi.leaf_restrict(&zero_t).unwrap();
        assert_eq!(leaf.poly, TrigPoly::from_terms([(q(5, 3), c(1.0, 0.0))]));

        let half = SolenoidPoly::from_pairs([(q(1, 2), c(1.0, 0.0))]);
        let leaf = half.leaf_restrict(&embed_i64(1, &tower)).unwrap();
        assert!(close(leaf.poly.coefficient(&q(1, 2)), c(-1.0, 0.0)));

        let a = SolenoidPoly::from_pairs([(q(1, 3), c(1.0, 2.0))]);
        let b = SolenoidPoly::from_pairs([(q(-1, 4), c(0.5, 0.0)), (q(1, 3), c(1.0, 0.0))]);
        let t = ProfiniteInt::from_top_residue(tower, 4242);
        let sum = a.add(&b).leaf_restrict(&t).unwrap().poly;
        let parts = a.leaf_restrict(&t).unwrap().poly.add(&b.leaf_restrict(&t).unwrap().poly);
        for x in [-3.1, 0.0, 2.7] {
            assert!(close(sum.eval(x), parts.eval(x)));
        }
    }

    #[test]
    fn leaf_restriction_agrees_with_eval() {
        let tower = ModulusTower::default();
        let phi = SolenoidPoly::from_pairs([(q(3, 2), c(1.0, 0.0)), (q(-7, 6), c(0.0, 1.0)), (q(2, 5), c(0.3, -0.2))]);
        for (x, t) in sample_points(&tower, 300, 4, 30.0) {
            let leaf = phi.leaf_restrict(&t).unwrap();
            assert!(close(leaf.eval(x), phi.eval(x, &t).unwrap()));
        }
    }

    #[test]
    fn common_period() {
        let p = TrigPoly::from_terms([(q(1, 1), c(1.0, 0.0)), (q(1, 2), c(1.0, 0.0))]);
        assert_eq!(p.common_period(), Some(q(2, 1)));
        let p = TrigPoly::from_terms([(q(2, 3), c(1.0, 0.0)), (q(-1, 2), c(1.0, 0.0))]);
        assert_eq!(p.common_period(), Some(q(6, 1)));
        let p = TrigPoly::from_terms([(q(4, 1), c(1.0, 0.0)), (q(6, 1), c(1.0, 0.0))]);
        assert_eq!(p.common_period(), Some(q(1, 2)));
        assert_eq!(TrigPoly::constant(c(1.0, 0.0)).common_period(), None);
    }

    /// Brute-force sup of |φ(x+τ) − φ(x)| on a fine grid, independent of
    /// the symbolic difference used by `translation_numbers`.
    fn brute_sup_shift(f: impl Fn(f64) -> Complex64, tau: f64, span: f64, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let x = span * i as f64 / n as f64;
                (f(x + tau) - f(x)).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn translation_numbers_examples() {
        let policy = GridPolicy::default();
        let exec = ExecPolicy::default();
        let single = TrigPoly::from_terms([(q(1, 1), c(1.0, 0.0))]);
        let r = translation_numbers(&single, 0.1, 10.0, 1.0 / 64.0, policy, exec).unwrap();
        for n in 1..=10 {
            assert!(r.taus.iter().any(|&t| (t - n as f64).abs() < 1e-9), "missing {n}");
        }
        let l = r.inclusion_length.unwrap();
        assert!(l <= 1.0 + 1e-12 && l > 0.9, "{l}");

        let two = TrigPoly::from_terms([(q(1, 1), c(1.0, 0.0)), (q(1, 2), c(1.0, 0.0))]);
        let r = translation_numbers(&two, 0.01, 10.0, 1.0 / 64.0, policy, exec).unwrap();
        for &tau in &r.taus {
            let nearest_even = (tau / 2.0).round() * 2.0;
            assert!((tau - nearest_even).abs() < 0.01, "{tau}");
            let f = |x: f64| two.eval(x);
            assert!(brute_sup_shift(f, tau, 2.0, 4096) <= 0.01 + 1e-9);
        }
        let l = r.inclusion_length.unwrap();
        assert!((l - 2.0).abs() < 1e-9, "{l}");

        let constant = TrigPoly::constant(c(3.0, 0.0));
        let r = translation_numbers(&constant, 0.01, 5.0, 0.5, policy, exec).unwrap();
        assert_eq!(r.taus.len(), 10);
        assert_eq!(r.inclusion_length, Some(0.5));
    }

    #[test]
    fn translation_numbers_report_empty_windows() {
        let two = TrigPoly::from_terms([(q(1, 1), c(1.0, 0.0)), (q(1, 2), c(1.0, 0.0))]);
        let r = translation_numbers(&two, 1e-3, 1.9, 0.25, GridPolicy::default(), ExecPolicy::Sequential).unwrap();
        assert!(r.taus.is_empty());
        assert_eq!(r.inclusion_length, None);
        assert_eq!(r.note.as_deref(), Some("no τ found below 1.9"));
    }

    #[test]
    fn relative_density_bounded_by_common_period() {
        let phi = TrigPoly::from_terms([(q(1, 3), c(1.0, 0.0)), (q(1, 2), c(0.0, 1.0)), (q(2, 1), c(0.5, 0.0))]);
        let period = phi.common_period().unwrap().to_f64();
        assert_eq!(period, 6.0);
        let r = translation_numbers(&phi, 0.05, 30.0, 1.0 / 32.0, GridPolicy::default(), ExecPolicy::default()).unwrap();
        assert!(r.inclusion_length.unwrap() <= period + 1e-12);
    }

    #[test]
    fn continuity_probe_examples() {
        let tower = ModulusTower::default();
        let policy = GridPolicy::default();
        let exec = ExecPolicy::Sequential;
        let half = SolenoidPoly::from_pairs([(q(1, 2), c(1.0, 0.0))]);
        let gaps = transversal_continuity_probe(&half, &embed_i64(1, &tower), &[1, 2, 3, 4], policy, exec).unwrap();
        assert!((gaps[0] - 2.0).abs() < 1e-12);
        assert_eq!(&gaps[1..], &[0.0, 0.0, 0.0]);

        let constant = SolenoidPoly::constant(c(1.0, 1.0));
        let t = ProfiniteInt::from_top_residue(tower.clone(), 98765);
        assert!(transversal_continuity_probe(&constant, &t, &[1, 5, 16], policy, exec).unwrap().iter().all(|&g| g == 0.0));

        let mixed = SolenoidPoly::from_pairs([(q(1, 2), c(1.0, 0.0)), (q(4, 3), c(0.0, 1.0))]);
        let depths: Vec<usize> = (1..=16).collect();
        let gaps = transversal_continuity_probe(&mixed, &t, &depths, policy, exec).unwrap();
        for (k, g) in depths.iter().zip(&gaps) {
            let m = tower.level(*k).unwrap();
            if m % 6 == 0 {
                assert!(*g < 1e-12, "depth {k}: {g}");
            }
        }
        assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn series_truncations_are_uniformly_cauchy() {
        let s = LimitPeriodicSeries::dyadic();
        let policy = GridPolicy::default();
        for (n, m) in [(1usize, 4usize), (3, 9), (6, 12)] {
            let diff = s.truncate(m).unwrap().sub(&s.truncate(n).unwrap()).base_leaf();
            let (sup, _) = diff.sup_norm(policy, ExecPolicy::default());
            assert!(sup <= s.tail_bound(n.min(m)) + 1e-12);
        }
        assert_eq!(s.term(3).character.q, q(1, 8));
    }

    #[test]
    fn finite_series_validates_majorant() {
        let terms = vec![SolenoidTerm::new(c(1.0, 0.0), q(1, 2)), SolenoidTerm::new(c(0.5, 0.0), q(1, 4))];
        let s = LimitPeriodicSeries::finite(terms.clone(), vec![1.0, 0.5]).unwrap();
        assert_eq!(s.tail_bound(1), 0.5);
        assert_eq!(s.truncate(10).unwrap().len(), 2);
        let bad = LimitPeriodicSeries::finite(terms.clone(), vec![1.0, 0.1]).unwrap();
        assert!(bad.truncate(2).is_err());
        assert!(LimitPeriodicSeries::finite(terms, vec![1.0]).is_err());
    }
}
