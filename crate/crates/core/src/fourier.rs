//! The Bohr–Fourier transform on ℝ×Ẑ and its descent to the solenoid.
//!
//! For an invariant `Φ` the transform at `(λ, ϱ)` factors as the base-leaf
//! coefficient `Φ̂₀(χ_λ)` times the Haar average of `A_λ·χ̄_ϱ`, where the
//! transversal variation `A_λ = χ_{frac λ}` is itself a character of Ẑ.
//! Hence only `ϱ = frac λ` survives and the spectrum is indexed by `q = λ`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{eval_zhat, ProductCharacter, SolenoidCharacter};
use crate::error::{Error, Result};
use crate::exec::{complex_sum, map_indexed, real_sum, unit, ExecPolicy};
use crate::funcspace::{
    sample_points, GridPolicy, LimitPeriodicSeries, RawProductPoly, SolenoidFunction, SolenoidPoly, SupGrid,
    TrigPoly,
};
use crate::io::ComplexJson;
use crate::meanval::{mean_numeric, solenoid_mean_raw, MeanEstimate};
use crate::profinite::{character_mean, embed_i64, ModulusTower, ProfiniteInt};
use crate::quadrature::{kernel_mean, AbsSquared, FoldedSamples, Kernel, QuadratureOptions};
use crate::rationals::{Rational, RationalAngle};

/// Finite map `q ↦ Φ̂(χ_q)` with the Parseval residual `𝓜(|Φ|²) − Σ|c|²`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    entries: BTreeMap<Rational, Complex64>,
    pub residual_power: f64,
}

impl Spectrum {
    /// Fails on a repeated frequency.
    pub fn new(entries: impl IntoIterator<Item = (Rational, Complex64)>, residual_power: f64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (q, c) in entries {
            if map.insert(q.clone(), c).is_some() {
                return Err(Error::Domain(format!("frequency {q} listed twice")));
            }
        }
        Ok(Self {
            entries: map,
            residual_power,
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Rational, &Complex64)> {
        self.entries.iter()
    }

    pub fn characters(&self) -> impl Iterator<Item = SolenoidCharacter> + '_ {
        self.entries.keys().cloned().map(SolenoidCharacter::new)
    }

    pub fn coefficient(&self, q: &Rational) -> Complex64 {
        self.entries.get(q).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum_sq(&self) -> f64 {
        real_sum(self.entries.values().map(|c| c.norm_sqr()))
    }

    /// Entries in partial-sum order: `|c|` descending, then denominator,
    /// `|q|` and `q` ascending.
    pub fn ordered(&self) -> Vec<(&Rational, &Complex64)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|(qa, ca), (qb, cb)| {
            cb.norm()
                .partial_cmp(&ca.norm())
                .unwrap_or(Ordering::Equal)
                .then_with(|| qa.denom().cmp(qb.denom()))
                .then_with(|| qa.abs().cmp(&qb.abs()))
                .then_with(|| qa.cmp(qb))
        });
        v
    }

    pub fn to_poly(&self) -> SolenoidPoly {
        SolenoidPoly::from_pairs(self.entries.iter().map(|(q, c)| (q.clone(), *c)))
    }

    pub fn to_json(&self) -> SpectrumJson {
        SpectrumJson {
            entries: self
                .entries
                .iter()
                .map(|(q, c)| EntryJson {
                    q: q.clone(),
                    coeff: (*c).into(),
                })
                .collect(),
            residual_power: self.residual_power,
        }
    }

    /// Rows `q_num, q_den, coeff_re, coeff_im, abs`.
    pub fn csv_rows(&self) -> Vec<[String; 5]> {
        self.entries
            .iter()
            .map(|(q, c)| {
                [
                    q.numer().to_string(),
                    q.denom().to_string(),
                    format!("{:e}", c.re),
                    format!("{:e}", c.im),
                    format!("{:e}", c.norm()),
                ]
            })
            .collect()
    }
}

pub const SPECTRUM_CSV_HEADER: [&str; 5] = ["q_num", "q_den", "coeff_re", "coeff_im", "abs"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub q: Rational,
    pub coeff: ComplexJson,
}

/// `{"entries": [{"q", "coeff"}], "residual_power"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJson {
    pub entries: Vec<EntryJson>,
    #[serde(default)]
    pub residual_power: f64,
}

impl SpectrumJson {
    pub fn into_spectrum(self) -> Result<Spectrum> {
        Spectrum::new(
            self.entries.into_iter().map(|e| (e.q, e.coeff.into())),
            self.residual_power,
        )
    }
}

/// Coefficients indexed by characters of ℝ×Ẑ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProductSpectrum {
    pub entries: BTreeMap<ProductCharacter, Complex64>,
}

impl ProductSpectrum {
    pub fn from_entries(entries: impl IntoIterator<Item = (ProductCharacter, Complex64)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }
}

/// The transversal variation `A_λ`, realized as the character `χ_{frac λ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalFactor {
    pub lambda: Rational,
    pub character: RationalAngle,
}

impl TransversalFactor {
    pub fn new(lambda: Rational) -> Self {
        let character = lambda.frac();
        Self { lambda, character }
    }

    pub fn eval(&self, t: &ProfiniteInt) -> Result<Complex64> {
        eval_zhat(&self.character, t)
    }

    /// `exp(2πiλ·t_k)` for the depth-`k` approximant, phase reduced exactly.
    pub fn approximant(&self, t: &ProfiniteInt, depth: usize) -> Result<Complex64> {
        let tk = BigInt::from(t.approx_sequence(depth)?);
        let den = self.lambda.denom();
        let r = (self.lambda.numer() * tk).mod_floor(den);
        Ok(unit(ratio(&r, den)))
    }
}

fn ratio(n: &BigInt, d: &BigInt) -> f64 {
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if b.is_finite() => a / b,
        _ => Rational::from(num_rational::BigRational::new(n.clone(), d.clone())).to_f64(),
    }
}

/// `A_λ(t)` as the limit along `t`'s approximants, read at `depth`.
///
/// The sequence is constant from the first depth whose modulus is divisible
/// by `den(λ)`; a shallower `depth` is a precision error.
pub fn transversal_factor(lambda: &Rational, t: &ProfiniteInt, depth: usize) -> Result<Complex64> {
    let a = TransversalFactor::new(lambda.clone());
    let den = a.character.b();
    let m = t.tower().level(depth).ok_or_else(|| Error::Precision {
        modulus: den.to_string(),
        required_depth: Some(depth),
    })?;
    if !(BigInt::from(m) % den).is_zero() {
        return Err(t.tower().precision_error(den));
    }
    a.approximant(t, depth)
}

/// `Φ̂_t(χ_λ)`: the coefficient of frequency `λ` in the leaf `Φ_t`.
pub fn leaf_coefficient(phi: &RawProductPoly, t: &ProfiniteInt, lambda: &Rational) -> Result<Complex64> {
    Ok(phi.leaf_restrict(t)?.poly.coefficient(lambda))
}

/// Kernel mean of `Φ_t(x)·exp(−2πiλx)` with its a-priori bound.
pub fn leaf_coefficient_numeric(
    phi: &RawProductPoly,
    t: &ProfiniteInt,
    lambda: &Rational,
    kernel: Kernel,
    horizon: f64,
    exec: ExecPolicy,
) -> Result<MeanEstimate> {
    mean_numeric(&phi.leaf_restrict(t)?.poly.modulate(lambda), kernel, horizon, exec)
}

/// `|Φ̂_t(χ_λ) − A_λ(t)·Φ̂₀(χ_λ)|`.
pub fn leaf_transversal_residual(phi: &RawProductPoly, t: &ProfiniteInt, lambda: &Rational) -> Result<f64> {
    let zero = embed_i64(0, t.tower());
    let base = leaf_coefficient(phi, &zero, lambda)?;
    let a = TransversalFactor::new(lambda.clone()).eval(t)?;
    Ok((leaf_coefficient(phi, t, lambda)? - a * base).norm())
}

/// `Φ̂(χ_{λ,ϱ}) = ∫_Ẑ M(Φ_t·χ̄_λ)·χ̄_ϱ(t) dt`, exactly.
///
/// The leaf mean keeps the terms with frequency `λ`, each a character
/// `χ_{ϱ_k}` of `t`; the Haar average of `χ_{ϱ_k − ϱ}` is 1 or 0 by exact
/// phase accounting.
pub fn transform_raw(phi: &RawProductPoly, c: &ProductCharacter) -> Result<Complex64> {
    let mut parts = Vec::new();
    for (ch, coeff) in phi.terms().filter(|(ch, _)| ch.lambda == c.lambda) {
        let haar = character_mean(&ch.rho.sub(&c.rho))?;
        if !haar.exact.is_zero() {
            parts.push(coeff * haar.exact.to_f64());
        }
    }
    Ok(complex_sum(parts))
}

pub fn transform(phi: &SolenoidPoly, c: &ProductCharacter) -> Complex64 {
    transform_raw(&phi.as_raw(), c).expect("exact phase accounting on reduced angles")
}

/// `Φ̂₀(χ_λ)·∫ A_λ·χ̄_ϱ`, the factorized form of [`transform`].
pub fn transform_factorized(phi: &SolenoidPoly, c: &ProductCharacter) -> Result<Complex64> {
    let zero = embed_i64(0, &ModulusTower::default());
    let base = leaf_coefficient(&phi.as_raw(), &zero, &c.lambda)?;
    let haar = character_mean(&c.lambda.frac().sub(&c.rho))?;
    Ok(base * haar.value)
}

/// Numeric transform: Haar averages by cylinder enumeration, then a kernel
/// mean over the leaf variable.
pub fn transform_numeric(
    phi: &RawProductPoly,
    c: &ProductCharacter,
    kernel: Kernel,
    horizon: f64,
    exec: ExecPolicy,
) -> Result<MeanEstimate> {
    let averaged = phi
        .terms()
        .map(|(ch, coeff)| Ok((ch.lambda.clone(), coeff * character_mean(&ch.rho.sub(&c.rho))?.value)))
        .collect::<Result<Vec<_>>>()?;
    mean_numeric(&TrigPoly::from_terms(averaged).modulate(&c.lambda), kernel, horizon, exec)
}

/// Transform at every support character of a raw polynomial, zeros dropped.
pub fn product_spectrum(phi: &RawProductPoly) -> Result<ProductSpectrum> {
    let entries = phi
        .terms()
        .map(|(ch, _)| Ok((ch.clone(), transform_raw(phi, ch)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductSpectrum::from_entries(entries.into_iter().filter(|(_, c)| *c != Complex64::zero())))
}

/// Re-index `(λ, frac λ)` as `q = λ`.
pub fn descend_spectrum(spec: &ProductSpectrum) -> Result<Spectrum> {
    let entries = spec
        .entries
        .iter()
        .map(|(ch, c)| {
            ch.descend()
                .map(|s| (s.q, *c))
                .ok_or_else(|| Error::Domain(format!("{ch:?} does not descend; the function is not ℤ-invariant")))
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(entries, 0.0)
}

/// `{a/b : b ≤ max_den, |a/b| ≤ max_abs}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FareyGrid {
    pub max_den: usize,
    pub max_abs: Rational,
}

impl FareyGrid {
    pub fn new(max_den: usize, max_abs: Rational) -> Self {
        Self { max_den, max_abs }
    }

    /// Points in ascending order.
    pub fn points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        for b in 1..=self.max_den as i64 {
            let bound = (self.max_abs.as_big() * num_rational::BigRational::from_integer(b.into())).floor();
            let amax = bound.to_integer().to_i64().unwrap_or(i64::MAX);
            for a in -amax..=amax {
                if a.gcd(&b) == 1 || (a == 0 && b == 1) {
                    out.push(Rational::new(a, b));
                }
            }
        }
        out.sort();
        out
    }

    /// Smallest gap between distinct grid points.
    pub fn min_gap(&self) -> f64 {
        match self.max_den {
            0 | 1 => 1.0,
            b => 1.0 / (b * (b - 1)) as f64,
        }
    }
}

/// Where a symbolic spectrum scan looks.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidates {
    Terms,
    Explicit(Vec<Rational>),
    Farey(FareyGrid),
}

/// Spectrum of a symbolic polynomial over `candidates`. With
/// [`Candidates::Terms`] this is the term map; otherwise missed terms show
/// up as positive `residual_power`.
pub fn spectrum(phi: &SolenoidPoly, candidates: &Candidates) -> Spectrum {
    let qs: Vec<Rational> = match candidates {
        Candidates::Terms => phi.pairs().map(|(q, _)| q.clone()).collect(),
        Candidates::Explicit(v) => v.clone(),
        Candidates::Farey(g) => g.points(),
    };
    let mut entries = BTreeMap::new();
    for q in qs {
        let c = transform(phi, &SolenoidCharacter::new(q.clone()).as_product());
        if c != Complex64::zero() {
            entries.insert(q, c);
        }
    }
    let sum_sq = real_sum(entries.values().map(|c: &Complex64| c.norm_sqr()));
    Spectrum {
        entries,
        residual_power: mean_abs_squared(phi) - sum_sq,
    }
}

/// `𝓜(|Φ|²)` from the symbolic expansion over ℝ×Ẑ.
pub fn mean_abs_squared(phi: &SolenoidPoly) -> f64 {
    mean_abs_squared_raw(&phi.as_raw()).expect("small denominators")
}

pub fn mean_abs_squared_raw(phi: &RawProductPoly) -> Result<f64> {
    let expanded = RawProductPoly::from_terms(phi.terms().flat_map(|(cj, aj)| {
        phi.terms().map(move |(ck, ak)| {
            (
                ProductCharacter::new(&cj.lambda - &ck.lambda, cj.rho.sub(&ck.rho)),
                aj * ak.conj(),
            )
        })
    }));
    Ok(solenoid_mean_raw(&expanded)?.value.re)
}

/// Settings for detecting a spectrum from samples of a leaf function.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackBoxOptions {
    pub grid: FareyGrid,
    pub kernel: Kernel,
    pub horizon: f64,
    pub threshold_factor: f64,
    pub exec: ExecPolicy,
}

/// A detected spectrum with its detection diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackBoxSpectrum {
    pub spectrum: Spectrum,
    pub threshold: f64,
    /// Kernel bound at the grid's minimal gap, scaled by the sampled sup.
    pub error_bound: f64,
    /// Largest rejected candidate, if any came within a factor 10 of the
    /// threshold.
    pub near_miss: Option<(Rational, f64)>,
    pub nodes: usize,
}

/// Coefficients of a sampled leaf function over a Farey grid.
///
/// Every candidate `λ` gets the kernel mean of `f·χ̄_λ`; entries above
/// `threshold_factor × sup|f| × bound(ν_min, T)` are kept. `residual_power`
/// is the kernel mean of `|f|²` minus the kept power.
pub fn spectrum_blackbox<F>(f: F, opts: &BlackBoxOptions) -> Result<BlackBoxSpectrum>
where
    F: Fn(f64) -> Complex64 + Sync + Send,
{
    let band = 2.0 * opts.grid.max_abs.to_f64().max(0.5);
    let qopts = QuadratureOptions::new(band).with_policy(opts.exec);
    let folded = FoldedSamples::sample(&f, opts.kernel, opts.horizon, opts.grid.max_den.max(1), qopts)?;
    let error_bound = folded.sup_abs() * opts.kernel.pure_frequency_bound(opts.grid.min_gap(), opts.horizon);
    let threshold = opts.threshold_factor * error_bound;
    let points = opts.grid.points();
    let coeffs = map_indexed(opts.exec, points.len(), |i| {
        let q = &points[i];
        let num = q.numer().to_i64().ok_or_else(|| Error::Domain(format!("candidate {q} too large")))?;
        let den = q.denom().to_usize().expect("den ≤ max_den");
        folded.coefficient(num, den)
    });
    let mut kept = Vec::new();
    let mut near_miss: Option<(Rational, f64)> = None;
    for (q, c) in points.into_iter().zip(coeffs) {
        let c = c?;
        if c.norm() > threshold {
            kept.push((q, c));
        } else if c.norm() * 10.0 > threshold && near_miss.as_ref().map_or(true, |(_, m)| c.norm() > *m) {
            near_miss = Some((q, c.norm()));
        }
    }
    let power = folded.mean_abs_squared();
    let kept_power = real_sum(kept.iter().map(|(_, c)| c.norm_sqr()));
    Ok(BlackBoxSpectrum {
        spectrum: Spectrum::new(kept, power - kept_power)?,
        threshold,
        error_bound,
        near_miss,
        nodes: folded.node_count(),
    })
}

/// `(Σ|Φ̂|², 𝓜(|Φ|²), gap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub sum_sq: f64,
    pub mean_sq: f64,
    pub gap: f64,
}

impl ParsevalReport {
    fn new(sum_sq: f64, mean_sq: f64) -> Self {
        Self {
            sum_sq,
            mean_sq,
            gap: (sum_sq - mean_sq).abs(),
        }
    }
}

/// Exact path: transforms over the term set against the symbolic mean of
/// the expanded `|Φ|²`.
pub fn parseval_check(phi: &SolenoidPoly) -> ParsevalReport {
    let sum_sq = real_sum(
        phi.pairs()
            .map(|(q, _)| transform(phi, &SolenoidCharacter::new(q.clone()).as_product()).norm_sqr()),
    );
    ParsevalReport::new(sum_sq, mean_abs_squared(phi))
}

/// Numeric path: numeric transforms, and a kernel mean of `|Φ₀|²` on the
/// base leaf.
pub fn parseval_check_numeric(phi: &SolenoidPoly, kernel: Kernel, horizon: f64, exec: ExecPolicy) -> Result<ParsevalReport> {
    let raw = phi.as_raw();
    let coeffs = phi
        .pairs()
        .map(|(q, _)| {
            let c = SolenoidCharacter::new(q.clone()).as_product();
            Ok(transform_numeric(&raw, &c, kernel, horizon, exec)?.value.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;
    let leaf = phi.base_leaf();
    let opts = QuadratureOptions::new(2.0 * leaf.band()).with_policy(exec);
    let mean_sq = kernel_mean(&AbsSquared(leaf.to_integrand()), kernel, horizon, opts)?.re;
    Ok(ParsevalReport::new(real_sum(coeffs), mean_sq))
}

/// Outcome of a uniqueness comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub spectra_equal: bool,
    pub sampled_gap: f64,
    pub equal: bool,
}

pub const UNIQUENESS_SAMPLES: usize = 1000;

/// Compares spectra and sampled values of `Φ` and `Ψ`; the two verdicts
/// must agree, otherwise a domain error is returned.
pub fn uniqueness_check(phi: &SolenoidPoly, psi: &SolenoidPoly, tower: &ModulusTower, exec: ExecPolicy) -> Result<UniquenessReport> {
    let a = spectrum(phi, &Candidates::Terms);
    let b = spectrum(psi, &Candidates::Terms);
    let support: std::collections::BTreeSet<&Rational> = a.entries.keys().chain(b.entries.keys()).collect();
    let spectra_equal = a.entries.keys().eq(b.entries.keys())
        && support.iter().all(|q| (a.coefficient(q) - b.coefficient(q)).norm() <= 1e-12);

    let samples = sample_points(tower, UNIQUENESS_SAMPLES, 0x5eed, 100.0);
    let diff = phi.sub(psi);
    let gaps = map_indexed(exec, samples.len(), |i| diff.eval(samples[i].0, &samples[i].1).map(|z| z.norm()));
    let sampled_gap = gaps.into_iter().try_fold(0.0, |m: f64, g| g.map(|g| m.max(g)))?;
    let values_equal = sampled_gap < 1e-10;
    if spectra_equal != values_equal {
        return Err(Error::Domain(format!(
            "uniqueness violated: spectra_equal = {spectra_equal}, sampled gap = {sampled_gap:e}"
        )));
    }
    Ok(UniquenessReport {
        spectra_equal,
        sampled_gap,
        equal: spectra_equal,
    })
}

/// The `n` leading terms of `spec` in [`Spectrum::ordered`] order.
pub fn partial_sum(spec: &Spectrum, n: usize) -> SolenoidPoly {
    SolenoidPoly::from_pairs(spec.ordered().into_iter().take(n).map(|(q, c)| (q.clone(), *c)))
}

/// One row of an approximation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRow {
    pub n: usize,
    pub sup_error: f64,
    pub majorant_bound: Option<f64>,
}

/// Approximation table with the grid it was measured on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub rows: Vec<ApproxRow>,
    pub grid: SupGrid,
    /// Tail bound of the reference truncation, for series input.
    pub reference_tail: Option<f64>,
}

impl ApproxReport {
    pub fn non_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].n < w[0].n || w[1].sup_error <= w[0].sup_error + 1e-12)
    }
}

/// `‖Φ − s_N‖` on the base-leaf grid of `Φ` for each `N`.
pub fn approx_report(phi: &SolenoidPoly, n_list: &[usize], policy: GridPolicy, exec: ExecPolicy) -> ApproxReport {
    let spec = spectrum(phi, &Candidates::Terms);
    let leaf = phi.base_leaf();
    let grid = leaf.sup_grid(policy);
    let rows = n_list
        .iter()
        .map(|&n| ApproxRow {
            n,
            sup_error: leaf.sub(&partial_sum(&spec, n).base_leaf()).sup_on(&grid, exec),
            majorant_bound: None,
        })
        .collect();
    ApproxReport {
        rows,
        grid,
        reference_tail: None,
    }
}

/// Series version: `Φ` is replaced by its truncation at `reference` terms
/// and each row carries `Σ_{k>N} B_k`.
pub fn approx_report_series(
    series: &LimitPeriodicSeries,
    n_list: &[usize],
    reference: usize,
    policy: GridPolicy,
    exec: ExecPolicy,
) -> Result<ApproxReport> {
    let reference = match series.len() {
        Some(len) => reference.min(len),
        None => reference,
    };
    let phi = series.truncate(reference)?;
    let mut report = approx_report(&phi, n_list, policy, exec);
    for row in &mut report.rows {
        row.majorant_bound = Some(series.tail_bound(row.n));
    }
    report.reference_tail = Some(series.tail_bound(reference));
    Ok(report)
}

/// Default reference length for series tables: `max N + 50`.
pub fn default_reference(n_list: &[usize]) -> usize {
    n_list.iter().copied().max().unwrap_or(0) + 50
}
