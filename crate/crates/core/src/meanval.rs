//! Mean values on ℝ and on ℝ×Ẑ.
//!
//! Symbolic inputs get exact means (constant-term extraction, exact Haar
//! accounting). Numeric means use the Gauss–Legendre engine in
//! [`crate::quadrature`] with either a plain window or a Cesàro double
//! average; the latter trades the `O(1/T)` tail of the window for `O(1/T²)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::zhat_phase;
use crate::error::{Error, Result};
use crate::exec::{complex_sum, unit, ExecPolicy};
use crate::funcspace::{LimitPeriodicSeries, RawProductPoly, SolenoidPoly, TrigPoly};
use crate::profinite::{character_mean, haar_average, ModulusTower, ProfiniteInt};
use crate::quadrature::{kernel_mean, Kernel, Pointwise, QuadratureOptions};

/// Geometric horizon schedule used for convergence reporting.
pub const HORIZON_SCHEDULE: [f64; 3] = [1e2, 1e3, 1e4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Exact,
    Window,
    Cesaro,
}

impl From<Kernel> for Scheme {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Window => Scheme::Window,
            Kernel::Cesaro => Scheme::Cesaro,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Exact => "exact",
            Scheme::Window => "window",
            Scheme::Cesaro => "cesaro",
        })
    }
}

/// A mean value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub value: Complex64,
    pub scheme: Scheme,
    pub horizon: Option<f64>,
    pub error_bound: Option<f64>,
}

impl MeanEstimate {
    pub fn exact(value: Complex64) -> Self {
        Self {
            value,
            scheme: Scheme::Exact,
            horizon: None,
            error_bound: Some(0.0),
        }
    }

    /// Report row: scheme, T, value re, value im, error bound.
    pub fn csv_row(&self) -> [String; 5] {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        [
            self.scheme.to_string(),
            opt(self.horizon),
            format!("{:e}", self.value.re),
            format!("{:e}", self.value.im),
            opt(self.error_bound),
        ]
    }
}

pub const CSV_HEADER: [&str; 5] = ["scheme", "T", "value_re", "value_im", "error_bound"];

/// `M(φ)` for a trig polynomial: its constant term.
pub fn mean_exact(phi: &TrigPoly) -> MeanEstimate {
    MeanEstimate::exact(phi.constant_term())
}

/// `(1/T)∫₀^T f` for a black-box `f`. `opts.band` sizes the panels.
pub fn mean_window<F>(f: F, horizon: f64, opts: QuadratureOptions) -> Result<MeanEstimate>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let value = kernel_mean(&Pointwise(f), Kernel::Window, horizon, opts)?;
    Ok(MeanEstimate {
        value,
        scheme: Scheme::Window,
        horizon: Some(horizon),
        error_bound: None,
    })
}

/// Cesàro double average of a black-box `f` over `[0, T]`.
pub fn mean_cesaro<F>(f: F, horizon: f64, opts: QuadratureOptions) -> Result<MeanEstimate>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let value = kernel_mean(&Pointwise(f), Kernel::Cesaro, horizon, opts)?;
    Ok(MeanEstimate {
        value,
        scheme: Scheme::Cesaro,
        horizon: Some(horizon),
        error_bound: None,
    })
}

/// A-priori distance between a kernel mean and the true mean of `phi`:
/// `Σ_{λ≠0} |c_λ|·bound(λ, T)`.
pub fn kernel_error_bound(phi: &TrigPoly, kernel: Kernel, horizon: f64) -> f64 {
    crate::exec::real_sum(
        phi.terms()
            .filter(|(l, _)| !l.is_zero())
            .map(|(l, c)| c.norm() * kernel.pure_frequency_bound(l.to_f64(), horizon)),
    )
}

/// Numeric mean of a symbolic trig polynomial, with its a-priori bound.
pub fn mean_numeric(phi: &TrigPoly, kernel: Kernel, horizon: f64, exec: ExecPolicy) -> Result<MeanEstimate> {
    let opts = QuadratureOptions::new(phi.band()).with_policy(exec);
    let value = kernel_mean(&phi.to_integrand(), kernel, horizon, opts)?;
    Ok(MeanEstimate {
        value,
        scheme: kernel.into(),
        horizon: Some(horizon),
        error_bound: Some(kernel_error_bound(phi, kernel, horizon)),
    })
}

/// `𝓜(Φ)` for a (possibly non-invariant) product polynomial.
///
/// The leaf mean `t ↦ M(Φ_t)` keeps exactly the terms with `λ = 0`, giving
/// the cylinder function `Σ c·χ_ϱ(t)`; its Haar average is taken with exact
/// phase accounting.
pub fn solenoid_mean_raw(phi: &RawProductPoly) -> Result<MeanEstimate> {
    let mut parts = Vec::new();
    for (ch, c) in phi.terms().filter(|(ch, _)| ch.lambda.is_zero()) {
        let haar = character_mean(&ch.rho)?;
        if !haar.exact.is_zero() {
            parts.push(c * haar.exact.to_f64());
        }
    }
    Ok(MeanEstimate::exact(complex_sum(parts)))
}

pub fn solenoid_mean(phi: &SolenoidPoly) -> MeanEstimate {
    solenoid_mean_raw(&phi.as_raw()).expect("solenoid characters have small denominators or are trivial")
}

/// `𝓜(Φ)` by explicit cylinder enumeration: the Haar average over
/// `t ∈ ℤ/mℤ` of the exact leaf means, `m` the cylinder modulus of `Φ`.
pub fn solenoid_mean_enumerated(phi: &SolenoidPoly, tower: &ModulusTower, exec: ExecPolicy) -> Result<MeanEstimate> {
    let m = phi.cylinder_modulus();
    let m = num_traits::ToPrimitive::to_u128(&m)
        .ok_or_else(|| Error::Domain(format!("cylinder modulus {m} too large")))?;
    let value = haar_average(m, tower, exec, |t| {
        phi.leaf_restrict(t)
            .map(|leaf| leaf.poly.constant_term())
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    })?;
    Ok(MeanEstimate {
        value,
        scheme: Scheme::Exact,
        horizon: None,
        error_bound: None,
    })
}

/// `max_t |M(Φ_t) − 𝓜(Φ)|` with exact leaf means.
pub fn mean_comparison_check(phi: &SolenoidPoly, t_samples: &[ProfiniteInt]) -> Result<f64> {
    let total = solenoid_mean(phi).value;
    t_samples.iter().try_fold(0.0, |worst: f64, t| {
        let leaf = mean_exact(&phi.leaf_restrict(t)?.poly).value;
        Ok(worst.max((leaf - total).norm()))
    })
}

/// Residuals of additivity and translation invariance of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearityTranslation {
    pub additivity: f64,
    pub translation: f64,
}

/// `|𝓜(Φ+Ψ) − 𝓜Φ − 𝓜Ψ|` and `|𝓜(Φ∘R_s) − 𝓜Φ|` on the symbolic path.
pub fn mean_linearity_translation_check(phi: &SolenoidPoly, psi: &SolenoidPoly, s: f64) -> LinearityTranslation {
    let m = |p: &SolenoidPoly| solenoid_mean(p).value;
    LinearityTranslation {
        additivity: (m(&phi.add(psi)) - m(phi) - m(psi)).norm(),
        translation: (m(&phi.translate(s)) - m(phi)).norm(),
    }
}

/// Numeric counterpart on the base leaf, with kernel means at horizon `T`.
pub fn mean_linearity_translation_check_numeric(
    phi: &SolenoidPoly,
    psi: &SolenoidPoly,
    s: f64,
    kernel: Kernel,
    horizon: f64,
    exec: ExecPolicy,
) -> Result<LinearityTranslation> {
    let m = |p: &SolenoidPoly| mean_numeric(&p.base_leaf(), kernel, horizon, exec).map(|e| e.value);
    let base = m(phi)?;
    Ok(LinearityTranslation {
        additivity: (m(&phi.add(psi))? - base - m(psi)?).norm(),
        translation: (m(&phi.translate(s))? - base).norm(),
    })
}

/// `(|𝓜(s_N) − 𝓜(s_M)|, Σ_{k>N} B_k)` for truncations `N < M` of a series.
pub fn series_mean_tail_check(series: &LimitPeriodicSeries, n: usize, m: usize) -> Result<(f64, f64)> {
    let a = solenoid_mean(&series.truncate(n)?).value;
    let b = solenoid_mean(&series.truncate(m)?).value;
    Ok(((a - b).norm(), series.tail_bound(n.min(m))))
}

/// Window means of `f` along `schedule`.
pub fn convergence_table<F>(f: F, band: f64, kernel: Kernel, schedule: &[f64], exec: ExecPolicy) -> Result<Vec<MeanEstimate>>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let opts = QuadratureOptions::new(band).with_policy(exec);
    let pw = Pointwise(f);
    schedule
        .iter()
        .map(|&t| {
            Ok(MeanEstimate {
                value: kernel_mean(&pw, kernel, t, opts)?,
                scheme: kernel.into(),
                horizon: Some(t),
                error_bound: None,
            })
        })
        .collect()
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.log10(), y.log10())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `Φ(x, t)` for `t` a fixed transversal point, as a black box.
pub fn leaf_callable<'a>(phi: &'a SolenoidPoly, t: &'a ProfiniteInt) -> Result<impl Fn(f64) -> Complex64 + Sync + 'a> {
    let phases = phi
        .pairs()
        .map(|(q, c)| Ok((q.to_f64(), c * unit(zhat_phase(&q.frac(), t)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(move |x: f64| complex_sum(phases.iter().map(|(f, c)| c * unit(f * x))))
}
