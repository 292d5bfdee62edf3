//! Composite Gauss–Legendre quadrature for windowed means on `[0, T]`.
//!
//! Panels have length `h = 1/k` with `k = max(1, ⌈band⌉)`, so a panel never
//! exceeds the smallest period of an integrand band-limited to `band`, and
//! every panel carries [`NODES_PER_PANEL`] nodes. Panel starts are multiples
//! of `h` counted from the segment start, which makes the node set invariant
//! under integer shifts whenever segments start at integers.
//!
//! Panels are grouped into fixed-size chunks; chunks may run in parallel and
//! are reduced in index order with compensated summation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{complex_sum, map_indexed, unit, CompensatedSum, ComplexSum, ExecPolicy};

pub const NODES_PER_PANEL: usize = 32;
const PANELS_PER_CHUNK: usize = 256;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Averaging kernel on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `(1/T)∫₀^T f`.
    Window,
    /// Double average `(2/T)²∫₀^{T/2}∫₀^{T/2} f(x+y)`, i.e. a tent weight
    /// peaking at `T/2`.
    Cesaro,
}

impl Kernel {
    /// Upper bound for the kernel mean of `exp(2πiνx)`, `ν ≠ 0`.
    pub fn pure_frequency_bound(self, nu: f64, horizon: f64) -> f64 {
        let x = std::f64::consts::PI * nu.abs() * horizon;
        match self {
            Kernel::Window => 1.0 / x,
            Kernel::Cesaro => (2.0 / x).powi(2),
        }
    }

    fn segments(self, horizon: f64) -> Vec<(f64, f64)> {
        match self {
            Kernel::Window => vec![(0.0, horizon)],
            Kernel::Cesaro => vec![(0.0, horizon / 2.0), (horizon / 2.0, horizon)],
        }
    }

    fn weight(self, x: f64, horizon: f64) -> f64 {
        match self {
            Kernel::Window => 1.0 / horizon,
            Kernel::Cesaro => {
                let half = horizon / 2.0;
                (half - (x - half).abs()).max(0.0) / (half * half)
            }
        }
    }
}

/// Node layout and execution settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Largest |frequency| present in the integrand.
    pub band: f64,
    pub policy: ExecPolicy,
}

impl QuadratureOptions {
    pub fn new(band: f64) -> Self {
        Self {
            band,
            policy: ExecPolicy::default(),
        }
    }

    pub fn with_policy(mut self, policy: ExecPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Panels per unit length.
    pub fn panels_per_unit(&self) -> usize {
        if self.band.is_finite() && self.band > 1.0 {
            self.band.ceil() as usize
        } else {
            1
        }
    }
}

/// A panel rule: offsets from the panel start and weights, already scaled
/// to the panel length.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub length: f64,
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(length: f64) -> Self {
        let (nodes, weights) = gauss_legendre(NODES_PER_PANEL);
        let half = length / 2.0;
        Self {
            length,
            offsets: nodes.iter().map(|z| half * (z + 1.0)).collect(),
            weights: weights.iter().map(|w| half * w).collect(),
        }
    }
}

/// An integrand evaluated one panel at a time.
pub trait PanelIntegrand: Sync {
    type Prepared<'a>: PanelEval
    where
        Self: 'a;

    /// Precomputes whatever depends only on the node offsets.
    fn prepare<'a>(&'a self, offsets: &'a [f64]) -> Self::Prepared<'a>;
}

pub trait PanelEval: Sync {
    /// Writes `f(start + offsets[j])` into `out[j]`.
    fn eval(&self, start: f64, out: &mut [Complex64]);
}

/// Adapter for black-box callables.
pub struct Pointwise<F>(pub F);

pub struct PointwisePanel<'a, F> {
    f: &'a F,
    offsets: &'a [f64],
}

impl<F: Fn(f64) -> Complex64 + Sync> PanelIntegrand for Pointwise<F> {
    type Prepared<'a>
        = PointwisePanel<'a, F>
    where
        F: 'a;

    fn prepare<'a>(&'a self, offsets: &'a [f64]) -> PointwisePanel<'a, F> {
        PointwisePanel { f: &self.0, offsets }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> PanelEval for PointwisePanel<'_, F> {
    fn eval(&self, start: f64, out: &mut [Complex64]) {
        for (o, &dx) in out.iter_mut().zip(self.offsets) {
            *o = (self.f)(start + dx);
        }
    }
}

/// `Σ c_k exp(2πiν_k x)` with frequencies as floats.
///
/// Per panel, each term costs one `sin_cos` for the panel start; node phases
/// come from a table built once per rule.
#[derive(Debug, Clone, Default)]
pub struct TrigIntegrand {
    pub freqs: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl TrigIntegrand {
    pub fn new(terms: impl IntoIterator<Item = (f64, Complex64)>) -> Self {
        let (freqs, coeffs) = terms.into_iter().unzip();
        Self { freqs, coeffs }
    }

    pub fn band(&self) -> f64 {
        self.freqs.iter().fold(0.0, |m, f| m.max(f.abs()))
    }
}

pub struct TrigPanel<'a> {
    src: &'a TrigIntegrand,
    /// `table[k * n + j] = exp(2πiν_k·offset_j)`.
    table: Vec<Complex64>,
    nodes: usize,
}

impl PanelIntegrand for TrigIntegrand {
    type Prepared<'a> = TrigPanel<'a>;

    fn prepare<'a>(&'a self, offsets: &'a [f64]) -> TrigPanel<'a> {
        let table = self
            .freqs
            .iter()
            .flat_map(|&nu| offsets.iter().map(move |&dx| unit(nu * dx)))
            .collect();
        TrigPanel {
            src: self,
            table,
            nodes: offsets.len(),
        }
    }
}

impl PanelEval for TrigPanel<'_> {
    fn eval(&self, start: f64, out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (k, (&nu, &c)) in self.src.freqs.iter().zip(&self.src.coeffs).enumerate() {
            let base = c * unit(nu * start);
            let row = &self.table[k * self.nodes..(k + 1) * self.nodes];
            for (o, &p) in out.iter_mut().zip(row) {
                *o += base * p;
            }
        }
    }
}

/// `|g|²` for an inner integrand `g`.
pub struct AbsSquared<I>(pub I);

pub struct AbsSquaredPanel<P>(P);

impl<I: PanelIntegrand> PanelIntegrand for AbsSquared<I> {
    type Prepared<'a>
        = AbsSquaredPanel<I::Prepared<'a>>
    where
        I: 'a;

    fn prepare<'a>(&'a self, offsets: &'a [f64]) -> Self::Prepared<'a> {
        AbsSquaredPanel(self.0.prepare(offsets))
    }
}

impl<P: PanelEval> PanelEval for AbsSquaredPanel<P> {
    fn eval(&self, start: f64, out: &mut [Complex64]) {
        self.0.eval(start, out);
        out.iter_mut()
            .for_each(|z| *z = Complex64::new(z.norm_sqr(), 0.0));
    }
}

struct Segment {
    start: f64,
    full_panels: usize,
    tail: f64,
}

fn layout(a: f64, b: f64, h: f64) -> Segment {
    let len = b - a;
    let mut full = (len / h).floor() as usize;
    let mut tail = len - full as f64 * h;
    if tail < 1e-12 * h.max(1.0) {
        tail = 0.0;
    } else if h - tail < 1e-12 * h.max(1.0) {
        full += 1;
        tail = 0.0;
    }
    Segment {
        start: a,
        full_panels: full,
        tail,
    }
}

fn check_finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Numeric("non-finite integrand sample".into()))
    }
}

/// Kernel-weighted mean of `f` over `[0, horizon]`.
pub fn kernel_mean<I: PanelIntegrand>(
    integrand: &I,
    kernel: Kernel,
    horizon: f64,
    opts: QuadratureOptions,
) -> Result<Complex64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let h = 1.0 / opts.panels_per_unit() as f64;
    let rule = PanelRule::new(h);
    let prepared = integrand.prepare(&rule.offsets);
    let mut total = ComplexSum::new();

    for (a, b) in kernel.segments(horizon) {
        let seg = layout(a, b, h);
        let chunks = seg.full_panels.div_ceil(PANELS_PER_CHUNK);
        let partials = map_indexed(opts.policy, chunks, |c| {
            let mut buf = [Complex64::new(0.0, 0.0); NODES_PER_PANEL];
            let mut acc = ComplexSum::new();
            let lo = c * PANELS_PER_CHUNK;
            let hi = (lo + PANELS_PER_CHUNK).min(seg.full_panels);
            for p in lo..hi {
                let start = seg.start + p as f64 * h;
                prepared.eval(start, &mut buf);
                for ((v, &dx), &w) in buf.iter().zip(&rule.offsets).zip(&rule.weights) {
                    acc.add(*v * (w * kernel.weight(start + dx, horizon)));
                }
            }
            check_finite(acc.value())
        });
        for p in partials {
            total.add(p?);
        }
        if seg.tail > 0.0 {
            let tail_rule = PanelRule::new(seg.tail);
            let tail_prepared = integrand.prepare(&tail_rule.offsets);
            let start = seg.start + seg.full_panels as f64 * h;
            let mut buf = [Complex64::new(0.0, 0.0); NODES_PER_PANEL];
            tail_prepared.eval(start, &mut buf);
            let mut acc = ComplexSum::new();
            for ((v, &dx), &w) in buf.iter().zip(&tail_rule.offsets).zip(&tail_rule.weights) {
                acc.add(*v * (w * kernel.weight(start + dx, horizon)));
            }
            total.add(check_finite(acc.value())?);
        }
    }
    check_finite(total.value())
}

/// Kernel-weighted samples of a black box, folded modulo each integer
/// period `b = 1..=max_period`.
///
/// For any `λ` with `λ·b ∈ ℤ`, `exp(−2πiλx)` depends only on `x mod b`, so
/// the kernel mean of `f(x)·exp(−2πiλx)` equals a short sum over one folded
/// period. One pass over the samples then serves every candidate frequency.
pub struct FoldedSamples {
    rule: PanelRule,
    panels_per_unit: usize,
    /// `folds[b-1][p * NODES_PER_PANEL + j]` for panel position `p < b·k`.
    folds: Vec<Vec<Complex64>>,
    sup_abs: f64,
    horizon: f64,
    kernel: Kernel,
    power: f64,
}

impl FoldedSamples {
    /// Requires `horizon/2` to be an integer so that every segment starts on
    /// the integer lattice.
    pub fn sample<F>(
        f: F,
        kernel: Kernel,
        horizon: f64,
        max_period: usize,
        opts: QuadratureOptions,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Sync + Send,
    {
        if !(horizon > 0.0) || (horizon / 2.0).fract() != 0.0 {
            return Err(Error::Domain(format!(
                "folded sampling needs an even integer horizon, got {horizon}"
            )));
        }
        if max_period == 0 {
            return Err(Error::Domain("max_period must be at least 1".into()));
        }
        let k = opts.panels_per_unit();
        let h = 1.0 / k as f64;
        let rule = PanelRule::new(h);
        let total_panels = (horizon as usize) * k;
        let chunks = total_panels.div_ceil(PANELS_PER_CHUNK);
        let mut folds: Vec<Vec<ComplexSum>> = (1..=max_period)
            .map(|b| vec![ComplexSum::new(); b * k * NODES_PER_PANEL])
            .collect();
        let mut sup_abs: f64 = 0.0;
        let mut power = CompensatedSum::new();

        // Sample in parallel chunks, fold sequentially in panel order.
        const CHUNKS_PER_BATCH: usize = 64;
        for batch_start in (0..chunks).step_by(CHUNKS_PER_BATCH) {
            let batch = CHUNKS_PER_BATCH.min(chunks - batch_start);
            let sampled = map_indexed(opts.policy, batch, |c| {
                let lo = (batch_start + c) * PANELS_PER_CHUNK;
                let hi = (lo + PANELS_PER_CHUNK).min(total_panels);
                let mut vals = Vec::with_capacity((hi - lo) * NODES_PER_PANEL);
                for p in lo..hi {
                    let start = p as f64 * h;
                    for (&dx, &w) in rule.offsets.iter().zip(&rule.weights) {
                        let x = start + dx;
                        vals.push((f(x), w * kernel.weight(x, horizon)));
                    }
                }
                (lo, vals)
            });
            for (lo, vals) in sampled {
                for (i, (v, w)) in vals.into_iter().enumerate() {
                    let v = check_finite(v)?;
                    sup_abs = sup_abs.max(v.norm());
                    power.add(w * v.norm_sqr());
                    let p = lo + i / NODES_PER_PANEL;
                    let j = i % NODES_PER_PANEL;
                    let weighted = v * w;
                    for (bi, fold) in folds.iter_mut().enumerate() {
                        let slot = (p % ((bi + 1) * k)) * NODES_PER_PANEL + j;
                        fold[slot].add(weighted);
                    }
                }
            }
        }
        Ok(Self {
            rule,
            panels_per_unit: k,
            folds: folds
                .into_iter()
                .map(|f| f.into_iter().map(|s| s.value()).collect())
                .collect(),
            sup_abs,
            horizon,
            kernel,
            power: power.value(),
        })
    }

    /// Kernel mean of `f(x)·exp(−2πiλx)` for `λ = num/den`, `den ≤ max_period`.
    pub fn coefficient(&self, num: i64, den: usize) -> Result<Complex64> {
        let fold = self
            .folds
            .get(den.wrapping_sub(1))
            .ok_or_else(|| Error::Domain(format!("denominator {den} beyond folded periods")))?;
        let k = self.panels_per_unit as i64;
        let period = den as i64 * k;
        Ok(complex_sum(fold.iter().enumerate().map(|(i, &v)| {
            let p = (i / NODES_PER_PANEL) as i64;
            let dx = self.rule.offsets[i % NODES_PER_PANEL];
            // λ·x with x = p·h + dx, split to keep the integer part exact
            let lattice = ((num * p).rem_euclid(period)) as f64 / period as f64;
            let turns = lattice + (num as f64 / den as f64) * dx;
            v * unit(-turns)
        })))
    }

    /// Kernel mean of `|f|²` from the same samples.
    pub fn mean_abs_squared(&self) -> f64 {
        self.power
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// Count of sampled nodes.
    pub fn node_count(&self) -> usize {
        self.horizon as usize * self.panels_per_unit * NODES_PER_PANEL
    }
}
