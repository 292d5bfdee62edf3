use std::path::Path;

use serde::Serialize;
use solenoid::fourier::{
    self, approx_report, approx_report_series, mean_abs_squared_raw, parseval_check, parseval_check_numeric,
    partial_sum, product_spectrum, spectrum, uniqueness_check, ApproxReport, Candidates, ParsevalReport, SpectrumJson,
};
use solenoid::funcspace::{check_invariance, sample_points, GridPolicy, RawProductPoly, SolenoidPoly};
use solenoid::io::{FunctionSpec, SpecFunction};
use solenoid::meanval::solenoid_mean_raw;
use solenoid::profinite::ModulusTower;
use solenoid::ExecPolicy;

use crate::config::{Format, SessionConfig};
use crate::error::{CliError, CliResult};
use crate::input::{load_spec, read_spectrum};

const SAMPLE_SEED: u64 = 0x5011;
const INVARIANCE_SAMPLES: usize = 1000;
const GAMMAS: [i64; 11] = [-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5];

/// Rendered report and, if a property check failed, why.
pub struct Outcome {
    pub body: String,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, failure: None }
    }
}

pub struct Session {
    pub config: SessionConfig,
    pub tower: ModulusTower,
    pub exec: ExecPolicy,
}

impl Session {
    pub fn new(config: SessionConfig) -> CliResult<Self> {
        config.validate().map_err(CliError::Usage)?;
        let tower = ModulusTower::lcm_tower(config.tower_depth).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            config,
            tower,
            exec: ExecPolicy::default(),
        })
    }

    fn grid(&self) -> GridPolicy {
        GridPolicy {
            density: self.config.grid_density,
            ..GridPolicy::default()
        }
    }

    fn invariance(&self, raw: &RawProductPoly) -> CliResult<f64> {
        let samples = sample_points(&self.tower, INVARIANCE_SAMPLES, SAMPLE_SEED, 50.0);
        Ok(check_invariance(raw, &GAMMAS, &samples, self.exec)?)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config: &'a SessionConfig,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(command: &str, config: &SessionConfig, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { command, config, body }).expect("report serializes");
    s.push('\n');
    s
}

fn csv<const N: usize>(comments: &[String], header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
    out
}

fn require_invariant(session: &Session, f: SpecFunction) -> CliResult<SolenoidPoly> {
    match f {
        SpecFunction::Poly(p) => Ok(p),
        SpecFunction::Raw(raw) => Err(CliError::Property(format!(
            "spec is not ℤ-invariant (invariance residual {:e})",
            session.invariance(&raw)?
        ))),
    }
}

#[derive(Serialize)]
struct AnalyzeBody {
    spectrum: SpectrumJson,
    parseval: ParsevalReport,
    invariance_residual: f64,
}

pub fn analyze(session: &Session, path: &Path) -> CliResult<Outcome> {
    let (_, f) = load_spec(path, Some(&session.tower))?;
    let phi = require_invariant(session, f)?;
    let spec = spectrum(&phi, &Candidates::Terms);
    let parseval = parseval_check(&phi);
    let invariance_residual = session.invariance(&phi.as_raw())?;
    let cfg = &session.config;
    Ok(Outcome::ok(match cfg.format {
        Format::Json => json(
            "analyze",
            cfg,
            AnalyzeBody {
                spectrum: spec.to_json(),
                parseval,
                invariance_residual,
            },
        ),
        Format::Csv => csv(
            &[
                format!("solh analyze {}", cfg.summary()),
                format!(
                    "residual_power={:e} parseval_gap={:e} invariance_residual={:e}",
                    spec.residual_power, parseval.gap, invariance_residual
                ),
            ],
            fourier::SPECTRUM_CSV_HEADER,
            spec.csv_rows(),
        ),
    }))
}

pub fn synth(session: &Session, path: &Path, n: Option<i64>) -> CliResult<Outcome> {
    let n = match n {
        Some(n) if n < 0 => return Err(CliError::Usage(format!("N must be non-negative, got {n}"))),
        Some(n) => n as usize,
        None => usize::MAX,
    };
    let spec = read_spectrum(path)?.into_spectrum()?;
    let s_n = partial_sum(&spec, n);
    Ok(Outcome::ok(match session.config.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&FunctionSpec::from_poly(&s_n)).expect("spec serializes");
            s.push('\n');
            s
        }
        Format::Csv => csv(
            &[format!("solh synth {}", session.config.summary())],
            fourier::SPECTRUM_CSV_HEADER,
            spectrum(&s_n, &Candidates::Terms).csv_rows(),
        ),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    status: Status,
    residual: Option<f64>,
    tolerance: f64,
}

impl Check {
    fn measured(name: &'static str, residual: f64, tolerance: f64) -> Self {
        let status = if residual < tolerance || (tolerance == 0.0 && residual == 0.0) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name,
            status,
            residual: Some(residual),
            tolerance,
        }
    }

    fn skipped(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            status: Status::Skipped,
            residual: None,
            tolerance,
        }
    }
}

#[derive(Serialize)]
struct VerifyBody {
    invariant: bool,
    checks: Vec<Check>,
    passed: bool,
}

pub fn verify(session: &Session, path: &Path) -> CliResult<Outcome> {
    let (_, f) = load_spec(path, Some(&session.tower))?;
    let (raw, poly) = match f {
        SpecFunction::Poly(p) => (p.as_raw(), Some(p)),
        SpecFunction::Raw(r) => (r, None),
    };
    let exec = session.exec;
    let cfg = &session.config;
    let mut checks = vec![Check::measured("invariance", session.invariance(&raw)?, 1e-10)];

    let ts: Vec<_> = sample_points(&session.tower, 20, SAMPLE_SEED + 1, 1.0).into_iter().map(|(_, t)| t).collect();
    let total = solenoid_mean_raw(&raw)?.value;
    let mut worst: f64 = 0.0;
    for t in &ts {
        worst = worst.max((raw.leaf_restrict(t)?.poly.constant_term() - total).norm());
    }
    checks.push(Check::measured("mean_comparison", worst, 1e-12));

    let sum_sq: f64 = product_spectrum(&raw)?.entries.values().map(|c| c.norm_sqr()).sum();
    checks.push(Check::measured("parseval_exact", (sum_sq - mean_abs_squared_raw(&raw)?).abs(), 1e-12));

    match &poly {
        Some(p) => {
            let numeric = parseval_check_numeric(p, cfg.kernel.into(), cfg.mean_t, exec)?;
            checks.push(Check::measured("parseval_numeric", numeric.gap, 1e-2));
        }
        None => checks.push(Check::skipped("parseval_numeric", 1e-2)),
    }

    let lambdas: Vec<_> = raw.terms().map(|(ch, _)| ch.lambda.clone()).collect();
    let mut worst: f64 = 0.0;
    for (i, (_, t)) in sample_points(&session.tower, 100, SAMPLE_SEED + 2, 1.0).iter().enumerate() {
        if let Some(lam) = lambdas.get(i % lambdas.len().max(1)) {
            worst = worst.max(fourier::leaf_transversal_residual(&raw, t, lam)?);
        }
    }
    checks.push(Check::measured("leaf_transversal", worst, 1e-12));

    match &poly {
        Some(p) => {
            let rebuilt = partial_sum(&spectrum(p, &Candidates::Terms), usize::MAX);
            let u = uniqueness_check(p, &rebuilt, &session.tower, exec)?;
            checks.push(Check::measured("uniqueness", u.sampled_gap, 1e-10));
        }
        None => checks.push(Check::skipped("uniqueness", 1e-10)),
    }

    let failed: Vec<&str> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name).collect();
    let passed = failed.is_empty();
    let body = match cfg.format {
        Format::Json => json(
            "verify",
            cfg,
            VerifyBody {
                invariant: poly.is_some(),
                checks,
                passed,
            },
        ),
        Format::Csv => csv(
            &[format!("solh verify {}", cfg.summary())],
            ["check", "status", "residual", "tolerance"],
            checks.iter().map(|c| {
                [
                    c.name.to_string(),
                    serde_json::to_value(c.status).unwrap().as_str().unwrap().to_string(),
                    c.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
                    format!("{:e}", c.tolerance),
                ]
            }),
        ),
    };
    Ok(Outcome {
        body,
        failure: (!passed).then(|| failed.join(", ")),
    })
}

#[derive(Serialize)]
struct ApproxBody<'a> {
    series: bool,
    #[serde(flatten)]
    report: &'a ApproxReport,
    non_increasing: bool,
}

/// Base-leaf only, so no tower depth is needed.
pub fn approx(session: &Session, path: &Path, n_list: Option<Vec<usize>>, series: bool) -> CliResult<Outcome> {
    let (spec, f) = load_spec(path, None)?;
    if series && spec.majorant.is_none() {
        return Err(CliError::Usage("series input needs a \"majorant\"".into()));
    }
    let as_series = spec.majorant.is_some();
    let n_list = n_list.unwrap_or_else(|| (0..=spec.terms.len()).collect());
    let report = if as_series {
        let s = spec.series()?;
        let len = s.len().unwrap_or(0);
        approx_report_series(&s, &n_list, len, session.grid(), session.exec)?
    } else {
        let phi = require_invariant(session, f)?;
        approx_report(&phi, &n_list, session.grid(), session.exec)
    };
    let non_increasing = report.non_increasing();
    let cfg = &session.config;
    let body = match cfg.format {
        Format::Json => json(
            "approx",
            cfg,
            ApproxBody {
                series: as_series,
                report: &report,
                non_increasing,
            },
        ),
        Format::Csv => csv(
            &[format!("solh approx {}", cfg.summary())],
            ["N", "sup_error_on_grid", "majorant_bound"],
            report.rows.iter().map(|r| {
                [
                    r.n.to_string(),
                    format!("{:e}", r.sup_error),
                    r.majorant_bound.map(|b| format!("{b:e}")).unwrap_or_default(),
                ]
            }),
        ),
    };
    let mut failure = (!non_increasing).then(|| "sup errors increase with N".to_string());
    if let Some(bad) = report
        .rows
        .iter()
        .find(|r| r.majorant_bound.is_some_and(|b| r.sup_error > b + report.reference_tail.unwrap_or(0.0) + 1e-12))
    {
        failure = Some(format!("N = {} exceeds its majorant bound", bad.n));
    }
    Ok(Outcome { body, failure })
}
