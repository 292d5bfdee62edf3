use std::path::Path;

use serde::de::DeserializeOwned;
use solenoid::fourier::SpectrumJson;
use solenoid::io::{FunctionSpec, SpecFunction};
use solenoid::profinite::ModulusTower;

use crate::error::{CliError, CliResult};

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
        pointer: located("", e.path()),
        message: e.inner().to_string(),
    })
}

/// A bare spectrum, or the `spectrum` member of an `analyze` report.
pub fn read_spectrum(path: &Path) -> CliResult<SpectrumJson> {
    let value: serde_json::Value = read_json(path)?;
    let (prefix, inner) = match value {
        serde_json::Value::Object(mut m) if m.contains_key("command") => {
            let inner = m.remove("spectrum").ok_or_else(|| CliError::Parse {
                pointer: "/spectrum".into(),
                message: "report has no spectrum".into(),
            })?;
            ("/spectrum", inner)
        }
        v => ("", v),
    };
    serde_path_to_error::deserialize(inner).map_err(|e| CliError::Parse {
        pointer: located(prefix, e.path()),
        message: e.inner().to_string(),
    })
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn located(prefix: &str, path: &serde_path_to_error::Path) -> String {
    let p = format!("{prefix}{}", pointer(path));
    if p.is_empty() {
        "/".into()
    } else {
        p
    }
}

/// Fails with a precision error naming the depth the spec needs.
pub fn check_depth(spec: &FunctionSpec, tower: &ModulusTower) -> CliResult<()> {
    let dens = spec.terms.iter().flat_map(|t| {
        let a = t.q.as_ref().map(|q| q.denom().clone());
        let b = t.rho.as_ref().map(|r| r.b().clone());
        a.into_iter().chain(b)
    });
    for d in dens {
        let small = d.to_string().parse::<u128>().ok();
        if !small.is_some_and(|m| tower.resolves(m)) {
            return Err(solenoid::Error::Precision {
                modulus: d.to_string(),
                required_depth: solenoid::profinite::required_lcm_depth(&d),
            }
            .into());
        }
    }
    Ok(())
}

/// Parses a spec; with a tower, also checks that it resolves every
/// denominator.
pub fn load_spec(path: &Path, tower: Option<&ModulusTower>) -> CliResult<(FunctionSpec, SpecFunction)> {
    let spec: FunctionSpec = read_json(path)?;
    if let Some(tower) = tower {
        check_depth(&spec, tower)?;
    }
    let f = spec.function()?;
    Ok((spec, f))
}
