use clap::{Args, ValueEnum};
use serde::Serialize;
use solenoid::quadrature::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Window,
    Cesaro,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Window => Kernel::Window,
            KernelArg::Cesaro => Kernel::Cesaro,
        }
    }
}

/// Session settings: flags, then `SOLH_*` variables, then defaults.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SessionConfig {
    /// Depth of the lcm modulus tower.
    #[arg(long = "depth", env = "SOLH_DEPTH", default_value_t = 16, global = true)]
    pub tower_depth: usize,

    /// Horizon T for numeric means.
    #[arg(long = "mean-T", env = "SOLH_MEAN_T", default_value_t = 1e4, global = true)]
    pub mean_t: f64,

    /// Sup-norm grid points per smallest period.
    #[arg(long = "grid", env = "SOLH_GRID", default_value_t = 64, global = true)]
    pub grid_density: usize,

    /// Detection threshold as a multiple of the averaging error bound.
    #[arg(long = "threshold", env = "SOLH_THRESHOLD", default_value_t = 5.0, global = true)]
    pub threshold_factor: f64,

    /// Averaging kernel for numeric paths.
    #[arg(long, value_enum, env = "SOLH_KERNEL", default_value_t = KernelArg::Cesaro, global = true)]
    pub kernel: KernelArg,

    #[arg(long, value_enum, env = "SOLH_FORMAT", default_value_t = Format::Json, global = true)]
    pub format: Format,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.tower_depth == 0 {
            return Err("--depth must be positive".into());
        }
        if !(self.mean_t > 0.0 && self.mean_t.is_finite()) {
            return Err("--mean-T must be positive".into());
        }
        if self.grid_density == 0 {
            return Err("--grid must be positive".into());
        }
        if !(self.threshold_factor > 0.0 && self.threshold_factor.is_finite()) {
            return Err("--threshold must be positive".into());
        }
        Ok(())
    }

    /// One-line rendering for CSV headers.
    pub fn summary(&self) -> String {
        format!(
            "depth={} mean_T={:e} grid={} threshold={} kernel={} format={}",
            self.tower_depth,
            self.mean_t,
            self.grid_density,
            self.threshold_factor,
            match self.kernel {
                KernelArg::Window => "window",
                KernelArg::Cesaro => "cesaro",
            },
            match self.format {
                Format::Json => "json",
                Format::Csv => "csv",
            }
        )
    }
}
