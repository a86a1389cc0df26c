//! Effective-configuration resolution: command-line flags override scenario
//! config overrides, which override the built-in defaults. Reports echo the
//! resolved values so every artifact is reproducible from its own header.

use std::str::FromStr;

use serde::Serialize;

use trajraster::loss::{LossConfig, DEFAULT_BETA, DEFAULT_LAMBDA};
use trajraster::raster::{DEFAULT_K, DEFAULT_TRUNCATION_MD};
use trajraster::scenario::{ConfigOverrides, TruncationSetting};

/// `--truncation-md` accepts a positive number or the keyword `none`.
#[derive(Debug, Clone, Copy)]
pub struct TruncationArg(pub Option<f64>);

impl FromStr for TruncationArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(TruncationArg(None));
        }
        s.parse::<f64>()
            .map(|v| TruncationArg(Some(v)))
            .map_err(|_| format!("expected a number or `none`, got `{s}`"))
    }
}

/// Loss-stack flags shared by the commands that rasterize.
#[derive(Debug, Clone, Copy, clap::Args)]
pub struct ConfigFlags {
    /// Ellipse-to-box scale factor (σ = k·size)
    #[arg(long)]
    pub k: Option<f64>,
    /// Weight of the scene-compliance term
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Mahalanobis truncation radius, or `none` to disable truncation
    #[arg(long, value_name = "F|none")]
    pub truncation_md: Option<TruncationArg>,
    /// Smooth-L1 transition point
    #[arg(long)]
    pub beta: Option<f64>,
}

impl ConfigFlags {
    pub fn resolve(&self, overrides: &ConfigOverrides) -> LossConfig {
        LossConfig {
            k: self.k.or(overrides.k).unwrap_or(DEFAULT_K),
            lambda: self.lambda.or(overrides.lambda).unwrap_or(DEFAULT_LAMBDA),
            truncation_md: self
                .truncation_md
                .map(|t| t.0)
                .or(overrides.truncation_md.map(TruncationSetting::as_option))
                .unwrap_or(Some(DEFAULT_TRUNCATION_MD)),
            beta: self.beta.or(overrides.beta).unwrap_or(DEFAULT_BETA),
        }
    }
}

/// Config echo embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub k: f64,
    pub lambda: f64,
    pub truncation_md: TruncationSetting,
    pub beta: f64,
}

impl From<&LossConfig> for ConfigEcho {
    fn from(cfg: &LossConfig) -> Self {
        Self {
            k: cfg.k,
            lambda: cfg.lambda,
            truncation_md: TruncationSetting::from_option(cfg.truncation_md),
            beta: cfg.beta,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEcho {
    pub length_m: f64,
    pub width_m: f64,
    pub cell_l: f64,
    pub cell_w: f64,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl From<&trajraster::GridSpec> for GridEcho {
    fn from(g: &trajraster::GridSpec) -> Self {
        Self {
            length_m: g.length_m(),
            width_m: g.width_m(),
            cell_l: g.cell_l(),
            cell_w: g.cell_w(),
            origin: g.origin(),
            nx: g.nx(),
            ny: g.ny(),
        }
    }
}
