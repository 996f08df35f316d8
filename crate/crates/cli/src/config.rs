//! Run configuration: a flat TOML document, every key optional.
//!
//! ```toml
//! tau_min = -0.25
//! tau_max = 0.25
//! m_points = 100
//! k_max = 200
//! beta = 3.0
//! refine = true
//! kernel = "epanechnikov"
//! bandwidth = "lscv"            # or "theoretical:2", "fixed:0.05"
//! h_grid = [0.01, 0.02, 0.04]   # LSCV candidates
//! n = 100                       # curve length, for the theoretical bandwidth
//! sigma = 0.25
//! seed = 7
//! shifts_out = "shifts.csv"
//! density_out = "density.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use shiftdens_core::density::{geomspace, Kernel};
use shiftdens_core::estimation::{TauGrid, DEFAULT_BETA, DEFAULT_GRID_POINTS};
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    tau_min: Option<Spanned<f64>>,
    tau_max: Option<Spanned<f64>>,
    m_points: Option<Spanned<i64>>,
    k_max: Option<Spanned<i64>>,
    beta: Option<Spanned<f64>>,
    refine: Option<bool>,
    kernel: Option<Spanned<String>>,
    bandwidth: Option<Spanned<String>>,
    h_grid: Option<Spanned<Vec<f64>>>,
    n: Option<Spanned<i64>>,
    sigma: Option<Spanned<f64>>,
    seed: Option<Spanned<i64>>,
    shifts_out: Option<PathBuf>,
    density_out: Option<PathBuf>,
}

/// How the kernel bandwidth is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthSpec {
    Theoretical(f64),
    Lscv,
    Fixed(f64),
}

impl BandwidthSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64, String> {
            let a = a.ok_or_else(|| format!("bandwidth '{s}' needs a value, e.g. '{name}:2'"))?;
            a.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| format!("bandwidth '{s}': '{a}' is not a positive number"))
        };
        match name {
            "theoretical" => Ok(BandwidthSpec::Theoretical(number(arg)?)),
            "fixed" => Ok(BandwidthSpec::Fixed(number(arg)?)),
            "lscv" if arg.is_none() => Ok(BandwidthSpec::Lscv),
            _ => Err(format!("unknown bandwidth '{s}' (use theoretical:BETA, lscv, or fixed:H)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tau_grid: TauGrid,
    pub k_max: Option<usize>,
    pub beta: f64,
    pub refine: bool,
    pub kernel: Kernel,
    pub bandwidth: BandwidthSpec,
    pub h_grid: Vec<f64>,
    pub n: Option<usize>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub shifts_out: Option<PathBuf>,
    pub density_out: Option<PathBuf>,
}

pub fn default_h_grid() -> Vec<f64> {
    geomspace(0.01, 0.25, 40)
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_raw(RawConfig::default(), "").expect("defaults are valid")
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source.as_bytes()[..offset.min(source.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Usage(e.to_string().trim_end().to_string()))?;
        Self::from_raw(raw, text)
    }

    fn from_raw(raw: RawConfig, src: &str) -> CliResult<Self> {
        let fail = |span: std::ops::Range<usize>, msg: String| CliError::Usage(format!("line {}: {msg}", line_of(src, span.start)));

        let tau_min = raw.tau_min.as_ref().map_or(-0.25, |v| *v.get_ref());
        let tau_max = raw.tau_max.as_ref().map_or(0.25, |v| *v.get_ref());
        let grid_span = raw
            .tau_max
            .as_ref()
            .or(raw.tau_min.as_ref())
            .map_or(0..0, |v| v.span());
        if !(tau_min.is_finite() && tau_max.is_finite()) || tau_max <= tau_min {
            return Err(fail(grid_span, format!("need tau_min < tau_max, got [{tau_min}, {tau_max}]")));
        }
        if tau_max - tau_min > 0.5 + 1e-12 {
            return Err(fail(grid_span, format!("tau_max - tau_min = {} exceeds 0.5", tau_max - tau_min)));
        }
        let m_points = match &raw.m_points {
            Some(v) if *v.get_ref() < 3 => return Err(fail(v.span(), format!("m_points must be at least 3, got {}", v.get_ref()))),
            Some(v) => *v.get_ref() as usize,
            None => DEFAULT_GRID_POINTS,
        };
        let tau_grid = TauGrid::new(tau_min, tau_max, m_points).map_err(|e| fail(grid_span.clone(), e.to_string()))?;

        let k_max = match &raw.k_max {
            Some(v) if *v.get_ref() < 1 => return Err(fail(v.span(), format!("k_max must be at least 1, got {}", v.get_ref()))),
            Some(v) => Some(*v.get_ref() as usize),
            None => None,
        };
        let beta = match &raw.beta {
            Some(v) if !(v.get_ref().is_finite() && *v.get_ref() > 0.0) => {
                return Err(fail(v.span(), format!("beta must be positive, got {}", v.get_ref())))
            }
            Some(v) => *v.get_ref(),
            None => DEFAULT_BETA,
        };
        let kernel = match &raw.kernel {
            Some(v) => Kernel::by_name(v.get_ref()).map_err(|e| fail(v.span(), e.to_string()))?,
            None => Kernel::epanechnikov(),
        };
        let bandwidth = match &raw.bandwidth {
            Some(v) => BandwidthSpec::parse(v.get_ref()).map_err(|e| fail(v.span(), e))?,
            None => BandwidthSpec::Lscv,
        };
        let h_grid = match &raw.h_grid {
            Some(v) => {
                let g = v.get_ref();
                if g.is_empty() || g.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                    return Err(fail(v.span(), "h_grid must be a nonempty list of positive numbers".into()));
                }
                g.clone()
            }
            None => default_h_grid(),
        };
        let n = match &raw.n {
            Some(v) if *v.get_ref() < 2 => return Err(fail(v.span(), format!("n must be at least 2, got {}", v.get_ref()))),
            Some(v) => Some(*v.get_ref() as usize),
            None => None,
        };
        let sigma = match &raw.sigma {
            Some(v) if !(v.get_ref().is_finite() && *v.get_ref() >= 0.0) => {
                return Err(fail(v.span(), format!("sigma must be nonnegative, got {}", v.get_ref())))
            }
            Some(v) => Some(*v.get_ref()),
            None => None,
        };
        let seed = match &raw.seed {
            Some(v) if *v.get_ref() < 0 => return Err(fail(v.span(), format!("seed must be nonnegative, got {}", v.get_ref()))),
            Some(v) => Some(*v.get_ref() as u64),
            None => None,
        };
        Ok(Self {
            tau_grid,
            k_max,
            beta,
            refine: raw.refine.unwrap_or(false),
            kernel,
            bandwidth,
            h_grid,
            n,
            sigma,
            seed,
            shifts_out: raw.shifts_out,
            density_out: raw.density_out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.tau_grid.len(), DEFAULT_GRID_POINTS);
        assert_eq!(c.beta, 3.0);
        assert!(!c.refine);
        assert_eq!(c.bandwidth, BandwidthSpec::Lscv);
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::parse("beta = 3\ntau_min = -0.4\ntau_max = 0.4\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = RunConfig::parse("m_points = 2\n").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = RunConfig::parse("\n\nkernel = \"box\"\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = RunConfig::parse("bogus = 1\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn bandwidth_specs() {
        assert_eq!(BandwidthSpec::parse("theoretical:2").unwrap(), BandwidthSpec::Theoretical(2.0));
        assert_eq!(BandwidthSpec::parse("fixed:0.5").unwrap(), BandwidthSpec::Fixed(0.5));
        assert_eq!(BandwidthSpec::parse("lscv").unwrap(), BandwidthSpec::Lscv);
        assert!(BandwidthSpec::parse("fixed:-1").is_err());
        assert!(BandwidthSpec::parse("theoretical").is_err());
        assert!(BandwidthSpec::parse("silverman").is_err());
    }
}
