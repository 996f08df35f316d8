//! Named benchmark suites with pass/fail gates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    run_consistency_check, run_mc_density, run_mc_shift, run_selection_study, BandwidthPolicy, EstimatorChoice,
    McConfig, SignalPreset,
};
use crate::density::{geomspace, Kernel};
use crate::error::{invalid, Error, Result};
use crate::estimation::{Filter, TauGrid};
use crate::signal::ShiftDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    Lemma24,
    Lemma23,
    Lemma25,
    Theorem32,
    Theorem33,
    Sim1,
    Sim2,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lemma24,
        Suite::Lemma23,
        Suite::Lemma25,
        Suite::Theorem32,
        Suite::Theorem33,
        Suite::Sim1,
        Suite::Sim2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma24 => "lemma24",
            Suite::Lemma23 => "lemma23",
            Suite::Lemma25 => "lemma25",
            Suite::Theorem32 => "theorem32",
            Suite::Theorem33 => "theorem33",
            Suite::Sim1 => "sim1",
            Suite::Sim2 => "sim2",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite '{s}'")))
    }
}

/// Full sizes are the gated runs; smoke sizes exercise the same code paths
/// in a fraction of the time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuiteSize {
    Full,
    Smoke,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub size: SuiteSize,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, size: SuiteSize) -> Self {
        Self {
            suite,
            seed,
            size,
            metrics: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
        });
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn metric_value(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

/// Noise level of the single-harmonic risk runs.
pub const LEMMA_SIGMA: f64 = 1.0;
/// Noise level of the half-sine density runs.
pub const DENSITY_SIGMA: f64 = 0.25;
/// Noise level of the laser runs.
pub const LASER_SIGMA: f64 = 1.0;
/// `h = RATE_CONSTANT * J^{-1/5}` in the rate sweep.
pub const RATE_CONSTANT: f64 = 0.08;

fn pick(size: SuiteSize, full: usize, smoke: usize) -> usize {
    match size {
        SuiteSize::Full => full,
        SuiteSize::Smoke => smoke,
    }
}

/// Single harmonic, uniform shifts on `[-0.1, 0.1]`, `n = 800`, projection
/// filter of length 5 with refinement.
pub fn lemma_config(seed: u64, size: SuiteSize) -> Result<McConfig> {
    Ok(McConfig {
        signal: SignalPreset::SingleHarmonic,
        shifts: ShiftDistribution::uniform(-0.1, 0.1)?,
        n: 800,
        j: 1,
        sigma: LEMMA_SIGMA,
        replicates: pick(size, 1000, 100),
        seed,
        estimator: EstimatorChoice::FixedFilter(Filter::projection(5)?),
        refine: true,
        tau_grid: TauGrid::symmetric(0.25, 101)?,
    })
}

/// Half-sine curves with bimodal shifts and the adaptive estimator.
pub fn bimodal_config(seed: u64, n: usize, j: usize, replicates: usize) -> Result<McConfig> {
    Ok(McConfig {
        signal: SignalPreset::HalfSine,
        shifts: ShiftDistribution::bimodal_preset(),
        n,
        j,
        sigma: DENSITY_SIGMA,
        replicates,
        seed,
        estimator: EstimatorChoice::adaptive(),
        refine: true,
        tau_grid: TauGrid::symmetric(0.25, 100)?,
    })
}

/// Adaptive selection on the amplitude-1 laser at `n = 800`, `tau = 0.35`.
pub fn illustration_config(seed: u64, replicates: usize, signal: SignalPreset) -> Result<McConfig> {
    Ok(McConfig {
        signal,
        shifts: ShiftDistribution::point_mass(0.0)?,
        n: 800,
        j: 1,
        sigma: LASER_SIGMA,
        replicates,
        seed,
        estimator: EstimatorChoice::adaptive(),
        refine: false,
        tau_grid: TauGrid::new(0.25, 0.75, 100)?,
    })
}

/// Laser curves, shifts from a cosine bump around the center, `n = 100`, `J = 30`.
pub fn sim2_config(seed: u64, replicates: usize) -> Result<McConfig> {
    Ok(McConfig {
        signal: SignalPreset::laser(),
        shifts: ShiftDistribution::cosine_bump(0.0, 0.1)?,
        n: 100,
        j: 30,
        sigma: DENSITY_SIGMA,
        replicates,
        seed,
        estimator: EstimatorChoice::adaptive(),
        refine: true,
        tau_grid: TauGrid::new(0.1, 0.6, 100)?,
    })
}

pub fn lscv_grid() -> Vec<f64> {
    geomspace(0.01, 0.25, 40)
}

pub fn run_suite(suite: Suite, seed: u64, size: SuiteSize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(suite, seed, size);
    match suite {
        Suite::Lemma24 | Suite::Lemma23 | Suite::Lemma25 => {
            let mc = run_mc_shift(&lemma_config(seed, size)?)?;
            report.metric("replicates", mc.replicates as f64);
            report.metric("failures", mc.failures as f64);
            report.metric("bias", mc.bias);
            report.metric("mse", mc.mse);
            report.metric("sd", mc.sd);
            match suite {
                Suite::Lemma24 => {
                    let predicted = mc.predicted_risk.unwrap_or(f64::NAN);
                    report.metric("normalized_risk", mc.normalized_risk);
                    report.metric("predicted_risk", predicted);
                    report.metric("risk_ratio", mc.normalized_risk / predicted);
                    report.check(
                        "normalized_risk_in_band",
                        (0.95..=1.25).contains(&mc.normalized_risk),
                        format!("n||f'||^2 MSE = {:.4} (predicted {:.4}), band [0.95, 1.25]", mc.normalized_risk, predicted),
                    );
                }
                Suite::Lemma23 => {
                    for &(k, f) in &mc.tail_frequencies {
                        report.metric(&format!("tail_frequency_k{k}"), f);
                    }
                    let f4 = mc.tail_frequency(4.0).unwrap_or(1.0);
                    report.check(
                        "tail_frequency_k4_below_1pct",
                        f4 < 0.01,
                        format!("P(sqrt(n)||f'|| |err| > 4 sqrt(log n)) = {f4:.4}"),
                    );
                }
                _ => {
                    let bound = mc.bias_bound();
                    report.metric("bias_bound", bound);
                    report.check(
                        "bias_within_bound",
                        mc.bias.abs() <= bound,
                        format!("|bias| = {:.5}, bound {:.5}", mc.bias.abs(), bound),
                    );
                }
            }
        }
        Suite::Theorem32 => {
            let config = match size {
                SuiteSize::Full => bimodal_config(seed, 500, 500, 1)?,
                SuiteSize::Smoke => bimodal_config(seed, 200, 100, 1)?,
            };
            let gap = run_consistency_check(&config, |x: f64| (5.0 * x).cos())?;
            report.metric("abs_error_cos5x", gap);
            report.check("plug_in_error_below_0.05", gap <= 0.05, format!("|mu_hat g - mu g| = {gap:.5}"));
        }
        Suite::Theorem33 => {
            let (config, sweep) = match size {
                SuiteSize::Full => (bimodal_config(seed, 1000, 1, 100)?, vec![50, 200, 800]),
                SuiteSize::Smoke => (bimodal_config(seed, 200, 1, 3)?, vec![10, 20, 40]),
            };
            let policy = BandwidthPolicy::RateOptimal {
                constant: RATE_CONSTANT,
                beta: 2.0,
            };
            let d = run_mc_density(&config, &Kernel::epanechnikov(), &policy, &sweep)?;
            let mses: Vec<f64> = d.sweep.iter().map(|e| e.pointwise_mse.unwrap_or(f64::NAN)).collect();
            for e in &d.sweep {
                report.metric(&format!("pointwise_mse_j{}", e.j), e.pointwise_mse.unwrap_or(f64::NAN));
                report.metric(&format!("mise_j{}", e.j), e.mise.unwrap_or(f64::NAN));
                report.metric(&format!("bandwidth_j{}", e.j), e.mean_bandwidth);
            }
            let slope = d.rate_slope.unwrap_or(f64::NAN);
            report.metric("rate_slope", slope);
            report.check(
                "pointwise_mse_strictly_decreasing",
                mses.windows(2).all(|w| w[1] < w[0]),
                format!("pointwise MSE at modes {mses:?}"),
            );
            report.check(
                "rate_slope_in_band",
                (-1.2..=-0.4).contains(&slope),
                format!("log-log slope {slope:.3}, band [-1.2, -0.4]"),
            );
        }
        Suite::Sim1 => {
            let config = bimodal_config(seed, 100, 50, pick(size, 50, 5))?;
            let policy = BandwidthPolicy::Lscv { grid: lscv_grid() };
            let d = run_mc_density(&config, &Kernel::epanechnikov(), &policy, &[50])?;
            let e = &d.sweep[0];
            let rate = e.mode_rate(2);
            report.metric("mise", e.mise.unwrap_or(f64::NAN));
            report.metric("mean_bandwidth", e.mean_bandwidth);
            report.metric("bimodal_rate", rate);
            report.metric("failures", e.failures as f64);
            report.check("bimodal_rate_at_least_0.8", rate >= 0.8, format!("two modes in {:.0}% of replicates", 100.0 * rate));
        }
        Suite::Sim2 => {
            let study = run_selection_study(&illustration_config(seed, pick(size, 100, 10), SignalPreset::laser())?)?;
            let hit = study.hit_rate(2.0);
            let k_rate = study.k_rate(60, 160);
            let mut ks = study.selected_k.clone();
            ks.sort_unstable();
            report.metric("tau_hit_rate", hit);
            report.metric("k_in_range_rate", k_rate);
            report.metric("median_selected_k", ks.get(ks.len() / 2).copied().unwrap_or(0) as f64);
            report.check("tau_within_two_meshes_90pct", hit >= 0.9, format!("hit rate {hit:.2}"));
            report.check("selected_k_in_60_160_80pct", k_rate >= 0.8, format!("K in [60, 160] rate {k_rate:.2}"));

            let demo = run_selection_study(&illustration_config(seed, pick(size, 100, 10), SignalPreset::laser_demo())?)?;
            report.metric("demo_low_amplitude_hit_rate", demo.hit_rate(2.0));

            let config = sim2_config(seed, pick(size, 20, 3))?;
            let policy = BandwidthPolicy::Lscv { grid: lscv_grid() };
            let d = run_mc_density(&config, &Kernel::epanechnikov(), &policy, &[30])?;
            let e = &d.sweep[0];
            report.metric("panel_mise", e.mise.unwrap_or(f64::NAN));
            report.metric("panel_unimodal_rate", e.mode_rate(1));
        }
    }
    Ok(report)
}
