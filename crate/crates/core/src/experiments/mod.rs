//! Monte-Carlo harness: replicated shift estimation and density estimation
//! runs with seeded, thread-count independent results.

pub mod suites;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{bandwidth_lscv, bandwidth_theoretical, default_x_grid, kde, kde_at, linspace, trapezoid, Kernel};
use crate::error::{invalid, Result};
use crate::estimation::{estimate_shift_fixed_filter, EstimatorConfig, Filter, FirstJump, ShiftEstimator, TauGrid};
use crate::seed::{derive_seed, stream_rng, Stream};
use crate::signal::{generate_curve, generate_panel, CosineSignal, ShiftDistribution, Signal, TimeGrid};

pub use suites::{run_suite, Check, Metric, Suite, SuiteReport, SuiteSize};

/// Mode detection keeps strict local maxima above this fraction of the peak.
pub const MODE_FRACTION: f64 = 0.1;
const DENSITY_GRID_POINTS: usize = 401;
const QUADRATURE_POINTS: usize = 20_001;

/// Curve shapes available to the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SignalPreset {
    SingleHarmonic,
    HalfSine,
    /// `a cos(b cos(pi (t - center)))`; `center` is added to every drawn
    /// shift, so curves are `a cos(b cos(pi (t - center - theta)))`.
    Laser { amplitude: f64, frequency: f64, center: f64 },
}

impl SignalPreset {
    /// Amplitude-1 laser centered at 0.35.
    pub fn laser() -> Self {
        SignalPreset::Laser {
            amplitude: 1.0,
            frequency: 100.0,
            center: 0.35,
        }
    }

    /// The low-amplitude laser of the illustration figure.
    pub fn laser_demo() -> Self {
        SignalPreset::Laser {
            amplitude: 0.015,
            frequency: 100.0,
            center: 0.35,
        }
    }

    pub fn build(&self) -> Result<Signal> {
        match *self {
            SignalPreset::SingleHarmonic => Ok(Signal::single_harmonic()),
            SignalPreset::HalfSine => Ok(Signal::half_sine()),
            SignalPreset::Laser {
                amplitude,
                frequency,
                center,
            } => {
                if !center.is_finite() {
                    return Err(invalid("laser center must be finite"));
                }
                Signal::laser(amplitude, frequency)
            }
        }
    }

    /// Offset added to drawn shifts.
    pub fn center(&self) -> f64 {
        match *self {
            SignalPreset::Laser { center, .. } => center,
            _ => 0.0,
        }
    }
}

/// Which shift estimator a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EstimatorChoice {
    /// Pinsker filters over lengths `1..=k_max` with hull-jump selection.
    Adaptive {
        beta: f64,
        k_max: Option<usize>,
        first_jump: FirstJump,
    },
    FixedFilter(Filter),
}

impl EstimatorChoice {
    pub fn adaptive() -> Self {
        EstimatorChoice::Adaptive {
            beta: crate::estimation::DEFAULT_BETA,
            k_max: None,
            first_jump: FirstJump::Discard,
        }
    }
}

/// One Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub signal: SignalPreset,
    pub shifts: ShiftDistribution,
    pub n: usize,
    /// Curves per panel (density runs); shift runs use one curve per replicate.
    pub j: usize,
    pub sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub estimator: EstimatorChoice,
    pub refine: bool,
    pub tau_grid: TauGrid,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("at least one replicate is required"));
        }
        if self.n < 4 {
            return Err(invalid("n must be at least 4"));
        }
        if self.j == 0 {
            return Err(invalid("J must be at least 1"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(invalid("sigma must be finite and nonnegative"));
        }
        self.signal.build().map(|_| ())
    }
}

/// Shift estimator prepared once per run.
enum Prepared {
    Adaptive(ShiftEstimator),
    Fixed { filter: Filter, grid: TauGrid, refine: bool },
}

impl Prepared {
    fn new(config: &McConfig) -> Result<Self> {
        Ok(match &config.estimator {
            EstimatorChoice::Adaptive { beta, k_max, first_jump } => {
                let mut ec = EstimatorConfig::new(config.tau_grid.clone())
                    .with_refine(config.refine)
                    .with_beta(*beta)
                    .with_first_jump(*first_jump);
                if let Some(top) = k_max {
                    ec = ec.with_k_grid((1..=*top).collect());
                }
                Prepared::Adaptive(ShiftEstimator::new(ec, config.n)?)
            }
            EstimatorChoice::FixedFilter(filter) => {
                crate::spectral::check_nyquist(filter.effective_len().max(1), config.n)?;
                Prepared::Fixed {
                    filter: filter.clone(),
                    grid: config.tau_grid.clone(),
                    refine: config.refine,
                }
            }
        })
    }

    fn estimate(&self, row: &[f64]) -> Result<f64> {
        match self {
            Prepared::Adaptive(est) => est.estimate(row).map(|e| e.value()),
            Prepared::Fixed { filter, grid, refine } => estimate_shift_fixed_filter(row, filter, grid, *refine),
        }
    }
}

/// `sum_k (2 pi k)^2 [(1 - h_k)^2 f_k^2 + h_k^2 / n]` over the union of the
/// filter and signal supports.
pub fn compute_rn(filter: &Filter, signal: &CosineSignal, n: usize) -> f64 {
    let top = filter.weights().len().max(signal.cutoff());
    let nf = n.max(1) as f64;
    (1..=top)
        .map(|k| {
            let h = filter.weight(k);
            let f = signal.coefficient(k);
            let w = 2.0 * PI * k as f64;
            w * w * ((1.0 - h).powi(2) * f * f + h * h / nf)
        })
        .sum()
}

/// Error summaries of a replicated single-curve experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McShiftReport {
    pub n: usize,
    pub replicates: usize,
    pub failures: usize,
    /// `theta_hat - theta` for each successful replicate, in replicate order.
    pub errors: Vec<f64>,
    pub bias: f64,
    pub mse: f64,
    pub sd: f64,
    pub fisher_information: f64,
    /// `n ||f'||^2 MSE`.
    pub normalized_risk: f64,
    /// `1 + R_n / ||f'||^2`, available for fixed filters.
    pub predicted_risk: Option<f64>,
    /// `(K, fraction of sqrt(n) ||f'|| |error| > K sqrt(log n))`.
    pub tail_frequencies: Vec<(f64, f64)>,
}

impl McShiftReport {
    pub fn tail_frequency(&self, k: f64) -> Option<f64> {
        self.tail_frequencies.iter().find(|(kk, _)| *kk == k).map(|&(_, f)| f)
    }

    /// `2 log(n) / n + 3 sd / sqrt(R)`.
    pub fn bias_bound(&self) -> f64 {
        let nf = self.n as f64;
        2.0 * nf.ln() / nf + 3.0 * self.sd / (self.errors.len().max(1) as f64).sqrt()
    }
}

pub const TAIL_LEVELS: [f64; 3] = [2.0, 3.0, 4.0];

/// Replicate `r` draws its shift and noise from streams keyed on
/// `derive_seed(seed, Replicate, r)`.
pub fn run_mc_shift(config: &McConfig) -> Result<McShiftReport> {
    config.validate()?;
    let signal = config.signal.build()?;
    let center = config.signal.center();
    let estimator = Prepared::new(config)?;
    let grid = TimeGrid::new(config.n)?;
    let outcomes: Vec<Result<f64>> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let rep = derive_seed(config.seed, Stream::Replicate, r);
            let theta = config.shifts.sample(&mut stream_rng(rep, Stream::Shift, 0)) + center;
            let row = generate_curve(&signal, theta, config.sigma, grid, rep, 0);
            estimator.estimate(&row).map(|t| t - theta)
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    let errors: Vec<f64> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    if errors.is_empty() {
        return Err(invalid("every replicate failed"));
    }
    let count = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / count;
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / count;
    let var = if errors.len() > 1 {
        errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let deriv = signal.spectrum().deriv_norm_sq();
    let nf = config.n as f64;
    let fisher = nf * deriv;
    let predicted_risk = match &config.estimator {
        EstimatorChoice::FixedFilter(filter) if deriv > 0.0 => {
            Some(1.0 + compute_rn(filter, signal.spectrum(), config.n) / deriv)
        }
        _ => None,
    };
    let scale = fisher.sqrt();
    let tail_frequencies = TAIL_LEVELS
        .iter()
        .map(|&k| {
            let x = k * nf.ln().sqrt();
            let hits = errors.iter().filter(|e| scale * e.abs() > x).count();
            (k, hits as f64 / count)
        })
        .collect();
    Ok(McShiftReport {
        n: config.n,
        replicates: config.replicates,
        failures,
        errors,
        bias,
        mse,
        sd: var.sqrt(),
        fisher_information: fisher,
        normalized_risk: fisher * mse,
        predicted_risk,
        tail_frequencies,
    })
}

/// Bandwidth rule for density runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BandwidthPolicy {
    Fixed(f64),
    /// Rate-driven choice from `(n, J, beta)`.
    Theoretical { beta: f64 },
    /// `constant * J^{-1/(2 beta + 1)}`.
    RateOptimal { constant: f64, beta: f64 },
    /// Cross-validation over a candidate grid.
    Lscv { grid: Vec<f64> },
}

impl BandwidthPolicy {
    pub fn choose(&self, points: &[f64], kernel: &Kernel, n: usize) -> Result<f64> {
        match self {
            BandwidthPolicy::Fixed(h) => Ok(*h),
            BandwidthPolicy::Theoretical { beta } => bandwidth_theoretical(n, points.len(), *beta),
            BandwidthPolicy::RateOptimal { constant, beta } => {
                Ok(constant * (points.len() as f64).powf(-1.0 / (2.0 * beta + 1.0)))
            }
            BandwidthPolicy::Lscv { grid } => Ok(bandwidth_lscv(points, kernel, grid)?.bandwidth),
        }
    }
}

/// Density-run results for one panel size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySweepEntry {
    pub j: usize,
    pub replicates: usize,
    pub failures: usize,
    pub mean_bandwidth: f64,
    /// Mean integrated squared error; `None` without a density.
    pub mise: Option<f64>,
    /// Squared error at each true mode averaged over replicates and modes.
    pub pointwise_mse: Option<f64>,
    pub mode_counts: Vec<usize>,
}

impl DensitySweepEntry {
    /// Fraction of replicates with exactly `modes` detected modes.
    pub fn mode_rate(&self, modes: usize) -> f64 {
        let hits = self.mode_counts.iter().filter(|&&m| m == modes).count();
        hits as f64 / self.mode_counts.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDensityReport {
    pub n: usize,
    pub true_modes: Vec<f64>,
    pub sweep: Vec<DensitySweepEntry>,
    /// Least-squares slope of `log pointwise MSE` against `log J`.
    pub rate_slope: Option<f64>,
}

struct ReplicateDensity {
    bandwidth: f64,
    ise: Option<f64>,
    mode_sq_errors: Vec<f64>,
    modes: usize,
    failures: usize,
}

/// Shifts of panel curves, estimated in curve order, and the failure count.
fn estimate_panel_shifts(
    estimator: &Prepared,
    signal: &Signal,
    config: &McConfig,
    j: usize,
    seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let center = config.signal.center();
    let dist = shifted(&config.shifts, center)?;
    let panel = generate_panel(signal, &dist, config.sigma, config.n, j, seed)?;
    let mut shifts = Vec::with_capacity(j);
    let mut failures = 0;
    for row in panel.rows() {
        match estimator.estimate(row) {
            Ok(t) => shifts.push(t - center),
            Err(_) => failures += 1,
        }
    }
    Ok((shifts, failures))
}

fn shifted(dist: &ShiftDistribution, by: f64) -> Result<ShiftDistribution> {
    if by == 0.0 {
        return Ok(dist.clone());
    }
    match dist {
        ShiftDistribution::Uniform { lo, hi } => ShiftDistribution::uniform(lo + by, hi + by),
        ShiftDistribution::CosineBump { center, half_width } => ShiftDistribution::cosine_bump(center + by, *half_width),
        ShiftDistribution::BimodalCosine {
            centers,
            half_width,
            weights,
        } => ShiftDistribution::bimodal([centers[0] + by, centers[1] + by], *half_width, *weights),
        ShiftDistribution::PointMass { at } => ShiftDistribution::point_mass(at + by),
    }
}

/// Panel, shift estimates, and kernel estimate per replicate for each `J`.
/// Replicate `r` uses the same seed for every `J`, so panels are nested.
pub fn run_mc_density(
    config: &McConfig,
    kernel: &Kernel,
    policy: &BandwidthPolicy,
    j_sweep: &[usize],
) -> Result<McDensityReport> {
    config.validate()?;
    if j_sweep.is_empty() || j_sweep.windows(2).any(|w| w[0] >= w[1]) || j_sweep[0] == 0 {
        return Err(invalid("J sweep must be nonempty, positive, and strictly increasing"));
    }
    let signal = config.signal.build()?;
    let estimator = Prepared::new(config)?;
    let true_modes = config.shifts.modes();
    let (lo, hi) = config.shifts.support();
    let margin = 0.25 * (hi - lo).max(0.2);
    let eval_grid = linspace(lo - margin, hi + margin, DENSITY_GRID_POINTS);
    let truth: Option<Vec<f64>> = eval_grid.iter().map(|&x| config.shifts.density(x)).collect();

    let mut sweep = Vec::with_capacity(j_sweep.len());
    for &j in j_sweep {
        let reps: Vec<Result<ReplicateDensity>> = (0..config.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let rep = derive_seed(config.seed, Stream::Replicate, r);
                let (points, failures) = estimate_panel_shifts(&estimator, &signal, config, j, rep)?;
                if points.is_empty() {
                    return Err(invalid("every curve in the panel failed"));
                }
                let h = policy.choose(&points, kernel, config.n)?;
                let est = kde(&points, kernel, h, &eval_grid)?;
                let ise = truth.as_ref().map(|t| {
                    let sq: Vec<f64> = est.values.iter().zip(t).map(|(a, b)| (a - b).powi(2)).collect();
                    trapezoid(&eval_grid, &sq)
                });
                let mode_sq_errors = true_modes
                    .iter()
                    .filter_map(|&m| config.shifts.density(m).map(|d| (kde_at(&points, kernel, h, m) - d).powi(2)))
                    .collect();
                let modes = kde(&points, kernel, h, &default_x_grid(&points, h))?.modes(MODE_FRACTION).len();
                Ok(ReplicateDensity {
                    bandwidth: h,
                    ise,
                    mode_sq_errors,
                    modes,
                    failures,
                })
            })
            .collect();
        let mut failures = 0;
        let mut ok = Vec::with_capacity(reps.len());
        for r in reps {
            match r {
                Ok(d) => {
                    failures += d.failures;
                    ok.push(d);
                }
                Err(_) => failures += j,
            }
        }
        if ok.is_empty() {
            return Err(invalid(format!("every replicate failed for J = {j}")));
        }
        let count = ok.len() as f64;
        let mise = ok.iter().map(|d| d.ise).sum::<Option<f64>>().map(|s| s / count);
        let sq: Vec<f64> = ok.iter().flat_map(|d| d.mode_sq_errors.iter().copied()).collect();
        let pointwise_mse = (!sq.is_empty()).then(|| sq.iter().sum::<f64>() / sq.len() as f64);
        sweep.push(DensitySweepEntry {
            j,
            replicates: config.replicates,
            failures,
            mean_bandwidth: ok.iter().map(|d| d.bandwidth).sum::<f64>() / count,
            mise,
            pointwise_mse,
            mode_counts: ok.iter().map(|d| d.modes).collect(),
        });
    }
    let rate_slope = log_log_slope(&sweep);
    Ok(McDensityReport {
        n: config.n,
        true_modes,
        sweep,
        rate_slope,
    })
}

fn log_log_slope(sweep: &[DensitySweepEntry]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = sweep
        .iter()
        .filter_map(|e| e.pointwise_mse.filter(|&m| m > 0.0).map(|m| ((e.j as f64).ln(), m.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `|mu_hat g - mu g|` for one panel of `config.j` curves seeded by `config.seed`.
pub fn run_consistency_check<G: Fn(f64) -> f64 + Sync>(config: &McConfig, g: G) -> Result<f64> {
    config.validate()?;
    let signal = config.signal.build()?;
    let estimator = Prepared::new(config)?;
    let (points, _) = estimate_panel_shifts(&estimator, &signal, config, config.j, config.seed)?;
    if points.is_empty() {
        return Err(invalid("every curve in the panel failed"));
    }
    let plug_in = points.iter().map(|&p| g(p)).sum::<f64>() / points.len() as f64;
    Ok((plug_in - expectation(&config.shifts, &g)).abs())
}

/// `int g dmu` against the closed-form law.
pub fn expectation<G: Fn(f64) -> f64>(dist: &ShiftDistribution, g: &G) -> f64 {
    if let ShiftDistribution::PointMass { at } = dist {
        return g(*at);
    }
    let (lo, hi) = dist.support();
    let x = linspace(lo, hi, QUADRATURE_POINTS);
    let y: Vec<f64> = x.iter().map(|&x| g(x) * dist.density(x).unwrap_or(0.0)).collect();
    trapezoid(&x, &y)
}

/// Per-run outcome of the adaptive pipeline on single curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub truth: Vec<f64>,
    pub tau_star: Vec<f64>,
    pub selected_k: Vec<usize>,
    pub degenerate: usize,
    pub failures: usize,
    pub mesh: f64,
}

impl SelectionReport {
    /// Fraction of runs with `|tau* - theta| <= meshes * mesh`.
    pub fn hit_rate(&self, meshes: f64) -> f64 {
        let tol = meshes * self.mesh * (1.0 + 1e-9);
        let hits = self.tau_star.iter().zip(&self.truth).filter(|(a, b)| (*a - *b).abs() <= tol).count();
        hits as f64 / self.tau_star.len().max(1) as f64
    }

    pub fn k_rate(&self, lo: usize, hi: usize) -> f64 {
        let hits = self.selected_k.iter().filter(|&&k| (lo..=hi).contains(&k)).count();
        hits as f64 / self.selected_k.len().max(1) as f64
    }
}

/// Replicated single-curve runs of the adaptive estimator recording the
/// unrefined winner `tau*` and the selected filter length.
pub fn run_selection_study(config: &McConfig) -> Result<SelectionReport> {
    config.validate()?;
    let EstimatorChoice::Adaptive { beta, k_max, first_jump } = &config.estimator else {
        return Err(invalid("selection study needs the adaptive estimator"));
    };
    let mut ec = EstimatorConfig::new(config.tau_grid.clone())
        .with_beta(*beta)
        .with_first_jump(*first_jump);
    if let Some(top) = k_max {
        ec = ec.with_k_grid((1..=*top).collect());
    }
    let estimator = ShiftEstimator::new(ec, config.n)?;
    let signal = config.signal.build()?;
    let center = config.signal.center();
    let grid = TimeGrid::new(config.n)?;
    let outcomes: Vec<Result<(f64, f64, usize, bool)>> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let rep = derive_seed(config.seed, Stream::Replicate, r);
            let theta = config.shifts.sample(&mut stream_rng(rep, Stream::Shift, 0)) + center;
            let row = generate_curve(&signal, theta, config.sigma, grid, rep, 0);
            estimator.estimate(&row).map(|e| (theta, e.tau_star, e.selected_k, e.degenerate))
        })
        .collect();
    let mut report = SelectionReport {
        truth: Vec::new(),
        tau_star: Vec::new(),
        selected_k: Vec::new(),
        degenerate: 0,
        failures: 0,
        mesh: config.tau_grid.mesh(),
    };
    for o in outcomes {
        match o {
            Ok((theta, tau, k, flat)) => {
                report.truth.push(theta);
                report.tau_star.push(tau);
                report.selected_k.push(k);
                report.degenerate += usize::from(flat);
            }
            Err(_) => report.failures += 1,
        }
    }
    Ok(report)
}
