//! Signals, shift laws and synthetic panels of translated curves.
//!
//! A panel follows the translation model `Y_ij = f(t_i - theta_j) + sigma * eps_ij`
//! on the equispaced design `t_i = i / n`, where `f` is a symmetric 1-periodic
//! shape and the `theta_j` are i.i.d. draws from a [`ShiftDistribution`].
//!
//! Normal variates are produced by `rand_distr::StandardNormal` (ziggurat)
//! driven by a ChaCha8 stream keyed on `(seed, curve index)`, so a panel is a
//! pure function of its inputs regardless of how curves are scheduled.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed::{stream_rng, Stream};

const TWO_PI: f64 = 2.0 * PI;

/// Equispaced design `t_i = i / n`, `i = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    n: usize,
}

impl TimeGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("time grid needs at least one sample"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mesh(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// The `i`-th design point, 1-based.
    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.point(i)).collect()
    }

    /// Largest harmonic resolvable without aliasing, `floor((n - 1) / 2)`.
    pub fn nyquist(&self) -> usize {
        (self.n.saturating_sub(1)) / 2
    }
}

/// Symmetric 1-periodic signal given by its cosine coefficients:
/// `f(t) = f_0 + sqrt(2) * sum_k f_k cos(2 pi k t)`.
#[derive(Clone, PartialEq)]
pub struct CosineSignal {
    mean: f64,
    coeffs: Arc<[f64]>,
}

impl fmt::Debug for CosineSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<f64> = self.coeffs.iter().take(8).copied().collect();
        f.debug_struct("CosineSignal")
            .field("mean", &self.mean)
            .field("cutoff", &self.coeffs.len())
            .field("leading", &head)
            .finish()
    }
}

impl CosineSignal {
    /// Coefficients `f_1, f_2, ...` with zero mean term.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        Self::with_mean(0.0, coeffs)
    }

    pub fn with_mean(mean: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !mean.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("signal coefficients must be finite"));
        }
        Ok(Self {
            mean,
            coeffs: coeffs.into(),
        })
    }

    pub fn zero() -> Self {
        Self {
            mean: 0.0,
            coeffs: Arc::from(Vec::new()),
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Harmonic cutoff `K_f`, the number of stored coefficients.
    pub fn cutoff(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `f_k` for `k >= 1`, zero beyond the cutoff.
    #[inline]
    pub fn coefficient(&self, k: usize) -> f64 {
        if k == 0 {
            return self.mean;
        }
        self.coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (TWO_PI * (i + 1) as f64 * t).cos())
            .sum();
        self.mean + SQRT_2 * s
    }

    /// `||f'||^2 = sum_k (2 pi k)^2 f_k^2`.
    pub fn deriv_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let w = TWO_PI * (i + 1) as f64;
                w * w * c * c
            })
            .sum()
    }
}

/// Free function form of [`CosineSignal::eval`].
pub fn eval_signal(signal: &CosineSignal, t: f64) -> f64 {
    signal.eval(t)
}

const HALF_SINE_TRUNCATION: f64 = 1e-14;

/// Centered half-sine arch `|sin(pi t)| - 2/pi` as a cosine series.
///
/// Coefficients are `f_k = -(2 sqrt(2) / pi) / (4k^2 - 1)`, kept while
/// `|f_k| >= 1e-14`. Roughly 4.7 million terms; the coefficient buffer is
/// built once and shared.
pub fn half_sine_signal() -> CosineSignal {
    use std::sync::OnceLock;
    static CACHE: OnceLock<CosineSignal> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let lead = 2.0 * SQRT_2 / PI;
            let mut coeffs = Vec::new();
            let mut k = 1usize;
            loop {
                let kf = k as f64;
                let fk = -lead / (4.0 * kf * kf - 1.0);
                if fk.abs() < HALF_SINE_TRUNCATION {
                    break;
                }
                coeffs.push(fk);
                k += 1;
            }
            CosineSignal {
                mean: 0.0,
                coeffs: coeffs.into(),
            }
        })
        .clone()
}

type SignalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A closed-form periodic, even signal together with its cosine coefficients
/// up to a harmonic cutoff.
#[derive(Clone)]
pub struct SampledSignal {
    name: String,
    func: SignalFn,
    spectrum: CosineSignal,
}

impl fmt::Debug for SampledSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledSignal")
            .field("name", &self.name)
            .field("cutoff", &self.spectrum.cutoff())
            .finish()
    }
}

const PROBE_POINTS: usize = 1024;
const PROBE_RTOL: f64 = 1e-9;

impl SampledSignal {
    /// Wraps `func`, checking 1-periodicity and evenness on a probe grid, and
    /// computes coefficients up to `cutoff` by periodic trapezoid quadrature.
    pub fn new<F>(name: impl Into<String>, func: F, cutoff: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let func: SignalFn = Arc::new(func);
        check_symmetry(&func)?;
        let spectrum = quadrature_coefficients(&func, cutoff)?;
        Ok(Self {
            name: name.into(),
            func,
            spectrum,
        })
    }

    /// Like [`SampledSignal::new`] with known coefficients.
    pub fn with_coefficients<F>(name: impl Into<String>, func: F, spectrum: CosineSignal) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let func: SignalFn = Arc::new(func);
        check_symmetry(&func)?;
        Ok(Self {
            name: name.into(),
            func,
            spectrum,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.func)(t)
    }

    pub fn spectrum(&self) -> &CosineSignal {
        &self.spectrum
    }
}

fn check_symmetry(func: &SignalFn) -> Result<()> {
    let probes: Vec<f64> = (0..PROBE_POINTS)
        .map(|m| -1.0 + 2.0 * (m as f64 + 0.371) / PROBE_POINTS as f64)
        .collect();
    let mut scale = 0.0f64;
    for &t in &probes {
        let v = func(t);
        if !v.is_finite() {
            return Err(invalid(format!("signal is not finite at t = {t}")));
        }
        scale = scale.max(v.abs());
    }
    let tol = PROBE_RTOL * scale.max(f64::MIN_POSITIVE);
    for &t in &probes {
        let v = func(t);
        let even = (v - func(-t)).abs();
        let periodic = (v - func(t + 1.0)).abs();
        if even > tol {
            return Err(invalid(format!(
                "signal is not even: |f({t}) - f({})| = {even:e}",
                -t
            )));
        }
        if periodic > tol {
            return Err(invalid(format!(
                "signal is not 1-periodic: |f({t}) - f({})| = {periodic:e}",
                t + 1.0
            )));
        }
    }
    Ok(())
}

fn quadrature_coefficients(func: &SignalFn, cutoff: usize) -> Result<CosineSignal> {
    let nodes = (16 * cutoff).max(4096);
    let values: Vec<f64> = (0..nodes).map(|m| func(m as f64 / nodes as f64)).collect();
    let mean = values.iter().sum::<f64>() / nodes as f64;
    let coeffs = (1..=cutoff)
        .map(|k| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(m, &v)| v * (TWO_PI * ((k * m) % nodes) as f64 / nodes as f64).cos())
                .sum();
            SQRT_2 * s / nodes as f64
        })
        .collect();
    CosineSignal::with_mean(mean, coeffs)
}

/// A curve shape usable for panel generation.
#[derive(Debug, Clone)]
pub enum Signal {
    Cosine(CosineSignal),
    Sampled(SampledSignal),
}

impl Signal {
    /// `sqrt(2) cos(2 pi t)`, i.e. `f_1 = 1`.
    pub fn single_harmonic() -> Self {
        Signal::Cosine(CosineSignal {
            mean: 0.0,
            coeffs: Arc::from(vec![1.0]),
        })
    }

    /// Closed-form `|sin(pi t)| - 2/pi` paired with its analytic coefficients.
    pub fn half_sine() -> Self {
        let s = SampledSignal::with_coefficients(
            "half-sine",
            |t: f64| (PI * t).sin().abs() - 2.0 / PI,
            half_sine_signal(),
        )
        .expect("half-sine is even and periodic");
        Signal::Sampled(s)
    }

    /// Laser-vibrometry shape `a * cos(b * cos(pi t))`.
    pub fn laser(amplitude: f64, frequency: f64) -> Result<Self> {
        if !amplitude.is_finite() || !frequency.is_finite() || frequency < 0.0 {
            return Err(invalid("laser amplitude and frequency must be finite, frequency >= 0"));
        }
        // Coefficients are a * sqrt(2) * (-1)^k * J_{2k}(b), negligible past 2k ~ b + 60.
        let cutoff = ((frequency / 2.0).ceil() as usize + 40).max(8);
        let s = SampledSignal::new(
            format!("laser(a={amplitude}, b={frequency})"),
            move |t: f64| amplitude * (frequency * (PI * t).cos()).cos(),
            cutoff,
        )?;
        Ok(Signal::Sampled(s))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Cosine(c) => c.eval(t),
            Signal::Sampled(s) => s.eval(t),
        }
    }

    /// Cosine coefficients used for spectral diagnostics.
    pub fn spectrum(&self) -> &CosineSignal {
        match self {
            Signal::Cosine(c) => c,
            Signal::Sampled(s) => s.spectrum(),
        }
    }
}

impl From<CosineSignal> for Signal {
    fn from(c: CosineSignal) -> Self {
        Signal::Cosine(c)
    }
}

/// Law of the random translations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShiftDistribution {
    Uniform { lo: f64, hi: f64 },
    /// `(1/w) cos^2(pi (x - c) / (2w))` on `|x - c| <= w`.
    CosineBump { center: f64, half_width: f64 },
    /// Two-component mixture of cosine bumps with common half-width.
    BimodalCosine {
        centers: [f64; 2],
        half_width: f64,
        weights: [f64; 2],
    },
    PointMass { at: f64 },
}

impl ShiftDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("uniform shift law needs lo < hi"));
        }
        Self::Uniform { lo, hi }.validated()
    }

    pub fn cosine_bump(center: f64, half_width: f64) -> Result<Self> {
        if !(center.is_finite() && half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("cosine bump needs a finite center and positive half-width"));
        }
        Self::CosineBump { center, half_width }.validated()
    }

    pub fn bimodal(centers: [f64; 2], half_width: f64, weights: [f64; 2]) -> Result<Self> {
        if centers[0] == centers[1] {
            return Err(invalid("bimodal shift law needs two distinct centers"));
        }
        if !(half_width.is_finite() && half_width > 0.0) || centers.iter().any(|c| !c.is_finite()) {
            return Err(invalid("bimodal centers must be finite with positive half-width"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(invalid("bimodal weights must be positive"));
        }
        let total = weights[0] + weights[1];
        Self::BimodalCosine {
            centers,
            half_width,
            weights: [weights[0] / total, weights[1] / total],
        }
        .validated()
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        if !at.is_finite() {
            return Err(invalid("point mass location must be finite"));
        }
        Ok(Self::PointMass { at })
    }

    /// The two-bump mixture `0.5 q(.; -0.1, 0.08) + 0.5 q(.; 0.1, 0.08)`.
    pub fn bimodal_preset() -> Self {
        Self::bimodal([-0.1, 0.1], 0.08, [0.5, 0.5]).expect("preset is valid")
    }

    fn validated(self) -> Result<Self> {
        let (lo, hi) = self.support();
        if hi - lo > 0.5 + 1e-12 {
            return Err(invalid(format!(
                "shift support [{lo}, {hi}] has diameter above 1/2"
            )));
        }
        Ok(self)
    }

    /// Closed interval containing all the mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } => (lo, hi),
            Self::CosineBump { center, half_width } => (center - half_width, center + half_width),
            Self::BimodalCosine {
                centers, half_width, ..
            } => (
                centers[0].min(centers[1]) - half_width,
                centers[0].max(centers[1]) + half_width,
            ),
            Self::PointMass { at } => (at, at),
        }
    }

    /// Bound `tau_0` with support inside `[-tau_0, tau_0]`.
    pub fn tau0(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// Density; `None` for the point mass.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Uniform { lo, hi } => Some(if (lo..=hi).contains(&x) { 1.0 / (hi - lo) } else { 0.0 }),
            Self::CosineBump { center, half_width } => Some(bump_density(x, center, half_width)),
            Self::BimodalCosine {
                centers,
                half_width,
                weights,
            } => Some(
                weights[0] * bump_density(x, centers[0], half_width)
                    + weights[1] * bump_density(x, centers[1], half_width),
            ),
            Self::PointMass { .. } => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::CosineBump { center, half_width } => bump_cdf(x, center, half_width),
            Self::BimodalCosine {
                centers,
                half_width,
                weights,
            } => weights[0] * bump_cdf(x, centers[0], half_width) + weights[1] * bump_cdf(x, centers[1], half_width),
            Self::PointMass { at } => {
                if x >= at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::CosineBump { center, .. } => center,
            Self::BimodalCosine { centers, weights, .. } => weights[0] * centers[0] + weights[1] * centers[1],
            Self::PointMass { at } => at,
        }
    }

    /// Locations of the density maxima (empty for the uniform law).
    pub fn modes(&self) -> Vec<f64> {
        match *self {
            Self::Uniform { .. } => Vec::new(),
            Self::CosineBump { center, .. } => vec![center],
            Self::BimodalCosine { centers, .. } => {
                let mut c = centers.to_vec();
                c.sort_by(f64::total_cmp);
                c
            }
            Self::PointMass { at } => vec![at],
        }
    }

    /// One draw by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Self::CosineBump { center, half_width } => {
                let u: f64 = rng.random();
                center + half_width * bump_quantile(u)
            }
            Self::BimodalCosine {
                centers,
                half_width,
                weights,
            } => {
                let pick: f64 = rng.random();
                let u: f64 = rng.random();
                let c = if pick < weights[0] { centers[0] } else { centers[1] };
                c + half_width * bump_quantile(u)
            }
            Self::PointMass { at } => at,
        }
    }
}

fn bump_density(x: f64, c: f64, w: f64) -> f64 {
    let u = x - c;
    if u.abs() > w {
        return 0.0;
    }
    let v = (PI * u / (2.0 * w)).cos();
    v * v / w
}

/// Standardized bump CDF on `s in [-1, 1]`: `1/2 + s/2 + sin(pi s) / (2 pi)`.
fn bump_cdf_std(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        0.5 + 0.5 * s + (PI * s).sin() / (2.0 * PI)
    }
}

fn bump_cdf(x: f64, c: f64, w: f64) -> f64 {
    bump_cdf_std((x - c) / w)
}

fn bump_quantile(u: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if bump_cdf_std(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `J` i.i.d. shifts; draw `j` uses its own stream keyed on `(seed, j)`.
pub fn sample_shifts(dist: &ShiftDistribution, j: usize, seed: u64) -> Result<Vec<f64>> {
    if j == 0 {
        return Err(invalid("number of shifts J must be at least 1"));
    }
    Ok((0..j)
        .into_par_iter()
        .map(|idx| dist.sample(&mut stream_rng(seed, Stream::Shift, idx as u64)))
        .collect())
}

/// `J` noisy translated curves sampled on a common design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePanel {
    grid: TimeGrid,
    rows: Vec<Vec<f64>>,
    sigma: f64,
    shifts: Option<Vec<f64>>,
}

impl CurvePanel {
    pub fn new(grid: TimeGrid, rows: Vec<Vec<f64>>, sigma: f64, shifts: Option<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("a panel needs at least one curve"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid("sigma must be finite and nonnegative"));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != grid.n() {
                return Err(invalid(format!(
                    "curve {} has {} samples, expected {}",
                    j + 1,
                    row.len(),
                    grid.n()
                )));
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(invalid(format!("curve {} has a non-finite value at sample {}", j + 1, i + 1)));
            }
        }
        if let Some(s) = &shifts {
            if s.len() != rows.len() {
                return Err(invalid("shift count does not match curve count"));
            }
        }
        Ok(Self {
            grid,
            rows,
            sigma,
            shifts,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn curves(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn shifts(&self) -> Option<&[f64]> {
        self.shifts.as_deref()
    }
}

fn check_generation_args(sigma: f64, n: usize) -> Result<()> {
    if n < 4 {
        return Err(invalid(format!("panels need n >= 4 samples per curve, got {n}")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid("sigma must be finite and nonnegative"));
    }
    Ok(())
}

/// One curve `f(t_i - theta) + sigma * eps_i`, noise keyed on `(seed, index)`.
pub fn generate_curve(signal: &Signal, theta: f64, sigma: f64, grid: TimeGrid, seed: u64, index: u64) -> Vec<f64> {
    let mut row: Vec<f64> = (1..=grid.n()).map(|i| signal.eval(grid.point(i) - theta)).collect();
    if sigma > 0.0 {
        let mut rng = stream_rng(seed, Stream::Noise, index);
        for v in &mut row {
            let eps: f64 = rng.sample(StandardNormal);
            *v += sigma * eps;
        }
    }
    row
}

/// Panel with shifts drawn from `dist`.
pub fn generate_panel(
    signal: &Signal,
    dist: &ShiftDistribution,
    sigma: f64,
    n: usize,
    j: usize,
    seed: u64,
) -> Result<CurvePanel> {
    check_generation_args(sigma, n)?;
    let shifts = sample_shifts(dist, j, seed)?;
    generate_panel_with_shifts(std::slice::from_ref(signal), &shifts, sigma, n, seed)
}

/// Panel with prescribed shifts. `signals` holds either one common shape or
/// one shape per curve.
pub fn generate_panel_with_shifts(
    signals: &[Signal],
    shifts: &[f64],
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<CurvePanel> {
    check_generation_args(sigma, n)?;
    if shifts.is_empty() {
        return Err(invalid("at least one shift is required"));
    }
    if signals.len() != 1 && signals.len() != shifts.len() {
        return Err(invalid("provide one common signal or one signal per curve"));
    }
    if shifts.iter().any(|s| !s.is_finite()) {
        return Err(invalid("shifts must be finite"));
    }
    let grid = TimeGrid::new(n)?;
    let rows: Vec<Vec<f64>> = shifts
        .par_iter()
        .enumerate()
        .map(|(j, &theta)| {
            let signal = if signals.len() == 1 { &signals[0] } else { &signals[j] };
            generate_curve(signal, theta, sigma, grid, seed, j as u64)
        })
        .collect();
    CurvePanel::new(grid, rows, sigma, Some(shifts.to_vec()))
}

/// Quantities entering the signal-class assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalClassDiagnostics {
    pub f1_squared: f64,
    pub second_deriv_norm_sq: f64,
    pub sum_k2_abs_fk: f64,
    pub deriv_norm_sq: f64,
}

impl SignalClassDiagnostics {
    /// Fisher information `I_n(f) = n ||f'||^2`.
    pub fn fisher_information(&self, n: usize) -> f64 {
        n as f64 * self.deriv_norm_sq
    }
}

pub fn signal_class_diagnostics(signal: &CosineSignal) -> SignalClassDiagnostics {
    let mut out = SignalClassDiagnostics {
        f1_squared: signal.coefficient(1).powi(2),
        second_deriv_norm_sq: 0.0,
        sum_k2_abs_fk: 0.0,
        deriv_norm_sq: 0.0,
    };
    for (i, &c) in signal.coefficients().iter().enumerate() {
        let k = (i + 1) as f64;
        let w2 = (TWO_PI * k).powi(2);
        out.deriv_norm_sq += w2 * c * c;
        out.second_deriv_norm_sq += w2 * w2 * c * c;
        out.sum_k2_abs_fk += k * k * c.abs();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_points() {
        let g = TimeGrid::new(8).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 8);
        assert_eq!(*p.last().unwrap(), 1.0);
        for w in p.windows(2) {
            assert!((w[1] - w[0] - 0.125).abs() < 1e-15);
        }
        assert_eq!(g.nyquist(), 3);
        assert!(TimeGrid::new(0).is_err());
    }

    #[test]
    fn eval_single_harmonic() {
        let s = CosineSignal::new(vec![1.0]).unwrap();
        assert!((s.eval(0.0) - SQRT_2).abs() < 1e-15);
        assert!(s.eval(0.25).abs() < 1e-15);
    }

    #[test]
    fn eval_two_terms_matches_direct_sum() {
        let s = CosineSignal::new(vec![0.5, 0.25]).unwrap();
        // f(0.1) = sqrt2 (0.5 cos(0.2 pi) + 0.25 cos(0.4 pi)), evaluated term by term.
        let expected = SQRT_2 * (0.5 * 0.809_016_994_374_947_4 + 0.25 * 0.309_016_994_374_947_45);
        assert!((s.eval(0.1) - expected).abs() < 1e-14);
    }

    #[test]
    fn half_sine_coefficients() {
        let s = half_sine_signal();
        assert!((s.coefficient(1) + 0.300105).abs() < 1e-6);
        assert!((s.coefficient(1) + (2.0 * SQRT_2 / PI) / 3.0).abs() < 1e-15);
        let d = signal_class_diagnostics(&s);
        assert!((d.deriv_norm_sq - PI * PI / 2.0).abs() < 1e-6, "{}", d.deriv_norm_sq);
        assert!(s.coefficients().iter().all(|c| c.abs() >= HALF_SINE_TRUNCATION));
    }

    #[test]
    fn diagnostics_single_term() {
        let d = signal_class_diagnostics(&CosineSignal::new(vec![1.0]).unwrap());
        assert_eq!(d.f1_squared, 1.0);
        assert!((d.deriv_norm_sq - TWO_PI.powi(2)).abs() < 1e-12);
        assert!((d.second_deriv_norm_sq - TWO_PI.powi(4)).abs() < 1e-9);
        assert_eq!(d.sum_k2_abs_fk, 1.0);
        let z = signal_class_diagnostics(&CosineSignal::zero());
        assert_eq!(z.deriv_norm_sq, 0.0);
        assert_eq!(z.second_deriv_norm_sq, 0.0);
        assert_eq!(z.sum_k2_abs_fk, 0.0);
        assert_eq!(z.f1_squared, 0.0);
    }

    #[test]
    fn sampled_signal_rejects_asymmetric() {
        assert!(SampledSignal::new("odd", |t: f64| (2.0 * PI * t).sin(), 4).is_err());
        assert!(SampledSignal::new("aperiodic", |t: f64| (PI * t).cos().powi(2) + t * t, 4).is_err());
        let ok = SampledSignal::new("cos", |t: f64| SQRT_2 * (2.0 * PI * t).cos(), 4).unwrap();
        assert!((ok.spectrum().coefficient(1) - 1.0).abs() < 1e-12);
        assert!(ok.spectrum().coefficient(2).abs() < 1e-12);
    }

    #[test]
    fn laser_coefficients_match_closed_form() {
        let Signal::Sampled(s) = Signal::laser(1.0, 100.0).unwrap() else {
            panic!("laser is sampled")
        };
        // Reconstruct from coefficients at a few points.
        for &t in &[0.0, 0.123, 0.35, 0.5] {
            let approx = s.spectrum().eval(t);
            assert!((approx - s.eval(t)).abs() < 1e-9, "t={t}: {approx} vs {}", s.eval(t));
        }
    }

    #[test]
    fn half_sine_preset_closed_form_matches_series() {
        let series = half_sine_signal();
        let shape = Signal::half_sine();
        for &t in &[0.0, 0.1, 0.3, 0.5] {
            assert!((series.eval(t) - shape.eval(t)).abs() < 1e-7);
        }
        assert!((shape.eval(0.5) - shape.eval(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn shift_distribution_constructors() {
        assert!(ShiftDistribution::bimodal([0.1, 0.1], 0.05, [1.0, 1.0]).is_err());
        assert!(ShiftDistribution::uniform(0.2, 0.1).is_err());
        assert!(ShiftDistribution::uniform(-0.3, 0.3).is_err());
        let b = ShiftDistribution::bimodal_preset();
        assert_eq!(b.support(), (-0.18, 0.18));
        assert!((b.tau0() - 0.18).abs() < 1e-15);
        assert_eq!(b.modes(), vec![-0.1, 0.1]);
    }

    #[test]
    fn bimodal_density_integrates_to_one() {
        let b = ShiftDistribution::bimodal_preset();
        let tau0 = b.tau0();
        let nodes = 100_000;
        let h = 2.0 * tau0 / (nodes - 1) as f64;
        let mut s = 0.0;
        for i in 0..nodes {
            let x = -tau0 + i as f64 * h;
            let w = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
            s += w * b.density(x).unwrap();
        }
        assert!((s * h - 1.0).abs() < 1e-8, "{}", s * h);
        assert!((b.cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(b.cdf(0.2), 1.0);
    }

    #[test]
    fn sample_shifts_contracts() {
        let pm = ShiftDistribution::point_mass(0.1).unwrap();
        assert_eq!(sample_shifts(&pm, 3, 1).unwrap(), vec![0.1, 0.1, 0.1]);
        assert!(sample_shifts(&pm, 0, 1).is_err());
        let b = ShiftDistribution::bimodal_preset();
        assert_eq!(sample_shifts(&b, 50, 9).unwrap(), sample_shifts(&b, 50, 9).unwrap());
        let big = sample_shifts(&b, 100_000, 42).unwrap();
        let mean = big.iter().sum::<f64>() / big.len() as f64;
        assert!(mean.abs() < 0.002, "{mean}");
        assert!(big.iter().all(|x| x.abs() <= 0.18));
    }

    #[test]
    fn noise_free_panel_equals_signal() {
        let s = Signal::Cosine(CosineSignal::new(vec![0.7, -0.2]).unwrap());
        let pm = ShiftDistribution::point_mass(0.0).unwrap();
        let p = generate_panel(&s, &pm, 0.0, 16, 2, 3).unwrap();
        for row in p.rows() {
            for (i, &v) in row.iter().enumerate() {
                assert_eq!(v, s.eval((i + 1) as f64 / 16.0));
            }
        }
        assert!(generate_panel(&s, &pm, 0.0, 3, 2, 3).is_err());
    }

    #[test]
    fn illustration_and_sim1_shapes() {
        let laser = Signal::laser(0.015, 100.0).unwrap();
        let p = generate_panel(&laser, &ShiftDistribution::point_mass(0.35).unwrap(), 1.0, 800, 1, 1).unwrap();
        assert_eq!((p.n(), p.curves()), (800, 1));
        let p = generate_panel(&Signal::half_sine(), &ShiftDistribution::bimodal_preset(), 0.1, 100, 50, 1).unwrap();
        assert_eq!((p.n(), p.curves()), (100, 50));
    }
}
