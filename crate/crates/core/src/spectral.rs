//! Trigonometric coefficients of sampled curves and the weighted contrast.
//!
//! For a row `Y_1..Y_n` on `t_i = i/n` the observed coefficients are
//!
//! ```text
//! x_k  = (1/n) sum_i sqrt(2) cos(2 pi k t_i) Y_i
//! x*_k = (1/n) sum_i sqrt(2) sin(2 pi k t_i) Y_i
//! ```
//!
//! and the contrast at a candidate shift `tau` is
//! `sum_k h_k (cos(2 pi k tau) x_k + sin(2 pi k tau) x*_k)^2`.

use std::cell::RefCell;
use std::f64::consts::{PI, SQRT_2};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimation::Filter;
use crate::signal::{Signal, TimeGrid};

const TWO_PI: f64 = 2.0 * PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Observed cosine/sine coefficients `x_k`, `x*_k` for `k = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl EmpiricalSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.cos.len()
    }

    /// `x_k`, 1-based.
    #[inline]
    pub fn cos_coeff(&self, k: usize) -> f64 {
        self.cos[k - 1]
    }

    /// `x*_k`, 1-based.
    #[inline]
    pub fn sin_coeff(&self, k: usize) -> f64 {
        self.sin[k - 1]
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }
}

pub(crate) fn check_nyquist(k: usize, n: usize) -> Result<()> {
    if n < 4 {
        return Err(invalid(format!("curves need at least 4 samples, got {n}")));
    }
    let bound = (n - 1) / 2;
    if k > bound {
        return Err(Error::NyquistExceeded {
            requested: k,
            bound,
            n,
        });
    }
    Ok(())
}

fn prepare_row(row: &[f64], k_max: usize, center: bool) -> Result<Vec<f64>> {
    check_nyquist(k_max, row.len())?;
    if k_max == 0 {
        return Err(invalid("harmonic cutoff must be at least 1"));
    }
    if row.iter().any(|v| !v.is_finite()) {
        return Err(invalid("curve contains non-finite values"));
    }
    let mut y = row.to_vec();
    if center {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        y.iter_mut().for_each(|v| *v -= mean);
    }
    Ok(y)
}

/// Coefficients of one row via a length-`n` FFT.
pub fn empirical_spectrum(row: &[f64], k_max: usize, center: bool) -> Result<EmpiricalSpectrum> {
    let y = prepare_row(row, k_max, center)?;
    let n = y.len();
    // Sample i sits at phase index i mod n, so Y_n goes to slot 0.
    let mut buf: Vec<Complex<f64>> = (0..n).map(|m| Complex::new(y[(m + n - 1) % n], 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    fft.process(&mut buf);
    let scale = SQRT_2 / n as f64;
    let cos = (1..=k_max).map(|k| scale * buf[k].re).collect();
    let sin = (1..=k_max).map(|k| -scale * buf[k].im).collect();
    Ok(EmpiricalSpectrum { n, cos, sin })
}

/// O(nK) summation with exact phase reduction `(k i) mod n`.
pub fn empirical_spectrum_direct(row: &[f64], k_max: usize, center: bool) -> Result<EmpiricalSpectrum> {
    let y = prepare_row(row, k_max, center)?;
    let n = y.len();
    let (ct, st) = phase_table(n);
    let scale = SQRT_2 / n as f64;
    let mut cos = Vec::with_capacity(k_max);
    let mut sin = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let (mut c, mut s) = (0.0, 0.0);
        for (idx, &v) in y.iter().enumerate() {
            let m = (k * (idx + 1)) % n;
            c += ct[m] * v;
            s += st[m] * v;
        }
        cos.push(scale * c);
        sin.push(scale * s);
    }
    Ok(EmpiricalSpectrum { n, cos, sin })
}

fn phase_table(n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|m| {
            let a = TWO_PI * m as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .unzip()
}

/// Discrete approximations `fhat_k`, `ghat_k` of the Fourier coefficients of
/// a shifted signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCoefficients {
    pub theta: f64,
    pub n: usize,
    pub fhat: Vec<f64>,
    pub ghat: Vec<f64>,
}

/// `fhat_k = (1/n) sum_i sqrt(2) cos(2 pi k (t_i - theta)) f(t_i - theta)`,
/// `ghat_k` with sine, for `k = 1..=k`.
pub fn discrete_signal_coefficients(signal: &Signal, theta: f64, n: usize, k: usize) -> Result<DiscreteCoefficients> {
    check_nyquist(k, n)?;
    let grid = TimeGrid::new(n)?;
    let samples: Vec<(f64, f64)> = (1..=n)
        .map(|i| {
            let u = grid.point(i) - theta;
            (u, signal.eval(u))
        })
        .collect();
    let scale = SQRT_2 / n as f64;
    let mut fhat = Vec::with_capacity(k);
    let mut ghat = Vec::with_capacity(k);
    for kk in 1..=k {
        let w = TWO_PI * kk as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for &(u, v) in &samples {
            c += (w * u).cos() * v;
            s += (w * u).sin() * v;
        }
        fhat.push(scale * c);
        ghat.push(scale * s);
    }
    Ok(DiscreteCoefficients { theta, n, fhat, ghat })
}

/// Discretization residuals `(d_k, d*_k)`: the noise-free `x_k` (resp. `x*_k`)
/// of the curve shifted by `theta` minus `cos(2 pi k theta) f_k`
/// (resp. `sin(2 pi k theta) f_k`).
pub fn discretization_residuals(signal: &Signal, theta: f64, n: usize, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_nyquist(k, n)?;
    let grid = TimeGrid::new(n)?;
    let row: Vec<f64> = (1..=n).map(|i| signal.eval(grid.point(i) - theta)).collect();
    let spec = empirical_spectrum_direct(&row, k, false)?;
    let coeffs = signal.spectrum();
    let (d, ds) = (1..=k)
        .map(|kk| {
            let a = TWO_PI * kk as f64 * theta;
            let fk = coeffs.coefficient(kk);
            (spec.cos_coeff(kk) - a.cos() * fk, spec.sin_coeff(kk) - a.sin() * fk)
        })
        .unzip();
    Ok((d, ds))
}

/// Contrast by direct double summation over samples and harmonics.
pub fn brute_force_criterion(row: &[f64], filter: &Filter, tau: f64) -> Result<f64> {
    let n = row.len();
    check_nyquist(filter.effective_len(), n)?;
    let grid = TimeGrid::new(n)?;
    let mut total = 0.0;
    for (idx, &h) in filter.weights().iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let w = TWO_PI * (idx + 1) as f64;
        let s: f64 = row
            .iter()
            .enumerate()
            .map(|(i, &y)| SQRT_2 * (w * (grid.point(i + 1) - tau)).cos() * y)
            .sum::<f64>()
            / n as f64;
        total += h * s * s;
    }
    Ok(total)
}

/// Contrast from precomputed coefficients, O(K) per `tau`.
pub fn criterion_from_spectrum(spectrum: &EmpiricalSpectrum, filter: &Filter, tau: f64) -> Result<f64> {
    let len = filter.effective_len();
    if len > spectrum.k_max() {
        return Err(invalid(format!(
            "filter uses {len} harmonics but the spectrum stops at {}",
            spectrum.k_max()
        )));
    }
    let mut total = 0.0;
    for (idx, &h) in filter.weights()[..len].iter().enumerate() {
        let a = TWO_PI * (idx + 1) as f64 * tau;
        let v = a.cos() * spectrum.cos[idx] + a.sin() * spectrum.sin[idx];
        total += h * v * v;
    }
    Ok(total)
}
