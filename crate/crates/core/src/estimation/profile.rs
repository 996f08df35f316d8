use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::TauGrid;
use crate::error::{invalid, Result};
use crate::spectral::EmpiricalSpectrum;

const TWO_PI: f64 = 2.0 * PI;

/// Per-length maxima `M(K)` of the Pinsker contrast and their locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionProfile {
    pub k_grid: Vec<usize>,
    pub beta: f64,
    /// `M(K)`, aligned with `k_grid`.
    pub m_max: Vec<f64>,
    /// Grid index of `tau_hat(K)`.
    pub tau_hat_index: Vec<usize>,
    /// `tau_hat(K)` as a grid value.
    pub tau_hat: Vec<f64>,
}

impl CriterionProfile {
    pub fn len(&self) -> usize {
        self.k_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_grid.is_empty()
    }

    /// True when all `M(K)` coincide, e.g. for an all-zero curve.
    pub fn is_flat(&self) -> bool {
        self.m_max.iter().all(|&m| m == self.m_max[0])
    }
}

/// Precomputed phases for evaluating Pinsker contrasts of many lengths on a
/// fixed shift grid.
///
/// With `c_k(tau) = (cos(2 pi k tau) x_k + sin(2 pi k tau) x*_k)^2`, the
/// contrast of length `K` is `S0_{K-1}(tau) - K^{-beta} S_{K-1}(tau)` where
/// `S0_j = sum_{k<=j} c_k` and `S_j = sum_{k<=j} k^beta c_k`, so the whole
/// profile costs one pass over harmonics per grid point.
#[derive(Debug, Clone)]
pub struct ProfilePlan {
    grid: TauGrid,
    k_grid: Vec<usize>,
    beta: f64,
    harmonics: usize,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
    k_pow: Vec<f64>,
    inv_len_pow: Vec<f64>,
}

impl ProfilePlan {
    pub fn new(grid: TauGrid, k_grid: Vec<usize>, beta: f64) -> Result<Self> {
        if k_grid.is_empty() {
            return Err(invalid("filter length grid is empty"));
        }
        if k_grid[0] == 0 || k_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("filter lengths must be positive and strictly increasing"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid("Pinsker exponent beta must be positive"));
        }
        let harmonics = k_grid[k_grid.len() - 1] - 1;
        let m = grid.len();
        let mut cos_table = Vec::with_capacity(m * harmonics);
        let mut sin_table = Vec::with_capacity(m * harmonics);
        for &tau in grid.points() {
            for k in 1..=harmonics {
                let a = TWO_PI * k as f64 * tau;
                cos_table.push(a.cos());
                sin_table.push(a.sin());
            }
        }
        let k_pow = (1..=harmonics).map(|k| (k as f64).powf(beta)).collect();
        let inv_len_pow = k_grid.iter().map(|&k| (k as f64).powf(-beta)).collect();
        Ok(Self {
            grid,
            k_grid,
            beta,
            harmonics,
            cos_table,
            sin_table,
            k_pow,
            inv_len_pow,
        })
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn k_grid(&self) -> &[usize] {
        &self.k_grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Highest harmonic any filter in the plan touches.
    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn profile(&self, spectrum: &EmpiricalSpectrum) -> Result<CriterionProfile> {
        if self.harmonics > spectrum.k_max() {
            return Err(invalid(format!(
                "filter lengths up to {} need {} harmonics, spectrum has {}",
                self.harmonics + 1,
                self.harmonics,
                spectrum.k_max()
            )));
        }
        let nk = self.k_grid.len();
        let mut m_max = vec![f64::NEG_INFINITY; nk];
        let mut arg = vec![0usize; nk];
        let x = &spectrum.cos_coeffs()[..self.harmonics];
        let xs = &spectrum.sin_coeffs()[..self.harmonics];
        let mut plain = vec![0.0; self.harmonics + 1];
        let mut powered = vec![0.0; self.harmonics + 1];
        for ti in 0..self.grid.len() {
            let row = ti * self.harmonics;
            let ct = &self.cos_table[row..row + self.harmonics];
            let st = &self.sin_table[row..row + self.harmonics];
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..self.harmonics {
                let v = ct[k] * x[k] + st[k] * xs[k];
                let c = v * v;
                a += c;
                b += self.k_pow[k] * c;
                plain[k + 1] = a;
                powered[k + 1] = b;
            }
            for (idx, &len) in self.k_grid.iter().enumerate() {
                let j = len - 1;
                let value = plain[j] - self.inv_len_pow[idx] * powered[j];
                if value > m_max[idx] {
                    m_max[idx] = value;
                    arg[idx] = ti;
                }
            }
        }
        let tau_hat = arg.iter().map(|&i| self.grid.point(i)).collect();
        Ok(CriterionProfile {
            k_grid: self.k_grid.clone(),
            beta: self.beta,
            m_max,
            tau_hat_index: arg,
            tau_hat,
        })
    }
}

/// Builds the Pinsker filter of every length in `k_grid`, evaluates it on the
/// shift grid and records `M(K)` and `tau_hat(K)`; argmax ties go to the
/// smallest grid index.
pub fn criterion_profile(
    spectrum: &EmpiricalSpectrum,
    tau_grid: &TauGrid,
    k_grid: &[usize],
    beta: f64,
) -> Result<CriterionProfile> {
    ProfilePlan::new(tau_grid.clone(), k_grid.to_vec(), beta)?.profile(spectrum)
}
