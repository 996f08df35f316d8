use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::Filter;
use super::grid::TauGrid;
use super::hull::{hull_path, HullPath};
use super::profile::{CriterionProfile, ProfilePlan};
use super::select::{select_shift_with, FirstJump};
use crate::error::{invalid, Result};
use crate::signal::CurvePanel;
use crate::spectral::{check_nyquist, criterion_from_spectrum, empirical_spectrum, EmpiricalSpectrum};

/// Default Pinsker exponent.
pub const DEFAULT_BETA: f64 = 3.0;
/// Default cap on the longest filter.
pub const DEFAULT_MAX_LENGTH: usize = 200;
/// Default number of shift grid points.
pub const DEFAULT_GRID_POINTS: usize = 100;

/// Settings of the adaptive estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub tau_grid: TauGrid,
    /// Filter lengths; `None` means `1..=min(floor((n-1)/2), 200)`.
    pub k_grid: Option<Vec<usize>>,
    pub beta: f64,
    pub refine: bool,
    pub first_jump: FirstJump,
    /// Subtract the empirical mean before taking coefficients.
    pub center: bool,
}

impl EstimatorConfig {
    pub fn new(tau_grid: TauGrid) -> Self {
        Self {
            tau_grid,
            k_grid: None,
            beta: DEFAULT_BETA,
            refine: false,
            first_jump: FirstJump::Discard,
            center: true,
        }
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    pub fn with_k_grid(mut self, k_grid: Vec<usize>) -> Self {
        self.k_grid = Some(k_grid);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_first_jump(mut self, first_jump: FirstJump) -> Self {
        self.first_jump = first_jump;
        self
    }

    pub fn default_k_grid(n: usize) -> Vec<usize> {
        let top = ((n.saturating_sub(1)) / 2).clamp(1, DEFAULT_MAX_LENGTH);
        (1..=top).collect()
    }

    pub fn resolved_k_grid(&self, n: usize) -> Vec<usize> {
        self.k_grid.clone().unwrap_or_else(|| Self::default_k_grid(n))
    }
}

/// Result of the adaptive pipeline on one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEstimate {
    /// Winning grid point.
    pub tau_star: f64,
    pub tau_index: usize,
    /// Sub-mesh value from parabolic refinement, when requested.
    pub refined: Option<f64>,
    pub selected_k: usize,
    /// All `M(K)` were equal; `tau_star` is the first grid point.
    pub degenerate: bool,
    pub profile: CriterionProfile,
    pub hull: HullPath,
}

impl ShiftEstimate {
    /// Refined value when available, else the grid value.
    pub fn value(&self) -> f64 {
        self.refined.unwrap_or(self.tau_star)
    }

    /// `M` at the selected length.
    pub fn selected_m(&self) -> f64 {
        self.profile
            .k_grid
            .iter()
            .position(|&k| k == self.selected_k)
            .map_or(f64::NAN, |i| self.profile.m_max[i])
    }
}

/// Adaptive estimator bound to a curve length, reusable across curves.
#[derive(Debug, Clone)]
pub struct ShiftEstimator {
    config: EstimatorConfig,
    plan: ProfilePlan,
    n: usize,
}

impl ShiftEstimator {
    pub fn new(config: EstimatorConfig, n: usize) -> Result<Self> {
        let k_grid = config.resolved_k_grid(n);
        let top = *k_grid.last().ok_or_else(|| invalid("filter length grid is empty"))?;
        check_nyquist(top, n)?;
        let plan = ProfilePlan::new(config.tau_grid.clone(), k_grid, config.beta)?;
        Ok(Self { config, plan, n })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn estimate(&self, row: &[f64]) -> Result<ShiftEstimate> {
        if row.len() != self.n {
            return Err(invalid(format!("curve has {} samples, estimator expects {}", row.len(), self.n)));
        }
        let spectrum = empirical_spectrum(row, self.plan.harmonics().max(1), self.config.center)?;
        let profile = self.plan.profile(&spectrum)?;
        let hull = hull_path(&profile)?;
        let grid = &self.config.tau_grid;
        let degenerate = profile.is_flat();
        let (tau_index, selected_k) = if degenerate {
            (0, profile.k_grid[0])
        } else {
            let s = select_shift_with(&profile, &hull, self.config.first_jump);
            (s.tau_index, s.selected_k)
        };
        let tau_star = grid.point(tau_index);
        let refined = if self.config.refine {
            let filter = Filter::pinsker(selected_k, self.config.beta)?;
            Some(refine_vertex(&spectrum, &filter, grid, tau_star)?)
        } else {
            None
        };
        Ok(ShiftEstimate {
            tau_star,
            tau_index,
            refined,
            selected_k,
            degenerate,
            profile,
            hull,
        })
    }

    /// Curves estimated independently; output order matches input order.
    pub fn estimate_panel(&self, panel: &CurvePanel) -> Vec<Result<ShiftEstimate>> {
        panel.rows().par_iter().map(|row| self.estimate(row)).collect()
    }
}

/// Center, transform, profile, hull, vote, and optionally refine.
pub fn estimate_shift(row: &[f64], config: &EstimatorConfig) -> Result<ShiftEstimate> {
    ShiftEstimator::new(config.clone(), row.len())?.estimate(row)
}

/// Per-curve results, in curve order; failures do not abort the batch.
pub fn estimate_shifts_panel(panel: &CurvePanel, config: &EstimatorConfig) -> Result<Vec<Result<ShiftEstimate>>> {
    let est = ShiftEstimator::new(config.clone(), panel.n())?;
    Ok(est.estimate_panel(panel))
}

/// Argmax over the grid of a fixed-filter contrast, optionally refined.
pub fn estimate_shift_fixed_filter(row: &[f64], filter: &Filter, tau_grid: &TauGrid, refine: bool) -> Result<f64> {
    let len = filter.effective_len().max(1);
    let spectrum = empirical_spectrum(row, len, true)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0;
    for (i, &tau) in tau_grid.points().iter().enumerate() {
        let v = criterion_from_spectrum(&spectrum, filter, tau)?;
        if v > best {
            best = v;
            best_at = i;
        }
    }
    let tau = tau_grid.point(best_at);
    if refine {
        refine_vertex(&spectrum, filter, tau_grid, tau)
    } else {
        Ok(tau)
    }
}

/// Vertex of the parabola through the contrast at `tau - mesh`, `tau`,
/// `tau + mesh`, clamped to one mesh around `tau`.
pub(crate) fn refine_vertex(spectrum: &EmpiricalSpectrum, filter: &Filter, grid: &TauGrid, tau: f64) -> Result<f64> {
    let mesh = grid.mesh();
    let left = criterion_from_spectrum(spectrum, filter, tau - mesh)?;
    let mid = criterion_from_spectrum(spectrum, filter, tau)?;
    let right = criterion_from_spectrum(spectrum, filter, tau + mesh)?;
    Ok(tau + parabolic_offset(left, mid, right) * mesh)
}

/// Offset in mesh units of the vertex of the parabola through
/// `(-1, left), (0, mid), (1, right)`; 0 unless the parabola is concave.
pub fn parabolic_offset(left: f64, mid: f64, right: f64) -> f64 {
    let curvature = left - 2.0 * mid + right;
    if curvature.is_nan() || curvature >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / curvature).clamp(-1.0, 1.0)
}
