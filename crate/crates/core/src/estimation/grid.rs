use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const DIAMETER_SLACK: f64 = 1e-12;

/// Regular grid of candidate shifts with diameter at most 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    tau_min: f64,
    tau_max: f64,
    points: Vec<f64>,
}

impl TauGrid {
    pub fn new(tau_min: f64, tau_max: f64, m_points: usize) -> Result<Self> {
        if !(tau_min.is_finite() && tau_max.is_finite() && tau_min < tau_max) {
            return Err(invalid(format!("shift grid needs tau_min < tau_max, got [{tau_min}, {tau_max}]")));
        }
        if tau_max - tau_min > 0.5 + DIAMETER_SLACK {
            return Err(invalid(format!(
                "shift grid [{tau_min}, {tau_max}] has diameter {} above 1/2",
                tau_max - tau_min
            )));
        }
        if m_points < 3 {
            return Err(invalid(format!("shift grid needs at least 3 points, got {m_points}")));
        }
        let step = (tau_max - tau_min) / (m_points - 1) as f64;
        let mut points: Vec<f64> = (0..m_points).map(|i| tau_min + i as f64 * step).collect();
        points[m_points - 1] = tau_max;
        Ok(Self {
            tau_min,
            tau_max,
            points,
        })
    }

    /// Symmetric grid on `[-half_range, half_range]`.
    pub fn symmetric(half_range: f64, m_points: usize) -> Result<Self> {
        Self::new(-half_range, half_range, m_points)
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        (self.tau_max - self.tau_min) / (self.points.len() - 1) as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// True when the diameter equals 1/2, the identifiability limit.
    pub fn at_diameter_limit(&self) -> bool {
        (self.tau_max - self.tau_min - 0.5).abs() <= DIAMETER_SLACK
    }

    /// Index of the grid point nearest to `tau` (smallest index on ties).
    pub fn nearest_index(&self, tau: f64) -> usize {
        let mut best = 0;
        for (i, &p) in self.points.iter().enumerate() {
            if (p - tau).abs() < (self.points[best] - tau).abs() {
                best = i;
            }
        }
        best
    }
}
