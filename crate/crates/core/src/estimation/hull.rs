use serde::{Deserialize, Serialize};

use super::profile::CriterionProfile;
use crate::error::{invalid, Result};

/// Why the hull walk stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullTermination {
    ReachedKMax,
    NonpositiveSlope,
}

/// Vertices of the upper concave hull of `K -> M(K)` and the slopes between
/// consecutive vertices.
///
/// `slopes[p]` joins `k[p]` to `k[p + 1]`; slopes are strictly decreasing
/// and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPath {
    /// Positions of the vertices inside the source `k_grid`.
    pub positions: Vec<usize>,
    pub k: Vec<usize>,
    pub m: Vec<f64>,
    pub slopes: Vec<f64>,
    pub termination: HullTermination,
}

impl HullPath {
    /// Walks the hull of `(ks[i], values[i])` from the first point, always
    /// jumping to the point of steepest slope (ties toward larger K) and
    /// stopping once the best slope is not positive.
    pub fn from_values(ks: &[usize], values: &[f64]) -> Result<Self> {
        if ks.is_empty() || ks.len() != values.len() {
            return Err(invalid("hull needs matching, nonempty K and M(K) sequences"));
        }
        if ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("K values must be strictly increasing"));
        }
        let mut positions = vec![0usize];
        let mut slopes = Vec::new();
        let mut current = 0usize;
        let termination = loop {
            if current + 1 >= ks.len() {
                break HullTermination::ReachedKMax;
            }
            let mut best = f64::NEG_INFINITY;
            let mut best_at = current + 1;
            for next in current + 1..ks.len() {
                let slope = (values[next] - values[current]) / (ks[next] - ks[current]) as f64;
                if slope >= best {
                    best = slope;
                    best_at = next;
                }
            }
            if best <= 0.0 {
                break HullTermination::NonpositiveSlope;
            }
            slopes.push(best);
            positions.push(best_at);
            current = best_at;
        };
        Ok(Self {
            k: positions.iter().map(|&p| ks[p]).collect(),
            m: positions.iter().map(|&p| values[p]).collect(),
            positions,
            slopes,
            termination,
        })
    }

    pub fn vertices(&self) -> usize {
        self.k.len()
    }
}

pub fn hull_path(profile: &CriterionProfile) -> Result<HullPath> {
    HullPath::from_values(&profile.k_grid, &profile.m_max)
}

/// Penalized choice `argmin_K { -M(K) + alpha K }` over hull vertices, ties
/// toward the larger K. Equals `K_p` for `alpha` in `(alpha_p, alpha_{p-1}]`.
pub fn khat_of_alpha(hull: &HullPath, alpha: f64) -> Result<usize> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("penalty alpha must be positive"));
    }
    let mut best = f64::INFINITY;
    let mut best_k = hull.k[0];
    for (&k, &m) in hull.k.iter().zip(&hull.m) {
        let score = -m + alpha * k as f64;
        if score <= best {
            best = score;
            best_k = k;
        }
    }
    Ok(best_k)
}
