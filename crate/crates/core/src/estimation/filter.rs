use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal::CosineSignal;

const TWO_PI: f64 = 2.0 * PI;

/// How a filter was built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FilterKind {
    Pinsker { length: usize, beta: f64 },
    Projection { cutoff: usize },
    Custom,
}

/// Finite weight sequence `h_1, h_2, ...` with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    weights: Vec<f64>,
    kind: FilterKind,
}

impl Filter {
    /// Pinsker-type weights `h_k = [1 - (k/K)^beta]_+`, stored for `k = 1..=K`
    /// (so `h_K = 0`).
    pub fn pinsker(length: usize, beta: f64) -> Result<Self> {
        if length == 0 {
            return Err(invalid("Pinsker filter length K must be at least 1"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid("Pinsker exponent beta must be positive"));
        }
        let kf = length as f64;
        let weights = (1..=length)
            .map(|k| {
                if k >= length {
                    0.0
                } else {
                    (1.0 - (k as f64 / kf).powf(beta)).max(0.0)
                }
            })
            .collect();
        Ok(Self {
            weights,
            kind: FilterKind::Pinsker { length, beta },
        })
    }

    /// Projection weights `h_k = 1{k <= N}`.
    pub fn projection(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(invalid("projection cutoff N must be at least 1"));
        }
        Ok(Self {
            weights: vec![1.0; cutoff],
            kind: FilterKind::Projection { cutoff },
        })
    }

    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        if let Some(k) = weights.iter().position(|h| !(h.is_finite() && (0.0..=1.0).contains(h))) {
            return Err(invalid(format!("weight h_{} = {} is outside [0, 1]", k + 1, weights[k])));
        }
        Ok(Self {
            weights,
            kind: FilterKind::Custom,
        })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `h_k`, 1-based, zero past the stored support.
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.weights.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Index of the last nonzero weight (0 for the null filter).
    pub fn effective_len(&self) -> usize {
        self.weights.iter().rposition(|&h| h != 0.0).map_or(0, |i| i + 1)
    }
}

pub fn make_pinsker_filter(length: usize, beta: f64) -> Result<Filter> {
    Filter::pinsker(length, beta)
}

pub fn make_projection_filter(cutoff: usize) -> Result<Filter> {
    Filter::projection(cutoff)
}

/// Both sides of the tail condition on `(1 - h_k)` weighted signal energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCondition {
    /// `(sum_k (1 - h_k) (2 pi k)^2 f_k^2)^2`
    pub lhs: f64,
    /// `sum_k (1 - h_k)^2 (2 pi k)^2 f_k^2`
    pub rhs: f64,
}

/// Raw values behind the weight conditions; no verdict is attached since the
/// constants involved are not known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConditionReport {
    /// `[sum (2 pi k)^2 h_k^2]^{1/2}`
    pub c2_energy: f64,
    /// `log^2(n) * max_k (2 pi k) h_k`
    pub c2_scale: f64,
    /// `c2_energy / c2_scale`, absent when the scale is 0.
    pub c2_ratio: Option<f64>,
    /// `sum h_k (2 pi k)^4`
    pub c3_sum: f64,
    /// `c3_sum / n`
    pub c3_ratio: f64,
    pub tail: Option<TailCondition>,
}

pub fn filter_condition_report(filter: &Filter, n: usize, signal: Option<&CosineSignal>) -> FilterConditionReport {
    let mut energy = 0.0;
    let mut peak = 0.0f64;
    let mut c3 = 0.0;
    for (i, &h) in filter.weights().iter().enumerate() {
        let w = TWO_PI * (i + 1) as f64;
        energy += w * w * h * h;
        peak = peak.max(w * h);
        c3 += h * w.powi(4);
    }
    let log_n = (n.max(1) as f64).ln();
    let c2_scale = log_n * log_n * peak;
    let c2_energy = energy.sqrt();
    let tail = signal.map(|f| {
        let upto = f.cutoff().max(filter.weights().len());
        let (mut a, mut b) = (0.0, 0.0);
        for k in 1..=upto {
            let w = TWO_PI * k as f64;
            let e = w * w * f.coefficient(k).powi(2);
            let g = 1.0 - filter.weight(k);
            a += g * e;
            b += g * g * e;
        }
        TailCondition { lhs: a * a, rhs: b }
    });
    FilterConditionReport {
        c2_energy,
        c2_scale,
        c2_ratio: (c2_scale > 0.0).then(|| c2_energy / c2_scale),
        c3_sum: c3,
        c3_ratio: c3 / n.max(1) as f64,
        tail,
    }
}
