//! Plug-in estimation of the shift law from estimated shifts: the empirical
//! measure of the estimates and a kernel density estimator with theoretical
//! or least-squares cross-validated bandwidth.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const MOMENT_NODES: usize = 100_000;
const MOMENT_TOL: f64 = 1e-6;
const GAUSSIAN_REACH: f64 = 8.0;

/// Kernel identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelId {
    Gaussian,
    Epanechnikov,
    Custom(String),
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelId::Gaussian => f.write_str("gaussian"),
            KernelId::Epanechnikov => f.write_str("epanechnikov"),
            KernelId::Custom(name) => f.write_str(name),
        }
    }
}

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smoothing kernel with a declared order.
#[derive(Clone)]
pub struct Kernel {
    id: KernelId,
    func: KernelFn,
    support: Option<f64>,
    order: usize,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("id", &self.id)
            .field("support", &self.support)
            .field("order", &self.order)
            .finish()
    }
}

fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

impl Kernel {
    pub fn gaussian() -> Self {
        Self {
            id: KernelId::Gaussian,
            func: Arc::new(gaussian),
            support: None,
            order: 2,
        }
    }

    pub fn epanechnikov() -> Self {
        Self {
            id: KernelId::Epanechnikov,
            func: Arc::new(epanechnikov),
            support: Some(1.0),
            order: 2,
        }
    }

    /// User kernel of declared `order`; mass and the vanishing moments
    /// `1..order-1` are checked by quadrature.
    pub fn custom<F>(name: impl Into<String>, func: F, support: Option<f64>, order: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if order < 2 {
            return Err(invalid("kernel order must be at least 2"));
        }
        if let Some(s) = support {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid("kernel support half-width must be positive"));
            }
        }
        let k = Self {
            id: KernelId::Custom(name.into()),
            func: Arc::new(func),
            support,
            order,
        };
        let mass = k.moment(0);
        if (mass - 1.0).abs() > MOMENT_TOL {
            return Err(invalid(format!("kernel integrates to {mass}, not 1")));
        }
        for j in 1..order {
            let m = k.moment(j as i32);
            if m.abs() > MOMENT_TOL {
                return Err(invalid(format!("kernel moment {j} is {m}, expected 0 for order {order}")));
            }
        }
        Ok(k)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::gaussian()),
            "epanechnikov" | "epan" => Ok(Self::epanechnikov()),
            other => Err(invalid(format!("unknown kernel '{other}'"))),
        }
    }

    pub fn id(&self) -> &KernelId {
        &self.id
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.func)(u)
    }

    /// Half-width used for quadrature and plotting ranges.
    fn reach(&self) -> f64 {
        self.support.unwrap_or(GAUSSIAN_REACH)
    }

    /// `int u^j K(u) du` by trapezoid rule on `MOMENT_NODES` nodes.
    pub fn moment(&self, j: i32) -> f64 {
        let r = self.reach();
        let step = 2.0 * r / (MOMENT_NODES - 1) as f64;
        let mut s = 0.0;
        for i in 0..MOMENT_NODES {
            let u = -r + i as f64 * step;
            let w = if i == 0 || i == MOMENT_NODES - 1 { 0.5 } else { 1.0 };
            s += w * u.powi(j) * self.eval(u);
        }
        s * step
    }

    /// Closed-form self-convolution `(K * K)(u)` for the built-in kernels.
    fn self_convolution(&self, u: f64) -> Option<f64> {
        match self.id {
            KernelId::Gaussian => Some((-0.25 * u * u).exp() / (2.0 * PI.sqrt())),
            KernelId::Epanechnikov => {
                let a = u.abs();
                Some(if a >= 2.0 {
                    0.0
                } else {
                    3.0 / 160.0 * (2.0 - a).powi(3) * (a * a + 6.0 * a + 4.0)
                })
            }
            KernelId::Custom(_) => None,
        }
    }
}

pub fn kernel_eval(kernel: &Kernel, u: f64) -> f64 {
    kernel.eval(u)
}

/// Kernel estimate evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub kernel: KernelId,
    pub points: usize,
}

impl DensityEstimate {
    /// Trapezoid integral over the evaluation grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.x_grid, &self.values)
    }

    /// Strict interior local maxima exceeding `fraction` of the global max.
    pub fn modes(&self, fraction: f64) -> Vec<f64> {
        let peak = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let floor = fraction * peak;
        self.values
            .windows(3)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0] && w[1] > w[2] && w[1] > floor)
            .map(|(i, _)| self.x_grid[i + 1])
            .collect()
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(invalid("density estimation needs at least one point"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(invalid("points must be finite"));
    }
    Ok(())
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

/// `(1 / (J h)) sum_j K((x - p_j) / h)` at one location.
pub fn kde_at(points: &[f64], kernel: &Kernel, h: f64, x: f64) -> f64 {
    let s: f64 = points.iter().map(|&p| kernel.eval((x - p) / h)).sum();
    s / (points.len() as f64 * h)
}

pub fn kde(points: &[f64], kernel: &Kernel, h: f64, x_grid: &[f64]) -> Result<DensityEstimate> {
    check_points(points)?;
    check_bandwidth(h)?;
    let values = x_grid.iter().map(|&x| kde_at(points, kernel, h, x)).collect();
    Ok(DensityEstimate {
        x_grid: x_grid.to_vec(),
        values,
        bandwidth: h,
        kernel: kernel.id().clone(),
        points: points.len(),
    })
}

/// 201 equispaced points over `[min - 3h, max + 3h]`.
pub fn default_x_grid(points: &[f64], h: f64) -> Vec<f64> {
    linspace(
        points.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h,
        points.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h,
        201,
    )
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
    if let Some(last) = v.last_mut() {
        *last = hi;
    }
    v
}

/// Geometric sequence from `lo` to `hi`.
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count).into_iter().map(f64::exp).collect()
}

/// Rate-driven bandwidth: `n^{-1/(2 beta + 1)}` while
/// `J <= (n / log n)^{(2 beta + 1)/(beta + 2)}`, else `(log n / n)^{1/(beta + 2)}`.
pub fn bandwidth_theoretical(n: usize, j: usize, beta: f64) -> Result<f64> {
    if n < 2 || j == 0 {
        return Err(invalid("theoretical bandwidth needs n >= 2 and J >= 1"));
    }
    if !(beta.is_finite() && beta > 1.0) {
        return Err(invalid(format!("smoothness beta must exceed 1, got {beta}")));
    }
    let nf = n as f64;
    let threshold = regime_threshold(n, beta);
    Ok(if j as f64 <= threshold {
        nf.powf(-1.0 / (2.0 * beta + 1.0))
    } else {
        (nf.ln() / nf).powf(1.0 / (beta + 2.0))
    })
}

/// `(n / log n)^{(2 beta + 1)/(beta + 2)}`, the curve count where the rate regime changes.
pub fn regime_threshold(n: usize, beta: f64) -> f64 {
    let nf = n as f64;
    (nf / nf.ln()).powf((2.0 * beta + 1.0) / (beta + 2.0))
}

/// Cross-validated bandwidth and the scores behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LscvSelection {
    pub bandwidth: f64,
    /// `(h, LSCV(h))` in the order of the candidate grid.
    pub scores: Vec<(f64, f64)>,
    /// Only one candidate was supplied, so no selection took place.
    pub single_candidate: bool,
}

/// Least-squares cross-validation score
/// `int phi_h^2 - (2/J) sum_j phi_{h,-j}(p_j)`.
pub fn lscv_score(points: &[f64], kernel: &Kernel, h: f64) -> f64 {
    let j = points.len();
    let jf = j as f64;
    let square_integral = match kernel.self_convolution(0.0) {
        Some(_) => {
            let mut s = 0.0;
            for &a in points {
                for &b in points {
                    s += kernel.self_convolution((a - b) / h).unwrap_or(0.0);
                }
            }
            s / (jf * jf * h)
        }
        None => {
            let reach = kernel.reach().max(4.0) * h;
            let lo = points.iter().copied().fold(f64::INFINITY, f64::min) - reach;
            let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max) + reach;
            let nodes = (((hi - lo) / (h / 50.0)).ceil() as usize + 1).max(2001);
            let x = linspace(lo, hi, nodes);
            let y: Vec<f64> = x.iter().map(|&x| kde_at(points, kernel, h, x).powi(2)).collect();
            trapezoid(&x, &y)
        }
    };
    let mut loo = 0.0;
    for (i, &a) in points.iter().enumerate() {
        let s: f64 = points
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &b)| kernel.eval((a - b) / h))
            .sum();
        loo += s / ((jf - 1.0) * h);
    }
    square_integral - 2.0 * loo / jf
}

/// Minimizer of the LSCV score over `h_grid`, ties toward the smaller `h`.
pub fn bandwidth_lscv(points: &[f64], kernel: &Kernel, h_grid: &[f64]) -> Result<LscvSelection> {
    check_points(points)?;
    if h_grid.is_empty() {
        return Err(invalid("bandwidth grid is empty"));
    }
    for &h in h_grid {
        check_bandwidth(h)?;
    }
    let first = points[0];
    if points.iter().all(|&p| p == first) {
        return Err(Error::DegenerateInput("all points are identical; LSCV is unbounded below".into()));
    }
    let mut distinct = points.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(invalid("LSCV needs at least 3 distinct points"));
    }
    if h_grid.len() == 1 {
        return Ok(LscvSelection {
            bandwidth: h_grid[0],
            scores: vec![(h_grid[0], lscv_score(points, kernel, h_grid[0]))],
            single_candidate: true,
        });
    }
    let scores: Vec<(f64, f64)> = h_grid.iter().map(|&h| (h, lscv_score(points, kernel, h))).collect();
    let mut best = scores[0];
    for &(h, s) in &scores[1..] {
        if s < best.1 || (s == best.1 && h < best.0) {
            best = (h, s);
        }
    }
    Ok(LscvSelection {
        bandwidth: best.0,
        scores,
        single_candidate: false,
    })
}

/// `(1/J) sum_j g(p_j)`, the empirical measure applied to `g`.
pub fn empirical_measure_apply<G: Fn(f64) -> f64>(points: &[f64], g: G) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("empirical measure of an empty sample"));
    }
    Ok(points.iter().map(|&p| g(p)).sum::<f64>() / points.len() as f64)
}
