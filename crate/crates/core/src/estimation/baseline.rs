use super::grid::TauGrid;
use crate::error::{invalid, Result};

/// Periodic linear interpolation of samples taken at `t_i = i/n`.
fn interpolate_periodic(samples: &[f64], t: f64) -> f64 {
    let n = samples.len();
    let pos = (t * n as f64).rem_euclid(n as f64);
    let lower = pos.floor();
    let frac = pos - lower;
    // Sample i (1-based) sits at position i mod n.
    let at = |p: usize| samples[(p + n - 1) % n];
    let i0 = lower as usize % n;
    let i1 = (i0 + 1) % n;
    (1.0 - frac) * at(i0) + frac * at(i1)
}

/// Shift maximizing the circular cross-correlation
/// `(1/n) sum_i Y_i ref(t_i - tau)` over the grid.
pub fn baseline_crosscorr_shift(row: &[f64], reference: &[f64], tau_grid: &TauGrid) -> Result<f64> {
    let n = row.len();
    if n == 0 || reference.len() != n {
        return Err(invalid("curve and reference must share a nonempty grid"));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0;
    for (k, &tau) in tau_grid.points().iter().enumerate() {
        let c: f64 = row
            .iter()
            .enumerate()
            .map(|(i, &y)| y * interpolate_periodic(reference, (i + 1) as f64 / n as f64 - tau))
            .sum::<f64>()
            / n as f64;
        if c > best {
            best = c;
            best_at = k;
        }
    }
    Ok(tau_grid.point(best_at))
}
