//! Fast paths checked against independent direct computations.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftdens_core::density::{bandwidth_lscv, kde, lscv_score, Kernel};
use shiftdens_core::estimation::{criterion_profile, Filter, TauGrid};
use shiftdens_core::experiments::{compute_rn, expectation};
use shiftdens_core::signal::{CosineSignal, ShiftDistribution, Signal};
use shiftdens_core::spectral::{
    brute_force_criterion, criterion_from_spectrum, discrete_signal_coefficients, discretization_residuals,
    empirical_spectrum,
};

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// `sqrt(2)/n sum_i cos(2 pi k i / n) y_i` by straightforward summation.
fn naive_coeffs(row: &[f64], k: usize) -> (f64, f64) {
    let n = row.len() as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for (i, &y) in row.iter().enumerate() {
        let t = (i + 1) as f64 / n;
        c += (2.0 * PI * k as f64 * t).cos() * y;
        s += (2.0 * PI * k as f64 * t).sin() * y;
    }
    (SQRT_2 * c / n, SQRT_2 * s / n)
}

#[test]
fn spectrum_matches_naive_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &n in &[4usize, 7, 64, 100, 181, 800] {
        let row = random_row(&mut rng, n);
        let kmax = (n - 1) / 2;
        let spec = empirical_spectrum(&row, kmax, false).unwrap();
        for k in 1..=kmax {
            let (c, s) = naive_coeffs(&row, k);
            assert!((spec.cos_coeff(k) - c).abs() < 1e-12, "n={n} k={k}");
            assert!((spec.sin_coeff(k) - s).abs() < 1e-12, "n={n} k={k}");
        }
    }
}

#[test]
fn fast_criterion_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let n = rng.random_range(8..300);
        let row = random_row(&mut rng, n);
        let len = rng.random_range(1..=(n - 1) / 2);
        let filter = if case % 2 == 0 {
            Filter::pinsker(len.max(2), rng.random_range(1.0..4.0)).unwrap()
        } else {
            Filter::projection(len).unwrap()
        };
        let tau = rng.random_range(-0.5..0.5);
        let spec = empirical_spectrum(&row, (n - 1) / 2, false).unwrap();
        let fast = criterion_from_spectrum(&spec, &filter, tau).unwrap();
        let slow = brute_force_criterion(&row, &filter, tau).unwrap();
        assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-300), "case {case}: {fast} vs {slow}");
    }
}

#[test]
fn profile_matches_per_length_maximization() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 120;
    let grid = TauGrid::symmetric(0.25, 37).unwrap();
    let ks: Vec<usize> = (1..=40).collect();
    for _ in 0..5 {
        let row = random_row(&mut rng, n);
        let spec = empirical_spectrum(&row, 59, true).unwrap();
        let prof = criterion_profile(&spec, &grid, &ks, 3.0).unwrap();
        for (i, &k) in ks.iter().enumerate() {
            let filter = Filter::pinsker(k, 3.0).unwrap();
            let values: Vec<f64> = grid
                .points()
                .iter()
                .map(|&t| criterion_from_spectrum(&spec, &filter, t).unwrap())
                .collect();
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!((prof.m_max[i] - best).abs() <= 1e-10 * best.abs().max(1e-12), "K={k}");
            let at = prof.tau_hat_index[i];
            assert!((values[at] - best).abs() <= 1e-10 * best.abs().max(1e-12));
        }
    }
}

/// Alias expansion of the noise-free coefficients of a finite cosine series:
/// `x_k = sum_m f_m cos(2 pi m theta) (1[n | m+k] + 1[n | m-k])`,
/// `x*_k = sum_m f_m sin(2 pi m theta) (1[n | k-m] - 1[n | k+m])`.
fn alias_coeffs(coeffs: &[f64], theta: f64, n: usize, k: usize) -> (f64, f64) {
    let (mut c, mut s) = (0.0, 0.0);
    for (idx, &f) in coeffs.iter().enumerate() {
        let m = (idx + 1) as i64;
        let (k, n) = (k as i64, n as i64);
        let plus = ((m + k) % n == 0) as i32 as f64;
        let minus = ((m - k) % n == 0) as i32 as f64;
        let a = 2.0 * PI * m as f64 * theta;
        c += f * a.cos() * (plus + minus);
        s += f * a.sin() * (minus - plus);
    }
    (c, s)
}

#[test]
fn residuals_match_alias_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 24;
    let coeffs: Vec<f64> = (1..=80).map(|m| rng.random_range(-1.0..1.0) / m as f64).collect();
    let signal = Signal::from(CosineSignal::new(coeffs.clone()).unwrap());
    for _ in 0..10 {
        let theta = rng.random_range(-0.25..0.25);
        let (d, ds) = discretization_residuals(&signal, theta, n, 11).unwrap();
        for k in 1..=11 {
            let (c, s) = alias_coeffs(&coeffs, theta, n, k);
            let fk = coeffs[k - 1];
            let a = 2.0 * PI * k as f64 * theta;
            assert!((d[k - 1] - (c - a.cos() * fk)).abs() < 1e-12, "k={k}");
            assert!((ds[k - 1] - (s - a.sin() * fk)).abs() < 1e-12, "k={k}");
        }
    }
}

#[test]
fn residual_decomposition_identity() {
    // cos(2 pi k theta)(fhat_k - f_k) - sin(2 pi k theta) ghat_k equals d_k.
    let signal = Signal::half_sine();
    for &(theta, n) in &[(0.0, 50usize), (0.037, 100), (-0.12, 64)] {
        let dc = discrete_signal_coefficients(&signal, theta, n, 20).unwrap();
        let (d, _) = discretization_residuals(&signal, theta, n, 20).unwrap();
        for k in 1..=20 {
            let a = 2.0 * PI * k as f64 * theta;
            let fk = signal.spectrum().coefficient(k);
            let lhs = a.cos() * (dc.fhat[k - 1] - fk) - a.sin() * dc.ghat[k - 1];
            assert!((lhs - d[k - 1]).abs() < 1e-12, "theta={theta} n={n} k={k}: {lhs} vs {}", d[k - 1]);
        }
    }
}

#[test]
fn half_sine_first_coefficient_order() {
    let dc = discrete_signal_coefficients(&Signal::half_sine(), 0.0, 100, 1).unwrap();
    let f1 = -(2.0 * SQRT_2 / PI) / 3.0;
    assert!((dc.fhat[0] - f1).abs() <= 10.0 / 100.0);
}

#[test]
fn half_sine_discretization_error_is_second_order() {
    // The kink at 0 makes the coefficients decay like k^-2, so the periodic
    // Riemann sum errs by O(n^-2): doubling n divides the error by about 4.
    let signal = Signal::half_sine();
    let err = |n: usize| {
        let dc = discrete_signal_coefficients(&signal, 0.0, n, n / 4).unwrap();
        (1..=n / 4)
            .map(|k| (dc.fhat[k - 1] - signal.spectrum().coefficient(k)).abs())
            .fold(0.0, f64::max)
    };
    for n in [50, 100, 200] {
        let r = err(2 * n) / err(n);
        assert!((0.2..=0.3).contains(&r), "n={n}: ratio {r}");
    }
}

#[test]
fn rn_examples() {
    let f = CosineSignal::new(vec![1.0]).unwrap();
    let rn = compute_rn(&Filter::projection(5).unwrap(), &f, 800);
    let tw = (2.0 * PI).powi(2);
    assert!((rn - tw * 55.0 / 800.0).abs() < 1e-12);
    assert!((rn - 2.7142).abs() < 1e-4);
    assert!((1.0 + rn / f.deriv_norm_sq() - (1.0 + 55.0 / 800.0)).abs() < 1e-12);
    let one = compute_rn(&Filter::projection(1).unwrap(), &f, 64);
    assert!((one - tw / 64.0).abs() < 1e-12);
    let zero = Filter::custom(vec![0.0; 4]).unwrap();
    assert_eq!(compute_rn(&zero, &CosineSignal::zero(), 100), 0.0);
    // Beyond the filter the signal contributes its full bias term.
    let g = CosineSignal::new(vec![0.0, 0.0, 0.5]).unwrap();
    let v = compute_rn(&Filter::projection(1).unwrap(), &g, 10);
    assert!((v - (tw / 10.0 + (6.0 * PI).powi(2) * 0.25)).abs() < 1e-10);
}

/// `(K * K)(u)` with 5-point Gauss-Legendre on the pieces between the kinks
/// of the integrand, subdivided finely.
fn gauss_legendre_convolution(kernel: &Kernel, u: f64) -> f64 {
    const NODES: [f64; 5] = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let r = kernel.support().unwrap_or(12.0);
    let (lo, hi) = ((-r).max(u - r), r.min(u + r));
    if hi <= lo {
        return 0.0;
    }
    let pieces = 400;
    let step = (hi - lo) / pieces as f64;
    let mut s = 0.0;
    for p in 0..pieces {
        let mid = lo + (p as f64 + 0.5) * step;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let v = mid + 0.5 * step * x;
            s += 0.5 * step * w * kernel.eval(v) * kernel.eval(u - v);
        }
    }
    s
}

/// LSCV by direct summation: `int phi_h^2` from pairwise convolutions
/// computed numerically, and the leave-one-out term by explicit loops.
fn lscv_direct(points: &[f64], kernel: &Kernel, h: f64) -> f64 {
    let j = points.len() as f64;
    let conv = |u: f64| gauss_legendre_convolution(kernel, u);
    let mut sq = 0.0;
    let mut loo = 0.0;
    for (a, &p) in points.iter().enumerate() {
        for (b, &q) in points.iter().enumerate() {
            sq += conv((p - q) / h);
            if a != b {
                loo += kernel.eval((p - q) / h);
            }
        }
    }
    sq / (j * j * h) - 2.0 * loo / (j * (j - 1.0) * h)
}

#[test]
fn lscv_matches_direct_sum() {
    let pts = [-0.1f64, 0.0, 0.1];
    let g = Kernel::gaussian();
    for h in [0.03, 0.07, 0.2] {
        // Closed-form gaussian self-convolution: N(0, 2).
        let direct_gauss = {
            let j = 3.0f64;
            let mut sq = 0.0;
            let mut loo = 0.0;
            for (a, &p) in pts.iter().enumerate() {
                for (b, &q) in pts.iter().enumerate() {
                    let u: f64 = (p - q) / h;
                    sq += (-u * u / 4.0).exp() / (4.0 * PI).sqrt();
                    if a != b {
                        loo += (-u * u / 2.0).exp() / (2.0 * PI).sqrt();
                    }
                }
            }
            sq / (j * j * h) - 2.0 * loo / (j * (j - 1.0) * h)
        };
        assert!((lscv_score(&pts, &g, h) - direct_gauss).abs() < 1e-12);
    }
    let five = [-0.2, -0.05, 0.01, 0.08, 0.3];
    for kernel in [Kernel::gaussian(), Kernel::epanechnikov()] {
        for h in [0.05, 0.12, 0.4] {
            let fast = lscv_score(&five, &kernel, h);
            let slow = lscv_direct(&five, &kernel, h);
            assert!((fast - slow).abs() < 1e-8, "{:?} h={h}: {fast} vs {slow}", kernel.id());
        }
    }
    // The trapezoid path used for custom kernels agrees with the closed form.
    let epan_custom =
        Kernel::custom("epan-copy", |u: f64| if u.abs() <= 1.0 { 0.75 * (1.0 - u * u) } else { 0.0 }, Some(1.0), 2)
            .unwrap();
    for h in [0.05, 0.12] {
        let a = lscv_score(&five, &epan_custom, h);
        let b = lscv_score(&five, &Kernel::epanechnikov(), h);
        assert!((a - b).abs() < 1e-5 * b.abs().max(1.0), "h={h}: {a} vs {b}");
    }
}

#[test]
fn lscv_picks_interior_bandwidth_for_uniform_data() {
    let grid = shiftdens_core::density::geomspace(0.005, 0.2, 30);
    let kernel = Kernel::epanechnikov();
    let mut interior = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<f64> = (0..500).map(|_| rng.random_range(-0.2..0.2)).collect();
        let h = bandwidth_lscv(&pts, &kernel, &grid).unwrap().bandwidth;
        if h != grid[0] && h != grid[grid.len() - 1] {
            interior += 1;
        }
    }
    assert!(interior >= 45, "interior selections: {interior}/50");
}

#[test]
fn kde_mass_and_location_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<f64> = (0..200).map(|_| rng.random_range(-0.2..0.2)).collect();
    for kernel in [Kernel::gaussian(), Kernel::epanechnikov()] {
        let h = 0.04;
        let x = shiftdens_core::density::linspace(-0.6, 0.6, 4001);
        let est = kde(&pts, &kernel, h, &x).unwrap();
        assert!((est.integral() - 1.0).abs() < 1e-3);
        let c = 0.123;
        let moved: Vec<f64> = pts.iter().map(|p| p + c).collect();
        let xm: Vec<f64> = x.iter().map(|v| v + c).collect();
        let est2 = kde(&moved, &kernel, h, &xm).unwrap();
        for (a, b) in est.values.iter().zip(&est2.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn expectation_against_sampling() {
    let d = ShiftDistribution::bimodal_preset();
    let g = |x: f64| (5.0 * x).cos();
    let exact = expectation(&d, &g);
    let pts = shiftdens_core::signal::sample_shifts(&d, 200_000, 1).unwrap();
    let mc = pts.iter().map(|&p| g(p)).sum::<f64>() / pts.len() as f64;
    assert!((exact - mc).abs() < 1e-3, "{exact} vs {mc}");
}
