use proptest::prelude::*;
use shiftdens_core::density::{kde, linspace, Kernel};
use shiftdens_core::estimation::{
    khat_of_alpha, EstimatorConfig, Filter, HullPath, HullTermination, ShiftEstimator, TauGrid,
};
use shiftdens_core::signal::{sample_shifts, ShiftDistribution};

/// `argmin_K -M(K) + alpha K` over every K, ties toward the larger K.
fn brute_khat(ks: &[usize], m: &[f64], alpha: f64) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (&k, &v) in ks.iter().zip(m) {
        let score = -v + alpha * k as f64;
        if score <= best.0 {
            best = (score, k);
        }
    }
    best.1
}

fn small_rows(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hull_is_concave_majorant(m in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        let ks: Vec<usize> = (1..=m.len()).collect();
        let hull = HullPath::from_values(&ks, &m).unwrap();
        prop_assert_eq!(hull.k[0], 1);
        prop_assert!(hull.k.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(hull.slopes.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(hull.slopes.iter().all(|&a| a > 0.0));
        prop_assert_eq!(hull.slopes.len() + 1, hull.k.len());
        for (p, &a) in hull.slopes.iter().enumerate() {
            let kp = hull.k[p];
            let mp = m[kp - 1];
            let best = ks.iter().filter(|&&k| k > kp).map(|&k| (m[k - 1] - mp) / (k - kp) as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((a - best).abs() <= 1e-12 * best.abs().max(1.0));
        }
        if hull.termination == HullTermination::ReachedKMax {
            prop_assert_eq!(*hull.k.last().unwrap(), m.len());
        }
    }

    #[test]
    fn khat_matches_brute_force(m in prop::collection::vec(-5.0f64..5.0, 1..40), alpha in 1e-3f64..20.0) {
        let ks: Vec<usize> = (1..=m.len()).collect();
        let hull = HullPath::from_values(&ks, &m).unwrap();
        prop_assert_eq!(khat_of_alpha(&hull, alpha).unwrap(), brute_khat(&ks, &m, alpha));
    }

    #[test]
    fn pinsker_weights_shape(len in 1usize..300, beta in 0.5f64..6.0) {
        let f = Filter::pinsker(len, beta).unwrap();
        let w = f.weights();
        prop_assert_eq!(w.len(), len);
        prop_assert!(w.iter().all(|&h| (0.0..=1.0).contains(&h)));
        prop_assert!(w.windows(2).all(|p| p[0] >= p[1]));
        prop_assert_eq!(w[len - 1], 0.0);
        prop_assert_eq!(f.weight(len + 5), 0.0);
    }

    #[test]
    fn power_of_two_scaling_leaves_selection_unchanged(row in small_rows(64), e in -8i32..8) {
        let est = ShiftEstimator::new(EstimatorConfig::new(TauGrid::symmetric(0.25, 33).unwrap()), 64).unwrap();
        let c = 2f64.powi(e);
        let scaled: Vec<f64> = row.iter().map(|v| v * c).collect();
        let a = est.estimate(&row).unwrap();
        let b = est.estimate(&scaled).unwrap();
        prop_assert_eq!(a.tau_index, b.tau_index);
        prop_assert_eq!(&a.profile.tau_hat_index, &b.profile.tau_hat_index);
        prop_assert_eq!(&a.hull.k, &b.hull.k);
        for (x, y) in a.hull.slopes.iter().zip(&b.hull.slopes) {
            prop_assert_eq!(x * c * c, *y);
        }
    }

    #[test]
    fn reflection_negates_profile_argmax(row in small_rows(50)) {
        // Reversing the curve maps the shift theta to -theta on a symmetric grid.
        let n = row.len();
        let reflected: Vec<f64> = (1..=n).map(|i| row[(2 * n - i - 1) % n]).collect();
        let grid = TauGrid::symmetric(0.2, 41).unwrap();
        let est = ShiftEstimator::new(EstimatorConfig::new(grid.clone()), n).unwrap();
        let a = est.estimate(&row).unwrap();
        let b = est.estimate(&reflected).unwrap();
        for (x, y) in a.profile.m_max.iter().zip(&b.profile.m_max) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12));
        }
        let m = grid.len() - 1;
        let mirrored = a.profile.tau_hat_index.iter().zip(&b.profile.tau_hat_index).filter(|(i, j)| **i + **j == m).count();
        prop_assert!(mirrored + 2 >= a.profile.len());
    }

    #[test]
    fn kde_integrates_to_one(points in prop::collection::vec(-0.3f64..0.3, 1..60), h in 0.02f64..0.2) {
        let x = linspace(-1.0, 1.0, 8001);
        for kernel in [Kernel::gaussian(), Kernel::epanechnikov()] {
            let est = kde(&points, &kernel, h, &x).unwrap();
            prop_assert!(est.values.iter().all(|&v| v >= 0.0));
            prop_assert!((est.integral() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn sampled_shifts_stay_in_support(seed in any::<u64>(), which in 0usize..4) {
        let d = match which {
            0 => ShiftDistribution::uniform(-0.2, 0.1).unwrap(),
            1 => ShiftDistribution::cosine_bump(0.05, 0.1).unwrap(),
            2 => ShiftDistribution::bimodal_preset(),
            _ => ShiftDistribution::point_mass(0.1).unwrap(),
        };
        let (lo, hi) = d.support();
        let s = sample_shifts(&d, 50, seed).unwrap();
        prop_assert!(s.iter().all(|&x| (lo..=hi).contains(&x)));
        prop_assert_eq!(s, sample_shifts(&d, 50, seed).unwrap());
    }
}
