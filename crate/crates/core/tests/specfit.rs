use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rotorcage::specfit::{fit_conversion_kinetics, fit_gaussian_peaks, simulate_spectrum, Baseline, GaussianPeak, Spectrum};

const RANGE: (f64, f64) = (4120.0, 4170.0);

fn peaks_strategy() -> impl Strategy<Value = Vec<GaussianPeak>> {
    // Well-separated centers inside the window.
    prop::collection::vec((-1.0..1.0f64, 1.0..3.0f64, 0.2..2.0f64), 1..4).prop_map(|raw| {
        raw.iter().enumerate().map(|(i, (dc, s, a))| GaussianPeak::new(4130.0 + 12.0 * i as f64 + dc, *s, *a)).collect()
    })
}

fn baseline_strategy() -> impl Strategy<Value = Baseline> {
    (-0.05..0.05f64, -1e-3..1e-3f64).prop_map(|(b0, b1)| Baseline { b0, b1, reference: 4145.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_round_trip(peaks in peaks_strategy(), baseline in baseline_strategy()) {
        let s = simulate_spectrum(&peaks, &baseline, RANGE, 0.241, 0.0, 0).unwrap();
        let fit = fit_gaussian_peaks(&s, &peaks, s.range()).unwrap();
        prop_assert!(fit.converged);
        for (e, t) in fit.peaks.iter().zip(&peaks) {
            prop_assert!((e.center - t.center).abs() < 1e-8);
            prop_assert!((e.sigma - t.sigma).abs() < 1e-8);
            prop_assert!((e.area - t.area).abs() < 1e-8);
        }
    }

    #[test]
    fn accepted_residuals_never_increase(peaks in peaks_strategy(), seed: u64, offset in -0.8..0.8f64) {
        let s = simulate_spectrum(&peaks, &Baseline::default(), RANGE, 0.241, 0.01, seed).unwrap();
        let init: Vec<GaussianPeak> = peaks.iter().map(|p| GaussianPeak::new(p.center + offset, p.sigma * 1.2, p.area * 0.8)).collect();
        let fit = fit_gaussian_peaks(&s, &init, s.range()).unwrap();
        prop_assert!(fit.residual_history.len() >= 2);
        for w in fit.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(fit.rms >= 0.0);
    }

    #[test]
    fn axis_shift_moves_only_centers(peaks in peaks_strategy(), seed: u64, delta in -50.0..50.0f64) {
        let s = simulate_spectrum(&peaks, &Baseline::default(), RANGE, 0.241, 0.01, seed).unwrap();
        let moved = Spectrum::new(s.wavenumbers().iter().map(|x| x + delta).collect(), s.absorbance().to_vec()).unwrap();
        let init: Vec<GaussianPeak> = peaks.iter().map(|p| GaussianPeak::new(p.center + 0.2, p.sigma, p.area)).collect();
        let init_moved: Vec<GaussianPeak> = init.iter().map(|p| GaussianPeak::new(p.center + delta, p.sigma, p.area)).collect();
        let a = fit_gaussian_peaks(&s, &init, s.range()).unwrap();
        let b = fit_gaussian_peaks(&moved, &init_moved, moved.range()).unwrap();
        for (x, y) in a.peaks.iter().zip(&b.peaks) {
            prop_assert!((y.center - x.center - delta).abs() < 1e-8);
            prop_assert!((y.sigma - x.sigma).abs() < 1e-8);
            prop_assert!((y.area - x.area).abs() < 1e-8);
        }
        prop_assert!((a.rms - b.rms).abs() < 1e-8);
        prop_assert!((a.baseline.b0 - b.baseline.b0).abs() < 1e-8 && (a.baseline.b1 - b.baseline.b1).abs() < 1e-8);
    }

    #[test]
    fn simulation_is_reproducible(peaks in peaks_strategy(), seed: u64, noise in 0.0..0.1f64) {
        let a = simulate_spectrum(&peaks, &Baseline::default(), RANGE, 0.241, noise, seed).unwrap();
        let b = simulate_spectrum(&peaks, &Baseline::default(), RANGE, 0.241, noise, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn flat_and_single_peak_simulations() {
    let base = Baseline { b0: 0.3, b1: 0.0, reference: 0.0 };
    let s = simulate_spectrum(&[], &base, RANGE, 0.241, 0.0, 1).unwrap();
    assert!(s.absorbance().iter().all(|&y| y == 0.3));
    let p = GaussianPeak::new(4140.0, 2.0, 1.0);
    let s = simulate_spectrum(&[p], &Baseline::default(), RANGE, 0.241, 0.0, 1).unwrap();
    for (x, y) in s.wavenumbers().iter().zip(s.absorbance()) {
        let expected = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt()) * (-(x - 4140.0).powi(2) / 8.0).exp();
        assert!((y - expected).abs() < 1e-15);
    }
}

/// Residual of the best linear model (baseline plus two fixed-shape peaks)
/// for given centers.
fn linear_residual(s: &Spectrum, c1: f64, c2: f64, sigma: f64) -> f64 {
    let n = s.len();
    let g = |x: f64, c: f64| (-(x - c).powi(2) / (2.0 * sigma * sigma)).exp();
    let a = DMatrix::from_fn(n, 4, |i, j| {
        let x = s.wavenumbers()[i];
        match j {
            0 => 1.0,
            1 => x - 4140.0,
            2 => g(x, c1),
            _ => g(x, c2),
        }
    });
    let y = DVector::from_column_slice(s.absorbance());
    let coef = a.clone().svd(true, true).solve(&y, 1e-14).unwrap();
    (a * coef - y).norm_squared()
}

#[test]
fn overlapping_pair_lies_in_the_global_basin() {
    let sigma = 2.0;
    let truth = [GaussianPeak::new(4139.0, sigma, 1.0), GaussianPeak::new(4141.0, sigma, 0.7)];
    let s = simulate_spectrum(&truth, &Baseline::default(), (4125.0, 4155.0), 0.241, 0.0, 0).unwrap();

    // The scan over center pairs has its minimum at the truth.
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in -15..=15 {
        for j in -15..=15 {
            let (c1, c2) = (4139.0 + 0.1 * i as f64, 4141.0 + 0.1 * j as f64);
            if c2 <= c1 {
                continue;
            }
            let r = linear_residual(&s, c1, c2, sigma);
            if r < best.0 {
                best = (r, c1, c2);
            }
        }
    }
    assert!((best.1 - 4139.0).abs() < 1e-9 && (best.2 - 4141.0).abs() < 1e-9, "{best:?}");

    for (d1, d2) in [(0.5, -0.5), (-0.5, 0.5), (0.4, 0.4), (-0.45, -0.3), (0.3, -0.2)] {
        let init = [GaussianPeak::new(4139.0 + d1, 2.3, 0.8), GaussianPeak::new(4141.0 + d2, 1.8, 0.9)];
        let fit = fit_gaussian_peaks(&s, &init, s.range()).unwrap();
        assert!((fit.peaks[0].center - 4139.0).abs() < 0.01, "{d1},{d2}: {}", fit.peaks[0].center);
        assert!((fit.peaks[1].center - 4141.0).abs() < 0.01, "{d1},{d2}: {}", fit.peaks[1].center);
    }
}

#[test]
fn conversion_series_conserves_area() {
    let (k, total, ortho0, ortho_inf): (f64, f64, f64, f64) = (0.075, 1.5, 1.1, 0.3);
    let times = [0.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 60.0, 90.0];
    let init = [GaussianPeak::new(4134.0, 2.0, 1.0), GaussianPeak::new(4144.0, 2.0, 0.5)];
    let mut series_i = Vec::new();
    let mut series_ii = Vec::new();
    for &t in &times {
        let ortho = ortho_inf + (ortho0 - ortho_inf) * (-k * t).exp();
        let truth = [GaussianPeak::new(4134.4, 2.0, ortho), GaussianPeak::new(4143.9, 2.0, total - ortho)];
        let s = simulate_spectrum(&truth, &Baseline::default(), (4120.0, 4160.0), 0.241, 0.0, 0).unwrap();
        let fit = fit_gaussian_peaks(&s, &init, s.range()).unwrap();
        let (a1, a2) = (fit.peaks[0].area, fit.peaks[1].area);
        assert!((a1 + a2 - total).abs() < 1e-6, "t = {t}: {}", a1 + a2);
        series_i.push((t, a1));
        series_ii.push((t, a2));
    }
    let ki = fit_conversion_kinetics(&series_i).unwrap();
    let kii = fit_conversion_kinetics(&series_ii).unwrap();
    assert!((ki.rate_k - k).abs() < 1e-6 && (kii.rate_k - k).abs() < 1e-6);
    assert!((ki.a0 + kii.a0 - total).abs() < 1e-6);
    assert!((ki.a_inf + kii.a_inf - total).abs() < 1e-6);
    // Complementarity: what peak I loses, peak II gains.
    assert!(((ki.a0 - ki.a_inf) + (kii.a0 - kii.a_inf)).abs() < 1e-6);
}
