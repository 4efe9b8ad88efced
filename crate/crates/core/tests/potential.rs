use num_complex::Complex64;
use proptest::prelude::*;
use rotorcage::potential::{
    decompose_spherical_tensors, fit_angular_fourier, fit_radial_harmonic, AngularSamples, RadialSamples, TensorDecomposition,
};
use rotorcage::sphere::{lm_count, lm_index, sph_harm};

const K_MAX: u32 = 4;

/// Coefficients of a real field: `c_{k,-q} = (-1)^q conj(c_kq)`.
fn real_coefficients(raw: &[(f64, f64)]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); lm_count(K_MAX)];
    let mut it = raw.iter();
    for k in 0..=K_MAX {
        for q in 0..=k as i32 {
            let &(re, im) = it.next().unwrap();
            let v = if q == 0 { Complex64::new(re, 0.0) } else { Complex64::new(re, im) };
            c[lm_index(k, q)] = v;
            if q > 0 {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                c[lm_index(k, -q)] = v.conj() * sign;
            }
        }
    }
    c
}

fn field_from(c: &[Complex64]) -> impl Fn(f64, f64) -> f64 + '_ {
    move |theta, phi| {
        let mut v = Complex64::new(0.0, 0.0);
        for k in 0..=K_MAX {
            for q in -(k as i32)..=k as i32 {
                v += c[lm_index(k, q)] * sph_harm(k, q, theta, phi);
            }
        }
        v.re
    }
}

fn coefficient_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 15)
}

fn max_diff(a: &TensorDecomposition, b: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..=K_MAX {
        for q in -(k as i32)..=k as i32 {
            worst = worst.max((a.coefficient(k, q) - b[lm_index(k, q)]).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn band_limited_fields_reconstruct(raw in coefficient_strategy(), pts in prop::collection::vec((0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU), 8)) {
        let c = real_coefficients(&raw);
        let field = field_from(&c);
        let d = decompose_spherical_tensors(&field, K_MAX).unwrap();
        prop_assert!(max_diff(&d, &c) < 1e-9);
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (t, p) in pts {
            prop_assert!((d.reconstruct(t, p) - field(t, p)).abs() <= 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn real_fields_obey_the_reality_constraint(a in -5.0..5.0f64, b in -5.0..5.0f64, s in -5.0..5.0f64) {
        let field = move |t: f64, p: f64| a * t.cos().powi(3) + b * t.sin() * (p + s).cos() + s * (t.sin() * p.sin()).powi(2);
        let d = decompose_spherical_tensors(&field, K_MAX).unwrap();
        for k in 0..=K_MAX {
            for q in 0..=k as i32 {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = d.coefficient(k, -q);
                let rhs = d.coefficient(k, q).conj() * sign;
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn azimuthal_rotation_phases_coefficients(raw in coefficient_strategy(), alpha in 0.0..std::f64::consts::TAU) {
        let c = real_coefficients(&raw);
        let field = field_from(&c);
        let rotated = |t: f64, p: f64| field(t, p - alpha);
        let d = decompose_spherical_tensors(&field, K_MAX).unwrap();
        let r = decompose_spherical_tensors(&rotated, K_MAX).unwrap();
        for k in 0..=K_MAX {
            for q in -(k as i32)..=k as i32 {
                let expected = d.coefficient(k, q) * Complex64::from_polar(1.0, -(q as f64) * alpha);
                prop_assert!((r.coefficient(k, q) - expected).norm() < 1e-9);
            }
            prop_assert!((r.rank_power(k) - d.rank_power(k)).abs() <= 1e-9 * d.rank_power(k).max(1.0));
        }
    }

    #[test]
    fn harmonic_fit_is_exact_on_parabolas(k in 10.0..5000.0f64, r0 in -0.1..0.1f64, v0 in -500.0..500.0f64) {
        let pts = (0..=24).map(|i| -0.6 + 0.05 * i as f64).map(|r| (r, v0 + 0.5 * k * (r - r0) * (r - r0))).collect();
        let fit = fit_radial_harmonic(&RadialSamples::new(pts).unwrap()).unwrap();
        let scale = k.max(v0.abs());
        prop_assert!(fit.rms <= 1e-10 * scale);
        prop_assert!((fit.k - k).abs() <= 1e-9 * k);
        prop_assert!((fit.r0 - r0).abs() <= 1e-9);
        prop_assert!((fit.v0 - v0).abs() <= 1e-9 * scale);
    }

    #[test]
    fn fourier_rms_does_not_grow_with_order(a in -3.0..3.0f64, b in -3.0..3.0f64, w in 0.5..3.0f64) {
        let (thetas, phis) = AngularSamples::midpoint_grid(24, 24);
        let s = AngularSamples::from_fn(thetas, phis, |t, p| (a * t.cos()).exp() + b * (w * t).sin() * (2.0 * p).cos()).unwrap();
        let rms: Vec<f64> = (1..=6).map(|order| fit_angular_fourier(&s, order).unwrap().rms).collect();
        for w in rms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-13, "{rms:?}");
        }
    }
}
