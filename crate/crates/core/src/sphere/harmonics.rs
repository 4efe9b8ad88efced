use std::f64::consts::PI;

use num_complex::Complex64;

/// Fully normalized associated Legendre values `N_lm P_l^m(cos θ)` for
/// `0 <= m <= l <= l_max`, Condon–Shortley phase included.
///
/// With these, `Y_lm(θ, φ) = table.get(l, m) · e^{imφ}` for `m >= 0`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    l_max: u32,
    values: Vec<f64>,
}

impl LegendreTable {
    #[inline]
    fn slot(l: u32, m: u32) -> usize {
        (l * (l + 1) / 2 + m) as usize
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    /// Normalized value for `m >= 0`.
    #[inline]
    pub fn get(&self, l: u32, m: u32) -> f64 {
        self.values[Self::slot(l, m)]
    }

    /// `Y_lm(θ, φ)` for any `|m| <= l` using the stored polar part.
    pub fn ylm(&self, l: u32, m: i32, phi: f64) -> Complex64 {
        let am = m.unsigned_abs();
        let p = self.get(l, am);
        let y = Complex64::from_polar(p, am as f64 * phi);
        if m < 0 {
            let sign = if am % 2 == 0 { 1.0 } else { -1.0 };
            y.conj() * sign
        } else {
            y
        }
    }
}

/// Builds the normalized associated Legendre table at polar angle `theta`.
///
/// Uses the standard stable three-term recursion in `l` at fixed `m`,
/// seeded from the sectoral values.
pub fn legendre_table(l_max: u32, theta: f64) -> LegendreTable {
    let x = theta.cos();
    let s = theta.sin();
    let n = ((l_max + 1) * (l_max + 2) / 2) as usize;
    let mut values = vec![0.0; n];

    // Sectoral term: P̄_mm = (-1)^m sqrt((2m+1)/(4π) · Π (2k-1)/(2k)) sin^m θ
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= -s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        values[LegendreTable::slot(m, m)] = pmm;
        if m == l_max {
            break;
        }
        let mf = m as f64;
        let mut p_lm2 = pmm;
        let mut p_lm1 = x * (2.0 * mf + 3.0).sqrt() * pmm;
        values[LegendreTable::slot(m + 1, m)] = p_lm1;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lp = lf - 1.0;
            let b = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
            let p = a * (x * p_lm1 - b * p_lm2);
            values[LegendreTable::slot(l, m)] = p;
            p_lm2 = p_lm1;
            p_lm1 = p;
        }
    }
    LegendreTable { l_max, values }
}

/// Complex spherical harmonic `Y_lm(θ, φ)` with the Condon–Shortley phase.
///
/// ```
/// use rotorcage::sphere::sph_harm;
/// let y10 = sph_harm(1, 0, 0.3, 1.1);
/// let expected = (3.0 / (4.0 * std::f64::consts::PI)).sqrt() * 0.3f64.cos();
/// assert!((y10.re - expected).abs() < 1e-14 && y10.im.abs() < 1e-14);
/// ```
pub fn sph_harm(l: u32, m: i32, theta: f64, phi: f64) -> Complex64 {
    assert!(m.unsigned_abs() <= l, "|m| must not exceed l");
    legendre_table(l, theta).ylm(l, m, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn low_order_closed_forms() {
        let (t, p) = (0.7_f64, 2.3_f64);
        let i = Complex64::i();
        let y11 = -(3.0 / (8.0 * PI)).sqrt() * t.sin() * (i * p).exp();
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        let y22 = 0.25 * (15.0 / (2.0 * PI)).sqrt() * t.sin().powi(2) * (2.0 * i * p).exp();
        let y3m2 = 0.25 * (105.0 / (2.0 * PI)).sqrt() * t.sin().powi(2) * t.cos() * (-2.0 * i * p).exp();
        assert!(close(sph_harm(1, 1, t, p), y11, 1e-14));
        assert!(close(sph_harm(2, 0, t, p), Complex64::new(y20, 0.0), 1e-14));
        assert!(close(sph_harm(2, 2, t, p), y22, 1e-14));
        assert!(close(sph_harm(3, -2, t, p), y3m2, 1e-14));
    }

    #[test]
    fn negative_m_conjugation() {
        for l in 0..6u32 {
            for m in 1..=l as i32 {
                let a = sph_harm(l, -m, 1.2, 0.4);
                let b = sph_harm(l, m, 1.2, 0.4).conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!(close(a, b, 1e-13));
            }
        }
    }
}
