use std::f64::consts::PI;

fn ln_fact(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` for integer angular momenta,
/// evaluated with the Racah sum in log-factorial form.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    let tri = ln_fact(j1 + j2 - j3) + ln_fact(j1 - j2 + j3) + ln_fact(-j1 + j2 + j3)
        - ln_fact(j1 + j2 + j3 + 1);
    let pre = 0.5
        * (tri
            + ln_fact(j1 + m1)
            + ln_fact(j1 - m1)
            + ln_fact(j2 + m2)
            + ln_fact(j2 - m2)
            + ln_fact(j3 + m3)
            + ln_fact(j3 - m3));
    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = ln_fact(k)
            + ln_fact(j1 + j2 - j3 - k)
            + ln_fact(j1 - m1 - k)
            + ln_fact(j2 + m2 - k)
            + ln_fact(j3 - j2 + m1 + k)
            + ln_fact(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (pre - den).exp();
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * sum
}

/// Gaunt coefficient `∮ Y_{l1 m1} Y_{l2 m2} Y_{l3 m3} dΩ`.
pub fn gaunt(l1: u32, m1: i32, l2: u32, m2: i32, l3: u32, m3: i32) -> f64 {
    let (l1, l2, l3) = (l1 as i64, l2 as i64, l3 as i64);
    let (m1, m2, m3) = (m1 as i64, m2 as i64, m3 as i64);
    let norm = (((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1)) as f64 / (4.0 * PI)).sqrt();
    norm * wigner_3j(l1, l2, l3, 0, 0, 0) * wigner_3j(l1, l2, l3, m1, m2, m3)
}

/// `⟨Y_jm| Y_kq |Y_j'm'⟩ = ∮ Y*_jm Y_kq Y_j'm' dΩ`.
pub fn ylm_matrix_element(j: u32, m: i32, k: u32, q: i32, jp: u32, mp: i32) -> f64 {
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * gaunt(j, -m, k, q, jp, mp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_symbols() {
        // (1 1 0; 1 -1 0) = 1/sqrt(3)
        assert!((wigner_3j(1, 1, 0, 1, -1, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // (1 1 2; 0 0 0) = sqrt(2/15)
        assert!((wigner_3j(1, 1, 2, 0, 0, 0) - (2.0f64 / 15.0).sqrt()).abs() < 1e-14);
        // (2 2 2; 0 0 0) = -sqrt(2/35)
        assert!((wigner_3j(2, 2, 2, 0, 0, 0) + (2.0f64 / 35.0).sqrt()).abs() < 1e-14);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
    }

    #[test]
    fn p2_expectation_in_j1() {
        // <1m|P2|1m> = (2 - 3m²)/5 with P2 = sqrt(4π/5) Y20
        let s = (4.0 * PI / 5.0).sqrt();
        assert!((s * ylm_matrix_element(1, 0, 2, 0, 1, 0) - 0.4).abs() < 1e-14);
        assert!((s * ylm_matrix_element(1, 1, 2, 0, 1, 1) + 0.2).abs() < 1e-14);
    }
}
