use serde::{Deserialize, Serialize};

use super::SpecfitError;

/// `A(t) = a_inf + (a0 - a_inf)·exp(-k·t)` with `t` in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticsFit {
    /// Rate constant in min⁻¹.
    pub rate_k: f64,
    pub a0: f64,
    pub a_inf: f64,
    pub rms: f64,
    /// Set when the data carry no detectable decay; `k` is then zero and
    /// both amplitudes equal the mean.
    pub degenerate: bool,
}

impl KineticsFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.a_inf + (self.a0 - self.a_inf) * (-self.rate_k * t).exp()
    }

    pub fn half_life(&self) -> Option<f64> {
        (self.rate_k > 0.0).then(|| std::f64::consts::LN_2 / self.rate_k)
    }
}

/// Best amplitudes at fixed `k` and the resulting residual sum of squares.
fn amplitudes(t: &[f64], y: &[f64], k: f64) -> (f64, f64, f64) {
    // Basis: u = 1 - e (a_inf), e (a0).
    let (mut suu, mut sue, mut see, mut suy, mut sey) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let e = (-k * ti).exp();
        let u = 1.0 - e;
        suu += u * u;
        sue += u * e;
        see += e * e;
        suy += u * yi;
        sey += e * yi;
    }
    let det = suu * see - sue * sue;
    let (mut a_inf, mut a0) = if det.abs() > 1e-14 * (suu * see).max(f64::MIN_POSITIVE) {
        ((suy * see - sey * sue) / det, (suu * sey - sue * suy) / det)
    } else {
        (0.0, sey / see)
    };
    if a_inf < 0.0 {
        a_inf = 0.0;
        a0 = sey / see;
    }
    let ssr = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let e = (-k * ti).exp();
            let r = yi - (a_inf * (1.0 - e) + a0 * e);
            r * r
        })
        .sum();
    (a_inf, a0, ssr)
}

/// Brent's parabolic minimizer on `[a, b]`.
fn brent_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const CGOLD: f64 = 0.381_966_011_250_105;
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    x
}

/// Fits first-order kinetics to `(minutes, area)` pairs.
///
/// ```
/// use rotorcage::specfit::fit_conversion_kinetics;
/// let series: Vec<(f64, f64)> = (0..=90).map(|t| (t as f64, 1.0 + 2.0 * (-0.075 * t as f64).exp())).collect();
/// let fit = fit_conversion_kinetics(&series).unwrap();
/// assert!((fit.rate_k - 0.075).abs() < 1e-6);
/// ```
pub fn fit_conversion_kinetics(series: &[(f64, f64)]) -> Result<KineticsFit, SpecfitError> {
    let (times, areas): (Vec<f64>, Vec<f64>) = series.iter().cloned().unzip();
    let (times, areas) = (&times[..], &areas[..]);
    if times.len() < 4 {
        return Err(SpecfitError::InvalidArgument(format!("kinetics needs at least 4 points, got {}", times.len())));
    }
    if times.iter().chain(areas).any(|v| !v.is_finite()) || times.iter().any(|t| *t < 0.0) {
        return Err(SpecfitError::InvalidArgument("times must be finite and non-negative, areas finite".into()));
    }
    let n = times.len() as f64;
    let mean = areas.iter().sum::<f64>() / n;
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let t_min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let flat = KineticsFit {
        rate_k: 0.0,
        a0: mean,
        a_inf: mean,
        rms: (areas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt(),
        degenerate: true,
    };
    let (lo, hi) = areas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), a| (l.min(*a), h.max(*a)));
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let span = t_max - t_min;
    if hi - lo <= 1e-9 * scale || span <= 0.0 {
        return Ok(flat);
    }

    let ssr = |k: f64| amplitudes(times, areas, k).2;
    // Rates resolvable by the sampling lie between 0.001/span and 1000/spacing.
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let spacing = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(span, f64::min);
    let k_lo = 1e-3 / span;
    let k_hi = 1e3 / spacing;
    let steps = 200;
    let grid: Vec<f64> = (0..=steps).map(|i| k_lo * (k_hi / k_lo).powf(i as f64 / steps as f64)).collect();
    let values: Vec<f64> = grid.iter().map(|&k| ssr(k)).collect();
    let best = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap();
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(steps)];
    let k = brent_min(|lk| ssr(lk.exp()), a.ln(), b.ln(), 1e-10).exp();
    let (a_inf, a0, rss) = amplitudes(times, areas, k);

    // Reject the decay when it does not explain significantly more variance than a constant.
    let rss_flat = areas.iter().map(|a| (a - mean).powi(2)).sum::<f64>();
    let dof = n - 3.0;
    let f_stat = if dof > 0.0 && rss > 0.0 { ((rss_flat - rss) / 2.0) / (rss / dof) } else { f64::INFINITY };
    if f_stat <= 10.0 {
        return Ok(flat);
    }
    Ok(KineticsFit { rate_k: k, a0, a_inf, rms: (rss / n).sqrt(), degenerate: false })
}
