use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Baseline, GaussianPeak, SpecfitError, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop when an accepted step changes the residual sum by less than this fraction.
    pub rel_tol: f64,
    /// Stop when `‖Jᵀr‖` falls below this.
    pub grad_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 200, rel_tol: 1e-10, grad_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub center: f64,
    pub sigma: f64,
    pub area: f64,
    pub fwhm: f64,
    pub center_err: f64,
    pub sigma_err: f64,
    pub area_err: f64,
}

impl PeakEstimate {
    pub fn peak(&self) -> GaussianPeak {
        GaussianPeak::new(self.center, self.sigma, self.area)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub peaks: Vec<PeakEstimate>,
    pub baseline: Baseline,
    pub rms: f64,
    /// Parameter covariance in the order `b0, b1, (center, sigma, area)…`.
    pub covariance: Vec<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    /// Residual sum of squares after each accepted step, starting from the guess.
    pub residual_history: Vec<f64>,
    pub window: (f64, f64),
}

impl FitResult {
    pub fn eval(&self, nu: f64) -> f64 {
        self.baseline.eval(nu) + self.peaks.iter().map(|p| p.peak().eval(nu)).sum::<f64>()
    }
}

/// Model values and Jacobian for parameters `b0, b1, (c, σ, a)…`.
fn model(params: &[f64], nu: &[f64], reference: f64, jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
    let k = (params.len() - 2) / 3;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let mut out = Vec::with_capacity(nu.len());
    let mut jac = jac;
    for (i, &x) in nu.iter().enumerate() {
        let dx = x - reference;
        let mut v = params[0] + params[1] * dx;
        if let Some(j) = jac.as_deref_mut() {
            j[(i, 0)] = 1.0;
            j[(i, 1)] = dx;
        }
        for p in 0..k {
            let (c, s, a) = (params[2 + 3 * p], params[3 + 3 * p], params[4 + 3 * p]);
            let d = x - c;
            let e = norm / s * (-0.5 * d * d / (s * s)).exp();
            let g = a * e;
            v += g;
            if let Some(j) = jac.as_deref_mut() {
                j[(i, 2 + 3 * p)] = g * d / (s * s);
                j[(i, 3 + 3 * p)] = g * (d * d / (s * s * s) - 1.0 / s);
                j[(i, 4 + 3 * p)] = e;
            }
        }
        out.push(v);
    }
    out
}

/// Damped least-squares fit of baseline plus Gaussians inside `window`.
pub fn fit_gaussian_peaks(spectrum: &Spectrum, init: &[GaussianPeak], window: (f64, f64)) -> Result<FitResult, SpecfitError> {
    fit_gaussian_peaks_with(spectrum, init, window, &FitOptions::default())
}

pub fn fit_gaussian_peaks_with(
    spectrum: &Spectrum,
    init: &[GaussianPeak],
    window: (f64, f64),
    opts: &FitOptions,
) -> Result<FitResult, SpecfitError> {
    let (lo, hi) = window;
    let (s_lo, s_hi) = spectrum.range();
    if init.is_empty() {
        return Err(SpecfitError::InvalidArgument("at least one initial peak is required".into()));
    }
    if !(lo < hi) || lo < s_lo || hi > s_hi {
        return Err(SpecfitError::InvalidArgument(format!("window [{lo}, {hi}] is not inside the spectrum range [{s_lo}, {s_hi}]")));
    }
    if let Some(p) = init.iter().find(|p| !(p.sigma > 0.0) || p.area < 0.0) {
        return Err(SpecfitError::InvalidArgument(format!("initial peak {p:?} needs sigma > 0 and area >= 0")));
    }
    let (nu, y): (Vec<f64>, Vec<f64>) = spectrum
        .wavenumbers()
        .iter()
        .zip(spectrum.absorbance())
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(x, v)| (*x, *v))
        .unzip();
    let np = 2 + 3 * init.len();
    if nu.len() <= np {
        return Err(SpecfitError::InvalidArgument(format!("{} points in the window for {np} parameters", nu.len())));
    }
    let reference = 0.5 * (lo + hi);
    let mut params = vec![0.0; np];
    for (p, g) in init.iter().enumerate() {
        params[2 + 3 * p] = g.center;
        params[3 + 3 * p] = g.sigma;
        params[4 + 3 * p] = g.area;
    }
    // Start the baseline from the edges of the window.
    let peaks_only = model(&params, &nu, reference, None);
    let resid0: Vec<f64> = y.iter().zip(&peaks_only).map(|(a, b)| a - b).collect();
    let m = nu.len();
    let edge = (m / 10).max(1);
    let left = resid0[..edge].iter().sum::<f64>() / edge as f64;
    let right = resid0[m - edge..].iter().sum::<f64>() / edge as f64;
    let span = nu[m - 1] - nu[0];
    params[1] = if span > 0.0 { (right - left) / span } else { 0.0 };
    params[0] = 0.5 * (left + right);

    let cost_of = |p: &[f64]| -> (Vec<f64>, f64) {
        let f = model(p, &nu, reference, None);
        let r: Vec<f64> = f.iter().zip(&y).map(|(a, b)| a - b).collect();
        let c = r.iter().map(|v| v * v).sum();
        (r, c)
    };
    let (mut r, mut cost) = cost_of(&params);
    let mut jac = DMatrix::zeros(m, np);
    model(&params, &nu, reference, Some(&mut jac));
    let mut history = vec![cost];
    let mut lambda: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &rv;
        if grad.norm() < opts.grad_tol {
            converged = true;
            break;
        }
        let lam = *lambda.get_or_insert_with(|| 1e-3 * jtj.diagonal().max());
        let mut damped = jtj.clone();
        for i in 0..np {
            damped[(i, i)] += lam * jtj[(i, i)].max(1e-12);
        }
        let step = damped.cholesky().map(|c| c.solve(&(-&grad)));
        let mut accepted = false;
        if let Some(step) = step {
            let mut trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + d).collect();
            let widths_ok = (0..init.len()).all(|p| trial[3 + 3 * p] > 0.0);
            for p in 0..init.len() {
                trial[4 + 3 * p] = trial[4 + 3 * p].max(0.0);
            }
            if widths_ok {
                let (rt, ct) = cost_of(&trial);
                if ct.is_finite() && ct < cost {
                    let rel = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                    params = trial;
                    r = rt;
                    cost = ct;
                    history.push(cost);
                    model(&params, &nu, reference, Some(&mut jac));
                    lambda = Some((lam * 0.3).max(1e-15));
                    accepted = true;
                    if rel < opts.rel_tol {
                        converged = true;
                        break;
                    }
                }
            }
        }
        if !accepted {
            let next = lam * 4.0;
            if next > 1e16 * jtj.diagonal().max().max(1.0) {
                // No descent direction left at machine precision.
                converged = true;
                break;
            }
            lambda = Some(next);
        }
    }

    let dof = (m - np) as f64;
    let s2 = cost / dof;
    let jtj = jac.transpose() * &jac;
    let cov = jtj
        .clone()
        .cholesky()
        .map(|c| c.inverse() * s2)
        .or_else(|| jtj.pseudo_inverse(1e-14).ok().map(|p| p * s2))
        .unwrap_or_else(|| DMatrix::from_element(np, np, f64::NAN));
    let err = |i: usize| cov[(i, i)].max(0.0).sqrt();
    let mut peaks = Vec::with_capacity(init.len());
    for p in 0..init.len() {
        let (c, s, a) = (params[2 + 3 * p], params[3 + 3 * p], params[4 + 3 * p]);
        if c < lo || c > hi {
            return Err(SpecfitError::BoundViolation { index: p, center: c, lo, hi });
        }
        peaks.push(PeakEstimate {
            center: c,
            sigma: s,
            area: a,
            fwhm: crate::units::SIGMA_TO_FWHM * s,
            center_err: err(2 + 3 * p),
            sigma_err: err(3 + 3 * p),
            area_err: err(4 + 3 * p),
        });
    }
    let covariance = (0..np).map(|i| (0..np).map(|j| cov[(i, j)]).collect()).collect();
    Ok(FitResult {
        peaks,
        baseline: Baseline { b0: params[0], b1: params[1], reference },
        rms: (cost / m as f64).sqrt(),
        covariance,
        converged,
        iterations,
        residual_history: history,
        window,
    })
}

/// Samples baseline plus peaks on `start, start + spacing, … <= end`, adding
/// uniform noise in `[-noise, noise]` from a seeded generator.
///
/// ```
/// use rotorcage::specfit::{simulate_spectrum, Baseline, GaussianPeak};
/// let s = simulate_spectrum(&[GaussianPeak::new(4140.0, 2.0, 1.0)], &Baseline::default(), (4120.0, 4160.0), 0.241, 0.0, 1).unwrap();
/// let i = s.wavenumbers().iter().position(|&x| x > 4139.9).unwrap();
/// assert!((s.absorbance()[i] - GaussianPeak::new(4140.0, 2.0, 1.0).eval(s.wavenumbers()[i])).abs() < 1e-15);
/// ```
pub fn simulate_spectrum(
    peaks: &[GaussianPeak],
    baseline: &Baseline,
    range: (f64, f64),
    spacing: f64,
    noise: f64,
    seed: u64,
) -> Result<Spectrum, SpecfitError> {
    if !(spacing > 0.0) {
        return Err(SpecfitError::InvalidArgument(format!("spacing must be positive, got {spacing}")));
    }
    if !(range.1 > range.0) {
        return Err(SpecfitError::InvalidArgument("range end must exceed start".into()));
    }
    let n = ((range.1 - range.0) / spacing + 1e-9).floor() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nu = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let x = range.0 + i as f64 * spacing;
        let mut v = baseline.eval(x) + peaks.iter().map(|p| p.eval(x)).sum::<f64>();
        if noise > 0.0 {
            v += noise * (2.0 * rng.random::<f64>() - 1.0);
        }
        nu.push(x);
        y.push(v);
    }
    Spectrum::new(nu, y)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Initial guesses from local maxima whose prominence exceeds five noise
/// levels, with the noise level from the median absolute deviation of
/// successive differences. Sorted by height, tallest first.
pub fn pick_peaks(spectrum: &Spectrum, window: (f64, f64)) -> Vec<GaussianPeak> {
    let pts: Vec<(f64, f64)> = spectrum
        .wavenumbers()
        .iter()
        .zip(spectrum.absorbance())
        .filter(|(x, _)| **x >= window.0 && **x <= window.1)
        .map(|(x, y)| (*x, *y))
        .collect();
    if pts.len() < 5 {
        return Vec::new();
    }
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let base = median(&mut ys);
    let mut diffs: Vec<f64> = pts.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let md = median(&mut diffs);
    let mut dev: Vec<f64> = diffs.iter().map(|d| (d - md).abs()).collect();
    let noise = 1.4826 * median(&mut dev) / 2f64.sqrt();
    let threshold = 5.0 * noise;
    let mut found = Vec::new();
    for i in 1..pts.len() - 1 {
        let (x, y) = pts[i];
        if !(y >= pts[i - 1].1 && y > pts[i + 1].1) {
            continue;
        }
        let left_min = pts[..i].iter().rev().take_while(|p| p.1 <= y).fold(y, |m, p| m.min(p.1));
        let right_min = pts[i + 1..].iter().take_while(|p| p.1 <= y).fold(y, |m, p| m.min(p.1));
        if y - left_min.max(right_min) <= threshold {
            continue;
        }
        let h = y - base;
        let half = base + 0.5 * h;
        let mut l = i;
        while l > 0 && pts[l].1 > half {
            l -= 1;
        }
        let mut r = i;
        while r + 1 < pts.len() && pts[r].1 > half {
            r += 1;
        }
        let hwhm = 0.5 * (pts[r].0 - pts[l].0).max(pts[1].0 - pts[0].0);
        let sigma = hwhm / (2.0 * 2f64.ln()).sqrt();
        found.push((h, GaussianPeak::new(x, sigma, h.max(0.0) * sigma * (2.0 * PI).sqrt())));
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    found.into_iter().map(|(_, p)| p).collect()
}
