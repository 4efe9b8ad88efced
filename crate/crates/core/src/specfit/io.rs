use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{FitResult, SpecfitError, Spectrum};

pub const SPECTRUM_HEADER: [&str; 2] = ["wavenumber_cm1", "absorbance"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SpecfitError + '_ {
    move |source| SpecfitError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> SpecfitError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => SpecfitError::Io { path: path.to_path_buf(), source },
        kind => SpecfitError::Parse { path: path.to_path_buf(), line, message: format!("{kind:?}") },
    }
}

/// Reads a two-column spectrum. Rows may come in either order; the result is
/// sorted ascending.
pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum, SpecfitError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.len() != 2 || header.iter().zip(SPECTRUM_HEADER).any(|(a, b)| a != b) {
        return Err(SpecfitError::Schema(format!(
            "{}: expected header {}, found {}",
            path.display(),
            SPECTRUM_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let parse = |i: usize| -> Result<f64, SpecfitError> {
            let field = &record[i];
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| SpecfitError::Parse { path: path.to_path_buf(), line, message: format!("bad {} value {field:?}", SPECTRUM_HEADER[i]) })
        };
        rows.push((parse(0)?, parse(1)?, line));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(SpecfitError::Parse { path: path.to_path_buf(), line: w[1].2, message: format!("duplicate wavenumber {}", w[1].0) });
    }
    let (nu, a): (Vec<f64>, Vec<f64>) = rows.into_iter().map(|(x, y, _)| (x, y)).unzip();
    Spectrum::new(nu, a).map_err(|e| SpecfitError::Schema(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    t_min: f64,
    path: PathBuf,
}

fn time_from_name(name: &str) -> Option<f64> {
    name.strip_prefix("t_")?.strip_suffix("min.csv")?.parse().ok()
}

/// Loads time-tagged spectra from a directory of `t_<minutes>min.csv` files
/// or from a JSON manifest `[{"t_min": …, "path": …}]`. Relative manifest
/// paths resolve against the manifest's directory. Sorted by time.
pub fn load_time_series(path: impl AsRef<Path>) -> Result<Vec<Spectrum>, SpecfitError> {
    let path = path.as_ref();
    let mut entries: Vec<(f64, PathBuf)> = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path).map_err(io_err(path))? {
            let entry = entry.map_err(io_err(path))?;
            let name = entry.file_name();
            if let Some(t) = name.to_str().and_then(time_from_name) {
                entries.push((t, entry.path()));
            }
        }
        if entries.is_empty() {
            return Err(SpecfitError::Schema(format!("{}: no t_<minutes>min.csv files", path.display())));
        }
    } else {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let manifest: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| SpecfitError::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        entries = manifest.into_iter().map(|m| (m.t_min, if m.path.is_absolute() { m.path } else { base.join(m.path) })).collect();
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(SpecfitError::Schema(format!("two spectra at t = {} min", w[0].0)));
    }
    entries.into_iter().map(|(t, p)| load_spectrum(&p).map(|s| s.with_time(t))).collect()
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), SpecfitError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v}"))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_spectrum_csv(path: impl AsRef<Path>, spectrum: &Spectrum) -> Result<(), SpecfitError> {
    let header: Vec<String> = SPECTRUM_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = spectrum.wavenumbers().iter().zip(spectrum.absorbance()).map(|(x, y)| vec![*x, *y]);
    write_rows(path.as_ref(), &header, rows)
}

/// Observed data, total fit, baseline and each fitted peak over the fit window.
pub fn write_fit_overlay_csv(path: impl AsRef<Path>, spectrum: &Spectrum, fit: &FitResult) -> Result<(), SpecfitError> {
    let mut header: Vec<String> = vec!["wavenumber_cm1".into(), "observed".into(), "fit".into(), "baseline".into()];
    header.extend((1..=fit.peaks.len()).map(|i| format!("peak_{i}")));
    let (lo, hi) = fit.window;
    let rows = spectrum.wavenumbers().iter().zip(spectrum.absorbance()).filter(|(x, _)| **x >= lo && **x <= hi).map(|(x, y)| {
        let mut row = vec![*x, *y, fit.eval(*x), fit.baseline.eval(*x)];
        row.extend(fit.peaks.iter().map(|p| p.peak().eval(*x)));
        row
    });
    write_rows(path.as_ref(), &header, rows)
}
