use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PotentialError;

/// Radial scan: displacement from equilibrium (Å) against energy (cm⁻¹).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    points: Vec<(f64, f64)>,
}

impl RadialSamples {
    pub const MIN_POINTS: usize = 5;

    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, PotentialError> {
        if points.len() < Self::MIN_POINTS {
            return Err(PotentialError::Validation(format!(
                "radial scan needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        for (i, (r, v)) in points.iter().enumerate() {
            if !r.is_finite() || !v.is_finite() {
                return Err(PotentialError::Validation(format!("non-finite value at sample {i}")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 == w[0].0 {
                return Err(PotentialError::Validation(format!(
                    "duplicate abscissa r = {} at samples {} and {}",
                    w[0].0,
                    i,
                    i + 1
                )));
            }
            if w[1].0 < w[0].0 {
                return Err(PotentialError::Validation(format!(
                    "r must be strictly increasing (sample {} has r = {} after r = {})",
                    i + 1,
                    w[1].0,
                    w[0].0
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rectangular orientation scan, row-major with θ as the outer index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSamples {
    thetas: Vec<f64>,
    phis: Vec<f64>,
    values: Vec<f64>,
}

impl AngularSamples {
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if thetas.len() < 2 {
            return Err(PotentialError::Validation(
                "angular grid needs at least two θ rows to span the polar range".into(),
            ));
        }
        if phis.len() < 2 {
            return Err(PotentialError::Validation("angular grid needs at least two φ columns".into()));
        }
        if values.len() != thetas.len() * phis.len() {
            return Err(PotentialError::Validation(format!(
                "{} values for a {}×{} grid",
                values.len(),
                thetas.len(),
                phis.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PotentialError::Validation(format!("non-finite energy at sample {i}")));
        }
        for w in thetas.windows(2) {
            if w[1] <= w[0] {
                return Err(PotentialError::Validation(format!(
                    "θ rows must be strictly increasing and distinct (θ = {} then {})",
                    w[0], w[1]
                )));
            }
        }
        if thetas[0] <= 0.0 || *thetas.last().unwrap() >= PI {
            return Err(PotentialError::Validation("θ nodes must lie strictly inside (0, π)".into()));
        }
        let n = phis.len();
        let step = 2.0 * PI / n as f64;
        if phis[0] < 0.0 || phis[0] >= step + 1e-9 {
            return Err(PotentialError::Validation(format!(
                "φ grid must start in [0, 2π/n), got {}",
                phis[0]
            )));
        }
        for (k, phi) in phis.iter().enumerate() {
            let expected = phis[0] + step * k as f64;
            if (phi - expected).abs() > 1e-6 * 2.0 * PI {
                return Err(PotentialError::Validation(format!(
                    "φ nodes must be uniform over one period: node {k} is {phi}, expected {expected}"
                )));
            }
        }
        Ok(Self { thetas, phis, values })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phis.len() + i_phi]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Samples an analytic field on the grid; handy for synthetic inputs.
    pub fn from_fn(thetas: Vec<f64>, phis: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self, PotentialError> {
        let values = thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).map(|(t, p)| f(t, p)).collect();
        Self::new(thetas, phis, values)
    }

    /// Midpoint θ rows and uniform φ columns, the layout used by the shipped scans.
    pub fn midpoint_grid(n_theta: usize, n_phi: usize) -> (Vec<f64>, Vec<f64>) {
        let thetas = (0..n_theta).map(|j| (j as f64 + 0.5) * PI / n_theta as f64).collect();
        let phis = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        (thetas, phis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Radial,
    Angular,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSamples {
    Radial(RadialSamples),
    Angular(AngularSamples),
}

pub const RADIAL_HEADER: [&str; 2] = ["r_angstrom", "v_wavenumber"];
pub const ANGULAR_HEADER: [&str; 3] = ["theta_rad", "phi_rad", "v_wavenumber"];

pub fn load_potential_samples(path: &Path, kind: SampleKind) -> Result<PotentialSamples, PotentialError> {
    match kind {
        SampleKind::Radial => load_radial_samples(path).map(PotentialSamples::Radial),
        SampleKind::Angular => load_angular_samples(path).map(PotentialSamples::Angular),
    }
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>, PotentialError> {
    let io_err = |source| PotentialError::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| PotentialError::Parse { path: path.to_path_buf(), line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(PotentialError::Schema {
            path: path.to_path_buf(),
            message: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| PotentialError::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(PotentialError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(header.len());
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| PotentialError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("`{field}` is not a number"),
            })?;
            row.push(v);
        }
        rows.push((line, row));
    }
    Ok(rows)
}

pub fn load_radial_samples(path: &Path) -> Result<RadialSamples, PotentialError> {
    let rows = read_rows(path, &RADIAL_HEADER)?;
    RadialSamples::new(rows.into_iter().map(|(_, r)| (r[0], r[1])).collect())
}

pub fn load_angular_samples(path: &Path) -> Result<AngularSamples, PotentialError> {
    let rows = read_rows(path, &ANGULAR_HEADER)?;
    let schema = |message: String| PotentialError::Schema { path: path.to_path_buf(), message };
    if rows.is_empty() {
        return Err(schema("no samples".into()));
    }
    // Group consecutive rows sharing θ; the first group fixes the φ columns.
    let mut groups: Vec<(f64, Vec<(usize, f64, f64)>)> = Vec::new();
    for (line, r) in &rows {
        match groups.last_mut() {
            Some((theta, g)) if *theta == r[0] => g.push((*line, r[1], r[2])),
            _ => {
                if groups.iter().any(|(t, _)| *t == r[0]) {
                    return Err(schema(format!(
                        "line {line}: θ = {} appears in two separate rows (θ must be the outer index)",
                        r[0]
                    )));
                }
                groups.push((r[0], vec![(*line, r[1], r[2])]));
            }
        }
    }
    if groups.len() < 2 {
        return Err(schema("a single θ row cannot span the polar range".into()));
    }
    let phis: Vec<f64> = groups[0].1.iter().map(|(_, p, _)| *p).collect();
    let mut thetas = Vec::with_capacity(groups.len());
    let mut values = Vec::with_capacity(rows.len());
    for (theta, g) in &groups {
        if g.len() != phis.len() {
            return Err(schema(format!(
                "line {}: row for θ = {theta} has {} points, expected {}",
                g[0].0,
                g.len(),
                phis.len()
            )));
        }
        for ((line, phi, v), expected) in g.iter().zip(&phis) {
            if phi != expected {
                return Err(schema(format!("line {line}: φ = {phi} breaks the rectangular grid")));
            }
            values.push(*v);
        }
        thetas.push(*theta);
    }
    AngularSamples::new(thetas, phis, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn angular_60_by_60() {
        let (th, ph) = AngularSamples::midpoint_grid(60, 60);
        let mut s = String::from("theta_rad,phi_rad,v_wavenumber\n");
        for t in &th {
            for p in &ph {
                s.push_str(&format!("{t},{p},{}\n", t.cos() * p.sin()));
            }
        }
        let f = write(&s);
        let samples = load_angular_samples(f.path()).unwrap();
        assert_eq!(samples.len(), 3600);
        assert_eq!(samples.thetas().len(), 60);
    }

    #[test]
    fn decreasing_radial_rejected() {
        let f = write("r_angstrom,v_wavenumber\n0.2,1\n0.1,0\n0.0,1\n-0.1,2\n-0.2,3\n");
        assert!(matches!(load_radial_samples(f.path()), Err(PotentialError::Validation(_))));
    }

    #[test]
    fn duplicate_radial_rejected() {
        let f = write("r_angstrom,v_wavenumber\n-0.2,1\n-0.1,0\n-0.1,1\n0.1,2\n0.2,3\n");
        let err = load_radial_samples(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn single_theta_row_is_schema_error() {
        let f = write("theta_rad,phi_rad,v_wavenumber\n1.0,0.0,1\n1.0,1.5,1\n1.0,3.0,1\n1.0,4.5,1\n");
        assert!(matches!(load_angular_samples(f.path()), Err(PotentialError::Schema { .. })));
    }

    #[test]
    fn ragged_grid_is_schema_error() {
        let f = write("theta_rad,phi_rad,v_wavenumber\n1.0,0.0,1\n1.0,3.14159,1\n2.0,0.0,1\n");
        assert!(matches!(load_angular_samples(f.path()), Err(PotentialError::Schema { .. })));
    }

    #[test]
    fn malformed_row_reports_line() {
        let f = write("r_angstrom,v_wavenumber\n-0.2,1\n-0.1,zero\n0.0,0\n0.1,1\n0.2,3\n");
        match load_radial_samples(f.path()) {
            Err(PotentialError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header() {
        let f = write("r,v\n0,0\n");
        assert!(matches!(load_radial_samples(f.path()), Err(PotentialError::Schema { .. })));
    }
}
