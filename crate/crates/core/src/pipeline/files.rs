//! File names and formats of every stage's inputs and outputs.
//!
//! | file | written by | contents |
//! |---|---|---|
//! | `potential_fit.json` | `fit-potential` | harmonic and Fourier fits |
//! | `decomposition.json` | `decompose` | `{k_max, coefficients, rank_power, channels}` |
//! | `eigenvalues.csv` | `solve` | `index,energy_cm1,residual` |
//! | `eigenvectors.bin` | `solve` | `RCEV`, `u64` dim, `u64` count, `f64` LE vectors |
//! | `solve.json` | `solve` | solver diagnostics |
//! | `states.json`, `states.csv` | `assign` | labels with overlap tables; assignment table |
//! | `transitions.json`, `peaks.csv`, `lines.csv`, `pathways.csv` | `transitions` | peak and pathway tables |
//! | `report.json` or the CSV bundle | `pipeline` | everything above |

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::report::{Report, Section};
use super::{output_err, PipelineError};
use crate::numfmt::fmt;
use crate::spectroscopy::{write_pathway_csv, write_peak_csv, TransitionLine};
use crate::states::write_assignment_csv;

pub const REPORT_JSON: &str = "report.json";
pub const POTENTIAL_FIT_JSON: &str = "potential_fit.json";
pub const DECOMPOSITION_JSON: &str = "decomposition.json";
pub const EIGENVALUES_CSV: &str = "eigenvalues.csv";
pub const EIGENVECTORS_BIN: &str = "eigenvectors.bin";
pub const SOLVE_JSON: &str = "solve.json";
pub const STATES_JSON: &str = "states.json";
pub const STATES_CSV: &str = "states.csv";
pub const DENSITY_DIR: &str = "densities";
pub const TRANSITIONS_JSON: &str = "transitions.json";
pub const PEAKS_CSV: &str = "peaks.csv";
pub const LINES_CSV: &str = "lines.csv";
pub const PATHWAYS_CSV: &str = "pathways.csv";
pub const FIT_JSON: &str = "fit.json";
pub const FIT_OVERLAY_CSV: &str = "fit_overlay.csv";
pub const KINETICS_JSON: &str = "kinetics.json";
pub const AREAS_CSV: &str = "areas.csv";

const MAGIC: &[u8; 4] = b"RCEV";

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), PipelineError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| output_err(path, e))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| output_err(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

/// Writes a CSV table with the given header.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| output_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(|e| output_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| output_err(path, e))?;
    }
    w.flush().map_err(|e| output_err(path, e))
}

/// Runs a module CSV writer against a file.
pub fn write_with(path: &Path, f: impl FnOnce(fs::File) -> csv::Result<()>) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| output_err(path, e))?;
    f(file).map_err(|e| output_err(path, e))
}

pub fn write_eigenvectors(path: &Path, dim: usize, vectors: &[Vec<f64>]) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| output_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| output_err(path, e));
    put(MAGIC)?;
    put(&(dim as u64).to_le_bytes())?;
    put(&(vectors.len() as u64).to_le_bytes())?;
    for v in vectors {
        if v.len() != dim {
            return Err(PipelineError::Output(format!("vector of length {} in a file of dimension {dim}", v.len())));
        }
        for x in v {
            put(&x.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| output_err(path, e))
}

/// Returns the dimension and vectors.
pub fn read_eigenvectors(path: &Path) -> Result<(usize, Vec<Vec<f64>>), PipelineError> {
    let bad = |m: String| PipelineError::Input(format!("{}: {m}", path.display()));
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| bad(e.to_string()))?;
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(bad("not an eigenvector file".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap()) as usize;
    let (dim, count) = (word(4), word(12));
    let expected = dim.checked_mul(count).and_then(|n| n.checked_mul(8)).and_then(|n| n.checked_add(20));
    if expected != Some(bytes.len()) {
        return Err(bad(format!("size {} does not match {count} vectors of dimension {dim}", bytes.len())));
    }
    let vectors = bytes[20..]
        .chunks_exact(8 * dim.max(1))
        .take(count)
        .map(|chunk| chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
        .collect();
    Ok((dim, vectors))
}

pub const LINE_HEADER: [&str; 7] = ["initial", "final", "position_cm1", "class", "delta_m", "spin", "peak"];

pub fn line_rows(lines: &[TransitionLine]) -> Vec<Vec<String>> {
    lines
        .iter()
        .map(|l| {
            vec![l.initial.clone(), l.final_.clone(), fmt(l.position), l.class.to_string(), l.delta_m.to_string(), l.spin.to_string(), l.label.clone()]
        })
        .collect()
}

fn status_row<T>(name: &str, s: &Section<T>) -> Vec<String> {
    match s {
        Section::Ok { .. } => vec![name.into(), "ok".into(), String::new()],
        Section::Skipped { reason } => vec![name.into(), "skipped".into(), reason.clone()],
    }
}

/// One CSV per report table plus `sections.csv` listing what ran.
pub fn write_csv_bundle(report: &Report, dir: &Path) -> Result<(), PipelineError> {
    let sections = vec![
        status_row("potential", &report.potential),
        status_row("decomposition", &report.decomposition),
        status_row("channels", &report.channels),
        status_row("states", &report.states),
        status_row("spectrum", &report.spectrum),
        status_row("pathways", &report.pathways),
    ];
    write_table(&dir.join("sections.csv"), &["section", "status", "reason"], sections)?;

    if let Some(p) = report.potential.data() {
        let r = &p.radial;
        write_table(&dir.join("radial_fit.csv"), &["k", "r0", "v0", "rms"], [vec![fmt(r.k), fmt(r.r0), fmt(r.v0), fmt(r.rms)]])?;
        let rows = p.angular.terms.iter().zip(&p.angular.coefficients).map(|(t, c)| vec![t.to_string(), fmt(*c)]);
        write_table(&dir.join("angular_fit.csv"), &["term", "coefficient"], rows)?;
    }
    if let Some(d) = report.decomposition.data() {
        let t = &d.decomposition;
        let mut rows = Vec::new();
        for k in 0..=t.k_max() {
            for q in -(k as i32)..=k as i32 {
                let c = t.coefficient(k, q);
                rows.push(vec![k.to_string(), q.to_string(), fmt(c.re), fmt(c.im)]);
            }
        }
        write_table(&dir.join("decomposition.csv"), &["k", "q", "re", "im"], rows)?;
        let rows = t.rank_powers().iter().enumerate().map(|(k, p)| vec![k.to_string(), fmt(*p)]).collect::<Vec<_>>();
        write_table(&dir.join("rank_power.csv"), &["k", "power"], rows)?;
    }
    if let Some(c) = report.channels.data() {
        let row = vec![
            c.delta_m0_open.to_string(),
            c.delta_m1_open.to_string(),
            fmt(c.rank_powers[0]),
            fmt(c.rank_powers[1]),
            fmt(c.rank_powers[2]),
            fmt(c.threshold),
        ];
        write_table(&dir.join("channels.csv"), &["delta_m0_open", "delta_m1_open", "r0", "r1", "r2", "epsilon"], [row])?;
    }
    if let Some(states) = report.states.data() {
        write_with(&dir.join(STATES_CSV), |f| write_assignment_csv(states, f))?;
        let rows = states.iter().map(|s| vec![s.index.to_string(), fmt(s.energy), s.tag(), s.spin.to_string()]);
        write_table(&dir.join("levels.csv"), &["index", "energy_cm1", "label", "spin"], rows)?;
    }
    if let Some(s) = report.spectrum.data() {
        write_with(&dir.join(PEAKS_CSV), |f| write_peak_csv(&s.peaks, f))?;
        write_table(&dir.join(LINES_CSV), &LINE_HEADER, line_rows(&s.lines))?;
    }
    if let Some(p) = report.pathways.data() {
        write_with(&dir.join(PATHWAYS_CSV), |f| write_pathway_csv(p, f))?;
    }
    if let Some(s) = &report.diagnostics.solver {
        let rows = s.eigenvalues.iter().zip(&s.residuals).enumerate().map(|(i, (e, r))| vec![i.to_string(), fmt(*e), fmt(*r)]);
        write_table(&dir.join(EIGENVALUES_CSV), &["index", "energy_cm1", "residual"], rows)?;
        let rows = s.history.iter().map(|h| vec![h.iter.to_string(), h.converged_count.to_string(), fmt(h.min_residual)]);
        write_table(&dir.join("solver_history.csv"), &["iter", "converged_count", "min_residual"], rows)?;
    }
    let rows = report.diagnostics.warnings.iter().map(|w| vec![w.clone()]);
    write_table(&dir.join("warnings.csv"), &["warning"], rows)
}
