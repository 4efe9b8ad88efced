//! Q₁-branch lines, nuclear-spin conversion pathways and thermal
//! ortho:para ratios.
//!
//! Lines are enumerated between a `v = 0` manifold and a `v = 1` manifold
//! (by default an identical copy shifted by the band origin). Δm = 0 lines
//! are allowed; |m| = 1 → m′ = 0 lines are allowed but suppressed. Lines of
//! the same spin and class closer than the resolution merge into one peak.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt;
use crate::potential::ConversionChannels;
use crate::states::{AssignedState, Spin};
use crate::units::HC_OVER_KB;

pub const DEFAULT_RESOLUTION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum SpectroscopyError {
    #[error("empty manifold")]
    EmptyManifold,
    #[error("unassigned states present: {}", .0.join(", "))]
    Unassigned(Vec<String>),
    #[error("level table is missing `{0}`")]
    MissingLevel(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineClass {
    Allowed,
    Suppressed,
    SpinForbidden,
}

impl fmt::Display for LineClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineClass::Allowed => "allowed",
            LineClass::Suppressed => "suppressed",
            LineClass::SpinForbidden => "spin-forbidden",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    pub initial: String,
    pub initial_index: usize,
    #[serde(rename = "final")]
    pub final_: String,
    pub final_index: usize,
    pub delta_m: i32,
    pub class: LineClass,
    pub spin: Spin,
    pub position: f64,
    pub degeneracy: u32,
    /// Tag of the peak this line is reported in.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub label: String,
    pub position: f64,
    pub class: LineClass,
    pub spin: Spin,
    pub delta_m: i32,
    pub degeneracy: u32,
    /// `initial→final` tags of the merged components.
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q1Spectrum {
    pub lines: Vec<TransitionLine>,
    pub peaks: Vec<Peak>,
}

/// Upper-case Roman numeral for peak tags.
pub fn roman(mut n: usize) -> String {
    const TABLE: [(usize, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut s = String::new();
    for (v, r) in TABLE {
        while n >= v {
            s.push_str(r);
            n -= v;
        }
    }
    s
}

fn check_manifold(states: &[AssignedState]) -> Result<(), SpectroscopyError> {
    if states.is_empty() {
        return Err(SpectroscopyError::EmptyManifold);
    }
    let bad: Vec<String> =
        states.iter().filter(|s| s.ambiguous).map(|s| format!("#{} ({:.4} cm⁻¹)", s.index, s.energy)).collect();
    if !bad.is_empty() {
        return Err(SpectroscopyError::Unassigned(bad));
    }
    Ok(())
}

/// Enumerates Q₁ lines and merges them into reported peaks.
///
/// `v1` defaults to `v0`. Peak tags are Roman numerals in order of position,
/// assigned before merging; merged peaks join their tags with `/`.
pub fn enumerate_q1_transitions(
    v0: &[AssignedState],
    v1: Option<&[AssignedState]>,
    nu_origin: f64,
    resolution: f64,
) -> Result<Q1Spectrum, SpectroscopyError> {
    check_manifold(v0)?;
    let v1 = v1.unwrap_or(v0);
    check_manifold(v1)?;
    if !(resolution > 0.0) {
        return Err(SpectroscopyError::Domain(format!("resolution must be positive, got {resolution}")));
    }
    let mut lines = Vec::new();
    for i in v0 {
        for f in v1 {
            if f.j != i.j || f.n != i.n || f.l != i.l {
                continue;
            }
            let class = if f.m == i.m {
                LineClass::Allowed
            } else if i.m.abs == 1 && f.m.abs == 0 {
                LineClass::Suppressed
            } else {
                continue;
            };
            let position = nu_origin + f.energy - i.energy;
            if !(position > 0.0) {
                return Err(SpectroscopyError::Domain(format!("line {}→{} at non-positive position {position}", i.tag(), f.tag())));
            }
            lines.push(TransitionLine {
                initial: i.tag(),
                initial_index: i.index,
                final_: f.tag(),
                final_index: f.index,
                delta_m: f.m.abs as i32 - i.m.abs as i32,
                class,
                spin: i.spin,
                position,
                degeneracy: 1,
                label: String::new(),
            });
        }
    }
    if lines.is_empty() {
        return Err(SpectroscopyError::EmptyManifold);
    }

    // Exactly coincident lines of one (spin, class) group form a component;
    // components get tags in order of position.
    lines.sort_by(|a, b| {
        a.position
            .total_cmp(&b.position)
            .then(spin_rank(a.spin).cmp(&spin_rank(b.spin)))
            .then(a.class.cmp(&b.class))
            .then(a.initial_index.cmp(&b.initial_index))
    });
    let coincident = 1e-9 * nu_origin.abs().max(1.0);
    let mut components: Vec<Vec<usize>> = Vec::new();
    for (k, line) in lines.iter().enumerate() {
        let hit = components.iter_mut().find(|c| {
            let first = &lines[c[0]];
            first.spin == line.spin && first.class == line.class && (first.position - line.position).abs() <= coincident
        });
        match hit {
            Some(c) => c.push(k),
            None => components.push(vec![k]),
        }
    }
    let mut comp_tags = Vec::with_capacity(components.len());
    for (c, members) in components.iter().enumerate() {
        let tag = roman(c + 1);
        for &k in members {
            lines[k].label = tag.clone();
        }
        comp_tags.push(tag);
    }

    // Merge neighbouring components of one group within the resolution.
    let mut groups: BTreeMap<(u8, LineClass), Vec<usize>> = BTreeMap::new();
    for (c, members) in components.iter().enumerate() {
        let l = &lines[members[0]];
        groups.entry((spin_rank(l.spin), l.class)).or_default().push(c);
    }
    let mut peaks = Vec::new();
    for comps in groups.values() {
        let mut sorted = comps.clone();
        sorted.sort_by(|&a, &b| lines[components[a][0]].position.total_cmp(&lines[components[b][0]].position));
        let mut current: Vec<usize> = Vec::new();
        for c in sorted {
            let start_new = match current.last() {
                Some(&prev) => lines[components[c][0]].position - lines[components[prev][0]].position >= resolution,
                None => false,
            };
            if start_new {
                peaks.push(build_peak(&current, &components, &comp_tags, &mut lines));
                current.clear();
            }
            current.push(c);
        }
        if !current.is_empty() {
            peaks.push(build_peak(&current, &components, &comp_tags, &mut lines));
        }
    }
    peaks.sort_by(|a, b| a.position.total_cmp(&b.position).then(a.label.cmp(&b.label)));
    Ok(Q1Spectrum { lines, peaks })
}

fn spin_rank(s: Spin) -> u8 {
    match s {
        Spin::Ortho => 0,
        Spin::Para => 1,
    }
}

fn build_peak(comps: &[usize], components: &[Vec<usize>], tags: &[String], lines: &mut [TransitionLine]) -> Peak {
    let members: Vec<usize> = comps.iter().flat_map(|&c| components[c].iter().copied()).collect();
    let label = comps.iter().map(|&c| tags[c].as_str()).collect::<Vec<_>>().join("/");
    let degeneracy: u32 = members.iter().map(|&k| lines[k].degeneracy).sum();
    let position = members.iter().map(|&k| lines[k].position * lines[k].degeneracy as f64).sum::<f64>() / degeneracy as f64;
    for &k in &members {
        lines[k].label = label.clone();
    }
    let first = &lines[members[0]];
    Peak {
        label,
        position,
        class: first.class,
        spin: first.spin,
        delta_m: first.delta_m,
        degeneracy,
        components: members.iter().map(|&k| format!("{}→{}", lines[k].initial, lines[k].final_)).collect(),
    }
}

/// Energies of the four lowest-manifold levels `|11⟩, |00⟩, |11̄⟩, |10⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    pub e_11: f64,
    pub e_00: f64,
    pub e_11bar: f64,
    pub e_10: f64,
}

impl LevelTable {
    /// From a map keyed `11`, `00`, `11bar`, `10`.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, SpectroscopyError> {
        let get = |k: &str| map.get(k).copied().ok_or_else(|| SpectroscopyError::MissingLevel(k.to_string()));
        Ok(Self { e_11: get("11")?, e_00: get("00")?, e_11bar: get("11bar")?, e_10: get("10")? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedPeak {
    pub label: String,
    pub position: f64,
    pub class: LineClass,
    pub spin: Spin,
    pub delta_m: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedLines {
    pub peaks: Vec<PredictedPeak>,
    /// Offset of peak IV from the calibration peak, `E(|10⟩) - E(|11⟩)`.
    pub iv_offset: f64,
    /// `E(|00⟩) - E(|11⟩)`, the state-difference reading of the para offset.
    pub para_offset_state_diff: f64,
}

/// Line positions under identical `v = 0` and `v = 1` manifolds, anchored so
/// that the Δm = 0 lines sit at `nu_ref`.
///
/// ```
/// use rotorcage::spectroscopy::{predict_line_positions, LevelTable};
/// let co2 = LevelTable { e_11: 369.2, e_00: 386.0, e_11bar: 406.1, e_10: 430.1 };
/// let p = predict_line_positions(&co2, 4134.4);
/// assert!((p.peaks[2].position - 4158.4).abs() < 1e-9);
/// assert!((p.iv_offset - 60.9).abs() < 1e-9);
/// ```
pub fn predict_line_positions(levels: &LevelTable, nu_ref: f64) -> PredictedLines {
    let peak = |label: &str, position, class, spin, delta_m| PredictedPeak { label: label.into(), position, class, spin, delta_m };
    let peaks = vec![
        peak("I", nu_ref, LineClass::Allowed, Spin::Ortho, 0),
        peak("II", nu_ref, LineClass::Allowed, Spin::Para, 0),
        peak("III", nu_ref + levels.e_10 - levels.e_11bar, LineClass::Suppressed, Spin::Ortho, -1),
        peak("IV", nu_ref + levels.e_10 - levels.e_11, LineClass::Suppressed, Spin::Ortho, -1),
    ];
    PredictedLines { peaks, iv_offset: levels.e_10 - levels.e_11, para_offset_state_diff: levels.e_00 - levels.e_11 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionPathway {
    pub from: String,
    pub from_index: usize,
    pub to: String,
    pub to_index: usize,
    /// `|Δm|` between the two labels.
    pub delta_m: u32,
    pub open: bool,
    /// Rank of the field component that can drive the pathway.
    pub driving_rank: Option<u32>,
}

/// One pathway per (ortho, para) pair whose dominant `j` drops by one.
pub fn conversion_pathways(states: &[AssignedState], channels: &ConversionChannels) -> Result<Vec<ConversionPathway>, SpectroscopyError> {
    if states.is_empty() {
        return Err(SpectroscopyError::EmptyManifold);
    }
    let mut out = Vec::new();
    for o in states.iter().filter(|s| s.spin == Spin::Ortho) {
        for p in states.iter().filter(|s| s.spin == Spin::Para && s.j + 1 == o.j) {
            let delta_m = o.m.abs.abs_diff(p.m.abs);
            let (rank, open) = match delta_m {
                0 => (Some(2), channels.delta_m0_open),
                1 => (Some(1), channels.delta_m1_open),
                _ => (None, false),
            };
            out.push(ConversionPathway {
                from: o.tag(),
                from_index: o.index,
                to: p.tag(),
                to_index: p.index,
                delta_m,
                open,
                driving_rank: rank,
            });
        }
    }
    Ok(out)
}

/// Thermal ortho:para population ratio of a free rotor,
/// `3·Σ_odd (2j+1)e^{-Bj(j+1)hc/kT} / Σ_even (2j+1)e^{-Bj(j+1)hc/kT}`.
///
/// ```
/// let r = rotorcage::spectroscopy::equilibrium_ortho_para_ratio(300.0, 60.0, 20).unwrap();
/// assert!((r - 3.0).abs() < 0.1);
/// ```
pub fn equilibrium_ortho_para_ratio(temperature: f64, b_rot: f64, j_max: u32) -> Result<f64, SpectroscopyError> {
    if !(temperature > 0.0) {
        return Err(SpectroscopyError::Domain(format!("temperature must be positive, got {temperature}")));
    }
    if !(b_rot > 0.0) {
        return Err(SpectroscopyError::Domain(format!("b_rot must be positive, got {b_rot}")));
    }
    if j_max < 6 {
        return Err(SpectroscopyError::Domain(format!("j_max must be at least 6, got {j_max}")));
    }
    let (mut odd, mut even) = (0.0, 0.0);
    for j in 0..=j_max {
        let jf = j as f64;
        let term = (2.0 * jf + 1.0) * (-b_rot * jf * (jf + 1.0) * HC_OVER_KB / temperature).exp();
        if j % 2 == 0 {
            even += term;
        } else {
            odd += term;
        }
    }
    Ok(3.0 * odd / even)
}

pub const PEAK_HEADER: [&str; 5] = ["label", "position_cm1", "class", "delta_m", "degeneracy"];
pub const PATHWAY_HEADER: [&str; 5] = ["from", "to", "delta_m", "open", "driving_rank"];

pub fn write_peak_csv<W: Write>(peaks: &[Peak], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PEAK_HEADER)?;
    for p in peaks {
        w.write_record([p.label.clone(), numfmt::fmt(p.position), p.class.to_string(), p.delta_m.to_string(), p.degeneracy.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pathway_csv<W: Write>(paths: &[ConversionPathway], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATHWAY_HEADER)?;
    for p in paths {
        let rank = p.driving_rank.map(|r| r.to_string()).unwrap_or_else(|| "none".into());
        w.write_record([p.from.clone(), p.to.clone(), p.delta_m.to_string(), p.open.to_string(), rank])?;
    }
    w.flush()?;
    Ok(())
}
