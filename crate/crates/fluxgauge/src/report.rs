//! Structured text output: reports, grid files, exports, and the run
//! manifest. Every number is written with Rust's shortest round-trip
//! float formatting, so re-parsing reproduces the binary value.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::electrostatics::CapacitanceReport;
use crate::error::{Error, Result};
use crate::geometry::{Conductor, NodeClass, NodeMask};
use crate::grid::{GridSpec, ScalarGrid, VectorGrid};
use crate::integrals::{AlphaPrediction, AlphaReport};
use crate::solver::SolveReport;
use crate::verification::{ConsistencyReport, PredictionComparison, PredictionVerdict};

/// Round-trip-exact decimal formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Option formatting with the UNDEFINED sentinel (never NaN).
pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "UNDEFINED".to_string(),
    }
}

const GRID_MAGIC: &str = "# fluxgauge grid v1";

/// Serializes a scalar grid: a header with extents and divisions, then
/// row-major values (one y-row per line, x ascending).
pub fn grid_to_string(g: &ScalarGrid) -> String {
    let spec = g.spec;
    let mut out = String::new();
    out.push_str(GRID_MAGIC);
    out.push('\n');
    let _ = writeln!(
        out,
        "{} {} {} {} {} {}",
        fmt_f64(spec.x_min),
        fmt_f64(spec.x_max),
        fmt_f64(spec.y_min),
        fmt_f64(spec.y_max),
        spec.x_divisions,
        spec.y_divisions
    );
    for j in 0..spec.ny() {
        let mut line = String::new();
        for i in 0..spec.nx() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&fmt_f64(g.at(i, j)));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_grid(path: &Path, g: &ScalarGrid) -> Result<()> {
    fs::write(path, grid_to_string(g)).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parses a grid file written by [`write_grid`]; bit-exact round trip.
pub fn parse_grid(text: &str) -> Result<ScalarGrid> {
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or_default();
    if magic.trim() != GRID_MAGIC {
        return Err(Error::Config {
            key: "grid file".into(),
            message: format!("unrecognized header `{magic}`"),
        });
    }
    let header = lines.next().ok_or_else(|| Error::Config {
        key: "grid file".into(),
        message: "missing extents header".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 {
        return Err(Error::Config {
            key: "grid file".into(),
            message: format!("expected 6 header fields, got {}", parts.len()),
        });
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::Config {
            key: "grid file".into(),
            message: format!("bad number `{s}`"),
        })
    };
    let spec = GridSpec::new(
        parse(parts[0])?,
        parse(parts[1])?,
        parse(parts[2])?,
        parse(parts[3])?,
        parts[4].parse().map_err(|_| Error::Config {
            key: "grid file".into(),
            message: format!("bad division count `{}`", parts[4]),
        })?,
        parts[5].parse().map_err(|_| Error::Config {
            key: "grid file".into(),
            message: format!("bad division count `{}`", parts[5]),
        })?,
    )?;
    let mut g = ScalarGrid::zeros(spec);
    let mut count = 0usize;
    for (j, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        for (i, field) in line.split_whitespace().enumerate() {
            if j >= spec.ny() || i >= spec.nx() {
                return Err(Error::Config {
                    key: "grid file".into(),
                    message: "more values than grid nodes".into(),
                });
            }
            g.set(i, j, parse(field)?);
            count += 1;
        }
    }
    if count != spec.node_count() {
        return Err(Error::Config {
            key: "grid file".into(),
            message: format!("expected {} values, got {count}", spec.node_count()),
        });
    }
    Ok(g)
}

pub fn read_grid(path: &Path) -> Result<ScalarGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_grid(&text)
}

/// `[alpha]` report section.
pub fn alpha_section(a: &AlphaReport) -> String {
    let mut s = String::from("[alpha]\n");
    let _ = writeln!(s, "alpha1_sm = {}", fmt_f64(a.alpha1_sm));
    let _ = writeln!(s, "alpha1_im = {}", fmt_f64(a.alpha1_im));
    let _ = writeln!(s, "alpha2_sm = {}", fmt_f64(a.alpha2_sm));
    let _ = writeln!(s, "alpha2_im = {}", fmt_f64(a.alpha2_im));
    let _ = writeln!(s, "flux = {}", fmt_f64(a.flux));
    let _ = writeln!(s, "ratio_sm = {}", fmt_opt(a.ratio_sm));
    let _ = writeln!(s, "ratio_im = {}", fmt_opt(a.ratio_im));
    let _ = writeln!(s, "sum_sm = {}", fmt_f64(a.sum_sm));
    let _ = writeln!(s, "sum_im = {}", fmt_f64(a.sum_im));
    let _ = writeln!(s, "loop_l4_sm = {}", fmt_f64(a.loop_l4_sm));
    let _ = writeln!(s, "loop_l4_im = {}", fmt_f64(a.loop_l4_im));
    let pred = match a.predicted_alpha {
        AlphaPrediction::Defined(v) => fmt_f64(v),
        AlphaPrediction::Singular => "SINGULAR".into(),
        AlphaPrediction::Undefined => "UNDEFINED".into(),
    };
    let _ = writeln!(s, "predicted_alpha = {pred}");
    s
}

/// `[capacitance]` report section.
pub fn capacitance_section(c: &CapacitanceReport) -> String {
    let mut s = String::from("[capacitance]\n");
    let _ = writeln!(s, "ratio_sm_0 = {}", fmt_f64(c.ratio_sm_0));
    let _ = writeln!(s, "ratio_im_0 = {}", fmt_f64(c.ratio_im_0));
    let _ = writeln!(s, "ratio_sm_lsc = {}", fmt_f64(c.ratio_sm_lsc));
    let _ = writeln!(s, "ratio_im_lsc = {}", fmt_f64(c.ratio_im_lsc));
    let _ = writeln!(s, "q_island = {}", fmt_f64(c.q_island));
    let _ = writeln!(s, "q_ground = {}", fmt_f64(c.q_ground));
    let _ = writeln!(s, "boundary_leak = {}", fmt_f64(c.boundary_leak));
    let _ = writeln!(s, "predicted_alpha_you = {}", fmt_f64(c.predicted_alpha_you));
    s
}

/// `[comparison]` report section.
pub fn comparison_section(p: &PredictionComparison) -> String {
    let mut s = String::from("[comparison]\n");
    let _ = writeln!(s, "diff_sm = {}", fmt_opt(p.diff_sm));
    let _ = writeln!(s, "diff_im = {}", fmt_opt(p.diff_im));
    let _ = writeln!(s, "threshold = {}", fmt_f64(p.threshold));
    let verdict = match p.verdict {
        PredictionVerdict::Consistent => "CONSISTENT",
        PredictionVerdict::Deviates => "DEVIATES",
        PredictionVerdict::Undefined => "UNDEFINED",
    };
    let _ = writeln!(s, "verdict = {verdict}");
    s
}

/// Machine-readable verification report: one record per check plus the
/// loop values, and a human-readable summary table.
pub fn verification_section(r: &ConsistencyReport) -> String {
    let mut s = String::from("[verification]\n");
    for (tag, set) in [("sm", &r.sm), ("im", &r.im)] {
        let _ = writeln!(s, "l1_{tag} = {}", fmt_f64(set.l1));
        let _ = writeln!(s, "l2_{tag} = {}", fmt_f64(set.l2));
        let _ = writeln!(s, "l3_{tag} = {}", fmt_f64(set.l3));
        let _ = writeln!(s, "l4_{tag} = {}", fmt_f64(set.l4));
    }
    let _ = writeln!(s, "flux = {}", fmt_f64(r.flux));
    if let Some(d) = r.refinement_delta {
        let _ = writeln!(s, "refinement_delta = {}", fmt_f64(d));
    }
    if let Some(d) = r.domain_delta {
        let _ = writeln!(s, "domain_delta = {}", fmt_f64(d));
    }
    s.push_str("\n[checks]\n");
    s.push_str("# name\tvalue\tthreshold\tverdict\n");
    for v in &r.verdicts {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            v.name,
            fmt_f64(v.value),
            fmt_f64(v.threshold),
            if v.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

/// Contour export: `x y psi` per node.
pub fn contour_rows(g: &ScalarGrid) -> String {
    let spec = g.spec;
    let mut out = String::from("x\ty\tpsi\n");
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                fmt_f64(spec.x(i)),
                fmt_f64(spec.y(j)),
                fmt_f64(g.at(i, j))
            );
        }
    }
    out
}

/// Vector export: `x y ax ay in_conductor` per node.
pub fn vector_rows(a: &VectorGrid, mask: &NodeMask) -> String {
    let spec = a.spec;
    let mut out = String::from("x\ty\tax\tay\tin_conductor\n");
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            let (ax, ay) = a.at(i, j);
            let flag = match mask.class(i, j) {
                NodeClass::ConductorInterior => 1,
                _ => 0,
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                fmt_f64(spec.x(i)),
                fmt_f64(spec.y(j)),
                fmt_f64(ax),
                fmt_f64(ay),
                flag
            );
        }
    }
    out
}

/// Mask export: `x y class` per node.
pub fn mask_rows(mask: &NodeMask) -> String {
    let spec = mask.spec;
    let mut out = String::from("x\ty\tclass\n");
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            let class = match mask.class(i, j) {
                NodeClass::Exterior => "EXTERIOR",
                NodeClass::ConductorInterior => match mask.conductor(i, j) {
                    Some(Conductor::Island) => "ISLAND_INTERIOR",
                    _ => "GROUND_INTERIOR",
                },
                NodeClass::ConductorSurface => match mask.conductor(i, j) {
                    Some(Conductor::Island) => "ISLAND_SURFACE",
                    _ => "GROUND_SURFACE",
                },
                NodeClass::OuterBoundary => "OUTER_BOUNDARY",
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                fmt_f64(spec.x(i)),
                fmt_f64(spec.y(j)),
                class
            );
        }
    }
    out
}

/// Run manifest: what ran, with what inputs, what it produced.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub configs: Vec<String>,
    pub out_dir: String,
    pub wall_time: f64,
    pub stages: Vec<(String, SolveReport)>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::from("[run]\n");
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "configs = {}", self.configs.join(";"));
        let _ = writeln!(s, "out_dir = {}", self.out_dir);
        let _ = writeln!(s, "wall_time_s = {}", fmt_f64(self.wall_time));
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        for (name, r) in &self.stages {
            let _ = writeln!(s, "\n[solve.{name}]");
            let _ = writeln!(s, "method = {}", r.method.name());
            let _ = writeln!(s, "iterations = {}", r.iterations);
            let _ = writeln!(s, "residual = {}", fmt_f64(r.residual_norm));
            let _ = writeln!(s, "converged = {}", r.converged);
            let _ = writeln!(s, "wall_time_s = {}", fmt_f64(r.wall_time));
        }
        s.push_str("\n[artifacts]\n");
        for a in &self.artifacts {
            let _ = writeln!(s, "file = {a}");
        }
        s
    }

    /// Writes the manifest atomically (temp file, then rename).
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let tmp: PathBuf = path.with_extension("tmp");
        fs::write(&tmp, self.to_text()).map_err(|e| Error::io(tmp.display().to_string(), e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
    }
}
