//! Config-file parsing: sectioned key/value text with exact decimal or
//! rational (`p/q`) numbers.
//!
//! ```text
//! [grid]
//! xmin = -1
//! xmax = 1
//! ymin = -1
//! ymax = 1
//! xdiv = 128
//! ydiv = 128
//!
//! [structure]
//! lsc = 1/8
//! wl = 1/16
//! wr = 1/16
//! d = 7/16
//! pos = 1/2
//! t = 1/64
//!
//! [field]
//! bxn = -1/16
//! bxp = 1/16
//! byn = -1/16
//! byp = 1/16
//! b0 = 1
//! ```
//!
//! Optional sections: `[junctions]` (`x1`, `x2`), `[solver]` (`method`,
//! `tol`, `maxiter`, `samples`), `[verify]` (tolerance overrides), and
//! `[sweep]` (`axis.<section>.<key>` value lists, `columns`, `table`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{FieldSpec, StructureParams};
use crate::grid::GridSpec;
use crate::scenario::{Scenario, SolverOptions};
use crate::solver::Method;
use crate::sweep::{SweepAxis, SweepDef};
use crate::verification::Tolerances;

/// Flat `section.key -> value` view of one or more merged config files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| Error::Config {
                    key: format!("line {}", lineno + 1),
                    message: format!("malformed section header `{line}`"),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    key: format!("line {}", lineno + 1),
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    key: format!("line {}", lineno + 1),
                    message: "empty key".into(),
                });
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            entries.insert(full, value.trim().to_string());
        }
        Ok(RawConfig { entries })
    }

    /// Later values override earlier ones key by key.
    pub fn merge_from(&mut self, other: &RawConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => parse_number(key, s).map(Some),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| Error::Config {
            key: key.to_string(),
            message: "missing required key".into(),
        })
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s.trim().parse::<usize>().map(Some).map_err(|e| Error::Config {
                key: key.to_string(),
                message: format!("expected a non-negative integer, got `{s}`: {e}"),
            }),
        }
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.usize_opt(key)?.ok_or_else(|| Error::Config {
            key: key.to_string(),
            message: "missing required key".into(),
        })
    }
}

/// Parses a decimal number or an exact fraction `p/q`.
pub fn parse_number(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let p: f64 = num.trim().parse().map_err(|_| Error::Config {
            key: key.to_string(),
            message: format!("bad fraction numerator `{num}`"),
        })?;
        let q: f64 = den.trim().parse().map_err(|_| Error::Config {
            key: key.to_string(),
            message: format!("bad fraction denominator `{den}`"),
        })?;
        if q == 0.0 {
            return Err(Error::Config {
                key: key.to_string(),
                message: format!("fraction `{s}` divides by zero"),
            });
        }
        let v = p / q;
        if !v.is_finite() {
            return Err(Error::Config {
                key: key.to_string(),
                message: format!("fraction `{s}` is not finite"),
            });
        }
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| Error::Config {
        key: key.to_string(),
        message: format!("expected a number or fraction, got `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Config {
            key: key.to_string(),
            message: format!("value `{s}` is not finite"),
        });
    }
    Ok(v)
}

fn parse_method(key: &str, s: &str) -> Result<Method> {
    match s.trim().to_ascii_lowercase().as_str() {
        "cg" => Ok(Method::Cg),
        "sor" => Ok(Method::Sor),
        "dense" => Ok(Method::DenseDirect),
        other => Err(Error::Config {
            key: key.to_string(),
            message: format!("unknown method `{other}` (expected cg, sor, or dense)"),
        }),
    }
}

/// Typed view of a merged config.
#[derive(Debug, Clone)]
pub struct Config {
    pub scenario: Scenario,
    pub tolerances: Tolerances,
    pub sweep: Option<SweepDef>,
    pub raw: RawConfig,
}

/// Builds the scenario part from a raw config.
pub fn scenario_from_raw(raw: &RawConfig) -> Result<Scenario> {
    let grid = GridSpec::new(
        raw.require_f64("grid.xmin")?,
        raw.require_f64("grid.xmax")?,
        raw.require_f64("grid.ymin")?,
        raw.require_f64("grid.ymax")?,
        raw.require_usize("grid.xdiv")?,
        raw.require_usize("grid.ydiv")?,
    )?;
    let structure = StructureParams {
        lsc: raw.require_f64("structure.lsc")?,
        w_l: raw.require_f64("structure.wl")?,
        w_r: raw.require_f64("structure.wr")?,
        d: raw.require_f64("structure.d")?,
        pos: raw.require_f64("structure.pos")?,
        t: raw.require_f64("structure.t")?,
    };
    structure.validate()?;
    let field = FieldSpec {
        x_extent_n: raw.require_f64("field.bxn")?,
        x_extent_p: raw.require_f64("field.bxp")?,
        y_extent_n: raw.require_f64("field.byn")?,
        y_extent_p: raw.require_f64("field.byp")?,
        b0: raw.f64_opt("field.b0")?.unwrap_or(1.0),
    };
    field.validate()?;

    let mut solver = SolverOptions::default();
    if let Some(m) = raw.get("solver.method") {
        solver.method = parse_method("solver.method", m)?;
    }
    if let Some(t) = raw.f64_opt("solver.tol")? {
        if !(t > 0.0) {
            return Err(Error::Config {
                key: "solver.tol".into(),
                message: format!("tolerance must be positive, got {t}"),
            });
        }
        solver.tol = t;
    }
    if let Some(n) = raw.usize_opt("solver.maxiter")? {
        solver.max_iter = n;
    }
    if let Some(n) = raw.usize_opt("solver.samples")? {
        if n < 2 {
            return Err(Error::Config {
                key: "solver.samples".into(),
                message: "need at least 2 Simpson panels per cell".into(),
            });
        }
        solver.samples_per_cell = n;
    }

    Ok(Scenario {
        grid,
        structure,
        field,
        junction1_x: raw.f64_opt("junctions.x1")?,
        junction2_x: raw.f64_opt("junctions.x2")?,
        solver,
    })
}

fn tolerances_from_raw(raw: &RawConfig) -> Result<Tolerances> {
    let mut t = Tolerances::default();
    if let Some(v) = raw.f64_opt("verify.loop_tol")? {
        t.loop_equality = v;
    }
    if let Some(v) = raw.f64_opt("verify.refine_cap")? {
        t.refinement_cap = v;
    }
    if let Some(v) = raw.f64_opt("verify.domain_cap")? {
        t.domain_cap = v;
    }
    if let Some(v) = raw.f64_opt("verify.prediction_tol")? {
        t.prediction = v;
    }
    Ok(t)
}

fn sweep_from_raw(raw: &RawConfig) -> Result<Option<SweepDef>> {
    let mut axes = Vec::new();
    for key in raw.keys() {
        if let Some(param) = key.strip_prefix("sweep.axis.") {
            let values: Vec<String> = raw
                .get(key)
                .unwrap_or("")
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(Error::Config {
                    key: key.to_string(),
                    message: "axis value list is empty".into(),
                });
            }
            axes.push(SweepAxis {
                key: param.to_string(),
                values,
            });
        }
    }
    if axes.is_empty() {
        return Ok(None);
    }
    let columns: Vec<String> = raw
        .get("sweep.columns")
        .unwrap_or("alpha_ratio_sm, alpha_ratio_im, cap_ratio_sm_0, cap_ratio_im_0")
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    let table = raw.get("sweep.table").unwrap_or("sweep").to_string();
    Ok(Some(SweepDef {
        axes,
        columns,
        table,
    }))
}

/// Parses and merges config texts (later entries override earlier ones),
/// then builds the typed view.
pub fn load_config(texts: &[(String, String)]) -> Result<Config> {
    let mut raw = RawConfig::default();
    for (_, text) in texts {
        let parsed = RawConfig::parse(text)?;
        raw.merge_from(&parsed);
    }
    let scenario = scenario_from_raw(&raw)?;
    let tolerances = tolerances_from_raw(&raw)?;
    let sweep = sweep_from_raw(&raw)?;
    Ok(Config {
        scenario,
        tolerances,
        sweep,
        raw,
    })
}
