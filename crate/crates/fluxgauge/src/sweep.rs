//! Declarative multi-configuration sweeps reproducing the result tables.

use std::collections::HashMap;
use std::rc::Rc;

use crate::config::{scenario_from_raw, RawConfig};
use crate::electrostatics::{capacitance_ratios, solve_potential, CapacitanceReport};
use crate::error::{Error, Result};
use crate::grid::ScalarGrid;
use crate::integrals::{compute_alphas, AlphaPrediction, AlphaReport};
use crate::report::{fmt_f64, fmt_opt};
use crate::scenario::Scenario;
use crate::solver::{assemble, solve, DirichletSpec};

/// One sweep axis: a config key and its ordered value list (raw strings,
/// substituted verbatim so fraction forms stay exact).
///
/// A zipped axis binds several keys in lockstep: key `field.bxn|field.bxp`
/// with values like `0|1/64` sets both keys from one axis position. This is
/// how paired field windows sweep as one axis instead of a product.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

/// A sweep definition over a base config.
#[derive(Debug, Clone)]
pub struct SweepDef {
    pub axes: Vec<SweepAxis>,
    pub columns: Vec<String>,
    pub table: String,
}

/// One evaluated sweep row: the axis values that keyed it plus the
/// requested column cells. A failed row records its error and leaves the
/// cells as `ERROR`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis_values: Vec<String>,
    pub cells: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub table: String,
    pub header: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Tab-separated rendering with a header row; deterministic bytes for
    /// a deterministic sweep definition.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            let mut fields = row.axis_values.clone();
            fields.extend(row.cells.iter().cloned());
            if let Some(err) = &row.error {
                fields.push(format!("error: {err}"));
            }
            out.push_str(&fields.join("\t"));
            out.push('\n');
        }
        out
    }
}

const AXIS_SECTIONS: [&str; 4] = ["grid.", "structure.", "field.", "junctions."];

/// Column vocabulary understood by [`run_sweep`].
pub const KNOWN_COLUMNS: [&str; 16] = [
    "alpha1_sm",
    "alpha1_im",
    "alpha2_sm",
    "alpha2_im",
    "alpha_ratio_sm",
    "alpha_ratio_im",
    "alpha_sum_sm",
    "loop_l4_sm",
    "flux",
    "predicted_alpha",
    "cap_ratio_sm_0",
    "cap_ratio_im_0",
    "cap_ratio_sm_lsc",
    "cap_ratio_im_lsc",
    "predicted_alpha_you",
    "boundary_leak",
];

fn needs_alpha(column: &str) -> bool {
    matches!(
        column,
        "alpha1_sm"
            | "alpha1_im"
            | "alpha2_sm"
            | "alpha2_im"
            | "alpha_ratio_sm"
            | "alpha_ratio_im"
            | "alpha_sum_sm"
            | "loop_l4_sm"
            | "flux"
            | "predicted_alpha"
    )
}

fn needs_capacitance(column: &str) -> bool {
    matches!(
        column,
        "cap_ratio_sm_0"
            | "cap_ratio_im_0"
            | "cap_ratio_sm_lsc"
            | "cap_ratio_im_lsc"
            | "predicted_alpha_you"
            | "boundary_leak"
    )
}

fn column_value(column: &str, alpha: Option<&AlphaReport>, cap: Option<&CapacitanceReport>) -> String {
    match column {
        "alpha1_sm" => fmt_f64(alpha.unwrap().alpha1_sm),
        "alpha1_im" => fmt_f64(alpha.unwrap().alpha1_im),
        "alpha2_sm" => fmt_f64(alpha.unwrap().alpha2_sm),
        "alpha2_im" => fmt_f64(alpha.unwrap().alpha2_im),
        "alpha_ratio_sm" => fmt_opt(alpha.unwrap().ratio_sm),
        "alpha_ratio_im" => fmt_opt(alpha.unwrap().ratio_im),
        "alpha_sum_sm" => fmt_f64(alpha.unwrap().sum_sm),
        "loop_l4_sm" => fmt_f64(alpha.unwrap().loop_l4_sm),
        "flux" => fmt_f64(alpha.unwrap().flux),
        "predicted_alpha" => match alpha.unwrap().predicted_alpha {
            AlphaPrediction::Defined(v) => fmt_f64(v),
            AlphaPrediction::Singular => "SINGULAR".into(),
            AlphaPrediction::Undefined => "UNDEFINED".into(),
        },
        "cap_ratio_sm_0" => fmt_f64(cap.unwrap().ratio_sm_0),
        "cap_ratio_im_0" => fmt_f64(cap.unwrap().ratio_im_0),
        "cap_ratio_sm_lsc" => fmt_f64(cap.unwrap().ratio_sm_lsc),
        "cap_ratio_im_lsc" => fmt_f64(cap.unwrap().ratio_im_lsc),
        "predicted_alpha_you" => fmt_f64(cap.unwrap().predicted_alpha_you),
        "boundary_leak" => fmt_f64(cap.unwrap().boundary_leak),
        _ => unreachable!("column validated before evaluation"),
    }
}

/// Per-sweep solve cache keyed by mask and rhs content. Rows that share a
/// mask (field-only sweeps) reuse the electrostatic solve; rows sharing
/// both reuse the stream-function solve.
#[derive(Default)]
struct SolveCache {
    magnetostatic: HashMap<(u64, u64), Rc<ScalarGrid>>,
    electrostatic: HashMap<u64, Rc<ScalarGrid>>,
}

impl SolveCache {
    fn psi(&mut self, scenario: &Scenario) -> Result<(Rc<ScalarGrid>, ScalarGrid, crate::geometry::NodeMask)> {
        let mask = scenario.mask()?;
        let b = scenario.field_grid(&mask)?;
        let key = (mask.content_hash(), b.content_hash());
        if let Some(hit) = self.magnetostatic.get(&key) {
            return Ok((Rc::clone(hit), b, mask));
        }
        let sys = assemble(&mask, &b, &DirichletSpec::magnetostatic())?;
        let (psi, _) = solve(&sys, scenario.solver.method, scenario.solver.tol, scenario.solver.max_iter)?;
        let rc = Rc::new(psi);
        self.magnetostatic.insert(key, Rc::clone(&rc));
        Ok((rc, b, mask))
    }

    fn potential(&mut self, scenario: &Scenario) -> Result<(Rc<ScalarGrid>, crate::geometry::NodeMask)> {
        let mask = scenario.mask()?;
        let key = mask.content_hash();
        if let Some(hit) = self.electrostatic.get(&key) {
            return Ok((Rc::clone(hit), mask));
        }
        let (v, _) = solve_potential(&mask, scenario.solver.method, scenario.solver.tol, scenario.solver.max_iter)?;
        let rc = Rc::new(v);
        self.electrostatic.insert(key, Rc::clone(&rc));
        Ok((rc, mask))
    }
}

/// Evaluates the cartesian product of the axes in deterministic order
/// (last axis fastest). Rows are keyed by their parameter values; per-row
/// failures are recorded without aborting the sweep.
pub fn run_sweep(base: &RawConfig, def: &SweepDef) -> Result<SweepTable> {
    for axis in &def.axes {
        let parts: Vec<&str> = axis.key.split('|').collect();
        for part in &parts {
            if !AXIS_SECTIONS.iter().any(|s| part.starts_with(s)) {
                return Err(Error::InvalidAxis {
                    name: axis.key.clone(),
                });
            }
        }
        if axis.values.is_empty()
            || axis
                .values
                .iter()
                .any(|v| v.split('|').count() != parts.len())
        {
            return Err(Error::InvalidAxis {
                name: axis.key.clone(),
            });
        }
    }
    for column in &def.columns {
        if !KNOWN_COLUMNS.contains(&column.as_str()) {
            return Err(Error::Config {
                key: format!("sweep.columns.{column}"),
                message: format!(
                    "unknown column (known: {})",
                    KNOWN_COLUMNS.join(", ")
                ),
            });
        }
    }

    let mut header: Vec<String> = def.axes.iter().map(|a| a.key.clone()).collect();
    header.extend(def.columns.iter().cloned());

    let want_alpha = def.columns.iter().any(|c| needs_alpha(c));
    let want_cap = def.columns.iter().any(|c| needs_capacitance(c));

    let mut cache = SolveCache::default();
    let mut rows = Vec::new();
    let mut index = vec![0usize; def.axes.len()];
    loop {
        let mut raw = base.clone();
        let mut axis_values = Vec::with_capacity(def.axes.len());
        for (a, axis) in def.axes.iter().enumerate() {
            let value = &axis.values[index[a]];
            for (key, part) in axis.key.split('|').zip(value.split('|')) {
                raw.set(key, part.trim());
            }
            axis_values.push(value.clone());
        }
        let row = match evaluate_row(&raw, def, want_alpha, want_cap, &mut cache) {
            Ok(cells) => SweepRow {
                axis_values,
                cells,
                error: None,
            },
            Err(e) => SweepRow {
                axis_values,
                cells: vec!["ERROR".to_string(); def.columns.len()],
                error: Some(e.to_string()),
            },
        };
        rows.push(row);

        // advance the odometer, last axis fastest
        let mut a = def.axes.len();
        loop {
            if a == 0 {
                return Ok(SweepTable {
                    table: def.table.clone(),
                    header,
                    rows,
                });
            }
            a -= 1;
            index[a] += 1;
            if index[a] < def.axes[a].values.len() {
                break;
            }
            index[a] = 0;
        }
    }
}

fn evaluate_row(
    raw: &RawConfig,
    def: &SweepDef,
    want_alpha: bool,
    want_cap: bool,
    cache: &mut SolveCache,
) -> Result<Vec<String>> {
    let scenario = scenario_from_raw(raw)?;
    let alpha = if want_alpha {
        let (psi, b, _mask) = cache.psi(&scenario)?;
        let paths = scenario.junction_paths()?;
        Some(compute_alphas(&psi, &b, &paths, scenario.solver.samples_per_cell)?)
    } else {
        None
    };
    let cap = if want_cap {
        let (v, mask) = cache.potential(&scenario)?;
        Some(capacitance_ratios(
            &v,
            &mask,
            &scenario.structure,
            scenario.solver.samples_per_cell,
        )?)
    } else {
        None
    };
    Ok(def
        .columns
        .iter()
        .map(|c| column_value(c, alpha.as_ref(), cap.as_ref()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config;

    fn base_raw(xdiv: usize) -> RawConfig {
        let text = format!(
            "\
[grid]
xmin = -1
xmax = 1
ymin = -1
ymax = 1
xdiv = {xdiv}
ydiv = {xdiv}

[structure]
lsc = 1/4
wl = 1/8
wr = 1/8
d = 1/4
pos = 3/8
t = 1/16

[field]
bxn = -1/8
bxp = 1/8
byn = -1/8
byp = 1/8
b0 = 1
"
        );
        load_config(&[("t".into(), text)]).unwrap().raw
    }

    #[test]
    fn unknown_axis_is_rejected() {
        let def = SweepDef {
            axes: vec![SweepAxis {
                key: "solver.method".into(),
                values: vec!["cg".into()],
            }],
            columns: vec!["flux".into()],
            table: "t".into(),
        };
        assert!(matches!(
            run_sweep(&base_raw(32), &def),
            Err(Error::InvalidAxis { .. })
        ));
    }

    #[test]
    fn unknown_column_is_rejected() {
        let def = SweepDef {
            axes: vec![SweepAxis {
                key: "field.b0".into(),
                values: vec!["1".into()],
            }],
            columns: vec!["bogus".into()],
            table: "t".into(),
        };
        assert!(run_sweep(&base_raw(32), &def).is_err());
    }

    #[test]
    fn single_point_sweep_matches_direct_evaluation() {
        let raw = base_raw(32);
        let def = SweepDef {
            axes: vec![SweepAxis {
                key: "field.b0".into(),
                values: vec!["1".into()],
            }],
            columns: vec!["flux".into(), "alpha_ratio_sm".into()],
            table: "t".into(),
        };
        let table = run_sweep(&raw, &def).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(table.rows[0].error.is_none());

        let scenario = scenario_from_raw(&raw).unwrap();
        let (alpha, _) = scenario.alpha_report().unwrap();
        assert_eq!(table.rows[0].cells[0], fmt_f64(alpha.flux));
        assert_eq!(table.rows[0].cells[1], fmt_opt(alpha.ratio_sm));
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let raw = base_raw(32);
        let def = SweepDef {
            axes: vec![
                SweepAxis {
                    key: "structure.wl".into(),
                    values: vec!["1/8".into(), "1/4".into()],
                },
                SweepAxis {
                    key: "field.b0".into(),
                    values: vec!["1".into(), "2".into()],
                },
            ],
            columns: vec!["flux".into()],
            table: "t".into(),
        };
        let t1 = run_sweep(&raw, &def).unwrap().to_tsv();
        let t2 = run_sweep(&raw, &def).unwrap().to_tsv();
        assert_eq!(t1, t2);
        let lines: Vec<&str> = t1.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("structure.wl\tfield.b0\tflux"));
        // last axis varies fastest
        assert!(lines[1].starts_with("1/8\t1"));
        assert!(lines[2].starts_with("1/8\t2"));
        assert!(lines[3].starts_with("1/4\t1"));
    }

    #[test]
    fn failing_rows_do_not_abort_the_sweep() {
        let raw = base_raw(32);
        let def = SweepDef {
            axes: vec![SweepAxis {
                key: "structure.t".into(),
                // second value is off-grid on a 32x32 grid
                values: vec!["1/16".into(), "1/100".into()],
            }],
            columns: vec!["flux".into()],
            table: "t".into(),
        };
        let table = run_sweep(&raw, &def).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].error.is_none());
        assert!(table.rows[1].error.is_some());
        assert_eq!(table.rows[1].cells[0], "ERROR");
    }

    #[test]
    fn zipped_axis_binds_keys_in_lockstep() {
        let raw = base_raw(32);
        let def = SweepDef {
            axes: vec![SweepAxis {
                key: "field.bxn|field.bxp".into(),
                values: vec!["-1/8|0".into(), "0|1/8".into()],
            }],
            columns: vec!["flux".into()],
            table: "t".into(),
        };
        let table = run_sweep(&raw, &def).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|r| r.error.is_none()));
        // Equal-width windows carry equal flux.
        assert_eq!(table.rows[0].cells[0], table.rows[1].cells[0]);

        let bad = SweepDef {
            axes: vec![SweepAxis {
                key: "field.bxn|field.bxp".into(),
                values: vec!["0".into()],
            }],
            columns: vec!["flux".into()],
            table: "t".into(),
        };
        assert!(matches!(run_sweep(&raw, &bad), Err(Error::InvalidAxis { .. })));
    }

    #[test]
    fn electrostatic_solve_is_cached_across_field_rows() {
        // Sweeping only the field leaves the mask unchanged; the cache must
        // produce identical capacitance cells for every row.
        let raw = base_raw(32);
        let def = SweepDef {
            axes: vec![SweepAxis {
                key: "field.bxn".into(),
                values: vec!["-1/8".into(), "-1/16".into(), "0".into()],
            }],
            columns: vec!["cap_ratio_sm_0".into()],
            table: "t".into(),
        };
        let table = run_sweep(&raw, &def).unwrap();
        assert_eq!(table.rows.len(), 3);
        let first = &table.rows[0].cells[0];
        assert!(table.rows.iter().all(|r| &r.cells[0] == first));
    }
}
