//! Self-consistency battery: loop-integral equality, grid-refinement
//! stability, domain-size stability, and the lumped-element prediction
//! comparison.

use crate::electrostatics::CapacitanceReport;
use crate::error::Result;
use crate::geometry::total_flux;
use crate::grid::GridSpec;
use crate::integrals::{compute_alphas, loop_integral, AlphaReport, PathSpec, Variant};
use crate::scenario::Scenario;

/// Check thresholds; the defaults are the empirically measured bounds on
/// the production grid.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Loop pairwise equality and loop-vs-flux bound, relative to scale.
    pub loop_equality: f64,
    /// Allowed change of alpha1/alpha2 under 2x grid refinement.
    pub refinement_cap: f64,
    /// Allowed relative change of alphas and loops under domain doubling.
    pub domain_cap: f64,
    /// Allowed |alpha ratio - capacitance ratio| for the CONSISTENT verdict.
    pub prediction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            loop_equality: 2e-3,
            refinement_cap: 4e-2,
            domain_cap: 5e-3,
            prediction: 4e-2,
        }
    }
}

/// One named check outcome.
#[derive(Debug, Clone)]
pub struct CheckVerdict {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckVerdict {
    fn new(name: impl Into<String>, value: f64, threshold: f64) -> CheckVerdict {
        CheckVerdict {
            name: name.into(),
            value,
            threshold,
            pass: value.abs() <= threshold,
        }
    }
}

/// Values of the three standard loops in one convention.
#[derive(Debug, Clone, Copy)]
pub struct LoopSet {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

/// Full battery output.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub sm: LoopSet,
    pub im: LoopSet,
    pub flux: f64,
    pub alpha: AlphaReport,
    pub refinement_delta: Option<f64>,
    pub domain_delta: Option<f64>,
    pub verdicts: Vec<CheckVerdict>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// The three standard test loops, scaled to the grid:
///
/// * L1 at x = center +- width/4, completed along the outer boundary;
/// * L2 the same x range, y = center +- 7/16 of the height (interior);
/// * L3 asymmetric: x from center - width/4 to center + 5/16 of the width,
///   same y range as L2.
pub fn standard_loops(spec: &GridSpec) -> Result<[PathSpec; 3]> {
    standard_loops_clear(spec, None)
}

/// [`standard_loops`] with loop lines pushed outward wherever the default
/// proportions would run into the conductor bounding box (wide-plate
/// geometries reach exactly the quarter-width lines); a line inside or on
/// the box moves two nodes past it.
pub fn standard_loops_clear(
    spec: &GridSpec,
    structure_bbox: Option<(usize, usize, usize, usize)>,
) -> Result<[PathSpec; 3]> {
    let (cx, cy) = (spec.x_divisions / 2, spec.y_divisions / 2);
    let qx = spec.x_divisions / 4;
    let sy = (7 * spec.y_divisions + 8) / 16;
    let ax = (5 * spec.x_divisions + 8) / 16;
    let mut xl = cx - qx;
    let mut xr = cx + qx;
    let mut xr3 = cx + ax;
    let mut yb = cy - sy;
    let mut yt = cy + sy;
    if let Some((i0, i1, j0, j1)) = structure_bbox {
        let clear_left = |i: usize| if i + 2 > i0 { i0.saturating_sub(2) } else { i };
        let clear_right = |i: usize| if i < i1 + 2 { (i1 + 2).min(spec.x_divisions - 1) } else { i };
        if xl + 2 > i0 && xl <= i1 + 2 {
            xl = clear_left(xl);
        }
        if xr + 2 > i0 && xr <= i1 + 2 {
            xr = clear_right(xr);
        }
        if xr3 + 2 > i0 && xr3 <= i1 + 2 {
            xr3 = clear_right(xr3);
        }
        if yb + 2 > j0 && yb <= j1 + 2 {
            yb = j0.saturating_sub(2);
        }
        if yt + 2 > j0 && yt <= j1 + 2 {
            yt = (j1 + 2).min(spec.y_divisions - 1);
        }
    }
    let l1 = PathSpec::rectangle(xl, xr, 0, spec.y_divisions)?;
    let l2 = PathSpec::rectangle(xl, xr, yb, yt)?;
    let l3 = PathSpec::rectangle(xl, xr3, yb, yt)?;
    Ok([l1, l2, l3])
}

/// Runs the loop battery on a scenario: one solve, the three standard
/// loops in both conventions, the junction loop, and the equality
/// verdicts.
pub fn loop_battery(scenario: &Scenario, tol: &Tolerances) -> Result<ConsistencyReport> {
    let solution = scenario.solve_magnetostatic()?;
    let paths = scenario.junction_paths()?;
    let alpha = compute_alphas(
        &solution.psi,
        &solution.field_grid,
        &paths,
        scenario.solver.samples_per_cell,
    )?;
    let loops = standard_loops_clear(&scenario.grid, solution.mask.structure_bbox())?;
    let mut sm = [0.0; 3];
    let mut im = [0.0; 3];
    for (k, lp) in loops.iter().enumerate() {
        sm[k] = loop_integral(&solution.psi, lp, Variant::Sm, scenario.solver.samples_per_cell)?;
        im[k] = loop_integral(&solution.psi, lp, Variant::Im, scenario.solver.samples_per_cell)?;
    }
    let flux = total_flux(&solution.field_grid);

    let mut verdicts = Vec::new();
    for (tag, vals) in [("sm", &sm), ("im", &im)] {
        let scale = flux
            .abs()
            .max(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .max(f64::MIN_POSITIVE);
        let bound = tol.loop_equality * scale;
        verdicts.push(CheckVerdict::new(format!("l1_l2_{tag}"), vals[0] - vals[1], bound));
        verdicts.push(CheckVerdict::new(format!("l1_l3_{tag}"), vals[0] - vals[2], bound));
        verdicts.push(CheckVerdict::new(format!("l2_l3_{tag}"), vals[1] - vals[2], bound));
        for (k, v) in vals.iter().enumerate() {
            verdicts.push(CheckVerdict::new(
                format!("l{}_flux_{tag}", k + 1),
                v - flux,
                bound,
            ));
        }
    }

    // The junction sum rule applies only when the junction loop strictly
    // encloses the field region.
    if field_enclosed_by_junction_loop(scenario, &solution.field_grid)? {
        let scale = flux.abs().max(f64::MIN_POSITIVE);
        verdicts.push(CheckVerdict::new(
            "alpha_sum_rule_sm",
            alpha.sum_sm - flux,
            tol.loop_equality * scale,
        ));
    }

    Ok(ConsistencyReport {
        sm: LoopSet {
            l1: sm[0],
            l2: sm[1],
            l3: sm[2],
            l4: alpha.loop_l4_sm,
        },
        im: LoopSet {
            l1: im[0],
            l2: im[1],
            l3: im[2],
            l4: alpha.loop_l4_im,
        },
        flux,
        alpha,
        refinement_delta: None,
        domain_delta: None,
        verdicts,
    })
}

fn field_enclosed_by_junction_loop(
    scenario: &Scenario,
    b: &crate::grid::ScalarGrid,
) -> Result<bool> {
    let layout = scenario.layout()?;
    let paths = scenario.junction_paths()?;
    let i1 = paths.path1.first().0;
    let i2 = paths.path2.first().0;
    for j in 0..b.spec.ny() {
        for i in 0..b.spec.nx() {
            if b.at(i, j) != 0.0 {
                let inside = i > i1
                    && i < i2
                    && j > layout.j_ground_wire_top
                    && j < layout.j_wire_bottom;
                if !inside {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Re-runs the solve at `factor`-times the divisions (same physical
/// geometry) and returns the largest change of alpha1/alpha2 across the
/// two conventions. Undefined ratios (zero field) contribute zero.
pub fn refinement_check(scenario: &Scenario, factor: usize) -> Result<f64> {
    let coarse = scenario.alpha_report()?.0;
    let refined_scenario = scenario.refined(factor)?;
    // Power-of-two refinement keeps every structural edge on a grid line.
    refined_scenario.layout()?;
    let fine = refined_scenario.alpha_report()?.0;
    let mut delta = 0.0f64;
    if let (Some(a), Some(b)) = (coarse.ratio_sm, fine.ratio_sm) {
        delta = delta.max((a - b).abs());
    }
    if let (Some(a), Some(b)) = (coarse.ratio_im, fine.ratio_im) {
        delta = delta.max((a - b).abs());
    }
    Ok(delta)
}

fn rel_change(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Doubles the domain at constant spacing and returns the largest relative
/// change across alpha1, alpha2, and the standard loops.
pub fn domain_scaling_check(scenario: &Scenario, scale: usize) -> Result<f64> {
    let base = loop_battery(scenario, &Tolerances::default())?;
    let big_scenario = scenario.scaled_domain(scale)?;
    let big = loop_battery(&big_scenario, &Tolerances::default())?;

    let flux_scale = base.flux.abs().max(big.flux.abs());
    let mut delta = rel_change(base.alpha.alpha1_sm, big.alpha.alpha1_sm, 0.0);
    delta = delta.max(rel_change(base.alpha.alpha2_sm, big.alpha.alpha2_sm, 0.0));
    for (a, b) in [
        (base.sm.l1, big.sm.l1),
        (base.sm.l2, big.sm.l2),
        (base.sm.l3, big.sm.l3),
    ] {
        delta = delta.max(rel_change(a, b, flux_scale));
    }
    Ok(delta)
}

/// Outcome of comparing the measured gauge ratio against the electrostatic
/// capacitance ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionVerdict {
    Consistent,
    Deviates,
    Undefined,
}

#[derive(Debug, Clone)]
pub struct PredictionComparison {
    /// alpha1/alpha2 (SM) minus C2/C1 (SM, x=0 delimiter).
    pub diff_sm: Option<f64>,
    /// alpha1/alpha2 (IM) minus C2/C1 (IM, x=0 delimiter).
    pub diff_im: Option<f64>,
    pub threshold: f64,
    pub verdict: PredictionVerdict,
}

/// Records the deviation of the gauge ratio from the capacitance ratio.
/// DEVIATES is a finding, not an error.
pub fn compare_to_prediction(
    alpha: &AlphaReport,
    cap: &CapacitanceReport,
    threshold: f64,
) -> PredictionComparison {
    let diff_sm = alpha.ratio_sm.map(|r| r - cap.ratio_sm_0);
    let diff_im = alpha.ratio_im.map(|r| r - cap.ratio_im_0);
    let verdict = match (diff_sm, diff_im) {
        (None, None) => PredictionVerdict::Undefined,
        _ => {
            let worst = diff_sm
                .unwrap_or(0.0)
                .abs()
                .max(diff_im.unwrap_or(0.0).abs());
            if worst <= threshold {
                PredictionVerdict::Consistent
            } else {
                PredictionVerdict::Deviates
            }
        }
    };
    PredictionComparison {
        diff_sm,
        diff_im,
        threshold,
        verdict,
    }
}
