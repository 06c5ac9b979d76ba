//! Electrostatic junction capacitance ratios.
//!
//! The island is held at potential 1, the ground and the outer boundary at
//! 0; the Laplace solve gives the potential, and charges come from the
//! outward flux of `-grad(V)` through a rectangular Gaussian contour
//! hugging the island at one-node offset. The island charge splits into
//! left/right parts at a delimiter plane, in two conventions: `x = 0`
//! (whole structure, wire included) and `x = +-lsc` (wire span excluded).

use crate::error::{Error, Result};
use crate::geometry::{NodeMask, StructureLayout, StructureParams};
use crate::grid::ScalarGrid;
use crate::interp::Bicubic;
use crate::solver::{assemble, solve, DirichletSpec, Method, SolveReport};

/// Capacitance ratios under both delimiters and both evaluation
/// conventions, plus charge diagnostics.
#[derive(Debug, Clone)]
pub struct CapacitanceReport {
    /// C2/C1 with the delimiter at x = 0.
    pub ratio_sm_0: f64,
    pub ratio_im_0: f64,
    /// C2/C1 with delimiters at x = +-lsc (wire span excluded).
    pub ratio_sm_lsc: f64,
    pub ratio_im_lsc: f64,
    /// Total outward-flux charge around the island (at potential 1 this is
    /// the total capacitance proxy).
    pub q_island: f64,
    pub q_ground: f64,
    /// Fraction of the island charge not returned by the ground: the part
    /// escaping to the grounded outer boundary.
    pub boundary_leak: f64,
    /// C2 / (C1 + C2), the lumped-element prediction for alpha.
    pub predicted_alpha_you: f64,
}

/// Laplace solution with the conductors pinned: island 1, ground 0,
/// boundary 0.
pub fn solve_potential(
    mask: &NodeMask,
    method: Method,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarGrid, SolveReport)> {
    if !mask.has_island() {
        return Err(Error::MissingConductor { which: "island" });
    }
    if !mask.has_ground() {
        return Err(Error::MissingConductor { which: "ground" });
    }
    let rhs = ScalarGrid::zeros(mask.spec);
    let sys = assemble(mask, &rhs, &DirichletSpec::electrostatic())?;
    solve(&sys, method, tol, max_iter)
}

/// Outward SM flux of `-grad(V)` through the closed rectangle with corner
/// nodes `(i0, j0)`-`(i1, j1)`; trapezoidal weights along each side.
pub fn rect_flux_sm(v: &ScalarGrid, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
    let (hx, hy) = (v.spec.h_x(), v.spec.h_y());
    let mut flux = 0.0;
    for j in j0..=j1 {
        let w = if j == j0 || j == j1 { 0.5 } else { 1.0 };
        flux += w * (-v.dx(i1, j)) * hy; // right side, outward +x
        flux += w * v.dx(i0, j) * hy; // left side, outward -x
    }
    for i in i0..=i1 {
        let w = if i == i0 || i == i1 { 0.5 } else { 1.0 };
        flux += w * (-v.dy(i, j1)) * hx; // top, outward +y
        flux += w * v.dy(i, j0) * hx; // bottom, outward -y
    }
    flux
}

/// IM counterpart of [`rect_flux_sm`]: bicubic derivatives, composite
/// Simpson with `panels` panels per grid cell.
pub fn rect_flux_im(v: &ScalarGrid, i0: usize, i1: usize, j0: usize, j1: usize, panels: usize) -> f64 {
    let spec = v.spec;
    let interp = Bicubic::new(v);
    let panels = panels.max(2) + panels.max(2) % 2;
    let simpson = |t0: f64, h: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let dt = h / panels as f64;
        let mut acc = f(t0) + f(t0 + h);
        for k in 1..panels {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(t0 + k as f64 * dt);
        }
        acc * dt / 3.0
    };
    let (x0, x1) = (spec.x(i0), spec.x(i1));
    let (y0, y1) = (spec.y(j0), spec.y(j1));
    let mut flux = 0.0;
    for j in j0..j1 {
        flux += simpson(spec.y(j), spec.h_y(), &|y| -interp.dx(x1, y));
        flux += simpson(spec.y(j), spec.h_y(), &|y| interp.dx(x0, y));
    }
    for i in i0..i1 {
        flux += simpson(spec.x(i), spec.h_x(), &|x| -interp.dy(x, y1));
        flux += simpson(spec.x(i), spec.h_x(), &|x| interp.dy(x, y0));
    }
    let _ = (x0, y0, x1, y1);
    flux
}

struct Contour {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

fn island_contour(mask: &NodeMask, offset: usize) -> Result<Contour> {
    let (i0, i1, j0, j1) = mask
        .conductor_bbox(crate::geometry::Conductor::Island)
        .ok_or(Error::MissingConductor { which: "island" })?;
    Ok(Contour {
        i0: i0 - offset,
        i1: i1 + offset,
        j0: j0 - offset,
        j1: j1 + offset,
    })
}

fn ground_contour(mask: &NodeMask, offset: usize) -> Result<Contour> {
    let (i0, i1, j0, j1) = mask
        .conductor_bbox(crate::geometry::Conductor::Ground)
        .ok_or(Error::MissingConductor { which: "ground" })?;
    Ok(Contour {
        i0: i0 - offset,
        i1: i1 + offset,
        j0: j0 - offset,
        j1: j1 + offset,
    })
}

/// Charge split of a contour at delimiter columns `[left_end, right_start]`:
/// the left part closes along `x(left_end)`, the right part along
/// `x(right_start)`. With `left_end == right_start` the two parts partition
/// the contour; with `left_end < right_start` the middle band (the wire
/// span) is excluded.
fn split_charges_sm(v: &ScalarGrid, c: &Contour, left_end: usize, right_start: usize) -> (f64, f64) {
    let left = rect_flux_sm(v, c.i0, left_end, c.j0, c.j1);
    let right = rect_flux_sm(v, right_start, c.i1, c.j0, c.j1);
    (left, right)
}

fn split_charges_im(
    v: &ScalarGrid,
    c: &Contour,
    left_end: usize,
    right_start: usize,
    panels: usize,
) -> (f64, f64) {
    let left = rect_flux_im(v, c.i0, left_end, c.j0, c.j1, panels);
    let right = rect_flux_im(v, right_start, c.i1, c.j0, c.j1, panels);
    (left, right)
}

/// Capacitance ratios from a solved potential.
pub fn capacitance_ratios(
    v: &ScalarGrid,
    mask: &NodeMask,
    s: &StructureParams,
    samples_per_cell: usize,
) -> Result<CapacitanceReport> {
    if v.spec != mask.spec {
        return Err(Error::InconsistentGrids);
    }
    let layout = StructureLayout::compute(&v.spec, s)?;
    let contour = island_contour(mask, 1)?;
    let q_island = rect_flux_sm(v, contour.i0, contour.i1, contour.j0, contour.j1);
    let gc = ground_contour(mask, 1)?;
    let q_ground = rect_flux_sm(v, gc.i0, gc.i1, gc.j0, gc.j1);

    let i_zero = v.spec.x_index("delimiter x = 0", 0.0)?;
    let check = |left: f64, side: &'static str| -> Result<()> {
        if left.abs() < 1e-12 * q_island.abs().max(1.0) {
            return Err(Error::DegenerateCharge { side });
        }
        Ok(())
    };

    let (l0_sm, r0_sm) = split_charges_sm(v, &contour, i_zero, i_zero);
    check(l0_sm, "left (x = 0 delimiter)")?;
    let (l0_im, r0_im) = split_charges_im(v, &contour, i_zero, i_zero, samples_per_cell);
    check(l0_im, "left (x = 0 delimiter, IM)")?;
    // The plate inner faces sit exactly at x = +-lsc and belong to the
    // plates; the excluded wire span is the open interval between them, so
    // the sub-contours close one node inside it.
    let (ll_sm, rl_sm) = split_charges_sm(
        v,
        &contour,
        layout.i_left_inner + 1,
        layout.i_right_inner - 1,
    );
    check(ll_sm, "left (x = -lsc delimiter)")?;
    let (ll_im, rl_im) = split_charges_im(
        v,
        &contour,
        layout.i_left_inner + 1,
        layout.i_right_inner - 1,
        samples_per_cell,
    );
    check(ll_im, "left (x = -lsc delimiter, IM)")?;

    let leak = if q_island != 0.0 {
        (q_island + q_ground) / q_island
    } else {
        0.0
    };
    Ok(CapacitanceReport {
        ratio_sm_0: r0_sm / l0_sm,
        ratio_im_0: r0_im / l0_im,
        ratio_sm_lsc: rl_sm / ll_sm,
        ratio_im_lsc: rl_im / ll_im,
        q_island,
        q_ground,
        boundary_leak: leak,
        predicted_alpha_you: r0_sm / (l0_sm + r0_sm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, NodeClass};
    use crate::grid::GridSpec;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(-1.0, 1.0, -1.0, 1.0, n, n).unwrap()
    }

    fn small_structure() -> StructureParams {
        StructureParams {
            lsc: 0.25,
            w_l: 0.125,
            w_r: 0.125,
            d: 0.25,
            pos: 0.375,
            t: 0.0625,
        }
    }

    #[test]
    fn missing_conductor_is_rejected() {
        let mask = NodeMask::from_node_sets(grid(16), |i, j| i == 8 && j == 8, |_, _| false)
            .map_err(|e| panic!("{e}"))
            .unwrap();
        assert!(matches!(
            solve_potential(&mask, Method::Cg, 1e-10, 0),
            Err(Error::MissingConductor { which: "ground" })
        ));
    }

    #[test]
    fn discrete_maximum_principle() {
        let g = grid(32);
        let mask = rasterize(&g, &small_structure()).unwrap();
        let (v, _) = solve_potential(&mask, Method::Cg, 1e-11, 0).unwrap();
        for val in &v.values {
            assert!(*val >= -1e-12 && *val <= 1.0 + 1e-12, "potential {val}");
        }
    }

    #[test]
    fn potential_matches_dense_oracle_on_small_grid() {
        let g = grid(16);
        // Two facing plates, no wire: built directly from node sets.
        let mask = NodeMask::from_node_sets(
            g,
            |i, j| (5..=11).contains(&i) && (9..=10).contains(&j),
            |i, j| (5..=11).contains(&i) && (6..=7).contains(&j),
        )
        .unwrap();
        let (cg, _) = solve_potential(&mask, Method::Cg, 1e-13, 10_000).unwrap();
        let (dense, _) = solve_potential(&mask, Method::DenseDirect, 1e-13, 0).unwrap();
        for k in 0..cg.values.len() {
            assert!((cg.values[k] - dense.values[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_structure_ratios_are_one() {
        let g = grid(64);
        let mask = rasterize(&g, &small_structure()).unwrap();
        let (v, _) = solve_potential(&mask, Method::Cg, 1e-11, 0).unwrap();
        let report = capacitance_ratios(&v, &mask, &small_structure(), 4).unwrap();
        assert!((report.ratio_sm_0 - 1.0).abs() < 1e-2, "{}", report.ratio_sm_0);
        assert!((report.ratio_im_0 - 1.0).abs() < 1e-2, "{}", report.ratio_im_0);
        assert!((report.ratio_sm_lsc - 1.0).abs() < 1e-2);
        assert!((report.ratio_im_lsc - 1.0).abs() < 1e-2);
        assert!((report.predicted_alpha_you - 0.5).abs() < 1e-2);
        assert!(report.q_island > 0.0);
        assert!(report.q_ground < 0.0);
    }

    #[test]
    fn contour_enlargement_changes_nothing_measurable() {
        // Enclosed exterior nodes satisfy the Laplace stencil exactly, so
        // the discrete Gauss identity makes the flux contour independent.
        let g = grid(64);
        let mask = rasterize(&g, &small_structure()).unwrap();
        let (v, _) = solve_potential(&mask, Method::Cg, 1e-12, 0).unwrap();
        let c1 = island_contour(&mask, 1).unwrap();
        let c2 = island_contour(&mask, 2).unwrap();
        // Keep the enlarged contour clear of the ground.
        for j in c2.j0..=c2.j1 {
            for i in c2.i0..=c2.i1 {
                if j == c2.j0 || j == c2.j1 || i == c2.i0 || i == c2.i1 {
                    assert_ne!(mask.class(i, j), NodeClass::ConductorInterior);
                }
            }
        }
        let q1 = rect_flux_sm(&v, c1.i0, c1.i1, c1.j0, c1.j1);
        let q2 = rect_flux_sm(&v, c2.i0, c2.i1, c2.j0, c2.j1);
        assert!(
            ((q1 - q2) / q1).abs() < 1e-3,
            "contour dependence {} vs {}",
            q1,
            q2
        );
    }

    #[test]
    fn zero_potential_yields_degenerate_charge() {
        let g = grid(32);
        let mask = rasterize(&g, &small_structure()).unwrap();
        let v = ScalarGrid::zeros(g);
        assert!(matches!(
            capacitance_ratios(&v, &mask, &small_structure(), 4),
            Err(Error::DegenerateCharge { .. })
        ));
    }

    #[test]
    fn mirror_swap_inverts_ratios() {
        let g = grid(64);
        let s = StructureParams {
            w_l: 0.25,
            w_r: 0.125,
            ..small_structure()
        };
        let mask = rasterize(&g, &s).unwrap();
        let (v, _) = solve_potential(&mask, Method::Cg, 1e-11, 0).unwrap();
        let r = capacitance_ratios(&v, &mask, &s, 4).unwrap();

        let sm = s.mirrored_x();
        let mask_m = rasterize(&g, &sm).unwrap();
        let (vm, _) = solve_potential(&mask_m, Method::Cg, 1e-11, 0).unwrap();
        let rm = capacitance_ratios(&vm, &mask_m, &sm, 4).unwrap();

        assert!((r.ratio_sm_0 * rm.ratio_sm_0 - 1.0).abs() < 1e-2);
        assert!((r.ratio_im_0 * rm.ratio_im_0 - 1.0).abs() < 1e-2);
        assert!((r.ratio_sm_lsc * rm.ratio_sm_lsc - 1.0).abs() < 1e-2);
    }
}
