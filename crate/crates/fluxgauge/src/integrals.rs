//! Gauge parameters and loop integrals over a solved stream function.
//!
//! Every quantity here is a line integral of `grad(psi) . (dl x z)` along
//! grid-aligned paths, in two evaluation conventions:
//!
//! * SM: central differences at nodes, trapezoidal weights (1/2 at segment
//!   endpoints), step h along the segment axis. On an x-directed segment
//!   the integrand is -d(psi)/dy for +x travel, on a y-directed segment
//!   +d(psi)/dx for +y travel; opposite travel flips the sign.
//! * IM: the same integrand from the bicubic interpolant, composite Simpson
//!   with a fixed number of panels per grid cell.
//!
//! Beyond the outer boundary both conventions treat values as zero, which
//! is what boundary-completed loops require.

use crate::error::{Error, Result};
use crate::geometry::{flux_left_of, total_flux, StructureLayout};
use crate::grid::{GridSpec, ScalarGrid, VectorGrid};
use crate::interp::Bicubic;

/// Default Simpson panels per grid cell for IM quadrature.
pub const DEFAULT_SAMPLES_PER_CELL: usize = 4;

/// Ordered polyline of grid-aligned segments, in node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpec {
    vertices: Vec<(usize, usize)>,
}

impl PathSpec {
    pub fn polyline(vertices: Vec<(usize, usize)>) -> Result<PathSpec> {
        if vertices.len() < 2 {
            return Err(Error::PathOffGrid {
                message: "path needs at least two vertices".into(),
            });
        }
        for w in vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let axis_aligned = (a.0 == b.0) != (a.1 == b.1);
            if !axis_aligned {
                return Err(Error::PathOffGrid {
                    message: format!("segment {a:?} -> {b:?} is not a grid-aligned move"),
                });
            }
        }
        Ok(PathSpec { vertices })
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    pub fn first(&self) -> (usize, usize) {
        self.vertices[0]
    }

    pub fn last(&self) -> (usize, usize) {
        *self.vertices.last().unwrap()
    }

    /// Checks every vertex lies on the given grid.
    pub fn validate_on(&self, spec: &GridSpec) -> Result<()> {
        for &(i, j) in &self.vertices {
            if i > spec.x_divisions || j > spec.y_divisions {
                return Err(Error::PathOffGrid {
                    message: format!("vertex ({i}, {j}) outside {} x {} grid", spec.nx(), spec.ny()),
                });
            }
        }
        Ok(())
    }

    /// Axis-aligned closed rectangle through the four corner nodes,
    /// counterclockwise: down the left side, along the bottom, up the
    /// right side, back along the top.
    pub fn rectangle(i0: usize, i1: usize, j0: usize, j1: usize) -> Result<PathSpec> {
        PathSpec::polyline(vec![(i0, j1), (i0, j0), (i1, j0), (i1, j1), (i0, j1)])
    }

    fn segments(&self) -> impl Iterator<Item = ((usize, usize), (usize, usize))> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// SM line integral along a path.
pub fn path_integral_sm(psi: &ScalarGrid, path: &PathSpec) -> Result<f64> {
    path.validate_on(&psi.spec)?;
    let mut total = 0.0;
    for (a, b) in path.segments() {
        total += segment_sm(psi, a, b);
    }
    Ok(total)
}

fn segment_sm(psi: &ScalarGrid, a: (usize, usize), b: (usize, usize)) -> f64 {
    let spec = psi.spec;
    if a.0 == b.0 {
        // y-directed: integrand +d(psi)/dx for +y travel
        let i = a.0;
        let (lo, hi) = (a.1.min(b.1), a.1.max(b.1));
        let sign = if b.1 >= a.1 { 1.0 } else { -1.0 };
        let mut sum = 0.0;
        for j in lo..=hi {
            let w = if j == lo || j == hi { 0.5 } else { 1.0 };
            sum += w * psi.dx(i, j);
        }
        sign * sum * spec.h_y()
    } else {
        // x-directed: integrand -d(psi)/dy for +x travel
        let j = a.1;
        let (lo, hi) = (a.0.min(b.0), a.0.max(b.0));
        let sign = if b.0 >= a.0 { 1.0 } else { -1.0 };
        let mut sum = 0.0;
        for i in lo..=hi {
            let w = if i == lo || i == hi { 0.5 } else { 1.0 };
            sum += w * psi.dy(i, j);
        }
        -sign * sum * spec.h_x()
    }
}

/// IM line integral along a path with `samples_per_cell` Simpson panels per
/// grid cell (rounded up to even, minimum 2).
pub fn path_integral_im(psi: &ScalarGrid, path: &PathSpec, samples_per_cell: usize) -> Result<f64> {
    path.validate_on(&psi.spec)?;
    let panels = samples_per_cell.max(2) + samples_per_cell.max(2) % 2;
    let interp = Bicubic::new(psi);
    let mut total = 0.0;
    for (a, b) in path.segments() {
        total += segment_im(psi, &interp, a, b, panels);
    }
    Ok(total)
}

fn segment_im(
    psi: &ScalarGrid,
    interp: &Bicubic,
    a: (usize, usize),
    b: (usize, usize),
    panels: usize,
) -> f64 {
    let spec = psi.spec;
    if a.0 == b.0 {
        let x = spec.x(a.0);
        let (lo, hi) = (a.1.min(b.1), a.1.max(b.1));
        let sign = if b.1 >= a.1 { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for j in lo..hi {
            acc += simpson_cell(spec.y(j), spec.h_y(), panels, |y| interp.dx(x, y));
        }
        sign * acc
    } else {
        let y = spec.y(a.1);
        let (lo, hi) = (a.0.min(b.0), a.0.max(b.0));
        let sign = if b.0 >= a.0 { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for i in lo..hi {
            acc += simpson_cell(spec.x(i), spec.h_x(), panels, |x| interp.dy(x, y));
        }
        -sign * acc
    }
}

fn simpson_cell(t0: f64, h: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let dt = h / panels as f64;
    let mut acc = f(t0) + f(t0 + h);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(t0 + k as f64 * dt);
    }
    acc * dt / 3.0
}

/// Evaluation convention selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Sm,
    Im,
}

/// Oriented line integral around a closed loop.
pub fn loop_integral(
    psi: &ScalarGrid,
    loop_path: &PathSpec,
    variant: Variant,
    samples_per_cell: usize,
) -> Result<f64> {
    if !loop_path.is_closed() {
        return Err(Error::OpenLoop);
    }
    match variant {
        Variant::Sm => path_integral_sm(psi, loop_path),
        Variant::Im => path_integral_im(psi, loop_path, samples_per_cell),
    }
}

/// Central-difference vector potential `A = z x grad(psi)`:
/// `A_x = -d(psi)/dy`, `A_y = +d(psi)/dx`, with the beyond-boundary-zero
/// convention at the outer boundary.
pub fn vector_potential(psi: &ScalarGrid) -> VectorGrid {
    let spec = psi.spec;
    let mut a = VectorGrid::zeros(spec);
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            let k = spec.idx(i, j);
            a.x_values[k] = -psi.dy(i, j);
            a.y_values[k] = psi.dx(i, j);
        }
    }
    a
}

/// Outcome of the Eq.-16 style alpha-to-flux mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPrediction {
    /// `alpha1 / flux` is well defined.
    Defined(f64),
    /// Flux is numerically zero while alpha1 is not: the singular regime.
    Singular,
    /// Both alpha1 and flux vanish.
    Undefined,
}

/// Gauge parameters of the two junctions plus self-consistency numbers.
#[derive(Debug, Clone)]
pub struct AlphaReport {
    pub alpha1_sm: f64,
    pub alpha1_im: f64,
    pub alpha2_sm: f64,
    pub alpha2_im: f64,
    pub flux: f64,
    pub ratio_sm: Option<f64>,
    pub ratio_im: Option<f64>,
    pub sum_sm: f64,
    pub sum_im: f64,
    /// Literal SM evaluation of the junction loop including the closure
    /// through the conductors. Differs from `sum_sm` by the conductor-path
    /// contribution, which the sum rule discards.
    pub loop_l4_sm: f64,
    pub loop_l4_im: f64,
    pub predicted_alpha: AlphaPrediction,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        return None;
    }
    let r = a / b;
    r.is_finite().then_some(r)
}

/// Junction paths and the conductor-side closures forming the junction
/// loop.
#[derive(Debug, Clone)]
pub struct JunctionPaths {
    /// Island to ground across the left capacitor gap.
    pub path1: PathSpec,
    /// Ground to island across the right capacitor gap.
    pub path2: PathSpec,
    /// From the foot of path1 along the ground to the foot of path2.
    pub closure_ground: PathSpec,
    /// From the head of path2 along the island back to the head of path1.
    pub closure_island: PathSpec,
}

impl JunctionPaths {
    /// Default paths: vertical segments across each capacitor gap at the
    /// x-midpoint of each plate pair (overridable), closures along the
    /// conductor surfaces facing the U-shaped gap.
    pub fn from_layout(
        layout: &StructureLayout,
        junction1_i: Option<usize>,
        junction2_i: Option<usize>,
    ) -> Result<JunctionPaths> {
        let i1 = junction1_i.unwrap_or_else(|| layout.junction1_default_i());
        let i2 = junction2_i.unwrap_or_else(|| layout.junction2_default_i());
        let j_top = layout.j_island_plate_bottom;
        let j_bot = layout.j_ground_plate_top;
        let path1 = PathSpec::polyline(vec![(i1, j_top), (i1, j_bot)])?;
        let path2 = PathSpec::polyline(vec![(i2, j_bot), (i2, j_top)])?;
        let closure_ground = PathSpec::polyline(vec![
            (i1, j_bot),
            (layout.i_left_inner, j_bot),
            (layout.i_left_inner, layout.j_ground_wire_top),
            (layout.i_right_inner, layout.j_ground_wire_top),
            (layout.i_right_inner, j_bot),
            (i2, j_bot),
        ])?;
        let closure_island = PathSpec::polyline(vec![
            (i2, j_top),
            (layout.i_right_inner, j_top),
            (layout.i_right_inner, layout.j_wire_bottom),
            (layout.i_left_inner, layout.j_wire_bottom),
            (layout.i_left_inner, j_top),
            (i1, j_top),
        ])?;
        Ok(JunctionPaths {
            path1,
            path2,
            closure_ground,
            closure_island,
        })
    }
}

/// Computes alpha1/alpha2 in both conventions plus the junction-loop and
/// sum-rule diagnostics.
pub fn compute_alphas(
    psi: &ScalarGrid,
    b: &ScalarGrid,
    paths: &JunctionPaths,
    samples_per_cell: usize,
) -> Result<AlphaReport> {
    if psi.spec != b.spec {
        return Err(Error::InconsistentGrids);
    }
    // The four pieces must chain into a closed loop.
    let chained = paths.path1.last() == paths.closure_ground.first()
        && paths.closure_ground.last() == paths.path2.first()
        && paths.path2.last() == paths.closure_island.first()
        && paths.closure_island.last() == paths.path1.first();
    if !chained {
        return Err(Error::PathsDoNotCloseLoop);
    }

    let alpha1_sm = path_integral_sm(psi, &paths.path1)?;
    let alpha2_sm = path_integral_sm(psi, &paths.path2)?;
    let alpha1_im = path_integral_im(psi, &paths.path1, samples_per_cell)?;
    let alpha2_im = path_integral_im(psi, &paths.path2, samples_per_cell)?;
    let closure_sm = path_integral_sm(psi, &paths.closure_ground)?
        + path_integral_sm(psi, &paths.closure_island)?;
    let closure_im = path_integral_im(psi, &paths.closure_ground, samples_per_cell)?
        + path_integral_im(psi, &paths.closure_island, samples_per_cell)?;

    let flux = total_flux(b);
    let alpha1 = alpha1_sm;
    let scale = b
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        * b.spec.h_x()
        * b.spec.h_y();
    let predicted_alpha = if flux.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        AlphaPrediction::Defined(alpha1 / flux)
    } else if alpha1.abs() > 1e-12 * scale.max(1e-300) {
        AlphaPrediction::Singular
    } else {
        AlphaPrediction::Undefined
    };

    Ok(AlphaReport {
        alpha1_sm,
        alpha1_im,
        alpha2_sm,
        alpha2_im,
        flux,
        ratio_sm: ratio(alpha1_sm, alpha2_sm),
        ratio_im: ratio(alpha1_im, alpha2_im),
        sum_sm: alpha1_sm + alpha2_sm,
        sum_im: alpha1_im + alpha2_im,
        loop_l4_sm: alpha1_sm + alpha2_sm + closure_sm,
        loop_l4_im: alpha1_im + alpha2_im + closure_im,
        predicted_alpha,
    })
}

/// Admissible junction-2 positions inside a capacitor gap: x columns
/// `i_left..=i_right`, vertical span `j_bottom..=j_top`.
#[derive(Debug, Clone, Copy)]
pub struct GapRange {
    pub i_left: usize,
    pub i_right: usize,
    pub j_bottom: usize,
    pub j_top: usize,
}

impl GapRange {
    /// The right (C2) capacitor gap of a rasterized structure.
    pub fn c2(layout: &StructureLayout) -> GapRange {
        GapRange {
            i_left: layout.i_right_inner,
            i_right: layout.i_right_outer,
            j_bottom: layout.j_ground_plate_top,
            j_top: layout.j_island_plate_bottom,
        }
    }
}

/// Extremes of alpha2 over the admissible junction-2 positions when the
/// field sits inside the C2 gap.
///
/// The returned `alpha2_min` / `alpha2_max` are anchored by the sum rule:
/// `alpha2(x) = phi_enclosed(x) - alpha1`, which pins the zero-enclosed-flux
/// extreme to exactly `-alpha1`. The `*_direct` fields carry the honest
/// line-integral evaluations at the same positions, and `linearity_max_dev`
/// measures how far the direct values stray from the swept-flux line across
/// five positions (the two extremes plus three interior).
#[derive(Debug, Clone)]
pub struct AlphaExtremes {
    pub alpha1_sm: f64,
    pub alpha1_im: f64,
    pub alpha2_min: f64,
    pub alpha2_max: f64,
    pub alpha2_min_direct_sm: f64,
    pub alpha2_max_direct_sm: f64,
    pub alpha2_min_direct_im: f64,
    pub alpha2_max_direct_im: f64,
    /// alpha1 / alpha2(min): -1 whenever the enclosed flux at the left
    /// extreme vanishes.
    pub ratio_min: Option<f64>,
    /// alpha1 / alpha2(max).
    pub ratio_max: Option<f64>,
    /// alpha2(min) / alpha2(max): the junction-position extreme ratio in a
    /// form independent of the junction-1 orientation convention.
    pub ratio_extremes: Option<f64>,
    pub flux: f64,
    pub linearity_max_dev: f64,
}

pub fn junction_alpha_extremes(
    psi: &ScalarGrid,
    b: &ScalarGrid,
    path1: &PathSpec,
    gap: &GapRange,
    samples_per_cell: usize,
) -> Result<AlphaExtremes> {
    if psi.spec != b.spec {
        return Err(Error::InconsistentGrids);
    }
    // Every nonzero field node must sit inside the gap.
    for j in 0..b.spec.ny() {
        for i in 0..b.spec.nx() {
            if b.at(i, j) != 0.0
                && !(i >= gap.i_left && i <= gap.i_right && j >= gap.j_bottom && j <= gap.j_top)
            {
                return Err(Error::FieldNotInGap);
            }
        }
    }

    let alpha1_sm = path_integral_sm(psi, path1)?;
    let alpha1_im = path_integral_im(psi, path1, samples_per_cell)?;
    let flux = total_flux(b);

    let span = gap.i_right - gap.i_left;
    let positions = [
        gap.i_left,
        gap.i_left + span / 4,
        gap.i_left + span / 2,
        gap.i_left + 3 * span / 4,
        gap.i_right,
    ];
    let mut direct_sm = [0.0; 5];
    let mut direct_im = [0.0; 5];
    let mut linearity_max_dev = 0.0f64;
    for (k, &i) in positions.iter().enumerate() {
        let path = PathSpec::polyline(vec![(i, gap.j_bottom), (i, gap.j_top)])?;
        direct_sm[k] = path_integral_sm(psi, &path)?;
        direct_im[k] = path_integral_im(psi, &path, samples_per_cell)?;
        let predicted = flux_left_of(b, i) - alpha1_sm;
        linearity_max_dev = linearity_max_dev.max((direct_sm[k] - predicted).abs());
    }

    let alpha2_min = flux_left_of(b, gap.i_left) - alpha1_sm;
    let alpha2_max = flux_left_of(b, gap.i_right) - alpha1_sm;

    Ok(AlphaExtremes {
        alpha1_sm,
        alpha1_im,
        alpha2_min,
        alpha2_max,
        alpha2_min_direct_sm: direct_sm[0],
        alpha2_max_direct_sm: direct_sm[4],
        alpha2_min_direct_im: direct_im[0],
        alpha2_max_direct_im: direct_im[4],
        ratio_min: ratio(alpha1_sm, alpha2_min),
        ratio_max: ratio(alpha1_sm, alpha2_max),
        ratio_extremes: ratio(alpha2_min, alpha2_max),
        flux,
        linearity_max_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(-1.0, 1.0, -1.0, 1.0, n, n).unwrap()
    }

    #[test]
    fn rejects_diagonal_and_short_paths() {
        assert!(PathSpec::polyline(vec![(0, 0)]).is_err());
        assert!(PathSpec::polyline(vec![(0, 0), (1, 1)]).is_err());
        assert!(PathSpec::polyline(vec![(0, 0), (0, 0)]).is_err());
        assert!(PathSpec::polyline(vec![(0, 0), (0, 3), (5, 3)]).is_ok());
    }

    #[test]
    fn path_outside_grid_is_rejected() {
        let psi = ScalarGrid::zeros(grid(16));
        let p = PathSpec::polyline(vec![(0, 0), (0, 30)]).unwrap();
        assert!(matches!(
            path_integral_sm(&psi, &p),
            Err(Error::PathOffGrid { .. })
        ));
    }

    #[test]
    fn zero_field_gives_zero_integrals() {
        let psi = ScalarGrid::zeros(grid(16));
        let p = PathSpec::polyline(vec![(2, 3), (2, 10), (9, 10)]).unwrap();
        assert_eq!(path_integral_sm(&psi, &p).unwrap(), 0.0);
        assert_eq!(path_integral_im(&psi, &p, 4).unwrap(), 0.0);
    }

    #[test]
    fn linear_psi_exact_on_interior_segments() {
        // psi = y on a +x segment of length L gives -L.
        let spec = grid(16);
        let psi = ScalarGrid::from_fn(spec, |_, y| y);
        let p = PathSpec::polyline(vec![(3, 8), (11, 8)]).unwrap();
        let length = 8.0 * spec.h_x();
        assert!((path_integral_sm(&psi, &p).unwrap() + length).abs() < 1e-14);
        assert!((path_integral_im(&psi, &p, 4).unwrap() + length).abs() < 1e-12);
        // Reversed travel flips the sign.
        let back = PathSpec::polyline(vec![(11, 8), (3, 8)]).unwrap();
        assert!((path_integral_sm(&psi, &back).unwrap() - length).abs() < 1e-14);
    }

    #[test]
    fn vector_potential_of_linear_psi_is_uniform() {
        let spec = grid(16);
        let psi = ScalarGrid::from_fn(spec, |x, _| x);
        let a = vector_potential(&psi);
        for j in 1..spec.ny() - 1 {
            for i in 1..spec.nx() - 1 {
                let (ax, ay) = a.at(i, j);
                assert!(ax.abs() < 1e-14);
                assert!((ay - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn discrete_divergence_of_vector_potential_vanishes() {
        // d/dx(A_x) + d/dy(A_y) = -DxDy psi + DyDx psi = 0 exactly for the
        // central stencils, at nodes two or more from the boundary.
        let spec = grid(24);
        let psi = ScalarGrid::from_fn(spec, |x, y| (3.0 * x).sin() * (2.0 * y).cos() + x * y * y);
        let a = vector_potential(&psi);
        let ax = ScalarGrid {
            spec,
            values: a.x_values.clone(),
        };
        let ay = ScalarGrid {
            spec,
            values: a.y_values.clone(),
        };
        for j in 2..spec.ny() - 2 {
            for i in 2..spec.nx() - 2 {
                let div = ax.dx(i, j) + ay.dy(i, j);
                assert!(div.abs() < 1e-10, "divergence {div:e} at ({i}, {j})");
            }
        }
    }

    /// The discrete circulation identity: the SM integral around a closed
    /// rectangle equals the nodal-cell-weighted sum of the 5-point
    /// Laplacian over the enclosed nodes (weights 1 inside, 1/2 on the
    /// loop edges, 1/4 at its corners). Holds for any lattice function.
    #[test]
    fn circulation_identity_on_arbitrary_fields() {
        let spec = grid(20);
        let psi = ScalarGrid::from_fn(spec, |x, y| {
            (2.3 * x + 0.4).sin() * (1.9 * y - 0.2).cos() + 0.3 * x * x * y
        });
        let (i0, i1, j0, j1) = (3, 15, 4, 16);
        let loop_path = PathSpec::rectangle(i0, i1, j0, j1).unwrap();
        let circ = loop_integral(&psi, &loop_path, Variant::Sm, 4).unwrap();

        let (hx, hy) = (spec.h_x(), spec.h_y());
        let mut sum = 0.0;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let lap = (psi.at(i + 1, j) + psi.at(i - 1, j) - 2.0 * psi.at(i, j)) / (hx * hx)
                    + (psi.at(i, j + 1) + psi.at(i, j - 1) - 2.0 * psi.at(i, j)) / (hy * hy);
                let wi = if i == i0 || i == i1 { 0.5 } else { 1.0 };
                let wj = if j == j0 || j == j1 { 0.5 } else { 1.0 };
                sum += wi * wj * lap * hx * hy;
            }
        }
        assert!(
            (circ - sum).abs() < 1e-12,
            "circulation {circ:e} vs enclosed sum {sum:e}"
        );
    }

    #[test]
    fn im_matches_closed_form_on_quadratic() {
        // IM integral of -d(psi)/dy along y = c equals -2cL for
        // psi = x^2 + y^2.
        let spec = grid(16);
        let psi = ScalarGrid::from_fn(spec, |x, y| x * x + y * y);
        let j = 12; // y = 0.5
        let p = PathSpec::polyline(vec![(2, j), (14, j)]).unwrap();
        let y = spec.y(j);
        let length = 12.0 * spec.h_x();
        let expect = -2.0 * y * length;
        let got = path_integral_im(&psi, &p, 4).unwrap();
        assert!((got - expect).abs() < 1e-8, "got {got}, expected {expect}");
    }

    #[test]
    fn open_loop_is_rejected() {
        let psi = ScalarGrid::zeros(grid(16));
        let p = PathSpec::polyline(vec![(2, 2), (2, 6), (8, 6)]).unwrap();
        assert!(matches!(
            loop_integral(&psi, &p, Variant::Sm, 4),
            Err(Error::OpenLoop)
        ));
    }

    #[test]
    fn unchained_junction_paths_are_rejected() {
        let spec = grid(16);
        let psi = ScalarGrid::zeros(spec);
        let b = ScalarGrid::zeros(spec);
        let paths = JunctionPaths {
            path1: PathSpec::polyline(vec![(4, 10), (4, 6)]).unwrap(),
            path2: PathSpec::polyline(vec![(12, 6), (12, 10)]).unwrap(),
            closure_ground: PathSpec::polyline(vec![(4, 6), (11, 6)]).unwrap(), // gap
            closure_island: PathSpec::polyline(vec![(12, 10), (4, 10)]).unwrap(),
        };
        assert!(matches!(
            compute_alphas(&psi, &b, &paths, 4),
            Err(Error::PathsDoNotCloseLoop)
        ));
    }

    #[test]
    fn zero_field_extremes_are_zero() {
        let spec = grid(16);
        let psi = ScalarGrid::zeros(spec);
        let b = ScalarGrid::zeros(spec);
        let path1 = PathSpec::polyline(vec![(4, 10), (4, 6)]).unwrap();
        let gap = GapRange {
            i_left: 10,
            i_right: 14,
            j_bottom: 6,
            j_top: 10,
        };
        let ext = junction_alpha_extremes(&psi, &b, &path1, &gap, 4).unwrap();
        assert_eq!(ext.alpha2_min, 0.0);
        assert_eq!(ext.alpha2_max, 0.0);
        assert_eq!(ext.linearity_max_dev, 0.0);
        assert!(ext.ratio_min.is_none());
    }

    #[test]
    fn field_outside_gap_is_rejected() {
        let spec = grid(16);
        let psi = ScalarGrid::zeros(spec);
        let mut b = ScalarGrid::zeros(spec);
        b.set(2, 2, 1.0);
        let path1 = PathSpec::polyline(vec![(4, 10), (4, 6)]).unwrap();
        let gap = GapRange {
            i_left: 10,
            i_right: 14,
            j_bottom: 6,
            j_top: 10,
        };
        assert!(matches!(
            junction_alpha_extremes(&psi, &b, &path1, &gap, 4),
            Err(Error::FieldNotInGap)
        ));
    }
}
