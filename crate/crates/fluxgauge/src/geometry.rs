//! Parametric SQUID cross-section, magnetic-field region, and node masks.
//!
//! The structure is two U-shaped conductors: the island is a wire spanning
//! `[-lsc, lsc]` in x with a plate hanging from each end, the ground is its
//! mirror image below `y = 0`. Plates are flush with the wire top and reach
//! a length `d + t` below the wire's bottom surface, so the island occupies
//!
//! ```text
//! wire:        [-lsc, lsc]           x  [pos, pos + t]
//! left plate:  [-lsc - w_l, -lsc]    x  [pos - d - t, pos + t]
//! right plate: [lsc, lsc + w_r]      x  [pos - d - t, pos + t]
//! ```
//!
//! Under this parametrization the narrow-gap geometry (pos = 1/4,
//! t = 1/64, d = 14/64) has a capacitor gap of exactly 1/32.
//!
//! Every structural edge must lie on a grid line; this keeps rasterization
//! free of sub-cell ambiguity and makes mirror tests exact.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarGrid};

/// Per-node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Exterior,
    ConductorInterior,
    ConductorSurface,
    OuterBoundary,
}

/// Which conductor a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conductor {
    Island,
    Ground,
}

/// Exposed-face bitmask for surface nodes.
pub mod exposure {
    pub const EAST: u8 = 1;
    pub const WEST: u8 = 2;
    pub const NORTH: u8 = 4;
    pub const SOUTH: u8 = 8;
}

/// Fig. 4 geometry parameters, all dimensionless lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureParams {
    /// Wire half-length in x.
    pub lsc: f64,
    /// Left plate width.
    pub w_l: f64,
    /// Right plate width.
    pub w_r: f64,
    /// Plate length in y.
    pub d: f64,
    /// y-coordinate of the wire's bottom surface.
    pub pos: f64,
    /// Wire thickness.
    pub t: f64,
}

impl StructureParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lsc", self.lsc),
            ("w_l", self.w_l),
            ("w_r", self.w_r),
            ("d", self.d),
            ("pos", self.pos),
            ("t", self.t),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    what: "structure",
                    message: format!("{name} must be positive, got {v}"),
                });
            }
        }
        if self.t >= self.d {
            return Err(Error::InvalidParameter {
                what: "structure",
                message: format!("wire thickness t = {} must be below plate length d = {}", self.t, self.d),
            });
        }
        Ok(())
    }

    /// Non-fatal diagnostics: the parallel-plate reading needs t << d.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.t >= self.d / 4.0 {
            w.push(format!(
                "wire thickness t = {} is not small against plate length d = {}; structure is a poor parallel-plate approximation",
                self.t, self.d
            ));
        }
        w
    }

    /// Same structure with the plate widths swapped (x mirror).
    pub fn mirrored_x(&self) -> StructureParams {
        StructureParams {
            w_l: self.w_r,
            w_r: self.w_l,
            ..*self
        }
    }
}

/// Grid-index anchors of the rasterized structure, shared by the integral
/// and capacitance modules.
#[derive(Debug, Clone, Copy)]
pub struct StructureLayout {
    /// x index of the left plate's outer face.
    pub i_left_outer: usize,
    /// x index of the left plate's inner face (= wire left end).
    pub i_left_inner: usize,
    /// x index of the right plate's inner face (= wire right end).
    pub i_right_inner: usize,
    /// x index of the right plate's outer face.
    pub i_right_outer: usize,
    /// y index of the island wire's bottom surface.
    pub j_wire_bottom: usize,
    /// y index of the island wire's top surface.
    pub j_wire_top: usize,
    /// y index of the island plates' bottom face.
    pub j_island_plate_bottom: usize,
    /// y index of the ground plates' top face.
    pub j_ground_plate_top: usize,
    /// y index of the ground wire's top surface.
    pub j_ground_wire_top: usize,
    /// y index of the ground wire's bottom surface.
    pub j_ground_wire_bottom: usize,
}

impl StructureLayout {
    pub fn compute(grid: &GridSpec, s: &StructureParams) -> Result<StructureLayout> {
        s.validate()?;
        let i_left_outer = grid.x_index("-lsc - w_l", -s.lsc - s.w_l)?;
        let i_left_inner = grid.x_index("-lsc", -s.lsc)?;
        let i_right_inner = grid.x_index("lsc", s.lsc)?;
        let i_right_outer = grid.x_index("lsc + w_r", s.lsc + s.w_r)?;
        let j_wire_bottom = grid.y_index("pos", s.pos)?;
        let j_wire_top = grid.y_index("pos + t", s.pos + s.t)?;
        let j_island_plate_bottom = grid.y_index("pos - d - t", s.pos - s.d - s.t)?;
        let j_ground_plate_top = grid.y_index("-(pos - d - t)", -(s.pos - s.d - s.t))?;
        let j_ground_wire_top = grid.y_index("-pos", -s.pos)?;
        let j_ground_wire_bottom = grid.y_index("-(pos + t)", -(s.pos + s.t))?;
        if j_island_plate_bottom <= j_ground_plate_top {
            return Err(Error::GeometryOverlap);
        }
        Ok(StructureLayout {
            i_left_outer,
            i_left_inner,
            i_right_inner,
            i_right_outer,
            j_wire_bottom,
            j_wire_top,
            j_island_plate_bottom,
            j_ground_plate_top,
            j_ground_wire_top,
            j_ground_wire_bottom,
        })
    }

    /// Default junction-1 x index: midpoint of the left plate pair.
    pub fn junction1_default_i(&self) -> usize {
        (self.i_left_outer + self.i_left_inner) / 2
    }

    /// Default junction-2 x index: midpoint of the right plate pair.
    pub fn junction2_default_i(&self) -> usize {
        (self.i_right_inner + self.i_right_outer) / 2
    }
}

/// Per-node classification of the rasterized geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMask {
    pub spec: GridSpec,
    classes: Vec<NodeClass>,
    conductor: Vec<Option<Conductor>>,
    exposure: Vec<u8>,
}

impl NodeMask {
    /// Classifies nodes given island/ground membership predicates over node
    /// indices. Checks the touch and margin invariants.
    pub fn from_node_sets(
        spec: GridSpec,
        island: impl Fn(usize, usize) -> bool,
        ground: impl Fn(usize, usize) -> bool,
    ) -> Result<NodeMask> {
        let (nx, ny) = (spec.nx(), spec.ny());
        let mut conductor: Vec<Option<Conductor>> = vec![None; spec.node_count()];
        for j in 0..ny {
            for i in 0..nx {
                let isl = island(i, j);
                let gnd = ground(i, j);
                if isl && gnd {
                    return Err(Error::GeometryOverlap);
                }
                conductor[spec.idx(i, j)] = if isl {
                    Some(Conductor::Island)
                } else if gnd {
                    Some(Conductor::Ground)
                } else {
                    None
                };
            }
        }

        // Touch check: no island node 4-adjacent to a ground node, and margin
        // check: conductors keep two clear node rows to the outer boundary.
        for j in 0..ny {
            for i in 0..nx {
                let c = conductor[spec.idx(i, j)];
                let Some(c) = c else { continue };
                if i < 2 || j < 2 || i + 2 >= nx || j + 2 >= ny {
                    return Err(Error::MarginViolation {
                        what: "conductor node",
                    });
                }
                let other = match c {
                    Conductor::Island => Conductor::Ground,
                    Conductor::Ground => Conductor::Island,
                };
                for (ni, nj) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                    if conductor[spec.idx(ni, nj)] == Some(other) {
                        return Err(Error::GeometryOverlap);
                    }
                }
            }
        }

        let mut classes = vec![NodeClass::Exterior; spec.node_count()];
        let mut exposure = vec![0u8; spec.node_count()];
        for j in 0..ny {
            for i in 0..nx {
                let k = spec.idx(i, j);
                if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                    classes[k] = NodeClass::OuterBoundary;
                    continue;
                }
                if conductor[k].is_none() {
                    continue;
                }
                let mut exp = 0u8;
                if conductor[spec.idx(i + 1, j)].is_none() {
                    exp |= exposure::EAST;
                }
                if conductor[spec.idx(i - 1, j)].is_none() {
                    exp |= exposure::WEST;
                }
                if conductor[spec.idx(i, j + 1)].is_none() {
                    exp |= exposure::NORTH;
                }
                if conductor[spec.idx(i, j - 1)].is_none() {
                    exp |= exposure::SOUTH;
                }
                if exp != 0 {
                    classes[k] = NodeClass::ConductorSurface;
                    exposure[k] = exp;
                } else {
                    classes[k] = NodeClass::ConductorInterior;
                }
            }
        }

        Ok(NodeMask {
            spec,
            classes,
            conductor,
            exposure,
        })
    }

    /// Mask with no conductors; useful for manufactured-solution tests.
    pub fn empty(spec: GridSpec) -> NodeMask {
        NodeMask::from_node_sets(spec, |_, _| false, |_, _| false)
            .expect("empty mask is always valid")
    }

    #[inline]
    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        self.classes[self.spec.idx(i, j)]
    }

    #[inline]
    pub fn conductor(&self, i: usize, j: usize) -> Option<Conductor> {
        self.conductor[self.spec.idx(i, j)]
    }

    /// Exposed-face bitmask; nonzero only for surface nodes.
    #[inline]
    pub fn exposure(&self, i: usize, j: usize) -> u8 {
        self.exposure[self.spec.idx(i, j)]
    }

    #[inline]
    pub fn is_conductor(&self, i: usize, j: usize) -> bool {
        self.conductor[self.spec.idx(i, j)].is_some()
    }

    pub fn has_island(&self) -> bool {
        self.conductor.iter().any(|c| *c == Some(Conductor::Island))
    }

    pub fn has_ground(&self) -> bool {
        self.conductor.iter().any(|c| *c == Some(Conductor::Ground))
    }

    /// Bounding index box `(i0, i1, j0, j1)` of both conductors together.
    pub fn structure_bbox(&self) -> Option<(usize, usize, usize, usize)> {
        match (
            self.conductor_bbox(Conductor::Island),
            self.conductor_bbox(Conductor::Ground),
        ) {
            (None, b) => b,
            (a, None) => a,
            (Some(a), Some(b)) => Some((
                a.0.min(b.0),
                a.1.max(b.1),
                a.2.min(b.2),
                a.3.max(b.3),
            )),
        }
    }

    /// Bounding index box `(i0, i1, j0, j1)` of a conductor's nodes.
    pub fn conductor_bbox(&self, which: Conductor) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for j in 0..self.spec.ny() {
            for i in 0..self.spec.nx() {
                if self.conductor(i, j) == Some(which) {
                    bbox = Some(match bbox {
                        None => (i, i, j, j),
                        Some((i0, i1, j0, j1)) => (i0.min(i), i1.max(i), j0.min(j), j1.max(j)),
                    });
                }
            }
        }
        bbox
    }

    /// Mask mirrored in x.
    pub fn mirrored_x(&self) -> NodeMask {
        let spec = self.spec;
        let n = spec.x_divisions;
        let mut out = self.clone();
        for j in 0..spec.ny() {
            for i in 0..spec.nx() {
                let src = spec.idx(n - i, j);
                let dst = spec.idx(i, j);
                out.classes[dst] = self.classes[src];
                out.conductor[dst] = self.conductor[src];
                let e = self.exposure[src];
                let mut m = e & (exposure::NORTH | exposure::SOUTH);
                if e & exposure::EAST != 0 {
                    m |= exposure::WEST;
                }
                if e & exposure::WEST != 0 {
                    m |= exposure::EAST;
                }
                out.exposure[dst] = m;
            }
        }
        out
    }

    /// FNV-1a hash over classes and conductor ids, used for solve caching.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |b: u8| {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        };
        for v in [
            self.spec.x_min,
            self.spec.x_max,
            self.spec.y_min,
            self.spec.y_max,
        ] {
            for b in v.to_bits().to_le_bytes() {
                eat(b);
            }
        }
        eat((self.spec.x_divisions & 0xff) as u8);
        eat((self.spec.x_divisions >> 8) as u8);
        eat((self.spec.y_divisions & 0xff) as u8);
        eat((self.spec.y_divisions >> 8) as u8);
        for k in 0..self.classes.len() {
            let c = match self.classes[k] {
                NodeClass::Exterior => 0u8,
                NodeClass::ConductorInterior => 1,
                NodeClass::ConductorSurface => 2,
                NodeClass::OuterBoundary => 3,
            };
            let id = match self.conductor[k] {
                None => 0u8,
                Some(Conductor::Island) => 1,
                Some(Conductor::Ground) => 2,
            };
            eat(c | (id << 4) | (self.exposure[k] << 2));
        }
        h
    }
}

/// Rasterizes the two U-shaped conductors onto the grid.
pub fn rasterize(grid: &GridSpec, s: &StructureParams) -> Result<NodeMask> {
    let l = StructureLayout::compute(grid, s)?;

    let in_range = |v: usize, a: usize, b: usize| v >= a && v <= b;
    let island = move |i: usize, j: usize| {
        let wire = in_range(i, l.i_left_inner, l.i_right_inner)
            && in_range(j, l.j_wire_bottom, l.j_wire_top);
        let left = in_range(i, l.i_left_outer, l.i_left_inner)
            && in_range(j, l.j_island_plate_bottom, l.j_wire_top);
        let right = in_range(i, l.i_right_inner, l.i_right_outer)
            && in_range(j, l.j_island_plate_bottom, l.j_wire_top);
        wire || left || right
    };
    let ground = move |i: usize, j: usize| {
        let wire = in_range(i, l.i_left_inner, l.i_right_inner)
            && in_range(j, l.j_ground_wire_bottom, l.j_ground_wire_top);
        let left = in_range(i, l.i_left_outer, l.i_left_inner)
            && in_range(j, l.j_ground_wire_bottom, l.j_ground_plate_top);
        let right = in_range(i, l.i_right_inner, l.i_right_outer)
            && in_range(j, l.j_ground_wire_bottom, l.j_ground_plate_top);
        wire || left || right
    };

    NodeMask::from_node_sets(*grid, island, ground)
}

/// Rectangular uniform-field region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub x_extent_n: f64,
    pub x_extent_p: f64,
    pub y_extent_n: f64,
    pub y_extent_p: f64,
    pub b0: f64,
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.x_extent_n > self.x_extent_p || self.y_extent_n > self.y_extent_p {
            return Err(Error::InvalidParameter {
                what: "field extents",
                message: format!(
                    "need x_extent_n <= x_extent_p and y_extent_n <= y_extent_p, got x [{}, {}], y [{}, {}]",
                    self.x_extent_n, self.x_extent_p, self.y_extent_n, self.y_extent_p
                ),
            });
        }
        Ok(())
    }

    pub fn zero() -> FieldSpec {
        FieldSpec {
            x_extent_n: 0.0,
            x_extent_p: 0.0,
            y_extent_n: 0.0,
            y_extent_p: 0.0,
            b0: 0.0,
        }
    }
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

/// Node values of the field: `b0` weighted by the fraction of the node's
/// cell inside the rectangle. On-grid edges get exactly 1/2, corners 1/4;
/// the field is associated with lattice points.
pub fn field_values_unmasked(grid: &GridSpec, f: &FieldSpec) -> Result<ScalarGrid> {
    f.validate()?;
    let (hx, hy) = (grid.h_x(), grid.h_y());
    let mut out = ScalarGrid::zeros(*grid);
    for j in 0..grid.ny() {
        let y = grid.y(j);
        let wy = overlap(y - hy / 2.0, y + hy / 2.0, f.y_extent_n, f.y_extent_p) / hy;
        if wy == 0.0 {
            continue;
        }
        for i in 0..grid.nx() {
            let x = grid.x(i);
            let wx = overlap(x - hx / 2.0, x + hx / 2.0, f.x_extent_n, f.x_extent_p) / hx;
            if wx != 0.0 {
                out.set(i, j, f.b0 * wx * wy);
            }
        }
    }
    Ok(out)
}

/// Field values with the conductor-interior exclusion check.
pub fn field_values(mask: &NodeMask, f: &FieldSpec) -> Result<ScalarGrid> {
    let out = field_values_unmasked(&mask.spec, f)?;
    for j in 0..mask.spec.ny() {
        for i in 0..mask.spec.nx() {
            if out.at(i, j) != 0.0 && mask.class(i, j) == NodeClass::ConductorInterior {
                return Err(Error::FieldInConductor { i, j });
            }
        }
    }
    Ok(out)
}

/// Discrete surface integral of the field over the whole grid, summed in
/// fixed row-major order.
pub fn total_flux(b: &ScalarGrid) -> f64 {
    let cell = b.spec.h_x() * b.spec.h_y();
    let mut sum = 0.0;
    for v in &b.values {
        sum += v;
    }
    sum * cell
}

/// Flux over the half-plane left of node column `i_split`; nodes on the
/// column itself count at half weight, matching the discrete circulation
/// identity for a loop through that column.
pub fn flux_left_of(b: &ScalarGrid, i_split: usize) -> f64 {
    let spec = b.spec;
    let cell = spec.h_x() * spec.h_y();
    let mut sum = 0.0;
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            let v = b.at(i, j);
            if v == 0.0 {
                continue;
            }
            if i < i_split {
                sum += v;
            } else if i == i_split {
                sum += 0.5 * v;
            }
        }
    }
    sum * cell
}

/// The standard study geometries, used by tests and shipped configs.
pub mod presets {
    use super::*;

    /// 128x128 grid over `[-1, 1]^2`.
    pub fn grid_128() -> GridSpec {
        GridSpec::new(-1.0, 1.0, -1.0, 1.0, 128, 128).unwrap()
    }

    /// Centered-flux structural specification (wire at pos = 1/2).
    pub fn structure_centered(w_l: f64, w_r: f64) -> StructureParams {
        StructureParams {
            lsc: 1.0 / 8.0,
            w_l,
            w_r,
            d: 7.0 / 16.0,
            pos: 0.5,
            t: 1.0 / 64.0,
        }
    }

    /// Centered field square of half-width 1/16.
    pub fn field_centered() -> FieldSpec {
        FieldSpec {
            x_extent_n: -1.0 / 16.0,
            x_extent_p: 1.0 / 16.0,
            y_extent_n: -1.0 / 16.0,
            y_extent_p: 1.0 / 16.0,
            b0: 1.0,
        }
    }

    /// Wide-plate structure with the narrow U gap (pos = 1/4, d = 14/64).
    pub fn structure_wide_plates() -> StructureParams {
        StructureParams {
            lsc: 1.0 / 8.0,
            w_l: 3.0 / 8.0,
            w_r: 3.0 / 8.0,
            d: 14.0 / 64.0,
            pos: 0.25,
            t: 1.0 / 64.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid16() -> GridSpec {
        GridSpec::new(-1.0, 1.0, -1.0, 1.0, 16, 16).unwrap()
    }

    fn small_structure() -> StructureParams {
        StructureParams {
            lsc: 0.25,
            w_l: 0.25,
            w_r: 0.25,
            d: 0.25,
            pos: 0.5,
            t: 0.125,
        }
    }

    /// Hand enumeration of all 289 nodes of the 16x16 case.
    #[test]
    fn hand_enumerated_mask_matches() {
        let mask = rasterize(&grid16(), &small_structure()).unwrap();
        // Rows listed top (j = 16) to bottom (j = 0).
        // B boundary, . exterior, S surface, I interior.
        let expected = [
            "BBBBBBBBBBBBBBBBB",
            "B...............B",
            "B...............B",
            "B...SSSSSSSSS...B",
            "B...SIISSSIIS...B",
            "B...SIS...SIS...B",
            "B...SIS...SIS...B",
            "B...SSS...SSS...B",
            "B...............B",
            "B...SSS...SSS...B",
            "B...SIS...SIS...B",
            "B...SIS...SIS...B",
            "B...SIISSSIIS...B",
            "B...SSSSSSSSS...B",
            "B...............B",
            "B...............B",
            "BBBBBBBBBBBBBBBBB",
        ];
        for (row, line) in expected.iter().enumerate() {
            let j = 16 - row;
            for (i, ch) in line.chars().enumerate() {
                let want = match ch {
                    'B' => NodeClass::OuterBoundary,
                    '.' => NodeClass::Exterior,
                    'S' => NodeClass::ConductorSurface,
                    'I' => NodeClass::ConductorInterior,
                    _ => unreachable!(),
                };
                assert_eq!(mask.class(i, j), want, "node ({i}, {j})");
            }
        }
        // Conductor ids split at y = 0.
        assert_eq!(mask.conductor(8, 13), Some(Conductor::Island));
        assert_eq!(mask.conductor(8, 3), Some(Conductor::Ground));
        assert_eq!(mask.conductor(8, 8), None);
        // Corner surface node carries the corner pair of normals.
        assert_eq!(
            mask.exposure(4, 9),
            exposure::WEST | exposure::SOUTH,
            "plate bottom-left corner"
        );
        // Flat wire-bottom face node exposes only south.
        assert_eq!(mask.exposure(8, 12), exposure::SOUTH);
        // Inner plate face exposes east.
        assert_eq!(mask.exposure(6, 11), exposure::EAST);
    }

    #[test]
    fn every_surface_node_has_an_exterior_neighbor() {
        let grid = presets::grid_128();
        let mask = rasterize(&grid, &presets::structure_centered(1.0 / 16.0, 1.0 / 16.0)).unwrap();
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if mask.class(i, j) == NodeClass::ConductorSurface {
                    assert!(mask.exposure(i, j) != 0);
                    let exterior_neighbor = [
                        (i + 1, j),
                        (i - 1, j),
                        (i, j + 1),
                        (i, j - 1),
                    ]
                    .iter()
                    .any(|&(a, b)| mask.class(a, b) == NodeClass::Exterior);
                    assert!(exterior_neighbor, "surface node ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn centered_mask_is_symmetric_under_both_reflections() {
        let grid = presets::grid_128();
        let mask = rasterize(&grid, &presets::structure_centered(1.0 / 16.0, 1.0 / 16.0)).unwrap();
        let n = grid.x_divisions;
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                assert_eq!(mask.class(i, j), mask.class(n - i, j), "x mirror ({i},{j})");
                assert_eq!(mask.class(i, j), mask.class(i, n - j), "y mirror ({i},{j})");
            }
        }
        // Island node set reflects onto the ground node set about y = 0.
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let here = mask.conductor(i, j);
                let there = mask.conductor(i, n - j);
                match (here, there) {
                    (Some(Conductor::Island), x) => assert_eq!(x, Some(Conductor::Ground)),
                    (Some(Conductor::Ground), x) => assert_eq!(x, Some(Conductor::Island)),
                    (None, x) => assert_eq!(x, None),
                }
            }
        }
    }

    #[test]
    fn mirror_property_swapping_widths() {
        let grid = presets::grid_128();
        let s = presets::structure_centered(2.0 / 16.0, 1.0 / 16.0);
        let mask = rasterize(&grid, &s).unwrap();
        let mirrored = rasterize(&grid, &s.mirrored_x()).unwrap();
        assert_eq!(mask.mirrored_x(), mirrored);
    }

    #[test]
    fn rasterize_is_deterministic() {
        let grid = presets::grid_128();
        let s = presets::structure_wide_plates();
        let a = rasterize(&grid, &s).unwrap();
        let b = rasterize(&grid, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn off_grid_edge_is_rejected() {
        let grid = grid16();
        let mut s = small_structure();
        s.lsc = 0.2; // not a multiple of h = 1/8
        assert!(matches!(
            rasterize(&grid, &s),
            Err(Error::GeometryOffGrid { .. })
        ));
    }

    #[test]
    fn touching_conductors_are_rejected() {
        let grid = grid16();
        let mut s = small_structure();
        // d = 3/8 puts the island plate bottom at y = 0 and the mirrored
        // ground plate top there too: shared row.
        s.d = 0.375;
        assert!(matches!(rasterize(&grid, &s), Err(Error::GeometryOverlap)));
    }

    #[test]
    fn margin_violation_is_rejected() {
        let grid = grid16();
        let mut s = small_structure();
        s.w_l = 0.875; // left plate outer face at x = -1.125: off grid
        assert!(rasterize(&grid, &s).is_err());
        s.w_l = 0.75; // outer face at x = -1.0: on the boundary itself
        assert!(matches!(
            rasterize(&grid, &s),
            Err(Error::MarginViolation { .. })
        ));
    }

    #[test]
    fn thin_wire_warning() {
        let s = small_structure(); // t = d/2: warn
        assert_eq!(s.warnings().len(), 1);
        let ok = StructureParams {
            t: 0.03125,
            ..small_structure()
        };
        assert!(ok.warnings().is_empty());
    }

    #[test]
    fn field_weights_give_exact_rectangle_area() {
        let grid = presets::grid_128();
        let b = field_values_unmasked(&grid, &presets::field_centered()).unwrap();
        // Closed form: the rectangle has area (1/8)^2 = 1/64.
        assert!((total_flux(&b) - 1.0 / 64.0).abs() < 1e-12);
        // Edge and corner weights.
        assert_eq!(b.at(64, 64), 1.0);
        assert_eq!(b.at(60, 64), 0.5);
        assert_eq!(b.at(60, 60), 0.25);
        assert_eq!(b.at(59, 64), 0.0);
    }

    #[test]
    fn degenerate_field_region_is_zero() {
        let grid = grid16();
        let f = FieldSpec {
            x_extent_n: 0.25,
            x_extent_p: 0.25,
            y_extent_n: -0.5,
            y_extent_p: 0.5,
            b0: 3.0,
        };
        let b = field_values_unmasked(&grid, &f).unwrap();
        assert!(b.values.iter().all(|v| *v == 0.0));
        assert_eq!(total_flux(&b), 0.0);
    }

    #[test]
    fn field_in_conductor_is_rejected() {
        let grid = grid16();
        let mask = rasterize(&grid, &small_structure()).unwrap();
        let f = FieldSpec {
            x_extent_n: -1.0,
            x_extent_p: 1.0,
            y_extent_n: -1.0,
            y_extent_p: 1.0,
            b0: 1.0,
        };
        assert!(matches!(
            field_values(&mask, &f),
            Err(Error::FieldInConductor { .. })
        ));
    }

    #[test]
    fn flux_is_linear_in_b0() {
        let grid = presets::grid_128();
        let mut f = presets::field_centered();
        let phi1 = total_flux(&field_values_unmasked(&grid, &f).unwrap());
        f.b0 = -2.5;
        let phi2 = total_flux(&field_values_unmasked(&grid, &f).unwrap());
        assert!((phi2 + 2.5 * phi1).abs() < 1e-15);
    }

    #[test]
    fn split_flux_halves_on_symmetric_column() {
        let grid = presets::grid_128();
        let b = field_values_unmasked(&grid, &presets::field_centered()).unwrap();
        let phi = total_flux(&b);
        let left = flux_left_of(&b, 64);
        assert!((left - phi / 2.0).abs() < 1e-14);
        assert!((flux_left_of(&b, 128) - phi).abs() < 1e-14);
        assert_eq!(flux_left_of(&b, 0), 0.0);
    }
}
