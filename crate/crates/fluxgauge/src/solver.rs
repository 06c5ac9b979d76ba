//! Assembly and solution of the discrete Poisson/Laplace systems.
//!
//! The 5-point stencil applies at exterior nodes. Conductor-surface nodes
//! get the zero-normal-derivative closure in conservative (flux-balance)
//! form: on flat faces this is exactly the ghost-reflection row (exposed
//! neighbor weight doubled, conductor-side neighbor absent), at convex
//! corners the flux form keeps the matrix symmetric where literal per-face
//! reflection would not. Conductor interiors satisfy the Laplace stencil;
//! they couple one-way to the surface, so the solve runs in two stages:
//! the symmetric exterior+surface block first, then the interior fill.
//!
//! Rows are stored as flux balances (coefficients `face_length / distance`,
//! right-hand side as the field integral over the node's cell), which is
//! the plain stencil scaled by each node's exterior cell area.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{exposure, Conductor, NodeClass, NodeMask};
use crate::grid::{GridSpec, ScalarGrid};

/// Linear solve backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cg,
    Sor,
    DenseDirect,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Cg => "cg",
            Method::Sor => "sor",
            Method::DenseDirect => "dense",
        }
    }
}

/// Outcome diagnostics of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_norm: f64,
    pub method: Method,
    pub wall_time: f64,
    pub converged: bool,
}

/// Outer-boundary Dirichlet data.
#[derive(Clone, Copy)]
pub enum BoundaryValue {
    Const(f64),
    /// Value as a function of physical coordinates; used by manufactured
    /// solution tests.
    Fn(fn(f64, f64) -> f64),
}

impl BoundaryValue {
    fn at(&self, x: f64, y: f64) -> f64 {
        match self {
            BoundaryValue::Const(v) => *v,
            BoundaryValue::Fn(f) => f(x, y),
        }
    }
}

/// Dirichlet assignment: the outer boundary always, conductors only in
/// electrostatic mode (`island`/`ground` set).
#[derive(Clone, Copy)]
pub struct DirichletSpec {
    pub boundary: BoundaryValue,
    pub island: Option<f64>,
    pub ground: Option<f64>,
}

impl DirichletSpec {
    /// Stream-function default: zero at the finite "infinity", Neumann
    /// surfaces.
    pub fn magnetostatic() -> Self {
        DirichletSpec {
            boundary: BoundaryValue::Const(0.0),
            island: None,
            ground: None,
        }
    }

    /// Electrostatic default: island at 1, ground and boundary at 0.
    pub fn electrostatic() -> Self {
        DirichletSpec {
            boundary: BoundaryValue::Const(0.0),
            island: Some(1.0),
            ground: Some(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Fixed(f64),
    Primary(usize),
    Secondary(usize),
}

/// Compressed sparse rows; symmetric for the primary block.
#[derive(Debug, Clone, Default)]
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn rows(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.rows() {
            let mut acc = 0.0;
            for k in self.offsets[r]..self.offsets[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows()];
        for r in 0..self.rows() {
            for k in self.offsets[r]..self.offsets[r + 1] {
                if self.cols[k] == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }

    #[cfg(test)]
    fn is_symmetric(&self, tol: f64) -> bool {
        for r in 0..self.rows() {
            for k in self.offsets[r]..self.offsets[r + 1] {
                let c = self.cols[k];
                let v = self.vals[k];
                let mut found = false;
                for k2 in self.offsets[c]..self.offsets[c + 1] {
                    if self.cols[k2] == r {
                        if (self.vals[k2] - v).abs() > tol {
                            return false;
                        }
                        found = true;
                        break;
                    }
                }
                if !found && v.abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

struct CsrBuilder {
    rows: Vec<Vec<(usize, f64)>>,
}

impl CsrBuilder {
    fn new(n: usize) -> Self {
        CsrBuilder {
            rows: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, r: usize, c: usize, v: f64) {
        self.rows[r].push((c, v));
    }

    fn build(mut self) -> Csr {
        let mut csr = Csr::default();
        csr.offsets.push(0);
        for row in &mut self.rows {
            row.sort_by_key(|(c, _)| *c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                if let Some(last) = merged.last_mut() {
                    if last.0 == c {
                        last.1 += v;
                        continue;
                    }
                }
                merged.push((c, v));
            }
            for (c, v) in merged {
                csr.cols.push(c);
                csr.vals.push(v);
            }
            csr.offsets.push(csr.cols.len());
        }
        csr
    }
}

/// The assembled system: a symmetric primary block over exterior and
/// surface unknowns, plus the conductor-interior Laplace block that hangs
/// off it.
pub struct LinearSystem {
    pub spec: GridSpec,
    role: Vec<Role>,
    primary: Csr,
    primary_rhs: Vec<f64>,
    primary_nodes: Vec<usize>,
    /// Exterior cell area per primary row, for normalizing rows back to the
    /// per-spacing-squared stencil view.
    primary_area: Vec<f64>,
    secondary: Csr,
    /// Couplings of interior rows to nodes outside the interior block:
    /// `(row, node, coefficient)`, folded into the stage-2 rhs.
    secondary_coupling: Vec<(usize, usize, f64)>,
    secondary_nodes: Vec<usize>,
}

impl LinearSystem {
    pub fn unknown_count(&self) -> usize {
        self.primary_nodes.len() + self.secondary_nodes.len()
    }

    pub fn primary_unknown_count(&self) -> usize {
        self.primary_nodes.len()
    }

    /// Coordinate-format dump of the primary block and its rhs, for
    /// external verification.
    pub fn dump_coo(&self) -> String {
        let mut out = String::new();
        out.push_str("# row col value\n");
        for r in 0..self.primary.rows() {
            for k in self.primary.offsets[r]..self.primary.offsets[r + 1] {
                out.push_str(&format!(
                    "{} {} {}\n",
                    r, self.primary.cols[k], self.primary.vals[k]
                ));
            }
        }
        out.push_str("# rhs\n");
        for (r, v) in self.primary_rhs.iter().enumerate() {
            out.push_str(&format!("{} {}\n", r, v));
        }
        out
    }

    /// Primary row for grid node `(i, j)` as `(diagonal, neighbors)`,
    /// normalized by the node's exterior cell area so flat surface rows
    /// compare directly against the doubled-neighbor ghost form. Neighbor
    /// entries are `(i, j, coefficient)`. `None` for non-primary nodes.
    pub fn normalized_primary_row(
        &self,
        i: usize,
        j: usize,
    ) -> Option<(f64, Vec<(usize, usize, f64)>)> {
        let Role::Primary(r) = self.role[self.spec.idx(i, j)] else {
            return None;
        };
        let area = self.primary_area[r];
        let mut diag = 0.0;
        let mut nbrs = Vec::new();
        for k in self.primary.offsets[r]..self.primary.offsets[r + 1] {
            let c = self.primary.cols[k];
            let v = self.primary.vals[k] / area;
            if c == r {
                diag = v;
            } else {
                let node = self.primary_nodes[c];
                nbrs.push((node % self.spec.nx(), node / self.spec.nx(), v));
            }
        }
        Some((diag, nbrs))
    }
}

/// Assembles the discrete system for a mask, right-hand side, and Dirichlet
/// assignment.
pub fn assemble(
    mask: &NodeMask,
    rhs_field: &ScalarGrid,
    dirichlet: &DirichletSpec,
) -> Result<LinearSystem> {
    if rhs_field.spec != mask.spec {
        return Err(Error::InconsistentGrids);
    }
    let spec = mask.spec;
    let (nx, ny) = (spec.nx(), spec.ny());
    let (hx, hy) = (spec.h_x(), spec.h_y());
    let electrostatic = dirichlet.island.is_some() || dirichlet.ground.is_some();

    // Conductor-covered plaquettes: all four corner nodes belong to a
    // conductor. Quadrants of a node's cell inside such plaquettes are
    // excluded from its flux balance.
    let mut covered = vec![false; (nx - 1) * (ny - 1)];
    for pj in 0..ny - 1 {
        for pi in 0..nx - 1 {
            covered[pj * (nx - 1) + pi] = mask.is_conductor(pi, pj)
                && mask.is_conductor(pi + 1, pj)
                && mask.is_conductor(pi, pj + 1)
                && mask.is_conductor(pi + 1, pj + 1);
        }
    }
    let plaq_covered = |pi: isize, pj: isize| -> bool {
        if pi < 0 || pj < 0 || pi as usize >= nx - 1 || pj as usize >= ny - 1 {
            // Out of range only for boundary nodes, which are never assembled.
            return true;
        }
        covered[pj as usize * (nx - 1) + pi as usize]
    };
    // Exterior fraction of the face between (i, j) and its `dir` neighbor:
    // half per uncovered plaquette adjacent to that face.
    let face_fraction = |i: usize, j: usize, dir: u8| -> f64 {
        let (i, j) = (i as isize, j as isize);
        let (p1, p2) = match dir {
            exposure::EAST => ((i, j - 1), (i, j)),
            exposure::WEST => ((i - 1, j - 1), (i - 1, j)),
            exposure::NORTH => ((i - 1, j), (i, j)),
            exposure::SOUTH => ((i - 1, j - 1), (i, j - 1)),
            _ => unreachable!(),
        };
        let mut f = 0.0;
        if !plaq_covered(p1.0, p1.1) {
            f += 0.5;
        }
        if !plaq_covered(p2.0, p2.1) {
            f += 0.5;
        }
        f
    };
    let exterior_quadrants = |i: usize, j: usize| -> f64 {
        let (i, j) = (i as isize, j as isize);
        let mut q = 0.0;
        for (pi, pj) in [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)] {
            if !plaq_covered(pi, pj) {
                q += 0.25;
            }
        }
        q
    };

    // Assign roles.
    let mut role = vec![Role::Fixed(0.0); spec.node_count()];
    let mut primary_nodes = Vec::new();
    let mut secondary_nodes = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = spec.idx(i, j);
            role[k] = match mask.class(i, j) {
                NodeClass::OuterBoundary => {
                    Role::Fixed(dirichlet.boundary.at(spec.x(i), spec.y(j)))
                }
                NodeClass::Exterior => {
                    primary_nodes.push(k);
                    Role::Primary(primary_nodes.len() - 1)
                }
                NodeClass::ConductorSurface | NodeClass::ConductorInterior => {
                    if electrostatic {
                        let v = match mask.conductor(i, j) {
                            Some(Conductor::Island) => dirichlet.island.unwrap_or(0.0),
                            Some(Conductor::Ground) => dirichlet.ground.unwrap_or(0.0),
                            None => unreachable!("conductor class without id"),
                        };
                        Role::Fixed(v)
                    } else if mask.class(i, j) == NodeClass::ConductorSurface {
                        primary_nodes.push(k);
                        Role::Primary(primary_nodes.len() - 1)
                    } else {
                        secondary_nodes.push(k);
                        Role::Secondary(secondary_nodes.len() - 1)
                    }
                }
            };
        }
    }
    if primary_nodes.is_empty() {
        return Err(Error::EmptySystem);
    }

    let n1 = primary_nodes.len();
    let mut builder = CsrBuilder::new(n1);
    let mut rhs = vec![0.0; n1];
    let mut areas = vec![0.0; n1];
    let cell = hx * hy;

    for (r, &node) in primary_nodes.iter().enumerate() {
        let (i, j) = (node % nx, node / nx);
        let surface = mask.class(i, j) == NodeClass::ConductorSurface;
        let mut diag = 0.0;
        let dirs = [
            (exposure::EAST, i + 1, j, hy / hx),
            (exposure::WEST, i - 1, j, hy / hx),
            (exposure::NORTH, i, j + 1, hx / hy),
            (exposure::SOUTH, i, j - 1, hx / hy),
        ];
        for (dir, ni, nj, base) in dirs {
            let frac = if surface { face_fraction(i, j, dir) } else { 1.0 };
            if frac == 0.0 {
                continue;
            }
            let coeff = frac * base;
            match role[spec.idx(ni, nj)] {
                Role::Fixed(v) => {
                    diag -= coeff;
                    rhs[r] -= coeff * v;
                }
                Role::Primary(c) => {
                    diag -= coeff;
                    builder.add(r, c, coeff);
                }
                // Face toward a conductor-interior node (concave-corner
                // nook): no flux crosses the conductor boundary.
                Role::Secondary(_) => {}
            }
        }
        builder.add(r, r, diag);
        let area = if surface {
            exterior_quadrants(i, j)
        } else {
            1.0
        };
        areas[r] = area * cell;
        // Right-hand side: the field integral over the node's full cell.
        // The nodal field values already carry the cell-overlap weighting,
        // and the conductor-interior exclusion keeps field support out of
        // covered quadrants, so this conserves the total flux exactly
        // (surface rows included, e.g. a field edge flush with a plate).
        rhs[r] += rhs_field.at(i, j) * cell;
    }
    let primary = builder.build();

    // Interior Laplace block (magnetostatic only): plain 5-point rows with
    // couplings to surface values folded at solve time.
    let n2 = secondary_nodes.len();
    let mut builder2 = CsrBuilder::new(n2);
    let mut coupling = Vec::new();
    for (r, &node) in secondary_nodes.iter().enumerate() {
        let (i, j) = (node % nx, node / nx);
        let mut diag = 0.0;
        let dirs = [
            (i + 1, j, hy / hx),
            (i - 1, j, hy / hx),
            (i, j + 1, hx / hy),
            (i, j - 1, hx / hy),
        ];
        for (ni, nj, base) in dirs {
            let nk = spec.idx(ni, nj);
            diag -= base;
            match role[nk] {
                Role::Secondary(c) => builder2.add(r, c, base),
                Role::Primary(_) | Role::Fixed(_) => coupling.push((r, nk, base)),
            }
        }
        builder2.add(r, r, diag);
    }

    Ok(LinearSystem {
        spec,
        role,
        primary,
        primary_rhs: rhs,
        primary_nodes,
        primary_area: areas,
        secondary: builder2.build(),
        secondary_coupling: coupling,
        secondary_nodes,
    })
}

/// Solves the assembled system and returns the full node field plus a
/// report. Stage one covers the symmetric exterior+surface block; stage two
/// fills conductor interiors.
pub fn solve(
    sys: &LinearSystem,
    method: Method,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarGrid, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            what: "solver tolerance",
            message: format!("tol must be positive, got {tol}"),
        });
    }
    let start = Instant::now();
    let auto_iters = |n: usize| 200 + 50 * (n as f64).sqrt().ceil() as usize;

    let cap1 = if max_iter == 0 {
        auto_iters(sys.primary.rows())
    } else {
        max_iter
    };
    let stage1 = run_block(&sys.primary, &sys.primary_rhs, method, tol, cap1)?;

    let mut grid = ScalarGrid::zeros(sys.spec);
    for (k, role) in sys.role.iter().enumerate() {
        match role {
            Role::Fixed(v) => grid.values[k] = *v,
            Role::Primary(r) => grid.values[k] = stage1.x[*r],
            Role::Secondary(_) => {}
        }
    }

    let mut iterations = stage1.iterations;
    let mut residual = stage1.residual;
    let mut converged = stage1.converged;

    if !sys.secondary_nodes.is_empty() {
        let mut rhs2 = vec![0.0; sys.secondary_nodes.len()];
        for &(r, node, coeff) in &sys.secondary_coupling {
            rhs2[r] -= coeff * grid.values[node];
        }
        let cap2 = if max_iter == 0 {
            auto_iters(sys.secondary.rows())
        } else {
            max_iter
        };
        let stage2 = run_block(&sys.secondary, &rhs2, method, tol, cap2)?;
        for (r, &node) in sys.secondary_nodes.iter().enumerate() {
            grid.values[node] = stage2.x[r];
        }
        iterations += stage2.iterations;
        residual = residual.max(stage2.residual);
        converged = converged && stage2.converged;
    }

    let report = SolveReport {
        iterations,
        residual_norm: residual,
        method,
        wall_time: start.elapsed().as_secs_f64(),
        converged,
    };
    if !converged {
        return Err(Error::NoConvergence(report));
    }
    Ok((grid, report))
}

struct BlockSolution {
    x: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn run_block(a: &Csr, b: &[f64], method: Method, tol: f64, max_iter: usize) -> Result<BlockSolution> {
    let n = a.rows();
    if n == 0 {
        return Ok(BlockSolution {
            x: Vec::new(),
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }
    if norm(b) == 0.0 {
        return Ok(BlockSolution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }
    match method {
        Method::Cg => Ok(cg_jacobi(a, b, tol, max_iter)),
        Method::Sor => Ok(sor(a, b, tol, max_iter)),
        Method::DenseDirect => dense_direct(a, b),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Jacobi-preconditioned conjugate gradient on the negated (positive
/// definite) block. Deterministic: fixed summation order throughout.
fn cg_jacobi(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> BlockSolution {
    let n = a.rows();
    // Flux-form rows are negative definite; negate to get SPD.
    let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
    let inv_diag: Vec<f64> = a.diag().iter().map(|d| 1.0 / (-d)).collect();
    let bnorm = norm(&neg_b);

    let mut x = vec![0.0; n];
    let mut r = neg_b;
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];

    let mut iterations = 0;
    let mut residual = norm(&r) / bnorm;
    while residual > tol && iterations < max_iter {
        a.matvec(&p, &mut ap);
        for v in ap.iter_mut() {
            *v = -*v;
        }
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        iterations += 1;
        residual = norm(&r) / bnorm;
    }
    BlockSolution {
        x,
        iterations,
        residual,
        converged: residual <= tol,
    }
}

/// Forward SOR sweeps with a Poisson-tuned relaxation factor.
fn sor(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> BlockSolution {
    let n = a.rows();
    let diag = a.diag();
    let m = (n as f64).sqrt().max(4.0);
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / m).sin());
    let bnorm = norm(b);

    let mut x = vec![0.0; n];
    let mut residual = 1.0;
    let mut iterations = 0;
    let mut r = vec![0.0; n];
    while iterations < max_iter {
        for row in 0..n {
            let mut acc = b[row];
            for k in a.offsets[row]..a.offsets[row + 1] {
                let c = a.cols[k];
                if c != row {
                    acc -= a.vals[k] * x[c];
                }
            }
            let x_new = acc / diag[row];
            x[row] += omega * (x_new - x[row]);
        }
        iterations += 1;
        a.matvec(&x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        residual = norm(&r) / bnorm;
        if residual <= tol {
            break;
        }
    }
    BlockSolution {
        x,
        iterations,
        residual,
        converged: residual <= tol,
    }
}

/// Dense LU with partial pivoting; the oracle backend for small systems.
fn dense_direct(a: &Csr, b: &[f64]) -> Result<BlockSolution> {
    let n = a.rows();
    let mut m = vec![0.0; n * n];
    for r in 0..n {
        for k in a.offsets[r]..a.offsets[r + 1] {
            m[r * n + a.cols[k]] = a.vals[k];
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[perm[col] * n + col].abs();
        for row in col + 1..n {
            let v = m[perm[row] * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularSystem);
        }
        perm.swap(col, pivot);
        let prow = perm[col];
        let pval = m[prow * n + col];
        for row in col + 1..n {
            let rrow = perm[row];
            let f = m[rrow * n + col] / pval;
            if f == 0.0 {
                continue;
            }
            m[rrow * n + col] = f;
            for c in col + 1..n {
                m[rrow * n + c] -= f * m[prow * n + c];
            }
        }
    }
    let mut y = vec![0.0; n];
    for row in 0..n {
        let mut acc = b[perm[row]];
        for c in 0..row {
            acc -= m[perm[row] * n + c] * y[c];
        }
        y[row] = acc;
    }
    for row in (0..n).rev() {
        let mut acc = y[row];
        for c in row + 1..n {
            acc -= m[perm[row] * n + c] * y[c];
        }
        y[row] = acc / m[perm[row] * n + row];
    }
    let mut r = vec![0.0; n];
    a.matvec(&y, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let bnorm = norm(b);
    let residual = if bnorm > 0.0 { norm(&r) / bnorm } else { norm(&r) };
    Ok(BlockSolution {
        x: y,
        iterations: 1,
        residual,
        converged: true,
    })
}
