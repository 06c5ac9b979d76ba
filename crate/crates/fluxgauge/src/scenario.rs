//! One simulation setup: grid, structure, field, junction placement, and
//! solver options, with the solve pipelines built on top.

use crate::electrostatics::{capacitance_ratios, solve_potential, CapacitanceReport};
use crate::error::Result;
use crate::geometry::{field_values, rasterize, FieldSpec, NodeMask, StructureLayout, StructureParams};
use crate::grid::{GridSpec, ScalarGrid};
use crate::integrals::{compute_alphas, AlphaReport, JunctionPaths, DEFAULT_SAMPLES_PER_CELL};
use crate::solver::{assemble, solve, DirichletSpec, Method, SolveReport};

/// Solver backend selection shared by all stages.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: Method,
    pub tol: f64,
    /// 0 means the automatic cap of `200 + 50 * sqrt(unknowns)`.
    pub max_iter: usize,
    pub samples_per_cell: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::Cg,
            tol: 1e-10,
            max_iter: 0,
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
        }
    }
}

/// A fully specified simulation case.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridSpec,
    pub structure: StructureParams,
    pub field: FieldSpec,
    /// Optional junction x positions (physical coordinates); default is the
    /// x-midpoint of each plate pair.
    pub junction1_x: Option<f64>,
    pub junction2_x: Option<f64>,
    pub solver: SolverOptions,
}

/// Solved stream-function state.
pub struct MagnetostaticSolution {
    pub mask: NodeMask,
    pub field_grid: ScalarGrid,
    pub psi: ScalarGrid,
    pub report: SolveReport,
}

/// Solved electrostatic state.
pub struct ElectrostaticSolution {
    pub mask: NodeMask,
    pub potential: ScalarGrid,
    pub report: SolveReport,
}

impl Scenario {
    pub fn layout(&self) -> Result<StructureLayout> {
        StructureLayout::compute(&self.grid, &self.structure)
    }

    pub fn mask(&self) -> Result<NodeMask> {
        rasterize(&self.grid, &self.structure)
    }

    pub fn field_grid(&self, mask: &NodeMask) -> Result<ScalarGrid> {
        field_values(mask, &self.field)
    }

    /// Junction paths with the configured overrides resolved to columns.
    pub fn junction_paths(&self) -> Result<JunctionPaths> {
        let layout = self.layout()?;
        let j1 = self
            .junction1_x
            .map(|x| self.grid.x_index("junctions.x1", x))
            .transpose()?;
        let j2 = self
            .junction2_x
            .map(|x| self.grid.x_index("junctions.x2", x))
            .transpose()?;
        JunctionPaths::from_layout(&layout, j1, j2)
    }

    pub fn solve_magnetostatic(&self) -> Result<MagnetostaticSolution> {
        let mask = self.mask()?;
        let field_grid = self.field_grid(&mask)?;
        let sys = assemble(&mask, &field_grid, &DirichletSpec::magnetostatic())?;
        let (psi, report) = solve(&sys, self.solver.method, self.solver.tol, self.solver.max_iter)?;
        Ok(MagnetostaticSolution {
            mask,
            field_grid,
            psi,
            report,
        })
    }

    pub fn solve_electrostatic(&self) -> Result<ElectrostaticSolution> {
        let mask = self.mask()?;
        let (potential, report) =
            solve_potential(&mask, self.solver.method, self.solver.tol, self.solver.max_iter)?;
        Ok(ElectrostaticSolution {
            mask,
            potential,
            report,
        })
    }

    /// Gauge parameters for this scenario.
    pub fn alpha_report(&self) -> Result<(AlphaReport, SolveReport)> {
        let solution = self.solve_magnetostatic()?;
        let paths = self.junction_paths()?;
        let report = compute_alphas(
            &solution.psi,
            &solution.field_grid,
            &paths,
            self.solver.samples_per_cell,
        )?;
        Ok((report, solution.report))
    }

    /// Electrostatic capacitance ratios for this scenario.
    pub fn capacitance_report(&self) -> Result<(CapacitanceReport, SolveReport)> {
        let solution = self.solve_electrostatic()?;
        let report = capacitance_ratios(
            &solution.potential,
            &solution.mask,
            &self.structure,
            self.solver.samples_per_cell,
        )?;
        Ok((report, solution.report))
    }

    /// Same physical problem at `factor`-times the grid resolution.
    pub fn refined(&self, factor: usize) -> Result<Scenario> {
        Ok(Scenario {
            grid: self.grid.refined(factor)?,
            ..self.clone()
        })
    }

    /// Same structure and spacing on a domain scaled about the origin.
    pub fn scaled_domain(&self, scale: usize) -> Result<Scenario> {
        Ok(Scenario {
            grid: self.grid.scaled_domain(scale)?,
            ..self.clone()
        })
    }

    pub fn warnings(&self) -> Vec<String> {
        self.structure.warnings()
    }
}
