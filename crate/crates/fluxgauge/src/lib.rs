//! Finite-difference field solver for a parallel-plate SQUID cross
//! section.
//!
//! The library solves the stream-function Poisson problem for a uniform
//! magnetic-field region threading a two-conductor geometry, extracts the
//! junction gauge parameters alpha1/alpha2 as line integrals across the
//! capacitor gaps, computes electrostatic junction capacitance ratios from
//! the companion Laplace problem, and runs the self-consistency battery
//! (loop integrals, grid refinement, domain scaling) that certifies the
//! numbers.
//!
//! Quantities come in two evaluation conventions throughout: SM (discrete
//! summation over grid nodes) and IM (quadrature over a bicubic
//! interpolant of the solution).

pub mod config;
pub mod electrostatics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod integrals;
pub mod interp;
pub mod report;
pub mod scenario;
pub mod solver;
pub mod sweep;
pub mod verification;

pub use config::{load_config, Config, RawConfig};
pub use electrostatics::{capacitance_ratios, solve_potential, CapacitanceReport};
pub use error::{Error, Result};
pub use geometry::{
    field_values, rasterize, total_flux, Conductor, FieldSpec, NodeClass, NodeMask,
    StructureLayout, StructureParams,
};
pub use grid::{GridSpec, ScalarGrid, VectorGrid};
pub use integrals::{
    compute_alphas, junction_alpha_extremes, loop_integral, path_integral_im, path_integral_sm,
    vector_potential, AlphaExtremes, AlphaPrediction, AlphaReport, GapRange, JunctionPaths,
    PathSpec, Variant,
};
pub use scenario::{MagnetostaticSolution, Scenario, SolverOptions};
pub use solver::{assemble, solve, DirichletSpec, LinearSystem, Method, SolveReport};
pub use sweep::{run_sweep, SweepAxis, SweepDef, SweepTable};
pub use verification::{
    compare_to_prediction, domain_scaling_check, loop_battery, refinement_check, standard_loops,
    standard_loops_clear, ConsistencyReport, PredictionComparison, PredictionVerdict, Tolerances,
};
