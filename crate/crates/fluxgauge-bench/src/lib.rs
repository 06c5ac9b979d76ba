//! Shared scenario builders for the benchmarks.

use fluxgauge::geometry::presets;
use fluxgauge::{FieldSpec, GridSpec, Scenario, SolverOptions, StructureParams};

/// Centered-flux case on an `n x n` grid over `[-1, 1]^2`. The structural
/// coordinates are multiples of 1/64, so the divisions must be a multiple
/// of 128.
pub fn centered_case(n: usize) -> Scenario {
    assert!(n % 128 == 0, "divisions must be a multiple of 128");
    Scenario {
        grid: GridSpec::new(-1.0, 1.0, -1.0, 1.0, n, n).unwrap(),
        structure: presets::structure_centered(2.0 / 16.0, 1.0 / 16.0),
        field: presets::field_centered(),
        junction1_x: None,
        junction2_x: None,
        solver: SolverOptions::default(),
    }
}

/// Wide-plate case with the field in the right capacitor slot.
pub fn slot_case() -> Scenario {
    Scenario {
        grid: presets::grid_128(),
        structure: StructureParams {
            lsc: 1.0 / 8.0,
            w_l: 3.0 / 8.0,
            w_r: 3.0 / 8.0,
            d: 14.0 / 64.0,
            pos: 0.25,
            t: 1.0 / 64.0,
        },
        field: FieldSpec {
            x_extent_n: 2.0 / 8.0,
            x_extent_p: 3.0 / 8.0,
            y_extent_n: -1.0 / 64.0,
            y_extent_p: 1.0 / 64.0,
            b0: 1.0,
        },
        junction1_x: None,
        junction2_x: None,
        solver: SolverOptions::default(),
    }
}
