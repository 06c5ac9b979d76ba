//! Uniform rectangular grid and node-indexed scalar fields.

use crate::error::{Error, Result};

/// Uniform rectangular grid over `[x_min, x_max] x [y_min, y_max]`.
///
/// Node `(i, j)` sits at `(x_min + i*h_x, y_min + j*h_y)` with
/// `0 <= i <= x_divisions`, `0 <= j <= y_divisions`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub x_divisions: usize,
    pub y_divisions: usize,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        x_divisions: usize,
        y_divisions: usize,
    ) -> Result<Self> {
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidParameter {
                what: "grid extents",
                message: format!("need x_max > x_min and y_max > y_min, got x [{x_min}, {x_max}], y [{y_min}, {y_max}]"),
            });
        }
        if x_divisions < 8 || y_divisions < 8 {
            return Err(Error::InvalidParameter {
                what: "grid divisions",
                message: format!("need at least 8 divisions per axis, got {x_divisions} x {y_divisions}"),
            });
        }
        Ok(GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            x_divisions,
            y_divisions,
        })
    }

    #[inline]
    pub fn h_x(&self) -> f64 {
        (self.x_max - self.x_min) / self.x_divisions as f64
    }

    #[inline]
    pub fn h_y(&self) -> f64 {
        (self.y_max - self.y_min) / self.y_divisions as f64
    }

    /// Nodes per row (`x_divisions + 1`).
    #[inline]
    pub fn nx(&self) -> usize {
        self.x_divisions + 1
    }

    /// Nodes per column (`y_divisions + 1`).
    #[inline]
    pub fn ny(&self) -> usize {
        self.y_divisions + 1
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nx() * self.ny()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx() && j < self.ny());
        j * self.nx() + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h_x()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.h_y()
    }

    /// Maps a physical x coordinate to its node index, requiring it to sit on
    /// a grid line to within 1e-9 of a spacing.
    pub fn x_index(&self, what: &'static str, x: f64) -> Result<usize> {
        Self::on_grid(what, x, self.x_min, self.h_x(), self.x_divisions)
    }

    /// Same as [`GridSpec::x_index`] for a y coordinate.
    pub fn y_index(&self, what: &'static str, y: f64) -> Result<usize> {
        Self::on_grid(what, y, self.y_min, self.h_y(), self.y_divisions)
    }

    fn on_grid(what: &'static str, v: f64, min: f64, h: f64, divisions: usize) -> Result<usize> {
        let t = (v - min) / h;
        let k = t.round();
        if (t - k).abs() > 1e-9 || k < 0.0 || k > divisions as f64 {
            return Err(Error::GeometryOffGrid { what, value: v });
        }
        Ok(k as usize)
    }

    /// Refined copy: `factor`-times the divisions over the same extents.
    pub fn refined(&self, factor: usize) -> Result<GridSpec> {
        GridSpec::new(
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.x_divisions * factor,
            self.y_divisions * factor,
        )
    }

    /// Domain scaled by `scale` about the origin at constant spacing:
    /// extents and divisions both multiply.
    pub fn scaled_domain(&self, scale: usize) -> Result<GridSpec> {
        let s = scale as f64;
        GridSpec::new(
            self.x_min * s,
            self.x_max * s,
            self.y_min * s,
            self.y_max * s,
            self.x_divisions * scale,
            self.y_divisions * scale,
        )
    }
}

/// Node-indexed scalar field on a [`GridSpec`] (row-major, `j` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        ScalarGrid {
            spec,
            values: vec![0.0; spec.node_count()],
        }
    }

    /// Fills node values from a function of physical coordinates.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = ScalarGrid::zeros(spec);
        for j in 0..spec.ny() {
            for i in 0..spec.nx() {
                g.values[spec.idx(i, j)] = f(spec.x(i), spec.y(j));
            }
        }
        g
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.spec.idx(i, j);
        self.values[idx] = v;
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Central x-derivative at interior nodes; one-sided at the outer
    /// boundary. On a zero-Dirichlet boundary the one-sided form equals the
    /// beyond-boundary-zero difference taken at full step, which is what
    /// boundary-completed loops require.
    pub fn dx(&self, i: usize, j: usize) -> f64 {
        let h = self.spec.h_x();
        if i == 0 {
            (self.at(1, j) - self.at(0, j)) / h
        } else if i == self.spec.x_divisions {
            (self.at(i, j) - self.at(i - 1, j)) / h
        } else {
            (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * h)
        }
    }

    /// Same convention for the y-derivative.
    pub fn dy(&self, i: usize, j: usize) -> f64 {
        let h = self.spec.h_y();
        if j == 0 {
            (self.at(i, 1) - self.at(i, 0)) / h
        } else if j == self.spec.y_divisions {
            (self.at(i, j) - self.at(i, j - 1)) / h
        } else {
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * h)
        }
    }

    /// FNV-1a hash over the value bits, used as a solve-cache key.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for v in &self.values {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    }

    /// Grid with values mirrored in x (`i -> x_divisions - i`).
    pub fn mirrored_x(&self) -> ScalarGrid {
        let spec = self.spec;
        let mut out = ScalarGrid::zeros(spec);
        for j in 0..spec.ny() {
            for i in 0..spec.nx() {
                out.values[spec.idx(i, j)] = self.at(spec.x_divisions - i, j);
            }
        }
        out
    }
}

/// Node-indexed 2-vector field, used for the in-plane vector potential.
#[derive(Debug, Clone)]
pub struct VectorGrid {
    pub spec: GridSpec,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
}

impl VectorGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        VectorGrid {
            spec,
            x_values: vec![0.0; spec.node_count()],
            y_values: vec![0.0; spec.node_count()],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        let k = self.spec.idx(i, j);
        (self.x_values[k], self.y_values[k])
    }
}
