//! Piecewise-bicubic interpolation of node fields.
//!
//! Tensor-product Catmull-Rom: C1 across cell boundaries, reproduces
//! quadratics exactly (central-difference tangents), cubic-extrapolated
//! ghost nodes at the edges. This is the interpolant behind every IM
//! quantity; SM quantities never touch it.

use crate::grid::ScalarGrid;

/// Catmull-Rom weights for value and derivative at local coordinate u.
#[inline]
fn spline(f0: f64, f1: f64, f2: f64, f3: f64, u: f64) -> f64 {
    let a = -f0 + 3.0 * f1 - 3.0 * f2 + f3;
    let b = 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3;
    let c = -f0 + f2;
    0.5 * (((a * u + b) * u + c) * u) + f1
}

#[inline]
fn spline_deriv(f0: f64, f1: f64, f2: f64, f3: f64, u: f64) -> f64 {
    let a = -f0 + 3.0 * f1 - 3.0 * f2 + f3;
    let b = 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3;
    let c = -f0 + f2;
    0.5 * ((3.0 * a * u + 2.0 * b) * u + c)
}

/// Bicubic view over a scalar grid.
pub struct Bicubic<'a> {
    grid: &'a ScalarGrid,
}

impl<'a> Bicubic<'a> {
    pub fn new(grid: &'a ScalarGrid) -> Self {
        Bicubic { grid }
    }

    /// Node fetch with cubic extrapolation one node past each edge.
    fn node(&self, i: isize, j: isize) -> f64 {
        let nx = self.grid.spec.x_divisions as isize;
        let ny = self.grid.spec.y_divisions as isize;
        let fetch_j = |i: usize, j: isize| -> f64 {
            if j < 0 {
                3.0 * self.grid.at(i, 0) - 3.0 * self.grid.at(i, 1) + self.grid.at(i, 2)
            } else if j > ny {
                let n = ny as usize;
                3.0 * self.grid.at(i, n) - 3.0 * self.grid.at(i, n - 1) + self.grid.at(i, n - 2)
            } else {
                self.grid.at(i, j as usize)
            }
        };
        if i < 0 {
            3.0 * fetch_j(0, j) - 3.0 * fetch_j(1, j) + fetch_j(2, j)
        } else if i > nx {
            let n = nx as usize;
            3.0 * fetch_j(n, j) - 3.0 * fetch_j(n - 1, j) + fetch_j(n - 2, j)
        } else {
            fetch_j(i as usize, j)
        }
    }

    /// Cell index and local coordinate along one axis.
    fn locate(t: f64, min: f64, h: f64, divisions: usize) -> (isize, f64) {
        let s = (t - min) / h;
        let mut k = s.floor() as isize;
        if k < 0 {
            k = 0;
        }
        if k as usize >= divisions {
            k = divisions as isize - 1;
        }
        (k, s - k as f64)
    }

    fn stencil(&self, x: f64, y: f64) -> ([f64; 16], f64, f64) {
        let spec = &self.grid.spec;
        let (kx, u) = Self::locate(x, spec.x_min, spec.h_x(), spec.x_divisions);
        let (ky, v) = Self::locate(y, spec.y_min, spec.h_y(), spec.y_divisions);
        let mut f = [0.0; 16];
        for (row, dj) in (-1..=2).enumerate() {
            for (col, di) in (-1..=2).enumerate() {
                f[row * 4 + col] = self.node(kx + di, ky + dj);
            }
        }
        let mut out = [0.0; 16];
        out.copy_from_slice(&f);
        (out, u, v)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (f, u, v) = self.stencil(x, y);
        let rows: Vec<f64> = (0..4)
            .map(|r| spline(f[r * 4], f[r * 4 + 1], f[r * 4 + 2], f[r * 4 + 3], u))
            .collect();
        spline(rows[0], rows[1], rows[2], rows[3], v)
    }

    pub fn dx(&self, x: f64, y: f64) -> f64 {
        let (f, u, v) = self.stencil(x, y);
        let rows: Vec<f64> = (0..4)
            .map(|r| spline_deriv(f[r * 4], f[r * 4 + 1], f[r * 4 + 2], f[r * 4 + 3], u))
            .collect();
        spline(rows[0], rows[1], rows[2], rows[3], v) / self.grid.spec.h_x()
    }

    pub fn dy(&self, x: f64, y: f64) -> f64 {
        let (f, u, v) = self.stencil(x, y);
        let rows: Vec<f64> = (0..4)
            .map(|r| spline(f[r * 4], f[r * 4 + 1], f[r * 4 + 2], f[r * 4 + 3], u))
            .collect();
        spline_deriv(rows[0], rows[1], rows[2], rows[3], v) / self.grid.spec.h_y()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid() -> GridSpec {
        GridSpec::new(-1.0, 1.0, -1.0, 1.0, 16, 16).unwrap()
    }

    #[test]
    fn reproduces_node_values() {
        let g = ScalarGrid::from_fn(grid(), |x, y| (3.0 * x).sin() + (2.0 * y).cos());
        let interp = Bicubic::new(&g);
        for j in 0..g.spec.ny() {
            for i in 0..g.spec.nx() {
                let v = interp.value(g.spec.x(i), g.spec.y(j));
                assert!((v - g.at(i, j)).abs() < 1e-12, "node ({i}, {j})");
            }
        }
    }

    #[test]
    fn exact_on_quadratics_everywhere() {
        let g = ScalarGrid::from_fn(grid(), |x, y| x * x + y * y - 0.5 * x * y);
        let interp = Bicubic::new(&g);
        let mut t = -0.98;
        while t < 1.0 {
            let (x, y) = (t, 0.77 * t);
            assert!((interp.value(x, y) - (x * x + y * y - 0.5 * x * y)).abs() < 1e-12);
            assert!((interp.dx(x, y) - (2.0 * x - 0.5 * y)).abs() < 1e-10);
            assert!((interp.dy(x, y) - (2.0 * y - 0.5 * x)).abs() < 1e-10);
            t += 0.0831;
        }
    }

    #[test]
    fn c1_across_cell_boundaries() {
        let g = ScalarGrid::from_fn(grid(), |x, y| (2.1 * x + 0.3).sin() * (1.7 * y).cos());
        let interp = Bicubic::new(&g);
        let xb = g.spec.x(7);
        let eps = 1e-9;
        for &y in &[-0.4, 0.03, 0.88] {
            let left = interp.dx(xb - eps, y);
            let right = interp.dx(xb + eps, y);
            assert!((left - right).abs() < 1e-5, "dx jump {} at y={y}", left - right);
            let vl = interp.value(xb - eps, y);
            let vr = interp.value(xb + eps, y);
            assert!((vl - vr).abs() < 1e-8);
        }
    }

    #[test]
    fn mirror_symmetric_data_gives_mirror_symmetric_interpolant() {
        let g = ScalarGrid::from_fn(grid(), |x, y| (x * x * 3.0).cos() + y * y);
        let interp = Bicubic::new(&g);
        for &(x, y) in &[(0.31, -0.22), (0.61, 0.57), (0.93, 0.11)] {
            assert!((interp.value(x, y) - interp.value(-x, y)).abs() < 1e-12);
            assert!((interp.dx(x, y) + interp.dx(-x, y)).abs() < 1e-10);
        }
    }
}
